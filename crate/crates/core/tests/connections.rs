mod common;

use almost_hermitian::connections::{Connection, ConnectionKind};
use almost_hermitian::curvatures::Geometry;
use almost_hermitian::hermitian::AlmostHermitianStructure;
use almost_hermitian::tensor::{InvariantTensor, Mat};
use common::perturbed_structures;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Levi-Civita coefficients from the Koszul formula for invariant fields:
/// `2 g(D_X Y, Z) = g([X,Y],Z) - g([Y,Z],X) + g([Z,X],Y)`.
fn koszul(s: &AlmostHermitianStructure) -> Vec<Mat> {
    let alg = s.algebra();
    let g = s.metric();
    let c = |i: usize, j: usize, l: usize| -> f64 {
        (0..4).map(|k| alg.structure_constant(i, j, k) * g[(k, l)]).sum()
    };
    (0..4)
        .map(|i| {
            let lowered = Mat::from_fn(4, 4, |z, j| 0.5 * (c(i, j, z) - c(j, z, i) + c(z, i, j)));
            // Column j holds D_{e_i} e_j.
            s.metric_inv() * lowered
        })
        .collect()
}

fn postconditions(s: &AlmostHermitianStructure, c: &Connection) -> (f64, f64, f64) {
    let torsion = c.torsion(s.algebra()).max_abs();
    let metric = c
        .covariant_derivative(&InvariantTensor::from_bilinear(s.metric()))
        .unwrap();
    let theta = s.lee_form().theta;
    let conformal = InvariantTensor::from_fn(4, metric.variance().to_vec(), |idx| {
        metric.get(idx) - theta[idx[0]] * s.metric()[(idx[1], idx[2])]
    });
    let complex = c
        .endomorphism_derivative(s.j())
        .iter()
        .map(|m| m.amax())
        .fold(0.0, f64::max);
    match c.kind() {
        ConnectionKind::Weyl => (torsion, conformal.max_abs(), 0.0),
        _ => (torsion, metric.max_abs(), complex),
    }
}

#[test]
fn levi_civita_matches_koszul() {
    for (name, s) in perturbed_structures(21, 30) {
        let lc = Connection::levi_civita(&s);
        for (i, want) in koszul(&s).iter().enumerate() {
            assert!((lc.gamma(i) - want).amax() <= 1e-10 * want.amax().max(1.0), "{name} i={i}");
        }
    }
}

#[test]
fn weyl_connection_is_torsion_free_and_conformal() {
    for (name, s) in perturbed_structures(22, 30) {
        let (torsion, conformal, _) = postconditions(&s, &Connection::weyl(&s));
        assert!(torsion <= 1e-10 && conformal <= 1e-10, "{name}: {torsion} {conformal}");
    }
}

#[test]
fn chern_connection_preserves_g_and_j() {
    for (name, s) in perturbed_structures(23, 30) {
        let (_, metric, complex) = postconditions(&s, &Connection::chern(&s).unwrap());
        assert!(metric <= 1e-10 && complex <= 1e-10, "{name}: {metric} {complex}");
    }
}

#[test]
fn perturbed_coefficients_break_a_postcondition() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for (name, s) in perturbed_structures(24, 5) {
        let chern = Connection::chern(&s).unwrap();
        for c in [Connection::levi_civita(&s), chern.clone(), Connection::weyl(&s)] {
            let eps = 1e-4;
            let gamma: Vec<Mat> = c
                .matrices()
                .iter()
                .map(|g| g + Mat::from_fn(4, 4, |_, _| eps * rng.random_range(-1.0..1.0)))
                .collect();
            let bumped = Connection::from_matrices(c.kind(), gamma).unwrap();
            let (a, b, d) = postconditions(&s, &bumped);
            let worst = a.max(b).max(if c.kind() == ConnectionKind::Chern { d } else { 0.0 });
            assert!(worst > 1e-9, "{name} {:?} still satisfies its postconditions", c.kind());
        }
    }
}

#[test]
fn killing_condition_two_ways() {
    // (L_X g)(Y, Z) = g(D_Y X, Z) + g(Y, D_Z X), so L_{theta#} g = 2 (D^g theta)^sym.
    for (name, s) in perturbed_structures(25, 30) {
        let geo = Geometry::new(s.clone()).unwrap();
        let lie = geo.lie_metric(&geo.theta_sharp());
        let dg = geo.dg_theta();
        let sym2 = &dg + dg.transpose();
        assert!((&lie - &sym2).amax() <= 1e-9 * lie.amax().max(1.0), "{name}");
    }
}

#[test]
fn sym_j_minus_matches_lie_derivative_of_j() {
    // (L_X J)^sym = [J, S] for S the symmetric part of Y -> D_Y X, whose norm
    // is twice the norm of the J-anti-invariant part of S.
    for (name, s) in perturbed_structures(26, 30) {
        let geo = Geometry::new(s.clone()).unwrap();
        let lj = geo.lie_j(&geo.theta_sharp());
        let lhs = s.endomorphism_norm(&s.sym_endomorphism(&lj));
        let rhs = 2.0 * s.bilinear_norm(&geo.lee_sym_j_minus());
        assert!((lhs - rhs).abs() <= 1e-9 * lhs.max(1.0), "{name}: {lhs} vs {rhs}");
        assert_eq!(lhs <= 1e-9, rhs <= 1e-9);
    }
}
