#![allow(dead_code)]

use almost_hermitian::hermitian::AlmostHermitianStructure;
use almost_hermitian::presets;
use almost_hermitian::tensor::{Form, Mat, Vector};
use almost_hermitian::verifier::seeded_perturbations;
use rand::Rng;

pub fn catalog_structures() -> Vec<(String, AlmostHermitianStructure)> {
    presets::catalog()
        .into_iter()
        .map(|p| (p.name, p.structure))
        .collect()
}

/// Every preset plus `count` frame perturbations of each.
pub fn perturbed_structures(seed: u64, count: usize) -> Vec<(String, AlmostHermitianStructure)> {
    let mut out = Vec::new();
    for (name, s) in catalog_structures() {
        let ps = seeded_perturbations(&s, seed, count, 0.3).unwrap();
        out.push((name.clone(), s));
        out.extend(ps.into_iter().enumerate().map(|(k, p)| (format!("{name}~{k}"), p)));
    }
    out
}

pub fn random_form<R: Rng>(rng: &mut R, dim: usize, degree: usize) -> Form {
    Form::from_increasing(dim, degree, |_| rng.random_range(-1.0..1.0))
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    Vector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
}

/// Well-conditioned random matrix near the identity.
pub fn random_basis<R: Rng>(rng: &mut R, dim: usize) -> Mat {
    Mat::identity(dim, dim) + Mat::from_fn(dim, dim, |_, _| 0.4 * rng.random_range(-1.0..1.0))
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
