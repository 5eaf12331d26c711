//! Real Lie algebras given by structure constants, with the Chevalley–Eilenberg
//! differential and Lie derivatives of left-invariant tensors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{flatten, increasing_tuples, Form, InvariantTensor, Mat, Vector};
use crate::{EPS_ABS, EPS_REL};

/// Structure constants `c[i][j][k]` with `[e_i, e_j] = sum_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    c: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub jacobi_residual: f64,
    pub unimodular: bool,
    /// `max_X |tr ad_X|` over basis vectors.
    pub max_trace_ad: f64,
    /// Dimensions of `g, [g,g], [g,[g,g]], ...` until it stabilises.
    pub lower_central_series: Vec<usize>,
    pub nilpotent: bool,
}

impl LieAlgebra {
    /// Builds an algebra from a full `dim^3` table. The table must already be
    /// antisymmetric in its first two indices.
    pub fn new(dim: usize, c: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::structural(format!("dimension must be at least 2, got {dim}")));
        }
        if c.len() != dim * dim * dim {
            return Err(Error::structural(format!(
                "structure constant table needs {} entries, got {}",
                dim * dim * dim,
                c.len()
            )));
        }
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::structural("structure constants must be finite"));
        }
        let alg = Self { dim, c };
        let anti = alg.antisymmetry_residual();
        if anti > EPS_ABS {
            return Err(Error::validation("bracket antisymmetry", anti));
        }
        Ok(alg)
    }

    /// Builds an algebra from brackets `[e_i, e_j] = sum out` (0-based indices)
    /// listed for `i != j`; the mirrored entries are filled in.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, Vec<(usize, f64)>)]) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        let mut seen = std::collections::BTreeSet::new();
        for (i, j, out) in brackets {
            let (i, j) = (*i, *j);
            if i >= dim || j >= dim {
                return Err(Error::structural(format!(
                    "bracket index out of range: [e{}, e{}] in dimension {dim}",
                    i + 1,
                    j + 1
                )));
            }
            if i == j {
                if out.iter().any(|(_, v)| *v != 0.0) {
                    return Err(Error::structural(format!(
                        "[e{0}, e{0}] must vanish",
                        i + 1
                    )));
                }
                continue;
            }
            let (lo, hi, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
            if !seen.insert((lo, hi)) {
                return Err(Error::structural(format!(
                    "bracket [e{}, e{}] given twice",
                    lo + 1,
                    hi + 1
                )));
            }
            for (k, v) in out {
                if *k >= dim {
                    return Err(Error::structural(format!(
                        "bracket output index e{} out of range",
                        k + 1
                    )));
                }
                c[(lo * dim + hi) * dim + k] += sign * v;
                c[(hi * dim + lo) * dim + k] -= sign * v;
            }
        }
        Self::new(dim, c)
    }

    pub fn abelian(dim: usize) -> Self {
        Self {
            dim,
            c: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn structure_constants(&self) -> &[f64] {
        &self.c
    }

    fn check_len(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::structural(format!(
                "vector of length {} on a {}-dimensional algebra",
                v.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &Vector, y: &Vector) -> Vector {
        let d = self.dim;
        let mut out = Vector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..d {
                    out[k] += w * self.structure_constant(i, j, k);
                }
            }
        }
        out
    }

    /// `[e_i, e_j]`.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Vector {
        let d = self.dim;
        Vector::from_fn(d, |k, _| self.structure_constant(i, j, k))
    }

    /// Matrix of `ad_X = [X, .]`, so `ad(x)[(k, j)]` is the `e_k` component of `[X, e_j]`.
    pub fn ad(&self, x: &Vector) -> Mat {
        let d = self.dim;
        Mat::from_fn(d, d, |k, j| {
            (0..d).map(|i| x[i] * self.structure_constant(i, j, k)).sum()
        })
    }

    pub fn ad_basis(&self, i: usize) -> Mat {
        let d = self.dim;
        Mat::from_fn(d, d, |k, j| self.structure_constant(i, j, k))
    }

    fn antisymmetry_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    worst = worst
                        .max((self.structure_constant(i, j, k) + self.structure_constant(j, i, k)).abs());
                }
            }
        }
        worst
    }

    /// Largest Jacobi defect `|[[x,y],z] + [[y,z],x] + [[z,x],y]|` over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        let mut acc = 0.0;
                        for l in 0..d {
                            acc += self.structure_constant(i, j, l) * self.structure_constant(l, k, m)
                                + self.structure_constant(j, k, l) * self.structure_constant(l, i, m)
                                + self.structure_constant(k, i, l) * self.structure_constant(l, j, m);
                        }
                        worst = worst.max(acc.abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_trace_ad(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.ad_basis(i).trace().abs())
            .fold(0.0, f64::max)
    }

    pub fn is_unimodular(&self) -> bool {
        self.max_trace_ad() <= EPS_ABS
    }

    pub fn validate(&self) -> Diagnostics {
        let lcs = self.lower_central_series();
        let nilpotent = lcs.last().copied() == Some(0);
        let max_trace_ad = self.max_trace_ad();
        Diagnostics {
            jacobi_residual: self.jacobi_residual(),
            unimodular: max_trace_ad <= EPS_ABS,
            max_trace_ad,
            lower_central_series: lcs,
            nilpotent,
        }
    }

    fn lower_central_series(&self) -> Vec<usize> {
        let d = self.dim;
        let mut dims = vec![d];
        let mut span = Mat::identity(d, d);
        loop {
            // columns: [e_i, s] for all basis e_i and spanning vectors s
            let mut cols = Vec::new();
            for i in 0..d {
                for s in span.column_iter() {
                    cols.push(self.bracket_unchecked(&Vector::from_fn(d, |k, _| (k == i) as u8 as f64), &s.into_owned()));
                }
            }
            let next = orthonormal_span(&cols, d);
            let r = next.ncols();
            if r == *dims.last().unwrap() {
                break;
            }
            dims.push(r);
            if r == 0 {
                break;
            }
            span = next;
        }
        dims
    }

    /// Chevalley–Eilenberg differential on left-invariant forms:
    /// `d alpha(X_0..X_k) = sum_{i<j} (-1)^{i+j} alpha([X_i, X_j], X_0, .., ^i, .., ^j, .., X_k)`.
    pub fn exterior_derivative(&self, alpha: &Form) -> Result<Form> {
        if alpha.dim() != self.dim {
            return Err(Error::structural("form dimension does not match the algebra"));
        }
        let k = alpha.degree();
        let d = self.dim;
        if k >= d {
            return Ok(Form::zero(d, k + 1));
        }
        Ok(Form::from_increasing(d, k + 1, |t| {
            let mut acc = 0.0;
            for a in 0..=k {
                for b in a + 1..=k {
                    let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                    let rest: Vec<usize> = t
                        .iter()
                        .enumerate()
                        .filter(|(p, _)| *p != a && *p != b)
                        .map(|(_, &x)| x)
                        .collect();
                    let mut idx = Vec::with_capacity(k);
                    idx.push(0);
                    idx.extend_from_slice(&rest);
                    for l in 0..d {
                        let cl = self.structure_constant(t[a], t[b], l);
                        if cl != 0.0 {
                            idx[0] = l;
                            acc += sign * cl * alpha.get(&idx);
                        }
                    }
                }
            }
            acc
        }))
    }

    /// Lie derivative of a left-invariant tensor along a left-invariant vector
    /// field; acts on vectors as `[X, .]` and extends by the Leibniz rule.
    pub fn lie_derivative(&self, x: &Vector, t: &InvariantTensor) -> Result<InvariantTensor> {
        self.check_len(x)?;
        if t.dim() != self.dim {
            return Err(Error::structural("tensor dimension does not match the algebra"));
        }
        Ok(t.derivation(&self.ad(x)))
    }

    /// Lie derivative of a form, returned as a form.
    pub fn lie_derivative_form(&self, x: &Vector, alpha: &Form) -> Result<Form> {
        Form::from_tensor(&self.lie_derivative(x, &alpha.to_tensor())?)
    }

    /// The same algebra written in the basis `u_i = sum_k b[(k, i)] e_k`.
    pub fn change_basis(&self, b: &Mat) -> Result<Self> {
        let d = self.dim;
        if b.nrows() != d || b.ncols() != d {
            return Err(Error::structural("basis change matrix has the wrong size"));
        }
        let binv = b
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::structural("basis change matrix is singular"))?;
        let mut c = vec![0.0; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let br = self.bracket_unchecked(&b.column(i).into_owned(), &b.column(j).into_owned());
                let coords = &binv * br;
                for k in 0..d {
                    c[flatten(&[i, j, k], d)] = coords[k];
                }
            }
        }
        Self::new(d, c)
    }

    /// Brackets `[e_i, e_j]` for `i < j` that are non-zero, as 0-based sparse rows.
    pub fn nonzero_brackets(&self) -> Vec<(usize, usize, Vec<(usize, f64)>)> {
        let d = self.dim;
        let mut out = Vec::new();
        for t in increasing_tuples(d, 2) {
            let row: Vec<(usize, f64)> = (0..d)
                .map(|k| (k, self.structure_constant(t[0], t[1], k)))
                .filter(|(_, v)| *v != 0.0)
                .collect();
            if !row.is_empty() {
                out.push((t[0], t[1], row));
            }
        }
        out
    }
}

/// Orthonormal (Euclidean) basis of the span of `cols`, via SVD.
pub(crate) fn orthonormal_span(cols: &[Vector], d: usize) -> Mat {
    if cols.is_empty() {
        return Mat::zeros(d, 0);
    }
    let m = Mat::from_columns(cols);
    let scale = m.norm().max(1.0);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > EPS_REL * scale)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Mat::zeros(d, 0);
    }
    Mat::from_columns(&keep.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>())
}

/// The seven four-dimensional algebras used throughout: presets, property
/// tests and the almost-abelian classification all draw from this list.
pub mod catalog {
    use super::LieAlgebra;

    fn build(brackets: &[(usize, usize, &[(usize, f64)])]) -> LieAlgebra {
        let rows: Vec<_> = brackets
            .iter()
            .map(|(i, j, out)| (i - 1, j - 1, out.iter().map(|(k, v)| (k - 1, *v)).collect()))
            .collect();
        LieAlgebra::from_brackets(4, &rows).expect("catalog algebra is well formed")
    }

    pub fn abelian() -> LieAlgebra {
        LieAlgebra::abelian(4)
    }

    /// `[e1,e2] = e3`.
    pub fn a31_a1() -> LieAlgebra {
        build(&[(1, 2, &[(3, 1.0)])])
    }

    /// `[e1,e3] = e1, [e2,e3] = -e2`.
    pub fn a34_a1() -> LieAlgebra {
        build(&[(1, 3, &[(1, 1.0)]), (2, 3, &[(2, -1.0)])])
    }

    /// `[e1,e3] = -e2, [e2,e3] = e1`.
    pub fn a36_a1() -> LieAlgebra {
        build(&[(1, 3, &[(2, -1.0)]), (2, 3, &[(1, 1.0)])])
    }

    /// `[e2,e4] = e1, [e3,e4] = e2`.
    pub fn a41() -> LieAlgebra {
        build(&[(2, 4, &[(1, 1.0)]), (3, 4, &[(2, 1.0)])])
    }

    /// `[e2,e3] = e1, [e2,e4] = e2, [e3,e4] = -e3`.
    pub fn a48() -> LieAlgebra {
        build(&[(2, 3, &[(1, 1.0)]), (2, 4, &[(2, 1.0)]), (3, 4, &[(3, -1.0)])])
    }

    /// `[e2,e3] = e1, [e2,e4] = -e3, [e3,e4] = e2`.
    pub fn a410() -> LieAlgebra {
        build(&[(2, 3, &[(1, 1.0)]), (2, 4, &[(3, -1.0)]), (3, 4, &[(2, 1.0)])])
    }

    pub fn all() -> Vec<(&'static str, LieAlgebra)> {
        vec![
            ("abelian", abelian()),
            ("a31_a1", a31_a1()),
            ("a34_a1", a34_a1()),
            ("a36_a1", a36_a1()),
            ("a41", a41()),
            ("a48", a48()),
            ("a410", a410()),
        ]
    }
}
