//! Dense component storage for left-invariant tensors and exterior forms.
//!
//! Every tensor is expressed in the basis of the owning Lie algebra. Components
//! are stored row-major over all slots, so a rank-3 tensor on a 4-dimensional
//! algebra holds 64 numbers. Forms keep the full antisymmetric array as well;
//! the increasing-index view is derived on demand.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Covariant,
    Contravariant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantTensor {
    variance: Vec<Slot>,
    dim: usize,
    components: Vec<f64>,
}

impl InvariantTensor {
    pub fn zeros(dim: usize, variance: Vec<Slot>) -> Self {
        let len = dim.pow(variance.len() as u32);
        Self {
            variance,
            dim,
            components: vec![0.0; len],
        }
    }

    pub fn from_components(dim: usize, variance: Vec<Slot>, components: Vec<f64>) -> Result<Self> {
        let len = dim.pow(variance.len() as u32);
        if components.len() != len {
            return Err(Error::structural(format!(
                "tensor of rank {} on dimension {dim} needs {len} components, got {}",
                variance.len(),
                components.len()
            )));
        }
        Ok(Self {
            variance,
            dim,
            components,
        })
    }

    pub fn from_fn(dim: usize, variance: Vec<Slot>, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Self::zeros(dim, variance);
        let rank = t.rank();
        let mut idx = vec![0usize; rank];
        for flat in 0..t.components.len() {
            unflatten(flat, dim, &mut idx);
            t.components[flat] = f(&idx);
        }
        t
    }

    /// Fully covariant bilinear form with `T(e_i, e_j) = m[(i, j)]`.
    pub fn from_bilinear(m: &Mat) -> Self {
        let dim = m.nrows();
        Self::from_fn(dim, vec![Slot::Covariant; 2], |ix| m[(ix[0], ix[1])])
    }

    /// Endomorphism with `T(e_j) = sum_i m[(i, j)] e_i`, stored with index order (i, j).
    pub fn from_endomorphism(m: &Mat) -> Self {
        let dim = m.nrows();
        Self::from_fn(dim, vec![Slot::Contravariant, Slot::Covariant], |ix| {
            m[(ix[0], ix[1])]
        })
    }

    pub fn from_vector(v: &Vector) -> Self {
        Self::from_fn(v.len(), vec![Slot::Contravariant], |ix| v[ix[0]])
    }

    pub fn from_covector(v: &Vector) -> Self {
        Self::from_fn(v.len(), vec![Slot::Covariant], |ix| v[ix[0]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Slot] {
        &self.variance
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[flatten(idx, self.dim)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let k = flatten(idx, self.dim);
        self.components[k] = value;
    }

    pub fn add_at(&mut self, idx: &[usize], value: f64) {
        let k = flatten(idx, self.dim);
        self.components[k] += value;
    }

    /// Rank-2 tensors as a matrix indexed by their two slots.
    pub fn to_matrix(&self) -> Result<Mat> {
        if self.rank() != 2 {
            return Err(Error::structural(format!(
                "expected a rank-2 tensor, got rank {}",
                self.rank()
            )));
        }
        let d = self.dim;
        Ok(Mat::from_fn(d, d, |i, j| self.get(&[i, j])))
    }

    pub fn to_vector(&self) -> Result<Vector> {
        if self.rank() != 1 {
            return Err(Error::structural(format!(
                "expected a rank-1 tensor, got rank {}",
                self.rank()
            )));
        }
        Ok(Vector::from_column_slice(&self.components))
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim && self.variance == other.variance
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::structural("tensor shape mismatch"));
        }
        Ok(Self {
            variance: self.variance.clone(),
            dim: self.dim,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            variance: self.variance.clone(),
            dim: self.dim,
            components: self.components.iter().map(|x| x * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Applies the endomorphism `e` as a derivation: contravariant slots pick up
    /// `e`, covariant slots pick up `-e^T`. Lie derivatives and covariant
    /// derivatives along a single basis vector both reduce to this.
    pub fn derivation(&self, e: &Mat) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d, self.variance.clone());
        let rank = self.rank();
        let mut idx = vec![0usize; rank];
        let mut src = vec![0usize; rank];
        for flat in 0..out.components.len() {
            unflatten(flat, d, &mut idx);
            let mut acc = 0.0;
            for (s, kind) in self.variance.iter().enumerate() {
                src.copy_from_slice(&idx);
                for b in 0..d {
                    src[s] = b;
                    let coeff = match kind {
                        Slot::Contravariant => e[(idx[s], b)],
                        Slot::Covariant => -e[(b, idx[s])],
                    };
                    if coeff != 0.0 {
                        acc += coeff * self.get(&src);
                    }
                }
            }
            out.components[flat] = acc;
        }
        out
    }

    /// Largest violation of antisymmetry under any adjacent slot swap.
    pub fn antisymmetry_defect(&self) -> f64 {
        let rank = self.rank();
        if rank < 2 {
            return 0.0;
        }
        let mut idx = vec![0usize; rank];
        let mut worst: f64 = 0.0;
        for flat in 0..self.components.len() {
            unflatten(flat, self.dim, &mut idx);
            for s in 0..rank - 1 {
                let mut sw = idx.clone();
                sw.swap(s, s + 1);
                worst = worst.max((self.components[flat] + self.get(&sw)).abs());
            }
        }
        worst
    }
}

pub(crate) fn flatten(idx: &[usize], dim: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * dim + i)
}

pub(crate) fn unflatten(mut flat: usize, dim: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
}

/// All strictly increasing `k`-tuples drawn from `0..n`, in lexicographic order.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Sign of the permutation that sorts `idx`, or 0 when an index repeats.
pub fn sort_sign(idx: &[usize]) -> (i32, Vec<usize>) {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return (0, v);
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return (0, v);
    }
    (sign, v)
}

/// An exterior `k`-form, stored as its full antisymmetric component array
/// `alpha(e_{i_1}, ..., e_{i_k})` in the algebra basis.
///
/// Wedge products follow the determinant convention, so
/// `(e^1 ^ e^2)(e_1, e_2) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    degree: usize,
    dim: usize,
    components: Vec<f64>,
}

impl Form {
    pub fn zero(dim: usize, degree: usize) -> Self {
        Self {
            degree,
            dim,
            components: vec![0.0; dim.pow(degree as u32)],
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Self {
            degree: 0,
            dim,
            components: vec![value],
        }
    }

    /// Builds a form from its coefficients on increasing index tuples (0-based).
    pub fn from_increasing(
        dim: usize,
        degree: usize,
        mut coeff: impl FnMut(&[usize]) -> f64,
    ) -> Self {
        let mut f = Self::zero(dim, degree);
        for t in increasing_tuples(dim, degree) {
            let c = coeff(&t);
            if c != 0.0 {
                f.set_increasing(&t, c);
            }
        }
        f
    }

    /// `coeff * e^{i_1} ^ ... ^ e^{i_k}` with 0-based, not necessarily sorted, indices.
    pub fn basis(dim: usize, idx: &[usize], coeff: f64) -> Self {
        let (sign, sorted) = sort_sign(idx);
        let mut f = Self::zero(dim, idx.len());
        if sign != 0 {
            f.set_increasing(&sorted, coeff * sign as f64);
        }
        f
    }

    pub fn from_covector(v: &Vector) -> Self {
        Self {
            degree: 1,
            dim: v.len(),
            components: v.iter().copied().collect(),
        }
    }

    /// Antisymmetric matrix `m[(i, j)] = alpha(e_i, e_j)` as a 2-form. The
    /// symmetric part of `m`, if any, is discarded.
    pub fn from_matrix(m: &Mat) -> Self {
        let dim = m.nrows();
        let mut f = Self::zero(dim, 2);
        for i in 0..dim {
            for j in 0..dim {
                f.components[i * dim + j] = 0.5 * (m[(i, j)] - m[(j, i)]);
            }
        }
        f
    }

    /// Reinterprets an (assumed antisymmetric, fully covariant) tensor as a form.
    pub fn from_tensor(t: &InvariantTensor) -> Result<Self> {
        if t.variance().iter().any(|s| *s != Slot::Covariant) {
            return Err(Error::structural("forms must be fully covariant"));
        }
        Ok(Self {
            degree: t.rank(),
            dim: t.dim(),
            components: t.components().to_vec(),
        })
    }

    pub fn to_tensor(&self) -> InvariantTensor {
        InvariantTensor::from_components(
            self.dim,
            vec![Slot::Covariant; self.degree],
            self.components.clone(),
        )
        .expect("form component count is consistent")
    }

    pub fn to_matrix(&self) -> Mat {
        assert_eq!(self.degree, 2, "to_matrix needs a 2-form");
        let d = self.dim;
        Mat::from_fn(d, d, |i, j| self.components[i * d + j])
    }

    pub fn to_covector(&self) -> Vector {
        assert_eq!(self.degree, 1, "to_covector needs a 1-form");
        Vector::from_column_slice(&self.components)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.components[flatten(idx, self.dim)]
    }

    /// Value of a 0-form.
    pub fn value(&self) -> f64 {
        self.components[0]
    }

    /// Coefficient on `e^{i_1} ^ ... ^ e^{i_k}` for an increasing 0-based tuple.
    pub fn coefficient(&self, idx: &[usize]) -> f64 {
        self.get(idx)
    }

    /// Coefficients on all increasing tuples, in lexicographic order.
    pub fn increasing_coefficients(&self) -> Vec<(Vec<usize>, f64)> {
        increasing_tuples(self.dim, self.degree)
            .into_iter()
            .map(|t| {
                let c = self.get(&t);
                (t, c)
            })
            .collect()
    }

    fn set_increasing(&mut self, sorted: &[usize], value: f64) {
        for (perm, sign) in permutations_with_sign(sorted.len()) {
            let idx: Vec<usize> = perm.iter().map(|&p| sorted[p]).collect();
            let k = flatten(&idx, self.dim);
            self.components[k] = sign as f64 * value;
        }
    }

    pub fn add(&self, other: &Form) -> Form {
        assert!(self.degree == other.degree && self.dim == other.dim, "form shape mismatch");
        Form {
            degree: self.degree,
            dim: self.dim,
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.scaled(-1.0))
    }

    pub fn scaled(&self, s: f64) -> Form {
        Form {
            degree: self.degree,
            dim: self.dim,
            components: self.components.iter().map(|x| x * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Evaluates the form on `k` vectors.
    pub fn eval(&self, vectors: &[&Vector]) -> f64 {
        assert_eq!(vectors.len(), self.degree);
        let d = self.dim;
        let mut idx = vec![0usize; self.degree];
        let mut acc = 0.0;
        for flat in 0..self.components.len() {
            let c = self.components[flat];
            if c == 0.0 {
                continue;
            }
            unflatten(flat, d, &mut idx);
            let mut w = c;
            for (s, &i) in idx.iter().enumerate() {
                w *= vectors[s][i];
            }
            acc += w;
        }
        acc
    }

    /// Exterior product with the determinant normalisation.
    pub fn wedge(&self, other: &Form) -> Form {
        assert_eq!(self.dim, other.dim, "form dimension mismatch");
        let p = self.degree;
        let q = other.degree;
        let d = self.dim;
        if p + q > d {
            return Form::zero(d, p + q);
        }
        let shuffles = shuffles(p, q);
        Form::from_increasing(d, p + q, |t| {
            shuffles
                .iter()
                .map(|(left, right, sign)| {
                    let a: Vec<usize> = left.iter().map(|&k| t[k]).collect();
                    let b: Vec<usize> = right.iter().map(|&k| t[k]).collect();
                    *sign as f64 * self.get(&a) * other.get(&b)
                })
                .sum()
        })
    }

    /// `k`-th exterior power.
    pub fn power(&self, k: usize) -> Form {
        let mut out = Form::scalar(self.dim, 1.0);
        for _ in 0..k {
            out = out.wedge(self);
        }
        out
    }

    /// Interior product in the first slot: `(i_X alpha)(Y, ...) = alpha(X, Y, ...)`.
    pub fn interior(&self, x: &Vector) -> Form {
        assert!(self.degree >= 1, "interior product of a 0-form");
        let d = self.dim;
        let k = self.degree - 1;
        let mut out = Form::zero(d, k);
        let mut idx = vec![0usize; k];
        let mut full = vec![0usize; k + 1];
        for flat in 0..out.components.len() {
            unflatten(flat, d, &mut idx);
            full[1..].copy_from_slice(&idx);
            let mut acc = 0.0;
            for i in 0..d {
                if x[i] != 0.0 {
                    full[0] = i;
                    acc += x[i] * self.get(&full);
                }
            }
            out.components[flat] = acc;
        }
        out
    }

    /// Components in a new basis `u_b = sum_a m[(a, b)] e_a`: slot-wise pullback by `m`.
    pub fn pullback(&self, m: &Mat) -> Form {
        Form {
            degree: self.degree,
            dim: self.dim,
            components: pullback_covariant(&self.components, self.dim, self.degree, m),
        }
    }
}

/// `out[b_1..b_k] = sum_a m[(a_1,b_1)]...m[(a_k,b_k)] t[a_1..a_k]`.
pub(crate) fn pullback_covariant(t: &[f64], dim: usize, rank: usize, m: &Mat) -> Vec<f64> {
    let mut cur = t.to_vec();
    // contract one slot at a time
    for s in 0..rank {
        let mut next = vec![0.0; cur.len()];
        let mut idx = vec![0usize; rank];
        for (flat, out) in next.iter_mut().enumerate() {
            unflatten(flat, dim, &mut idx);
            let b = idx[s];
            let mut acc = 0.0;
            for a in 0..dim {
                let w = m[(a, b)];
                if w != 0.0 {
                    idx[s] = a;
                    acc += w * cur[flatten(&idx, dim)];
                }
            }
            *out = acc;
        }
        cur = next;
    }
    cur
}

/// All permutations of `0..k` with their signs.
pub fn permutations_with_sign(k: usize) -> Vec<(Vec<usize>, i32)> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..k).collect();
    fn heap(n: usize, items: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i32)>) {
        if n <= 1 {
            let (s, _) = sort_sign(items);
            out.push((items.clone(), s));
            return;
        }
        for i in 0..n {
            heap(n - 1, items, out);
            if n % 2 == 0 {
                items.swap(i, n - 1);
            } else {
                items.swap(0, n - 1);
            }
        }
    }
    heap(k, &mut items, &mut out);
    out
}

/// (p,q)-shuffles of positions `0..p+q` with signs.
fn shuffles(p: usize, q: usize) -> Vec<(Vec<usize>, Vec<usize>, i32)> {
    increasing_tuples(p + q, p)
        .into_iter()
        .map(|left| {
            let right: Vec<usize> = (0..p + q).filter(|k| !left.contains(k)).collect();
            let joined: Vec<usize> = left.iter().chain(&right).copied().collect();
            let (sign, _) = sort_sign(&joined);
            (left, right, sign)
        })
        .collect()
}

/// Frobenius norm of the difference of two matrices.
pub fn mat_dist(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_two_form_values() {
        let f = Form::basis(4, &[0, 2], 1.0);
        assert_eq!(f.get(&[0, 2]), 1.0);
        assert_eq!(f.get(&[2, 0]), -1.0);
        assert_eq!(f.get(&[0, 1]), 0.0);
        let g = Form::basis(4, &[3, 0, 2], 1.0);
        // (3,0,2) -> (0,2,3) is an even permutation
        assert_eq!(g.coefficient(&[0, 2, 3]), 1.0);
    }

    #[test]
    fn wedge_of_covectors() {
        let a = Form::basis(4, &[0], 1.0);
        let b = Form::basis(4, &[1], 1.0);
        let ab = a.wedge(&b);
        assert_eq!(ab.get(&[0, 1]), 1.0);
        assert_eq!(ab.get(&[1, 0]), -1.0);
        assert_eq!(b.wedge(&a).get(&[0, 1]), -1.0);
    }

    #[test]
    fn symplectic_square() {
        let f = Form::basis(4, &[0, 1], 1.0).add(&Form::basis(4, &[2, 3], 1.0));
        let ff = f.wedge(&f);
        assert_eq!(ff.coefficient(&[0, 1, 2, 3]), 2.0);
    }

    #[test]
    fn permutation_count_and_signs() {
        let p = permutations_with_sign(4);
        assert_eq!(p.len(), 24);
        assert_eq!(p.iter().map(|(_, s)| *s).sum::<i32>(), 0);
    }

    #[test]
    fn derivation_on_endomorphism_is_commutator() {
        let e = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.5]);
        let t = InvariantTensor::from_endomorphism(&a);
        let d = t.derivation(&e).to_matrix().unwrap();
        let expect = &e * &a - &a * &e;
        assert!((d - expect).norm() < 1e-14);
    }

    #[test]
    fn interior_then_eval() {
        let f = Form::basis(3, &[0, 1], 2.0);
        let x = Vector::from_vec(vec![1.0, 0.0, 0.0]);
        let y = Vector::from_vec(vec![0.0, 1.0, 0.0]);
        assert_eq!(f.interior(&x).eval(&[&y]), 2.0);
        assert_eq!(f.eval(&[&x, &y]), 2.0);
    }
}
