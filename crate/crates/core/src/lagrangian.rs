//! Lagrangian subspaces of (R^{2n}, ω): transversality, the Kashiwara
//! index, and the diagonal boundary embedding of the circle.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{self, ComplexMatrix, RationalMatrix, RealMatrix, SignatureResult, SINGULAR_TOL};
use crate::symplectic::{j_matrix, SymplecticMatrix};

pub const ZERO_TOL: f64 = 1e-9;

/// An n-dimensional isotropic subspace, stored by a 2n×n spanning basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Lagrangian {
    n: usize,
    basis: RealMatrix,
    exact: Option<RationalMatrix>,
}

fn rational_j(n: usize) -> RationalMatrix {
    let mut j = RationalMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = BigRational::one();
        j[(n + i, i)] = -BigRational::one();
    }
    j
}

impl Lagrangian {
    /// Validate rank and isotropy of a floating point basis.
    pub fn new(basis: RealMatrix, tol: f64) -> Result<Self> {
        let (rows, n) = basis.shape();
        if rows != 2 * n || n == 0 {
            return Err(Error::DimensionMismatch(format!("Lagrangian basis must be 2n×n, got {rows}×{n}")));
        }
        let q = numkernel::orthonormalize(&basis);
        if numkernel::rank(&basis, 1e-10) < n {
            return Err(Error::InvalidInput("Lagrangian basis is rank deficient".into()));
        }
        let iso = numkernel::max_abs(&(q.transpose() * j_matrix(n) * &q));
        if iso > tol {
            return Err(Error::InvalidInput(format!("basis is not isotropic (residual {iso:e})")));
        }
        Ok(Self { n, basis, exact: None })
    }

    /// Validate an exact basis; isotropy and rank are checked exactly.
    pub fn from_exact(basis: RationalMatrix) -> Result<Self> {
        let n = basis.cols;
        if basis.rows != 2 * n || n == 0 {
            return Err(Error::DimensionMismatch(format!("Lagrangian basis must be 2n×n, got {}×{}", basis.rows, n)));
        }
        if basis.rank() < n {
            return Err(Error::InvalidInput("Lagrangian basis is rank deficient".into()));
        }
        if !basis.transpose().mul(&rational_j(n)).mul(&basis).is_zero() {
            return Err(Error::InvalidInput("basis is not isotropic".into()));
        }
        Ok(Self { n, basis: basis.to_f64(), exact: Some(basis) })
    }

    /// span(e_1, …, e_n).
    pub fn horizontal(n: usize) -> Self {
        let mut b = RationalMatrix::zeros(2 * n, n);
        for i in 0..n {
            b[(i, i)] = BigRational::one();
        }
        Self { n, basis: b.to_f64(), exact: Some(b) }
    }

    /// span(f_1, …, f_n).
    pub fn vertical(n: usize) -> Self {
        let mut b = RationalMatrix::zeros(2 * n, n);
        for i in 0..n {
            b[(n + i, i)] = BigRational::one();
        }
        Self { n, basis: b.to_f64(), exact: Some(b) }
    }

    /// The line in R² at the given angle.
    pub fn line(angle: f64) -> Self {
        Self { n: 1, basis: RealMatrix::from_column_slice(2, 1, &[angle.cos(), angle.sin()]), exact: None }
    }

    /// Direct sum of lines in R², one per symplectic plane (q_i, p_i).
    pub fn direct_sum_exact(lines: &[(i64, i64)]) -> Self {
        let n = lines.len();
        let mut b = RationalMatrix::zeros(2 * n, n);
        for (i, &(u, v)) in lines.iter().enumerate() {
            b[(i, i)] = BigRational::from_integer(u.into());
            b[(n + i, i)] = BigRational::from_integer(v.into());
        }
        Self::from_exact(b).expect("sum of lines is Lagrangian")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &RealMatrix {
        &self.basis
    }

    pub fn exact_basis(&self) -> Option<&RationalMatrix> {
        self.exact.as_ref()
    }

    /// Exact basis, or the exact value of the floating point basis.
    pub fn rational_basis(&self) -> Result<RationalMatrix> {
        match &self.exact {
            Some(b) => Ok(b.clone()),
            None => RationalMatrix::from_f64_matrix(&self.basis),
        }
    }

    /// Row-reduced form of basisᵀ: equal for equal subspaces. Exact bases only.
    pub fn canonical_key(&self) -> Option<RationalMatrix> {
        self.exact.as_ref().map(|b| b.transpose().rref().0)
    }

    /// Equality of column spans within a relative tolerance.
    pub fn same_span(&self, other: &Self, tol: f64) -> bool {
        if self.n != other.n {
            return false;
        }
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return a.hcat(b).rank() == self.n;
        }
        let qa = numkernel::orthonormalize(&self.basis);
        let qb = numkernel::orthonormalize(&other.basis);
        let pa = &qa * qa.transpose();
        let pb = &qb * qb.transpose();
        numkernel::max_abs(&(pa - pb)) < tol
    }
}

/// β = τ/2, stored through the integer τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MaslovValue {
    pub tau: i64,
}

impl MaslovValue {
    pub fn beta(&self) -> f64 {
        self.tau as f64 / 2.0
    }
}

impl fmt::Display for MaslovValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.tau > 0 {
            "+"
        } else if self.tau < 0 {
            "-"
        } else {
            ""
        };
        let a = self.tau.abs();
        if a % 2 == 0 {
            write!(f, "{sign}{}", a / 2)
        } else {
            write!(f, "{sign}{a}/2")
        }
    }
}

/// How signature decisions are made.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Float { zero_tol: f64 },
    Exact,
}

impl Default for Mode {
    fn default() -> Self {
        Mode::Float { zero_tol: ZERO_TOL }
    }
}

fn check_same_n(ls: &[&Lagrangian]) -> Result<usize> {
    let n = ls[0].n;
    if ls.iter().any(|l| l.n != n) {
        return Err(Error::DimensionMismatch("Lagrangians of different rank".into()));
    }
    Ok(n)
}

/// True iff L1 + L2 = R^{2n}.
pub fn is_transverse(l1: &Lagrangian, l2: &Lagrangian, mode: Mode) -> Result<bool> {
    let n = check_same_n(&[l1, l2])?;
    match mode {
        Mode::Exact => Ok(l1.rational_basis()?.hcat(&l2.rational_basis()?).rank() == 2 * n),
        Mode::Float { zero_tol } => {
            let tol = if zero_tol > 0.0 { zero_tol } else { SINGULAR_TOL };
            let q1 = numkernel::orthonormalize(&l1.basis);
            let q2 = numkernel::orthonormalize(&l2.basis);
            let mut m = RealMatrix::zeros(2 * n, 2 * n);
            m.columns_mut(0, n).copy_from(&q1);
            m.columns_mut(n, n).copy_from(&q2);
            let s = numkernel::sigma_min(&m);
            if s >= tol / 10.0 && s <= tol * 10.0 {
                return Err(Error::NearDegenerate { value: s, tol });
            }
            Ok(s > tol * 10.0)
        }
    }
}

fn assemble_form<T: Clone + Zero>(c12: &[Vec<T>], c23: &[Vec<T>], c31: &[Vec<T>], n: usize) -> Vec<Vec<T>> {
    let mut m = vec![vec![T::zero(); 3 * n]; 3 * n];
    for i in 0..n {
        for j in 0..n {
            m[i][n + j] = c12[i][j].clone();
            m[n + j][i] = c12[i][j].clone();
            m[n + i][2 * n + j] = c23[i][j].clone();
            m[2 * n + j][n + i] = c23[i][j].clone();
            m[2 * n + i][j] = c31[i][j].clone();
            m[j][2 * n + i] = c31[i][j].clone();
        }
    }
    m
}

/// Kashiwara index: signature of ω(x1,x2) + ω(x2,x3) + ω(x3,x1) on L1⊕L2⊕L3.
pub fn kashiwara(l1: &Lagrangian, l2: &Lagrangian, l3: &Lagrangian, mode: Mode) -> Result<MaslovValue> {
    Ok(MaslovValue { tau: kashiwara_signature(l1, l2, l3, mode)?.signature() })
}

pub fn kashiwara_signature(l1: &Lagrangian, l2: &Lagrangian, l3: &Lagrangian, mode: Mode) -> Result<SignatureResult> {
    let n = check_same_n(&[l1, l2, l3])?;
    match mode {
        Mode::Exact => {
            let j = rational_j(n);
            let b: Vec<RationalMatrix> = [l1, l2, l3].iter().map(|l| l.rational_basis()).collect::<Result<_>>()?;
            let c = |x: &RationalMatrix, y: &RationalMatrix| {
                let m = x.transpose().mul(&j).mul(y);
                (0..n).map(|i| (0..n).map(|k| m[(i, k)].clone()).collect::<Vec<_>>()).collect::<Vec<_>>()
            };
            let form = assemble_form(&c(&b[0], &b[1]), &c(&b[1], &b[2]), &c(&b[2], &b[0]), n);
            let flat: Vec<BigRational> = form.into_iter().flatten().collect();
            Ok(numkernel::signature_exact(&RationalMatrix::from_vec(3 * n, 3 * n, flat)))
        }
        Mode::Float { zero_tol } => {
            let j = j_matrix(n);
            let q: Vec<RealMatrix> = [l1, l2, l3].iter().map(|l| numkernel::orthonormalize(&l.basis)).collect();
            let c = |x: &RealMatrix, y: &RealMatrix| {
                let m = x.transpose() * &j * y;
                (0..n).map(|i| (0..n).map(|k| m[(i, k)]).collect::<Vec<_>>()).collect::<Vec<_>>()
            };
            let form = assemble_form(&c(&q[0], &q[1]), &c(&q[1], &q[2]), &c(&q[2], &q[0]), n);
            let m = RealMatrix::from_fn(3 * n, 3 * n, |i, k| form[i][k]);
            numkernel::symmetric_signature(&m, zero_tol, false)
        }
    }
}

/// Kashiwara index in float mode, switching to exact arithmetic when the
/// float decision is too close to call.
pub fn kashiwara_auto(l1: &Lagrangian, l2: &Lagrangian, l3: &Lagrangian) -> Result<MaslovValue> {
    let all_exact = [l1, l2, l3].iter().all(|l| l.exact.is_some());
    if all_exact {
        return kashiwara(l1, l2, l3, Mode::Exact);
    }
    match kashiwara(l1, l2, l3, Mode::default()) {
        Err(Error::NearDegenerate { .. }) => kashiwara(l1, l2, l3, Mode::Exact),
        other => other,
    }
}

/// β = n/2.
pub fn is_maximal_triple(l1: &Lagrangian, l2: &Lagrangian, l3: &Lagrangian) -> bool {
    match kashiwara_auto(l1, l2, l3) {
        Ok(v) => v.tau == l1.n as i64,
        Err(_) => false,
    }
}

/// g·L.
pub fn act(g: &SymplecticMatrix, l: &Lagrangian) -> Lagrangian {
    assert_eq!(g.n(), l.n, "rank mismatch");
    Lagrangian { n: l.n, basis: g.matrix() * &l.basis, exact: None }
}

/// g·L for an exact symplectic matrix.
pub fn act_exact(g: &RationalMatrix, l: &Lagrangian) -> Result<Lagrangian> {
    let b = g.mul(&l.rational_basis()?);
    Ok(Lagrangian { n: l.n, basis: b.to_f64(), exact: Some(b) })
}

/// The diagonal copy of the line at angle x/2, for x on the boundary circle.
pub fn boundary_embed_diag(x: f64, n: usize) -> Lagrangian {
    let (s, c) = (0.5 * x).sin_cos();
    let mut b = RealMatrix::zeros(2 * n, n);
    for i in 0..n {
        b[(i, i)] = c;
        b[(n + i, i)] = s;
    }
    Lagrangian { n, basis: b, exact: None }
}

/// Action of SL(2,R) on the boundary circle, in the coordinate where the
/// point x corresponds to the line at angle x/2. Result in [0, 2π).
pub fn sl2_boundary_action(h: &RealMatrix, x: f64) -> f64 {
    let (s, c) = (0.5 * x).sin_cos();
    let u = h[(0, 0)] * c + h[(0, 1)] * s;
    let v = h[(1, 0)] * c + h[(1, 1)] * s;
    (2.0 * v.atan2(u)).rem_euclid(2.0 * PI)
}

/// A Lagrangian L with gL = L, if one exists.
///
/// Builds L one invariant isotropic piece at a time: pick an eigenvector
/// (or an isotropic eigen-plane for complex eigenvalues) of the map induced
/// on S^ω/S, where S is the invariant isotropic subspace found so far.
pub fn fixed_lagrangian(g: &SymplecticMatrix) -> Result<Option<Lagrangian>> {
    let n = g.n();
    let gm = g.matrix();
    let j = j_matrix(n);
    let mut s = RealMatrix::zeros(2 * n, 0);
    while s.ncols() < n {
        let k = s.ncols();
        let c = complement_basis(&s, &j)?;
        if c.ncols() != 2 * n - 2 * k {
            return Err(Error::Inconclusive("symplectic reduction lost rank".into()));
        }
        let m = c.transpose() * gm * &c;
        let wq = c.transpose() * &j * &c;
        let vals = numkernel::eigenvalues(&m)?;
        let mut added: Option<Vec<DVector<f64>>> = None;
        let scale = |z: Complex64| z.norm().max(1.0);

        // real eigenvalues first
        for z in vals.iter().filter(|z| z.im.abs() < 1e-7 * scale(**z)) {
            let shifted = numkernel::to_complex(&(&m - RealMatrix::identity(m.nrows(), m.ncols()) * z.re));
            let (d, basis) = numkernel::null_dim_complex(&shifted, 1e-7)?;
            if d == 0 {
                continue;
            }
            let v = real_direction(&basis[0]);
            added = Some(vec![&c * v]);
            break;
        }
        // complex eigenvalues off the circle: the real plane is isotropic
        if added.is_none() {
            for z in vals.iter().filter(|z| z.im > 1e-7 * scale(**z) && (z.norm() - 1.0).abs() > 1e-7) {
                let shifted = numkernel::to_complex(&m) - ComplexMatrix::identity(m.nrows(), m.ncols()) * *z;
                let (d, basis) = numkernel::null_dim_complex(&shifted, 1e-7)?;
                if d == 0 {
                    continue;
                }
                let v = numkernel::to_complex(&c) * &basis[0];
                added = Some(vec![v.map(|x| x.re), v.map(|x| x.im)]);
                break;
            }
        }
        // complex eigenvalues on the circle need a Krein-isotropic eigenvector
        if added.is_none() {
            for z in vals.iter().filter(|z| z.im > 1e-7 * scale(**z) && (z.norm() - 1.0).abs() <= 1e-7) {
                let shifted = numkernel::to_complex(&m) - ComplexMatrix::identity(m.nrows(), m.ncols()) * *z;
                let (d, basis) = numkernel::null_dim_complex(&shifted, 1e-7)?;
                if d == 0 {
                    continue;
                }
                let e = ComplexMatrix::from_columns(&basis);
                let h = e.adjoint() * numkernel::to_complex(&wq) * &e * Complex64::new(0.0, 1.0);
                let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
                let Some(coeff) = isotropic_vector(h) else {
                    continue;
                };
                let v = numkernel::to_complex(&c) * (e * coeff);
                added = Some(vec![v.map(|x| x.re), v.map(|x| x.im)]);
                break;
            }
        }
        let Some(vs) = added else {
            if vals.iter().all(|z| z.im.abs() >= 1e-7 * scale(*z) && (z.norm() - 1.0).abs() <= 1e-7) {
                return Ok(None);
            }
            return Err(Error::Inconclusive("no usable eigen-direction at float precision".into()));
        };
        let mut cols: Vec<DVector<f64>> = s.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(vs);
        let next = RealMatrix::from_columns(&cols);
        if numkernel::rank(&next, 1e-8) != cols.len() {
            return Err(Error::Inconclusive("eigen-directions are dependent".into()));
        }
        s = numkernel::orthonormalize(&next);
        if numkernel::max_abs(&(s.transpose() * &j * &s)) > 1e-7 {
            return Err(Error::Inconclusive("isotropy lost".into()));
        }
    }
    let mut both = RealMatrix::zeros(2 * n, 2 * n);
    both.columns_mut(0, n).copy_from(&s);
    let gs = gm * &s;
    let gs = numkernel::orthonormalize(&gs);
    both.columns_mut(n, n).copy_from(&gs);
    if numkernel::rank(&both, 1e-7) != n {
        return Err(Error::Inconclusive("candidate subspace is not invariant".into()));
    }
    Ok(Some(Lagrangian { n, basis: s, exact: None }))
}

/// Orthonormal basis of S^ω ∩ S^⊥ (a symplectic complement of S in S^ω).
fn complement_basis(s: &RealMatrix, j: &RealMatrix) -> Result<RealMatrix> {
    let dim = j.nrows();
    let k = s.ncols();
    if k == 0 {
        return Ok(RealMatrix::identity(dim, dim));
    }
    // null space of the constraints Sᵀ J x = 0 and Sᵀ x = 0
    let mut a = RealMatrix::zeros(2 * k, dim);
    a.rows_mut(0, k).copy_from(&(s.transpose() * j));
    a.rows_mut(k, k).copy_from(&s.transpose());
    let gram = a.transpose() * &a;
    let eig = SymmetricEigen::try_new(gram, 1e-15, 10_000).ok_or(Error::ConvergenceFailure)?;
    let top = eig.eigenvalues.max().max(1.0);
    let cols: Vec<DVector<f64>> = (0..dim)
        .filter(|&i| eig.eigenvalues[i] < 1e-12 * top)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        return Ok(RealMatrix::zeros(dim, 0));
    }
    Ok(RealMatrix::from_columns(&cols))
}

/// A real vector spanning the same complex line as a null vector of a real
/// matrix: rotate the phase so the largest entry is real.
fn real_direction(v: &DVector<Complex64>) -> DVector<f64> {
    let (mut best, mut mag) = (0, 0.0);
    for (i, z) in v.iter().enumerate() {
        if z.norm() > mag {
            best = i;
            mag = z.norm();
        }
    }
    let phase = v[best].conj() / v[best].norm();
    let r = v.map(|z| (z * phase).re);
    let nrm = r.norm();
    r / nrm
}

/// A nonzero vector with z̄ᵀHz = 0, if H is not definite.
fn isotropic_vector(h: ComplexMatrix) -> Option<DVector<Complex64>> {
    let eig = SymmetricEigen::new(h);
    let vals = &eig.eigenvalues;
    let vecs = &eig.eigenvectors;
    let k = vals.len();
    for i in 0..k {
        if vals[i].abs() < 1e-9 {
            return Some(vecs.column(i).into_owned());
        }
    }
    let pos = (0..k).find(|&i| vals[i] > 0.0)?;
    let neg = (0..k).find(|&i| vals[i] < 0.0)?;
    let a = Complex64::new(1.0 / vals[pos].sqrt(), 0.0);
    let b = Complex64::new(1.0 / (-vals[neg]).sqrt(), 0.0);
    Some(vecs.column(pos) * a + vecs.column(neg) * b)
}

/// A random Lagrangian with small rational coordinates. Graphs of rational
/// symmetric matrices, moved into a random coordinate chart by quarter
/// turns in a random subset of the planes (q_i, p_i).
pub fn random_rational_lagrangian<R: Rng>(n: usize, rng: &mut R) -> Lagrangian {
    let mut s = RationalMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = if rng.random_bool(0.3) {
                BigRational::zero()
            } else {
                BigRational::new(rng.random_range(-3i64..=3).into(), rng.random_range(1i64..=2).into())
            };
            s[(i, j)] = v.clone();
            s[(j, i)] = v;
        }
    }
    let mut b = RationalMatrix::zeros(2 * n, n);
    for i in 0..n {
        b[(i, i)] = BigRational::one();
        for j in 0..n {
            b[(n + i, j)] = s[(i, j)].clone();
        }
    }
    for i in 0..n {
        if rng.random_bool(0.5) {
            // (q_i, p_i) ↦ (−p_i, q_i)
            for col in 0..n {
                let q = b[(i, col)].clone();
                let p = b[(n + i, col)].clone();
                b[(i, col)] = -p;
                b[(n + i, col)] = q;
            }
        }
    }
    Lagrangian::from_exact(b).expect("rational graph is Lagrangian")
}

/// A random element of Sp(2n, Q): product of rational shears and a
/// rational Levi factor.
pub fn random_rational_symplectic<R: Rng>(n: usize, rng: &mut R) -> RationalMatrix {
    let small = |rng: &mut R| BigRational::new(rng.random_range(-2i64..=2).into(), rng.random_range(1i64..=2).into());
    let mut g = RationalMatrix::identity(2 * n);
    for round in 0..3 {
        let mut s = RationalMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = small(rng);
                s[(i, j)] = v.clone();
                s[(j, i)] = v;
            }
        }
        let mut e = RationalMatrix::identity(2 * n);
        for i in 0..n {
            for j in 0..n {
                if round % 2 == 0 {
                    e[(i, n + j)] = s[(i, j)].clone();
                } else {
                    e[(n + i, j)] = s[(i, j)].clone();
                }
            }
        }
        g = g.mul(&e);
    }
    // Levi factor diag(A, A^{-T}) with A unipotent lower triangular
    let mut a = RationalMatrix::identity(n);
    for i in 0..n {
        for j in 0..i {
            a[(i, j)] = small(rng);
        }
    }
    let (ainv, _) = {
        let mut aug = a.hcat(&RationalMatrix::identity(n));
        aug = aug.rref().0;
        let inv = RationalMatrix::from_vec(n, n, (0..n * n).map(|t| aug[(t / n, n + t % n)].clone()).collect());
        (inv, ())
    };
    let ait = ainv.transpose();
    let mut levi = RationalMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            levi[(i, j)] = a[(i, j)].clone();
            levi[(n + i, n + j)] = ait[(i, j)].clone();
        }
    }
    g.mul(&levi)
}

/// A pairwise-transverse triple with β = k − n/2, built as a direct sum of
/// k positively and n − k negatively oriented line triples.
pub fn witness_triple(n: usize, k: usize) -> [Lagrangian; 3] {
    assert!(k <= n);
    let pos = [(1, 0), (1, 1), (0, 1)];
    let neg = [(0, 1), (1, 1), (1, 0)];
    let pick = |t: usize| -> Vec<(i64, i64)> { (0..n).map(|i| if i < k { pos[t] } else { neg[t] }).collect() };
    [
        Lagrangian::direct_sum_exact(&pick(0)),
        Lagrangian::direct_sum_exact(&pick(1)),
        Lagrangian::direct_sum_exact(&pick(2)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{diagonal, random_symplectic_with, rotation, symplectic_residual};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn lines(a: &[f64]) -> Vec<Lagrangian> {
        a.iter().map(|&x| Lagrangian::line(x)).collect()
    }

    /// Signature of the 3×3 form by direct eigenvalue computation.
    fn brute_tau_n1(a: [f64; 3]) -> i64 {
        let v: Vec<(f64, f64)> = a.iter().map(|t| (t.cos(), t.sin())).collect();
        let om = |x: (f64, f64), y: (f64, f64)| x.0 * y.1 - x.1 * y.0;
        let c12 = om(v[0], v[1]);
        let c23 = om(v[1], v[2]);
        let c31 = om(v[2], v[0]);
        let m = RealMatrix::from_row_slice(3, 3, &[0.0, c12, c31, c12, 0.0, c23, c31, c23, 0.0]);
        let e = SymmetricEigen::new(m).eigenvalues;
        e.iter().filter(|&&x| x > 1e-12).count() as i64 - e.iter().filter(|&&x| x < -1e-12).count() as i64
    }

    #[test]
    fn convention_triple() {
        let l = lines(&[0.0, FRAC_PI_4, 2.0 * FRAC_PI_4]);
        assert_eq!(brute_tau_n1([0.0, FRAC_PI_4, 2.0 * FRAC_PI_4]), 1);
        let v = kashiwara(&l[0], &l[1], &l[2], Mode::default()).unwrap();
        assert_eq!(v.tau, 1);
        assert_eq!(v.to_string(), "+1/2");
        assert!(is_maximal_triple(&l[0], &l[1], &l[2]));
        let v = kashiwara(&l[2], &l[1], &l[0], Mode::default()).unwrap();
        assert_eq!(v.tau, -1);
        assert_eq!(v.to_string(), "-1/2");
        assert!(!is_maximal_triple(&l[2], &l[1], &l[0]));
    }

    #[test]
    fn degenerate_triples() {
        let l = Lagrangian::line(0.3);
        let m = Lagrangian::line(1.2);
        let v = kashiwara(&l, &l, &m, Mode::Exact).unwrap();
        assert!(v.tau.abs() < 1);
        assert!(!is_maximal_triple(&l, &l, &l));
        assert_eq!(kashiwara(&l, &l, &l, Mode::default()).unwrap().tau, 0);
    }

    #[test]
    fn direct_sum_of_maximal_triples() {
        let t = witness_triple(2, 2);
        assert_eq!(kashiwara(&t[0], &t[1], &t[2], Mode::Exact).unwrap().tau, 2);
        assert_eq!(kashiwara(&t[0], &t[1], &t[2], Mode::default()).unwrap().tau, 2);
        for n in 1..=3 {
            for k in 0..=n {
                let t = witness_triple(n, k);
                let v = kashiwara(&t[0], &t[1], &t[2], Mode::Exact).unwrap();
                assert_eq!(v.tau, 2 * k as i64 - n as i64);
            }
        }
    }

    #[test]
    fn transversality_examples() {
        let e1 = Lagrangian::horizontal(1);
        let e2 = Lagrangian::vertical(1);
        assert!(is_transverse(&e1, &e2, Mode::default()).unwrap());
        assert!(!is_transverse(&e1, &e1, Mode::default()).unwrap());
        assert!(!is_transverse(&e1, &e1, Mode::Exact).unwrap());

        // lines 1e-10 apart: float mode refuses, exact mode decides
        let near = Lagrangian::new(RealMatrix::from_column_slice(2, 1, &[1.0, 1e-10]), 1e-9).unwrap();
        assert!(matches!(is_transverse(&e1, &near, Mode::Float { zero_tol: 1e-10 }), Err(Error::NearDegenerate { .. })));
        assert!(is_transverse(&e1, &near, Mode::Exact).unwrap());
    }

    #[test]
    fn action_examples() {
        let l = Lagrangian::line(0.4);
        assert!(act(&SymplecticMatrix::identity(1), &l).same_span(&l, 1e-12));
        let j = SymplecticMatrix::from_matrix_unchecked(j_matrix(1));
        assert!(act(&j, &Lagrangian::horizontal(1)).same_span(&Lagrangian::vertical(1), 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let n = rng.random_range(1..=3);
            let ls: Vec<Lagrangian> = (0..3).map(|_| random_rational_lagrangian(n, &mut rng)).collect();
            let g = random_symplectic_with(n, 0.6, &mut rng);
            let a = kashiwara(&ls[0], &ls[1], &ls[2], Mode::Exact).unwrap();
            let gl: Vec<Lagrangian> = ls.iter().map(|l| act(&g, l)).collect();
            if let Ok(b) = kashiwara(&gl[0], &gl[1], &gl[2], Mode::default()) {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn rational_symplectic_is_symplectic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 1..=3 {
            let g = random_rational_symplectic(n, &mut rng);
            let j = rational_j(n);
            assert_eq!(g.transpose().mul(&j).mul(&g), j);
            assert!(symplectic_residual(&g.to_f64()) < 1e-9);
        }
    }

    #[test]
    fn fixed_lagrangian_examples() {
        let l = fixed_lagrangian(&diagonal(&[2.0])).unwrap().unwrap();
        assert!(l.same_span(&Lagrangian::horizontal(1), 1e-9) || l.same_span(&Lagrangian::vertical(1), 1e-9));
        assert!(fixed_lagrangian(&rotation(&[PI / 3.0])).unwrap().is_none());

        // block upper triangular [[A, B], [0, A^{-T}]] fixes span(e_1, …, e_n)
        let a = RealMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 3.0]);
        let ait = a.clone().try_inverse().unwrap().transpose();
        let s = RealMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, -2.0]);
        let b = &a * s;
        let mut g = RealMatrix::zeros(4, 4);
        g.view_mut((0, 0), (2, 2)).copy_from(&a);
        g.view_mut((0, 2), (2, 2)).copy_from(&b);
        g.view_mut((2, 2), (2, 2)).copy_from(&ait);
        let g = crate::symplectic::check_symplectic(&g, 1e-12).unwrap();
        let l = fixed_lagrangian(&g).unwrap().unwrap();
        assert!(act(&g, &l).same_span(&l, 1e-8));
        assert!(act(&g, &Lagrangian::horizontal(2)).same_span(&Lagrangian::horizontal(2), 1e-12));
    }

    #[test]
    fn fixed_lagrangian_neutral_elliptic() {
        // rotations by α and −α in two planes: Krein-neutral, so a fixed
        // Lagrangian exists although there is no real eigenvector
        let g = rotation(&[0.7, -0.7]);
        let l = fixed_lagrangian(&g).unwrap().unwrap();
        assert!(act(&g, &l).same_span(&l, 1e-8));
        assert!(fixed_lagrangian(&rotation(&[0.7, 0.7])).unwrap().is_none());
    }

    #[test]
    fn fixed_lagrangian_random_hyperbolic_and_unipotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let n = rng.random_range(1..=3);
            let lam: Vec<f64> = (0..n).map(|_| rng.random_range(1.5..3.0) * if rng.random_bool(0.5) { -1.0 } else { 1.0 }).collect();
            let h = random_symplectic_with(n, 0.5, &mut rng);
            let g = diagonal(&lam).conjugate_by(&h);
            let l = fixed_lagrangian(&g).unwrap().unwrap();
            assert!(act(&g, &l).same_span(&l, 1e-7));
        }
        let u = SymplecticMatrix::from_matrix_unchecked(RealMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
        let l = fixed_lagrangian(&u).unwrap().unwrap();
        assert!(l.same_span(&Lagrangian::horizontal(1), 1e-9));
    }

    #[test]
    fn boundary_embedding() {
        assert!(boundary_embed_diag(0.0, 3).same_span(&Lagrangian::horizontal(3), 1e-15));
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..100 {
            let n = rng.random_range(1..=3);
            let mut x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            x.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let rot = rng.random_range(0..3);
            x.rotate_left(rot);
            let l: Vec<Lagrangian> = x.iter().map(|&t| boundary_embed_diag(t, n)).collect();
            assert!(is_maximal_triple(&l[0], &l[1], &l[2]));
        }
    }

    #[test]
    fn maslov_value_display() {
        assert_eq!(MaslovValue { tau: 0 }.to_string(), "0");
        assert_eq!(MaslovValue { tau: 4 }.to_string(), "+2");
        assert_eq!(MaslovValue { tau: -3 }.to_string(), "-3/2");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(200))]

            #[test]
            fn cocycle_and_bound(n in 1usize..=3, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let l: Vec<Lagrangian> = (0..4).map(|_| random_rational_lagrangian(n, &mut rng)).collect();
                let b = |i: usize, j: usize, k: usize| kashiwara(&l[i], &l[j], &l[k], Mode::Exact).unwrap().tau;
                prop_assert_eq!(b(1, 2, 3) - b(0, 2, 3) + b(0, 1, 3) - b(0, 1, 2), 0);
                prop_assert!(b(0, 1, 2).abs() <= n as i64);
                prop_assert_eq!(b(1, 0, 2), -b(0, 1, 2));
                prop_assert_eq!(b(0, 2, 1), -b(0, 1, 2));
            }

            #[test]
            fn exact_sp_invariance(n in 1usize..=3, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let l: Vec<Lagrangian> = (0..3).map(|_| random_rational_lagrangian(n, &mut rng)).collect();
                let g = random_rational_symplectic(n, &mut rng);
                let gl: Vec<Lagrangian> = l.iter().map(|x| act_exact(&g, x).unwrap()).collect();
                prop_assert_eq!(
                    kashiwara(&l[0], &l[1], &l[2], Mode::Exact).unwrap(),
                    kashiwara(&gl[0], &gl[1], &gl[2], Mode::Exact).unwrap()
                );
            }
        }
    }
}
