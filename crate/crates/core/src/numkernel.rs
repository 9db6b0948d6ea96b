//! Small dense linear algebra: polar decomposition, eigen-data, and
//! symmetric signatures in floating point or exact rational arithmetic.

use std::fmt;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_bigint::{BigInt, Sign};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type RealMatrix = DMatrix<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const SINGULAR_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-9;
pub const EIGEN_RESIDUAL: f64 = 1e-8;

const ITER_EPS: f64 = 1e-15;
const MAX_ITER: usize = 10_000;

/// Counts of positive, negative and zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SignatureResult {
    pub positives: usize,
    pub negatives: usize,
    pub zeros: usize,
}

impl SignatureResult {
    pub fn dim(&self) -> usize {
        self.positives + self.negatives + self.zeros
    }

    /// positives minus negatives.
    pub fn signature(&self) -> i64 {
        self.positives as i64 - self.negatives as i64
    }
}

pub fn max_abs(m: &RealMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn is_finite(m: &RealMatrix) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// M = P·U with P symmetric positive definite and U orthogonal.
pub fn polar_decompose(m: &RealMatrix, tol: f64) -> Result<(RealMatrix, RealMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("polar decomposition needs a square matrix".into()));
    }
    let svd = SVD::try_new(m.clone(), true, true, ITER_EPS, MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    let smin = svd.singular_values.min();
    if smin <= tol {
        return Err(Error::SingularInput { sigma: smin });
    }
    let w = svd.u.as_ref().ok_or(Error::ConvergenceFailure)?;
    let vt = svd.v_t.as_ref().ok_or(Error::ConvergenceFailure)?;
    let sigma = DMatrix::from_diagonal(&svd.singular_values);
    let p = w * sigma * w.transpose();
    let p = (&p + p.transpose()) * 0.5;
    Ok((p, w * vt))
}

/// Polar factors together with the data of a real logarithm of P:
/// P = W·diag(σ)·Wᵀ.
pub struct PolarLog {
    pub w: RealMatrix,
    pub log_sigma: DVector<f64>,
    pub u: RealMatrix,
}

pub fn polar_log(m: &RealMatrix, tol: f64) -> Result<PolarLog> {
    let svd = SVD::try_new(m.clone(), true, true, ITER_EPS, MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    let smin = svd.singular_values.min();
    if smin <= tol {
        return Err(Error::SingularInput { sigma: smin });
    }
    let w = svd.u.ok_or(Error::ConvergenceFailure)?;
    let vt = svd.v_t.ok_or(Error::ConvergenceFailure)?;
    let u = &w * vt;
    Ok(PolarLog { log_sigma: svd.singular_values.map(f64::ln), w, u })
}

/// Signature of a symmetric matrix. With `exact` the entries are converted
/// to rationals exactly and no floating point decision is made.
pub fn symmetric_signature(s: &RealMatrix, zero_tol: f64, exact: bool) -> Result<SignatureResult> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch("signature needs a square matrix".into()));
    }
    if exact {
        let q = RationalMatrix::from_f64_matrix(s)?;
        if !q.is_symmetric() {
            return Err(Error::InvalidInput("matrix is not exactly symmetric".into()));
        }
        return Ok(signature_exact(&q));
    }
    let asym = max_abs(&(s - s.transpose()));
    if asym > zero_tol.max(SYMMETRY_TOL) {
        return Err(Error::InvalidInput(format!("matrix is not symmetric (residual {asym:e})")));
    }
    let sym = (s + s.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, ITER_EPS, MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    let mut out = SignatureResult { positives: 0, negatives: 0, zeros: 0 };
    for &l in eig.eigenvalues.iter() {
        let a = l.abs();
        if a >= zero_tol / 10.0 && a <= zero_tol * 10.0 {
            return Err(Error::NearDegenerate { value: l, tol: zero_tol });
        }
        if a < zero_tol / 10.0 {
            out.zeros += 1;
        } else if l > 0.0 {
            out.positives += 1;
        } else {
            out.negatives += 1;
        }
    }
    Ok(out)
}

/// Signature by fraction-free symmetric elimination over the integers.
///
/// Pivots are taken on the diagonal entry of largest magnitude (lowest index
/// on ties). When the remaining diagonal vanishes but an off-diagonal entry
/// a_ij does not, the congruence e_i ← e_i + e_j creates the diagonal entry
/// 2·a_ij. Each step multiplies the Schur complement by the raw pivot, so the
/// sign of every earlier pivot is carried along.
pub fn signature_exact(s: &RationalMatrix) -> SignatureResult {
    let k = s.rows;
    assert_eq!(k, s.cols, "signature needs a square matrix");
    let mut a = s.to_integer_rows();
    let mut active: Vec<usize> = (0..k).collect();
    let mut carried = Sign::Plus;
    let mut out = SignatureResult { positives: 0, negatives: 0, zeros: 0 };

    while !active.is_empty() {
        let mut best: Option<usize> = None;
        for &i in &active {
            if a[i][i].is_zero() {
                continue;
            }
            match best {
                Some(b) if a[b][b].abs() >= a[i][i].abs() => {}
                _ => best = Some(i),
            }
        }
        let piv = match best {
            Some(p) => p,
            None => {
                let mut off: Option<(usize, usize)> = None;
                for (x, &i) in active.iter().enumerate() {
                    for &j in &active[x + 1..] {
                        if a[i][j].is_zero() {
                            continue;
                        }
                        match off {
                            Some((bi, bj)) if a[bi][bj].abs() >= a[i][j].abs() => {}
                            _ => off = Some((i, j)),
                        }
                    }
                }
                let Some((i, j)) = off else {
                    out.zeros += active.len();
                    break;
                };
                // row/column i += row/column j
                for &r in &active {
                    let v = a[r][j].clone();
                    a[r][i] += v;
                }
                for &c in &active {
                    let v = a[j][c].clone();
                    a[i][c] += v;
                }
                i
            }
        };
        let p = a[piv][piv].clone();
        let sign = if p.is_positive() { Sign::Plus } else { Sign::Minus };
        if sign == carried {
            out.positives += 1;
        } else {
            out.negatives += 1;
        }
        active.retain(|&x| x != piv);
        let col: Vec<BigInt> = active.iter().map(|&i| a[i][piv].clone()).collect();
        let mut g = BigInt::zero();
        for (x, &i) in active.iter().enumerate() {
            for (y, &j) in active.iter().enumerate() {
                let v = &p * &a[i][j] - &col[x] * &col[y];
                g = g.gcd(&v);
                a[i][j] = v;
            }
        }
        if !g.is_zero() && !g.is_one() {
            for &i in &active {
                for &j in &active {
                    a[i][j] = &a[i][j] / &g;
                }
            }
        }
        if sign == Sign::Minus {
            carried = match carried {
                Sign::Plus => Sign::Minus,
                _ => Sign::Plus,
            };
        }
    }
    out
}

/// An eigenvalue with a unit eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: ComplexVector,
}

/// Eigenvalues of a real matrix via real Schur form.
pub fn eigenvalues(m: &RealMatrix) -> Result<Vec<Complex64>> {
    let schur = Schur::try_new(m.clone(), ITER_EPS, MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Eigenpairs sorted by argument, then modulus.
pub fn complex_eigen(m: &RealMatrix) -> Result<Vec<EigenPair>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("eigen-decomposition needs a square matrix".into()));
    }
    let mut vals = eigenvalues(m)?;
    vals.sort_by(|a, b| {
        a.arg()
            .partial_cmp(&b.arg())
            .unwrap()
            .then(a.norm().partial_cmp(&b.norm()).unwrap())
    });
    let scale = max_abs(m).max(1.0);
    let mc = to_complex(m);
    let group_tol = 1e-7 * scale;
    let mut out: Vec<EigenPair> = Vec::with_capacity(vals.len());
    let mut i = 0;
    while i < vals.len() {
        let mut j = i + 1;
        while j < vals.len() && (vals[j] - vals[i]).norm() < group_tol {
            j += 1;
        }
        let mean = vals[i..j].iter().sum::<Complex64>() / (j - i) as f64;
        let shifted = &mc - ComplexMatrix::identity(mc.nrows(), mc.ncols()) * mean;
        let basis = null_space_complex(&shifted, j - i)?;
        for (t, &v) in vals[i..j].iter().enumerate() {
            let vec = basis[t.min(basis.len() - 1)].clone();
            let res = (&mc * &vec - &vec * v).norm();
            if res >= EIGEN_RESIDUAL * scale {
                let refined = inverse_iteration(&mc, v, &vec)?;
                let res = (&mc * &refined - &refined * v).norm();
                if res >= EIGEN_RESIDUAL * scale {
                    return Err(Error::ConvergenceFailure);
                }
                out.push(EigenPair { value: v, vector: refined });
            } else {
                out.push(EigenPair { value: v, vector: vec });
            }
        }
        i = j;
    }
    Ok(out)
}

fn inverse_iteration(m: &ComplexMatrix, value: Complex64, start: &ComplexVector) -> Result<ComplexVector> {
    let n = m.nrows();
    let shift = value + Complex64::new(1e-10, 1e-10) * value.norm().max(1.0);
    let a = m - ComplexMatrix::identity(n, n) * shift;
    let lu = a.lu();
    let mut v = start.clone();
    for _ in 0..3 {
        let Some(next) = lu.solve(&v) else {
            return Err(Error::ConvergenceFailure);
        };
        let nrm = next.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::ConvergenceFailure);
        }
        v = next / Complex64::new(nrm, 0.0);
    }
    Ok(v)
}

/// Orthonormal basis of the numerical null space, at most `max_dim` vectors
/// but at least one (the least singular direction).
pub fn null_space_complex(m: &ComplexMatrix, max_dim: usize) -> Result<Vec<ComplexVector>> {
    let n = m.ncols();
    let svd = SVD::try_new(m.clone(), false, true, ITER_EPS, MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    let vt = svd.v_t.ok_or(Error::ConvergenceFailure)?;
    let scale = svd.singular_values.max().max(1.0);
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].partial_cmp(&svd.singular_values[b]).unwrap());
    let mut out = Vec::new();
    for (rank, &k) in idx.iter().enumerate() {
        if rank >= max_dim.max(1) {
            break;
        }
        if rank > 0 && svd.singular_values[k] > 1e-6 * scale {
            break;
        }
        let row = vt.row(k);
        out.push(DVector::from_iterator(n, row.iter().map(|z| z.conj())));
    }
    Ok(out)
}

/// Numerical dimension of the null space at relative threshold `rel_tol`.
pub fn null_dim_complex(m: &ComplexMatrix, rel_tol: f64) -> Result<(usize, Vec<ComplexVector>)> {
    let n = m.ncols();
    let svd = SVD::try_new(m.clone(), false, true, ITER_EPS, MAX_ITER).ok_or(Error::ConvergenceFailure)?;
    let vt = svd.v_t.ok_or(Error::ConvergenceFailure)?;
    let scale = svd.singular_values.max().max(1.0);
    let mut out = Vec::new();
    for k in 0..svd.singular_values.len() {
        if svd.singular_values[k] <= rel_tol * scale {
            let row = vt.row(k);
            out.push(DVector::from_iterator(n, row.iter().map(|z| z.conj())));
        }
    }
    Ok((out.len(), out))
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Column rank at relative threshold.
pub fn rank(m: &RealMatrix, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let scale = sv.max().max(1.0);
    sv.iter().filter(|&&s| s > rel_tol * scale).count()
}

/// Smallest singular value.
pub fn sigma_min(m: &RealMatrix) -> f64 {
    m.clone().singular_values().min()
}

/// Orthonormal basis of the column span (thin QR).
pub fn orthonormalize(m: &RealMatrix) -> RealMatrix {
    m.clone().qr().q()
}

/// Dense matrix over arbitrary-precision rationals, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigRational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigRational::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigRational>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[i64]) -> Self {
        Self::from_vec(rows, cols, data.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    /// Exact conversion: every finite double is a dyadic rational.
    pub fn from_f64_matrix(m: &RealMatrix) -> Result<Self> {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = BigRational::from_f64(m[(i, j)])
                    .ok_or_else(|| Error::InvalidInput("non-finite entry".into()))?;
            }
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> RealMatrix {
        RealMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64().unwrap_or(f64::NAN))
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = a * &other[(k, j)];
                    out[(i, j)] += v;
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Horizontal concatenation.
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    /// Reduced row echelon form and the rank.
    pub fn rref(&self) -> (Self, usize) {
        let mut m = self.clone();
        let mut r = 0;
        for c in 0..m.cols {
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else {
                continue;
            };
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, r * m.cols + j);
            }
            let inv = m[(r, c)].recip();
            for j in 0..m.cols {
                m[(r, j)] = &m[(r, j)] * &inv;
            }
            for i in 0..m.rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let f = m[(i, c)].clone();
                for j in 0..m.cols {
                    let v = &f * &m[(r, j)];
                    m[(i, j)] -= v;
                }
            }
            r += 1;
            if r == m.rows {
                break;
            }
        }
        (m, r)
    }

    pub fn rank(&self) -> usize {
        self.rref().1
    }

    /// Multiply through by the least common denominator.
    fn to_integer_rows(&self) -> Vec<Vec<BigInt>> {
        let mut l = BigInt::one();
        for x in &self.data {
            l = l.lcm(x.denom());
        }
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| {
                        let x = &self[(i, j)];
                        x.numer() * (&l / x.denom())
                    })
                    .collect()
            })
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for RationalMatrix {
    type Output = BigRational;
    fn index(&self, (i, j): (usize, usize)) -> &BigRational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RationalMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigRational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Parse "p/q", an integer, or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in '{t}'")))?;
        let q: BigInt = q.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in '{t}'")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in '{t}'")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Ok(i) = t.parse::<BigInt>() {
        return Ok(BigRational::from_integer(i));
    }
    parse_decimal(t).ok_or_else(|| Error::Parse(format!("not a rational number: '{t}'")))
}

fn parse_decimal(t: &str) -> Option<BigRational> {
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], t[k + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rot(a: f64) -> RealMatrix {
        RealMatrix::from_row_slice(2, 2, &[a.cos(), -a.sin(), a.sin(), a.cos()])
    }

    #[test]
    fn polar_trivial_cases() {
        let (p, u) = polar_decompose(&RealMatrix::identity(3, 3), SINGULAR_TOL).unwrap();
        assert!(max_abs(&(p - RealMatrix::identity(3, 3))) < 1e-14);
        assert!(max_abs(&(u - RealMatrix::identity(3, 3))) < 1e-14);

        let d = RealMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0]);
        let (p, u) = polar_decompose(&d, SINGULAR_TOL).unwrap();
        assert!(max_abs(&(p - &d)) < 1e-14);
        assert!(max_abs(&(u - RealMatrix::identity(2, 2))) < 1e-14);

        let r = rot(0.7);
        let (p, u) = polar_decompose(&r, SINGULAR_TOL).unwrap();
        assert!(max_abs(&(p - RealMatrix::identity(2, 2))) < 1e-14);
        assert!(max_abs(&(u - r)) < 1e-14);
    }

    #[test]
    fn polar_rejects_singular() {
        let m = RealMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(polar_decompose(&m, SINGULAR_TOL), Err(Error::SingularInput { .. })));
    }

    #[test]
    fn polar_reconstructs_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let k = rng.random_range(1..=6);
            let m = RealMatrix::from_fn(k, k, |i, j| rng.random_range(-1.0..1.0) + if i == j { 3.0 } else { 0.0 });
            let (p, u) = polar_decompose(&m, SINGULAR_TOL).unwrap();
            assert!(max_abs(&(&p * &u - &m)) <= 1e-9 * max_abs(&m));
            assert!(max_abs(&(p.transpose() * &p - &p * &p)) < 1e-9);
            assert!(max_abs(&(u.transpose() * &u - RealMatrix::identity(k, k))) < 1e-9);
            assert!(SymmetricEigen::new(p).eigenvalues.min() > 0.0);
        }
    }

    #[test]
    fn signature_examples() {
        let d = RealMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 0.0]));
        let want = SignatureResult { positives: 1, negatives: 1, zeros: 1 };
        assert_eq!(symmetric_signature(&d, 1e-9, false).unwrap(), want);
        assert_eq!(symmetric_signature(&d, 1e-9, true).unwrap(), want);

        let z = RealMatrix::zeros(3, 3);
        let want = SignatureResult { positives: 0, negatives: 0, zeros: 3 };
        assert_eq!(symmetric_signature(&z, 1e-9, false).unwrap(), want);
        assert_eq!(symmetric_signature(&z, 1e-9, true).unwrap(), want);

        // eigenvalues of the swap are +1 and -1
        let h = RealMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let want = SignatureResult { positives: 1, negatives: 1, zeros: 0 };
        assert_eq!(symmetric_signature(&h, 1e-9, false).unwrap(), want);
        assert_eq!(symmetric_signature(&h, 1e-9, true).unwrap(), want);
    }

    #[test]
    fn float_signature_flags_near_degenerate() {
        let d = RealMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-9]));
        assert!(matches!(symmetric_signature(&d, 1e-9, false), Err(Error::NearDegenerate { .. })));
        let s = symmetric_signature(&d, 1e-9, true).unwrap();
        assert_eq!(s.positives, 2);
    }

    #[test]
    fn exact_signature_handles_zero_diagonal_blocks() {
        let m = RationalMatrix::from_i64(4, 4, &[0, 0, 3, 0, 0, 0, 0, -2, 3, 0, 0, 0, 0, -2, 0, 0]);
        let s = signature_exact(&m);
        assert_eq!((s.positives, s.negatives, s.zeros), (2, 2, 0));
        let m = RationalMatrix::from_i64(3, 3, &[-1, 2, 0, 2, -4, 0, 0, 0, 5]);
        let s = signature_exact(&m);
        assert_eq!((s.positives, s.negatives, s.zeros), (1, 1, 1));
    }

    #[test]
    fn complex_eigen_known_spectra() {
        let a = std::f64::consts::FRAC_PI_3;
        let e = complex_eigen(&rot(a)).unwrap();
        assert_eq!(e.len(), 2);
        assert!((e[0].value - Complex64::from_polar(1.0, -a)).norm() < 1e-12);
        assert!((e[1].value - Complex64::from_polar(1.0, a)).norm() < 1e-12);

        let d = RealMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let e = complex_eigen(&d).unwrap();
        assert!((e[0].value.re - 0.5).abs() < 1e-14 && (e[1].value.re - 2.0).abs() < 1e-14);

        let c = RealMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let e = complex_eigen(&c).unwrap();
        assert!((e[0].value - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1].value - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        for p in &e {
            let mc = to_complex(&c);
            assert!((&mc * &p.vector - &p.vector * p.value).norm() < 1e-8);
        }
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-7").unwrap(), BigRational::from_integer((-7).into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_rational("1.5e2").unwrap(), BigRational::from_integer(150.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn rref_rank() {
        let m = RationalMatrix::from_i64(3, 3, &[1, 2, 3, 2, 4, 6, 1, 0, 1]);
        assert_eq!(m.rank(), 2);
        assert_eq!(RationalMatrix::identity(4).rank(), 4);
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop_assert_eq, prop_assume, proptest, Strategy};

        fn sym_entries(k: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
            proptest::collection::vec((-6i64..=6, 1i64..=4), k * (k + 1) / 2)
        }

        fn build_sym(k: usize, e: &[(i64, i64)]) -> RationalMatrix {
            let mut m = RationalMatrix::zeros(k, k);
            let mut t = 0;
            for i in 0..k {
                for j in i..k {
                    let v = BigRational::new(e[t].0.into(), e[t].1.into());
                    m[(i, j)] = v.clone();
                    m[(j, i)] = v;
                    t += 1;
                }
            }
            m
        }

        proptest! {
            #[test]
            fn exact_agrees_with_float(k in 1usize..6, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let e: Vec<(i64, i64)> = (0..k * (k + 1) / 2)
                    .map(|_| (rng.random_range(-6..=6), rng.random_range(1..=4)))
                    .collect();
                let q = build_sym(k, &e);
                let exact = signature_exact(&q);
                if let Ok(f) = symmetric_signature(&q.to_f64(), 1e-9, false) {
                    prop_assert_eq!(f, exact);
                }
            }

            #[test]
            fn congruence_invariance(k in 1usize..6, e in sym_entries(5), a in proptest::collection::vec(-3i64..=3, 25)) {
                let s = build_sym(5, &e);
                let s = RationalMatrix::from_vec(k, k, (0..k * k).map(|t| s[(t / k, t % k)].clone()).collect());
                let mut m = RationalMatrix::from_i64(k, k, &a[..k * k]);
                for i in 0..k {
                    m[(i, i)] += BigRational::from_integer(7.into());
                }
                prop_assume!(m.rank() == k);
                let c = m.transpose().mul(&s).mul(&m);
                prop_assert_eq!(signature_exact(&c), signature_exact(&s));
            }
        }
    }
}
