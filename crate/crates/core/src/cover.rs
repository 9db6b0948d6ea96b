//! The universal cover of Sp(2n,R), realized as pairs (g, θ) where θ is a
//! continuous determination of arg det_ℂ(U(·))^w along a path from I to g.
//! Rotation numbers and their homogeneous lift live here too.

use std::f64::consts::PI;

use nalgebra::Schur;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{self, ComplexMatrix, RealMatrix};
use crate::surface::{Representation, Word};
use crate::symplectic::{j_matrix, krein_spectrum, unitary_to_real, wrap_angle, KappaClass, KreinSpectrum, SymplecticMatrix, CLUSTER_TOL};

pub const DEFAULT_DEPTH: u32 = 20;
pub const RETRY_DEPTH: u32 = 26;
const SEGMENT_LIMIT: usize = 1 << 20;
const INITIAL_SEGMENTS: usize = 64;
const BRANCH_TOL: f64 = 1e-6;
const TAU: f64 = 2.0 * PI;

/// An element of the universal cover.
#[derive(Debug, Clone)]
pub struct CoverElement {
    pub g: SymplecticMatrix,
    pub theta: f64,
    pub kappa: KappaClass,
}

impl CoverElement {
    pub fn identity(n: usize, kappa: KappaClass) -> Self {
        Self { g: SymplecticMatrix::identity(n), theta: 0.0, kappa }
    }

    /// The central element (I, 2πk).
    pub fn central(n: usize, k: i64, kappa: KappaClass) -> Self {
        Self { g: SymplecticMatrix::identity(n), theta: TAU * k as f64, kappa }
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        cover_mul(self, other)
    }

    pub fn inverse(&self) -> Result<Self> {
        inverse(self)
    }

    pub fn pow(&self, m: i64) -> Result<Self> {
        cover_pow(self, m)
    }
}

/// The path s ↦ exp(s·log P)·exp(s·log U) from I to g = P·U. The unitary
/// factor is the polar factor of the complex-linear part of g, which has
/// σ_min ≥ 1, and log P is assembled from the eigenpairs λ > 1 of P together
/// with their symplectic partners J·v, so tiny singular values are never used.
struct ReferencePath {
    n: usize,
    expanding: RealMatrix,
    contracting: RealMatrix,
    logs: Vec<f64>,
    q: ComplexMatrix,
    phases: Vec<f64>,
}

impl ReferencePath {
    fn new(g: &SymplecticMatrix) -> Result<Self> {
        let n = g.n();
        if !numkernel::is_finite(g.matrix()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let svd = nalgebra::SVD::try_new(g.complex_part(), true, true, 1e-15, 10_000).ok_or(Error::ConvergenceFailure)?;
        let k = svd.u.ok_or(Error::ConvergenceFailure)? * svd.v_t.ok_or(Error::ConvergenceFailure)?;
        let p = g.matrix() * unitary_to_real(&k).transpose();
        let p = (&p + p.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::try_new(p, 1e-15, 10_000).ok_or(Error::ConvergenceFailure)?;
        let j = j_matrix(n);
        let mut cols = Vec::new();
        let mut logs = Vec::new();
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam > 1.0 {
                cols.push(eig.eigenvectors.column(i).into_owned());
                logs.push(lam.ln());
            }
        }
        let expanding = if cols.is_empty() { RealMatrix::zeros(2 * n, 0) } else { RealMatrix::from_columns(&cols) };
        let contracting = &j * &expanding;
        let schur = Schur::try_new(k, 1e-15, 10_000).ok_or(Error::ConvergenceFailure)?;
        let (q, t) = schur.unpack();
        let phases = (0..n)
            .map(|i| {
                let a = t[(i, i)].arg();
                if a <= -PI + 1e-15 {
                    PI
                } else {
                    a
                }
            })
            .collect();
        Ok(Self { n, expanding, contracting, logs, q, phases })
    }

    fn angle_sum(&self) -> f64 {
        self.phases.iter().sum()
    }

    fn eval(&self, t: f64) -> RealMatrix {
        let n = self.n;
        let mut p = RealMatrix::identity(2 * n, 2 * n);
        for (i, l) in self.logs.iter().enumerate() {
            let v = self.expanding.column(i);
            let jv = self.contracting.column(i);
            p += (v * v.transpose()) * ((t * l).exp() - 1.0) + (jv * jv.transpose()) * ((-t * l).exp() - 1.0);
        }
        let e = ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::from_polar(1.0, t * self.phases[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let k = &self.q * e * self.q.adjoint();
        p * unitary_to_real(&k)
    }
}

fn phase(m: &RealMatrix) -> f64 {
    SymplecticMatrix::from_matrix_unchecked(m.clone()).det_phase()
}

/// Total continuous variation of a phase function on [0, 1], by adaptive
/// bisection until every step moves less than π/2.
pub fn winding_of_phase<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let mut total = 0.0;
    let mut segments = INITIAL_SEGMENTS;
    let mut stack: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let h = 1.0 / INITIAL_SEGMENTS as f64;
    let mut prev = f(0.0);
    let mut starts = Vec::with_capacity(INITIAL_SEGMENTS);
    for i in 0..INITIAL_SEGMENTS {
        let b = if i + 1 == INITIAL_SEGMENTS { 1.0 } else { (i + 1) as f64 * h };
        let fb = f(b);
        starts.push((i as f64 * h, b, prev, fb));
        prev = fb;
    }
    for seg in starts.into_iter().rev() {
        stack.push(seg);
    }
    while let Some((a, b, fa, fb)) = stack.pop() {
        let m = 0.5 * (a + b);
        let fm = f(m);
        let d1 = wrap_angle(fm - fa);
        let d2 = wrap_angle(fb - fm);
        if !(d1.is_finite() && d2.is_finite()) {
            return Err(Error::SubdivisionLimit { limit: SEGMENT_LIMIT });
        }
        if d1.abs() + d2.abs() < 0.5 * PI {
            total += d1 + d2;
            continue;
        }
        segments += 1;
        if segments > SEGMENT_LIMIT || b - a < 1e-12 {
            return Err(Error::SubdivisionLimit { limit: SEGMENT_LIMIT });
        }
        stack.push((m, b, fm, fb));
        stack.push((a, m, fa, fm));
    }
    Ok(total)
}

/// Winding of det_ℂ(U(path(t)))^w for t from 0 to 1.
pub fn winding_along_path<F: Fn(f64) -> SymplecticMatrix>(path: F, kappa: KappaClass) -> Result<f64> {
    let raw = winding_of_phase(|t| path(t).det_phase())?;
    Ok(kappa.weight() as f64 * raw)
}

/// Lift along the reference path, with no branch check.
pub fn reference_lift(g: &SymplecticMatrix, kappa: KappaClass) -> Result<CoverElement> {
    let r = ReferencePath::new(g)?;
    Ok(CoverElement { g: g.clone(), theta: kappa.weight() as f64 * r.angle_sum(), kappa })
}

/// The lift along s ↦ exp(s·log P)·U(s) with unitary eigen-angles in (−π, π].
pub fn canonical_lift(g: &SymplecticMatrix, kappa: KappaClass) -> Result<CoverElement> {
    let r = ReferencePath::new(g)?;
    if let Some(&a) = r.phases.iter().find(|a| a.abs() > PI - BRANCH_TOL) {
        return Err(Error::BranchAmbiguity { angle: a });
    }
    Ok(CoverElement { g: g.clone(), theta: kappa.weight() as f64 * r.angle_sum(), kappa })
}

fn snap_turns(x: f64) -> f64 {
    TAU * (x / TAU).round()
}

fn same_cover(x: &CoverElement, y: &CoverElement) -> Result<()> {
    if x.n() != y.n() {
        return Err(Error::DimensionMismatch("cover elements of different rank".into()));
    }
    if x.kappa != y.kappa {
        return Err(Error::InvalidInput("cover elements with different kappa".into()));
    }
    Ok(())
}

/// Group law of the cover.
pub fn cover_mul(x: &CoverElement, y: &CoverElement) -> Result<CoverElement> {
    same_cover(x, y)?;
    let w = x.kappa.weight() as f64;
    let r = ReferencePath::new(&y.g)?;
    let offset = snap_turns(y.theta - w * r.angle_sum());
    let xg = x.g.matrix();
    let wind = winding_of_phase(|t| phase(&(xg * r.eval(t))))?;
    Ok(CoverElement { g: x.g.mul(&y.g), theta: x.theta + offset + w * wind, kappa: x.kappa })
}

/// Inverse in the cover: the pointwise inverse of a path to g is a path to g⁻¹.
pub fn inverse(x: &CoverElement) -> Result<CoverElement> {
    let w = x.kappa.weight() as f64;
    let r = ReferencePath::new(&x.g)?;
    let offset = snap_turns(x.theta - w * r.angle_sum());
    let ginv = x.g.inverse();
    let gi = ginv.matrix().clone();
    // t ↦ g⁻¹·γ(t) runs from g⁻¹ to I; reversed, it runs from I to g⁻¹
    let wind = winding_of_phase(|t| phase(&(&gi * r.eval(t))))?;
    Ok(CoverElement { g: ginv, theta: -w * wind - offset, kappa: x.kappa })
}

pub fn cover_pow(x: &CoverElement, m: i64) -> Result<CoverElement> {
    let base = if m < 0 { inverse(x)? } else { x.clone() };
    let mut e = m.unsigned_abs();
    let mut acc = CoverElement::identity(x.n(), x.kappa);
    let mut sq = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = cover_mul(&acc, &sq)?;
        }
        e >>= 1;
        if e > 0 {
            sq = cover_mul(&sq, &sq)?;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotMethod {
    Krein,
    Homogenize,
}

/// Rot_κ(g) in turns, in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotValue {
    pub mod1: f64,
    pub method: RotMethod,
}

/// Rot̃_κ in turns, with the raw homogenization data behind it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedRot {
    pub value: f64,
    pub estimate: f64,
    pub defect: f64,
}

pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance on R/Z.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = frac(a - b);
    d.min(1.0 - d)
}

/// Rot_κ from the Krein data of the elliptic part.
pub fn rot_from_krein(spec: &KreinSpectrum, kappa: KappaClass) -> f64 {
    frac(kappa.weight() as f64 * spec.elliptic_angle() / TAU)
}

/// Rotation number. Uses Krein signs when the unit-circle spectrum is
/// semisimple and falls back to homogenization otherwise.
pub fn rot(g: &SymplecticMatrix, kappa: KappaClass) -> Result<RotValue> {
    match krein_spectrum(g, CLUSTER_TOL) {
        Ok(spec) => Ok(RotValue { mod1: rot_from_krein(&spec, kappa), method: RotMethod::Krein }),
        Err(Error::DefectiveOnCircle { .. } | Error::AmbiguousCluster { .. } | Error::ConvergenceFailure) => {
            rot_homogenized(g, kappa, DEFAULT_DEPTH)
        }
        Err(e) => Err(e),
    }
}

/// Rotation number by homogenization of a lift of the elliptic factor.
pub fn rot_homogenized(g: &SymplecticMatrix, kappa: KappaClass, depth: u32) -> Result<RotValue> {
    let x = reference_lift(g, kappa)?;
    let split = jordan_split(g.matrix())?;
    let e = elliptic_factor_with(&x, &split)?;
    let (h, _) = homogenize_elliptic(&e, &split, depth)?;
    Ok(RotValue { mod1: frac(h), method: RotMethod::Homogenize })
}

/// Repeated squaring: θ(x^{2^depth})/(2π·2^depth) and the largest observed
/// defect |θ(y²) − 2θ(y)|/2π along the way.
pub fn homogenize(x: &CoverElement, depth: u32) -> Result<(f64, f64)> {
    let mut y = x.clone();
    let mut defect: f64 = 0.0;
    for _ in 0..depth {
        let y2 = cover_mul(&y, &y)?;
        defect = defect.max((y2.theta - 2.0 * y.theta).abs() / TAU);
        y = y2;
    }
    let est = y.theta / (TAU * (1u64 << depth) as f64);
    Ok((est, defect))
}

/// Jordan–Chevalley data of a real symplectic matrix: A = e·r with e elliptic
/// (semisimple, unit-modulus spectrum), r = exp(L) hyperbolic times unipotent,
/// and all factors commuting.
pub struct JordanSplit {
    pub elliptic: RealMatrix,
    pub log_rest: RealMatrix,
    phases: Vec<f64>,
    moduli: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
    semisimple: bool,
}

impl JordanSplit {
    /// e^m rebuilt from the spectral projectors, so that large powers stay
    /// exactly elliptic.
    pub fn elliptic_power(&self, m: u64) -> RealMatrix {
        let dim = self.elliptic.nrows();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (a, p) in self.phases.iter().zip(&self.projectors) {
            let ang = (a * m as f64).rem_euclid(TAU);
            acc += p * Complex64::from_polar(1.0, ang);
        }
        acc.map(|z| z.re)
    }

    /// Σ μ·|μ|^{-t}·P over the spectral projectors; A at t = 0 and e at t = 1.
    fn scaled_power(&self, t: f64) -> RealMatrix {
        let dim = self.elliptic.nrows();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for ((a, r), p) in self.phases.iter().zip(&self.moduli).zip(&self.projectors) {
            acc += p * Complex64::from_polar(r.powf(1.0 - t), *a);
        }
        acc.map(|z| z.re)
    }

    /// exp(tL).
    pub fn rest_power(&self, t: f64) -> RealMatrix {
        if !self.semisimple {
            return (&self.log_rest * t).exp();
        }
        let dim = self.elliptic.nrows();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (r, p) in self.moduli.iter().zip(&self.projectors) {
            acc += p * Complex64::new(r.powf(t), 0.0);
        }
        acc.map(|z| z.re)
    }
}

pub fn jordan_split(a: &RealMatrix) -> Result<JordanSplit> {
    let centers = symmetric_centers(&paired_spectrum(numkernel::eigenvalues(a)?), 1e-5);
    let projectors = match eigen_projectors(a, &centers)? {
        Some(p) => (p, true),
        None => (newton_projectors(a, &centers)?, false),
    };
    let (projectors, semisimple) = projectors;
    let dim = a.nrows();
    let mut elliptic = ComplexMatrix::zeros(dim, dim);
    let mut hyper = ComplexMatrix::zeros(dim, dim);
    let mut semi = ComplexMatrix::zeros(dim, dim);
    for (&(mu, _), p) in centers.iter().zip(&projectors) {
        elliptic += p * (mu / mu.norm());
        hyper += p * Complex64::new(mu.norm().ln(), 0.0);
        semi += p * mu;
    }
    let mut log_rest = hyper.map(|z| z.re);
    if !semisimple {
        let xinv = semi.map(|z| z.re).try_inverse().ok_or(Error::SingularInput { sigma: 0.0 })?;
        let nil = xinv * a - RealMatrix::identity(dim, dim);
        let mut pw = RealMatrix::identity(dim, dim);
        for k in 1..=dim {
            pw = &pw * &nil;
            let c = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            log_rest += &pw * c;
        }
    }
    Ok(JordanSplit {
        elliptic: elliptic.map(|z| z.re),
        log_rest,
        phases: centers.iter().map(|(mu, _)| mu.arg()).collect(),
        moduli: centers.iter().map(|(mu, _)| mu.norm()).collect(),
        projectors,
        semisimple,
    })
}

/// Spectral projectors from eigenvectors, when A is diagonalizable. Vectors
/// for |μ| < 1 come from A⁻¹ = −J·Aᵀ·J, where they belong to the large
/// eigenvalue 1/μ and are computed accurately.
fn eigen_projectors(a: &RealMatrix, centers: &[(Complex64, usize)]) -> Result<Option<Vec<ComplexMatrix>>> {
    let dim = a.nrows();
    let j = j_matrix(dim / 2);
    let ainv = -(&j * a.transpose() * &j);
    let (ac, bc) = (numkernel::to_complex(a), numkernel::to_complex(&ainv));
    let id = ComplexMatrix::identity(dim, dim);
    let mut cols: Vec<numkernel::ComplexVector> = Vec::with_capacity(dim);
    for &(mu, k) in centers {
        let (m, nu) = if mu.norm() >= 1.0 { (&ac, mu) } else { (&bc, Complex64::new(1.0, 0.0) / mu) };
        let shifted = m - &id * nu;
        let svd = nalgebra::SVD::try_new(shifted, false, true, 1e-15, 10_000).ok_or(Error::ConvergenceFailure)?;
        let vt = svd.v_t.ok_or(Error::ConvergenceFailure)?;
        let scale = svd.singular_values.max().max(1.0);
        let mut idx: Vec<usize> = (0..dim).collect();
        idx.sort_by(|&x, &y| svd.singular_values[x].partial_cmp(&svd.singular_values[y]).unwrap());
        if svd.singular_values[idx[k - 1]] > 1e-7 * scale {
            return Ok(None);
        }
        for &i in &idx[..k] {
            cols.push(vt.row(i).adjoint());
        }
    }
    let v = ComplexMatrix::from_columns(&cols);
    let Some(vinv) = v.clone().try_inverse() else { return Ok(None) };
    let mut out = Vec::with_capacity(centers.len());
    let mut start = 0;
    let mut recon = ComplexMatrix::zeros(dim, dim);
    for &(mu, k) in centers {
        let p = v.columns(start, k) * vinv.rows(start, k);
        recon += &p * mu;
        out.push(p);
        start += k;
    }
    let scale = numkernel::max_abs(a).max(1.0);
    if (recon - ac).norm() > 1e-8 * scale * dim as f64 {
        return Ok(None);
    }
    Ok(Some(out))
}

/// Projectors of the semisimple part, found by the Newton iteration
/// X ← X − q(X)·q'(X)⁻¹ on the square-free polynomial of the spectrum.
fn newton_projectors(a: &RealMatrix, centers: &[(Complex64, usize)]) -> Result<Vec<ComplexMatrix>> {
    let dim = a.nrows();
    let id = ComplexMatrix::identity(dim, dim);
    let q = |x: &ComplexMatrix| centers.iter().fold(id.clone(), |acc, &(mu, _)| acc * (x - &id * mu));
    let dq = |x: &ComplexMatrix| {
        let mut s = ComplexMatrix::zeros(dim, dim);
        for i in 0..centers.len() {
            let mut t = id.clone();
            for (j, &(mu, _)) in centers.iter().enumerate() {
                if i != j {
                    t *= x - &id * mu;
                }
            }
            s += t;
        }
        s
    };
    let scale = numkernel::max_abs(a).max(1.0);
    let mut x = numkernel::to_complex(a);
    for _ in 0..60 {
        let qx = q(&x);
        if qx.norm() < 1e-13 * scale.powi(centers.len() as i32) {
            break;
        }
        let inv = dq(&x).try_inverse().ok_or(Error::ConvergenceFailure)?;
        let step = qx * inv;
        x -= &step;
        if step.norm() < 1e-15 * scale {
            break;
        }
    }
    let xs = x.map(|z| Complex64::new(z.re, 0.0));
    Ok(centers
        .iter()
        .enumerate()
        .map(|(i, &(mu, _))| {
            let mut p = id.clone();
            for (j, &(nu, _)) in centers.iter().enumerate() {
                if i != j {
                    p = p * (&xs - &id * nu) / (mu - nu);
                }
            }
            p
        })
        .collect())
}

/// The spectrum of a symplectic matrix is closed under λ ↦ 1/λ̄. Eigenvalues
/// inside the unit disk lose relative accuracy when the matrix is large, so
/// they are replaced by the reciprocals of their partners outside.
fn paired_spectrum(vals: Vec<Complex64>) -> Vec<Complex64> {
    let off = |z: &Complex64| (z.norm() - 1.0).abs() > 1e-6;
    let outside: Vec<Complex64> = vals.iter().filter(|z| off(z) && z.norm() > 1.0).copied().collect();
    let inside = vals.iter().filter(|z| off(z) && z.norm() < 1.0).count();
    if inside != outside.len() {
        return vals;
    }
    let mut out: Vec<Complex64> = vals.into_iter().filter(|z| !off(z)).collect();
    for z in outside {
        out.push(z);
        out.push(Complex64::new(1.0, 0.0) / z.conj());
    }
    out
}

/// Cluster centers with multiplicities, made exactly closed under conjugation.
fn symmetric_centers(vals: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let close = |a: Complex64, b: Complex64| (a - b).norm() < tol * a.norm().max(b.norm());
    let mut used = vec![false; vals.len()];
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for i in 0..vals.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![i];
        used[i] = true;
        let mut grew = true;
        while grew {
            grew = false;
            for j in 0..vals.len() {
                if !used[j] && members.iter().any(|&m| close(vals[m], vals[j])) {
                    used[j] = true;
                    members.push(j);
                    grew = true;
                }
            }
        }
        let c = members.iter().map(|&m| vals[m]).sum::<Complex64>() / members.len() as f64;
        clusters.push((c, members.len()));
    }
    let mut out = Vec::new();
    let mut taken = vec![false; clusters.len()];
    for i in 0..clusters.len() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let (c, k) = clusters[i];
        if c.im.abs() < tol * c.norm() {
            out.push((Complex64::new(c.re, 0.0), k));
            continue;
        }
        let partner = (0..clusters.len())
            .filter(|&j| !taken[j])
            .min_by(|&a, &b| (clusters[a].0 - c.conj()).norm().partial_cmp(&(clusters[b].0 - c.conj()).norm()).unwrap());
        let m = match partner {
            Some(j) => {
                taken[j] = true;
                0.5 * (c + clusters[j].0.conj())
            }
            None => c,
        };
        out.push((m, k));
        out.push((m.conj(), k));
    }
    out
}

/// ẽ = x̃·p̃⁻¹ where p̃ is the lift of exp(L) along t ↦ exp(tL). Rot̃ vanishes
/// on such one-parameter groups and p̃ commutes with x̃, so Rot̃(ẽ) = Rot̃(x̃)
/// while ẽ has bounded powers.
pub fn elliptic_factor(x: &CoverElement) -> Result<CoverElement> {
    let split = jordan_split(x.g.matrix())?;
    elliptic_factor_with(x, &split)
}

fn elliptic_factor_with(x: &CoverElement, split: &JordanSplit) -> Result<CoverElement> {
    let w = x.kappa.weight() as f64;
    if split.semisimple {
        // x and p commute, so t ↦ x·p^{-t} runs from x to e inside their span
        let wind = winding_of_phase(|t| phase(&split.scaled_power(t)))?;
        let start = wrap_angle(phase(&split.scaled_power(0.0)) - x.g.det_phase());
        let e = split.elliptic_power(1);
        return Ok(CoverElement { g: SymplecticMatrix::from_matrix_unchecked(e), theta: x.theta + w * (start + wind), kappa: x.kappa });
    }
    let wind = winding_of_phase(|t| phase(&split.rest_power(-t)))?;
    let pinv_m = split.rest_power(-1.0);
    let pinv = CoverElement { g: SymplecticMatrix::from_matrix_unchecked(pinv_m), theta: w * wind, kappa: x.kappa };
    let e = cover_mul(x, &pinv)?;
    Ok(replace_nearby(e, split.elliptic_power(1)))
}

/// Swap g for a nearby matrix, carrying θ along the short segment between them.
fn replace_nearby(x: CoverElement, g: RealMatrix) -> CoverElement {
    let w = x.kappa.weight() as f64;
    let d = wrap_angle(phase(&g) - x.g.det_phase());
    CoverElement { g: SymplecticMatrix::from_matrix_unchecked(g), theta: x.theta + w * d, kappa: x.kappa }
}

/// Homogenization of an elliptic factor, re-projecting every square onto
/// the exact power e^{2^k}.
fn homogenize_elliptic(e: &CoverElement, split: &JordanSplit, depth: u32) -> Result<(f64, f64)> {
    let mut y = e.clone();
    let mut defect: f64 = 0.0;
    for k in 0..depth {
        let y2 = cover_mul(&y, &y)?;
        let y2 = replace_nearby(y2, split.elliptic_power(1u64 << (k + 1)));
        defect = defect.max((y2.theta - 2.0 * y.theta).abs() / TAU);
        y = y2;
    }
    Ok((y.theta / (TAU * (1u64 << depth) as f64), defect))
}

/// Rot̃_κ(x) in turns, snapped to the exact mod-1 rotation number.
pub fn rot_lift(x: &CoverElement, depth: u32) -> Result<LiftedRot> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    let r = rot(&x.g, x.kappa)?;
    let split = jordan_split(x.g.matrix())?;
    let e = elliptic_factor_with(x, &split)?;
    let (est, defect) = homogenize_elliptic(&e, &split, depth)?;
    let ratio = defect / (1u64 << depth) as f64;
    if !(ratio < 0.4) || !est.is_finite() || circle_dist(est, r.mod1) > 0.05 {
        return Err(Error::SnapFailure { ratio, depth });
    }
    let value = r.mod1 + (est - r.mod1).round();
    Ok(LiftedRot { value, estimate: est, defect })
}

/// rot_lift with one retry at a larger depth on SnapFailure.
pub fn rot_lift_retry(x: &CoverElement, depth: u32) -> Result<LiftedRot> {
    match rot_lift(x, depth) {
        Err(Error::SnapFailure { .. }) if depth < RETRY_DEPTH => rot_lift(x, RETRY_DEPTH),
        other => other,
    }
}

/// Rot_κ(ρ(w)) − Rot_κ(ρ₀(w)) in [0, 1) for each word, and the largest
/// homomorphism defect over the given index pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotDifferenceTable {
    pub words: Vec<String>,
    pub entries: Vec<f64>,
    pub defect: f64,
}

impl RotDifferenceTable {
    /// Smallest e ≤ 8 such that every entry lies within tol of (1/e)Z.
    pub fn grid(&self, tol: f64) -> Option<u32> {
        (1..=8u32).find(|&e| self.entries.iter().all(|&x| circle_dist(x * e as f64, 0.0) < tol * e as f64))
    }
}

pub fn rot_difference_table(
    rho: &Representation,
    rho0: &Representation,
    words: &[Word],
    pairs: &[(usize, usize)],
    kappa: KappaClass,
) -> Result<RotDifferenceTable> {
    if rho.surface != rho0.surface {
        return Err(Error::MismatchedSurfaces);
    }
    let entry = |w: &Word| -> Result<f64> {
        Ok(frac(rot(&rho.evaluate(w), kappa)?.mod1 - rot(&rho0.evaluate(w), kappa)?.mod1))
    };
    let entries = words.iter().map(entry).collect::<Result<Vec<_>>>()?;
    let mut defect: f64 = 0.0;
    for &(i, j) in pairs {
        let e = entry(&words[i].concat(&words[j]))?;
        defect = defect.max(circle_dist(e, entries[i] + entries[j]));
    }
    Ok(RotDifferenceTable { words: words.iter().map(|w| rho.surface.format_word(w)).collect(), entries, defect })
}
