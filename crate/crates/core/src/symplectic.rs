//! The symplectic group Sp(2n,R) with J = [[0, I], [-I, 0]].

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{self, ComplexMatrix, RealMatrix, SINGULAR_TOL};

pub const CLUSTER_TOL: f64 = 1e-7;
pub const CIRCLE_TOL: f64 = 1e-8;

/// The standard form J.
pub fn j_matrix(n: usize) -> RealMatrix {
    let mut j = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// A 2n×2n matrix g with gᵀJg = J.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    n: usize,
    m: RealMatrix,
}

impl SymplecticMatrix {
    pub fn identity(n: usize) -> Self {
        Self { n, m: RealMatrix::identity(2 * n, 2 * n) }
    }

    /// Wrap without checking. Callers guarantee the symplectic condition.
    pub fn from_matrix_unchecked(m: RealMatrix) -> Self {
        assert!(m.is_square() && m.nrows() % 2 == 0, "symplectic matrices are 2n×2n");
        Self { n: m.nrows() / 2, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.m
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "rank mismatch");
        Self { n: self.n, m: &self.m * &other.m }
    }

    /// g⁻¹ = J⁻¹gᵀJ, exact up to rounding.
    pub fn inverse(&self) -> Self {
        let n = self.n;
        let g = &self.m;
        let mut out = RealMatrix::zeros(2 * n, 2 * n);
        // with g = [[a, b], [c, d]] the inverse is [[dᵀ, −bᵀ], [−cᵀ, aᵀ]]
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = g[(n + j, n + i)];
                out[(i, n + j)] = -g[(j, n + i)];
                out[(n + i, j)] = -g[(n + j, i)];
                out[(n + i, n + j)] = g[(j, i)];
            }
        }
        Self { n, m: out }
    }

    pub fn conjugate_by(&self, h: &Self) -> Self {
        h.mul(self).mul(&h.inverse())
    }

    /// ‖gᵀJg − J‖_max.
    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.m)
    }

    /// The complex-linear part (a + d)/2 + i(c − b)/2. Its determinant has
    /// the same argument as det_ℂ of the unitary polar factor.
    pub fn complex_part(&self) -> ComplexMatrix {
        let n = self.n;
        let g = &self.m;
        ComplexMatrix::from_fn(n, n, |i, j| {
            Complex64::new(
                0.5 * (g[(i, j)] + g[(n + i, n + j)]),
                0.5 * (g[(n + i, j)] - g[(i, n + j)]),
            )
        })
    }

    /// arg det_ℂ(U(g)) in (−π, π], without a polar decomposition.
    pub fn det_phase(&self) -> f64 {
        self.complex_part().determinant().arg()
    }
}

pub fn symplectic_residual(m: &RealMatrix) -> f64 {
    let n = m.nrows() / 2;
    let j = j_matrix(n);
    numkernel::max_abs(&(m.transpose() * &j * m - j))
}

/// Validate a 2n×2n matrix against the symplectic condition.
pub fn check_symplectic(m: &RealMatrix, tol: f64) -> Result<SymplecticMatrix> {
    if !m.is_square() || m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!("expected a 2n×2n matrix, got {}×{}", m.nrows(), m.ncols())));
    }
    if !numkernel::is_finite(m) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let residual = symplectic_residual(m);
    if !(residual < tol) {
        return Err(Error::NotSymplectic { residual });
    }
    Ok(SymplecticMatrix::from_matrix_unchecked(m.clone()))
}

/// The class κ attached to the character det_ℂ(k)^w of U(n).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KappaClass {
    w: i32,
}

impl KappaClass {
    pub const STANDARD: KappaClass = KappaClass { w: 2 };

    pub fn new(w: i32) -> Result<Self> {
        if w == 0 {
            return Err(Error::InvalidInput("kappa weight must be nonzero".into()));
        }
        Ok(Self { w })
    }

    pub fn weight(&self) -> i32 {
        self.w
    }
}

impl Default for KappaClass {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// U(g) as the n×n unitary A + iB.
#[derive(Debug, Clone)]
pub struct UnitaryPart {
    pub n: usize,
    pub complexform: ComplexMatrix,
}

impl UnitaryPart {
    /// The orthogonal-symplectic block form [[A, −B], [B, A]].
    pub fn block_form(&self) -> RealMatrix {
        unitary_to_real(&self.complexform)
    }

    pub fn det(&self) -> Complex64 {
        self.complexform.determinant()
    }
}

pub fn unitary_to_real(k: &ComplexMatrix) -> RealMatrix {
    let n = k.nrows();
    let mut m = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = k[(i, j)];
            m[(i, j)] = z.re;
            m[(n + i, n + j)] = z.re;
            m[(n + i, j)] = z.im;
            m[(i, n + j)] = -z.im;
        }
    }
    m
}

/// Complex form of the orthogonal factor in the polar decomposition.
pub fn unitary_part(g: &SymplecticMatrix) -> Result<UnitaryPart> {
    let (_, u) = numkernel::polar_decompose(g.matrix(), SINGULAR_TOL)?;
    let n = g.n();
    let k = ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(0.5 * (u[(i, j)] + u[(n + i, n + j)]), 0.5 * (u[(n + i, j)] - u[(i, n + j)]))
    });
    Ok(UnitaryPart { n, complexform: k })
}

/// Principal argument of det_ℂ(U(g))^w.
pub fn det_arg(g: &SymplecticMatrix, kappa: KappaClass) -> Result<f64> {
    let u = unitary_part(g)?;
    Ok(wrap_angle(kappa.weight() as f64 * u.det().arg()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KreinPair {
    pub angle: f64,
    pub krein_sign: i8,
    pub multiplicity: usize,
}

/// Unit-circle eigenvalues with Krein signs plus the off-circle spectrum.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct KreinSpectrum {
    pub pairs: Vec<KreinPair>,
    pub offcircle: Vec<Complex64>,
}

impl KreinSpectrum {
    /// Σ θ over the Krein-positive angles, plus π for every real negative
    /// eigenvalue outside the unit disk. This is arg det_ℂ of the elliptic
    /// part, lifted to a canonical real number.
    pub fn elliptic_angle(&self) -> f64 {
        let circle: f64 = self
            .pairs
            .iter()
            .filter(|p| p.krein_sign > 0)
            .map(|p| p.angle * p.multiplicity as f64)
            .sum();
        let flips = self
            .offcircle
            .iter()
            .filter(|z| z.norm() > 1.0 && z.re < 0.0 && z.im.abs() <= 1e-8 * z.norm())
            .count();
        circle + PI * flips as f64
    }

    pub fn total_multiplicity(&self) -> usize {
        self.pairs.iter().map(|p| p.multiplicity).sum::<usize>() + self.offcircle.len()
    }
}

fn cluster(vals: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let k = vals.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for i in 0..k {
        for j in i + 1..k {
            if (vals[i] - vals[j]).norm() < tol * vals[i].norm().max(1.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; k];
    for i in 0..k {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(gi) => groups[gi].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Krein data of g. Unit-circle eigenvalues must be semisimple.
pub fn krein_spectrum(g: &SymplecticMatrix, cluster_tol: f64) -> Result<KreinSpectrum> {
    let vals = numkernel::eigenvalues(g.matrix())?;
    let groups = cluster(&vals, cluster_tol);
    let centers: Vec<Complex64> =
        groups.iter().map(|gr| gr.iter().map(|&i| vals[i]).sum::<Complex64>() / gr.len() as f64).collect();
    for a in 0..centers.len() {
        for b in a + 1..centers.len() {
            if (centers[a] - centers[b]).norm() < 10.0 * cluster_tol * centers[a].norm().max(1.0) {
                return Err(Error::AmbiguousCluster { tol: cluster_tol });
            }
        }
    }
    let n2 = 2 * g.n();
    let gc = numkernel::to_complex(g.matrix());
    let jc = numkernel::to_complex(&j_matrix(g.n()));
    // eigenvalue errors grow with the norm of g
    let circle_tol = CIRCLE_TOL.max(4.0 * f64::EPSILON * g.matrix().norm());
    let mut out = KreinSpectrum::default();
    for (gr, &mu) in groups.iter().zip(&centers) {
        if (mu.norm() - 1.0).abs() >= circle_tol {
            out.offcircle.extend(gr.iter().map(|&i| vals[i]));
            continue;
        }
        let real = mu.im.abs() < circle_tol;
        if !real && mu.im < 0.0 {
            continue;
        }
        let mu = if real { Complex64::new(mu.re.signum(), 0.0) } else { mu / mu.norm() };
        let shifted = &gc - ComplexMatrix::identity(n2, n2) * mu;
        let basis = numkernel::null_space_complex(&shifted, gr.len())?;
        if basis.len() < gr.len() {
            return Err(Error::DefectiveOnCircle { angle: mu.arg() });
        }
        let v = ComplexMatrix::from_columns(&basis);
        let h = (v.adjoint() * &jc * &v) * Complex64::new(0.0, 1.0);
        let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(h);
        let mut p = 0;
        let mut q = 0;
        for &l in eig.eigenvalues.iter() {
            if l.abs() < 1e-9 {
                return Err(Error::DefectiveOnCircle { angle: mu.arg() });
            }
            if l > 0.0 {
                p += 1;
            } else {
                q += 1;
            }
        }
        let theta = if real { if mu.re > 0.0 { 0.0 } else { PI } } else { mu.arg() };
        if p > 0 {
            out.pairs.push(KreinPair { angle: theta, krein_sign: 1, multiplicity: p });
        }
        if q > 0 {
            out.pairs.push(KreinPair { angle: theta, krein_sign: -1, multiplicity: q });
        }
        if !real {
            if p > 0 {
                out.pairs.push(KreinPair { angle: -theta, krein_sign: -1, multiplicity: p });
            }
            if q > 0 {
                out.pairs.push(KreinPair { angle: -theta, krein_sign: 1, multiplicity: q });
            }
        }
    }
    out.pairs.sort_by(|a, b| a.angle.partial_cmp(&b.angle).unwrap().then(b.krein_sign.cmp(&a.krein_sign)));
    if out.total_multiplicity() != n2 {
        return Err(Error::AmbiguousCluster { tol: cluster_tol });
    }
    Ok(out)
}

/// exp(J·S) for a symmetric S with entries uniform in [−spread, spread].
pub fn random_symplectic(n: usize, spread: f64, seed: u64) -> SymplecticMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_symplectic_with(n, spread, &mut rng)
}

pub fn random_symplectic_with<R: Rng>(n: usize, spread: f64, rng: &mut R) -> SymplecticMatrix {
    assert!(spread > 0.0, "spread must be positive");
    let k = 2 * n;
    let mut s = RealMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = rng.random_range(-spread..=spread);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    symplectify(hamiltonian_exp(&s))
}

/// exp(J·S).
pub fn hamiltonian_exp(s: &RealMatrix) -> RealMatrix {
    let n = s.nrows() / 2;
    (j_matrix(n) * s).exp()
}

/// Remove rounding drift from an almost symplectic matrix with a few
/// first-order corrections M ← M(I + ½JE), E = MᵀJM − J.
pub fn symplectify(mut m: RealMatrix) -> SymplecticMatrix {
    let n = m.nrows() / 2;
    let j = j_matrix(n);
    for _ in 0..4 {
        let e = m.transpose() * &j * &m - &j;
        if numkernel::max_abs(&e) < 1e-15 {
            break;
        }
        let corr = RealMatrix::identity(2 * n, 2 * n) + (&j * e) * 0.5;
        m = m * corr;
    }
    SymplecticMatrix::from_matrix_unchecked(m)
}

/// Block-diagonal rotation: the unitary diag(e^{iα_1}, …, e^{iα_n}).
pub fn rotation(angles: &[f64]) -> SymplecticMatrix {
    let n = angles.len();
    let k = ComplexMatrix::from_fn(n, n, |i, j| if i == j { Complex64::from_polar(1.0, angles[i]) } else { Complex64::new(0.0, 0.0) });
    SymplecticMatrix::from_matrix_unchecked(unitary_to_real(&k))
}

/// diag(λ_1, …, λ_n, 1/λ_1, …, 1/λ_n).
pub fn diagonal(lambdas: &[f64]) -> SymplecticMatrix {
    let n = lambdas.len();
    let mut m = RealMatrix::zeros(2 * n, 2 * n);
    for (i, &l) in lambdas.iter().enumerate() {
        m[(i, i)] = l;
        m[(n + i, n + i)] = 1.0 / l;
    }
    SymplecticMatrix::from_matrix_unchecked(m)
}

/// Random unitary n×n matrix (QR of a complex Gaussian-like matrix).
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> ComplexMatrix {
    let z = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    z.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::max_abs;
    use std::f64::consts::FRAC_PI_3;

    fn r2(a: f64) -> SymplecticMatrix {
        rotation(&[a])
    }

    #[test]
    fn check_examples() {
        for n in 1..4 {
            assert!(check_symplectic(&RealMatrix::identity(2 * n, 2 * n), 1e-12).is_ok());
        }
        let d = RealMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        assert!(check_symplectic(&d, 1e-12).is_ok());
        let bad = RealMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0]);
        match check_symplectic(&bad, 1e-12) {
            Err(Error::NotSymplectic { residual }) => assert!((residual - 3.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rotation_is_counterclockwise() {
        let g = r2(0.3);
        assert!((g.matrix()[(1, 0)] - 0.3_f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn unitary_part_examples() {
        let u = unitary_part(&diagonal(&[2.0])).unwrap();
        assert!((u.complexform[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let a = 0.9;
        let u = unitary_part(&r2(a)).unwrap();
        assert!((u.complexform[(0, 0)] - Complex64::from_polar(1.0, a)).norm() < 1e-14);
        let g = r2(a).mul(&diagonal(&[2.0]));
        let u = unitary_part(&g).unwrap();
        assert!((u.complexform[(0, 0)] - Complex64::from_polar(1.0, a)).norm() < 1e-12);
    }

    #[test]
    fn unitary_part_fixes_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let n = rng.random_range(1..=3);
            let k = random_unitary(n, &mut rng);
            let g = SymplecticMatrix::from_matrix_unchecked(unitary_to_real(&k));
            let u = unitary_part(&g).unwrap();
            assert!((u.complexform - &k).norm() < 1e-10);
            let blk = unitary_to_real(&k);
            let j = j_matrix(n);
            assert!(max_abs(&(&blk * &j - &j * &blk)) < 1e-12);
        }
    }

    #[test]
    fn det_arg_examples() {
        let w2 = KappaClass::default();
        assert_eq!(det_arg(&SymplecticMatrix::identity(2), w2).unwrap(), 0.0);
        // det_ℂ(R(α)) = e^{iα}
        let brute = |a: f64| wrap_angle(2.0 * unitary_part(&r2(a)).unwrap().complexform[(0, 0)].arg());
        assert!((det_arg(&r2(FRAC_PI_3), w2).unwrap() - 2.0 * FRAC_PI_3).abs() < 1e-12);
        assert!((brute(FRAC_PI_3) - 2.0 * FRAC_PI_3).abs() < 1e-12);
        assert!((det_arg(&r2(3.0 * PI / 4.0), w2).unwrap() + PI / 2.0).abs() < 1e-12);
        assert!((brute(3.0 * PI / 4.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn det_phase_matches_polar() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..300 {
            let n = rng.random_range(1..=3);
            let g = random_symplectic_with(n, 1.0, &mut rng);
            let a = unitary_part(&g).unwrap().det().arg();
            assert!(wrap_angle(g.det_phase() - a).abs() < 1e-9);
        }
    }

    #[test]
    fn det_arg_small_hamiltonians() {
        // exp(J·S) with S = diag(α, α) is the rotation by −α in these coordinates
        let w2 = KappaClass::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = 2;
            let mut s = RealMatrix::zeros(4, 4);
            for i in 0..4 {
                for j in i..4 {
                    let v = rng.random_range(-1e-3..1e-3);
                    s[(i, j)] = v;
                    s[(j, i)] = v;
                }
            }
            let g = check_symplectic(&hamiltonian_exp(&s), 1e-12).unwrap();
            // rotation angles of the unitary generator: trace of the complex part of −S
            let small: f64 = (0..n).map(|i| -0.5 * (s[(i, i)] + s[(n + i, n + i)])).sum();
            assert!((det_arg(&g, w2).unwrap() - 2.0 * small).abs() < 1e-5);
        }
    }

    #[test]
    fn det_arg_ignores_commuting_positive_factor() {
        let w2 = KappaClass::default();
        let g = rotation(&[0.4, -1.1]);
        let p = diagonal(&[1.7, 1.7]);
        let a = det_arg(&g, w2).unwrap();
        assert!((det_arg(&g.mul(&p), w2).unwrap() - a).abs() < 1e-12);
    }

    #[test]
    fn krein_examples() {
        let a = 1.1;
        let k = krein_spectrum(&r2(a), CLUSTER_TOL).unwrap();
        assert_eq!(k.pairs.len(), 2);
        assert!(k.offcircle.is_empty());
        let plus = k.pairs.iter().find(|p| p.krein_sign == 1).unwrap();
        let minus = k.pairs.iter().find(|p| p.krein_sign == -1).unwrap();
        assert!((plus.angle - a).abs() < 1e-12 && (minus.angle + a).abs() < 1e-12);

        // direct evaluation of i·v̄ᵀJv on v = (1, −i)/√2
        let v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)];
        let jv = [v[1], -v[0]];
        let form = Complex64::new(0.0, 1.0) * (v[0].conj() * jv[0] + v[1].conj() * jv[1]);
        assert!(form.re > 0.0);

        let k = krein_spectrum(&diagonal(&[2.0]), CLUSTER_TOL).unwrap();
        assert!(k.pairs.is_empty());
        assert_eq!(k.offcircle.len(), 2);

        let u = SymplecticMatrix::from_matrix_unchecked(RealMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]));
        assert!(matches!(krein_spectrum(&u, CLUSTER_TOL), Err(Error::DefectiveOnCircle { .. })));
    }

    #[test]
    fn krein_of_identity_is_neutral() {
        let k = krein_spectrum(&SymplecticMatrix::identity(2), CLUSTER_TOL).unwrap();
        assert_eq!(k.pairs.len(), 2);
        assert!(k.pairs.iter().all(|p| p.multiplicity == 2 && p.angle == 0.0));
    }

    #[test]
    fn krein_conjugation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        for _ in 0..200 {
            let n = rng.random_range(1..=3);
            let angles: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let g = rotation(&angles);
            let h = random_symplectic_with(n, 0.5, &mut rng);
            let (Ok(a), Ok(b)) = (krein_spectrum(&g, CLUSTER_TOL), krein_spectrum(&g.conjugate_by(&h), CLUSTER_TOL)) else {
                continue;
            };
            assert_eq!(a.pairs.len(), b.pairs.len());
            for (x, y) in a.pairs.iter().zip(&b.pairs) {
                assert!((x.angle - y.angle).abs() < 1e-6);
                assert_eq!(x.krein_sign, y.krein_sign);
                assert_eq!(x.multiplicity, y.multiplicity);
            }
            checked += 1;
        }
        assert!(checked > 190);
    }

    #[test]
    fn random_symplectic_contract() {
        let a = random_symplectic(2, 0.7, 42);
        let b = random_symplectic(2, 0.7, 42);
        assert_eq!(a.matrix().as_slice(), b.matrix().as_slice());
        assert!(check_symplectic(a.matrix(), 1e-9).is_ok());
        let tiny = random_symplectic(2, 1e-12, 1);
        assert!(max_abs(&(tiny.matrix() - RealMatrix::identity(4, 4))) < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(1..=3);
            let g = random_symplectic_with(n, 1.5, &mut rng);
            assert!(g.residual() < 1e-9);
            let j = j_matrix(n);
            let inv = -&j * g.matrix().transpose() * &j;
            let prod = g.matrix() * inv;
            assert!(max_abs(&(prod - RealMatrix::identity(2 * n, 2 * n))) < 1e-8);
            assert!(max_abs(&(g.inverse().matrix() * g.matrix() - RealMatrix::identity(2 * n, 2 * n))) < 1e-8);
        }
    }
}
