//! Explicit representations: Fuchsian hyperbolizations of small surfaces,
//! tube-type embeddings SL(2,R)ⁿ → Sp(2n,R), and length/twist deformations
//! glued along a separating curve.

use nalgebra::{Matrix2, Vector2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{self, RealMatrix};
use crate::surface::{Representation, SurfaceData, Word};
use crate::symplectic::SymplecticMatrix;

const TRACE_TOL: f64 = 1e-9;

/// Which hyperbolization to build. Lengths are boundary geodesic lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FuchsianSpec {
    Pants { lengths: [f64; 3] },
    OneHoledTorus { length: f64, twist: f64 },
    /// Two one-holed tori glued along a separating curve of the given length.
    Genus2Closed { length: f64, twist: f64 },
    /// Two pants glued along a curve of length `cut`.
    FourHoledSphere { lengths: [f64; 4], cut: f64, twist: f64 },
    /// A one-holed torus and a pants glued along a curve of length `cut`.
    TwoHoledTorus { lengths: [f64; 2], cut: f64, twist: f64 },
}

impl FuchsianSpec {
    pub fn surface(&self) -> SurfaceData {
        let (g, b) = match self {
            Self::Pants { .. } => (0, 3),
            Self::OneHoledTorus { .. } => (1, 1),
            Self::Genus2Closed { .. } => (2, 0),
            Self::FourHoledSphere { .. } => (0, 4),
            Self::TwoHoledTorus { .. } => (1, 2),
        };
        SurfaceData::standard(g, b).expect("standard presentation")
    }

    fn lengths(&self) -> Vec<f64> {
        match self {
            Self::Pants { lengths } => lengths.to_vec(),
            Self::OneHoledTorus { length, .. } | Self::Genus2Closed { length, .. } => vec![*length],
            Self::FourHoledSphere { lengths, cut, .. } => lengths.iter().copied().chain([*cut]).collect(),
            Self::TwoHoledTorus { lengths, cut, .. } => lengths.iter().copied().chain([*cut]).collect(),
        }
    }
}

type M2 = Matrix2<f64>;

fn to_sp(m: &M2) -> SymplecticMatrix {
    SymplecticMatrix::from_matrix_unchecked(RealMatrix::from_row_slice(2, 2, m.as_slice()).transpose())
}

fn from_sp(g: &SymplecticMatrix) -> M2 {
    let m = g.matrix();
    M2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

fn inv2(m: &M2) -> M2 {
    M2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// Eigenvectors of a hyperbolic element as columns, larger |λ| first.
fn eigvecs(m: &M2) -> Result<(M2, f64)> {
    let t = m.trace();
    let disc = t * t - 4.0;
    if !(disc > 0.0) {
        return Err(Error::Unrealizable(format!("trace {t} is not hyperbolic")));
    }
    let s = disc.sqrt() * t.signum();
    let big = (t + s) / 2.0;
    let small = 1.0 / big;
    let vec_for = |l: f64| {
        let u = Vector2::new(m[(0, 1)], l - m[(0, 0)]);
        let v = Vector2::new(l - m[(1, 1)], m[(1, 0)]);
        let w = if u.norm() >= v.norm() { u } else { v };
        w / w.norm()
    };
    Ok((M2::from_columns(&[vec_for(big), vec_for(small)]), big))
}

/// h ∈ SL(2,R) with h·from·h⁻¹ = to, for hyperbolic elements with equal
/// traces. Composed on the right with the flow diag(e^s, e^-s) along the
/// axis of `from`, which is the twist parameter of a gluing.
fn conjugator(from: &M2, to: &M2, twist: f64) -> Result<M2> {
    if (from.trace() - to.trace()).abs() > TRACE_TOL * from.trace().abs().max(1.0) {
        return Err(Error::GluingMismatch { residual: (from.trace() - to.trace()).abs() });
    }
    let (pf, _) = eigvecs(from)?;
    let (mut pt, _) = eigvecs(to)?;
    if pt.determinant() / pf.determinant() < 0.0 {
        pt.set_column(1, &(-pt.column(1)));
    }
    let flow = M2::new((twist / 2.0).exp(), 0.0, 0.0, (-twist / 2.0).exp());
    let h = pt * flow * pf.try_inverse().ok_or_else(|| Error::Unrealizable("degenerate eigenbasis".into()))?;
    Ok(h / h.determinant().sqrt())
}

/// Real power of a hyperbolic element with positive trace.
fn hyperbolic_power(m: &M2, s: f64) -> Result<M2> {
    let sign = m.trace().signum();
    let (p, l) = eigvecs(&(m * sign))?;
    let d = M2::new(l.powf(s), 0.0, 0.0, l.powf(-s));
    let pi = p.try_inverse().ok_or_else(|| Error::Unrealizable("degenerate eigenbasis".into()))?;
    Ok(p * d * pi)
}

fn check_lengths(spec: &FuchsianSpec) -> Result<()> {
    for l in spec.lengths() {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::InvalidInput(format!("boundary length {l} must be positive")));
        }
    }
    Ok(())
}

/// A = diag(λ, 1/λ), B with tr B = 2cosh(ℓ₂/2), tr AB = −2cosh(ℓ₃/2).
/// Boundary images c₁ = A, c₂ = B, c₃ = (AB)⁻¹.
fn pants_pair(l: [f64; 3]) -> Result<(M2, M2)> {
    let lambda = (l[0] / 2.0).exp();
    let t2 = 2.0 * (l[1] / 2.0).cosh();
    let t3 = -2.0 * (l[2] / 2.0).cosh();
    let a = (t3 - t2 / lambda) / (lambda - 1.0 / lambda);
    let d = t2 - a;
    let off = a * d - 1.0;
    if off.abs() < 1e-12 {
        return Err(Error::Unrealizable("trace equations force a reducible pair".into()));
    }
    let am = M2::new(lambda, 0.0, 0.0, 1.0 / lambda);
    let bm = M2::new(a, -1.0, -off, d);
    Ok((am, bm))
}

/// a, b with tr a = tr b = tr ab = t and tr[a,b] = −2cosh(ℓ/2), then b ↦ b·aˢ
/// with s the twist; the commutator is unchanged by the twist.
fn torus_pair(length: f64, twist: f64) -> Result<(M2, M2)> {
    let k = 2.0 * (length / 2.0).cosh() - 2.0;
    // t²(t − 3) = k has a unique root t ≥ 3
    let (mut lo, mut hi) = (3.0, 3.0 + k / 9.0 + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid * (mid - 3.0) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let mu = (t + (t * t - 4.0).sqrt()) / 2.0;
    let p = t / (mu + 1.0);
    let s = t - p;
    let am = M2::new(mu, 0.0, 0.0, 1.0 / mu);
    let bm = M2::new(p, 1.0, p * s - 1.0, s);
    let bm = if twist != 0.0 { bm * hyperbolic_power(&am, twist)? } else { bm };
    // mirrored so that the boundary orientation agrees with the pants
    Ok((flip(&am), flip(&bm)))
}

fn comm(a: &M2, b: &M2) -> M2 {
    a * b * inv2(a) * inv2(b)
}

/// Conjugation by diag(1, −1): reverses orientation.
fn flip(m: &M2) -> M2 {
    M2::new(m[(0, 0)], -m[(0, 1)], -m[(1, 0)], m[(1, 1)])
}

/// Boundary images (C, c, c') of a pants whose first boundary equals the
/// prescribed hyperbolic element x with negative trace: C·c·c' = I.
fn pants_on(x: &M2, l: [f64; 2], twist: f64) -> Result<(M2, M2)> {
    let lx = 2.0 * (-x.trace() / 2.0).acosh();
    let (am, bm) = pants_pair([lx, l[0], l[1]])?;
    let c_from = -am;
    let h = conjugator(&c_from, x, twist)?;
    let hi = inv2(&h);
    let c = h * bm * hi;
    let c2 = h * (-inv2(&(am * bm))) * hi;
    Ok((c, c2))
}

fn assemble(spec: &FuchsianSpec, images: Vec<M2>) -> Result<Representation> {
    Representation::new(spec.surface(), images.iter().map(to_sp).collect())
}

/// The hyperbolization described by `spec`, as a representation into SL(2,R).
pub fn fuchsian(spec: &FuchsianSpec) -> Result<Representation> {
    check_lengths(spec)?;
    let rep = match *spec {
        FuchsianSpec::Pants { lengths } => {
            let (a, b) = pants_pair(lengths)?;
            assemble(spec, vec![a, b])?
        }
        FuchsianSpec::OneHoledTorus { length, twist } => {
            let (a, b) = torus_pair(length, twist)?;
            assemble(spec, vec![a, b])?
        }
        FuchsianSpec::Genus2Closed { length, twist } => {
            let (a1, b1) = torus_pair(length, 0.0)?;
            let c = comm(&a1, &b1);
            // the mirrored torus (b₁, a₁) has commutator conjugate to [a₁,b₁]⁻¹
            let (a2, b2) = (flip(&b1), flip(&a1));
            let h = conjugator(&comm(&a2, &b2), &inv2(&c), twist)?;
            let hi = inv2(&h);
            assemble(spec, vec![a1, b1, h * a2 * hi, h * b2 * hi])?
        }
        FuchsianSpec::FourHoledSphere { lengths, cut, twist } => {
            let (c1, c2) = pants_pair([lengths[0], lengths[1], cut])?;
            let (c3, _) = pants_on(&(c1 * c2), [lengths[2], lengths[3]], twist)?;
            assemble(spec, vec![c1, c2, c3])?
        }
        FuchsianSpec::TwoHoledTorus { lengths, cut, twist } => {
            let (a, b) = torus_pair(cut, 0.0)?;
            let (c1, _) = pants_on(&comm(&a, &b), lengths, twist)?;
            assemble(spec, vec![a, b, c1])?
        }
    };
    let residual = rep.relator_residual();
    if residual > TRACE_TOL {
        return Err(Error::RelatorViolated { residual });
    }
    Ok(rep)
}

/// The pants hyperbolization with all boundary lengths 1.
pub fn pants_hyperbolization() -> Result<Representation> {
    fuchsian(&FuchsianSpec::Pants { lengths: [1.0; 3] })
}

/// Δ∘h for the pants hyperbolization h, in Sp(2n,R).
pub fn pants_model(n: usize) -> Result<Representation> {
    embed_diagonal(&pants_hyperbolization()?, n)
}

/// [[α,β],[γ,δ]] ↦ [[αI,βI],[γI,δI]].
pub fn diagonal_matrix(g: &SymplecticMatrix, n: usize) -> SymplecticMatrix {
    polydisk_matrix(&vec![g; n])
}

/// Block embedding of n elements of SL(2,R), the i-th acting on (x_i, y_i).
pub fn polydisk_matrix(gs: &[&SymplecticMatrix]) -> SymplecticMatrix {
    let n = gs.len();
    let mut m = RealMatrix::zeros(2 * n, 2 * n);
    for (i, g) in gs.iter().enumerate() {
        let s = g.matrix();
        m[(i, i)] = s[(0, 0)];
        m[(i, n + i)] = s[(0, 1)];
        m[(n + i, i)] = s[(1, 0)];
        m[(n + i, n + i)] = s[(1, 1)];
    }
    SymplecticMatrix::from_matrix_unchecked(m)
}

pub fn embed_diagonal(rep: &Representation, n: usize) -> Result<Representation> {
    if rep.n != 1 {
        return Err(Error::DimensionMismatch(format!("diagonal embedding needs SL(2,R) input, got rank {}", rep.n)));
    }
    if n == 0 {
        return Err(Error::InvalidInput("target rank must be positive".into()));
    }
    Representation::new(rep.surface.clone(), rep.images().iter().map(|g| diagonal_matrix(g, n)).collect())
}

pub fn embed_polydisk(reps: &[Representation]) -> Result<Representation> {
    let first = reps.first().ok_or_else(|| Error::InvalidInput("no factors".into()))?;
    for r in reps {
        if r.surface != first.surface {
            return Err(Error::MismatchedSurfaces);
        }
        if r.n != 1 {
            return Err(Error::DimensionMismatch("polydisk factors must be in SL(2,R)".into()));
        }
    }
    let k = first.images().len();
    let images = (0..k).map(|i| polydisk_matrix(&reps.iter().map(|r| &r.images()[i]).collect::<Vec<_>>())).collect();
    Representation::new(first.surface.clone(), images)
}

/// Conjugation by diag(I, −I), which reverses the orientation of every factor.
pub fn reverse_orientation(rep: &Representation) -> Representation {
    let n = rep.n;
    rep.map_images(|g| {
        let mut m = g.matrix().clone();
        for i in 0..n {
            for j in 0..n {
                m[(i, n + j)] = -m[(i, n + j)];
                m[(n + i, j)] = -m[(n + i, j)];
            }
        }
        SymplecticMatrix::from_matrix_unchecked(m)
    })
}

/// The index-2 subgroup ⟨p = y, q = x y x⁻¹, r = x²⟩ of the pants group
/// ⟨x = c₁, y = c₂⟩, which is the fundamental group of a four-holed sphere
/// with boundary curves q, r, p, (qrp)⁻¹ covering the pants with degree 2.
pub fn pants_double_cover(rep: &Representation) -> Result<Representation> {
    if rep.surface != SurfaceData::pants() {
        return Err(Error::InvalidInput("double cover is defined for the standard pants".into()));
    }
    let names: Vec<String> = ["p", "q", "r"].iter().map(|s| s.to_string()).collect();
    let w = |s: &str| Word::parse(s, &names).expect("fixed word");
    let surface = SurfaceData::new(0, 4, names.clone(), vec![], vec![w("q"), w("r"), w("p"), w("(qrp)'")])?;
    let (x, y) = (&rep.images()[0], &rep.images()[1]);
    let images = vec![y.clone(), x.mul(y).mul(&x.inverse()), x.mul(x)];
    Representation::new(surface, images)
}

/// Parameters of a length/twist deformation glued along a separating curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformSpec {
    /// FourHoledSphere or TwoHoledTorus base hyperbolization.
    pub base: FuchsianSpec,
    pub n: usize,
    pub t: f64,
    /// One distinct positive rate per factor.
    pub epsilon: Vec<f64>,
    pub seed: u64,
}

/// Evidence for Zariski density: dimension of the associative algebra
/// spanned by words in the images, and whether some word has a non-real
/// eigenvalue off the unit circle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityCertificate {
    pub algebra_dim: usize,
    pub full_dim: usize,
    pub loxodromic_witness: bool,
}

impl DensityCertificate {
    pub fn irreducible(&self) -> bool {
        self.algebra_dim == self.full_dim
    }
}

/// Haar-random element of SO(n).
fn random_special_orthogonal(n: usize, seed: u64) -> RealMatrix {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = RealMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            let c = -q.column(i);
            q.set_column(i, &c);
        }
    }
    if q.determinant() < 0.0 {
        let c = -q.column(0);
        q.set_column(0, &c);
    }
    q
}

/// Factor i of side j: the base with its non-cut lengths scaled by 1 + ε_i t.
/// Side 1 is the pants (c₁, c₂, ·) or the torus (a, b); side 2 is the pants
/// across the cut. The cut curve image is the same in every factor.
fn deformed_factor(base: &FuchsianSpec, s: f64) -> Result<Representation> {
    if s == 0.0 {
        return fuchsian(base);
    }
    let scale = 1.0 + s;
    match base {
        FuchsianSpec::FourHoledSphere { lengths, cut, twist } => {
            let (a0, b0) = pants_pair([lengths[0], lengths[1], *cut])?;
            let x = a0 * b0;
            let (a, b) = pants_pair([lengths[0] * scale, lengths[1] * scale, *cut])?;
            let h = conjugator(&(a * b), &x, 0.0)?;
            let hi = inv2(&h);
            let (c3, _) = pants_on(&x, [lengths[2] * scale, lengths[3] * scale], twist + s)?;
            assemble(base, vec![h * a * hi, h * b * hi, c3])
        }
        FuchsianSpec::TwoHoledTorus { lengths, cut, twist } => {
            let (a, b) = torus_pair(*cut, s)?;
            let (c1, _) = pants_on(&comm(&a, &b), lengths.map(|l| l * scale), twist + s)?;
            assemble(base, vec![a, b, c1])
        }
        _ => Err(Error::InvalidInput("deformation needs a four-holed sphere or two-holed torus".into())),
    }
}

/// Deformation ρ_t: per-factor deformed hyperbolizations, polydisk-embedded,
/// with the second side conjugated by u = I₂ ⊗ O for a seeded O ∈ SO(n).
pub fn deform_section9(spec: &DeformSpec) -> Result<Representation> {
    let n = spec.n;
    if spec.epsilon.len() != n {
        return Err(Error::InvalidInput(format!("need {n} rates, got {}", spec.epsilon.len())));
    }
    if spec.t < 0.0 || !spec.t.is_finite() {
        return Err(Error::InvalidInput("t must be non-negative".into()));
    }
    for (i, e) in spec.epsilon.iter().enumerate() {
        if !(*e > 0.0) || spec.epsilon[..i].contains(e) {
            return Err(Error::InvalidInput("rates must be distinct positives".into()));
        }
    }
    let factors = spec.epsilon.iter().map(|e| deformed_factor(&spec.base, e * spec.t)).collect::<Result<Vec<_>>>()?;
    let poly = embed_polydisk(&factors)?;
    let all_equal = factors.iter().all(|f| f.images() == factors[0].images());
    let surface = poly.surface.clone();
    // side 1: c₁, c₂ (sphere) or a, b (torus); side 2 generator: the last one
    let k = surface.names.len();
    let cut = match &spec.base {
        FuchsianSpec::FourHoledSphere { .. } => poly.images()[0].mul(&poly.images()[1]),
        _ => {
            let (a, b) = (&poly.images()[0], &poly.images()[1]);
            a.mul(b).mul(&a.inverse()).mul(&b.inverse())
        }
    };
    if all_equal {
        return Ok(poly);
    }
    let o = random_special_orthogonal(n, spec.seed);
    let mut u = RealMatrix::zeros(2 * n, 2 * n);
    u.view_mut((0, 0), (n, n)).copy_from(&o);
    u.view_mut((n, n), (n, n)).copy_from(&o);
    let u = SymplecticMatrix::from_matrix_unchecked(u);
    let cut_conj = cut.conjugate_by(&u);
    let residual = numkernel::max_abs(&(cut_conj.matrix() - cut.matrix())) / numkernel::max_abs(cut.matrix()).max(1.0);
    if residual > 1e-9 {
        return Err(Error::GluingMismatch { residual });
    }
    let images = poly
        .images()
        .iter()
        .enumerate()
        .map(|(i, g)| if i + 1 == k { g.conjugate_by(&u) } else { g.clone() })
        .collect();
    Representation::new(surface, images)
}

/// Span of all words of length ≤ `max_len` in the images and their inverses.
pub fn density_certificate(rep: &Representation, max_len: usize) -> DensityCertificate {
    let dim = 2 * rep.n;
    let full_dim = dim * dim;
    let gens: Vec<RealMatrix> = rep
        .images()
        .iter()
        .flat_map(|g| [g.matrix().clone(), g.inverse().into_matrix()])
        .collect();
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
    let mut frontier = vec![RealMatrix::identity(dim, dim)];
    let add = |m: &RealMatrix, basis: &mut Vec<nalgebra::DVector<f64>>| -> bool {
        let mut v = nalgebra::DVector::from_column_slice(m.as_slice());
        let scale = v.norm();
        for b in basis.iter() {
            let c = b.dot(&v);
            v -= b * c;
        }
        if v.norm() > 1e-9 * scale.max(1.0) {
            basis.push(v.normalize());
            true
        } else {
            false
        }
    };
    add(&frontier[0], &mut basis);
    for _ in 0..max_len {
        let mut next = Vec::new();
        for f in &frontier {
            for g in &gens {
                let m = f * g;
                let s = numkernel::max_abs(&m).max(1.0);
                if add(&(&m / s), &mut basis) {
                    next.push(m / s);
                }
            }
        }
        if next.is_empty() || basis.len() == full_dim {
            break;
        }
        frontier = next;
    }
    let mut loxodromic_witness = false;
    let words = [vec![0usize], vec![0, 2], vec![0, 2, 4], vec![2, 4]];
    for w in &words {
        let mut m = RealMatrix::identity(dim, dim);
        for &i in w {
            if let Some(g) = gens.get(i) {
                m = m * g;
            }
        }
        if let Ok(ev) = numkernel::eigenvalues(&m) {
            if ev.iter().any(|z| z.im.abs() > 1e-6 && (z.norm() - 1.0).abs() > 1e-6) {
                loxodromic_witness = true;
            }
        }
    }
    DensityCertificate { algebra_dim: basis.len(), full_dim, loxodromic_witness }
}

/// Boundary traces of an SL(2,R) representation.
pub fn boundary_traces(rep: &Representation) -> Vec<f64> {
    rep.boundary_images().iter().map(|g| from_sp(g).trace()).collect()
}
