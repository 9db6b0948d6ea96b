//! Property suites shared by the `verify` command and the acceptance tests.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::constructors::{
    deform_section9, diagonal_matrix, embed_diagonal, fuchsian, pants_model, polydisk_matrix, reverse_orientation,
    DeformSpec, FuchsianSpec,
};
use crate::cover::{circle_dist, rot, rot_difference_table, rot_homogenized};
use crate::error::{Error, Result};
use crate::lagrangian::{
    act, boundary_embed_diag, is_maximal_triple, is_transverse, kashiwara, kashiwara_auto, random_rational_lagrangian,
    sl2_boundary_action, witness_triple, Lagrangian, Mode,
};
use crate::numkernel::RealMatrix;
use crate::surface::{
    additivity_check, derive_seed, integrality_check, maximal_value, random_representation, random_words, range_sample,
    toledo, Cut, CutSide, DenominatorStats, Representation, SurfaceData, ToledoOptions, ToledoReport, Word,
};
use crate::symplectic::{random_symplectic, random_symplectic_with, rotation, symplectify, KappaClass, SymplecticMatrix};

pub const SUITES: &[&str] = &[
    "maslov-cocycle",
    "rot-conjugation",
    "model",
    "milnor-wood",
    "range",
    "additivity",
    "thm9",
    "integrality",
    "boundary-map",
];

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub samples: Option<usize>,
    pub seed: u64,
    pub depth: u32,
    pub tol: f64,
    pub exact: bool,
    pub kappa: KappaClass,
    pub spread: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            samples: None,
            seed: 1,
            depth: crate::cover::DEFAULT_DEPTH,
            tol: 1e-6,
            exact: false,
            kappa: KappaClass::STANDARD,
            spread: 3.0,
        }
    }
}

impl SuiteConfig {
    fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    fn opts(&self) -> ToledoOptions {
        ToledoOptions { depth: self.depth, check_lift_independence: false, ..Default::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    /// value ≤ threshold
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), pass: value <= threshold, value, threshold }
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), pass: value >= threshold, value, threshold }
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self { name: name.into(), pass: ok, value: if ok { 1.0 } else { 0.0 }, threshold: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
}

impl SuiteReport {
    fn new(suite: &str, checks: Vec<Check>, data: serde_json::Value) -> Self {
        Self { suite: suite.into(), pass: checks.iter().all(|c| c.pass), checks, data }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    match name {
        "maslov-cocycle" => maslov_cocycle(cfg),
        "rot-conjugation" => rot_conjugation(cfg),
        "model" => model(cfg),
        "milnor-wood" => milnor_wood(cfg),
        "range" => range(cfg),
        "additivity" => additivity(cfg),
        "thm9" => rotation_differences(cfg),
        "integrality" => integrality(cfg),
        "boundary-map" => boundary_map(cfg),
        other => Err(Error::InvalidInput(format!("unknown suite '{other}'; known: {}", SUITES.join(", ")))),
    }
}

fn max_congruence(reports: &[&ToledoReport]) -> f64 {
    reports.iter().map(|r| r.congruence_check).fold(0.0, f64::max)
}

/// Random rational Lagrangian 4-tuples: cocycle identity, |β| ≤ n/2, and
/// the values taken on pairwise transverse triples.
pub fn maslov_cocycle(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let samples = cfg.samples_or(1000);
    let mode = if cfg.exact { Mode::Exact } else { Mode::default() };
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();
    for n in 1..=3usize {
        let per: Vec<Result<(bool, bool, Option<i64>)>> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed ^ (n as u64) << 32, i));
                let l: Vec<Lagrangian> = (0..4).map(|_| random_rational_lagrangian(n, &mut rng)).collect();
                let tau = |a: usize, b: usize, c: usize| -> Result<i64> {
                    Ok(match mode {
                        Mode::Exact => kashiwara(&l[a], &l[b], &l[c], Mode::Exact)?.tau,
                        _ => kashiwara_auto(&l[a], &l[b], &l[c])?.tau,
                    })
                };
                let t012 = tau(0, 1, 2)?;
                let cocycle = tau(1, 2, 3)? - tau(0, 2, 3)? + tau(0, 1, 3)? - t012 == 0;
                let bound = t012.abs() <= n as i64;
                let transverse = is_transverse(&l[0], &l[1], Mode::Exact)?
                    && is_transverse(&l[1], &l[2], Mode::Exact)?
                    && is_transverse(&l[0], &l[2], Mode::Exact)?;
                Ok((cocycle, bound, transverse.then_some(t012)))
            })
            .collect();
        let per = per.into_iter().collect::<Result<Vec<_>>>()?;
        let cocycle_fail = per.iter().filter(|p| !p.0).count();
        let bound_fail = per.iter().filter(|p| !p.1).count();
        let transverse: Vec<i64> = per.iter().filter_map(|p| p.2).collect();
        let seen: BTreeSet<i64> = transverse.iter().copied().collect();
        let in_range = transverse.iter().all(|t| t.abs() <= n as i64 && (t - n as i64) % 2 == 0);
        let constructed: Vec<i64> = (0..=n)
            .map(|k| {
                let [a, b, c] = witness_triple(n, k);
                kashiwara(&a, &b, &c, Mode::Exact).map(|v| v.tau)
            })
            .collect::<Result<_>>()?;
        let constructed_ok = constructed.iter().enumerate().all(|(k, &t)| t == 2 * k as i64 - n as i64);
        checks.push(Check::at_most(&format!("n{n}_cocycle_failures"), cocycle_fail as f64, 0.0));
        checks.push(Check::at_most(&format!("n{n}_bound_failures"), bound_fail as f64, 0.0));
        checks.push(Check::flag(&format!("n{n}_transverse_values_in_range"), in_range));
        checks.push(Check::at_least(&format!("n{n}_values_witnessed"), seen.len() as f64, (n + 1) as f64));
        checks.push(Check::flag(&format!("n{n}_constructed_witnesses"), constructed_ok));
        let betas: Vec<String> = seen.iter().map(|t| crate::lagrangian::MaslovValue { tau: *t }.to_string()).collect();
        data.insert(format!("n{n}"), json!({ "transverse_triples": transverse.len(), "beta_values_seen": betas }));
    }
    Ok(SuiteReport::new("maslov-cocycle", checks, serde_json::Value::Object(data)))
}

/// A random semisimple element of Sp(2n,R): a conjugate of a product of
/// commuting elliptic, hyperbolic and loxodromic blocks.
pub fn random_semisimple<R: Rng>(n: usize, rng: &mut R) -> SymplecticMatrix {
    let mut d = if n >= 2 && rng.random_bool(0.25) {
        // λ·R(α) on the first two q-coordinates, its inverse transpose on p
        let (l, a) = (rng.random_range(1.2..3.0), rng.random_range(0.2..3.0));
        let mut m = RealMatrix::identity(2 * n, 2 * n);
        let (s, c) = f64::sin_cos(a);
        let blk = RealMatrix::from_row_slice(2, 2, &[l * c, -l * s, l * s, l * c]);
        let inv_t = blk.clone().try_inverse().unwrap().transpose();
        m.view_mut((0, 0), (2, 2)).copy_from(&blk);
        m.view_mut((n, n), (2, 2)).copy_from(&inv_t);
        for i in 2..n {
            let (s, c) = f64::sin_cos(rng.random_range(-PI..PI));
            m[(i, i)] = c;
            m[(i, n + i)] = -s;
            m[(n + i, i)] = s;
            m[(n + i, n + i)] = c;
        }
        SymplecticMatrix::from_matrix_unchecked(m)
    } else {
        let blocks: Vec<SymplecticMatrix> = (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    rotation(&[rng.random_range(-3.0..3.0)])
                } else {
                    let l: f64 = rng.random_range(1.1..4.0) * if rng.random_bool(0.3) { -1.0 } else { 1.0 };
                    crate::symplectic::diagonal(&[l])
                }
            })
            .collect();
        polydisk_matrix(&blocks.iter().collect::<Vec<_>>())
    };
    let h = random_symplectic_with(n, 0.6, rng);
    d = d.conjugate_by(&h);
    symplectify(d.into_matrix())
}

/// [[A, AS], [0, A⁻ᵀ]] with A upper triangular of positive diagonal and S
/// symmetric: an element of the identity component of a Lagrangian stabilizer.
pub fn random_upper_triangular<R: Rng>(n: usize, rng: &mut R) -> SymplecticMatrix {
    let mut a = RealMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = rng.random_range(0.3..3.0);
        for j in i + 1..n {
            a[(i, j)] = rng.random_range(-2.0..2.0);
        }
    }
    let mut s = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-2.0..2.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let mut m = RealMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    m.view_mut((0, n), (n, n)).copy_from(&(&a * &s));
    m.view_mut((n, n), (n, n)).copy_from(&a.clone().try_inverse().unwrap().transpose());
    SymplecticMatrix::from_matrix_unchecked(m)
}

/// Krein vs homogenization on semisimple elements, conjugation invariance,
/// and vanishing on the identity component of a Lagrangian stabilizer.
pub fn rot_conjugation(cfg: &SuiteConfig) -> Result<SuiteReport> {
    rot_consistency(cfg, cfg.samples_or(500), 2 * cfg.samples_or(500), (2 * cfg.samples_or(500)).div_ceil(5), 2)
}

pub fn rot_consistency(cfg: &SuiteConfig, semisimple: usize, pairs: usize, upper: usize, n: usize) -> Result<SuiteReport> {
    let k = cfg.kappa;
    let krein_vs_homog: Vec<f64> = (0..semisimple)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, i));
            let g = random_semisimple(n, &mut rng);
            Ok(circle_dist(rot(&g, k)?.mod1, rot_homogenized(&g, k, cfg.depth)?.mod1))
        })
        .collect::<Result<Vec<_>>>()?;
    let conj: Vec<f64> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed ^ 0xC0, i));
            let g = random_symplectic_with(n, rng.random_range(0.2..2.0), &mut rng);
            let h = random_symplectic_with(n, rng.random_range(0.2..1.5), &mut rng);
            Ok(circle_dist(rot(&g, k)?.mod1, rot(&g.conjugate_by(&h), k)?.mod1))
        })
        .collect::<Result<Vec<_>>>()?;
    let upper_vals: Vec<f64> = (0..upper)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed ^ 0x0F, i));
            Ok(circle_dist(rot(&random_upper_triangular(n, &mut rng), k)?.mod1, 0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let mx = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("krein_vs_homogenization", mx(&krein_vs_homog), cfg.tol),
        Check::at_most("conjugation_invariance", mx(&conj), cfg.tol),
        Check::at_most("upper_triangular_zero", mx(&upper_vals), cfg.tol),
    ];
    let data = json!({ "n": n, "semisimple": semisimple, "pairs": pairs, "upper_triangular": upper });
    Ok(SuiteReport::new("rot-conjugation", checks, data))
}

/// The pants model Δ∘h in Sp(2n,R) for n = 1, 2, 3 and its mirror image.
pub fn model(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for n in 1..=3usize {
        let rep = pants_model(n)?;
        let opts = ToledoOptions { depth: cfg.depth, ..Default::default() };
        let t = toledo(&rep, cfg.kappa, &opts)?;
        let r = toledo(&reverse_orientation(&rep), cfg.kappa, &opts)?;
        let expected = n as f64 * cfg.kappa.weight() as f64 / 2.0;
        checks.push(Check::at_most(&format!("n{n}_model"), (t.value - expected).abs(), 1e-4));
        checks.push(Check::at_most(&format!("n{n}_reversed"), (r.value + t.value).abs(), 1e-4));
        checks.push(Check::at_most(&format!("n{n}_lift_independence"), t.lift_independence.unwrap_or(0.0), cfg.tol));
        rows.push(json!({ "n": n, "value": t.value, "reversed": r.value, "per_boundary": t.per_boundary }));
        reports.push(t);
        reports.push(r);
    }
    checks.push(Check::at_most("congruence", max_congruence(&reports.iter().collect::<Vec<_>>()), cfg.tol));
    Ok(SuiteReport::new("model", checks, json!({ "rows": rows })))
}

fn sample_summary(cfg: &SuiteConfig, samples: usize) -> Result<(crate::surface::RangeSample, f64)> {
    let s = SurfaceData::pants();
    let r = range_sample(&s, 2, cfg.kappa, samples, cfg.seed, cfg.spread, cfg.depth)?;
    let model = toledo(&pants_model(2)?, cfg.kappa, &cfg.opts())?.value;
    Ok((r, model))
}

/// |T| ≤ M on random representations of the pants group into Sp(4,R).
pub fn milnor_wood(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let (r, model) = sample_summary(cfg, cfg.samples_or(1000))?;
    let ratio = if r.bound > 0.0 { r.max_abs / r.bound } else { 0.0 };
    let checks = vec![
        Check::at_most("max_abs_minus_bound", r.max_abs - r.bound, 1e-6),
        Check::at_most("model_attains_bound", (model.abs() - r.bound).abs(), 1e-6),
        Check::at_most("numeric_failures", r.failures as f64, 0.0),
        Check::at_most("congruence", r.max_congruence, cfg.tol),
    ];
    let data = json!({ "bound": r.bound, "max_abs": r.max_abs, "max_ratio": ratio, "samples": r.samples.len() });
    Ok(SuiteReport::new("milnor-wood", checks, data))
}

/// Coverage of [−M, M] by sampled values at bin width M/50.
pub fn range(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let (r, _) = sample_summary(cfg, cfg.samples_or(1000))?;
    let checks = vec![
        Check::at_most("max_abs_minus_bound", r.max_abs - r.bound, 1e-6),
        Check::at_least("coverage", r.coverage, 0.3),
    ];
    let data = json!({ "bound": r.bound, "coverage": r.coverage, "bins": r.bins, "samples": r.samples.len() });
    Ok(SuiteReport::new("range", checks, data))
}

/// The four-holed sphere c₁c₂c₃c₄ = e cut along c₁c₂ into two pants.
pub fn four_holed_cut(surface: &SurfaceData) -> Cut {
    let g = |i| Word::generator(i);
    let c12 = Word::product([&g(0), &g(1)]);
    let c4 = surface.boundary_words[3].clone();
    Cut {
        curve: c12.clone(),
        sides: [
            CutSide { handles: vec![], boundary: vec![g(0), g(1), c12.inverse()] },
            CutSide { handles: vec![], boundary: vec![c12, g(2), c4] },
        ],
    }
}

/// The two-holed torus [a,b]c₁c₂ = e cut along [a,b].
pub fn two_holed_torus_cut(surface: &SurfaceData) -> Cut {
    let (a, b) = surface.handles[0].clone();
    let d = Word::commutator(&a, &b);
    let c1 = surface.boundary_words[0].clone();
    let c2 = surface.boundary_words[1].clone();
    Cut {
        curve: d.clone(),
        sides: [
            CutSide { handles: vec![(a, b)], boundary: vec![d.inverse()] },
            CutSide { handles: vec![], boundary: vec![d, c1, c2] },
        ],
    }
}

/// Cut additivity on model and random representations, and the closed
/// genus-2 formula against its cut along [a₁, b₁].
pub fn additivity(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let k = cfg.kappa;
    let sphere = FuchsianSpec::FourHoledSphere { lengths: [1.0, 1.0, 1.0, 1.0], cut: 1.0, twist: 0.0 };
    let torus2 = FuchsianSpec::TwoHoledTorus { lengths: [1.0, 1.0], cut: 1.0, twist: 0.3 };
    let closed = FuchsianSpec::Genus2Closed { length: 1.5, twist: 0.2 };
    let m4 = embed_diagonal(&fuchsian(&sphere)?, 2)?;
    let m12 = embed_diagonal(&fuchsian(&torus2)?, 2)?;
    let mc = embed_diagonal(&fuchsian(&closed)?, 2)?;
    let a4 = additivity_check(&m4, &four_holed_cut(&m4.surface), k, cfg.depth)?;
    let a12 = additivity_check(&m12, &two_holed_torus_cut(&m12.surface), k, cfg.depth)?;
    let ac = additivity_check(&mc, &Cut::closed_standard(&mc.surface)?, k, cfg.depth)?;
    let tc = toledo(&mc, k, &cfg.opts())?;
    let t4 = toledo(&m4, k, &cfg.opts())?;
    let t12 = toledo(&m12, k, &cfg.opts())?;
    let random: Vec<(f64, f64)> = (0..cfg.samples_or(20))
        .into_par_iter()
        .map(|i| {
            let rep = random_representation(&m4.surface, 2, cfg.spread, derive_seed(cfg.seed, i))?;
            let a = additivity_check(&rep, &four_holed_cut(&rep.surface), k, cfg.depth)?;
            let t = toledo(&rep, k, &cfg.opts())?;
            Ok((a.residual, t.congruence_check))
        })
        .collect::<Result<Vec<_>>>()?;
    let random_res = random.iter().map(|r| r.0).fold(0.0, f64::max);
    let random_cong = random.iter().map(|r| r.1).fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("four_holed_sphere_model", a4.residual, cfg.tol),
        Check::at_most("two_holed_torus_model", a12.residual, cfg.tol),
        Check::at_most("random_four_holed_sphere", random_res, cfg.tol),
        Check::at_most("closed_vs_cut", ac.residual, cfg.tol),
        Check::at_most("closed_integrality", tc.integrality_residual.unwrap_or(f64::INFINITY), cfg.tol),
        Check::at_most("congruence", max_congruence(&[&tc, &t4, &t12]).max(random_cong), cfg.tol),
    ];
    let data = json!({
        "four_holed_sphere": a4, "two_holed_torus": a12, "closed_genus2": ac, "closed_value": tc.value,
        "random_samples": random.len(),
    });
    Ok(SuiteReport::new("additivity", checks, data))
}

/// Rotation differences between the model and a deformation on the
/// four-holed sphere in Sp(4,R): homomorphism defect and the grid.
pub fn rotation_differences(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let pairs_n = cfg.samples_or(200);
    let base = FuchsianSpec::FourHoledSphere { lengths: [1.0, 1.0, 1.0, 1.0], cut: 1.2, twist: 0.0 };
    let rho0 = embed_diagonal(&fuchsian(&base)?, 2)?;
    let rho = deform_section9(&DeformSpec { base, n: 2, t: 0.3, epsilon: vec![0.5, 1.0], seed: cfg.seed })?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nwords = (pairs_n / 2).max(10);
    let words = random_words(&rho.surface, nwords, 5, rng.random());
    let pairs: Vec<(usize, usize)> = (0..pairs_n).map(|_| (rng.random_range(0..nwords), rng.random_range(0..nwords))).collect();
    let table = rot_difference_table(&rho, &rho0, &words, &pairs, cfg.kappa)?;
    let maximal = crate::surface::is_maximal(&rho, cfg.kappa, 1e-6)?;
    let grid = table.grid(1e-6);
    let checks = vec![
        Check::at_most("homomorphism_defect", table.defect, cfg.tol),
        Check::flag("grid_found", grid.is_some()),
        Check::flag("deformation_maximal", maximal),
    ];
    let data = json!({ "weight": cfg.kappa.weight(), "grid_denominator": grid, "pairs": pairs.len(), "table": table });
    Ok(SuiteReport::new("thm9", checks, data))
}

/// Toledo values of representations whose boundary images fix the
/// horizontal Lagrangian, and the denominators they exhibit.
pub fn integrality(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let k = cfg.kappa;
    let model = integrality_check(&pants_model(2)?, k, cfg.depth)?;
    let surface = SurfaceData::pants();
    let samples = cfg.samples_or(50);
    let reports = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, i));
            let imgs = (0..2)
                .map(|_| {
                    let mut g = random_upper_triangular(2, &mut rng);
                    // move into other components of the stabilizer
                    let flips = rng.random_range(0..4u32);
                    let mut m = g.matrix().clone();
                    for b in 0..2 {
                        if flips & (1 << b) != 0 {
                            m.row_mut(b).neg_mut();
                            m.row_mut(2 + b).neg_mut();
                        }
                    }
                    g = SymplecticMatrix::from_matrix_unchecked(m);
                    g
                })
                .collect();
            integrality_check(&Representation::new(surface.clone(), imgs)?, k, cfg.depth)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut stats = DenominatorStats::default();
    for r in &reports {
        stats.record(r);
    }
    let elliptic = Representation::new(surface.clone(), vec![rotation(&[0.5, 0.9]), random_symplectic(2, 0.5, cfg.seed)])?;
    let rejected = matches!(integrality_check(&elliptic, k, cfg.depth), Err(Error::MembershipFailed(_)));
    let checks = vec![
        Check::flag("model_integer", model.denominator == Some(1)),
        Check::at_most("unresolved_values", stats.unresolved as f64, 0.0),
        Check::flag("elliptic_boundary_rejected", rejected),
    ];
    let data = json!({
        "model_value": model.value,
        "denominators": stats.observed.iter().collect::<BTreeSet<_>>(),
        "empirical_exponent": stats.exponent(),
    });
    Ok(SuiteReport::new("integrality", checks, data))
}

/// The diagonal boundary map x ↦ Δ-line: positively oriented triples go to
/// maximal triples, and φ(h·x) = Δ(h)·φ(x).
pub fn boundary_map(cfg: &SuiteConfig) -> Result<SuiteReport> {
    let samples = cfg.samples_or(500);
    let results: Vec<(bool, f64)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, i));
            let n = 1 + i % 3;
            let mut x: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            x.sort_by(|a, b| a.total_cmp(b));
            x.rotate_left(rng.random_range(0..3));
            let l: Vec<Lagrangian> = x.iter().map(|&t| boundary_embed_diag(t, n)).collect();
            let maximal = is_maximal_triple(&l[0], &l[1], &l[2]);
            let h = random_symplectic(1, rng.random_range(0.2..2.0), rng.random());
            let y = x[0];
            let lhs = boundary_embed_diag(sl2_boundary_action(h.matrix(), y), n);
            let rhs = act(&diagonal_matrix(&h, n), &boundary_embed_diag(y, n));
            (maximal, projector_distance(&lhs, &rhs))
        })
        .collect();
    let not_maximal = results.iter().filter(|r| !r.0).count();
    let eq = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("non_maximal_triples", not_maximal as f64, 0.0),
        Check::at_most("equivariance", eq, 1e-8),
    ];
    Ok(SuiteReport::new("boundary-map", checks, json!({ "samples": samples })))
}

/// Max-entry distance between the orthogonal projectors onto two subspaces.
pub fn projector_distance(a: &Lagrangian, b: &Lagrangian) -> f64 {
    let p = |l: &Lagrangian| {
        let q = crate::numkernel::orthonormalize(l.basis());
        &q * q.transpose()
    };
    crate::numkernel::max_abs(&(p(a) - p(b)))
}

/// Calibration constant: the model value for (n, κ).
pub fn calibration(n: usize, kappa: KappaClass) -> Result<f64> {
    maximal_value(&SurfaceData::pants(), n, kappa)
}
