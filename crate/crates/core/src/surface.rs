//! Surface presentations, words, representations and Toledo invariants.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{self, circle_dist, cover_mul, inverse, reference_lift, rot, rot_lift_retry, CoverElement};
use crate::error::{Error, Result};
use crate::lagrangian::fixed_lagrangian;
use crate::numkernel::{self, RealMatrix};
use crate::symplectic::{random_symplectic, KappaClass, SymplecticMatrix};

const RELATOR_TOL: f64 = 1e-6;

/// A reduced word in the free group on a fixed list of generator names.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<(usize, i8)>,
}

impl Word {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn generator(i: usize) -> Self {
        Self { letters: vec![(i, 1)] }
    }

    pub fn from_letters(letters: impl IntoIterator<Item = (usize, i8)>) -> Self {
        let mut w = Self::empty();
        for l in letters {
            w.push(l);
        }
        w
    }

    fn push(&mut self, (g, e): (usize, i8)) {
        debug_assert!(e == 1 || e == -1);
        if let Some(&(h, f)) = self.letters.last() {
            if h == g && f == -e {
                self.letters.pop();
                return;
            }
        }
        self.letters.push((g, e));
    }

    pub fn letters(&self) -> &[(usize, i8)] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self { letters: self.letters.iter().rev().map(|&(g, e)| (g, -e)).collect() }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut w = self.clone();
        for &l in &other.letters {
            w.push(l);
        }
        w
    }

    pub fn product<'a>(words: impl IntoIterator<Item = &'a Word>) -> Self {
        words.into_iter().fold(Self::empty(), |acc, w| acc.concat(w))
    }

    /// x·y·x⁻¹·y⁻¹
    pub fn commutator(x: &Self, y: &Self) -> Self {
        Self::product([x, y, &x.inverse(), &y.inverse()])
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.0).max()
    }

    /// Cyclically reduced form, then the lexicographically least rotation:
    /// two words are conjugate iff their keys agree.
    pub fn conjugacy_key(&self) -> Vec<(usize, i8)> {
        let mut l = self.letters.clone();
        while l.len() >= 2 {
            let (a, b) = (l[0], l[l.len() - 1]);
            if a.0 == b.0 && a.1 == -b.1 {
                l.pop();
                l.remove(0);
            } else {
                break;
            }
        }
        let k = l.len();
        (0..k.max(1))
            .map(|r| l[r.min(k)..].iter().chain(&l[..r.min(k)]).copied().collect::<Vec<_>>())
            .min()
            .unwrap_or_default()
    }

    /// Parse the compact syntax: single letters, `[name]` for longer names,
    /// `[x,y]` for a commutator of two words, `(w)` for grouping, and a
    /// trailing apostrophe for inverses. Whitespace is ignored.
    pub fn parse(s: &str, names: &[String]) -> Result<Self> {
        let chars: Vec<char> = s.chars().collect();
        let mut pos = 0;
        let w = parse_seq(&chars, &mut pos, names, None)?;
        if pos != chars.len() {
            return Err(Error::Parse(format!("unexpected '{}' at column {} in word \"{s}\"", chars[pos], pos + 1)));
        }
        Ok(w)
    }

    pub fn format(&self, names: &[String]) -> String {
        let mut out = String::new();
        for &(g, e) in &self.letters {
            let name = names.get(g).map(String::as_str).unwrap_or("?");
            if name.chars().count() == 1 {
                out.push_str(name);
            } else {
                out.push('[');
                out.push_str(name);
                out.push(']');
            }
            if e < 0 {
                out.push('\'');
            }
        }
        out
    }
}

fn parse_seq(chars: &[char], pos: &mut usize, names: &[String], close: Option<char>) -> Result<Word> {
    let mut w = Word::empty();
    while *pos < chars.len() {
        let c = chars[*pos];
        if c.is_whitespace() {
            *pos += 1;
            continue;
        }
        if Some(c) == close || (close == Some(']') && c == ',') {
            return Ok(w);
        }
        let start = *pos;
        let mut atom = match c {
            '(' => {
                *pos += 1;
                let inner = parse_seq(chars, pos, names, Some(')'))?;
                expect(chars, pos, ')')?;
                inner
            }
            '[' => {
                *pos += 1;
                let body_end = chars[*pos..].iter().position(|&x| x == ']').map(|k| *pos + k);
                let body: String = chars[*pos..body_end.unwrap_or(chars.len())].iter().collect();
                if body.contains(',') || body.contains('[') || body.contains('(') {
                    let x = parse_seq(chars, pos, names, Some(']'))?;
                    expect(chars, pos, ',')?;
                    let y = parse_seq(chars, pos, names, Some(']'))?;
                    expect(chars, pos, ']')?;
                    Word::commutator(&x, &y)
                } else {
                    let end = body_end.ok_or_else(|| Error::Parse(format!("unclosed '[' at column {}", start + 1)))?;
                    *pos = end + 1;
                    let name = body.trim();
                    Word::generator(lookup(name, names)?)
                }
            }
            c if c.is_alphanumeric() || c == '_' => {
                *pos += 1;
                Word::generator(lookup(&c.to_string(), names)?)
            }
            other => return Err(Error::Parse(format!("unexpected '{other}' at column {}", start + 1))),
        };
        while *pos < chars.len() && chars[*pos] == '\'' {
            atom = atom.inverse();
            *pos += 1;
        }
        w = w.concat(&atom);
    }
    if let Some(c) = close {
        return Err(Error::Parse(format!("missing '{c}'")));
    }
    Ok(w)
}

fn expect(chars: &[char], pos: &mut usize, c: char) -> Result<()> {
    while *pos < chars.len() && chars[*pos].is_whitespace() {
        *pos += 1;
    }
    if chars.get(*pos) == Some(&c) {
        *pos += 1;
        Ok(())
    } else {
        Err(Error::Parse(format!("expected '{c}' at column {}", *pos + 1)))
    }
}

fn lookup(name: &str, names: &[String]) -> Result<usize> {
    names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownGenerator(name.to_string()))
}

/// A surface of genus g with b boundary circles, presented by free
/// generators together with words for the handle pairs (a_i, b_i) and the
/// boundary curves c_j, subject to Π[a_i,b_i]·Π c_j = e.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceData {
    pub genus: usize,
    pub boundary: usize,
    pub names: Vec<String>,
    pub handles: Vec<(Word, Word)>,
    pub boundary_words: Vec<Word>,
}

impl SurfaceData {
    /// The standard presentation. Bordered: free on a_i, b_i, c_1..c_{b−1},
    /// with c_b = (Π[a_i,b_i]·c_1⋯c_{b−1})⁻¹. Closed: a_i, b_i with the
    /// single relator.
    pub fn standard(genus: usize, boundary: usize) -> Result<Self> {
        let mut names = Vec::new();
        let mut handles = Vec::new();
        for i in 1..=genus {
            names.push(format!("a{i}"));
            names.push(format!("b{i}"));
            handles.push((Word::generator(2 * i - 2), Word::generator(2 * i - 1)));
        }
        let mut boundary_words = Vec::new();
        for j in 1..boundary {
            names.push(format!("c{j}"));
            boundary_words.push(Word::generator(names.len() - 1));
        }
        if boundary > 0 {
            let prefix = Word::product(
                handles.iter().map(|(a, b)| Word::commutator(a, b)).collect::<Vec<_>>().iter().chain(&boundary_words),
            );
            boundary_words.push(prefix.inverse());
        }
        Self::new(genus, boundary, names, handles, boundary_words)
    }

    pub fn pants() -> Self {
        Self::standard(0, 3).expect("pants presentation")
    }

    pub fn new(
        genus: usize,
        boundary: usize,
        names: Vec<String>,
        handles: Vec<(Word, Word)>,
        boundary_words: Vec<Word>,
    ) -> Result<Self> {
        let s = Self { genus, boundary, names, handles, boundary_words };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.handles.len() != self.genus {
            return Err(Error::InvalidInput(format!("{} handle pairs for genus {}", self.handles.len(), self.genus)));
        }
        if self.boundary_words.len() != self.boundary {
            return Err(Error::InvalidInput(format!(
                "{} boundary words for {} boundary components",
                self.boundary_words.len(),
                self.boundary
            )));
        }
        let k = self.names.len();
        let words = self.handles.iter().flat_map(|(a, b)| [a, b]).chain(&self.boundary_words);
        for w in words {
            if w.max_generator().is_some_and(|g| g >= k) {
                return Err(Error::InvalidInput("word uses an undeclared generator".into()));
            }
        }
        if self.is_bordered() && !self.relator().is_empty() {
            return Err(Error::InvalidInput(
                "boundary words do not satisfy the surface relation in the free group".into(),
            ));
        }
        Ok(())
    }

    pub fn euler(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundary as i64
    }

    pub fn is_bordered(&self) -> bool {
        self.boundary > 0
    }

    /// Π[a_i,b_i]·Π c_j as a word.
    pub fn relator(&self) -> Word {
        let comms: Vec<Word> = self.handles.iter().map(|(a, b)| Word::commutator(a, b)).collect();
        Word::product(comms.iter().chain(&self.boundary_words))
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        Word::parse(s, &self.names)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.format(&self.names)
    }
}

impl fmt::Display for SurfaceData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Σ(g={}, b={})", self.genus, self.boundary)
    }
}

/// A homomorphism from the surface group into Sp(2n,R), given on generators.
#[derive(Debug, Clone)]
pub struct Representation {
    pub surface: SurfaceData,
    pub n: usize,
    images: Vec<SymplecticMatrix>,
}

impl Representation {
    pub fn new(surface: SurfaceData, images: Vec<SymplecticMatrix>) -> Result<Self> {
        if images.len() != surface.names.len() {
            return Err(Error::InvalidInput(format!(
                "{} images for {} generators",
                images.len(),
                surface.names.len()
            )));
        }
        let n = images.first().map(SymplecticMatrix::n).unwrap_or(1);
        for (img, name) in images.iter().zip(&surface.names) {
            if img.n() != n {
                return Err(Error::DimensionMismatch(format!("generator {name} has rank {} not {n}", img.n())));
            }
            let scale = numkernel::max_abs(img.matrix()).max(1.0);
            let r = img.residual();
            if !(r <= 1e-8 * scale * scale) {
                return Err(Error::NotSymplectic { residual: r });
            }
        }
        let rep = Self { surface, n, images };
        if !rep.surface.is_bordered() {
            let r = rep.relator_residual();
            if !(r <= RELATOR_TOL) {
                return Err(Error::RelatorViolated { residual: r });
            }
        }
        Ok(rep)
    }

    pub fn images(&self) -> &[SymplecticMatrix] {
        &self.images
    }

    pub fn image(&self, name: &str) -> Option<&SymplecticMatrix> {
        self.surface.names.iter().position(|x| x == name).map(|i| &self.images[i])
    }

    pub fn evaluate(&self, w: &Word) -> SymplecticMatrix {
        let mut acc = SymplecticMatrix::identity(self.n);
        for &(g, e) in w.letters() {
            let m = if e > 0 { self.images[g].clone() } else { self.images[g].inverse() };
            acc = acc.mul(&m);
        }
        acc
    }

    pub fn evaluate_str(&self, s: &str) -> Result<SymplecticMatrix> {
        Ok(self.evaluate(&self.surface.parse_word(s)?))
    }

    pub fn boundary_images(&self) -> Vec<SymplecticMatrix> {
        self.surface.boundary_words.iter().map(|w| self.evaluate(w)).collect()
    }

    pub fn relator_residual(&self) -> f64 {
        let r = self.evaluate(&self.surface.relator());
        numkernel::max_abs(&(r.matrix() - RealMatrix::identity(2 * self.n, 2 * self.n)))
    }

    /// h·ρ·h⁻¹
    pub fn conjugate(&self, h: &SymplecticMatrix) -> Self {
        self.map_images(|g| g.conjugate_by(h))
    }

    pub fn map_images<F: Fn(&SymplecticMatrix) -> SymplecticMatrix>(&self, f: F) -> Self {
        Self { surface: self.surface.clone(), n: self.n, images: self.images.iter().map(f).collect() }
    }

    pub fn trivial(surface: SurfaceData, n: usize) -> Self {
        let k = surface.names.len();
        Self { surface, n, images: vec![SymplecticMatrix::identity(n); k] }
    }
}

/// Generator lifts to the universal cover, used to evaluate words there.
struct CoverRep {
    lifts: Vec<CoverElement>,
    inverses: Vec<CoverElement>,
    n: usize,
    kappa: KappaClass,
}

impl CoverRep {
    fn new(rep: &Representation, kappa: KappaClass, shifts: Option<&[i64]>) -> Result<Self> {
        let mut lifts = Vec::with_capacity(rep.images.len());
        for (i, g) in rep.images.iter().enumerate() {
            let mut x = reference_lift(g, kappa)?;
            if let Some(s) = shifts {
                x.theta += 2.0 * PI * s[i] as f64;
            }
            lifts.push(x);
        }
        let inverses = lifts.iter().map(inverse).collect::<Result<Vec<_>>>()?;
        Ok(Self { lifts, inverses, n: rep.n, kappa })
    }

    fn eval(&self, w: &Word) -> Result<CoverElement> {
        let mut acc = CoverElement::identity(self.n, self.kappa);
        for &(g, e) in w.letters() {
            let f = if e > 0 { &self.lifts[g] } else { &self.inverses[g] };
            acc = cover_mul(&acc, f)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToledoMethod {
    BoundaryFormula,
    ClosedFormula,
}

/// T_κ(Σ, ρ) with its diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToledoReport {
    pub value: f64,
    pub kappa: KappaClass,
    pub per_boundary: Vec<f64>,
    pub method: ToledoMethod,
    /// Distance on R/Z of value + Σ rot(ρ(c_j)) from 0.
    pub congruence_check: f64,
    /// Largest change of the value under central shifts of the generator lifts.
    pub lift_independence: Option<f64>,
    /// Distance of the value from the nearest integer (closed surfaces).
    pub integrality_residual: Option<f64>,
}

impl ToledoReport {
    pub fn congruence_ok(&self) -> bool {
        self.congruence_check < 1e-6
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ToledoOptions {
    pub depth: u32,
    pub check_lift_independence: bool,
    pub shift_seed: u64,
}

impl Default for ToledoOptions {
    fn default() -> Self {
        Self { depth: cover::DEFAULT_DEPTH, check_lift_independence: true, shift_seed: 0x5EED }
    }
}

fn bordered_value(rep: &Representation, kappa: KappaClass, depth: u32, shifts: Option<&[i64]>) -> Result<Vec<f64>> {
    let cr = CoverRep::new(rep, kappa, shifts)?;
    rep.surface
        .boundary_words
        .iter()
        .map(|w| Ok(rot_lift_retry(&cr.eval(w)?, depth)?.value))
        .collect()
}

fn congruence(value: f64, boundary: &[SymplecticMatrix], kappa: KappaClass) -> Result<f64> {
    let mut s = value;
    for c in boundary {
        s += rot(c, kappa)?.mod1;
    }
    Ok(circle_dist(s, 0.0))
}

/// T_κ = −Σ_j Rot̃_κ(ρ̃(c_j)) for a bordered surface.
pub fn toledo_bordered(rep: &Representation, kappa: KappaClass, opts: &ToledoOptions) -> Result<ToledoReport> {
    if !rep.surface.is_bordered() {
        return Err(Error::InvalidInput("surface has no boundary".into()));
    }
    if rep.surface.euler() > -1 {
        return Err(Error::InvalidInput(format!("Euler characteristic {} is not negative", rep.surface.euler())));
    }
    let per_boundary = bordered_value(rep, kappa, opts.depth, None)?;
    let value = -per_boundary.iter().sum::<f64>();
    let lift_independence = if opts.check_lift_independence {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.shift_seed);
        let shifts: Vec<i64> = (0..rep.images.len()).map(|_| rng.random_range(-3..=3)).collect();
        let shifted = bordered_value(rep, kappa, opts.depth, Some(&shifts))?;
        Some((-shifted.iter().sum::<f64>() - value).abs())
    } else {
        None
    };
    let congruence_check = congruence(value, &rep.boundary_images(), kappa)?;
    Ok(ToledoReport {
        value,
        kappa,
        per_boundary,
        method: ToledoMethod::BoundaryFormula,
        congruence_check,
        lift_independence,
        integrality_residual: None,
    })
}

/// Closed surfaces: the product of cover commutators is central, (I, θ), and
/// T_κ = θ/2π. The sign is the one forced by cutting along [a_1,b_1] and
/// applying the boundary formula to both halves.
pub fn toledo_closed(rep: &Representation, kappa: KappaClass) -> Result<ToledoReport> {
    if rep.surface.is_bordered() {
        return Err(Error::InvalidInput("surface has boundary".into()));
    }
    let r = rep.relator_residual();
    if !(r <= RELATOR_TOL) {
        return Err(Error::RelatorViolated { residual: r });
    }
    let cr = CoverRep::new(rep, kappa, None)?;
    let mut z = CoverElement::identity(rep.n, kappa);
    for (a, b) in &rep.surface.handles {
        let (x, y) = (cr.eval(a)?, cr.eval(b)?);
        let c = cover_mul(&cover_mul(&x, &y)?, &cover_mul(&inverse(&x)?, &inverse(&y)?)?)?;
        z = cover_mul(&z, &c)?;
    }
    let value = z.theta / (2.0 * PI);
    Ok(ToledoReport {
        value,
        kappa,
        per_boundary: Vec::new(),
        method: ToledoMethod::ClosedFormula,
        congruence_check: circle_dist(value, 0.0),
        lift_independence: None,
        integrality_residual: Some((value - value.round()).abs()),
    })
}

pub fn toledo(rep: &Representation, kappa: KappaClass, opts: &ToledoOptions) -> Result<ToledoReport> {
    if rep.surface.is_bordered() {
        toledo_bordered(rep, kappa, opts)
    } else {
        toledo_closed(rep, kappa)
    }
}

fn calibration_cache() -> &'static Mutex<HashMap<(usize, i32), f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, i32), f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// T_κ of the pants model Δ∘h in Sp(2n,R), computed once per (n, κ).
pub fn pants_calibration(n: usize, kappa: KappaClass) -> Result<f64> {
    let key = (n, kappa.weight());
    if let Some(&v) = calibration_cache().lock().unwrap().get(&key) {
        return Ok(v);
    }
    let model = crate::constructors::pants_model(n)?;
    let opts = ToledoOptions { check_lift_independence: false, ..Default::default() };
    let v = toledo_bordered(&model, kappa, &opts)?.value;
    calibration_cache().lock().unwrap().insert(key, v);
    Ok(v)
}

/// Reference value of a maximal representation: the pants calibration scaled
/// by |χ|, which is the model value on any surface by additivity over a pants
/// decomposition.
pub fn maximal_value(surface: &SurfaceData, n: usize, kappa: KappaClass) -> Result<f64> {
    Ok(pants_calibration(n, kappa)? * surface.euler().unsigned_abs() as f64)
}

pub fn is_maximal(rep: &Representation, kappa: KappaClass, tol: f64) -> Result<bool> {
    let t = toledo(rep, kappa, &ToledoOptions { check_lift_independence: false, ..Default::default() })?;
    Ok((t.value - maximal_value(&rep.surface, rep.n, kappa)?).abs() <= tol)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MilnorWoodReport {
    pub value: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// |T_κ| ≤ M_κ with M_κ the calibrated maximal value.
pub fn milnor_wood_check(rep: &Representation, kappa: KappaClass, tol: f64) -> Result<MilnorWoodReport> {
    let t = toledo(rep, kappa, &ToledoOptions { check_lift_independence: false, ..Default::default() })?;
    let bound = maximal_value(&rep.surface, rep.n, kappa)?.abs();
    if t.value.abs() > bound + tol {
        return Err(Error::BoundViolated { value: t.value, bound });
    }
    Ok(MilnorWoodReport { value: t.value, bound, ratio: if bound > 0.0 { t.value.abs() / bound } else { 0.0 } })
}

/// One side of a cut: handle pairs and boundary curves, all written as words
/// in the generators of the whole surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutSide {
    pub handles: Vec<(Word, Word)>,
    pub boundary: Vec<Word>,
}

impl CutSide {
    pub fn euler(&self) -> i64 {
        2 - 2 * self.handles.len() as i64 - self.boundary.len() as i64
    }

    fn relator(&self) -> Word {
        let comms: Vec<Word> = self.handles.iter().map(|(a, b)| Word::commutator(a, b)).collect();
        Word::product(comms.iter().chain(&self.boundary))
    }
}

/// A separating curve C with the induced presentations of the two sides.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cut {
    pub curve: Word,
    pub sides: [CutSide; 2],
}

impl Cut {
    /// Check that the sides reassemble to the surface.
    pub fn validate(&self, surface: &SurfaceData) -> Result<()> {
        for (i, side) in self.sides.iter().enumerate() {
            if side.euler() > -1 {
                return Err(Error::InvalidCut(format!("side {} has Euler characteristic {}", i + 1, side.euler())));
            }
            if !side.relator().is_empty() {
                return Err(Error::InvalidCut(format!("side {} presentation does not close up", i + 1)));
            }
        }
        if self.sides[0].euler() + self.sides[1].euler() != surface.euler() {
            return Err(Error::InvalidCut("Euler characteristics do not add up".into()));
        }
        let key = |w: &Word| w.conjugacy_key();
        // on a closed surface a side boundary may differ from the curve by the relator
        let rel = surface.relator();
        let rel_keys = [key(&rel), key(&rel.inverse())];
        let matches = |b: &Word, t: &Word| {
            key(b) == key(t) || (!surface.is_bordered() && rel_keys.contains(&key(&t.inverse().concat(b))))
        };
        let mut parts: Vec<(usize, Word)> =
            self.sides.iter().enumerate().flat_map(|(i, s)| s.boundary.iter().map(move |b| (i, b.clone()))).collect();
        let mut sides_hit = Vec::new();
        for target in [self.curve.clone(), self.curve.inverse()] {
            let Some(i) = parts.iter().position(|(_, p)| matches(p, &target)) else {
                return Err(Error::InvalidCut("cut curve is not a boundary of both sides".into()));
            };
            sides_hit.push(parts.remove(i).0);
        }
        if sides_hit[0] == sides_hit[1] {
            return Err(Error::InvalidCut("cut curve must bound both sides".into()));
        }
        let mut rest: Vec<_> = parts.iter().map(|(_, w)| key(w)).collect();
        let mut outer: Vec<_> = surface.boundary_words.iter().map(key).collect();
        rest.sort();
        outer.sort();
        if rest != outer {
            return Err(Error::InvalidCut("remaining boundary curves differ from the surface's".into()));
        }
        Ok(())
    }

    /// The cut of a closed surface of genus g ≥ 2 along [a_1, b_1], for the
    /// standard presentation.
    pub fn closed_standard(surface: &SurfaceData) -> Result<Self> {
        if surface.is_bordered() || surface.genus < 2 {
            return Err(Error::InvalidCut("need a closed surface of genus at least 2".into()));
        }
        let (a, b) = surface.handles[0].clone();
        let c = Word::commutator(&a, &b);
        let rest: Vec<(Word, Word)> = surface.handles[1..].to_vec();
        let rest_comm = Word::product(rest.iter().map(|(x, y)| Word::commutator(x, y)).collect::<Vec<_>>().iter());
        Ok(Self {
            curve: c.clone(),
            sides: [
                CutSide { handles: vec![(a, b)], boundary: vec![c.inverse()] },
                CutSide { handles: rest, boundary: vec![rest_comm.inverse()] },
            ],
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdditivityReport {
    pub total: f64,
    pub sides: [f64; 2],
    pub residual: f64,
}

fn side_value(cr: &CoverRep, side: &CutSide, depth: u32) -> Result<f64> {
    let mut s = 0.0;
    for w in &side.boundary {
        s -= rot_lift_retry(&cr.eval(w)?, depth)?.value;
    }
    Ok(s)
}

/// |T(Σ) − T(Σ₁) − T(Σ₂)| for a separating cut.
pub fn additivity_check(rep: &Representation, cut: &Cut, kappa: KappaClass, depth: u32) -> Result<AdditivityReport> {
    cut.validate(&rep.surface)?;
    let opts = ToledoOptions { depth, check_lift_independence: false, ..Default::default() };
    let total = toledo(rep, kappa, &opts)?.value;
    let cr = CoverRep::new(rep, kappa, None)?;
    let s1 = side_value(&cr, &cut.sides[0], depth)?;
    let s2 = side_value(&cr, &cut.sides[1], depth)?;
    Ok(AdditivityReport { total, sides: [s1, s2], residual: (total - s1 - s2).abs() })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegralityReport {
    pub value: f64,
    pub numerator: Option<i64>,
    pub denominator: Option<u32>,
}

/// Smallest e ≤ 8 with x within tol of (1/e)Z.
pub fn nearest_fraction(x: f64, tol: f64) -> Option<(i64, u32)> {
    (1..=8u32).find_map(|e| {
        let k = (x * e as f64).round();
        ((x - k / e as f64).abs() < tol).then_some((k as i64, e))
    })
}

/// Toledo value on Hom^Š together with the grid it lies on.
pub fn integrality_check(rep: &Representation, kappa: KappaClass, depth: u32) -> Result<IntegralityReport> {
    for (c, w) in rep.boundary_images().iter().zip(&rep.surface.boundary_words) {
        if fixed_lagrangian(c)?.is_none() {
            return Err(Error::MembershipFailed(format!(
                "boundary {} fixes no Lagrangian",
                rep.surface.format_word(w)
            )));
        }
    }
    let opts = ToledoOptions { depth, check_lift_independence: false, ..Default::default() };
    let value = toledo(rep, kappa, &opts)?.value;
    let frac = nearest_fraction(value, 1e-6);
    Ok(IntegralityReport { value, numerator: frac.map(|f| f.0), denominator: frac.map(|f| f.1) })
}

/// Running lcm of observed denominators, an empirical estimate of e_G.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DenominatorStats {
    pub observed: Vec<u32>,
    pub unresolved: usize,
}

impl DenominatorStats {
    pub fn record(&mut self, r: &IntegralityReport) {
        match r.denominator {
            Some(e) => self.observed.push(e),
            None => self.unresolved += 1,
        }
    }

    pub fn exponent(&self) -> u32 {
        self.observed.iter().fold(1, |acc, &e| num_integer::lcm(acc, e))
    }
}

/// One sampled representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sample {
    pub id: usize,
    pub seed: u64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RangeSample {
    pub bound: f64,
    pub samples: Vec<Sample>,
    pub bins: Vec<usize>,
    pub coverage: f64,
    pub max_abs: f64,
    /// Largest congruence residual over all computed reports.
    pub max_congruence: f64,
    pub failures: usize,
}

/// Seed of sample `id` derived from the run seed.
pub fn derive_seed(seed: u64, id: usize) -> u64 {
    let mut z = seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A random representation: each free generator is exp(J·S) with S symmetric
/// of entries uniform in [−s, s], where the scale s is itself drawn from
/// [0, spread] per sample.
pub fn random_representation(surface: &SurfaceData, n: usize, spread: f64, seed: u64) -> Result<Representation> {
    if !surface.is_bordered() {
        return Err(Error::InvalidInput("random representations need a free fundamental group".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = spread * rng.random::<f64>();
    let images = (0..surface.names.len()).map(|_| random_symplectic(n, s, rng.random())).collect();
    Representation::new(surface.clone(), images)
}

/// Toledo values of random representations, binned at width M/50 on [−M, M].
pub fn range_sample(
    surface: &SurfaceData,
    n: usize,
    kappa: KappaClass,
    samples: usize,
    seed: u64,
    spread: f64,
    depth: u32,
) -> Result<RangeSample> {
    let bound = maximal_value(surface, n, kappa)?.abs();
    let opts = ToledoOptions { depth, check_lift_independence: false, ..Default::default() };
    let results: Vec<(usize, u64, Result<(f64, f64)>)> = (0..samples)
        .into_par_iter()
        .map(|id| {
            let s = derive_seed(seed, id);
            let v = random_representation(surface, n, spread, s).and_then(|rep| {
                let t = toledo_bordered(&rep, kappa, &opts)?;
                Ok((t.value, t.congruence_check))
            });
            (id, s, v)
        })
        .collect();
    let nbins = 100;
    let mut bins = vec![0usize; nbins];
    let mut out = Vec::with_capacity(samples);
    let mut failures = 0;
    let mut max_abs: f64 = 0.0;
    let mut max_congruence: f64 = 0.0;
    for (id, s, v) in results {
        match v {
            Ok((value, cong)) => {
                max_congruence = max_congruence.max(cong);
                max_abs = max_abs.max(value.abs());
                if bound > 0.0 {
                    let b = (((value + bound) / (2.0 * bound)) * nbins as f64).floor();
                    bins[(b.max(0.0) as usize).min(nbins - 1)] += 1;
                }
                out.push(Sample { id, seed: s, value });
            }
            Err(e) if e.is_input_error() => return Err(e),
            Err(_) => failures += 1,
        }
    }
    let coverage = bins.iter().filter(|&&c| c > 0).count() as f64 / nbins as f64;
    Ok(RangeSample { bound, samples: out, bins: if samples == 0 { Vec::new() } else { bins }, coverage, max_abs, max_congruence, failures })
}

/// Rot_κ(ρ(w)) for each word, as a value in [0, 1).
pub fn rot_of_words(rep: &Representation, words: &[Word], kappa: KappaClass) -> Result<Vec<f64>> {
    words.iter().map(|w| Ok(rot(&rep.evaluate(w), kappa)?.mod1)).collect()
}

/// Random reduced words of length 1..=max_len.
pub fn random_words(surface: &SurfaceData, count: usize, max_len: usize, seed: u64) -> Vec<Word> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = surface.names.len();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let len = rng.random_range(1..=max_len.max(1));
        let w = Word::from_letters((0..len).map(|_| (rng.random_range(0..k), if rng.random::<bool>() { 1 } else { -1 })));
        if !w.is_empty() {
            out.push(w);
        }
    }
    out
}
