//! Command-line front end: file formats, reports and subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constructors::{self, DeformSpec, FuchsianSpec};
use crate::cover::{self, canonical_lift, reference_lift, rot, rot_lift_retry};
use crate::error::{Error, Result};
use crate::lagrangian::{is_maximal_triple, is_transverse, kashiwara, kashiwara_auto, Lagrangian, Mode};
use crate::numkernel::{parse_rational, RationalMatrix, RealMatrix};
use crate::suites::{self, Check, SuiteConfig};
use crate::surface::{
    self, additivity_check, integrality_check, maximal_value, Cut, Representation, SurfaceData, ToledoOptions, Word,
};
use crate::symplectic::{check_symplectic, diagonal, krein_spectrum, rotation, KappaClass, SymplecticMatrix, CLUSTER_TOL};

/// Default directory for reports when --out is not given.
pub const OUT_DIR_ENV: &str = "TOLEDO_OUT_DIR";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "toledo", version, about = "Maslov indices, rotation numbers and Toledo invariants in Sp(2n,R)")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalOpts {
    /// Weight w of the class attached to det^w.
    #[arg(long = "kappa-w", global = true, default_value_t = 2, allow_negative_numbers = true)]
    pub kappa_w: i32,
    /// Homogenization depth.
    #[arg(long, global = true, default_value_t = cover::DEFAULT_DEPTH, value_parser = clap::value_parser!(u32).range(8..=30))]
    pub depth: u32,
    /// Tolerance for property checks.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Exact rational arithmetic where available.
    #[arg(long, global = true)]
    pub exact: bool,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub jobs: Option<usize>,
    /// Output file for the report (JSON) or table (CSV).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Rotation number of a matrix or named element.
    Rot {
        input: PathBuf,
        /// Also report Rot̃ of the canonical lift.
        #[arg(long)]
        lift: bool,
    },
    /// Kashiwara–Maslov index of a Lagrangian triple.
    Maslov { input: PathBuf },
    /// Toledo invariant of a representation file.
    Toledo { input: PathBuf },
    /// Run a named property suite.
    Verify { suite: String },
    /// Toledo values of random representations, as CSV.
    Sample {
        #[arg(long, default_value_t = 0)]
        genus: usize,
        #[arg(long, default_value_t = 3)]
        boundary: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3.0)]
        spread: f64,
    },
    /// Emit a representation file from a constructor.
    Construct(ConstructArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub kind: ConstructKind,
    /// Target rank of the diagonal embedding.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Boundary lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Vec<f64>,
    /// Length of the gluing curve.
    #[arg(long, default_value_t = 1.0)]
    pub cut: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub twist: f64,
    /// Conjugate by an orientation-reversing involution.
    #[arg(long)]
    pub reverse: bool,
    /// Deformation parameter (kind = deform-*).
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
    /// Per-factor rates (kind = deform-*).
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructKind {
    Pants,
    OneHoledTorus,
    Genus2,
    FourHoledSphere,
    TwoHoledTorus,
    DeformFourHoledSphere,
    DeformTwoHoledTorus,
    Trivial,
}

/// A matrix entry: a number or an exact "p/q" string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Num(f64),
    Text(String),
}

impl Entry {
    fn exact(&self) -> Result<num_rational::BigRational> {
        match self {
            Entry::Num(x) => num_rational::BigRational::from_float(*x)
                .ok_or_else(|| Error::Parse(format!("non-finite entry {x}"))),
            Entry::Text(s) => parse_rational(s),
        }
    }

    fn value(&self) -> Result<f64> {
        match self {
            Entry::Num(x) => Ok(*x),
            Entry::Text(s) => {
                use num_traits::ToPrimitive;
                parse_rational(s)?.to_f64().ok_or_else(|| Error::Parse(format!("entry '{s}' out of range")))
            }
        }
    }
}

/// Row-major matrix, nested by rows or flat.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixData {
    Rows(Vec<Vec<Entry>>),
    Flat(Vec<Entry>),
}

impl MatrixData {
    fn entries(&self, rows: usize, cols: usize) -> Result<Vec<&Entry>> {
        let flat: Vec<&Entry> = match self {
            MatrixData::Rows(r) => {
                if r.len() != rows || r.iter().any(|row| row.len() != cols) {
                    return Err(Error::DimensionMismatch(format!("expected {rows}×{cols} rows")));
                }
                r.iter().flatten().collect()
            }
            MatrixData::Flat(v) => v.iter().collect(),
        };
        if flat.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("expected {} entries, got {}", rows * cols, flat.len())));
        }
        Ok(flat)
    }

    pub fn real(&self, rows: usize, cols: usize) -> Result<RealMatrix> {
        let e = self.entries(rows, cols)?;
        let v = e.iter().map(|x| x.value()).collect::<Result<Vec<_>>>()?;
        Ok(RealMatrix::from_row_slice(rows, cols, &v))
    }

    pub fn rational(&self, rows: usize, cols: usize) -> Result<RationalMatrix> {
        let e = self.entries(rows, cols)?;
        Ok(RationalMatrix::from_vec(rows, cols, e.iter().map(|x| x.exact()).collect::<Result<Vec<_>>>()?))
    }

    fn from_real(m: &RealMatrix) -> Self {
        MatrixData::Rows((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Entry::Num(m[(i, j)])).collect()).collect())
    }

    fn guess_square_side(&self) -> usize {
        match self {
            MatrixData::Rows(r) => r.len(),
            MatrixData::Flat(v) => (v.len() as f64).sqrt().round() as usize,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub genus: usize,
    pub boundary: usize,
}

/// On-disk representation format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentationFile {
    pub n: usize,
    pub surface: SurfaceSpec,
    pub generators: BTreeMap<String, MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handles: Option<Vec<[String; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_words: Option<Vec<String>>,
}

fn default_handle_names(g: usize, names: &[String]) -> Option<Vec<[String; 2]>> {
    let has = |s: &str| names.iter().any(|n| n == s);
    if g == 1 && has("a") && has("b") {
        return Some(vec![["a".into(), "b".into()]]);
    }
    (1..=g)
        .map(|i| {
            let (a, b) = (format!("a{i}"), format!("b{i}"));
            (has(&a) && has(&b)).then(|| [format!("[{a}]"), format!("[{b}]")])
        })
        .collect()
}

impl RepresentationFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn into_representation(self) -> Result<Representation> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        let (g, b) = (self.surface.genus, self.surface.boundary);
        let mut names: Vec<String> = self.generators.keys().cloned().collect();
        let mut images = Vec::with_capacity(names.len());
        for name in &names {
            let m = self.generators[name].real(2 * n, 2 * n)?;
            let scale = crate::numkernel::max_abs(&m).max(1.0);
            images.push(check_symplectic(&m, 1e-8 * scale * scale).map_err(|e| match e {
                Error::NotSymplectic { residual } => {
                    Error::InvalidInput(format!("generator {name} is not symplectic (residual {residual:e})"))
                }
                other => other,
            })?);
        }
        let handle_names = match self.handles {
            Some(h) => Some(h),
            None => default_handle_names(g, &names),
        };
        let handle_names = match handle_names {
            Some(h) => h,
            None if g == 0 => Vec::new(),
            None => {
                return Err(Error::InvalidInput(format!(
                    "genus {g} needs a \"handles\" list or generators named a1, b1, …"
                )))
            }
        };
        let boundary_words = match self.boundary_words {
            Some(w) => w,
            None if b == 0 => Vec::new(),
            None => {
                // c1..c_{b−1} as generators; c_b derived, checked if also given
                let mut w: Vec<String> = (1..b).map(|j| format!("[c{j}]")).collect();
                let hs: String = handle_names.iter().map(|[x, y]| format!("[{x},{y}]")).collect();
                let last = format!("({hs}{})'", w.join(""));
                let cb = format!("c{b}");
                if let Some(i) = names.iter().position(|x| *x == cb) {
                    let derived = Word::parse(&last, &names)?;
                    let mut prod = SymplecticMatrix::identity(n);
                    for &(k, e) in derived.letters() {
                        prod = prod.mul(&if e > 0 { images[k].clone() } else { images[k].inverse() });
                    }
                    let r = crate::numkernel::max_abs(&(prod.matrix() - images[i].matrix()));
                    if r > 1e-6 {
                        return Err(Error::RelatorViolated { residual: r });
                    }
                    names.remove(i);
                    images.remove(i);
                }
                w.push(last);
                w
            }
        };
        // order generators by first appearance in the words, the rest after
        let mut order: Vec<usize> = Vec::new();
        for s in handle_names.iter().flatten().chain(boundary_words.iter()) {
            for &(k, _) in Word::parse(s, &names)?.letters() {
                if !order.contains(&k) {
                    order.push(k);
                }
            }
        }
        order.extend((0..names.len()).filter(|k| !order.contains(k)).collect::<Vec<_>>());
        let names: Vec<String> = order.iter().map(|&k| names[k].clone()).collect();
        let images: Vec<SymplecticMatrix> = order.iter().map(|&k| images[k].clone()).collect();
        let parse = |s: &str| Word::parse(s, &names);
        let handles = handle_names.iter().map(|[x, y]| Ok((parse(x)?, parse(y)?))).collect::<Result<Vec<_>>>()?;
        let bw = boundary_words.iter().map(|s| parse(s)).collect::<Result<Vec<_>>>()?;
        let surface = SurfaceData::new(g, b, names, handles, bw)?;
        Representation::new(surface, images)
    }

    pub fn from_representation(rep: &Representation) -> Self {
        let s = &rep.surface;
        let generators = s
            .names
            .iter()
            .zip(rep.images())
            .map(|(name, g)| (name.clone(), MatrixData::from_real(g.matrix())))
            .collect();
        Self {
            n: rep.n,
            surface: SurfaceSpec { genus: s.genus, boundary: s.boundary },
            generators,
            handles: (!s.handles.is_empty())
                .then(|| s.handles.iter().map(|(a, b)| [s.format_word(a), s.format_word(b)]).collect()),
            boundary_words: (s.is_bordered()).then(|| s.boundary_words.iter().map(|w| s.format_word(w)).collect()),
        }
    }
}

/// Input of the `rot` command: an explicit matrix or a named element such
/// as "rotation 60deg" or "diag 2 0.5".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotFile {
    #[serde(default)]
    pub matrix: Option<MatrixData>,
    #[serde(default)]
    pub constructor: Option<String>,
}

pub fn parse_named_element(s: &str) -> Result<SymplecticMatrix> {
    let mut it = s.split_whitespace();
    let kind = it.next().ok_or_else(|| Error::Parse("empty constructor".into()))?;
    let args: Vec<&str> = it.collect();
    match kind {
        "rotation" => {
            let angles = args
                .iter()
                .map(|a| {
                    if let Some(d) = a.strip_suffix("deg") {
                        d.parse::<f64>().map(f64::to_radians)
                    } else {
                        a.strip_suffix("rad").unwrap_or(a).parse::<f64>()
                    }
                    .map_err(|_| Error::Parse(format!("bad angle '{a}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            if angles.is_empty() {
                return Err(Error::Parse("rotation needs at least one angle".into()));
            }
            Ok(rotation(&angles))
        }
        "diag" => {
            let v = args
                .iter()
                .map(|a| a.parse::<f64>().map_err(|_| Error::Parse(format!("bad entry '{a}'"))))
                .collect::<Result<Vec<_>>>()?;
            if v.is_empty() || v.len() % 2 != 0 {
                return Err(Error::Parse("diag needs 2n entries".into()));
            }
            let n = v.len() / 2;
            for i in 0..n {
                if (v[i] * v[n + i] - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!("diag entries {} and {} are not reciprocal", v[i], v[n + i])));
                }
            }
            Ok(diagonal(&v[..n]))
        }
        other => Err(Error::Parse(format!("unknown element '{other}'"))),
    }
}

impl RotFile {
    pub fn element(&self) -> Result<SymplecticMatrix> {
        match (&self.matrix, &self.constructor) {
            (Some(m), None) => {
                let k = m.guess_square_side();
                let real = m.real(k, k)?;
                check_symplectic(&real, 1e-8 * crate::numkernel::max_abs(&real).max(1.0).powi(2))
            }
            (None, Some(c)) => parse_named_element(c),
            _ => Err(Error::InvalidInput("give exactly one of \"matrix\" or \"constructor\"".into())),
        }
    }
}

/// Input of the `maslov` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaslovFile {
    pub n: usize,
    /// Three 2n×n bases, row-major.
    pub lagrangians: Vec<MatrixData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportBody {
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timing {
    pub wall_time_s: f64,
    pub finished_unix_s: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub body: ReportBody,
    pub timing: Timing,
}

impl ReportBody {
    fn new(command: &str, config: Value, results: Value, checks: Vec<Check>) -> Self {
        let status = if checks.iter().all(|c| c.pass) { "pass" } else { "fail" };
        Self { command: command.into(), config, results, checks, status: status.into() }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }

    /// Canonical bytes of the body; identical runs give identical bytes.
    pub fn canonical(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn kappa(g: &GlobalOpts) -> Result<KappaClass> {
    KappaClass::new(g.kappa_w)
}

fn config_echo(g: &GlobalOpts, command: &Command) -> Value {
    json!({ "global": g, "command": command })
}

/// What a command produced: a report body, human-readable lines, and
/// optionally a CSV table in place of the JSON report.
pub struct Outcome {
    pub body: ReportBody,
    pub summary: Vec<String>,
    pub csv: Option<String>,
}

pub fn cmd_rot(input: &Path, lift: bool, g: &GlobalOpts) -> Result<(Value, Vec<Check>, Vec<String>)> {
    let text = read(input)?;
    let file: RotFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let m = file.element()?;
    let k = kappa(g)?;
    let r = rot(&m, k)?;
    let mut lines = vec![format!("Rot_κ (w={}) mod 1: {:.9}", k.weight(), r.mod1), format!("method: {:?}", r.method)];
    let spectrum = krein_spectrum(&m, CLUSTER_TOL).ok();
    if let Some(s) = &spectrum {
        lines.push("unit-circle spectrum (angle, multiplicity, Krein sign):".into());
        for p in &s.pairs {
            lines.push(format!("  {:+.9}  {}  {:+}", p.angle, p.multiplicity, p.krein_sign));
        }
        lines.push(format!("off-circle eigenvalues: {}", s.offcircle.len()));
    }
    let lifted = if lift {
        let x = canonical_lift(&m, k).or_else(|_| reference_lift(&m, k))?;
        let l = rot_lift_retry(&x, g.depth)?;
        lines.push(format!("Rot̃_κ of the canonical lift: {:.9}", l.value));
        Some(l)
    } else {
        None
    };
    let results = json!({ "n": m.n(), "rot_mod1": r.mod1, "method": r.method, "krein": spectrum, "lift": lifted });
    Ok((results, vec![], lines))
}

fn lagrangian_from(m: &MatrixData, n: usize, exact: bool) -> Result<Lagrangian> {
    if exact {
        Lagrangian::from_exact(m.rational(2 * n, n)?)
    } else {
        Lagrangian::new(m.real(2 * n, n)?, 1e-9)
    }
}

pub fn cmd_maslov(input: &Path, g: &GlobalOpts) -> Result<(Value, Vec<Check>, Vec<String>)> {
    let text = read(input)?;
    let file: MaslovFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    if file.lagrangians.len() != 3 {
        return Err(Error::InvalidInput(format!("need 3 Lagrangians, got {}", file.lagrangians.len())));
    }
    let has_text = file.lagrangians.iter().any(|m| {
        let f = match m {
            MatrixData::Rows(r) => r.iter().flatten().any(|e| matches!(e, Entry::Text(_))),
            MatrixData::Flat(v) => v.iter().any(|e| matches!(e, Entry::Text(_))),
        };
        f
    });
    let exact = g.exact || has_text;
    let l = file.lagrangians.iter().map(|m| lagrangian_from(m, file.n, exact)).collect::<Result<Vec<_>>>()?;
    let v = if exact { kashiwara(&l[0], &l[1], &l[2], Mode::Exact)? } else { kashiwara_auto(&l[0], &l[1], &l[2])? };
    let mode = if exact { Mode::Exact } else { Mode::default() };
    let pairs = [(0, 1), (1, 2), (0, 2)];
    let mut non_transverse = Vec::new();
    for (i, j) in pairs {
        if !is_transverse(&l[i], &l[j], mode)? {
            non_transverse.push(format!("L{}∩L{}", i + 1, j + 1));
        }
    }
    let maximal = is_maximal_triple(&l[0], &l[1], &l[2]);
    let mut lines = vec![format!("beta = {v}"), format!("maximal: {maximal}")];
    if !non_transverse.is_empty() {
        lines.push(format!("warning: not pairwise transverse ({})", non_transverse.join(", ")));
    }
    let results = json!({
        "n": file.n, "tau": v.tau, "beta": v.to_string(), "maximal": maximal, "exact": exact,
        "non_transverse_pairs": non_transverse,
    });
    Ok((results, vec![], lines))
}

pub fn load_representation(path: &Path) -> Result<Representation> {
    RepresentationFile::parse(&read(path)?)?.into_representation()
}

pub fn cmd_toledo(input: &Path, g: &GlobalOpts) -> Result<(Value, Vec<Check>, Vec<String>)> {
    let rep = load_representation(input)?;
    let k = kappa(g)?;
    let opts = ToledoOptions { depth: g.depth, check_lift_independence: rep.surface.is_bordered(), ..Default::default() };
    let t = surface::toledo(&rep, k, &opts)?;
    let reference = maximal_value(&rep.surface, rep.n, k)?;
    let maximal = (t.value - reference).abs() <= 1e-4;
    let mut checks = vec![
        Check::at_most("congruence", t.congruence_check, g.tol),
        Check::at_most("milnor_wood", t.value.abs() - reference.abs(), g.tol),
    ];
    if let Some(li) = t.lift_independence {
        checks.push(Check::at_most("lift_independence", li, g.tol));
    }
    let mut lines = vec![
        format!("T_κ (w={}) = {:.6}", k.weight(), t.value + 0.0),
        format!("method: {:?}", t.method),
        format!("maximal: {maximal} (reference {reference:.6})"),
    ];
    let mut extra = serde_json::Map::new();
    if let Some(r) = t.integrality_residual {
        checks.push(Check::at_most("integrality", r, g.tol));
    }
    if !rep.surface.is_bordered() && rep.surface.genus >= 2 {
        let a = additivity_check(&rep, &Cut::closed_standard(&rep.surface)?, k, g.depth)?;
        checks.push(Check::at_most("cut_consistency", a.residual, g.tol));
        lines.push(format!("cut along [a1,b1]: {:.6} + {:.6}", a.sides[0], a.sides[1]));
        extra.insert("cut".into(), serde_json::to_value(&a).unwrap());
    }
    match integrality_check(&rep, k, g.depth) {
        Ok(ir) => {
            if let (Some(p), Some(q)) = (ir.numerator, ir.denominator) {
                lines.push(format!("on the grid (1/{q})Z: {p}/{q}"));
            }
            extra.insert("integrality".into(), serde_json::to_value(&ir).unwrap());
        }
        Err(Error::MembershipFailed(msg)) => {
            extra.insert("integrality".into(), json!({ "membership": msg }));
        }
        Err(e) => return Err(e),
    }
    let results = json!({ "report": t, "maximal": maximal, "reference": reference, "extra": extra });
    Ok((results, checks, lines))
}

pub fn cmd_verify(suite: &str, g: &GlobalOpts) -> Result<(Value, Vec<Check>, Vec<String>)> {
    let cfg = SuiteConfig {
        samples: g.samples,
        seed: g.seed,
        depth: g.depth,
        tol: g.tol,
        exact: g.exact,
        kappa: kappa(g)?,
        ..Default::default()
    };
    let r = suites::run_suite(suite, &cfg)?;
    let mut lines = vec![format!("suite {}: {}", r.suite, if r.pass { "pass" } else { "FAIL" })];
    for c in &r.checks {
        lines.push(format!("  [{}] {} = {} (threshold {})", if c.pass { "ok" } else { "FAIL" }, c.name, c.value, c.threshold));
    }
    Ok((r.data, r.checks, lines))
}

pub fn cmd_sample(genus: usize, boundary: usize, n: usize, spread: f64, g: &GlobalOpts) -> Result<(Value, Vec<Check>, Vec<String>, String)> {
    let s = SurfaceData::standard(genus, boundary)?;
    if !s.is_bordered() {
        return Err(Error::InvalidInput("sampling needs a bordered surface".into()));
    }
    let samples = g.samples.unwrap_or(1000);
    let r = surface::range_sample(&s, n, kappa(g)?, samples, g.seed, spread, g.depth)?;
    let mut csv = String::from("sample_id,seed,T_value\n");
    for x in &r.samples {
        csv.push_str(&format!("{},{},{}\n", x.id, x.seed, x.value + 0.0));
    }
    let checks = vec![Check::at_most("max_abs_minus_bound", r.max_abs - r.bound, g.tol)];
    let lines = vec![format!(
        "{} samples, bound {:.6}, max |T| {:.6}, coverage {:.2}",
        r.samples.len(),
        r.bound,
        r.max_abs,
        r.coverage
    )];
    let results = json!({ "bound": r.bound, "coverage": r.coverage, "bins": r.bins, "failures": r.failures });
    Ok((results, checks, lines, csv))
}

pub fn construct(a: &ConstructArgs, seed: u64) -> Result<Representation> {
    let lengths = |k: usize, default: f64| -> Result<Vec<f64>> {
        match a.lengths.len() {
            0 => Ok(vec![default; k]),
            m if m == k => Ok(a.lengths.clone()),
            m => Err(Error::InvalidInput(format!("expected {k} lengths, got {m}"))),
        }
    };
    let spec = match a.kind {
        ConstructKind::Pants => {
            let l = lengths(3, 1.0)?;
            Some(FuchsianSpec::Pants { lengths: [l[0], l[1], l[2]] })
        }
        ConstructKind::OneHoledTorus => Some(FuchsianSpec::OneHoledTorus { length: lengths(1, 1.0)?[0], twist: a.twist }),
        ConstructKind::Genus2 => Some(FuchsianSpec::Genus2Closed { length: lengths(1, 1.5)?[0], twist: a.twist }),
        ConstructKind::FourHoledSphere | ConstructKind::DeformFourHoledSphere => {
            let l = lengths(4, 1.0)?;
            Some(FuchsianSpec::FourHoledSphere { lengths: [l[0], l[1], l[2], l[3]], cut: a.cut, twist: a.twist })
        }
        ConstructKind::TwoHoledTorus | ConstructKind::DeformTwoHoledTorus => {
            let l = lengths(2, 1.0)?;
            Some(FuchsianSpec::TwoHoledTorus { lengths: [l[0], l[1]], cut: a.cut, twist: a.twist })
        }
        ConstructKind::Trivial => None,
    };
    let rep = match (a.kind, spec) {
        (ConstructKind::DeformFourHoledSphere | ConstructKind::DeformTwoHoledTorus, Some(base)) => {
            let epsilon = if a.epsilon.is_empty() { (1..=a.n).map(|i| i as f64 / a.n as f64).collect() } else { a.epsilon.clone() };
            constructors::deform_section9(&DeformSpec { base, n: a.n, t: a.t, epsilon, seed })?
        }
        (_, Some(spec)) => constructors::embed_diagonal(&constructors::fuchsian(&spec)?, a.n)?,
        (_, None) => Representation::trivial(SurfaceData::pants(), a.n),
    };
    Ok(if a.reverse { constructors::reverse_orientation(&rep) } else { rep })
}

fn write_out(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Rot { .. } => "rot",
        Command::Maslov { .. } => "maslov",
        Command::Toledo { .. } => "toledo",
        Command::Verify { .. } => "verify",
        Command::Sample { .. } => "sample",
        Command::Construct(_) => "construct",
    }
}

fn default_name(command: &Command) -> String {
    match command {
        Command::Rot { .. } => "rot.json".into(),
        Command::Maslov { .. } => "maslov.json".into(),
        Command::Toledo { .. } => "toledo.json".into(),
        Command::Verify { suite } => format!("verify-{suite}.json"),
        Command::Sample { .. } => "sample.csv".into(),
        Command::Construct(_) => "representation.json".into(),
    }
}

/// Where to write: --out, else the directory named by the environment
/// variable, else nowhere (the report goes to stdout).
fn out_path(g: &GlobalOpts, command: &Command) -> Option<PathBuf> {
    g.out.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(default_name(command))))
}

fn exit_code(e: &Error) -> i32 {
    if e.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERIC
    }
}

/// Run the parsed command. Returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let start = Instant::now();
    let g = &cli.global;
    if let Some(j) = g.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let out = out_path(g, &cli.command);
    let config = config_echo(g, &cli.command);
    let produced: Result<(Value, Vec<Check>, Vec<String>, Option<String>)> = match &cli.command {
        Command::Rot { input, lift } => cmd_rot(input, *lift, g).map(|(a, b, c)| (a, b, c, None)),
        Command::Maslov { input } => cmd_maslov(input, g).map(|(a, b, c)| (a, b, c, None)),
        Command::Toledo { input } => cmd_toledo(input, g).map(|(a, b, c)| (a, b, c, None)),
        Command::Verify { suite } => cmd_verify(suite, g).map(|(a, b, c)| (a, b, c, None)),
        Command::Sample { genus, boundary, n, spread } => {
            cmd_sample(*genus, *boundary, *n, *spread, g).map(|(a, b, c, d)| (a, b, c, Some(d)))
        }
        Command::Construct(a) => construct(a, g.seed).map(|rep| {
            let file = RepresentationFile::from_representation(&rep);
            let text = serde_json::to_string_pretty(&file).expect("serializable") + "\n";
            (Value::Null, vec![], vec![], Some(text))
        }),
    };
    let (results, checks, lines, raw) = match produced {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if let Some(raw) = raw {
        // CSV tables and representation files are written as they are
        let res = match &out {
            Some(p) => write_out(p, &raw),
            None => std::io::stdout().write_all(raw.as_bytes()).map_err(|e| Error::InvalidInput(e.to_string())),
        };
        if let Err(e) = res {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
        for l in &lines {
            eprintln!("{l}");
        }
        return if checks.iter().all(|c| c.pass) { EXIT_PASS } else { EXIT_VIOLATION };
    }
    let body = ReportBody::new(command_name(&cli.command), config, results, checks);
    let timing = Timing {
        wall_time_s: start.elapsed().as_secs_f64(),
        finished_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    for l in &lines {
        if out.is_some() {
            println!("{l}");
        } else {
            eprintln!("{l}");
        }
    }
    let passed = body.passed();
    let report = Report { body, timing };
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    match &out {
        Some(p) => {
            if let Err(e) = write_out(p, &text) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
        }
        None => print!("{text}"),
    }
    if passed {
        EXIT_PASS
    } else {
        EXIT_VIOLATION
    }
}

/// Parse arguments and run; clap handles --help and usage errors.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INPUT
            } else {
                EXIT_PASS
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_elements() {
        let r = parse_named_element("rotation 60deg").unwrap();
        assert!((rot(&r, KappaClass::STANDARD).unwrap().mod1 - 1.0 / 3.0).abs() < 1e-12);
        let d = parse_named_element("diag 2 0.5").unwrap();
        assert_eq!(rot(&d, KappaClass::STANDARD).unwrap().mod1, 0.0);
        assert!(parse_named_element("diag 2 3").is_err());
        assert!(parse_named_element("shear 1").is_err());
    }

    #[test]
    fn representation_file_round_trip() {
        let rep = constructors::pants_model(2).unwrap();
        let file = RepresentationFile::from_representation(&rep);
        let text = serde_json::to_string(&file).unwrap();
        let back = RepresentationFile::parse(&text).unwrap().into_representation().unwrap();
        assert_eq!(back.surface, rep.surface);
        assert_eq!(back.images(), rep.images());
        let closed = constructors::fuchsian(&FuchsianSpec::Genus2Closed { length: 1.5, twist: 0.0 }).unwrap();
        let text = serde_json::to_string(&RepresentationFile::from_representation(&closed)).unwrap();
        let back = RepresentationFile::parse(&text).unwrap().into_representation().unwrap();
        assert_eq!(back.surface, closed.surface);
    }

    #[test]
    fn custom_words_and_exact_entries() {
        let text = r#"{"n":1,"surface":{"genus":0,"boundary":3},
            "generators":{"a":[["2","0"],["0","1/2"]],"b":[[1,1],[0,1]]},
            "boundary_words":["a","b","b'a'"]}"#;
        let rep = RepresentationFile::parse(text).unwrap().into_representation().unwrap();
        assert_eq!(rep.surface.boundary_words.len(), 3);
        let bad = text.replace("\"b'a'\"", "\"a'b'\"");
        assert!(RepresentationFile::parse(&bad).unwrap().into_representation().is_err());
        let unknown = text.replace("\"b'a'\"", "\"z\"");
        assert!(matches!(
            RepresentationFile::parse(&unknown).unwrap().into_representation(),
            Err(Error::UnknownGenerator(_))
        ));
    }

    #[test]
    fn derived_last_boundary_is_checked() {
        let rep = constructors::pants_model(1).unwrap();
        let mut file = RepresentationFile::from_representation(&rep);
        file.boundary_words = None;
        let c3 = rep.boundary_images()[2].clone();
        file.generators.insert("c3".into(), MatrixData::from_real(c3.matrix()));
        let back = file.clone().into_representation().unwrap();
        assert_eq!(back.surface.names.len(), 2);
        file.generators.insert("c3".into(), MatrixData::from_real(rep.images()[0].matrix()));
        assert!(matches!(file.into_representation(), Err(Error::RelatorViolated { .. })));
    }

    #[test]
    fn parse_errors_have_positions() {
        let e = RepresentationFile::parse("{\n \"n\": 1,\n \"surface\": oops}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }
}
