//! Bounding, comparison and benchmark sweeps behind the `ism` binary.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::sync::Arc;
use std::thread;
use std::time::Instant;

use ism_core::expr::Expr;
use ism_core::oracle::{
    hausdorff_enclosure, sample_image, ImageSample, SampleMode, DEFAULT_BUDGET,
};
use ism_core::{Domain, Interval};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Test function of the two-dimensional experiments.
pub const FIG1_EXPR: &str = "exp(sin(x1)+sin(x2)*cos(x2))";

/// The three-dimensional map that is composed with itself in the recursion experiment.
pub const RECURSION_EXPR: &str = "0.1*(exp(-sin(4*x1)+x2-x2*x2-x1*x1)-1); \
     0.1*cos(10*x2+0.2*tan(0.2*x3)) - 0.4*x2*x2; \
     0.01*sin(cos(x3))";

pub const FIG1_X1_MAX: [f64; 3] = [0.1, 1.0, 10.0];
pub const FIG1_BRANCHES: [usize; 3] = [1, 10, 100];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] ism_core::Error),
    #[error("invalid domain `{text}`: {msg}")]
    Domain { text: String, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if matches!(e.root(), ism_core::Error::SoundnessViolation(_)) => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Parses `x1=[a,b];x2=[c,d]`. Endpoints follow the expression grammar, so `pi`,
/// `-0.5*pi` and similar are accepted; each endpoint is rounded outward.
pub fn parse_domain(text: &str) -> Result<Vec<Interval>> {
    let bad = |msg: String| CliError::Domain {
        text: text.to_string(),
        msg,
    };
    let mut axes: Vec<Option<Interval>> = Vec::new();
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, rest) = part
            .split_once('=')
            .ok_or_else(|| bad(format!("expected `xK=[lo,hi]`, found `{part}`")))?;
        let index: usize = name
            .trim()
            .strip_prefix('x')
            .and_then(|k| k.parse().ok())
            .filter(|&k| k >= 1)
            .ok_or_else(|| bad(format!("`{}` is not a variable name", name.trim())))?;
        let body = rest
            .trim()
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| bad(format!("bounds of x{index} must be written `[lo,hi]`")))?;
        let (lo, hi) = body
            .split_once(',')
            .ok_or_else(|| bad(format!("bounds of x{index} need two endpoints")))?;
        let lo = endpoint(lo).map_err(|e| bad(e.to_string()))?.lo();
        let hi = endpoint(hi).map_err(|e| bad(e.to_string()))?.hi();
        let iv = Interval::new(lo, hi)
            .map_err(|_| bad(format!("x{index}: [{lo}, {hi}] is not an interval")))?;
        if axes.len() < index {
            axes.resize(index, None);
        }
        if axes[index - 1].replace(iv).is_some() {
            return Err(bad(format!("x{index} given twice")));
        }
    }
    if axes.is_empty() {
        return Err(bad("no axes given".into()));
    }
    axes.into_iter()
        .enumerate()
        .map(|(i, a)| a.ok_or_else(|| bad(format!("x{} missing", i + 1))))
        .collect()
}

fn endpoint(text: &str) -> ism_core::Result<Interval> {
    let e = Expr::parse(text.trim(), 0)?;
    Ok(e.eval_interval(&[])?[0])
}

/// Default per-axis grid for an `n`-dimensional oracle: the largest `G` with `Gⁿ ≤ 10⁶`.
pub fn default_grid(n: usize) -> usize {
    let mut g = (DEFAULT_BUDGET as f64).powf(1.0 / n as f64).round() as usize;
    while (g as u128).pow(n as u32) > DEFAULT_BUDGET {
        g -= 1;
    }
    g.max(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub isa: Vec<Interval>,
    /// `None` when natural interval evaluation overflows or leaves a domain.
    pub ia: Vec<Option<Interval>>,
}

pub fn bound(expr: &str, bx: &[Interval], branches: usize) -> Result<Bound> {
    let e = Expr::parse(expr, bx.len())?;
    let d = Domain::shared(bx.to_vec(), branches)?;
    let isa = isa_enclosure(&e, &d)?;
    let ia = match ia_enclosure(&e, bx) {
        Some(v) => v.into_iter().map(Some).collect(),
        None => vec![None; e.output_count()],
    };
    Ok(Bound { isa, ia })
}

pub fn format_bound(b: &Bound) -> String {
    let mut s = String::new();
    for (k, (isa, ia)) in b.isa.iter().zip(&b.ia).enumerate() {
        let ia = match ia {
            Some(iv) => format!("[{}, {}]", iv.lo(), iv.hi()),
            None => "unbounded".into(),
        };
        let _ = writeln!(
            s,
            "f{}: lambda = {}  mu = {}  ia = {}",
            k + 1,
            isa.lo(),
            isa.hi(),
            ia
        );
    }
    s
}

fn isa_enclosure(e: &Expr, d: &Arc<Domain>) -> ism_core::Result<Vec<Interval>> {
    Ok(e.eval_ism(d)?
        .iter()
        .map(|m| m.range().as_interval())
        .collect())
}

/// `None` stands for an unbounded enclosure.
fn ia_enclosure(e: &Expr, bx: &[Interval]) -> Option<Vec<Interval>> {
    e.eval_interval(bx).ok()
}

fn distance(img: &ImageSample, enc: Option<&[Interval]>) -> ism_core::Result<f64> {
    match enc {
        Some(enc) => hausdorff_enclosure(img, enc),
        None => Ok(f64::INFINITY),
    }
}

fn endpoints(iv: Option<Interval>) -> (f64, f64) {
    iv.map_or((f64::NEG_INFINITY, f64::INFINITY), |iv| (iv.lo(), iv.hi()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub expr: String,
    pub branches: usize,
    pub seed: u64,
    pub isa: Interval,
    pub ia: Option<Interval>,
    pub oracle: Interval,
    pub dh_isa: f64,
    pub dh_ia: f64,
    pub wall_ms: f64,
}

impl CompareRow {
    pub const HEADER: &'static str =
        "expr,N,seed,isa_lo,isa_hi,ia_lo,ia_hi,oracle_lo,oracle_hi,dH_isa,dH_ia,wall_ms";

    pub fn to_csv(&self) -> String {
        let (ia_lo, ia_hi) = endpoints(self.ia);
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&self.expr),
            self.branches,
            self.seed,
            self.isa.lo(),
            self.isa.hi(),
            ia_lo,
            ia_hi,
            self.oracle.lo(),
            self.oracle.hi(),
            self.dh_isa,
            self.dh_ia,
            self.wall_ms
        )
    }
}

/// Scalar comparison of ISA and natural interval evaluation against a grid oracle.
pub fn compare(
    expr: &str,
    bx: &[Interval],
    branches: usize,
    grid: usize,
    seed: u64,
) -> Result<CompareRow> {
    let start = Instant::now();
    let e = Expr::parse(expr, bx.len())?;
    if e.output_count() != 1 {
        return Err(CliError::Usage(
            "compare expects a scalar expression".into(),
        ));
    }
    let d = Domain::shared(bx.to_vec(), branches)?;
    let isa = isa_enclosure(&e, &d)?;
    let ia = ia_enclosure(&e, bx);
    let img = sample_image(&e, bx, SampleMode::Grid { per_axis: grid }, u128::MAX)?;
    let dh_isa = distance(&img, Some(&isa))?;
    let dh_ia = distance(&img, ia.as_deref())?;
    Ok(CompareRow {
        expr: expr.to_string(),
        branches,
        seed,
        isa: isa[0],
        ia: ia.map(|v| v[0]),
        oracle: img.hull()[0],
        dh_isa,
        dh_ia,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes `# key=value` metadata lines, the header and the rows.
pub fn write_csv(
    out: &mut impl Write,
    meta: &[(&str, String)],
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> io::Result<()> {
    writeln!(out, "# version={VERSION}")?;
    for (k, v) in meta {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// `count` log-spaced values from `lo` to `hi`, both ends exact.
pub fn log_sweep(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![hi],
        _ => (0..count)
            .map(|i| match i {
                0 => lo,
                _ if i == count - 1 => hi,
                _ => lo * (hi / lo).powf(i as f64 / (count - 1) as f64),
            })
            .collect(),
    }
}

/// Runs `f` over `items` on all available cores, keeping the input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(items.len().max(1));
    let chunk = items.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().unwrap())
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Config {
    pub points: usize,
    pub grid: usize,
    pub seed: u64,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Fig1Config {
            points: 40,
            grid: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Row {
    pub x2max: f64,
    /// One entry per `FIG1_BRANCHES`.
    pub dh_isa: [Option<f64>; 3],
    pub dh_ia: Option<f64>,
    pub warnings: Vec<String>,
}

impl Fig1Row {
    pub const HEADER: &'static str = "x2max,dH_isa_N1,dH_isa_N10,dH_isa_N100,dH_ia";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.x2max,
            cell(self.dh_isa[0]),
            cell(self.dh_isa[1]),
            cell(self.dh_isa[2]),
            cell(self.dh_ia)
        )
    }
}

/// Overestimation of ISA with N = 1, 10, 100 and of IA on `[0, x1max] × [0, x̄₂]`.
pub fn fig1_sweep(x1max: f64, cfg: &Fig1Config) -> Result<Vec<Fig1Row>> {
    let e = Expr::parse(FIG1_EXPR, 2)?;
    let sweep = log_sweep(0.1, 20.0, cfg.points);
    let rows = par_map(&sweep, |&x2max| fig1_point(&e, x1max, x2max, cfg.grid));
    rows.into_iter().collect()
}

fn fig1_point(e: &Expr, x1max: f64, x2max: f64, grid: usize) -> Result<Fig1Row> {
    let bx = vec![Interval::new(0.0, x1max)?, Interval::new(0.0, x2max)?];
    let img = sample_image(e, &bx, SampleMode::Grid { per_axis: grid }, u128::MAX)?;
    let mut warnings = Vec::new();
    let mut dh_isa = [None; 3];
    for (slot, &n) in dh_isa.iter_mut().zip(&FIG1_BRANCHES) {
        let d = Domain::shared(bx.clone(), n)?;
        match isa_enclosure(e, &d) {
            Ok(enc) => *slot = Some(distance(&img, Some(&enc))?),
            Err(err) => warnings.push(format!("x1max={x1max} x2max={x2max} N={n}: {err}")),
        }
    }
    let dh_ia = Some(distance(&img, ia_enclosure(e, &bx).as_deref())?);
    Ok(Fig1Row {
        x2max,
        dh_isa,
        dh_ia,
        warnings,
    })
}

pub fn fig1_csv(
    out: &mut impl Write,
    x1max: f64,
    cfg: &Fig1Config,
    rows: &[Fig1Row],
) -> io::Result<()> {
    let meta = [
        ("seed", cfg.seed.to_string()),
        ("N", "1,10,100".to_string()),
        ("grid", format!("{}x{}", cfg.grid, cfg.grid)),
        (
            "config",
            format!(
                "expr={FIG1_EXPR} domain=[0,{x1max}]x[0,x2max] points={}",
                cfg.points
            ),
        ),
    ];
    write_csv(
        out,
        &meta,
        Fig1Row::HEADER,
        rows.iter().map(Fig1Row::to_csv),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursionConfig {
    pub depth: usize,
    pub branches: usize,
    pub grid: usize,
    pub seed: u64,
}

impl Default for RecursionConfig {
    fn default() -> Self {
        RecursionConfig {
            depth: 10,
            branches: 20,
            grid: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecursionRow {
    pub k: usize,
    pub dh_isa: Option<f64>,
    pub dh_ia: Option<f64>,
    pub hull: Vec<Interval>,
    pub warnings: Vec<String>,
}

impl RecursionRow {
    pub const HEADER: &'static str =
        "k,dH_isa,dH_ia,hull1_lo,hull1_hi,hull2_lo,hull2_hi,hull3_lo,hull3_hi";

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},{},{}", self.k, cell(self.dh_isa), cell(self.dh_ia));
        for h in &self.hull {
            let _ = write!(s, ",{},{}", h.lo(), h.hi());
        }
        s
    }
}

pub fn recursion_domain() -> Vec<Interval> {
    let a = Interval::new(-0.25 * PI, 0.25 * PI).unwrap();
    let b = Interval::new(-0.5 * PI, 0.5 * PI).unwrap();
    vec![a, b, b]
}

/// Overestimation of ISA and IA for `f₁ ∘ ⋯ ∘ f₁` (k-fold), k = 1..=depth.
pub fn recursion_sweep(cfg: &RecursionConfig) -> Result<Vec<RecursionRow>> {
    let f1 = Expr::parse(RECURSION_EXPR, 3)?;
    let bx = recursion_domain();
    let d = Domain::shared(bx.clone(), cfg.branches)?;
    let ks: Vec<usize> = (1..=cfg.depth).collect();
    let rows = par_map(&ks, |&k| -> Result<RecursionRow> {
        let fk = f1.self_compose(k)?;
        let img = sample_image(&fk, &bx, SampleMode::Grid { per_axis: cfg.grid }, u128::MAX)?;
        let mut warnings = Vec::new();
        let dh_isa = match isa_enclosure(&fk, &d) {
            Ok(enc) => Some(distance(&img, Some(&enc))?),
            Err(err) => {
                warnings.push(format!("k={k}: {err}"));
                None
            }
        };
        let dh_ia = Some(distance(&img, ia_enclosure(&fk, &bx).as_deref())?);
        Ok(RecursionRow {
            k,
            dh_isa,
            dh_ia,
            hull: img.hull().to_vec(),
            warnings,
        })
    });
    rows.into_iter().collect()
}

pub fn recursion_csv(
    out: &mut impl Write,
    cfg: &RecursionConfig,
    rows: &[RecursionRow],
) -> io::Result<()> {
    let meta = [
        ("seed", cfg.seed.to_string()),
        ("N", cfg.branches.to_string()),
        ("grid", format!("{0}x{0}x{0}", cfg.grid)),
        (
            "config",
            format!(
                "expr={RECURSION_EXPR} domain=[-0.25pi,0.25pi]x[-0.5pi,0.5pi]^2 depth={}",
                cfg.depth
            ),
        ),
    ];
    write_csv(
        out,
        &meta,
        RecursionRow::HEADER,
        rows.iter().map(RecursionRow::to_csv),
    )
}
