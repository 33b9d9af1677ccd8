//! Command implementations behind the `aspiro` binary.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use aspiro_core::aspiration::{
    prepare_frame, run_episode, CandidateSelector, PreparedFrame, SetupError, UniformSelector,
};
use aspiro_core::envs::{random_binary_tree, GeneratorSpec};
use aspiro_core::mdp::{validate_environment, EnvFile, EnvFileError, ValidationReport};
use aspiro_core::oracle::{exact_policy_expectation, EnumBudget, OracleError};
use aspiro_core::reference::{find_reference_policies, ReferenceError, SearchOptions};
use aspiro_core::{
    AspirationFile, CriterionWeights, DepthInfo, Environment, PlanConfig, PlanContext, PlanError, Polytope, Schedule,
    SoftminSelector, StepMode, TraceRecord, Variant,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

/// RNG stream reserved for the reference-policy search.
const FRAME_STREAM: u64 = u64::MAX;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    EnvFile { path: PathBuf, source: EnvFileError },
    #[error("invalid environment:\n{0}")]
    Invalid(ValidationReport),
    #[error("infeasible aspiration: {0}")]
    Infeasible(String),
    #[error("{0}; use `simulate` for Monte Carlo estimates instead")]
    Budget(String),
    #[error(transparent)]
    Plan(PlanError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
}

impl CliError {
    /// 0 success, 1 input or feasibility failure, 2 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Plan(e) if e.is_invariant_violation() => 2,
            _ => 1,
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Infeasible(msg) => CliError::Infeasible(msg),
            other => CliError::Plan(other),
        }
    }
}

impl From<SetupError> for CliError {
    fn from(e: SetupError) -> Self {
        match e {
            SetupError::Infeasible { gap, .. } => CliError::Infeasible(format!(
                "no policy reaches the aspiration; the occupancy LP has a Farkas certificate with gap {gap:.3e}"
            )),
            SetupError::Reference(r) => CliError::Reference(r),
            SetupError::Values(v) => CliError::Usage(v.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Plan(p) => p.into(),
            OracleError::Budget { .. } | OracleError::ZeroBudget => CliError::Budget(e.to_string()),
            OracleError::Geometry(g) => CliError::Plan(PlanError::Geometry(g)),
        }
    }
}

/// A generator spec or a path to an environment file.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvSource {
    Generator(GeneratorSpec),
    File(PathBuf),
}

impl FromStr for EnvSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let name = s.split_once(':').map_or(s, |(n, _)| n);
        if matches!(name, "binary-tree" | "gridworld" | "random-dag") {
            s.parse().map(EnvSource::Generator).map_err(|e| format!("{e}"))
        } else {
            Ok(EnvSource::File(PathBuf::from(s)))
        }
    }
}

/// `point:x1,...`, `box:lo1,...:hi1,...`, or a path to an aspiration file.
#[derive(Clone, Debug, PartialEq)]
pub enum AspirationSource {
    Point(Vec<f64>),
    Box(Vec<f64>, Vec<f64>),
    File(PathBuf),
}

fn parse_vec(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}`"))).collect()
}

impl FromStr for AspirationSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(rest) = s.strip_prefix("point:") {
            return Ok(AspirationSource::Point(parse_vec(rest)?));
        }
        if let Some(rest) = s.strip_prefix("box:") {
            let (lo, hi) = rest.split_once(':').ok_or("box needs `lo:hi`")?;
            return Ok(AspirationSource::Box(parse_vec(lo)?, parse_vec(hi)?));
        }
        Ok(AspirationSource::File(PathBuf::from(s)))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub env: EnvSource,
    pub aspiration: AspirationSource,
    pub seed: u64,
    pub variant: Variant,
    pub schedule: Schedule,
    pub mode: StepMode,
    pub criteria: Option<CriterionWeights>,
    pub episodes: usize,
    pub trace_out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn new(env: EnvSource, aspiration: AspirationSource) -> Self {
        Self {
            env,
            aspiration,
            seed: 0,
            variant: Variant::Shrink,
            schedule: Schedule::None,
            mode: StepMode::Sampled,
            criteria: None,
            episodes: 1000,
            trace_out: None,
            threads: None,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

pub fn load_env(src: &EnvSource) -> Result<Environment, CliError> {
    match src {
        EnvSource::Generator(g) => g.generate().map_err(|e| CliError::Usage(e.to_string())),
        EnvSource::File(path) => match EnvFile::load(&read(path)?) {
            Ok(env) => Ok(env),
            Err(EnvFileError::Invalid(r)) => Err(CliError::Invalid(r)),
            Err(source) => Err(CliError::EnvFile { path: path.clone(), source }),
        },
    }
}

pub fn load_aspiration(src: &AspirationSource) -> Result<Polytope, CliError> {
    let bad = |e: aspiro_core::GeometryError| CliError::Usage(format!("bad aspiration: {e}"));
    match src {
        AspirationSource::Point(x) => Ok(Polytope::point(x.clone())),
        AspirationSource::Box(lo, hi) => {
            if lo.len() != hi.len() {
                return Err(CliError::Usage("box bounds differ in length".into()));
            }
            Polytope::aabb(lo, hi).map_err(bad)
        }
        AspirationSource::File(path) => {
            let f: AspirationFile =
                serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            f.into_polytope().map_err(bad)
        }
    }
}

/// Everything a planning command needs, loaded and checked.
pub struct Session {
    pub env: Environment,
    pub depth: DepthInfo,
    pub e0: Polytope,
    pub prepared: PreparedFrame,
    pub config: PlanConfig,
    selector: Box<dyn CandidateSelector>,
}

impl Session {
    pub fn open(cfg: &RunConfig) -> Result<Self, CliError> {
        let env = load_env(&cfg.env)?;
        let e0 = load_aspiration(&cfg.aspiration)?;
        Self::from_parts(env, e0, cfg)
    }

    pub fn from_parts(env: Environment, e0: Polytope, cfg: &RunConfig) -> Result<Self, CliError> {
        if e0.dim() != env.dim() {
            return Err(CliError::Usage(format!(
                "aspiration has dimension {}, environment has {}",
                e0.dim(),
                env.dim()
            )));
        }
        let depth = DepthInfo::new(&env).map_err(|e| CliError::Plan(e.into()))?;
        let config = PlanConfig { variant: cfg.variant, schedule: cfg.schedule, mode: cfg.mode, check_invariants: true };
        let selector: Box<dyn CandidateSelector> = match &cfg.criteria {
            Some(w) => Box::new(SoftminSelector::new(&env, &depth, w.clone(), None, EnumBudget::default().max_pairs)),
            None => Box::new(UniformSelector),
        };
        // variant/dimension consistency before any LP work
        let check = aspiro_core::reference::build_reference_simplices(
            &env,
            &depth,
            vec![aspiro_core::PurePolicy::constant(env.n_states(), 0); env.dim() + 1],
            vec![0.0; env.dim()],
        )?;
        PlanContext::new(&env, &depth, &check, config, &UniformSelector)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(FRAME_STREAM);
        let prepared = prepare_frame(&env, &depth, &e0, cfg.variant, &mut rng)?;
        Ok(Self { env, depth, e0, prepared, config, selector })
    }

    pub fn context(&self) -> PlanContext<'_> {
        PlanContext::new(&self.env, &self.depth, &self.prepared.frame, self.config, self.selector.as_ref())
            .expect("checked when the session was opened")
    }
}

pub fn episode_rng(seed: u64, episode: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(episode);
    rng
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidateReport {
    pub path: PathBuf,
    pub valid: bool,
    pub issues: Vec<aspiro_core::mdp::Issue>,
    /// Parse or build error, with location when the JSON is malformed.
    pub error: Option<String>,
}

impl ValidateReport {
    pub fn render(&self) -> String {
        let mut s = format!("{}: ", self.path.display());
        if let Some(e) = &self.error {
            s.push_str(e);
        } else if self.valid {
            s.push_str("valid");
        } else {
            s.push_str("invalid");
            for i in &self.issues {
                let _ = write!(s, "\n  {i}");
            }
        }
        s
    }
}

pub fn cmd_validate(path: &Path) -> Result<ValidateReport, CliError> {
    let text = read(path)?;
    let built = EnvFile::parse(&text).and_then(|f| f.build());
    Ok(match built {
        Ok(env) => {
            let report = validate_environment(&env);
            ValidateReport { path: path.to_owned(), valid: report.is_valid(), issues: report.issues, error: None }
        }
        Err(e) => ValidateReport { path: path.to_owned(), valid: false, issues: Vec::new(), error: Some(e.to_string()) },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub episodes: usize,
    pub d: usize,
    pub anchor: Vec<f64>,
    pub reference_iterations: usize,
    pub degenerate_frame: bool,
    pub mean: Vec<f64>,
    pub std_err: Vec<f64>,
    /// Distance from the empirical mean to `E0`.
    pub distance: f64,
    /// Whether some point of `E0` lies within three standard errors of the
    /// mean in every coordinate.
    pub consistent: bool,
}

impl SimulateReport {
    pub fn render(&self) -> String {
        let mut s = format!(
            "reference frame: anchor {:?}, {} search iterations{}\n",
            self.anchor,
            self.reference_iterations,
            if self.degenerate_frame { " (degenerate)" } else { "" }
        );
        if self.episodes == 0 {
            s.push_str("plan only; no episodes run");
            return s;
        }
        let _ = writeln!(s, "episodes: {}", self.episodes);
        let _ = writeln!(s, "{:>6} {:>14} {:>12}", "coord", "mean", "std err");
        for k in 0..self.d {
            let _ = writeln!(s, "{:>6} {:>14.6} {:>12.3e}", k, self.mean[k], self.std_err[k]);
        }
        let _ = write!(
            s,
            "distance to aspiration: {:.3e}; {}",
            self.distance,
            if self.consistent { "consistent with fulfillment (3 SE)" } else { "NOT consistent with fulfillment (3 SE)" }
        );
        s
    }
}

/// Whether the box `mean ± margin` meets `e`.
fn box_meets(e: &Polytope, mean: &[f64], margin: &[f64]) -> bool {
    let lo: Vec<f64> = mean.iter().zip(margin).map(|(m, r)| m - r).collect();
    let hi: Vec<f64> = mean.iter().zip(margin).map(|(m, r)| m + r).collect();
    match Polytope::aabb(&lo, &hi) {
        Ok(b) => aspiro_core::oracle::hull_distance(e.vertices(), &b) <= 1e-9,
        Err(_) => e.distance_to(mean) <= 1e-9,
    }
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulateReport, CliError> {
    let session = Session::open(cfg)?;
    simulate_session(&session, cfg)
}

/// Total and trace lines of one episode.
type EpisodeOutput = (Vec<f64>, Vec<String>);

pub fn simulate_session(session: &Session, cfg: &RunConfig) -> Result<SimulateReport, CliError> {
    let d = session.env.dim();
    let ctx = session.context();
    let want_trace = cfg.trace_out.is_some();
    let results: Vec<Result<EpisodeOutput, PlanError>> = with_threads(cfg.threads, || {
        (0..cfg.episodes as u64)
            .into_par_iter()
            .map(|i| {
                let ep = run_episode(&ctx, &session.e0, cfg.seed, &mut episode_rng(cfg.seed, i))?;
                let lines = if want_trace {
                    ep.steps.iter().map(|st| TraceRecord::from_step(&session.env, st).to_json_line()).collect()
                } else {
                    Vec::new()
                };
                Ok((ep.trajectory.total(), lines))
            })
            .collect()
    })?;
    let mut sum = vec![0.0; d];
    let mut sq = vec![0.0; d];
    let mut out = match &cfg.trace_out {
        Some(p) => Some(std::io::BufWriter::new(
            fs::File::create(p).map_err(|source| CliError::Io { path: p.clone(), source })?,
        )),
        None => None,
    };
    for r in results {
        let (total, lines) = r?;
        for k in 0..d {
            sum[k] += total[k];
            sq[k] += total[k] * total[k];
        }
        if let Some(w) = out.as_mut() {
            for l in lines {
                writeln!(w, "{l}").map_err(|source| CliError::Io { path: cfg.trace_out.clone().unwrap(), source })?;
            }
        }
    }
    if let Some(mut w) = out {
        w.flush().map_err(|source| CliError::Io { path: cfg.trace_out.clone().unwrap(), source })?;
    }
    let n = cfg.episodes as f64;
    let (mean, std_err) = if cfg.episodes == 0 {
        (vec![f64::NAN; d], vec![f64::NAN; d])
    } else {
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let se = (0..d)
            .map(|k| {
                if cfg.episodes < 2 {
                    return f64::NAN;
                }
                let var = ((sq[k] - n * mean[k] * mean[k]) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            })
            .collect();
        (mean, se)
    };
    let distance = if cfg.episodes == 0 { f64::NAN } else { session.e0.distance_to(&mean) };
    let consistent = cfg.episodes > 0 && {
        let margin: Vec<f64> = std_err.iter().map(|s| if s.is_nan() { 0.0 } else { 3.0 * s }).collect();
        box_meets(&session.e0, &mean, &margin)
    };
    Ok(SimulateReport {
        episodes: cfg.episodes,
        d,
        anchor: session.prepared.frame.anchor.clone(),
        reference_iterations: session.prepared.iterations,
        degenerate_frame: session.prepared.degenerate,
        mean,
        std_err,
        distance,
        consistent,
    })
}

/// Runs episodes and writes their trace lines, in episode order.
pub fn cmd_trace(cfg: &RunConfig, out: &mut dyn Write) -> Result<usize, CliError> {
    let session = Session::open(cfg)?;
    let ctx = session.context();
    let mut lines = 0;
    for i in 0..cfg.episodes as u64 {
        let ep = run_episode(&ctx, &session.e0, cfg.seed, &mut episode_rng(cfg.seed, i))?;
        for st in &ep.steps {
            writeln!(out, "{}", TraceRecord::from_step(&session.env, st).to_json_line())
                .map_err(|source| CliError::Io { path: PathBuf::from("<trace>"), source })?;
            lines += 1;
        }
    }
    Ok(lines)
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactReport {
    pub expectation: Vec<f64>,
    /// Distance from the exact expectation to `E0`; 0 inside.
    pub distance: f64,
    pub inside: bool,
}

impl ExactReport {
    pub fn render(&self) -> String {
        format!(
            "exact expected Total: {:?}\ndistance to aspiration: {:.3e} ({})",
            self.expectation,
            self.distance,
            if self.inside { "inside" } else { "OUTSIDE" }
        )
    }
}

/// Distance below which the exact expectation counts as inside `E0`.
pub const EXACT_TOLERANCE: f64 = 1e-6;

pub fn cmd_exact(cfg: &RunConfig) -> Result<ExactReport, CliError> {
    let session = Session::open(cfg)?;
    exact_session(&session, &EnumBudget::default())
}

pub fn exact_session(session: &Session, budget: &EnumBudget) -> Result<ExactReport, CliError> {
    let ctx = session.context();
    let local = PlanContext { config: PlanConfig { mode: StepMode::Local, ..ctx.config }, ..ctx };
    let expectation = exact_policy_expectation(&local, &session.e0, budget)?;
    let distance = session.e0.distance_to(&expectation);
    Ok(ExactReport { inside: distance <= EXACT_TOLERANCE, expectation, distance })
}

#[derive(Clone, Debug, Serialize)]
pub struct RefItersRow {
    pub d: usize,
    pub trials: usize,
    /// Trials where the search never enclosed the target.
    pub failed: usize,
    pub mean_k: f64,
    pub std_err: Option<f64>,
    pub bound: usize,
    pub below_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefItersTable {
    pub depth: u32,
    pub seed: u64,
    pub rows: Vec<RefItersRow>,
}

impl RefItersTable {
    pub fn render(&self) -> String {
        let t = self.depth as f64 / 2.0;
        let mut s = format!("reference-policy iterations, binary trees of depth {}, target ({t},...,{t})\n", self.depth);
        let _ = writeln!(s, "{:>3} {:>7} {:>8} {:>8} {:>8} {:>6}", "d", "trials", "mean k", "SE", "2d+1", "fail");
        for r in &self.rows {
            let se = r.std_err.map_or("-".to_string(), |v| format!("{v:.3}"));
            let _ = writeln!(
                s,
                "{:>3} {:>7} {:>8.3} {:>8} {:>8} {:>6}",
                r.d, r.trials, r.mean_k, se, r.bound, r.failed
            );
        }
        s
    }
}

/// Average number of greedy directional iterations until `(5, ..., 5)`
/// lies in the hull of the collected policy values.
pub fn cmd_experiment_ref_iters(
    dims: &[usize],
    depth: u32,
    trials: usize,
    seed: u64,
    threads: Option<usize>,
) -> Result<RefItersTable, CliError> {
    if dims.is_empty() || dims.contains(&0) || depth == 0 || trials == 0 {
        return Err(CliError::Usage("dimensions, depth and trials must be positive".into()));
    }
    let mut rows = Vec::new();
    for &d in dims {
        let outcomes: Vec<Result<Option<usize>, CliError>> = with_threads(threads, || {
            (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let env_seed = seed.wrapping_mul(1_000_003).wrapping_add(1000 * d as u64 + t);
                    let env = random_binary_tree(depth, d, env_seed).map_err(|e| CliError::Usage(e.to_string()))?;
                    let di = DepthInfo::new(&env).map_err(|e| CliError::Plan(e.into()))?;
                    // mean Delta is 1/2 per step
                    let x = vec![depth as f64 / 2.0; d];
                    let mut rng = episode_rng(env_seed, FRAME_STREAM);
                    match find_reference_policies(&env, &di, &x, SearchOptions::for_dim(d), &mut rng) {
                        Ok(res) => Ok(Some(res.iterations)),
                        Err(ReferenceError::NotInHull { .. }) => Ok(None),
                        Err(e) => Err(e.into()),
                    }
                })
                .collect()
        })?;
        let mut ks = Vec::new();
        let mut failed = 0;
        for o in outcomes {
            match o? {
                None => {
                    failed += 1;
                    ks.push(SearchOptions::for_dim(d).max_iter as f64);
                }
                Some(k) => ks.push(k as f64),
            }
        }
        let n = ks.len() as f64;
        let mean_k = ks.iter().sum::<f64>() / n;
        let std_err = (ks.len() > 1)
            .then(|| (ks.iter().map(|k| (k - mean_k).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt());
        rows.push(RefItersRow {
            d,
            trials,
            failed,
            mean_k,
            std_err,
            bound: 2 * d + 1,
            below_bound: mean_k <= (2 * d + 1) as f64,
        });
    }
    Ok(RefItersTable { depth, seed, rows })
}
