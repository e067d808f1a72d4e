//! Command-line entry point: norms, decompositions, free-flow propagation,
//! estimate verification sweeps, the infinite-L2 counterexample, and solver
//! runs. All randomness flows from the single config seed; every CSV row
//! carries the hash of the resolved config.
//!
//! Exit codes: 0 all asserted invariants pass, 1 input/config error,
//! 2 assertion failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use modspace::estimates::{
    verify_duhamel, verify_homogeneous_strichartz, verify_scaling_law, verify_smoothing_maximal,
    verify_xmu_linear, ScalingLawKind, VerifyOpts,
};
use modspace::freqdecomp::{build_cutoff, CutoffProfile};
use modspace::grid::{GridFunction, GridSpec};
use modspace::modnorms::{
    build_counterexample, counterexample_band, default_strategies, modulation_norm,
    scaling_limit_norm_ub, ScalingLimitParams,
};
use modspace::propagators::propagate;
use modspace::report::EstimateReport;
use modspace::solver::{
    d4nls_params, gkdv_params, lipschitz_probe, picard_solve, reference_solve,
    small_data_threshold, Equation, ProblemSpec,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    /// Schema version of this config.
    version: u32,
    /// Seed for all random families.
    seed: u64,
    /// Spatial period.
    grid_length: f64,
    /// Spatial sample count (power of two).
    grid_points: usize,
    /// Time horizon.
    horizon: f64,
    /// Time steps.
    time_steps: usize,
    /// Cutoff smoothness parameter (>= 2).
    cutoff_smoothness: u32,
    /// Coarsest dyadic scale.
    j_min: i32,
    /// Output directory for CSV/JSON/grid artifacts.
    output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: 1,
            seed: 0,
            grid_length: 256.0,
            grid_points: 2048,
            horizon: 1.0,
            time_steps: 128,
            cutoff_smoothness: 2,
            j_min: -8,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    fn hash(&self) -> String {
        // the output path has no bearing on the numbers; hash only the
        // scientific parameters so reruns into different dirs compare equal
        let mut scientific = self.clone();
        scientific.output_dir = PathBuf::new();
        let canon = serde_json::to_string(&scientific).expect("config serializes");
        let digest = Sha256::digest(canon.as_bytes());
        format!("{digest:x}")[..16].to_string()
    }

    fn spec(&self) -> modspace::Result<GridSpec<f64>> {
        GridSpec::new(self.grid_length, self.grid_points)
    }

    fn cutoff(&self) -> modspace::Result<CutoffProfile<f64>> {
        build_cutoff(self.cutoff_smoothness)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "modspace",
    about = "Frequency-uniform decompositions, modulation-space norms, dispersive estimates and small-data solvers",
    version
)]
struct Cli {
    /// Path to a JSON run config; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Grid length override.
    #[arg(long = "L", global = true)]
    grid_length: Option<f64>,
    /// Grid points override.
    #[arg(long = "N", global = true)]
    grid_points: Option<usize>,
    /// Horizon override.
    #[arg(long = "T", global = true)]
    horizon: Option<f64>,
    /// Time-step override.
    #[arg(long = "M", global = true)]
    time_steps: Option<usize>,
    /// Coarsest scale override.
    #[arg(long = "jmin", global = true, allow_hyphen_values = true)]
    j_min: Option<i32>,
    /// Output directory override.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Modulation norm of a grid file (or of a seeded random input).
    Norm(NormArgs),
    /// Scaling-limit norm upper bound with its witness decomposition.
    Decompose(DecomposeArgs),
    /// Apply the free flow to a grid file and write the result.
    Propagate(PropagateArgs),
    /// Run a verification sweep and write its CSV report.
    Verify(VerifyArgs),
    /// Build the infinite-L2 counterexample datum and its norm table.
    Counterexample(CounterexampleArgs),
    /// Solve an initial-value problem by Picard iteration.
    Solve(SolveArgs),
    /// Summarize a previously written CSV report.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct NormArgs {
    /// Grid file base path (reads <input>.json + <input>.bin); a seeded
    /// random band-limited input is used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// Dyadic scale of the decomposition.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    j: i32,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    mu: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0)]
    q: f64,
}

#[derive(Debug, Args)]
struct PropagateArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "d4nls")]
    equation: String,
    /// Propagation time.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    t: f64,
    /// Output grid file base path (defaults to <output_dir>/propagated).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// One of: scaling, smoothing, strichartz, duhamel, xmu.
    #[arg(long)]
    estimate: String,
    #[arg(long, default_value_t = 8.0)]
    p: f64,
    /// Base window for the k=0 band.
    #[arg(long, default_value_t = 0.5)]
    t_base: f64,
    /// Largest |k| swept.
    #[arg(long, default_value_t = 32)]
    k_max: i64,
    /// Number of random family members.
    #[arg(long, default_value_t = 4)]
    n_random: usize,
    /// Spectral radius of the random family.
    #[arg(long, default_value_t = 8.0)]
    radius: f64,
}

#[derive(Debug, Args)]
struct CounterexampleArgs {
    #[arg(long, default_value_t = 0.1)]
    mu: f64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, default_value = "d4nls")]
    equation: String,
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    lambda: f64,
    /// Amplitude applied to the Gaussian datum (or to --input if given).
    #[arg(long, default_value_t = 0.01)]
    amp: f64,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Also run the RK4 reference integrator and report the disagreement.
    #[arg(long)]
    reference: bool,
    /// Also run the Lipschitz probe.
    #[arg(long)]
    lipschitz: bool,
    /// Also bisect for the empirical small-data threshold.
    #[arg(long)]
    threshold: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// CSV file written by `verify` or `solve`.
    #[arg(long)]
    input: PathBuf,
}

enum Outcome {
    Pass,
    /// Assertion failure: offending description lines.
    Fail(Vec<String>),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap's own exit code conventions differ; usage problems are
            // input errors here
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            // --help / --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    if let Ok(threads) = std::env::var("MODSPACE_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let config = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(&cli.command, &config) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(lines)) => {
            for l in lines {
                eprintln!("ASSERTION FAILED: {l}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn resolve_config(cli: &Cli) -> modspace::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            if text.trim().is_empty() {
                return Err(modspace::Error::Config(
                    "empty config; see `modspace --help` for the schema".into(),
                ));
            }
            serde_json::from_str(&text).map_err(|e| modspace::Error::Config(e.to_string()))?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(l) = cli.grid_length {
        cfg.grid_length = l;
    }
    if let Some(n) = cli.grid_points {
        cfg.grid_points = n;
    }
    if let Some(t) = cli.horizon {
        cfg.horizon = t;
    }
    if let Some(m) = cli.time_steps {
        cfg.time_steps = m;
    }
    if let Some(j) = cli.j_min {
        cfg.j_min = j;
    }
    if let Some(o) = &cli.output_dir {
        cfg.output_dir = o.clone();
    }
    if cfg.j_min >= 0 {
        return Err(modspace::Error::Config("j_min must be negative".into()));
    }
    Ok(cfg)
}

fn load_or_random(
    input: &Option<PathBuf>,
    cfg: &RunConfig,
    radius: f64,
) -> modspace::Result<GridFunction<f64>> {
    match input {
        Some(path) => modspace::gridio::read_grid_function(path),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            modspace::families::random_band_limited(cfg.spec()?, &mut rng, radius)
        }
    }
}

fn write_report(
    cfg: &RunConfig,
    name: &str,
    report: &EstimateReport,
) -> modspace::Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    let safe: String = name
        .chars()
        .map(|ch| if ch.is_ascii_alphanumeric() || ch == '-' { ch } else { '-' })
        .collect();
    let path = cfg.output_dir.join(format!("{safe}.csv"));
    std::fs::write(&path, report.to_csv(&cfg.hash()))?;
    Ok(path)
}

fn parse_equation(s: &str) -> modspace::Result<Equation> {
    match s {
        "d4nls" => Ok(Equation::D4nls),
        "gkdv" => Ok(Equation::Gkdv),
        other => Err(modspace::Error::Config(format!(
            "unknown equation `{other}` (expected d4nls or gkdv)"
        ))),
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig) -> modspace::Result<Outcome> {
    match cmd {
        Command::Norm(a) => {
            let f = load_or_random(&a.input, cfg, 8.0)?;
            let c = cfg.cutoff()?;
            let v = modulation_norm(&f, a.p, a.q, a.j, &c)?;
            println!("modulation_norm(p={}, q={}, j={}) = {v:.12e}", a.p, a.q, a.j);
            Ok(Outcome::Pass)
        }
        Command::Decompose(a) => {
            let f = load_or_random(&a.input, cfg, 8.0)?;
            let c = cfg.cutoff()?;
            let params = ScalingLimitParams { mu: a.mu, p: a.p, q: a.q, j_min: cfg.j_min };
            let strategies = default_strategies(cfg.j_min);
            let bound = scaling_limit_norm_ub(&f, &params, &strategies, &c)?;
            println!(
                "scaling_limit_ub(mu={}, p={}, q={}) = {:.12e} via {} ({} pieces)",
                a.mu,
                a.p,
                a.q,
                bound.value,
                bound.strategy,
                bound.witness.pieces.len()
            );
            Ok(Outcome::Pass)
        }
        Command::Propagate(a) => {
            let f = load_or_random(&a.input, cfg, 8.0)?;
            let eq = parse_equation(&a.equation)?;
            let g = propagate(&f, a.t, eq.symbol());
            std::fs::create_dir_all(&cfg.output_dir)?;
            let out = a
                .output
                .clone()
                .unwrap_or_else(|| cfg.output_dir.join("propagated"));
            modspace::gridio::write_grid_function(&out, &g)?;
            println!("wrote {}.json / .bin", out.display());
            Ok(Outcome::Pass)
        }
        Command::Verify(a) => run_verify(a, cfg),
        Command::Counterexample(a) => run_counterexample(a, cfg),
        Command::Solve(a) => run_solve(a, cfg),
        Command::Report(a) => run_report(a),
    }
}

fn run_verify(a: &VerifyArgs, cfg: &RunConfig) -> modspace::Result<Outcome> {
    let c = cfg.cutoff()?;
    let spec = cfg.spec()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let opts = VerifyOpts { t_base: a.t_base, steps: cfg.time_steps, k_max: a.k_max };
    let mut failures = Vec::new();
    match a.estimate.as_str() {
        "scaling" => {
            for kind in [
                ScalingLawKind::Smoothing,
                ScalingLawKind::Strichartz { p: a.p },
                ScalingLawKind::StrichartzDerivative { p: a.p },
                ScalingLawKind::Duhamel { p: a.p },
            ] {
                let mut rep =
                    verify_scaling_law(spec, kind, 1, cfg.j_min.max(-4)..=0, &opts, &c)?;
                rep.estimate_id = kind.id();
                let path = write_report(cfg, &format!("scaling-{}", kind.id()), &rep)?;
                let fit = rep.slope.as_ref().expect("scaling law fits a slope");
                println!(
                    "{}: fitted slope {:.4} (predicted {:.4}) -> {}",
                    kind.id(),
                    fit.slope,
                    fit.predicted,
                    path.display()
                );
                if (fit.slope - fit.predicted).abs() > 0.1 {
                    failures.push(format!(
                        "{}: slope {:.4} deviates from {:.4} by more than 0.1",
                        kind.id(),
                        fit.slope,
                        fit.predicted
                    ));
                }
            }
        }
        "smoothing" | "strichartz" | "duhamel" | "xmu" => {
            let family =
                modspace::families::standard_family(spec, &mut rng, a.n_random, a.radius)?;
            let rep = match a.estimate.as_str() {
                "smoothing" => verify_smoothing_maximal(&family, a.p, &opts, &c)?,
                "strichartz" => verify_homogeneous_strichartz(&family, a.p, &opts, &c)?,
                "duhamel" => verify_duhamel(&family, a.p, &opts, &c)?,
                _ => verify_xmu_linear(&family, 0.1, a.p, cfg.j_min.max(-4), &opts, &c)?,
            };
            let path = write_report(cfg, &a.estimate, &rep)?;
            println!(
                "{}: {} rows, ratio range [{:.4e}, {:.4e}] -> {}",
                a.estimate,
                rep.rows.len(),
                rep.min_ratio,
                rep.max_ratio,
                path.display()
            );
            if !rep.all_ratios_finite() || rep.rows.is_empty() {
                failures.push(format!("{}: empty or non-finite ratio set", a.estimate));
            }
        }
        other => {
            return Err(modspace::Error::Config(format!("unknown estimate `{other}`")));
        }
    }
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::Fail(failures) })
}

fn run_counterexample(a: &CounterexampleArgs, cfg: &RunConfig) -> modspace::Result<Outcome> {
    let c = cfg.cutoff()?;
    let spec = cfg.spec()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mut table = String::from("j_min,l2_norm,band_l2,m_ub,config\n");
    let hash = cfg.hash();
    let mut l2_prev = 0.0f64;
    let mut monotone = true;
    for j_min in (cfg.j_min..=-2).rev() {
        let (u, witness) = build_counterexample(a.mu, j_min, spec)?;
        let l2 = u.l2_norm();
        let b = counterexample_band(j_min);
        // Parseval: the band's L^2 norm straight from weighted coefficients
        let band = modspace::freqdecomp::box_coeffs(&u, b, &c)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
            / spec.length().sqrt();
        let params = ScalingLimitParams { mu: a.mu, p: 2.0, q: 1.0, j_min };
        let mut strategies = default_strategies(j_min);
        strategies.push(modspace::modnorms::DecompositionStrategy::Explicit(witness));
        let ub = scaling_limit_norm_ub(&u, &params, &strategies, &c)?;
        if l2 < l2_prev {
            monotone = false;
        }
        l2_prev = l2;
        table.push_str(&format!(
            "{j_min},{l2:.17e},{:.17e},{:.17e},{hash}\n",
            band, ub.value
        ));
        if j_min == cfg.j_min {
            modspace::gridio::write_grid_function(
                &cfg.output_dir.join("counterexample"),
                &u,
            )?;
        }
    }
    let path = cfg.output_dir.join("counterexample.csv");
    std::fs::write(&path, &table)?;
    println!("wrote {} and counterexample.json/.bin", path.display());
    if monotone {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::Fail(vec!["partial-sum L2 norm is not monotone in -j_min".into()]))
    }
}

fn run_solve(a: &SolveArgs, cfg: &RunConfig) -> modspace::Result<Outcome> {
    let c = cfg.cutoff()?;
    let eq = parse_equation(&a.equation)?;
    let u0 = match &a.input {
        Some(p) => modspace::gridio::read_grid_function(p)?,
        None => modspace::families::gaussian(cfg.spec()?, 1.0)?,
    };
    let problem = ProblemSpec::new(
        eq,
        a.m,
        Complex::new(a.lambda, 0.0),
        u0,
        cfg.horizon,
        cfg.time_steps,
    )?;
    let (u, trace) = picard_solve(&problem, a.amp, a.max_iter, a.tol, &c)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let hash = cfg.hash();

    let mut csv = String::from("n,r_n,rho_n,work_r_n,config\n");
    let ratios = trace.ratios();
    for (n, r) in trace.residuals.iter().enumerate() {
        let rho = if n == 0 { String::new() } else { format!("{:.17e}", ratios[n - 1]) };
        csv.push_str(&format!(
            "{},{:.17e},{},{:.17e},{hash}\n",
            n + 1,
            r,
            rho,
            trace.work_residuals[n]
        ));
    }
    std::fs::write(cfg.output_dir.join("trace.csv"), csv)?;
    modspace::gridio::write_grid_function(
        &cfg.output_dir.join("solution-final"),
        u.frames().last().expect("at least one frame"),
    )?;

    let mut diagnostics = serde_json::json!({
        "config": hash,
        "equation": a.equation,
        "m": a.m,
        "lambda": a.lambda,
        "amp": a.amp,
        "iterations": trace.residuals.len(),
        "fixed_point_residual": trace.fixed_point_residual,
        "converged": trace.converged,
    });
    match eq {
        Equation::D4nls => {
            let p = d4nls_params(a.m as i64)?;
            diagnostics["params"] = serde_json::json!({
                "p": p.p.to_string(), "A": p.a.to_string(), "B": p.b.to_string(),
                "mu_max": p.mu_max.to_string(), "s_c": p.s_c.to_string(),
            });
        }
        Equation::Gkdv => {
            let p = gkdv_params(a.m as i64)?;
            diagnostics["params"] = serde_json::json!({
                "A": p.a.to_string(), "mu_max": p.mu_max.to_string(),
                "s_c": p.s_c.to_string(),
            });
        }
    }

    let mut failures = Vec::new();
    if a.reference {
        let (r, est) = reference_solve(&problem, a.amp)?;
        let denom = r.linf_t_l2_x().max(f64::MIN_POSITIVE);
        let rel = u.sub(&r)?.linf_t_l2_x() / denom;
        diagnostics["reference_disagreement"] = serde_json::json!(rel);
        diagnostics["reference_error_estimate"] = serde_json::json!(est);
        if rel > 1e-6_f64.max(10.0 * est) {
            failures.push(format!("cross-oracle disagreement {rel:.3e}"));
        }
    }
    if a.lipschitz {
        let rep = lipschitz_probe(
            &problem,
            a.amp,
            &[1e-2, 1e-3, 1e-4, 1e-5],
            5,
            cfg.seed,
            a.max_iter,
            a.tol,
            &c,
        )?;
        write_report(cfg, "lipschitz", &rep)?;
        let spread = rep.max_ratio / rep.min_ratio;
        diagnostics["lipschitz_spread"] = serde_json::json!(spread);
        if spread > 2.0 {
            failures.push(format!("Lipschitz ratio spread {spread:.3}"));
        }
    }
    if a.threshold {
        let (eps, norm_ub) = small_data_threshold(&problem, 100.0 * a.amp, 8, a.max_iter, a.tol, &c)?;
        diagnostics["threshold_amplitude"] = serde_json::json!(eps);
        diagnostics["threshold_norm_ub"] = serde_json::json!(norm_ub);
    }
    std::fs::write(
        cfg.output_dir.join("diagnostics.json"),
        serde_json::to_string_pretty(&diagnostics)
            .map_err(|e| modspace::Error::Format(e.to_string()))?,
    )?;
    println!(
        "solved: {} iterations, defect {:.3e}; artifacts in {}",
        trace.residuals.len(),
        trace.fixed_point_residual,
        cfg.output_dir.display()
    );
    Ok(if failures.is_empty() { Outcome::Pass } else { Outcome::Fail(failures) })
}

fn run_report(a: &ReportArgs) -> modspace::Result<Outcome> {
    let text = std::fs::read_to_string(&a.input)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| modspace::Error::Format("empty CSV".into()))?;
    let ratio_col = header
        .split(',')
        .position(|h| h == "ratio" || h == "rho_n")
        .ok_or_else(|| modspace::Error::Format("no ratio column".into()))?;
    let mut count = 0usize;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    let mut bad = 0usize;
    for line in lines {
        let field = line.split(',').nth(ratio_col).unwrap_or("");
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                count += 1;
                max = max.max(v);
                min = min.min(v);
            }
            _ => bad += 1,
        }
    }
    println!("{}: {count} ratios in [{min:.4e}, {max:.4e}], {bad} non-finite", a.input.display());
    if bad > 0 {
        Ok(Outcome::Fail(vec![format!("{bad} non-finite ratios")]))
    } else {
        Ok(Outcome::Pass)
    }
}
