//! `disaster`: run any analysis of the two total-disaster chains against a
//! declared parameter set, cross-check analytic laws against their
//! oracles, and emit CSV tables with JSON provenance sidecars.

mod artifacts;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use disaster_core::hitting::{
    contact_asymptote, contact_probability, extinction_prob, first_passage_down_pmf, green_kernel,
    height_law, mean_return_time, return_time_pmf, ContactAsymptote,
};
use disaster_core::mc::{
    sample_excursions_dt, simulate_ct, simulate_dt, Horizon, RunConfig, StopReason,
};
use disaster_core::model::{ModelKind, ModelSpec};
use disaster_core::stationary::{criteria, invariant_ct, invariant_dt};
use disaster_core::verify;
use disaster_core::Error as CoreError;

use artifacts::{timestamped_basename, write_artifacts, ComparisonRecord, Row, Sidecar, Table};

#[derive(Parser)]
#[command(
    name = "disaster",
    version,
    about = "Exactly solvable growth-collapse chains with total disasters: closed-form laws, oracles and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug, Default)]
struct ModelArgs {
    /// Model family: A (q_x = alpha/(nu+x^beta)) or B (p_x = (1+x^-beta)^-alpha).
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Model A shape parameter (nu > -1).
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// Reflection probability at the origin (default 1).
    #[arg(long, global = true)]
    p0: Option<f64>,
    /// Continuous-time rate exponent; together with --r0 attaches the CT layer.
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Continuous-time base rate r0 > 0.
    #[arg(long, global = true)]
    r0: Option<f64>,
    /// RNG seed (precedence: flag > DISASTER_SEED > config file > 7).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (flag > DISASTER_OUT_DIR > config file > ".").
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// TOML config file supplying defaults for any of the above.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Recurrence/transience classification and criteria series.
    Classify(ClassifyCmd),
    /// Invariant measure table (DT, or CT when a rate layer is given).
    Invariant(InvariantCmd),
    /// First-return-time law at the origin.
    ReturnTime(ReturnTimeCmd),
    /// Excursion-height law.
    Heights(HeightsCmd),
    /// Green-kernel coefficients with the matrix-power oracle.
    Green(GreenCmd),
    /// Contact probabilities P_0(X_n = 0) and their asymptotic regime.
    Contact(ContactCmd),
    /// Extinction probabilities with the resolvent-series oracle.
    Extinction(ExtinctionCmd),
    /// CT excursion-length survival and tail diagnostics.
    CtExcursion(CtExcursionCmd),
    /// Divisibility diagnostics of the stationary law.
    Divisibility(DivisibilityCmd),
    /// Simulate the chain and compare empirical laws to analytic ones.
    Simulate(SimulateCmd),
    /// Run the full verification suite (one pass/fail line per check).
    Verify(VerifyCmd),
    /// Regenerate every reproduction table into the output directory.
    Report(ReportCmd),
}

#[derive(Args)]
struct ClassifyCmd {
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct InvariantCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    xmax: u64,
}

#[derive(Args)]
struct ReturnTimeCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    xmax: u64,
}

#[derive(Args)]
struct HeightsCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 100)]
    hmax: u64,
}

#[derive(Args)]
struct GreenCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(short = 'x', long, default_value_t = 0)]
    x: u64,
    #[arg(short = 'y', long, default_value_t = 0)]
    y: u64,
    #[arg(long, default_value_t = 25)]
    order: usize,
}

#[derive(Args)]
struct ContactCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    nmax: usize,
}

#[derive(Args)]
struct ExtinctionCmd {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 50)]
    xmax: u64,
    /// Monte Carlo replications per start state (0 skips the MC column).
    #[arg(long, default_value_t = 0)]
    mc_runs: u32,
}

#[derive(Args)]
struct CtExcursionCmd {
    #[command(flatten)]
    model: ModelArgs,
    /// Conditioning height for the survival table.
    #[arg(long, default_value_t = 3)]
    height: u64,
    #[arg(long, default_value_t = 20.0)]
    tmax: f64,
    #[arg(long, default_value_t = 40)]
    points: usize,
}

#[derive(Args)]
struct DivisibilityCmd {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of canonical-sequence terms.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Sign tolerance (default: 1e-9 scaled by max |r_x|).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SimulateCmd {
    #[command(flatten)]
    model: ModelArgs,
    /// dt or ct.
    #[arg(long, default_value = "dt")]
    kind: String,
    #[arg(long, default_value_t = 1_000_000)]
    steps: u64,
    /// CT horizon (time units); used when --kind ct.
    #[arg(long, default_value_t = 10_000.0)]
    time: f64,
    #[arg(long, default_value_t = 10_000_000)]
    max_events: u64,
}

#[derive(Args)]
struct VerifyCmd {
    #[command(flatten)]
    model: ModelArgs,
    /// all, fast, critical-modelA, critical-modelB, transient, ct, or a
    /// substring of a check name.
    #[arg(long, default_value = "all")]
    suite: String,
}

#[derive(Args)]
struct ReportCmd {
    #[command(flatten)]
    model: ModelArgs,
}

/// Values accepted from the TOML config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    alpha: Option<f64>,
    beta: Option<f64>,
    nu: Option<f64>,
    p0: Option<f64>,
    lambda: Option<f64>,
    r0: Option<f64>,
    seed: Option<u64>,
    out_dir: Option<String>,
}

/// Fully resolved configuration: flags > environment (DISASTER_*) >
/// config file > built-in defaults.
#[derive(Debug, Clone)]
struct Effective {
    model: Option<String>,
    alpha: Option<f64>,
    beta: Option<f64>,
    nu: Option<f64>,
    p0: f64,
    lambda: Option<f64>,
    r0: Option<f64>,
    seed: u64,
    out_dir: PathBuf,
}

#[derive(Debug)]
enum CliError {
    /// Exit code 3: a named invariant was violated.
    Invalid(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

fn resolve(args: &ModelArgs) -> Result<Effective, CliError> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            toml::from_str(&text)
                .map_err(|e| CliError::Invalid(format!("config file: {e}")))?
        }
        None => FileConfig::default(),
    };
    let env_seed = std::env::var("DISASTER_SEED")
        .ok()
        .map(|s| {
            s.parse::<u64>()
                .map_err(|_| CliError::Invalid(format!("DISASTER_SEED must be an integer, got {s}")))
        })
        .transpose()?;
    let env_out = std::env::var("DISASTER_OUT_DIR").ok().map(PathBuf::from);
    Ok(Effective {
        model: args.model.clone().or(file.model),
        alpha: args.alpha.or(file.alpha),
        beta: args.beta.or(file.beta),
        nu: args.nu.or(file.nu),
        p0: args.p0.or(file.p0).unwrap_or(1.0),
        lambda: args.lambda.or(file.lambda),
        r0: args.r0.or(file.r0),
        seed: args.seed.or(env_seed).or(file.seed).unwrap_or(7),
        out_dir: args
            .out_dir
            .clone()
            .or(env_out)
            .or(file.out_dir.map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(".")),
    })
}

fn build_spec(eff: &Effective) -> Result<ModelSpec, CliError> {
    let kind = eff
        .model
        .as_deref()
        .ok_or_else(|| CliError::Invalid("--model is required (A or B)".into()))?;
    let alpha = eff
        .alpha
        .ok_or_else(|| CliError::Invalid("--alpha is required".into()))?;
    let beta = eff.beta.ok_or_else(|| CliError::Invalid("--beta is required".into()))?;
    let spec = match kind {
        "A" | "a" => {
            let nu = eff
                .nu
                .ok_or_else(|| CliError::Invalid("model A requires --nu".into()))?;
            ModelSpec::model_a(alpha, beta, nu, eff.p0)?
        }
        "B" | "b" => {
            if eff.nu.is_some() {
                return Err(CliError::Invalid(
                    "model B does not take --nu (the paper's Hurwitz extension is out of scope)"
                        .into(),
                ));
            }
            ModelSpec::model_b(alpha, beta, eff.p0)?
        }
        other => {
            return Err(CliError::Invalid(format!("unknown model {other}; expected A or B")))
        }
    };
    match (eff.lambda, eff.r0) {
        (Some(lambda), Some(r0)) => Ok(spec.with_ct(lambda, r0)?),
        (None, None) => Ok(spec),
        _ => Err(CliError::Invalid(
            "the CT layer needs both --lambda and --r0".into(),
        )),
    }
}

fn model_json(spec: &ModelSpec) -> serde_json::Value {
    json!({
        "kind": spec.kind().to_string(),
        "alpha": spec.alpha(),
        "beta": spec.beta(),
        "nu": if spec.kind() == ModelKind::A { Some(spec.nu()) } else { None },
        "p0": spec.p0(),
        "ct": spec.ct().map(|ct| json!({"lambda": ct.lambda, "r0": ct.r0})),
    })
}

fn effective_json(eff: &Effective) -> serde_json::Value {
    json!({
        "model": eff.model,
        "alpha": eff.alpha,
        "beta": eff.beta,
        "nu": eff.nu,
        "p0": eff.p0,
        "lambda": eff.lambda,
        "r0": eff.r0,
        "seed": eff.seed,
        "out_dir": eff.out_dir.display().to_string(),
    })
}

fn sidecar(command: &str, spec: Option<&ModelSpec>, eff: &Effective) -> Sidecar {
    Sidecar {
        command: command.into(),
        model: spec.map(model_json),
        effective_config: effective_json(eff),
        outputs: Vec::new(),
        oracle_deltas: BTreeMap::new(),
        row_labels: None,
        details: None,
        wall_time_seconds: 0.0,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Classify(c) => cmd_classify(c),
        Command::Invariant(c) => cmd_invariant(c),
        Command::ReturnTime(c) => cmd_return_time(c),
        Command::Heights(c) => cmd_heights(c),
        Command::Green(c) => cmd_green(c),
        Command::Contact(c) => cmd_contact(c),
        Command::Extinction(c) => cmd_extinction(c),
        Command::CtExcursion(c) => cmd_ct_excursion(c),
        Command::Divisibility(c) => cmd_divisibility(c),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Report(c) => cmd_report(c),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
    }
}

fn cmd_classify(c: ClassifyCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    let class = spec.classify();
    let crit = criteria(&spec);
    match class.ct_explosive {
        Some(true) => println!("{} (explosive)", class.recurrence),
        Some(false) => println!("{} (non-explosive)", class.recurrence),
        None => println!("{}", class.recurrence),
    }
    let mut table = Table::new("x");
    table.rows.push(Row { index: 0.0, analytic: crit.c2_value, ..Default::default() });
    let mut side = sidecar("classify", Some(&spec), &eff);
    side.details = Some(json!({
        "recurrence": class.recurrence.to_string(),
        "ct_explosive": class.ct_explosive,
        "c1_finite": crit.c1_finite,
        "c2_finite": crit.c2_finite,
        "c2_value": crit.c2_value,
        "ct_c2_finite": crit.ct_c2_finite,
    }));
    side.row_labels = Some(vec!["C2 when finite".into()]);
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("classify"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_invariant(c: InvariantCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    let t = if spec.ct().is_some() {
        invariant_ct(&spec, c.xmax)?
    } else {
        invariant_dt(&spec, c.xmax)?
    };
    let mu = mean_return_time(&spec);
    let ret = if spec.ct().is_none() && mu.is_finite() {
        Some(return_time_pmf(&spec, c.xmax + 1))
    } else {
        None
    };
    let mut table = Table::new("x");
    let mut survival = 1.0;
    for x in 0..=c.xmax {
        // Renewal-identity oracle pi_x = P(tau_00 > x)/mu where available.
        let oracle = ret.as_ref().map(|pmf| {
            if x > 0 {
                survival -= pmf.mass(x);
            }
            survival / mu
        });
        table.rows.push(Row {
            index: x as f64,
            analytic: Some(t.mass(x)),
            oracle,
            ..Default::default()
        });
    }
    let mut side = sidecar("invariant", Some(&spec), &eff);
    if let Some(first) = table.rows.iter().find(|r| r.oracle.is_some()) {
        side.oracle_deltas.insert(
            "pi_0 vs P(tau>0)/mu".into(),
            ComparisonRecord::new(first.analytic.unwrap(), first.oracle.unwrap(), 1e-10),
        );
    }
    side.details = Some(json!({
        "normalized": t.normalized,
        "tail_mass_bound": t.tail_mass_bound,
        "kind": if spec.ct().is_some() { "ct" } else { "dt" },
    }));
    println!(
        "invariant measure to x={} ({}normalized), pi_0 = {}",
        c.xmax,
        if t.normalized { "" } else { "un-" },
        t.mass(0)
    );
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("invariant"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_return_time(c: ReturnTimeCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    let pmf = return_time_pmf(&spec, c.xmax);
    let mut table = Table::new("x");
    for k in 1..=(c.xmax + 1) {
        table.rows.push(Row {
            index: k as f64,
            analytic: Some(pmf.mass(k)),
            ..Default::default()
        });
    }
    let mu = mean_return_time(&spec);
    println!(
        "P(tau_00 = 1) = {}, defect P(tau = inf) = {}, mean = {}",
        pmf.mass(1),
        pmf.defect,
        mu
    );
    let mut side = sidecar("return-time", Some(&spec), &eff);
    side.details = Some(json!({
        "defect": pmf.defect,
        "tail_mass_bound": pmf.tail_mass_bound,
        "mean_return_time": if mu.is_finite() { Some(mu) } else { None },
    }));
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("return-time"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_heights(c: HeightsCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    let law = height_law(&spec, c.hmax);
    let ret = return_time_pmf(&spec, c.hmax + 1);
    let mut table = Table::new("h");
    table.rows.push(Row {
        index: 0.0,
        analytic: Some(law.atom_at_zero),
        oracle: Some(ret.mass(1)),
        ..Default::default()
    });
    let mut worst = 0.0f64;
    for h in 1..=c.hmax {
        let a = law.masses.mass(h);
        let o = ret.mass(h + 1); // H = tau_00 - 1
        worst = worst.max((a - o).abs());
        table.rows.push(Row {
            index: h as f64,
            analytic: Some(a),
            oracle: Some(o),
            ..Default::default()
        });
    }
    let mut side = sidecar("heights", Some(&spec), &eff);
    side.oracle_deltas.insert(
        "max |P(H=h) - P(tau=h+1)|".into(),
        ComparisonRecord::new(worst, 0.0, 1e-12),
    );
    side.details = Some(json!({"defect": law.masses.defect}));
    println!(
        "height law to h={}, atom at 0 = {}, defect = {}",
        c.hmax, law.atom_at_zero, law.masses.defect
    );
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("heights"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn matrix_power_column(spec: &ModelSpec, x: u64, y: u64, order: usize) -> Vec<f64> {
    let n_states = (x.max(y) as usize + order + 2).max(60);
    let mut v = vec![0.0f64; n_states];
    v[x as usize] = 1.0;
    let mut out = vec![0.0; order + 1];
    out[0] = if x == y { 1.0 } else { 0.0 };
    for item in out.iter_mut().skip(1) {
        let mut next = vec![0.0f64; n_states];
        for (s, &mass) in v.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let q = spec.disaster_prob(s as u64);
            next[0] += mass * q;
            if s + 1 < n_states {
                next[s + 1] += mass * (1.0 - q);
            }
        }
        v = next;
        *item = v[y as usize];
    }
    out
}

fn cmd_green(c: GreenCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    if c.order > 10_000 {
        return Err(CliError::Invalid("--order is capped at 10000".into()));
    }
    let g = green_kernel(&spec, c.x, c.y, c.order);
    let oracle = matrix_power_column(&spec, c.x, c.y, c.order.min(4000));
    let mut table = Table::new("n");
    let mut worst = 0.0f64;
    for n in 0..=c.order {
        let o = oracle.get(n).copied();
        if let Some(o) = o {
            worst = worst.max((g.coeff(n) - o).abs());
        }
        table.rows.push(Row {
            index: n as f64,
            analytic: Some(g.coeff(n)),
            oracle: o,
            ..Default::default()
        });
    }
    println!(
        "g_{{{},{}}} coefficients to order {}: max |series - matrix power| = {worst:.3e}",
        c.x, c.y, c.order
    );
    let mut side = sidecar("green", Some(&spec), &eff);
    side.oracle_deltas.insert(
        "max |green coeff - P^n(x,y)|".into(),
        ComparisonRecord::new(worst, 0.0, 1e-10),
    );
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("green"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_contact(c: ContactCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    let u = contact_probability(&spec, c.nmax);
    let asym = contact_asymptote(&spec).ok();
    let predict = |n: f64| -> Option<f64> {
        match asym {
            Some(ContactAsymptote::PowerLaw { exponent, constant, .. }) => {
                Some(constant * n.powf(-exponent))
            }
            Some(ContactAsymptote::Logarithmic { constant }) => Some(constant / n.ln()),
            Some(ContactAsymptote::ConstantLimit { pi0 }) => Some(pi0),
            None => None,
        }
    };
    let mut table = Table::new("n");
    for (n, &un) in u.iter().enumerate() {
        table.rows.push(Row {
            index: n as f64,
            analytic: Some(un),
            oracle: if n >= 2 { predict(n as f64) } else { None },
            ..Default::default()
        });
    }
    let regime = match asym {
        Some(ContactAsymptote::PowerLaw { exponent, constant, .. }) => {
            format!("algebraic decay ~ {constant} n^-{exponent}")
        }
        Some(ContactAsymptote::Logarithmic { constant }) => {
            format!("logarithmic decay ~ {constant}/ln n")
        }
        Some(ContactAsymptote::ConstantLimit { pi0 }) => format!("converges to pi_0 = {pi0}"),
        None => "no critical-case asymptote (beta != 1)".into(),
    };
    println!("contact probabilities to n={}: {regime}", c.nmax);
    let mut side = sidecar("contact", Some(&spec), &eff);
    side.details = Some(json!({ "regime": regime }));
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("contact"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_extinction(c: ExtinctionCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    let mut table = Table::new("x");
    let mut worst = 0.0f64;
    let transient = !spec.is_recurrent();
    let qtail = if transient {
        disaster_core::tails::disaster_tail(&spec, 1_000_000).unwrap_or(0.0)
    } else {
        0.0
    };
    for x in 0..=c.xmax {
        let analytic = extinction_prob(&spec, x);
        // Resolvent-series oracle (transient case only; the series is
        // identically 1 when recurrent).
        let oracle = if transient && x >= 1 {
            let mut acc = 0.0f64;
            let mut prod = 1.0f64;
            for y in x..=1_000_000 {
                acc += spec.disaster_prob(y) * prod;
                prod *= spec.growth_prob(y);
            }
            Some(acc + prod * qtail * (1.0 - 0.5 * qtail))
        } else {
            None
        };
        if let Some(o) = oracle {
            worst = worst.max((analytic - o).abs());
        }
        let (mc_estimate, mc_stderr) = if c.mc_runs > 0 && transient && x >= 1 {
            let cfg = RunConfig::new(eff.seed + x).with_replications(c.mc_runs);
            let stats = disaster_core::mc::drift_time_transient(&spec, &cfg, x)
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            let p = stats.hit_zero_fraction;
            (Some(p), Some((p * (1.0 - p) / stats.runs as f64).sqrt()))
        } else {
            (None, None)
        };
        table.rows.push(Row { index: x as f64, analytic: Some(analytic), oracle, mc_estimate, mc_stderr });
    }
    println!(
        "extinction probabilities to x={}: max |product - resolvent| = {worst:.3e}",
        c.xmax
    );
    let mut side = sidecar("extinction", Some(&spec), &eff);
    side.oracle_deltas.insert(
        "max |product formula - resolvent series|".into(),
        ComparisonRecord::new(worst, 0.0, 1e-10),
    );
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("extinction"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_ct_excursion(c: CtExcursionCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    if spec.ct().is_none() {
        return Err(CliError::Invalid(
            "ct-excursion needs the CT layer (--lambda and --r0)".into(),
        ));
    }
    let mut table = Table::new("t");
    for i in 0..=c.points {
        let t = c.tmax * i as f64 / c.points as f64;
        let s = disaster_core::ctmc::excursion_survival_given_height(&spec, c.height, t)?;
        table.rows.push(Row { index: t, analytic: Some(s), ..Default::default() });
    }
    let tail = disaster_core::ctmc::ct_excursion_tail_exponent(&spec);
    let explosion = disaster_core::ctmc::explosion_report(&spec)?;
    let tail_text = match &tail {
        Ok(disaster_core::ctmc::CtExcursionTail::PowerLaw { exponent }) => {
            format!("power-law tail, exponent alpha/(1-lambda) = {exponent}")
        }
        Ok(disaster_core::ctmc::CtExcursionTail::Exponential { mean_bound }) => {
            format!("exponential tail, mean bound 1/(r0(lambda-1)) = {mean_bound}")
        }
        Err(e) => format!("{e}"),
    };
    println!(
        "survival of tau_00 given H = {} on t in [0, {}]; {}; explosive: {}",
        c.height, c.tmax, tail_text, explosion.explosive
    );
    let mut side = sidecar("ct-excursion", Some(&spec), &eff);
    side.details = Some(json!({
        "tail": tail_text,
        "explosive": explosion.explosive,
        "rate_sum_converges": explosion.rate_sum_converges,
        "rate_sum_limit": explosion.rate_sum_limit,
        "rate_sum_partials": explosion.rate_sum_partials,
        "pre_drift_excursion_ratio": explosion.pre_drift_excursions.map(|g| g.ratio),
    }));
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("ct-excursion"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_divisibility(c: DivisibilityCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    let pmf = invariant_dt(&spec, (c.n as u64 + 2).max(4))?;
    if !pmf.normalized {
        return Err(CliError::Invalid(
            "divisibility diagnostics need a normalizable stationary law (positive recurrence)"
                .into(),
        ));
    }
    let canon = disaster_core::divisibility::canonical_sequence(&pmf, c.n)?;
    let verdict = disaster_core::divisibility::classify_divisibility(&pmf, c.n, c.tol)?;
    let back = canon.reconvolve();
    let mut table = Table::new("x");
    let mut worst = 0.0f64;
    for (x, &r) in canon.r.iter().enumerate() {
        worst = worst.max((back[x] - pmf.mass(x as u64)).abs());
        table.rows.push(Row {
            index: x as f64,
            analytic: Some(r),
            oracle: Some(back[x]),
            ..Default::default()
        });
    }
    println!(
        "stationary law: ID = {}, SD = {} (first violation {:?}, tol {:.2e})",
        verdict.id, verdict.sd, verdict.first_violation_index, verdict.tolerance_used
    );
    let mut side = sidecar("divisibility", Some(&spec), &eff);
    side.oracle_deltas.insert(
        "canonical round-trip max error".into(),
        ComparisonRecord::new(worst, 0.0, 1e-10),
    );
    side.details = Some(json!({
        "id": verdict.id,
        "sd": verdict.sd,
        "first_violation_index": verdict.first_violation_index,
        "tolerance_used": verdict.tolerance_used,
        "min_r": verdict.min_r,
        "max_increase": verdict.max_increase,
    }));
    side.row_labels = Some(vec!["analytic = r_x, oracle = reconvolved pi_x".into()]);
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("divisibility"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(c: SimulateCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let spec = build_spec(&eff)?;
    let mut side = sidecar("simulate", Some(&spec), &eff);
    let mut table = Table::new("h");
    match c.kind.as_str() {
        "dt" => {
            let cfg = RunConfig::new(eff.seed)
                .with_horizon(Horizon::Steps(c.steps))
                .with_max_events(c.max_events);
            let run = simulate_dt(&spec, &cfg);
            let ex: Vec<_> = run.excursions().collect();
            let n = ex.len().max(1) as f64;
            let law = height_law(&spec, 60);
            for h in 0..=60u64 {
                let count = ex.iter().filter(|e| e.height == h).count() as f64;
                let p = count / n;
                let analytic = if h == 0 { law.atom_at_zero } else { law.masses.mass(h) };
                table.rows.push(Row {
                    index: h as f64,
                    analytic: Some(analytic),
                    oracle: None,
                    mc_estimate: Some(p),
                    mc_stderr: Some((p * (1.0 - p) / n).sqrt()),
                });
            }
            let lens: Vec<f64> = ex.iter().map(|e| e.dt_length as f64).collect();
            let (mean, se) = disaster_core::util::mean_and_stderr(&lens);
            let mu = mean_return_time(&spec);
            println!(
                "dt run: {} steps, {} excursions, mean return {:.6} +- {:.6} (analytic {})",
                c.steps,
                ex.len(),
                mean,
                se,
                mu
            );
            if mu.is_finite() {
                side.oracle_deltas.insert(
                    "mean return time (MC vs closed form)".into(),
                    ComparisonRecord::new(mean, mu, 3.0 * se),
                );
            }
            side.details = Some(json!({"excursions": ex.len(), "steps": c.steps}));
        }
        "ct" => {
            let cfg = RunConfig::new(eff.seed)
                .with_horizon(Horizon::Time(c.time))
                .with_max_events(c.max_events);
            let run = simulate_ct(&spec, &cfg)?;
            let n = run.excursions.len().max(1) as f64;
            let law = height_law(&spec, 60);
            for h in 0..=60u64 {
                let count = run.excursions.iter().filter(|e| e.height == h).count() as f64;
                let p = count / n;
                let analytic = if h == 0 { law.atom_at_zero } else { law.masses.mass(h) };
                table.rows.push(Row {
                    index: h as f64,
                    analytic: Some(analytic),
                    oracle: None,
                    mc_estimate: Some(p),
                    mc_stderr: Some((p * (1.0 - p) / n).sqrt()),
                });
            }
            println!(
                "ct run: elapsed {:.3}, {} events, {} excursions, stop: {:?}{}",
                run.elapsed,
                run.events,
                run.excursions.len(),
                run.stop,
                if run.max_events_anomaly { " (ANOMALY: event cap in recurrent regime)" } else { "" }
            );
            side.details = Some(json!({
                "elapsed": run.elapsed,
                "events": run.events,
                "excursions": run.excursions.len(),
                "stop": format!("{:?}", run.stop),
                "max_events_anomaly": run.max_events_anomaly,
            }));
            if run.stop == StopReason::MaxEventsReached && run.max_events_anomaly {
                eprintln!("warning: event cap exhausted in a recurrent regime");
            }
        }
        other => return Err(CliError::Invalid(format!("unknown --kind {other}; use dt or ct"))),
    }
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    write_artifacts(&eff.out_dir, &timestamped_basename("simulate"), &table, &mut side)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(c: VerifyCmd) -> Result<ExitCode, CliError> {
    let start = Instant::now();
    let eff = resolve(&c.model)?;
    let checks = verify::suite_checks(&c.suite);
    if checks.is_empty() {
        return Err(CliError::Invalid(format!("suite {} matches no checks", c.suite)));
    }
    let mut table = Table::new("x");
    let mut labels = Vec::new();
    let mut side = sidecar("verify", None, &eff);
    let mut all_pass = true;
    let mut idx = 0usize;
    for (name, check) in checks {
        let r = check(eff.seed);
        println!(
            "{} {name} ({:.2}s)",
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds
        );
        all_pass &= r.passed;
        for d in &r.deltas {
            if !d.ok {
                println!("     FAILED {}: got {} want {} (tol {})", d.label, d.got, d.expected, d.tolerance);
            }
            table.rows.push(Row {
                index: idx as f64,
                analytic: Some(d.got),
                oracle: Some(d.expected),
                mc_estimate: None,
                mc_stderr: Some(d.tolerance),
            });
            labels.push(format!("{name}: {}", d.label));
            side.oracle_deltas.insert(
                format!("{name}: {}", d.label),
                ComparisonRecord::new(d.got, d.expected, d.tolerance),
            );
            idx += 1;
        }
    }
    side.row_labels = Some(labels);
    side.details = Some(json!({"suite": c.suite, "seed": eff.seed, "passed": all_pass}));
    side.wall_time_seconds = start.elapsed().as_secs_f64();
    // Fixed basename: consecutive runs with the same seed produce
    // byte-identical CSVs (timing lives only in the JSON sidecar).
    write_artifacts(&eff.out_dir, &format!("verify-{}", c.suite), &table, &mut side)?;
    println!("{}", if all_pass { "verify: all checks passed" } else { "verify: FAILURES" });
    Ok(if all_pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_report(c: ReportCmd) -> Result<ExitCode, CliError> {
    let eff = resolve(&c.model)?;
    let out = &eff.out_dir;
    // Classification grid.
    {
        let start = Instant::now();
        let mut table = Table::new("x");
        let mut labels = Vec::new();
        let mut idx = 0;
        for kind in ["A", "B"] {
            for beta in [0.5, 1.0, 2.0] {
                for alpha in [0.5, 2.0] {
                    let spec = if kind == "A" {
                        ModelSpec::model_a(alpha, beta, 1.0, 1.0)
                    } else {
                        ModelSpec::model_b(alpha, beta, 1.0)
                    }
                    .expect("grid parameters are valid");
                    let class = spec.classify();
                    let code = match class.recurrence {
                        disaster_core::Recurrence::Transient => 0.0,
                        disaster_core::Recurrence::NullRecurrent => 1.0,
                        disaster_core::Recurrence::PositiveRecurrent => 2.0,
                    };
                    table.rows.push(Row { index: idx as f64, analytic: Some(code), ..Default::default() });
                    labels.push(format!(
                        "{kind} beta={beta} alpha={alpha}: {} (0=T,1=NR,2=PR)",
                        class.recurrence
                    ));
                    idx += 1;
                }
            }
        }
        let mut side = sidecar("report", None, &eff);
        side.row_labels = Some(labels);
        side.wall_time_seconds = start.elapsed().as_secs_f64();
        write_artifacts(out, "report-classification", &table, &mut side)?;
    }
    // Invariant + return-time + heights + contact tables for the two
    // flagship critical chains.
    for (tag, spec) in [
        ("modelA", ModelSpec::model_a(1.5, 1.0, 1.0, 1.0).unwrap()),
        ("modelB", ModelSpec::model_b(2.0, 1.0, 1.0).unwrap()),
    ] {
        let start = Instant::now();
        let t = invariant_dt(&spec, 200)?;
        let mu = mean_return_time(&spec);
        let ret = return_time_pmf(&spec, 201);
        let mut table = Table::new("x");
        let mut survival = 1.0;
        for x in 0..=200u64 {
            if x > 0 {
                survival -= ret.mass(x);
            }
            table.rows.push(Row {
                index: x as f64,
                analytic: Some(t.mass(x)),
                oracle: Some(survival / mu),
                ..Default::default()
            });
        }
        let mut side = sidecar("report", Some(&spec), &eff);
        side.wall_time_seconds = start.elapsed().as_secs_f64();
        write_artifacts(out, &format!("report-invariant-{tag}"), &table, &mut side)?;

        let start = Instant::now();
        let g = green_kernel(&spec, 2, 3, 25);
        let oracle = matrix_power_column(&spec, 2, 3, 25);
        let mut table = Table::new("n");
        for n in 0..=25usize {
            table.rows.push(Row {
                index: n as f64,
                analytic: Some(g.coeff(n)),
                oracle: Some(oracle[n]),
                ..Default::default()
            });
        }
        let mut side = sidecar("report", Some(&spec), &eff);
        side.wall_time_seconds = start.elapsed().as_secs_f64();
        write_artifacts(out, &format!("report-green-{tag}"), &table, &mut side)?;

        let start = Instant::now();
        let u = contact_probability(&spec, 2000);
        let mut table = Table::new("n");
        for (n, &un) in u.iter().enumerate() {
            table.rows.push(Row { index: n as f64, analytic: Some(un), ..Default::default() });
        }
        let mut side = sidecar("report", Some(&spec), &eff);
        side.wall_time_seconds = start.elapsed().as_secs_f64();
        write_artifacts(out, &format!("report-contact-{tag}"), &table, &mut side)?;
    }
    // Extinction table for the transient benchmark.
    {
        let start = Instant::now();
        let spec = ModelSpec::model_a(0.5, 2.0, 0.5, 1.0).unwrap();
        let mut table = Table::new("x");
        for x in 0..=50u64 {
            table.rows.push(Row {
                index: x as f64,
                analytic: Some(extinction_prob(&spec, x)),
                ..Default::default()
            });
        }
        let mut side = sidecar("report", Some(&spec), &eff);
        side.wall_time_seconds = start.elapsed().as_secs_f64();
        write_artifacts(out, "report-extinction", &table, &mut side)?;
    }
    // Divisibility threshold sweep of the nu=1 closed form.
    {
        let start = Instant::now();
        let mut table = Table::new("x");
        let mut labels = Vec::new();
        for i in 1..100 {
            let p0 = i as f64 / 100.0;
            let case =
                disaster_core::divisibility::sibuya_stationary_special_case(1.5, p0).unwrap();
            let verdict = disaster_core::divisibility::classify_divisibility(
                &case.pmf_table(220),
                200,
                None,
            )?;
            table.rows.push(Row {
                index: p0,
                analytic: Some(if verdict.id { 1.0 } else { 0.0 }),
                oracle: Some(if verdict.sd { 1.0 } else { 0.0 }),
                ..Default::default()
            });
            labels.push(format!(
                "p0={p0}: thresholds say id={} sd={}",
                case.id, case.sd
            ));
        }
        let mut side = sidecar("report", None, &eff);
        side.row_labels = Some(labels);
        side.wall_time_seconds = start.elapsed().as_secs_f64();
        write_artifacts(out, "report-divisibility-sweep", &table, &mut side)?;
    }
    // Mean return times with the Monte Carlo column.
    {
        let start = Instant::now();
        let mut table = Table::new("x");
        let mut labels = Vec::new();
        for (i, (spec, label)) in [
            (ModelSpec::model_a(2.0, 1.0, 1.0, 1.0).unwrap(), "A alpha=2 nu=1"),
            (ModelSpec::model_b(2.0, 1.0, 1.0).unwrap(), "B alpha=2"),
        ]
        .into_iter()
        .enumerate()
        {
            let mu = mean_return_time(&spec);
            let ex = sample_excursions_dt(&spec, eff.seed, 200_000);
            let lens: Vec<f64> = ex.iter().map(|e| e.dt_length as f64).collect();
            let (mean, se) = disaster_core::util::mean_and_stderr(&lens);
            table.rows.push(Row {
                index: i as f64,
                analytic: Some(mu),
                oracle: None,
                mc_estimate: Some(mean),
                mc_stderr: Some(se),
            });
            labels.push(label.to_string());
        }
        let mut side = sidecar("report", None, &eff);
        side.row_labels = Some(labels);
        side.wall_time_seconds = start.elapsed().as_secs_f64();
        write_artifacts(out, "report-mean-return", &table, &mut side)?;
    }
    println!("report tables written to {}", out.display());
    Ok(ExitCode::SUCCESS)
}
