//! Command-line surface: argument types and their execution.
//!
//! Every command returns a JSON report; checks also return a verdict.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{find_gamma0, peierls_sum_check, BoundConstants, BoundExponents};
use crate::coarse::{check_frame, extract_contours, extract_stripes, CoarseFields, FrameSpec, PhaseRule};
use crate::error::{Error, Result};
use crate::experiments::{magnetization_csv, scenario_contour_census, scenario_magnetization, sweep_cells, CensusPlan, SweepPlan};
use crate::functional::{check_decay, excess_bound_check, fit_decay, minimize, DecayInstance, ExcessInstance, MinimizeOptions, Problem};
use crate::io::{field_csv, measurements_csv, params_hash, profile_csv, read_spins, write_spins, CensusFile, Config, RunDir, RunStatus};
use crate::mc::run;
use crate::meanfield::solve_mbeta;
use crate::oracle;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kac", version, about = "Layered Kac-Ising simulator and verification toolkit")]
#[command(after_help = "Configuration values can be overridden with KAC__SECTION__KEY=value environment variables.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Heat-bath simulation from a TOML configuration.
    Simulate(RunArgs),
    /// Coarse fields, contours and stripes of a spin snapshot.
    CoarseGrain(CoarseGrainArgs),
    /// Exact-enumeration checks.
    Oracle(OracleArgs),
    /// Free-energy functional: minimize, decay or excess.
    Functional(FunctionalArgs),
    /// Peierls summability inequalities.
    Bounds(BoundsArgs),
    /// Solve m = tanh(βm).
    Meanfield(MeanfieldArgs),
    /// Magnetization over a grid of (β, γ, A, boundary).
    Sweep(RunArgs),
    /// Contour census of sampled configurations.
    Census(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; a run directory is created beneath it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RuleArg {
    Both,
    Either,
}

#[derive(Debug, Args)]
pub struct CoarseGrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub frame_blocks: usize,
    #[arg(long, default_value_t = 0)]
    pub frame_layers: usize,
    #[arg(long, value_enum, default_value_t = RuleArg::Both)]
    pub rule: RuleArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum OracleCheck {
    /// Enumeration against the transfer matrix on the fixture lattices.
    Equivalence,
    /// Heat-bath single-site marginals against enumeration.
    McMarginals,
    /// Toy contour weight and its fitted bound constant.
    ToyContour,
    ConditionalLaw,
    Holley,
    Fkg,
    Deviation,
    Interpolation,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(value_enum)]
    pub check: OracleCheck,
    /// JSON file with optional `seed`, `instances`, `sweeps`.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub seed: Option<u64>,
    pub instances: Option<usize>,
    pub sweeps: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FunctionalMode {
    Minimize,
    Decay,
    Excess,
}

#[derive(Debug, Args)]
pub struct FunctionalArgs {
    #[arg(value_enum)]
    pub mode: FunctionalMode,
    /// JSON instance descriptor.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for CSV profile dumps.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeFile {
    pub problem: Problem,
    #[serde(default)]
    pub options: MinimizeOptions,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayFile {
    pub instances: Vec<DecayInstance>,
    #[serde(default)]
    pub options: MinimizeOptions,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcessFile {
    pub instances: Vec<ExcessInstance>,
    pub c_grid: Vec<f64>,
    #[serde(default)]
    pub options: MinimizeOptions,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundsMode {
    Check,
    Gamma0,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(value_enum)]
    pub mode: BoundsMode,
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub ctilde: f64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub a: f64,
    #[arg(long = "A")]
    pub vertical: f64,
    /// γ for `check`.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 121)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct MeanfieldArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub beta: Vec<f64>,
}

/// A command's JSON report and whether its checks passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, passed: true }
    }

    fn verdict(report: Value, passed: bool) -> Self {
        Outcome { report, passed }
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
}

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::CoarseGrain(a) => coarse_grain(a),
        Command::Oracle(a) => oracle_check(a),
        Command::Functional(a) => functional(a),
        Command::Bounds(a) => bounds(a),
        Command::Meanfield(a) => Ok(Outcome::ok(Value::Array(
            a.beta.iter().map(|&b| to_value(&solve_mbeta(b))).collect(),
        ))),
        Command::Sweep(a) => sweep(a),
        Command::Census(a) => census(a),
    }
}

fn output_base(config: &Config, out: &Option<PathBuf>) -> PathBuf {
    out.clone()
        .or_else(|| config.output.as_ref().map(|o| PathBuf::from(&o.dir)))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Runs `body` inside a fresh run directory, writing an aborted manifest
/// when it fails.
fn in_run_dir(config: &Config, out: &Option<PathBuf>, name: &str, body: impl FnOnce(&mut RunDir) -> Result<Outcome>) -> Result<Outcome> {
    let mut dir = RunDir::create(&output_base(config, out), config, name)?;
    match body(&mut dir) {
        Ok(mut outcome) => {
            let path = dir.path.clone();
            let manifest = dir.finish(RunStatus::Completed)?;
            if let Value::Object(map) = &mut outcome.report {
                map.insert("run_dir".into(), json!(path));
                map.insert("config_hash".into(), json!(manifest.config_hash));
            }
            Ok(outcome)
        }
        Err(e) => {
            dir.note(e.to_string());
            dir.finish(RunStatus::Aborted)?;
            Err(e)
        }
    }
}

fn simulate(args: &RunArgs) -> Result<Outcome> {
    let config = Config::load(&args.config)?;
    let spec = config.run_spec()?;
    in_run_dir(&config, &args.out, "simulate", |dir| {
        let out = run(&spec)?;
        dir.write("measurements.csv", &measurements_csv(&out.records))?;
        let hash = params_hash(&spec.params);
        let mut replicas = Vec::new();
        for r in &out.replicas {
            let mut bytes = Vec::new();
            write_spins(&mut bytes, &r.final_config, &hash).expect("in-memory write");
            dir.write(&format!("spins_r{}.bin", r.replica), &bytes)?;
            replicas.push(json!({
                "replica": r.replica,
                "flip_rate": r.flip_rate,
                "max_cache_drift": r.max_cache_drift,
                "mean_magnetization": out.time_average(r.replica, crate::mc::Channel::Magnetization),
            }));
        }
        Ok(Outcome::ok(json!({ "replicas": replicas, "records": out.records.len() })))
    })
}

fn coarse_grain(args: &CoarseGrainArgs) -> Result<Outcome> {
    let config = Config::load(&args.config)?;
    let file = std::fs::File::open(&args.input).map_err(|e| Error::io(&args.input, e))?;
    let (cfg, hash) = read_spins(std::io::BufReader::new(file))?;
    let rule = match args.rule {
        RuleArg::Both => PhaseRule::BothNeighbours,
        RuleArg::Either => PhaseRule::EitherNeighbour,
    };
    let scales = config.block_scales();
    let m_beta = solve_mbeta(config.model.beta()).m_beta;
    let fields = CoarseFields::compute_with_rule(&cfg, scales, m_beta, rule)?;
    let frame = FrameSpec { blocks: args.frame_blocks, layers: args.frame_layers };
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let field_path = out.join("fields.csv");
    std::fs::write(&field_path, field_csv(&fields)).map_err(|e| Error::io(&field_path, e))?;
    let stripes = extract_stripes(&fields);
    let mut report = json!({
        "params_hash_matches": hash == params_hash(&config.model),
        "blocks_per_layer": fields.blocks_per_layer(),
        "sub_blocks_per_layer": fields.sub_blocks_per_layer(),
        "stripes": stripes,
        "fields": field_path,
    });
    let periodic = cfg.lattice().horizontal == crate::model::HorizontalBc::Periodic;
    if periodic && frame == FrameSpec::default() {
        report["note"] = json!("periodic layers: only fields and stripes are reported");
        return Ok(Outcome::ok(report));
    }
    let sign = check_frame(&fields, frame)?;
    let contours = extract_contours(&fields, frame)?;
    let census = CensusFile::new(&fields, sign, &contours);
    let census_path = out.join("census.json");
    let text = serde_json::to_string_pretty(&census).expect("census serializes");
    std::fs::write(&census_path, text).map_err(|e| Error::io(&census_path, e))?;
    report["contours"] = json!(contours.len());
    report["census"] = json!(census_path);
    Ok(Outcome::ok(report))
}

fn oracle_check(args: &OracleArgs) -> Result<Outcome> {
    let cfg: OracleConfig = match &args.config {
        Some(p) => read_json(p)?,
        None => OracleConfig::default(),
    };
    let seed = cfg.seed.unwrap_or(7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match args.check {
        OracleCheck::Equivalence => {
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for f in oracle::lattice_fixtures() {
                let (lat, kernel) = f.lattice()?;
                let sys = oracle::LatticeSystem::all_free(lat, kernel.clone(), f.beta, f.epsilon);
                let e = oracle::enumerate_z(&sys, &oracle::ConstraintSpec::none())?;
                let t = oracle::transfer_matrix_log_z(&lat, &kernel, f.beta, f.epsilon)?;
                let rel = (e.log_z - t).exp_m1().abs();
                worst = worst.max(rel);
                rows.push(json!({ "fixture": f, "enumeration_log_z": e.log_z, "transfer_log_z": t, "relative": rel }));
            }
            Ok(Outcome::verdict(json!({ "rows": rows, "worst_relative": worst, "tolerance": 1e-10 }), worst < 1e-10))
        }
        OracleCheck::McMarginals => {
            let lat = crate::model::Lattice::new(8, 2, crate::model::HorizontalBc::Plus, crate::model::VerticalBc::Minus, 2)?;
            let sweeps = cfg.sweeps.unwrap_or(1_000_000);
            let r = oracle::mc_marginals(lat, 0.5, 2.0, 0.25, sweeps, sweeps / 100, 100, seed)?;
            let passed = r.within(3.0);
            Ok(Outcome::verdict(to_value(&r), passed))
        }
        OracleCheck::ToyContour => {
            let exps = BoundExponents::new(0.1, 0.01, 2.0)?;
            let mut rows = Vec::new();
            let mut passed = true;
            for beta in [1.5, 2.0, 2.5, 3.0] {
                let toy = oracle::toy_contour(beta)?;
                let w = oracle::contour_weight(&toy.system, &toy.numerator, &toy.denominator)?;
                let n0 = toy.specification.iter().filter(|e| e.contains(&0)).count();
                let stats = crate::coarse::ContourStats { n0, stripes: 0, s_total: 0, support_size: toy.support.len() * 4 };
                let c = crate::bounds::largest_feasible_c(w.weight, &stats, toy.system.kernel.gamma(), &exps);
                passed &= w.weight < 1.0;
                rows.push(json!({ "beta": beta, "weight": w, "stats": stats, "largest_feasible_c": c }));
            }
            Ok(Outcome::verdict(json!({ "rows": rows }), passed))
        }
        OracleCheck::ConditionalLaw => {
            let (template, kernel) = oracle::conditional_law_template()?;
            let n = cfg.instances.unwrap_or(50);
            let verdicts = oracle::run_conditional_law(&template, &kernel, n, &mut rng)?;
            let worst = verdicts.iter().map(|v| v.discrepancy()).fold(0.0, f64::max);
            let checked = verdicts.iter().filter(|v| v.is_checked()).count();
            let passed = checked == n && worst < 1e-12;
            Ok(Outcome::verdict(json!({ "instances": n, "checked": checked, "worst_discrepancy": worst, "tolerance": 1e-12 }), passed))
        }
        OracleCheck::Holley => {
            let family = oracle::block_family(6);
            let big_m = 2.0 * crate::model::KacProfile::value(&crate::model::CosineProfile, 0.0) + 1.0;
            let n = cfg.instances.unwrap_or(20);
            let mut reports = Vec::new();
            for _ in 0..n {
                let inst = family.sample(&mut rng)?;
                reports.push(oracle::check_holley(&inst, big_m)?);
            }
            let passed = reports.iter().all(|r| r.holds());
            Ok(Outcome::verdict(json!({ "M": big_m, "reports": reports }), passed))
        }
        OracleCheck::Fkg => {
            let mut reports = Vec::new();
            for n in [6, 8] {
                let inst = oracle::block_family(n).sample(&mut rng)?;
                reports.push(oracle::check_fkg_sandwich(&inst, 3.0, oracle::EventFamily::AllSubsets)?);
            }
            let inst = oracle::block_family(12).sample(&mut rng)?;
            reports.push(oracle::check_fkg_sandwich(&inst, 3.0, oracle::EventFamily::Windows { extra: 64, seed })?);
            let passed = reports.iter().all(|r| r.holds());
            Ok(Outcome::verdict(json!({ "reports": reports }), passed))
        }
        OracleCheck::Deviation => {
            let n = cfg.instances.unwrap_or(5);
            let mut reports = Vec::new();
            for _ in 0..n {
                let inst = oracle::block_family(12).sample(&mut rng)?;
                reports.push(oracle::check_deviation_bound(&inst, &oracle::DEVIATION_B_GRID, &[0.01, 0.1, 1.0])?);
            }
            let passed = reports.iter().all(|r| r.all_nonzero() && r.monotone && r.all_feasible());
            Ok(Outcome::verdict(json!({ "reports": reports }), passed))
        }
        OracleCheck::Interpolation => {
            let mut reports = Vec::new();
            let mut passed = true;
            for inst in oracle::stripe_fixtures() {
                let r = oracle::check_interpolation(&inst, inst.epsilon(), 1e-11)?;
                passed &= r.converged && r.residual < 1e-8;
                if inst.constraint == oracle::StripeConstraint::Mixed {
                    passed &= r.lhs < 0.0;
                }
                reports.push(r);
            }
            Ok(Outcome::verdict(json!({ "reports": reports, "tolerance": 1e-8 }), passed))
        }
    }
}

fn write_profile(out: &Option<PathBuf>, name: &str, problem: &Problem, profile: &[Vec<f64>]) -> Result<Option<PathBuf>> {
    let Some(dir) = out else { return Ok(None) };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let bytes = profile_csv(profile, |l, i| problem.layers[l].cells[i].is_some(), problem.grid.spacing);
    std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(Some(path))
}

fn functional(args: &FunctionalArgs) -> Result<Outcome> {
    match args.mode {
        FunctionalMode::Minimize => {
            let file: MinimizeFile = read_json(&args.config)?;
            let m = minimize(&file.problem, &file.options)?;
            let csv = write_profile(&args.out, "profile.csv", &file.problem, &m.profile)?;
            Ok(Outcome::ok(json!({
                "value": m.value,
                "iterations": m.iterations,
                "pg_norm": m.pg_norm,
                "converged": m.converged,
                "monotone": m.monotone,
                "seed": m.seed,
                "profile": m.profile,
                "csv": csv,
            })))
        }
        FunctionalMode::Decay => {
            let file: DecayFile = read_json(&args.config)?;
            let mut rows = Vec::new();
            let mut points = Vec::new();
            for (k, inst) in file.instances.iter().enumerate() {
                let r = check_decay(inst, &file.options)?;
                let csv = write_profile(&args.out, &format!("decay_{k}.csv"), &inst.problem()?, &r.minimum.profile)?;
                points.push((r.ell_plus, r.mid_deviation));
                rows.push(json!({
                    "ell_plus": r.ell_plus,
                    "mid_deviation": r.mid_deviation,
                    "edge_deviation": r.edge_deviation,
                    "converged": r.minimum.converged,
                    "csv": csv,
                }));
            }
            let gamma = file.instances.first().map(|i| i.gamma).unwrap_or(1.0);
            Ok(Outcome::ok(json!({ "rows": rows, "fit": fit_decay(gamma, &points, 1e-12) })))
        }
        FunctionalMode::Excess => {
            let file: ExcessFile = read_json(&args.config)?;
            let mut rows = Vec::new();
            for inst in &file.instances {
                let r = excess_bound_check(inst, &file.c_grid, &file.options)?;
                rows.push(json!({
                    "etas": inst.etas,
                    "n": r.n,
                    "p": r.p,
                    "excess": r.excess,
                    "margins": r.margins,
                    "largest_c": r.largest_c,
                    "converged": r.minimum.converged,
                }));
            }
            Ok(Outcome::ok(json!({ "rows": rows })))
        }
    }
}

fn bounds(args: &BoundsArgs) -> Result<Outcome> {
    let exps = BoundExponents::new(args.alpha, args.a, args.vertical)?;
    let consts = BoundConstants::new(args.c, args.ctilde);
    match args.mode {
        BoundsMode::Check => {
            let gamma = args.gamma.ok_or_else(|| Error::invalid("gamma", "`bounds check` needs --gamma"))?;
            let v = peierls_sum_check(gamma, &exps, &consts)?;
            let mut report = to_value(&v);
            if v.diverges() {
                report["verdict"] = json!("series diverges");
            }
            Ok(Outcome::verdict(report, v.passes))
        }
        BoundsMode::Gamma0 => {
            let r = find_gamma0(&exps, &consts, args.lo, args.hi, args.points)?;
            Ok(Outcome::ok(to_value(&r)))
        }
    }
}

fn sweep(args: &RunArgs) -> Result<Outcome> {
    let config = Config::load(&args.config)?;
    let sw = config.sweep.clone().ok_or_else(|| Error::invalid("sweep", "section [sweep] is required"))?;
    let lattice = config.lattice.clone().ok_or_else(|| Error::invalid("lattice", "section [lattice] is required"))?;
    let run = config.run.clone().ok_or_else(|| Error::invalid("run", "section [run] is required"))?;
    let plan = SweepPlan {
        alpha: config.model.alpha(),
        a: config.model.accuracy(),
        width: lattice.width,
        height: lattice.height,
        sweeps: run.sweeps,
        burn_in: run.burn_in,
        measure_every: run.measure_every,
        replicas: run.replicas,
        seed: run.seed,
        max_site_sweeps: sw.max_site_sweeps,
    };
    let cells = sweep_cells(&sw.betas, &sw.gammas, &sw.vertical_exponents, &sw.bcs);
    in_run_dir(&config, &args.out, "sweep", |dir| {
        let rows = scenario_magnetization(&plan, &cells)?;
        dir.write("sweep.csv", &magnetization_csv(&plan, &rows))?;
        Ok(Outcome::ok(json!({ "rows": rows })))
    })
}

fn census(args: &RunArgs) -> Result<Outcome> {
    let config = Config::load(&args.config)?;
    let c = config.census.clone().ok_or_else(|| Error::invalid("census", "section [census] is required"))?;
    let spec = config.run_spec()?;
    let plan = CensusPlan {
        samples: c.samples,
        sample_every: c.sample_every,
        frame: FrameSpec { blocks: c.frame_blocks, layers: c.frame_layers },
        rule: c.phase_rule,
        site: c.site.unwrap_or((spec.lattice.width / 2, spec.lattice.height / 2)),
    };
    in_run_dir(&config, &args.out, "census", |dir| {
        let report = scenario_contour_census(&spec, &plan)?;
        let text = serde_json::to_vec_pretty(&report).expect("census serializes");
        dir.write("census.json", &text)?;
        Ok(Outcome::ok(json!({
            "snapshots": report.snapshots,
            "frame_violations": report.frame_violations,
            "contours": report.contours.len(),
            "contours_per_site": report.contours_per_site,
            "frequency_n0_at_least_1": report.frequency_n0_at_least_1,
            "frequency_n0_at_least_2": report.frequency_n0_at_least_2,
            "site_frequency": report.site_frequency,
        })))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_every_subcommand() {
        for args in [
            vec!["kac", "simulate", "--config", "a.toml"],
            vec!["kac", "coarse-grain", "--config", "a.toml", "--input", "s.bin"],
            vec!["kac", "oracle", "conditional-law"],
            vec!["kac", "functional", "decay", "--config", "d.json"],
            vec!["kac", "bounds", "check", "--c", "1", "--ctilde", "0.2", "--alpha", "0.1", "--a", "0.01", "--A", "2", "--gamma", "1e-4"],
            vec!["kac", "meanfield", "--beta", "1.5", "2"],
            vec!["kac", "sweep", "--config", "a.toml"],
            vec!["kac", "census", "--config", "a.toml"],
        ] {
            Cli::try_parse_from(&args).unwrap_or_else(|e| panic!("{args:?}: {e}"));
        }
        assert!(Cli::try_parse_from(["kac", "bogus"]).is_err());
    }

    #[test]
    fn bounds_verdicts() {
        let cli = Cli::try_parse_from([
            "kac", "bounds", "check", "--c", "1", "--ctilde", "0.2", "--alpha", "0.1", "--a", "0.01", "--A", "2", "--gamma", "0.9",
        ])
        .unwrap();
        let out = execute(&cli.command).unwrap();
        assert_eq!(out.exit_code(), EXIT_CHECK_FAILED);
    }
}
