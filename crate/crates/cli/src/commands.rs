//! The four subcommands: bound reports, randomized verification suites,
//! counterexample generation, and protocol simulation.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde_json::{json, Value};

use qkdsec::adversary::{self, KpaSplit, SubsetSpec};
use qkdsec::bb84sim::{
    exact_joint, run_protocol, sweep_and_check, EveStrategy, ProtocolConfig, ProtocolRun,
    ProtocolTranscript, SweepGrid,
};
use qkdsec::bounds::{
    case_study_report, eq6_bound, eq7_bound, preset_report, CasePreset, ReportParams,
    SecurityLevelInput, SecurityReport,
};
use qkdsec::counterexamples::{kpa_spike_build, tightness_witness_eq6, HalfBiased};
use qkdsec::oracles;
use qkdsec::probtools::variational_distance;
use qkdsec::quantstates::helstrom_success;
use qkdsec::Error as CoreError;

use crate::envelope::{fmt17, CheckRecord, CsvTable, OutputEnvelope};

/// Bound-check slack used in the simulator's row checks.
const ROW_TOL: f64 = 1e-10;

pub struct CommandOutput {
    pub envelope: OutputEnvelope,
    pub table: CsvTable,
}

pub enum CliError {
    /// Bad flags or parameters (exit 2); optionally carries a structured
    /// payload, e.g. the infeasibility record of a spike request.
    Usage(String, Option<Box<CommandOutput>>),
    /// Exact-mode capacity exceeded (exit 3).
    Capacity(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into(), None)
    }
}

fn map_core(err: CoreError) -> CliError {
    match err {
        CoreError::Capacity { .. } => CliError::Capacity(err.to_string()),
        other => CliError::usage(other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// report

pub struct ReportArgs {
    pub preset: Option<String>,
    pub n: Option<u32>,
    pub d: Option<f64>,
    pub p1: Option<f64>,
    pub markov: u32,
    pub subset_bits: Option<u32>,
    pub kpa_bits: Option<u32>,
}

pub fn cmd_report(args: &ReportArgs, seed: u64) -> Result<CommandOutput, CliError> {
    let report = match (&args.preset, args.n) {
        (Some(name), None) => {
            let preset: CasePreset = name.parse().map_err(map_core)?;
            preset_report(preset).map_err(map_core)?
        }
        (None, Some(n)) => {
            let input = match (args.d, args.p1) {
                (Some(d), None) => SecurityLevelInput::TraceDistance(d),
                (None, Some(p1)) => SecurityLevelInput::AvgWholeKeyGuess(p1),
                _ => {
                    return Err(CliError::usage(
                        "custom reports need exactly one of --d or --p1",
                    ))
                }
            };
            let params = ReportParams {
                key_bits: n,
                input,
                markov_applications: args.markov,
                subset_bits: args.subset_bits.unwrap_or_else(|| n.min(8)),
                kpa_target_bits: args.kpa_bits.unwrap_or_else(|| n.saturating_sub(1).min(8)),
            };
            case_study_report(&params).map_err(map_core)?
        }
        _ => {
            return Err(CliError::usage(
                "pass either --preset or a custom --n with --d/--p1",
            ))
        }
    };

    let params = json!({
        "preset": args.preset,
        "markov_applications": report.markov_applications,
        "subset_bits": report.subset_bits,
        "kpa_target_bits": report.kpa_target_bits,
    });
    let results = serde_json::to_value(&report).expect("report serializes");
    let mut envelope = OutputEnvelope::new("report", seed, params, results);

    let base = (0.5_f64).powi(report.n.min(i32::MAX as u32) as i32);
    let recomputed = -(base + report.individual_bound_after_markov.excess).log2();
    envelope.checks.push(CheckRecord::close(
        "effective-bits-recompute",
        report.effective_protected_bits,
        recomputed,
        0.0,
    ));
    envelope.checks.push(CheckRecord::upper(
        "whole-key-bound-in-range",
        report.avg_whole_key_bound.max(report.kpa_bound),
        1.0,
        0.0,
    ));

    let table = report_table(&report);
    Ok(CommandOutput { envelope, table })
}

fn report_table(report: &SecurityReport) -> CsvTable {
    let header = [
        "n",
        "d",
        "avg_whole_key_bound",
        "avg_subset_bound",
        "kpa_bound",
        "individual_excess",
        "individual_failure_prob",
        "ber_epsilon_prime",
        "ber_lower",
        "effective_protected_bits",
    ]
    .map(String::from)
    .to_vec();
    let row = vec![
        report.n.to_string(),
        fmt17(report.d),
        fmt17(report.avg_whole_key_bound),
        fmt17(report.avg_subset_bound),
        fmt17(report.kpa_bound),
        fmt17(report.individual_bound_after_markov.excess),
        fmt17(report.individual_bound_after_markov.failure_prob),
        fmt17(report.ber_epsilon_prime),
        fmt17(report.ber_lower),
        fmt17(report.effective_protected_bits),
    ];
    CsvTable {
        header,
        rows: vec![row],
    }
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Eq1,
    Eq6,
    Eq7,
    Posterior,
    Helstrom,
    Markov,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "eq1" => Ok(Self::Eq1),
            "eq6" => Ok(Self::Eq6),
            "eq7" => Ok(Self::Eq7),
            "posterior" => Ok(Self::Posterior),
            "helstrom" => Ok(Self::Helstrom),
            "markov" => Ok(Self::Markov),
            "all" => Ok(Self::All),
            other => Err(format!(
                "unknown suite '{other}' (eq1|eq6|eq7|posterior|helstrom|markov|all)"
            )),
        }
    }
}

pub fn cmd_verify(
    suite: Suite,
    trials: u32,
    seed: u64,
    inject_failure: bool,
) -> Result<CommandOutput, CliError> {
    if trials == 0 {
        return Err(CliError::usage("--trials must be positive"));
    }
    let mut checks = Vec::new();
    let selected = |s: Suite| suite == s || suite == Suite::All;

    if selected(Suite::Eq6) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(6));
        let mut worst = (f64::INFINITY, 0.0, 0.0);
        for _ in 0..trials {
            let bits = rng.random_range(1..=4);
            let num_y = rng.random_range(1..=32);
            let joint = oracles::random_joint(&mut rng, bits, num_y);
            let guess = adversary::optimal_guess_whole(&joint);
            let bound = eq6_bound(bits, joint.distance_from_ideal()).expect("valid level");
            if bound - guess < worst.0 {
                worst = (bound - guess, guess, bound);
            }
        }
        checks.push(CheckRecord::upper(
            "eq6-whole-key-average-bound",
            worst.1,
            worst.2,
            1e-10,
        ));
    }
    if selected(Suite::Eq1) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(1));
        let mut worst = (f64::INFINITY, 0.0, 0.0);
        for _ in 0..trials {
            let bits = rng.random_range(1..=4);
            let num_y = rng.random_range(1..=32);
            let joint = oracles::random_joint(&mut rng, bits, num_y);
            let subset = oracles::random_subset(&mut rng, bits);
            let guess = adversary::optimal_guess_subset(&joint, &subset).expect("valid subset");
            let bound = eq7_bound(subset.len() as u32, joint.distance_from_ideal())
                .expect("valid level");
            if bound - guess < worst.0 {
                worst = (bound - guess, guess, bound);
            }
        }
        checks.push(CheckRecord::upper(
            "eq1-subset-average-bound",
            worst.1,
            worst.2,
            1e-10,
        ));
    }
    if selected(Suite::Eq7) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(7));
        let mut worst = (f64::INFINITY, 0.0, 0.0);
        for _ in 0..trials {
            let bits = rng.random_range(2..=4);
            let num_y = rng.random_range(1..=32);
            let joint = oracles::random_joint(&mut rng, bits, num_y);
            let split = oracles::random_split(&mut rng, bits);
            let guess = adversary::kpa_guess(&joint, &split).expect("valid split");
            let bound = eq7_bound(split.target.len() as u32, joint.distance_from_ideal())
                .expect("valid level");
            if bound - guess < worst.0 {
                worst = (bound - guess, guess, bound);
            }
        }
        checks.push(CheckRecord::upper(
            "eq7-kpa-average-bound",
            worst.1,
            worst.2,
            1e-10,
        ));
    }
    if selected(Suite::Posterior) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(11));
        let mut worst = (0.0_f64, 0.0, 0.0);
        for _ in 0..trials {
            let bits = rng.random_range(1..=4);
            let num_y = rng.random_range(1..=16);
            let joint = oracles::random_uniform_prior_joint(&mut rng, bits, num_y);
            let dec = adversary::posterior_decomposition(&joint);
            let d = joint.distance_from_ideal();
            if (dec.mean - d).abs() > worst.0 {
                worst = ((dec.mean - d).abs(), dec.mean, d);
            }
        }
        checks.push(CheckRecord::close(
            "posterior-decomposition-identity",
            worst.1,
            worst.2,
            1e-10,
        ));
    }
    if selected(Suite::Helstrom) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(13));
        let mut worst = (0.0_f64, 0.0, 0.0);
        for _ in 0..trials {
            let rho0 = if rng.random_bool(0.5) {
                oracles::random_density(&mut rng, 2)
            } else {
                oracles::random_pure_qubit(&mut rng)
            };
            let rho1 = if rng.random_bool(0.5) {
                oracles::random_density(&mut rng, 2)
            } else {
                oracles::random_pure_qubit(&mut rng)
            };
            let p0 = rng.random_range(0.05..0.95);
            let closed = helstrom_success(p0, &rho0, 1.0 - p0, &rho1).expect("valid inputs");
            let grid = oracles::helstrom_projective_oracle(p0, &rho0, 1.0 - p0, &rho1);
            if (closed - grid).abs() > worst.0 {
                worst = ((closed - grid).abs(), closed, grid);
            }
        }
        checks.push(CheckRecord::close(
            "helstrom-vs-projective-grid",
            worst.1,
            worst.2,
            1e-3,
        ));
    }
    if selected(Suite::Markov) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(17));
        let mut worst = (f64::NEG_INFINITY, 0.0, 0.0);
        for _ in 0..trials {
            let eps = 10f64.powf(rng.random_range(-8.0..-0.3));
            let trial = oracles::markov_empirical_trial(&mut rng, eps);
            if trial.tail_prob - trial.bound > worst.0 {
                worst = (trial.tail_prob - trial.bound, trial.tail_prob, trial.bound);
            }
        }
        checks.push(CheckRecord::upper(
            "markov-empirical-tail-bound",
            worst.1,
            worst.2,
            1e-12,
        ));
    }
    if inject_failure {
        checks.push(CheckRecord::failed("injected-failure"));
    }

    let params = json!({
        "suite": format!("{suite:?}").to_lowercase(),
        "trials": trials,
        "inject_failure": inject_failure,
    });
    let passed = checks.iter().filter(|c| c.pass).count();
    let results = json!({
        "suites_run": checks.len(),
        "suites_passed": passed,
    });
    let mut envelope = OutputEnvelope::new("verify", seed, params, results);
    envelope.checks = checks;
    let table = CsvTable::from_checks(&envelope.checks);
    Ok(CommandOutput { envelope, table })
}

// ---------------------------------------------------------------------------
// counterexample

pub struct CounterexampleArgs {
    pub kind: String,
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub bits: Option<u32>,
    pub known: Option<u32>,
    pub spike: Option<f64>,
}

pub fn cmd_counterexample(args: &CounterexampleArgs, seed: u64) -> Result<CommandOutput, CliError> {
    match args.kind.as_str() {
        "half-biased" => {
            let n = args.n.ok_or_else(|| CliError::usage("half-biased needs --n"))?;
            let eps = args.eps.ok_or_else(|| CliError::usage("half-biased needs --eps"))?;
            let hb = HalfBiased::new(n, eps).map_err(map_core)?;
            let dist = hb.distribution();
            let v = variational_distance(&dist, &qkdsec::probtools::Distribution::uniform(n))
                .expect("equal sizes");
            let leak = hb.leak_probability();
            let mut results = json!({
                "n_outcomes": n,
                "eps": eps,
                "high_prob": (1.0 + 2.0 * eps) / n as f64,
                "low_prob": (1.0 - 2.0 * eps) / n as f64,
                "recomputed_variational_distance": v,
                "leak_mass": leak,
                "leak_mass_minus_eps": leak - eps,
            });
            if n <= 64 {
                results["distribution"] =
                    serde_json::to_value(&dist).expect("distribution serializes");
            }
            let mut envelope =
                OutputEnvelope::new("counterexample", seed, json!({"kind": "half-biased"}), results);
            envelope.checks.push(CheckRecord::close(
                "variational-distance-equals-eps",
                v,
                eps,
                1e-12,
            ));
            envelope.checks.push(CheckRecord::close(
                "leak-mass-is-half-plus-eps",
                leak,
                0.5 + eps,
                0.0,
            ));
            let table = CsvTable::from_checks(&envelope.checks);
            Ok(CommandOutput { envelope, table })
        }
        "kpa-spike" => {
            let bits = args.bits.ok_or_else(|| CliError::usage("kpa-spike needs --bits"))?;
            let known = args.known.ok_or_else(|| CliError::usage("kpa-spike needs --known"))?;
            let eps = args.eps.ok_or_else(|| CliError::usage("kpa-spike needs --eps"))?;
            let requested = args.spike.ok_or_else(|| CliError::usage("kpa-spike needs --spike"))?;
            let params = json!({
                "kind": "kpa-spike",
                "bits": bits,
                "known": known,
                "eps": eps,
                "spike": requested,
            });
            let spike = match kpa_spike_build(bits, known, eps, requested) {
                Ok(s) => s,
                Err(CoreError::Infeasible { detail, max_spike }) => {
                    let results = json!({
                        "infeasible": true,
                        "detail": detail,
                        "max_spike": max_spike,
                    });
                    let envelope =
                        OutputEnvelope::new("counterexample", seed, params, results.clone());
                    let table = CsvTable {
                        header: vec!["infeasible".into(), "max_spike".into()],
                        rows: vec![vec!["true".into(), fmt17(max_spike)]],
                    };
                    return Err(CliError::Usage(
                        "requested spike is infeasible".into(),
                        Some(Box::new(CommandOutput { envelope, table })),
                    ));
                }
                Err(e) => return Err(map_core(e)),
            };
            let worst =
                adversary::kpa_guess_worst_case(&spike.joint, &spike.split).map_err(map_core)?;
            let avg = adversary::kpa_guess(&spike.joint, &spike.split).map_err(map_core)?;
            let bound = eq7_bound(spike.split.target.len() as u32, spike.achieved_d)
                .expect("valid level");
            let results = json!({
                "achieved_d": spike.achieved_d,
                "flag_outcome": spike.flag_outcome,
                "worst_case_known_value": worst.known_value,
                "worst_case_outcome": worst.outcome,
                "worst_case_event_prob": worst.event_prob,
                "worst_case_conditional_guess": worst.prob,
                "averaged_kpa_guess": avg,
                "averaged_bound": bound,
                "joint": serde_json::to_value(&spike.joint).expect("joint serializes"),
            });
            let mut envelope = OutputEnvelope::new("counterexample", seed, params, results);
            envelope.checks.push(CheckRecord::upper(
                "criterion-within-budget",
                spike.achieved_d,
                eps,
                0.0,
            ));
            envelope.checks.push(CheckRecord::lower(
                "worst-case-conditional-at-least-spike",
                worst.prob,
                requested,
                0.0,
            ));
            envelope.checks.push(CheckRecord::upper(
                "averaged-kpa-bound-still-holds",
                avg,
                bound,
                ROW_TOL,
            ));
            let table = CsvTable::from_checks(&envelope.checks);
            Ok(CommandOutput { envelope, table })
        }
        "tightness" => {
            let bits = args.bits.ok_or_else(|| CliError::usage("tightness needs --bits"))?;
            let eps = args.eps.ok_or_else(|| CliError::usage("tightness needs --eps"))?;
            let joint = tightness_witness_eq6(bits, eps).map_err(map_core)?;
            let d = joint.distance_from_ideal();
            let guess = adversary::optimal_guess_whole(&joint);
            let base = (0.5_f64).powi(bits as i32);
            let bound = eq6_bound(bits, d).expect("valid level");
            let results = json!({
                "achieved_d": d,
                "optimal_guess_whole": guess,
                "uniform_baseline": base,
                "whole_key_bound": bound,
                "gap_over_eps": if eps > 0.0 { (guess - base) / eps } else { 1.0 },
                "joint": serde_json::to_value(&joint).expect("joint serializes"),
            });
            let mut envelope = OutputEnvelope::new(
                "counterexample",
                seed,
                json!({"kind": "tightness", "bits": bits, "eps": eps}),
                results,
            );
            envelope
                .checks
                .push(CheckRecord::close("criterion-at-eps", d, eps, 1e-9));
            envelope.checks.push(CheckRecord::upper(
                "bound-respected",
                guess,
                bound,
                ROW_TOL,
            ));
            envelope.checks.push(CheckRecord::lower(
                "gap-at-least-half-eps",
                guess - base,
                0.5 * eps * (1.0 - base),
                1e-12,
            ));
            let table = CsvTable::from_checks(&envelope.checks);
            Ok(CommandOutput { envelope, table })
        }
        other => Err(CliError::usage(format!(
            "unknown counterexample kind '{other}' (half-biased|kpa-spike|tightness)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// simulate

pub struct SimulateArgs {
    pub m: Option<usize>,
    pub q: Option<f64>,
    pub l: Option<u32>,
    pub strategy: Option<String>,
    pub sample_fraction: Option<f64>,
    pub threshold: Option<f64>,
    pub ec_efficiency: Option<f64>,
    pub exact: bool,
    pub sweep: Option<String>,
    pub config: Option<PathBuf>,
    pub emit_joint: bool,
}

/// Resolve the protocol config: defaults, then config file, then flags.
pub fn resolve_protocol_config(
    args: &SimulateArgs,
    seed_flag: Option<u64>,
    env_seed: Option<u64>,
) -> Result<ProtocolConfig, CliError> {
    let mut cfg = ProtocolConfig {
        rng_seed: env_seed.unwrap_or(1),
        ..ProtocolConfig::default()
    };
    if let Some(path) = &args.config {
        let map = crate::config::parse_file(path).map_err(CliError::usage)?;
        crate::config::apply(&mut cfg, &map).map_err(CliError::usage)?;
    }
    if let Some(m) = args.m {
        cfg.m_qubits = m;
    }
    if let Some(q) = args.q {
        cfg.intercept_fraction = q;
    }
    if let Some(l) = args.l {
        cfg.final_key_bits = l;
    }
    if let Some(s) = &args.strategy {
        cfg.eve_strategy = s.parse::<EveStrategy>().map_err(|e| CliError::usage(e.to_string()))?;
    }
    if let Some(f) = args.sample_fraction {
        cfg.qber_sample_fraction = f;
    }
    if let Some(t) = args.threshold {
        cfg.qber_abort_threshold = t;
    }
    if let Some(f) = args.ec_efficiency {
        cfg.ec_efficiency = f;
    }
    if let Some(seed) = seed_flag {
        cfg.rng_seed = seed;
    }
    cfg.validate().map_err(map_core)?;
    Ok(cfg)
}

pub fn cmd_simulate(
    args: &SimulateArgs,
    seed_flag: Option<u64>,
    env_seed: Option<u64>,
) -> Result<CommandOutput, CliError> {
    let cfg = resolve_protocol_config(args, seed_flag, env_seed)?;
    if let Some(spec) = &args.sweep {
        return sweep_output(&cfg, spec);
    }

    let params = serde_json::to_value(&cfg).expect("config serializes");
    let transcript = match run_protocol(&cfg).map_err(map_core)? {
        ProtocolRun::Aborted { qber_estimate } => {
            let results = json!({"aborted": true, "qber_estimate": qber_estimate});
            let envelope = OutputEnvelope::new("simulate", cfg.rng_seed, params, results);
            let table = CsvTable {
                header: vec!["aborted".into(), "qber_estimate".into()],
                rows: vec![vec!["true".into(), fmt17(qber_estimate)]],
            };
            return Ok(CommandOutput { envelope, table });
        }
        ProtocolRun::Completed(t) => *t,
    };

    let mut results = transcript_summary(&cfg, &transcript);
    let mut envelope = OutputEnvelope::new("simulate", cfg.rng_seed, params, Value::Null);

    if args.exact {
        let joint = exact_joint(&cfg, &transcript).map_err(map_core)?;
        let d = joint.distance_from_ideal();
        let ell = cfg.final_key_bits;
        let guess = adversary::optimal_guess_whole(&joint);
        let whole_bound = eq6_bound(ell, d).expect("valid level");
        envelope.checks.push(CheckRecord::upper(
            "eq6-whole-key",
            guess,
            whole_bound,
            ROW_TOL,
        ));

        let first_bit = SubsetSpec::new(vec![0]).expect("bit 0 exists");
        let sub_guess =
            adversary::optimal_guess_subset(&joint, &first_bit).expect("valid subset");
        let sub_bound = eq7_bound(1, d).expect("valid level");
        envelope.checks.push(CheckRecord::upper(
            "eq1-first-bit",
            sub_guess,
            sub_bound,
            ROW_TOL,
        ));

        let mut exact_block = json!({
            "d": d,
            "view_outcomes": joint.num_outcomes(),
            "guess_whole": guess,
            "whole_bound": whole_bound,
            "subset_guess": sub_guess,
            "subset_bound": sub_bound,
        });
        if ell >= 2 {
            let half = (ell as usize).div_ceil(2);
            let split = KpaSplit::new(
                SubsetSpec::new((0..half).collect()).expect("non-empty"),
                SubsetSpec::new((half..ell as usize).collect()).expect("non-empty"),
            )
            .expect("disjoint");
            let kpa = adversary::kpa_guess(&joint, &split).expect("valid split");
            let kpa_bound =
                eq7_bound((ell as usize - half) as u32, d).expect("valid level");
            envelope
                .checks
                .push(CheckRecord::upper("eq7-kpa-split", kpa, kpa_bound, ROW_TOL));
            exact_block["kpa_guess"] = json!(kpa);
            exact_block["kpa_bound"] = json!(kpa_bound);
        }
        if args.emit_joint {
            if joint.probs().len() <= 4096 {
                exact_block["joint"] = serde_json::to_value(&joint).expect("joint serializes");
            } else {
                exact_block["joint_omitted"] =
                    json!(format!("{} cells exceed the emission cap", joint.probs().len()));
            }
        }
        results["exact"] = exact_block;
    }
    envelope.results = results;

    let table = simulate_table(&envelope);
    Ok(CommandOutput { envelope, table })
}

fn transcript_summary(cfg: &ProtocolConfig, t: &ProtocolTranscript) -> Value {
    let intercepted = t.eve_intercept_mask.iter().filter(|&&b| b).count();
    let sampled = t.sampled_mask.iter().filter(|&&b| b).count();
    let mut summary = json!({
        "m_qubits": cfg.m_qubits,
        "sifted": t.sifted_positions().len(),
        "sampled": sampled,
        "kept": t.kept_len(),
        "intercepted": intercepted,
        "qber_estimate": t.qber_estimate,
        "ec_leak_bits": t.ec_leak_bits,
        "toeplitz_rank": t.toeplitz_rank,
        "pa_margin_ok": t.pa_margin_ok,
        "final_key": t.final_key,
        "final_key_bits": cfg.final_key_bits,
    });
    if let Some(view) = &t.eve_view {
        summary["eve_view"] = serde_json::to_value(view).expect("view serializes");
        let best = view.probs().iter().cloned().fold(0.0, f64::max);
        summary["eve_view_max"] = json!(best);
    }
    if cfg.m_qubits <= 256 {
        summary["transcript"] = serde_json::to_value(t).expect("transcript serializes");
    }
    summary
}

fn simulate_table(envelope: &OutputEnvelope) -> CsvTable {
    let r = &envelope.results;
    let pick = |key: &str| -> String {
        match &r[key] {
            Value::Number(n) => n
                .as_u64()
                .map(|u| u.to_string())
                .or_else(|| n.as_f64().map(fmt17))
                .unwrap_or_default(),
            Value::Bool(b) => b.to_string(),
            _ => String::new(),
        }
    };
    let mut header: Vec<String> = [
        "m_qubits",
        "sifted",
        "sampled",
        "kept",
        "intercepted",
        "qber_estimate",
        "ec_leak_bits",
        "toeplitz_rank",
        "final_key",
    ]
    .map(String::from)
    .to_vec();
    let mut row: Vec<String> = header.iter().map(|k| pick(k)).collect();
    if let Value::Object(exact) = &r["exact"] {
        for key in ["d", "guess_whole", "whole_bound", "kpa_guess", "kpa_bound"] {
            if let Some(v) = exact.get(key).and_then(Value::as_f64) {
                header.push(key.into());
                row.push(fmt17(v));
            }
        }
    }
    CsvTable {
        header,
        rows: vec![row],
    }
}

fn parse_range_f64(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::usage(format!("range '{spec}' is not start:step:end")));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse().map_err(|e| CliError::usage(format!("range '{spec}': {e}"))))
        .collect::<Result<_, _>>()?;
    let (start, step, end) = (nums[0], nums[1], nums[2]);
    if step <= 0.0 || end < start {
        return Err(CliError::usage(format!("range '{spec}' is empty or descending")));
    }
    let mut values = Vec::new();
    let mut i = 0;
    loop {
        let v = start + step * i as f64;
        if v > end + 1e-9 {
            break;
        }
        values.push(v);
        i += 1;
    }
    Ok(values)
}

fn sweep_output(base: &ProtocolConfig, spec: &str) -> Result<CommandOutput, CliError> {
    let mut q_values = None;
    let mut l_values = None;
    for part in spec.split(',') {
        let Some((key, range)) = part.split_once('=') else {
            return Err(CliError::usage(format!("sweep term '{part}' is not key=range")));
        };
        match key.trim() {
            "q" => q_values = Some(parse_range_f64(range)?),
            "l" => {
                l_values = Some(
                    parse_range_f64(range)?
                        .into_iter()
                        .map(|v| v.round() as u32)
                        .collect::<Vec<u32>>(),
                )
            }
            other => return Err(CliError::usage(format!("unknown sweep key '{other}'"))),
        }
    }
    let grid = SweepGrid {
        q_values: q_values.ok_or_else(|| CliError::usage("sweep needs a q=... range"))?,
        l_values: l_values.ok_or_else(|| CliError::usage("sweep needs an l=... range"))?,
    };
    let rows = sweep_and_check(base, &grid).map_err(map_core)?;

    let mut envelope = OutputEnvelope::new(
        "simulate",
        base.rng_seed,
        json!({
            "base": serde_json::to_value(base).expect("config serializes"),
            "sweep": spec,
        }),
        json!({"rows": serde_json::to_value(&rows).expect("rows serialize")}),
    );
    for row in &rows {
        if row.status != "ok" {
            continue;
        }
        let tag = format!("q{}-l{}", row.q, row.l);
        envelope.checks.push(CheckRecord::upper(
            format!("row-{tag}-eq6"),
            row.guess_whole.unwrap_or(0.0),
            row.whole_bound.unwrap_or(1.0),
            ROW_TOL,
        ));
        envelope.checks.push(CheckRecord::upper(
            format!("row-{tag}-eq1"),
            row.subset_guess.unwrap_or(0.0),
            row.subset_bound.unwrap_or(1.0),
            ROW_TOL,
        ));
        if let (Some(kg), Some(kb)) = (row.kpa_guess, row.kpa_bound) {
            envelope.checks.push(CheckRecord::upper(
                format!("row-{tag}-eq7"),
                kg,
                kb,
                ROW_TOL,
            ));
        }
    }

    let header = [
        "q", "l", "seed", "status", "sifted", "kept", "leak_bits", "d", "guess_whole",
        "whole_bound", "subset_guess", "subset_bound", "kpa_guess", "kpa_bound", "checks_pass",
        "note",
    ]
    .map(String::from)
    .to_vec();
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let table_rows = rows
        .iter()
        .map(|r| {
            vec![
                fmt17(r.q),
                r.l.to_string(),
                r.seed.to_string(),
                r.status.clone(),
                r.sifted.to_string(),
                r.kept.to_string(),
                r.leak_bits.to_string(),
                opt(r.d),
                opt(r.guess_whole),
                opt(r.whole_bound),
                opt(r.subset_guess),
                opt(r.subset_bound),
                opt(r.kpa_guess),
                opt(r.kpa_bound),
                r.checks_pass.to_string(),
                r.note.clone(),
            ]
        })
        .collect();
    let table = CsvTable {
        header,
        rows: table_rows,
    };
    Ok(CommandOutput { envelope, table })
}
