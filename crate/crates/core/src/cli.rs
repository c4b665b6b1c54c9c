//! Command-line surface: argument and file parsing, pipelines, JSON reports.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::feasibility::{branch_bound, check_feasible, is_polar_great_circle, EfficiencyPair};
use crate::gram::{build_grams, Branch, GateSpec, GramSet};
use crate::linalg::PSD_TOL;
use crate::optimize::{maximize_branch_with, OptimizationResult, OptimizerOptions};
use crate::simulate::{exact_run, gate_target, monte_carlo};
use crate::state::{make_state_set, QubitState, StateSet};
use crate::synthesis::{build_branch, joint_audit, synthesize, SynthesisResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Slack allowed when renormalizing user-supplied amplitudes.
const INPUT_NORM_SLACK: f64 = 1e-6;
const POLAR_TOL: f64 = 1e-12;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Bound,
    Optimize,
    Synthesize,
    Simulate,
    Audit,
    Demo,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Bound => "bound",
            Command::Optimize => "optimize",
            Command::Synthesize => "synthesize",
            Command::Simulate => "simulate",
            Command::Audit => "audit",
            Command::Demo => "demo",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "compgate", version, about = "Probabilistic complement-superposition gates on qubit pairs")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,

    /// `hadamard`, `identity`, or `a_re,a_im,b_re,b_im`
    #[arg(long)]
    pub gate: Option<String>,

    /// `bloch:THETA,PHI` (radians) or `amp:RE0,IM0,RE1,IM1`
    #[arg(long)]
    pub state1: Option<String>,

    /// Second input state, same syntax as `--state1`
    #[arg(long)]
    pub state2: Option<String>,

    /// `g1,g2` or `g1,g2,d1,d2`
    #[arg(long)]
    pub eff: Option<String>,

    /// Monte Carlo trials per input (default 10000)
    #[arg(long)]
    pub trials: Option<u64>,

    /// Sampler seed; input i uses seed + i (default 0)
    #[arg(long)]
    pub seed: Option<u64>,

    /// PSD tolerance, relative to max(1, ‖M‖_F)
    #[arg(long)]
    pub tol: Option<f64>,

    /// Restrict the optimizer to equal efficiencies
    #[arg(long)]
    pub equal_eff: bool,

    /// JSON object supplying any of the flags above
    #[arg(long)]
    pub input: Option<PathBuf>,
}

/// Flag values read from `--input`; keys match the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub gate: Option<String>,
    pub state1: Option<String>,
    pub state2: Option<String>,
    pub eff: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub equal_eff: Option<bool>,
}

impl FileConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ParseError(format!("input file: {e}")))
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub gate: GateSpec,
    pub gate_text: String,
    pub states: [QubitState; 2],
    pub state_texts: [String; 2],
    pub eff: Option<EfficiencyPair>,
    pub trials: u64,
    pub seed: u64,
    pub tol: f64,
    pub equal_eff: bool,
}

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const POLAR_PRESET: [&str; 2] = ["bloch:0,0", "bloch:1.0471975511965976,0"];

impl RunConfig {
    /// Merges command-line flags over file values; flags win.
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let file = match &cli.input {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::ParseError(format!("cannot read {}: {e}", path.display())))?;
                FileConfig::from_json(&text)?
            }
            None => FileConfig::default(),
        };
        let pick = |flag: &Option<String>, fallback: &Option<String>| flag.clone().or_else(|| fallback.clone());

        let gate_text = pick(&cli.gate, &file.gate).unwrap_or_else(|| "hadamard".to_owned());
        let s1 = pick(&cli.state1, &file.state1);
        let s2 = pick(&cli.state2, &file.state2);
        let state_texts = match (s1, s2, cli.command) {
            (Some(a), Some(b), _) => [a, b],
            (None, None, Command::Demo) => POLAR_PRESET.map(str::to_owned),
            _ => return Err(Error::ParseError("both --state1 and --state2 are required".into())),
        };
        let eff = pick(&cli.eff, &file.eff).map(|t| parse_eff(&t)).transpose()?;
        let tol = cli.tol.or(file.tol).unwrap_or(PSD_TOL);
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(Error::ParseError(format!("tolerance must be finite and non-negative, got {tol}")));
        }
        let trials = cli.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(Error::ParseError("--trials must be at least 1".into()));
        }

        Ok(RunConfig {
            command: cli.command,
            gate: parse_gate(&gate_text)?,
            gate_text,
            states: [parse_state(&state_texts[0])?, parse_state(&state_texts[1])?],
            state_texts,
            eff,
            trials,
            seed: cli.seed.or(file.seed).unwrap_or(0),
            tol,
            equal_eff: cli.equal_eff || file.equal_eff.unwrap_or(false),
        })
    }
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| Error::ParseError(format!("bad number {t:?} in {what}")))?;
            if !v.is_finite() {
                return Err(Error::ParseError(format!("non-finite number in {what}")));
            }
            Ok(v)
        })
        .collect()
}

/// Parses `bloch:θ,φ` or `amp:re0,im0,re1,im1`.
///
/// Amplitudes within `1e-6` of unit norm are renormalized; anything further
/// off is rejected.
pub fn parse_state(text: &str) -> Result<QubitState> {
    let (kind, body) = text
        .split_once(':')
        .ok_or_else(|| Error::ParseError(format!("state {text:?} needs a bloch: or amp: prefix")))?;
    match kind.trim() {
        "bloch" => {
            let v = parse_floats(body, "bloch state")?;
            let [theta, phi] = v[..] else {
                return Err(Error::ParseError("bloch state takes two angles".into()));
            };
            Ok(QubitState::from_bloch(theta.rem_euclid(2.0 * PI), phi.rem_euclid(2.0 * PI)))
        }
        "amp" => {
            let v = parse_floats(body, "amp state")?;
            let [r0, i0, r1, i1] = v[..] else {
                return Err(Error::ParseError("amp state takes four numbers".into()));
            };
            let (a, b) = (Complex64::new(r0, i0), Complex64::new(r1, i1));
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if (norm - 1.0).abs() > INPUT_NORM_SLACK {
                return Err(Error::NotNormalized { norm });
            }
            QubitState::normalized(a, b)
        }
        other => Err(Error::ParseError(format!("unknown state kind {other:?}"))),
    }
}

pub fn parse_gate(text: &str) -> Result<GateSpec> {
    match text.trim() {
        "hadamard" => Ok(GateSpec::hadamard()),
        "identity" => Ok(GateSpec::identity()),
        body => {
            let v = parse_floats(body, "gate")?;
            let [ar, ai, br, bi] = v[..] else {
                return Err(Error::ParseError("gate takes `hadamard` or four numbers".into()));
            };
            let (a, b) = (Complex64::new(ar, ai), Complex64::new(br, bi));
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if (norm - 1.0).abs() > INPUT_NORM_SLACK {
                return Err(Error::InvalidGate(format!("|a|^2 + |b|^2 = {}, expected 1", norm * norm)));
            }
            GateSpec::new(a / norm, b / norm)
        }
    }
}

/// `g1,g2` (both branches share it) or `g1,g2,d1,d2`.
pub fn parse_eff(text: &str) -> Result<EfficiencyPair> {
    let v = parse_floats(text, "efficiency list")?;
    match v[..] {
        [g1, g2] => EfficiencyPair::new([g1, g2], [g1, g2]),
        [g1, g2, d1, d2] => EfficiencyPair::new([g1, g2], [d1, d2]),
        _ => Err(Error::ParseError("--eff takes two or four numbers".into())),
    }
}

/// Exit code plus the JSON document for stdout.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: Value,
}

fn cvalue(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn error_report(command: Option<Command>, err: &Error) -> Value {
    json!({
        "schema": SCHEMA_VERSION,
        "command": command.map(Command::name),
        "error": { "kind": err.kind(), "message": err.to_string() },
    })
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InfeasibleEfficiency { .. } => EXIT_INFEASIBLE,
        _ => EXIT_INPUT_ERROR,
    }
}

struct Pipeline<'a> {
    cfg: &'a RunConfig,
    set: StateSet,
    grams: GramSet,
    doc: serde_json::Map<String, Value>,
}

impl<'a> Pipeline<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        let set = make_state_set(cfg.states[0], cfg.states[1])?;
        let grams = build_grams(&set, &cfg.gate, None)?;
        let mut doc = serde_json::Map::new();
        doc.insert("schema".into(), json!(SCHEMA_VERSION));
        doc.insert("command".into(), json!(cfg.command.name()));
        doc.insert(
            "inputs".into(),
            json!({
                "gate": cfg.gate,
                "gate_spec": cfg.gate_text,
                "state1": cfg.states[0],
                "state2": cfg.states[1],
                "state_specs": cfg.state_texts,
                "eff": cfg.eff,
                "trials": cfg.trials,
                "seed": cfg.seed,
                "tol": cfg.tol,
                "equal_eff": cfg.equal_eff,
            }),
        );
        doc.insert(
            "state_set".into(),
            json!({
                "psibar1": set.psibar1,
                "psibar2": set.psibar2,
                "pair_overlap": cvalue(set.pair_overlap),
                "det_modulus": set.det_modulus,
                "polar_great_circle": is_polar_great_circle(&set, POLAR_TOL),
            }),
        );
        doc.insert("grams".into(), serde_json::to_value(&grams).expect("serializable"));
        Ok(Pipeline { cfg, set, grams, doc })
    }

    fn bounds(&mut self) {
        let b = [Branch::Plus, Branch::Minus].map(|br| branch_bound(&self.grams, br));
        self.doc.insert("bounds".into(), json!({ "plus": b[0], "minus": b[1] }));
    }

    fn optimize(&mut self) -> [OptimizationResult; 2] {
        let opts = OptimizerOptions {
            equal_eff: self.cfg.equal_eff,
            ..OptimizerOptions::default()
        };
        let r = [Branch::Plus, Branch::Minus].map(|br| {
            let (x_in, x_out) = self.grams.branch(br);
            maximize_branch_with(x_in, x_out, opts)
        });
        self.doc.insert("optimizer".into(), json!({ "plus": r[0], "minus": r[1] }));
        r
    }

    /// Explicit `--eff` if given, else the optimizer's choice.
    fn efficiencies(&mut self) -> Result<EfficiencyPair> {
        let eff = match self.cfg.eff {
            Some(e) => e,
            None => {
                let r = self.optimize();
                EfficiencyPair::new(r[0].best_eff, r[1].best_eff)?
            }
        };
        let report = check_feasible(&self.grams, &eff, self.cfg.tol)?;
        self.doc.insert("efficiencies".into(), json!(eff));
        self.doc.insert("feasibility".into(), serde_json::to_value(&report).expect("serializable"));
        if !report.feasible {
            let worst = report.class_plus.min_eigenvalue.min(report.class_minus.min_eigenvalue);
            return Err(Error::InfeasibleEfficiency { min_eigenvalue: worst });
        }
        Ok(eff)
    }

    fn synthesize(&mut self, eff: &EfficiencyPair) -> Result<[SynthesisResult; 2]> {
        let mut machines = Vec::with_capacity(2);
        let mut entries = serde_json::Map::new();
        for (key, br) in [("plus", Branch::Plus), ("minus", Branch::Minus)] {
            let syn = build_branch(&self.set, &self.cfg.gate, eff.branch(br), br, self.cfg.tol)?;
            let m = synthesize(&syn)?;
            entries.insert(
                key.into(),
                json!({
                    "eff": syn.eff,
                    "residual": syn.residual,
                    "residual_eigs": syn.residual_eigs,
                    "coeff_matrix": syn.coeff_matrix,
                    "failure_states": syn.failure_states,
                    "targets": syn.targets,
                    "unitary": m.unitary,
                    "diagnostics": m.diagnostics,
                }),
            );
            machines.push(m);
        }
        self.doc.insert("synthesis".into(), Value::Object(entries));
        let [plus, minus]: [SynthesisResult; 2] = machines.try_into().expect("two branches");
        Ok([plus, minus])
    }

    fn simulate(&mut self, machines: &[SynthesisResult; 2]) {
        let mut entries = serde_json::Map::new();
        for (key, m) in [("plus", &machines[0]), ("minus", &machines[1])] {
            let inputs = m.branch.inputs(&self.set);
            let runs: Vec<Value> = inputs
                .iter()
                .enumerate()
                .map(|(i, input)| {
                    let target = gate_target(m, input);
                    let exact = match exact_run(m, input, &target) {
                        Ok(r) => json!({
                            "success_prob": r.success_prob,
                            "post_state": r.post_state,
                            "fidelity": r.fidelity,
                        }),
                        Err(e) => json!({ "error": e.kind(), "fidelity": null }),
                    };
                    let seed = self.cfg.seed.wrapping_add(i as u64);
                    json!({
                        "input_index": i + 1,
                        "exact": exact,
                        "monte_carlo": monte_carlo(m, input, self.cfg.trials, seed),
                    })
                })
                .collect();
            entries.insert(key.into(), Value::Array(runs));
        }
        self.doc.insert("simulation".into(), Value::Object(entries));
    }

    fn audit(&mut self, eff: &EfficiencyPair) -> Result<()> {
        let report = joint_audit(&self.set, &self.cfg.gate, eff, self.cfg.tol)?;
        self.doc.insert("audit".into(), serde_json::to_value(&report).expect("serializable"));
        Ok(())
    }

    fn finish(self) -> Value {
        Value::Object(self.doc)
    }
}

fn run_inner(cfg: &RunConfig) -> std::result::Result<Value, (Error, Option<Value>)> {
    let mut p = Pipeline::new(cfg).map_err(|e| (e, None))?;
    macro_rules! attempt {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(err) => return Err((err, Some(Value::Object(p.doc.clone())))),
            }
        };
    }
    p.bounds();
    match cfg.command {
        Command::Bound => {}
        Command::Optimize => {
            p.optimize();
        }
        Command::Synthesize => {
            let eff = attempt!(p.efficiencies());
            attempt!(p.synthesize(&eff));
        }
        Command::Simulate => {
            let eff = attempt!(p.efficiencies());
            let machines = attempt!(p.synthesize(&eff));
            p.simulate(&machines);
        }
        Command::Audit => {
            let eff = attempt!(p.efficiencies());
            attempt!(p.audit(&eff));
        }
        Command::Demo => {
            if cfg.eff.is_some() {
                p.optimize();
            }
            let eff = attempt!(p.efficiencies());
            let machines = attempt!(p.synthesize(&eff));
            p.simulate(&machines);
            attempt!(p.audit(&eff));
        }
    }
    Ok(p.finish())
}

/// Runs one command. Failures produce a report with an `error` object and
/// whatever partial results were computed before the failure.
pub fn run(cfg: &RunConfig) -> RunOutcome {
    match run_inner(cfg) {
        Ok(report) => RunOutcome {
            exit_code: EXIT_OK,
            report,
        },
        Err((err, partial)) => {
            let mut report = error_report(Some(cfg.command), &err);
            if let (Some(Value::Object(partial)), Value::Object(obj)) = (partial, &mut report) {
                for (k, v) in partial {
                    obj.entry(k).or_insert(v);
                }
            }
            RunOutcome {
                exit_code: exit_code_for(&err),
                report,
            }
        }
    }
}

/// Recursively checks that every number in a report is finite.
pub fn all_numbers_finite(v: &Value) -> bool {
    match v {
        Value::Number(n) => n.as_f64().is_some_and(f64::is_finite),
        Value::Array(a) => a.iter().all(all_numbers_finite),
        Value::Object(o) => o.values().all(all_numbers_finite),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cfg(command: Command, s1: &str, s2: &str) -> RunConfig {
        let cli = Cli::parse_from(["compgate", command.name(), "--state1", s1, "--state2", s2]);
        RunConfig::from_cli(&cli).unwrap()
    }

    #[test]
    fn state_spec_examples() {
        let s = parse_state("bloch:0,0").unwrap();
        assert_eq!(s.amplitudes(), [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);

        let s = parse_state("amp:0.7071067812,0,0.7071067812,0").unwrap();
        assert!((s.alpha().re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.beta().re - FRAC_1_SQRT_2).abs() < 1e-15);

        assert!(matches!(parse_state("amp:1,0,1,0"), Err(Error::NotNormalized { .. })));
        assert!(matches!(parse_state("polar:1,2"), Err(Error::ParseError(_))));
        assert!(matches!(parse_state("bloch:1"), Err(Error::ParseError(_))));
        assert!(matches!(parse_state("bloch:x,0"), Err(Error::ParseError(_))));
    }

    #[test]
    fn gate_and_eff_parsing() {
        assert_eq!(parse_gate("hadamard").unwrap(), GateSpec::hadamard());
        let g = parse_gate("0.6,0,0,0.8").unwrap();
        assert_eq!(g.b(), Complex64::new(0.0, 0.8));
        assert!(matches!(parse_gate("1,0,1,0"), Err(Error::InvalidGate(_))));

        let e = parse_eff("0.5,0.25").unwrap();
        assert_eq!(e.delta, [0.5, 0.25]);
        let e = parse_eff("0.5,0.25,0.1,0.2").unwrap();
        assert_eq!(e.delta, [0.1, 0.2]);
        assert!(matches!(parse_eff("1.5,0"), Err(Error::EffOutOfRange { .. })));
        assert!(matches!(parse_eff("0.5"), Err(Error::ParseError(_))));
    }

    #[test]
    fn demo_polar_preset() {
        let cli = Cli::parse_from(["compgate", "demo"]);
        let out = run(&RunConfig::from_cli(&cli).unwrap());
        assert_eq!(out.exit_code, 0);
        let r = &out.report;
        assert_eq!(r["schema"], 1);
        assert_eq!(r["bounds"]["plus"]["value"], 1.0);
        assert_eq!(r["optimizer"]["plus"]["best_average"], 1.0);
        let f = r["simulation"]["plus"][0]["exact"]["fidelity"].as_f64().unwrap();
        assert!(f >= 1.0 - 1e-9);
        assert!(all_numbers_finite(r));
    }

    #[test]
    fn optimize_polar_pair() {
        let out = run(&cfg(Command::Optimize, "bloch:0,0", "bloch:1.0471975512,0"));
        assert_eq!(out.exit_code, 0);
        for br in ["plus", "minus"] {
            assert_eq!(out.report["optimizer"][br]["best_eff"], json!([1.0, 1.0]));
        }
    }

    #[test]
    fn infeasible_eff_exits_two() {
        let cli = Cli::parse_from([
            "compgate", "synthesize", "--state1", "bloch:0,0", "--state2", "bloch:1.5707963267948966,1.5707963267948966",
            "--eff", "1,1",
        ]);
        let out = run(&RunConfig::from_cli(&cli).unwrap());
        assert_eq!(out.exit_code, 2);
        assert_eq!(out.report["error"]["kind"], "InfeasibleEfficiency");
        assert!(out.report["feasibility"]["feasible"] == false);
    }

    #[test]
    fn dependent_pair_exits_one() {
        let out = run(&cfg(Command::Bound, "bloch:0,0", "amp:1,0,0,0"));
        assert_eq!(out.exit_code, 1);
        assert_eq!(out.report["error"]["kind"], "LinearlyDependentPair");
    }

    #[test]
    fn reports_are_byte_identical() {
        let c = cfg(Command::Simulate, "bloch:0.4,1.1", "bloch:2.0,-0.3");
        let a = serde_json::to_string(&run(&c).report).unwrap();
        let b = serde_json::to_string(&run(&c).report).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn file_config_rejects_unknown_keys() {
        assert!(FileConfig::from_json(r#"{"state1": "bloch:0,0", "bogus": 1}"#).is_err());
        let f = FileConfig::from_json(r#"{"state1": "bloch:0,0", "equal-eff": true, "trials": 5}"#).unwrap();
        assert_eq!(f.equal_eff, Some(true));
        assert_eq!(f.trials, Some(5));
    }
}
