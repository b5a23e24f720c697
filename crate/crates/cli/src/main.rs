//! `lwa`: command-line front end for detectability analysis of labeled weighted automata.
//!
//! Exit codes: 0 success or HOLDS, 1 FAILS, 2 UNKNOWN, 3 input error.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lwa_core::corpus::{random_automaton, subset_sum_automaton, RandomBounds};
use lwa_core::format::{parse, parse_document, parse_observations, serialize};
use lwa_core::oracle::{
    estimate_enumerated, estimate_witness, oracle_estimate, oracle_falsify, scaled_observations, Counterexample,
};
use lwa_core::report::{
    automaton_dot, estimator_dot, estimator_report, self_composition_dot, self_composition_report, verdict_report,
    SCHEMA_VERSION,
};
use lwa_core::verdict::{steps, Step};
use lwa_core::verify::{aggregate_exit_code, Checker};
use lwa_core::{validate, Engine, Prepared, Property, WeightedAutomaton};

const EXIT_UNKNOWN: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "lwa", version, about = "Detectability of labeled weighted automata over (Q^k,+)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an automaton file and report its structure.
    Validate { file: PathBuf },
    /// Print the normalized automaton: one initial state, all initial weights zero.
    Normalize { file: PathBuf },
    /// Build the self-composition.
    Selfcomp {
        file: PathBuf,
        /// Also write a DOT rendering to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build the observer.
    Observer {
        file: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Build the detector.
    Detector {
        file: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Decide one property, or all four.
    Check { property: PropertyArg, file: PathBuf },
    /// Current-state estimate after a sequence of observations with accumulated weights,
    /// written as "(label,weight);(label,weight)".
    Estimate {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        obs: String,
    },
    /// Generate automata.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Brute-force cross-checks.
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
    /// Write a DOT rendering of the automaton or one of its constructions.
    Export {
        file: PathBuf,
        /// Graphviz DOT output (the only format).
        #[arg(long)]
        dot: bool,
        #[arg(long, value_enum, default_value_t = Structure::Automaton)]
        structure: Structure,
        /// Output path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// The subset-sum reduction: SD fails exactly when some sub-multiset of the weights sums
    /// to the target.
    SubsetSum {
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<u64>,
        #[arg(long)]
        target: u64,
    },
    /// A seeded random automaton.
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 3)]
        events: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = -2, allow_hyphen_values = true)]
        weight_min: i64,
        #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
        weight_max: i64,
    },
}

#[derive(Subcommand)]
enum OracleKind {
    /// Estimate by enumerating runs of bounded length.
    Estimate {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        obs: String,
        #[arg(long, default_value_t = 8)]
        horizon: usize,
    },
    /// Search bounded lassos for a violation of a property.
    Falsify {
        file: PathBuf,
        #[arg(long)]
        property: PropertyArg,
        #[arg(long, default_value_t = 8)]
        horizon: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    Sd,
    Spd,
    Wd,
    Wpd,
    All,
}

impl PropertyArg {
    fn property(self) -> Option<Property> {
        match self {
            PropertyArg::Sd => Some(Property::Sd),
            PropertyArg::Spd => Some(Property::Spd),
            PropertyArg::Wd => Some(Property::Wd),
            PropertyArg::Wpd => Some(Property::Wpd),
            PropertyArg::All => None,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Structure {
    Automaton,
    Selfcomp,
    Observer,
    Detector,
}

/// An error that ends the command with the given exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure { code: EXIT_INPUT, message: message.to_string() }
    }

    fn unknown(message: impl ToString) -> Self {
        Failure { code: EXIT_UNKNOWN, message: message.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn read_input(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::input(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    Ok(text)
}

fn load(path: &Path) -> Result<WeightedAutomaton, Failure> {
    parse(&read_input(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json<T: Serialize>(value: &T) {
    emit(&(serde_json::to_string_pretty(value).expect("reports serialize") + "\n"));
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct ValidationReport {
    schema_version: u32,
    valid: bool,
    errors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    structure: Option<lwa_core::model::StructureReport>,
}

fn cmd_validate(file: &Path) -> Outcome {
    let text = read_input(file)?;
    let doc = parse_document(&text).map_err(|e| Failure::input(format!("{}: {e}", file.display())))?;
    match validate(&doc) {
        Ok(a) => {
            print_json(&ValidationReport {
                schema_version: SCHEMA_VERSION,
                valid: true,
                errors: Vec::new(),
                normalized: Some(a.is_normalized()),
                structure: Some(a.structure_report()),
            });
            Ok(0)
        }
        Err(e) => {
            print_json(&ValidationReport {
                schema_version: SCHEMA_VERSION,
                valid: false,
                errors: e.violations.iter().map(|v| v.to_string()).collect(),
                normalized: None,
                structure: None,
            });
            Ok(EXIT_INPUT)
        }
    }
}

fn cmd_structure(file: &Path, structure: Structure, dot: Option<&Path>) -> Outcome {
    let a = load(file)?;
    let p = Prepared::new(&a);
    let c = Checker::new(&p);
    let text = structure_dot(&c, &a, structure)?;
    let exact = match structure {
        Structure::Selfcomp => {
            let cc = c.self_composition().map_err(Failure::unknown)?;
            print_json(&self_composition_report(&p, &cc));
            cc.possibly_missing.is_empty()
        }
        Structure::Observer | Structure::Detector => {
            let est = if matches!(structure, Structure::Observer) { c.observer() } else { c.detector() }
                .map_err(Failure::unknown)?;
            print_json(&estimator_report(&p, &est));
            est.exact
        }
        Structure::Automaton => true,
    };
    if let Some(path) = dot {
        write_file(path, &text)?;
    }
    Ok(if exact { 0 } else { EXIT_UNKNOWN })
}

fn structure_dot(c: &Checker, a: &WeightedAutomaton, structure: Structure) -> Result<String, Failure> {
    Ok(match structure {
        Structure::Automaton => automaton_dot(a),
        Structure::Selfcomp => self_composition_dot(c.p, &c.self_composition().map_err(Failure::unknown)?),
        Structure::Observer => estimator_dot(c.p, &c.observer().map_err(Failure::unknown)?),
        Structure::Detector => estimator_dot(c.p, &c.detector().map_err(Failure::unknown)?),
    })
}

fn cmd_check(property: PropertyArg, file: &Path) -> Outcome {
    let a = load(file)?;
    let p = Prepared::new(&a);
    let c = Checker::new(&p);
    let verdicts = match property.property() {
        Some(prop) => vec![c.check(prop)],
        None => c.check_all(),
    };
    let code = aggregate_exit_code(&verdicts) as u8;
    print_json(&verdict_report(&p, verdicts));
    Ok(code)
}

#[derive(Serialize)]
struct EstimateReport {
    schema_version: u32,
    scale: i64,
    method: &'static str,
    observations: usize,
    estimate: Vec<String>,
    /// False when some path-weight query was undecided.
    exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon: Option<usize>,
    /// One run per estimated state that produces the observations.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    runs: BTreeMap<String, Vec<Step>>,
}

fn cmd_estimate(file: &Path, obs: &str) -> Outcome {
    let a = load(file)?;
    let p = Prepared::new(&a);
    let e = Engine::new(&p);
    let observations = parse_observations(obs, p.k).map_err(Failure::input)?;
    let (x, exact) = oracle_estimate(&e, &observations).map_err(Failure::input)?;
    let mut runs = BTreeMap::new();
    if let Some(gamma) = scaled_observations(&p, &observations).map_err(Failure::input)? {
        for &q in &x {
            if let Some(path) = estimate_witness(&e, &gamma, q).map_err(Failure::unknown)? {
                runs.insert(p.model.states[q].clone(), steps(&p, &path));
            }
        }
    }
    print_json(&EstimateReport {
        schema_version: SCHEMA_VERSION,
        scale: p.scale,
        method: "successor_chain",
        observations: observations.len(),
        estimate: p.names(&x),
        exact,
        horizon: None,
        runs,
    });
    Ok(if exact { 0 } else { EXIT_UNKNOWN })
}

fn cmd_oracle_estimate(file: &Path, obs: &str, horizon: usize) -> Outcome {
    let a = load(file)?;
    let p = Prepared::new(&a);
    let observations = parse_observations(obs, p.k).map_err(Failure::input)?;
    let x = match scaled_observations(&p, &observations).map_err(Failure::input)? {
        Some(gamma) => estimate_enumerated(&p, &gamma, horizon),
        None => Default::default(),
    };
    print_json(&EstimateReport {
        schema_version: SCHEMA_VERSION,
        scale: p.scale,
        method: "path_enumeration",
        observations: observations.len(),
        estimate: p.names(&x),
        exact: false,
        horizon: Some(horizon),
        runs: BTreeMap::new(),
    });
    Ok(0)
}

#[derive(Serialize)]
struct FalsifyReport {
    schema_version: u32,
    scale: i64,
    property: Property,
    horizon: usize,
    counterexample: Option<Counterexample>,
}

fn cmd_oracle_falsify(file: &Path, property: PropertyArg, horizon: usize) -> Outcome {
    let prop = property.property().ok_or_else(|| Failure::input("falsify needs a single property"))?;
    let a = load(file)?;
    let p = Prepared::new(&a);
    let e = Engine::new(&p);
    let found = oracle_falsify(&e, prop, horizon).map_err(Failure::unknown)?;
    let code = match &found {
        Some(c) if !c.bounded => 1,
        Some(_) => EXIT_UNKNOWN,
        None => 0,
    };
    print_json(&FalsifyReport {
        schema_version: SCHEMA_VERSION,
        scale: p.scale,
        property: prop,
        horizon,
        counterexample: found,
    });
    Ok(code)
}

fn cmd_export(file: &Path, structure: Structure, output: Option<&Path>) -> Outcome {
    let a = load(file)?;
    let p = Prepared::new(&a);
    let c = Checker::new(&p);
    let text = structure_dot(&c, &a, structure)?;
    match output {
        Some(path) => write_file(path, &text)?,
        None => emit(&text),
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Normalize { file } => {
            emit(&serialize(&load(&file)?.normalize()));
            Ok(0)
        }
        Command::Selfcomp { file, dot } => cmd_structure(&file, Structure::Selfcomp, dot.as_deref()),
        Command::Observer { file, dot } => cmd_structure(&file, Structure::Observer, dot.as_deref()),
        Command::Detector { file, dot } => cmd_structure(&file, Structure::Detector, dot.as_deref()),
        Command::Check { property, file } => cmd_check(property, &file),
        Command::Estimate { file, obs } => cmd_estimate(&file, &obs),
        Command::Gen { kind } => {
            let a = match kind {
                GenKind::SubsetSum { weights, target } => {
                    if weights.is_empty() || weights.contains(&0) || target == 0 {
                        return Err(Failure::input("weights and target must be positive"));
                    }
                    subset_sum_automaton(&weights, target)
                }
                GenKind::Random { seed, states, events, k, weight_min, weight_max } => {
                    if states == 0 || events == 0 || k == 0 || weight_min > weight_max {
                        return Err(Failure::input(
                            "states, events and k must be positive and weight-min <= weight-max",
                        ));
                    }
                    let bounds = RandomBounds {
                        max_states: states,
                        max_events: events,
                        k,
                        weight_min,
                        weight_max,
                        ..RandomBounds::default()
                    };
                    random_automaton(seed, &bounds)
                }
            };
            emit(&serialize(&a));
            Ok(0)
        }
        Command::Oracle { kind } => match kind {
            OracleKind::Estimate { file, obs, horizon } => cmd_oracle_estimate(&file, &obs, horizon),
            OracleKind::Falsify { file, property, horizon } => cmd_oracle_falsify(&file, property, horizon),
        },
        Command::Export { file, dot, structure, output } => {
            if !dot {
                return Err(Failure::input("export needs --dot"));
            }
            cmd_export(&file, structure, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("lwa: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
