//! `choquet`: scenario-driven front end for the engine.
//!
//! Data goes to stdout, diagnostics to stderr. Exit codes: 0 on success,
//! 1 on invalid input (or a false verdict under `--strict`), 2 on usage
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use choquet_core::json::{format_g17, to_json_string};
use choquet_core::order::{self, TestUtility};
use choquet_core::representation::{ranking_from_labels, RepresentationError};
use choquet_core::scenario::{results_csv, table_csv, value_records, ValueRecord};
use choquet_core::{
    build_nested_chain, check_axioms, distribution_function, extract_distortion, parse_scenario, quantiles,
    rd_choquet, rd_choquet_oracle, verify_representation, DistortedChoquet, Lift, PluginRisk, RiskMeasure,
    Scenario,
};

const SEED_ENV: &str = "CHOQUET_SEED";

#[derive(Parser)]
#[command(name = "choquet", version, about = "Randomly distorted Choquet integrals on finite spaces")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse and validate a scenario file.
    Validate { file: PathBuf },
    /// Evaluate one position under one random distortion.
    Eval {
        file: PathBuf,
        #[arg(long)]
        position: String,
        #[arg(long)]
        distortion: String,
        /// Add a midpoint-rule column with this step.
        #[arg(long)]
        oracle: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Decide a dominance relation between two positions.
    Dominance {
        file: PathBuf,
        #[arg(long, value_enum)]
        order: Order,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Random utilities tried by the icx falsifier after all calls.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Exit 1 when the relation does not hold.
        #[arg(long)]
        strict: bool,
    },
    /// Extract grid distortion values from a risk measure along a chain.
    Extract {
        file: PathBuf,
        /// `builtin:<distortion name>` or `plugin:<shell command>`.
        #[arg(long)]
        rho: String,
        /// Comma-separated atom labels; defaults to file order.
        #[arg(long)]
        ranking: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Sample the axioms and check the lifted representation.
    Verify {
        file: PathBuf,
        #[arg(long)]
        rho: String,
        #[arg(long)]
        ranking: Option<String>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = LiftArg::Linear)]
        lift: LiftArg,
        /// Exit 1 when an axiom fails or the adapted error exceeds 1e-9.
        #[arg(long)]
        strict: bool,
    },
    /// Plottable CSV tables: values, survival functions or quantiles.
    Report {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Table::Values)]
        table: Table,
        /// Write values.csv, survival.csv and quantiles.csv here instead.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    St,
    Sl,
    IcxFalsify,
}

#[derive(Clone, Copy, ValueEnum)]
enum LiftArg {
    Linear,
    Step,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Values,
    Survival,
    Quantiles,
}

/// Failure of a run: exit code and message.
struct Failure(u8, String);

impl Failure {
    fn invalid(msg: impl ToString) -> Self {
        Failure(1, msg.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&bytes).map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

/// `--seed`, then `CHOQUET_SEED`, then the scenario seed, then 0.
fn resolve_seed(flag: Option<u64>, scenario: &Scenario) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        return v
            .trim()
            .parse()
            .map_err(|_| Failure(2, format!("{SEED_ENV}={v:?} is not an unsigned integer")));
    }
    Ok(scenario.seed.unwrap_or(0))
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Validate { file } => {
            let s = load(&file)?;
            Ok(format!(
                "ok: {} atoms, {} blocks, {} positions, {} distortions\n",
                s.space.len(),
                s.partition.len(),
                s.positions.len(),
                s.distortions.len()
            ))
        }
        Cmd::Eval {
            file,
            position,
            distortion,
            oracle,
            format,
        } => {
            let s = load(&file)?;
            let x = s.position(&position).map_err(Failure::invalid)?;
            let d = s.distortion(&distortion).map_err(Failure::invalid)?;
            let v = rd_choquet(x, &s.capacity, d).map_err(Failure::invalid)?;
            let mut records = value_records(&position, None, &v);
            if let Some(h) = oracle {
                let o = rd_choquet_oracle(x, &s.capacity, d, h).map_err(|e| Failure(2, e.to_string()))?;
                for (r, &ov) in records.iter_mut().zip(o.values()) {
                    r.oracle = Some(ov);
                }
            }
            Ok(render(&records, format))
        }
        Cmd::Dominance {
            file,
            order,
            x,
            y,
            trials,
            seed,
            strict,
        } => {
            let s = load(&file)?;
            let (px, py) = (
                s.position(&x).map_err(Failure::invalid)?,
                s.position(&y).map_err(Failure::invalid)?,
            );
            let (holds, out) = dominance(&s, order, px, py, trials, resolve_seed(seed, &s)?)?;
            if strict && !holds {
                print!("{out}");
                return Err(Failure::invalid(format!("{x} is not dominated by {y}")));
            }
            Ok(out)
        }
        Cmd::Extract {
            file,
            rho,
            ranking,
            format,
        } => {
            let s = load(&file)?;
            let rho = risk_measure(&s, &rho)?;
            let chain = chain_for(&s, ranking.as_deref())?;
            let grid = extract_distortion(rho.as_ref(), &chain, &s.partition).map_err(Failure::invalid)?;
            let mut rows = Vec::new();
            for b in 0..s.partition.len() {
                for (k, (&t, &v)) in grid.grid.iter().zip(&grid.values[b]).enumerate() {
                    rows.push(GridRow {
                        block: s.partition.label(b).to_string(),
                        k,
                        event: s.space.event_key(chain.events[k]),
                        t,
                        value: v,
                    });
                }
            }
            Ok(match format {
                Format::Json => to_json_string(&rows).expect("serializable"),
                Format::Csv => table_csv(
                    &["block", "k", "event", "t", "value"],
                    &rows
                        .iter()
                        .map(|r| {
                            vec![
                                r.block.clone(),
                                r.k.to_string(),
                                r.event.clone(),
                                format_g17(r.t),
                                format_g17(r.value),
                            ]
                        })
                        .collect::<Vec<_>>(),
                ),
            })
        }
        Cmd::Verify {
            file,
            rho,
            ranking,
            trials,
            seed,
            lift,
            strict,
        } => {
            let s = load(&file)?;
            let seed = resolve_seed(seed, &s)?;
            let rho = risk_measure(&s, &rho)?;
            let chain = chain_for(&s, ranking.as_deref())?;
            let axioms = check_axioms(rho.as_ref(), &s.capacity, trials, seed).map_err(Failure::invalid)?;
            let grid = match extract_distortion(rho.as_ref(), &chain, &s.partition) {
                Ok(g) => Some(g),
                Err(e @ RepresentationError::WellDefinednessViolation { .. }) => {
                    eprintln!("warning: {e}");
                    None
                }
                Err(e) => return Err(Failure::invalid(e)),
            };
            let lift = match lift {
                LiftArg::Linear => Lift::Linear,
                LiftArg::Step => Lift::Step,
            };
            let representation = match &grid {
                Some(g) => Some(
                    verify_representation(rho.as_ref(), &chain, Some(g), trials, seed, lift, Some(&axioms))
                        .map_err(Failure::invalid)?,
                ),
                None => None,
            };
            let ok = axioms.all_passed
                && representation
                    .as_ref()
                    .is_some_and(|r| r.adapted_max_error <= 1e-9);
            let out = to_json_string(&VerifyOutput {
                axioms: &axioms,
                representation: representation.as_ref(),
                seed,
            })
            .expect("serializable");
            if strict && !ok {
                print!("{out}");
                return Err(Failure::invalid("representation check failed"));
            }
            Ok(out)
        }
        Cmd::Report { file, table, out_dir } => {
            let s = load(&file)?;
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir).map_err(Failure::invalid)?;
                for (name, t) in [
                    ("values.csv", Table::Values),
                    ("survival.csv", Table::Survival),
                    ("quantiles.csv", Table::Quantiles),
                ] {
                    let path = dir.join(name);
                    std::fs::write(&path, report_table(&s, t)?)
                        .map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))?;
                }
                return Ok(String::new());
            }
            report_table(&s, table)
        }
    }
}

#[derive(Serialize)]
struct GridRow {
    block: String,
    k: usize,
    event: String,
    t: f64,
    value: f64,
}

fn render(records: &[ValueRecord], format: Format) -> String {
    match format {
        Format::Csv => results_csv(records),
        Format::Json => to_json_string(&records).expect("serializable"),
    }
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    axioms: &'a choquet_core::AxiomReport,
    representation: Option<&'a choquet_core::RepresentationReport>,
    seed: u64,
}

#[derive(Serialize)]
struct VerdictOutput<W: Serialize> {
    order: &'static str,
    holds: bool,
    witness: Option<W>,
}

#[derive(Serialize)]
struct UtilityWitness {
    utility: TestUtility,
    lhs: f64,
    rhs: f64,
}

fn dominance(
    s: &Scenario,
    order: Order,
    x: &choquet_core::Position,
    y: &choquet_core::Position,
    trials: usize,
    seed: u64,
) -> Result<(bool, String), Failure> {
    let c = &s.capacity;
    let json = |v| to_json_string(&v).expect("serializable");
    Ok(match order {
        Order::St | Order::Sl => {
            let (name, verdict) = match order {
                Order::St => ("st", order::dominates_st(x, y, c)),
                _ => ("sl", order::dominates_sl(x, y, c)),
            };
            let v = verdict.map_err(Failure::invalid)?;
            let out = to_json_string(&VerdictOutput {
                order: name,
                holds: v.holds,
                witness: v.witness,
            })
            .expect("serializable");
            (v.holds, out)
        }
        Order::IcxFalsify => {
            let found = order::falsify_icx(x, y, c, trials, seed).map_err(Failure::invalid)?;
            let witness = found.map(|u| {
                let lhs = choquet_core::choquet(&u.apply_position(x), c).expect("shared space");
                let rhs = choquet_core::choquet(&u.apply_position(y), c).expect("shared space");
                UtilityWitness { utility: u, lhs, rhs }
            });
            let holds = witness.is_none();
            (
                holds,
                json(VerdictOutput {
                    order: "icx-falsify",
                    holds,
                    witness,
                }),
            )
        }
    })
}

fn risk_measure(s: &Scenario, spec: &str) -> Result<Box<dyn RiskMeasure>, Failure> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        let d = s.distortion(name).map_err(Failure::invalid)?;
        Ok(Box::new(DistortedChoquet {
            capacity: s.capacity.clone(),
            distortion: d.clone(),
        }))
    } else if let Some(cmd) = spec.strip_prefix("plugin:") {
        Ok(Box::new(
            PluginRisk::spawn(cmd, s.partition.clone()).map_err(Failure::invalid)?,
        ))
    } else {
        Err(Failure(
            2,
            format!("--rho must be builtin:<distortion> or plugin:<command>, got {spec:?}"),
        ))
    }
}

fn chain_for(s: &Scenario, ranking: Option<&str>) -> Result<choquet_core::NestedChain, Failure> {
    let order = match ranking {
        None => (0..s.space.len()).collect(),
        Some(r) => {
            let labels: Vec<&str> = r.split(',').map(str::trim).collect();
            ranking_from_labels(&s.space, &labels).map_err(Failure::invalid)?
        }
    };
    build_nested_chain(&s.capacity, &order).map_err(Failure::invalid)
}

fn report_table(s: &Scenario, table: Table) -> Outcome {
    let c = &s.capacity;
    Ok(match table {
        Table::Values => {
            let mut records = Vec::new();
            for (pname, x) in &s.positions {
                for (dname, d) in &s.distortions {
                    let v = rd_choquet(x, c, d).map_err(Failure::invalid)?;
                    records.extend(value_records(pname, Some(dname), &v));
                }
            }
            if records.is_empty() {
                table_csv(&["position", "distortion", "block", "value"], &[])
            } else {
                results_csv(&records)
            }
        }
        Table::Survival => {
            let mut rows = Vec::new();
            for (pname, x) in &s.positions {
                let g = distribution_function(x, c).map_err(Failure::invalid)?;
                for (j, &t) in g.breakpoints().iter().enumerate() {
                    let level = g.values()[j + 1];
                    rows.push(vec![
                        pname.clone(),
                        format_g17(t),
                        format_g17(c.value(x.exceeds(t))),
                        format_g17(level),
                    ]);
                }
            }
            table_csv(&["position", "x", "survival", "distribution"], &rows)
        }
        Table::Quantiles => {
            let mut rows = Vec::new();
            for (pname, x) in &s.positions {
                let q = quantiles(x, c).map_err(Failure::invalid)?;
                for k in 0..=100 {
                    let t = f64::from(k) / 100.0;
                    rows.push(vec![
                        pname.clone(),
                        format_g17(t),
                        format_g17(q.lower_at(t)),
                        format_g17(q.upper_at(t)),
                    ]);
                }
            }
            table_csv(&["position", "t", "r_minus", "r_plus"], &rows)
        }
    })
}
