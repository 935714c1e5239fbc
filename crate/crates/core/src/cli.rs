//! Command-line front end.
//!
//! [`run`] parses arguments, reads the task set, dispatches to the analysis
//! modules and writes one JSON report (or a CSV trace). The return value is
//! the process exit status: 0 for schedulable or agreeing results, 1 for
//! unschedulable or disagreeing ones, 2 for usage and input errors.

use std::ffi::OsString;
use std::io::{Read, Write};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bounds::{ll_bound, minimize_ubar, utilization_report};
use crate::engine::simulate;
use crate::error::{Error, Result};
use crate::model::{PrioritySpec, TaskSet};
use crate::occupancy::{claim_interval_test, demand_occupancy, occupancy_from_trace};
use crate::oracle::{deadline_grid_max, oracle_simulate, phase_sweep_occupancy, DeadlineObjective};
use crate::rat::Rat;
use crate::schedulability::window_schedulable;
use crate::worstcase::{n_task_wc_test, rms_dominance, two_task_wc_test, TwoTaskOrder};

#[derive(Debug, Parser)]
#[command(name = "sigmoment", version, about = "Exact timing analysis of periodic task sets under static priorities")]
pub struct Cli {
    /// Add `<field>_approx` decimal siblings next to exact numeric fields
    #[arg(long, global = true)]
    pub approx: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    /// higher-priority occupancy over all phasings of the higher-priority tasks
    Phase,
    /// occupancy of the highest-priority task over a period of `--task`
    OpHighest,
    /// occupancy of the longer-period task, placed first, over the shorter period
    OpSecond,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a task set, echoing it in canonical form
    Validate {
        /// task-set JSON file, or `-` for standard input
        input: String,
    },
    /// Simulate and print the trace
    Simulate {
        input: String,
        #[arg(long, num_args = 2, value_names = ["START", "END"], allow_negative_numbers = true)]
        window: Option<Vec<Rat>>,
        #[arg(long, default_value = "rms")]
        priority: PrioritySpec,
        #[arg(long, value_enum, default_value_t = TraceFormat::Json)]
        trace_format: TraceFormat,
    },
    /// Instantaneous schedulability over a window
    Check {
        input: String,
        #[arg(long, num_args = 2, value_names = ["START", "END"], allow_negative_numbers = true)]
        window: Option<Vec<Rat>>,
        #[arg(long, default_value = "rms")]
        priority: PrioritySpec,
    },
    /// Time occupancy of each task over the window
    Occupancy {
        input: String,
        #[arg(long, num_args = 2, value_names = ["START", "END"], allow_negative_numbers = true)]
        window: Option<Vec<Rat>>,
        #[arg(long, default_value = "rms")]
        priority: PrioritySpec,
        /// task name or 1-based index; with `--d` gives a demand-based value
        #[arg(long)]
        task: Option<String>,
        /// time to the task's next release at the window start
        #[arg(long, requires = "task")]
        d: Option<Rat>,
        /// pending work of the task at the window start (default 0)
        #[arg(long, requires = "d")]
        r: Option<Rat>,
    },
    /// Exact worst-case test under RMS from synchronous release
    WorstCase {
        input: String,
    },
    /// Utilization and the Liu-Layland bound
    Bounds {
        input: String,
        /// also minimize the two-task bound surface numerically
        #[arg(long)]
        derive_bound: bool,
    },
    /// Brute-force grid maximization
    Sweep {
        input: String,
        #[arg(long, value_enum, default_value_t = Objective::Phase)]
        objective: Objective,
        #[arg(long, default_value = "1/4")]
        grid_step: Rat,
        /// task name or 1-based index (default: lowest priority)
        #[arg(long)]
        task: Option<String>,
    },
    /// Cross-check the timing engine against the job-level oracle
    Compare {
        input: String,
        #[arg(long, num_args = 2, value_names = ["START", "END"], allow_negative_numbers = true)]
        window: Option<Vec<Rat>>,
        #[arg(long, default_value = "rms")]
        priority: PrioritySpec,
    },
}

enum Output {
    Json(Value),
    Text(String),
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli, stdin) {
        Ok((code, out)) => {
            let text = match out {
                Output::Json(mut v) => {
                    if cli.approx {
                        add_approx(&mut v);
                    }
                    serde_json::to_string_pretty(&v).expect("serializable") + "\n"
                }
                Output::Text(t) => t,
            };
            if stdout.write_all(text.as_bytes()).is_err() {
                return 2;
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn read_input(path: &str, stdin: &mut dyn Read) -> Result<TaskSet> {
    let text = if path == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s).map_err(|e| Error::Parse(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{path}: {e}")))?
    };
    TaskSet::from_json(&text)
}

fn window_of(ts: &TaskSet, window: &Option<Vec<Rat>>) -> (Rat, Rat) {
    match window.as_deref() {
        Some([a, b]) => (*a, *b),
        _ => {
            let latest = ts.tasks().iter().map(|t| t.offset).max().unwrap_or(Rat::ZERO);
            (Rat::ZERO, latest + ts.hyperperiod())
        }
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<(i32, Output)> {
    match &cli.command {
        Command::Validate { input } => {
            let ts = read_input(input, stdin)?;
            Ok((0, Output::Json(to_value(&ts.to_file()))))
        }
        Command::Simulate { input, window, priority, trace_format } => {
            let ts = read_input(input, stdin)?;
            let prio = priority.resolve(&ts)?;
            let (a, b) = window_of(&ts, window);
            let trace = simulate(&ts, &prio, a, b)?;
            let code = i32::from(!trace.misses.is_empty());
            Ok(match trace_format {
                TraceFormat::Json => (code, Output::Json(trace.to_json())),
                TraceFormat::Csv => (code, Output::Text(trace.to_csv())),
            })
        }
        Command::Check { input, window, priority } => {
            let ts = read_input(input, stdin)?;
            let prio = priority.resolve(&ts)?;
            let (a, b) = window_of(&ts, window);
            let verdict = window_schedulable(&simulate(&ts, &prio, a, b)?);
            let mut v = to_value(&verdict);
            v["all_schedulable"] = json!(verdict.all_schedulable());
            Ok((i32::from(!verdict.all_schedulable()), Output::Json(v)))
        }
        Command::Occupancy { input, window, priority, task, d, r } => {
            let ts = read_input(input, stdin)?;
            let prio = priority.resolve(&ts)?;
            let (a, b) = window_of(&ts, window);
            let trace = simulate(&ts, &prio, a, b)?;
            let mut per_task = Map::new();
            for (k, t) in ts.tasks().iter().enumerate() {
                per_task.insert(t.name.clone(), to_value(&occupancy_from_trace(&trace, k, a, b)?));
            }
            let claims = claim_interval_test(&trace, a, b)?;
            let mut v = json!({
                "window": [a, b],
                "occupancy": per_task,
                "claims": claims,
            });
            if let Some(key) = task {
                let k = ts.resolve(key)?;
                if let Some(d) = d {
                    let t = ts.task(k);
                    let pending = r.unwrap_or(Rat::ZERO);
                    v["demand"] = json!({
                        "task": t.name,
                        "d": d,
                        "r": pending,
                        "occupancy": demand_occupancy(*d, pending, t.exec, t.period, b - a),
                    });
                }
            }
            Ok((0, Output::Json(v)))
        }
        Command::WorstCase { input } => {
            let ts = read_input(input, stdin)?;
            let report = n_task_wc_test(&ts);
            let mut v = to_value(&report);
            v["all_schedulable"] = json!(report.all_schedulable());
            if ts.len() == 2 {
                let (reversed_ok, rms_ok) = rms_dominance(&ts)?;
                v["two_task"] = json!({
                    "rms": two_task_wc_test(&ts, TwoTaskOrder::Rms)?,
                    "reversed": two_task_wc_test(&ts, TwoTaskOrder::Reversed)?,
                    "rms_ok": rms_ok,
                    "reversed_ok": reversed_ok,
                });
            }
            Ok((i32::from(!report.all_schedulable()), Output::Json(v)))
        }
        Command::Bounds { input, derive_bound } => {
            let ts = read_input(input, stdin)?;
            let mut v = to_value(&utilization_report(&ts));
            if *derive_bound {
                let m = minimize_ubar();
                v["derived"] = json!({
                    "i": m.i,
                    "f_star": m.f_star,
                    "u_star": m.u_star,
                    "ll_bound_2": ll_bound(2),
                });
            }
            Ok((0, Output::Json(v)))
        }
        Command::Sweep { input, objective, grid_step, task } => {
            let ts = read_input(input, stdin)?;
            let i = match task {
                Some(key) => ts.resolve(key)?,
                None => ts.len() - 1,
            };
            let result = match objective {
                Objective::Phase => phase_sweep_occupancy(&ts, i, *grid_step)?,
                Objective::OpHighest => {
                    let top = ts.task(0);
                    let obj = DeadlineObjective::OpHighest { exec: top.exec, period: top.period, len: ts.task(i).period };
                    deadline_grid_max(&obj, *grid_step)?
                }
                Objective::OpSecond => {
                    if ts.len() != 2 {
                        return Err(Error::DomainViolation("op-second needs exactly two tasks".into()));
                    }
                    let (short, long) = (ts.task(0), ts.task(1));
                    let obj = DeadlineObjective::OpSecond { exec2: long.exec, period2: long.period, period1: short.period };
                    deadline_grid_max(&obj, *grid_step)?
                }
            };
            Ok((0, Output::Json(to_value(&result))))
        }
        Command::Compare { input, window, priority } => {
            let ts = read_input(input, stdin)?;
            let prio = priority.resolve(&ts)?;
            let (a, b) = window_of(&ts, window);
            let trace = simulate(&ts, &prio, a, b)?;
            let run = oracle_simulate(&ts, &prio, a, b)?;
            let mut engine_misses: Vec<(usize, Rat)> = trace.misses.iter().map(|m| (m.task, m.deadline)).collect();
            engine_misses.sort();
            let busy_diff: Vec<&str> = (0..ts.len())
                .filter(|&k| trace.busy[k] != run.busy[k])
                .map(|k| ts.task(k).name.as_str())
                .collect();
            let agree = busy_diff.is_empty() && engine_misses == run.misses;
            let name = |k: usize| ts.task(k).name.clone();
            let v = json!({
                "window": [a, b],
                "agree": agree,
                "busy_mismatch": busy_diff,
                "engine_misses": engine_misses.iter().map(|&(k, t)| json!({"task": name(k), "deadline": t})).collect::<Vec<_>>(),
                "oracle_misses": run.misses.iter().map(|&(k, t)| json!({"task": name(k), "deadline": t})).collect::<Vec<_>>(),
            });
            Ok((i32::from(!agree), Output::Json(v)))
        }
    }
}

fn approx_of(v: &Value) -> Option<Value> {
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => None,
        Value::String(s) => s.contains('/').then(|| s.parse::<Rat>().ok()).flatten().map(|r| json!(r.to_f64())),
        Value::Array(items) if !items.is_empty() && items.iter().any(|x| approx_of(x).is_some()) => {
            let mut out = Vec::with_capacity(items.len());
            for x in items {
                match x {
                    Value::Number(n) => out.push(json!(n.as_f64()?)),
                    Value::String(_) => out.push(approx_of(x)?),
                    _ => return None,
                }
            }
            Some(Value::Array(out))
        }
        _ => None,
    }
}

/// Adds `<key>_approx` beside every object field holding a non-integer
/// rational (or an array of rationals containing one).
fn add_approx(v: &mut Value) {
    match v {
        Value::Object(map) => {
            let extra: Vec<(String, Value)> =
                map.iter().filter_map(|(k, x)| approx_of(x).map(|a| (format!("{k}_approx"), a))).collect();
            for x in map.values_mut() {
                add_approx(x);
            }
            map.extend(extra);
        }
        Value::Array(items) => items.iter_mut().for_each(add_approx),
        _ => {}
    }
}
