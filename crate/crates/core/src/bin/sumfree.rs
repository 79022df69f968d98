//! `sumfree`: command-line front end. Every subcommand prints a single
//! schema-versioned JSON report on standard output (CSV on request for
//! the classification sweeps) and logs to standard error.
//!
//! Exit codes: 0 success, 1 the run completed but found mathematical
//! mismatches, 2 usage error.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use sumfree::report::{exceptions_csv, Report, RunConfig};
use sumfree::search::{
    classify_n3_seeded, classify_n4_seeded, lonely_runner_check, verify_mc2, verify_mc2_resumable,
    ClassificationReport, Mc2Params,
};
use sumfree::selberg::{dilated_sum_max, selberg_minorant};
use sumfree::step::{largest_sum_free, max_fa, IntegerSet};

#[derive(Parser)]
#[command(name = "sumfree", version, about = "Sum-free subset toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact dilation maximum m_A with its witness points.
    Ma {
        #[arg(long)]
        set: String,
    },
    /// Largest sum-free subset s(A) with a witness.
    Sfs {
        #[arg(long)]
        set: String,
    },
    /// n = 3 classification sweep over coprime triples.
    Classify3 {
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// n = 4 classification sweep over coprime quadruples.
    Classify4 {
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Desk-scale minorant verifier over all n-subsets of {1..T}.
    Mc2 {
        #[arg(long)]
        n: usize,
        #[arg(long = "S")]
        s: u64,
        #[arg(long = "K")]
        k: u64,
        #[arg(long)]
        delta: f64,
        #[arg(long = "T")]
        t: u64,
        #[arg(long, default_value_t = 1)]
        shards: usize,
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Lonely-runner construction from 5 speeds.
    Lonely {
        #[arg(long)]
        speeds: String,
    },
    /// Selberg minorant diagnostics; with --set, the dilated-sum maximum.
    Selberg {
        #[arg(long = "K")]
        k: u64,
        #[arg(long)]
        set: Option<String>,
    },
    /// Freiman tools.
    Freiman {
        #[command(subcommand)]
        command: FreimanCommand,
    },
}

#[derive(Subcommand)]
enum FreimanCommand {
    /// Element-size reduction to max|b| ≤ (8M)^n with full trace.
    Reduce {
        #[arg(long, allow_hyphen_values = true)]
        set: String,
        #[arg(long)]
        order: u32,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = std::time::Instant::now();
    let code = run(cli.command);
    eprintln!("runtime: {:?}", start.elapsed());
    code
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn emit(report: &Report) {
    println!("{}", report.to_json());
}

fn emit_classification(
    config: RunConfig,
    report: ClassificationReport,
    format: &str,
) -> ExitCode {
    let clean = report.mismatches.is_empty();
    match format {
        "json" => {
            let results = serde_json::to_value(&report).expect("report serializes");
            emit(&Report::new(config, results));
        }
        "csv" => print!("{}", exceptions_csv(&report)),
        other => return usage_error(&format!("unknown format {other:?} (json|csv)")),
    }
    if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn parse_signed_set(text: &str) -> Result<Vec<i64>, String> {
    text.split(',')
        .map(|s| s.trim().parse::<i64>().map_err(|e| format!("{e}: {s:?}")))
        .collect()
}

fn run(command: Command) -> ExitCode {
    match command {
        Command::Ma { set } => {
            let set = match IntegerSet::parse(&set) {
                Ok(s) => s,
                Err(e) => return usage_error(&e.to_string()),
            };
            let result = match max_fa(&set) {
                Ok(r) => r,
                Err(e) => return usage_error(&e.to_string()),
            };
            let config = RunConfig::new("ma", serde_json::json!({"set": set.elements()}));
            let witnesses: Vec<String> =
                result.witnesses.iter().map(|w| w.value().to_string()).collect();
            emit(&Report::new(
                config,
                serde_json::json!({
                    "set": set.elements(),
                    "m": result.m,
                    "m_decimal": result.m.to_f64(),
                    "witnesses": witnesses,
                }),
            ));
            ExitCode::SUCCESS
        }
        Command::Sfs { set } => {
            let set = match IntegerSet::parse(&set) {
                Ok(s) => s,
                Err(e) => return usage_error(&e.to_string()),
            };
            let result = match largest_sum_free(&set) {
                Ok(r) => r,
                Err(e) => return usage_error(&e.to_string()),
            };
            let config = RunConfig::new("sfs", serde_json::json!({"set": set.elements()}));
            emit(&Report::new(
                config,
                serde_json::json!({"size": result.size, "witness": result.witness}),
            ));
            ExitCode::SUCCESS
        }
        Command::Classify3 {
            bound,
            seed,
            format,
        } => {
            let mut config = RunConfig::new("classify3", serde_json::json!({"bound": bound}));
            config.seed = seed;
            config.format = format.clone();
            match classify_n3_seeded(bound, seed) {
                Ok(report) => emit_classification(config, report, &format),
                Err(e) => usage_error(&e.to_string()),
            }
        }
        Command::Classify4 {
            bound,
            seed,
            format,
        } => {
            let mut config = RunConfig::new("classify4", serde_json::json!({"bound": bound}));
            config.seed = seed;
            config.format = format.clone();
            match classify_n4_seeded(bound, seed) {
                Ok(report) => emit_classification(config, report, &format),
                Err(e) => usage_error(&e.to_string()),
            }
        }
        Command::Mc2 {
            n,
            s,
            k,
            delta,
            t,
            shards,
            resume,
        } => {
            let params = Mc2Params { n, s, k, delta, t };
            let mut config = RunConfig::new(
                "mc2",
                serde_json::to_value(&params).expect("params serialize"),
            );
            config.shards = shards;
            config.checkpoint = resume
                .as_ref()
                .map(|p| p.to_string_lossy().into_owned());
            let outcome = match &resume {
                Some(path) => verify_mc2_resumable(&params, shards, path, None).map(|r| {
                    r.expect("no shard budget given, so the run completes")
                }),
                None => verify_mc2(&params, shards),
            };
            match outcome {
                Ok(report) => {
                    let results = serde_json::to_value(&report).expect("report serializes");
                    emit(&Report::new(config, results));
                    ExitCode::SUCCESS
                }
                Err(e) => usage_error(&e.to_string()),
            }
        }
        Command::Lonely { speeds } => {
            let parsed: Result<Vec<u64>, _> = speeds
                .split(',')
                .map(|x| x.trim().parse::<u64>())
                .collect();
            let Ok(parsed) = parsed else {
                return usage_error("speeds must be positive integers: a,b,c,d,e");
            };
            let config = RunConfig::new("lonely", serde_json::json!({"speeds": parsed}));
            match lonely_runner_check(&parsed) {
                Ok(record) => {
                    let results = serde_json::to_value(&record).expect("record serializes");
                    emit(&Report::new(config, results));
                    ExitCode::SUCCESS
                }
                Err(e) => usage_error(&e.to_string()),
            }
        }
        Command::Selberg { k, set } => {
            let selberg = match selberg_minorant(k) {
                Ok(s) => s,
                Err(e) => return usage_error(&e.to_string()),
            };
            let config = RunConfig::new(
                "selberg",
                serde_json::json!({"K": k, "set": set.clone()}),
            );
            let mut results = serde_json::json!({
                "K": selberg.k,
                "m_K": selberg.m_k,
                "reported_support": selberg.reported_support,
                "mean": selberg.f_form.cos_coeff(0),
            });
            if let Some(text) = set {
                let set = match IntegerSet::parse(&text) {
                    Ok(s) => s,
                    Err(e) => return usage_error(&e.to_string()),
                };
                match dilated_sum_max(&selberg, &set, 1e-10) {
                    Ok(max) => {
                        results["dilated_sum_max"] = serde_json::json!({
                            "value": max.value,
                            "argmax": max.argmax,
                            "certified_radius": max.certified_radius,
                        });
                    }
                    Err(e) => return usage_error(&e.to_string()),
                }
            }
            emit(&Report::new(config, results));
            ExitCode::SUCCESS
        }
        Command::Freiman { command } => match command {
            FreimanCommand::Reduce { set, order } => {
                let parsed = match parse_signed_set(&set) {
                    Ok(p) => p,
                    Err(e) => return usage_error(&e),
                };
                let config = RunConfig::new(
                    "freiman reduce",
                    serde_json::json!({"set": parsed, "order": order}),
                );
                match sumfree::freiman::reduce_elements(&parsed, order) {
                    Ok((result, trace)) => {
                        emit(&Report::new(
                            config,
                            serde_json::json!({"result": result, "trace": trace}),
                        ));
                        ExitCode::SUCCESS
                    }
                    Err(e) => usage_error(&e.to_string()),
                }
            }
        },
    }
}
