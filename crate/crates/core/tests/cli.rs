//! End-to-end checks of the `sumfree` binary: exit codes, report
//! envelopes, and the CSV export format.

use std::process::{Command, Output};

fn sumfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumfree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

#[test]
fn ma_reports_exact_maximum() {
    let out = sumfree(&["ma", "--set", "1,2,3,4"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = stdout_json(&out);
    assert_eq!(report["schema_version"], "1");
    assert_eq!(report["config"]["command"], "ma");
    assert_eq!(report["results"]["m"], "2/3");
    assert!(!report["results"]["witnesses"].as_array().unwrap().is_empty());
    // Runtime is logged to stderr, never embedded in the report.
    assert!(report.get("runtime").is_none());
    assert!(String::from_utf8_lossy(&out.stderr).contains("runtime"));
}

#[test]
fn ma_rejects_invalid_sets_with_usage_exit() {
    let out = sumfree(&["ma", "--set", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());

    let out = sumfree(&["ma", "--set", "not-a-set"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let out = sumfree(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sfs_returns_size_and_witness() {
    let out = sumfree(&["sfs", "--set", "1,2,3,4,5"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["results"]["size"], 3);
    assert_eq!(report["results"]["witness"].as_array().unwrap().len(), 3);
}

#[test]
fn classify3_json_clean_run_exits_zero() {
    let out = sumfree(&["classify3", "--bound", "20"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["config"]["command"], "classify3");
    let results = &report["results"];
    assert!(results["examined"].as_u64().unwrap() > 0);
    assert_eq!(results["mismatches"].as_array().unwrap().len(), 0);
    for e in results["exceptions"].as_array().unwrap() {
        assert_eq!(e["m"], "1");
    }
}

#[test]
fn classify4_csv_has_header_and_family_rows() {
    let out = sumfree(&["classify4", "--bound", "12", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("set, m, family"));
    for line in lines {
        let fields: Vec<&str> = line.split(", ").collect();
        assert_eq!(fields.len(), 3, "row: {line}");
        assert_eq!(fields[1], "2/3");
    }
    // {1,2,3,4} is the first sporadic exception.
    assert!(text.contains("1 2 3 4, 2/3, sporadic"));
}

#[test]
fn classify_rejects_unknown_format() {
    let out = sumfree(&["classify3", "--bound", "10", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn freiman_reduce_emits_trace_and_small_image() {
    let out = sumfree(&["freiman", "reduce", "--set", "1000000,2000000", "--order", "2"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    let result: Vec<i64> = report["results"]["result"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_i64().unwrap())
        .collect();
    assert_eq!(result.len(), 2);
    assert!(result.iter().all(|&b| b.unsigned_abs() <= 16u64.pow(2)));
    assert_eq!(result[1], 2 * result[0], "doubling relation is preserved");
    assert!(!report["results"]["trace"]["steps"].as_array().unwrap().is_empty());
}

#[test]
fn lonely_reports_exceptional_speed_set() {
    let out = sumfree(&["lonely", "--speeds", "1,3,4,5,9"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    assert_eq!(report["results"]["m"], "2/3");
    assert_eq!(report["results"]["exceptional"], true);
}

#[test]
fn selberg_diagnostics_expose_deficit() {
    let out = sumfree(&["selberg", "--K", "5", "--set", "1,2,3"]);
    assert!(out.status.success());
    let report = stdout_json(&out);
    let mean = report["results"]["mean"].as_f64().unwrap();
    assert!((mean + 1.0 / 6.0).abs() <= 1e-10, "mean = -1/(K+1), got {mean}");
    assert!(report["results"]["dilated_sum_max"]["value"].as_f64().is_some());
}

#[test]
fn mc2_reports_are_shard_plan_independent() {
    fn args(shards: &str) -> [&str; 13] {
        [
            "mc2", "--n", "2", "--S", "1", "--K", "10", "--delta", "0.05", "--T", "15",
            "--shards", shards,
        ]
    }
    let one = sumfree(&args("1"));
    let four = sumfree(&args("4"));
    assert!(one.status.success() && four.status.success());
    let one = stdout_json(&one);
    let four = stdout_json(&four);
    assert_eq!(one["results"], four["results"]);
}
