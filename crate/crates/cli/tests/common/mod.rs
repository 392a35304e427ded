//! Helpers shared by the CLI test targets.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

pub const DATA: &str = "tests/data/logistic_theta2_n400.csv";

/// Runs the binary from the crate root with `EVCOP_SEED` unset.
pub fn evcop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evcop"))
        .args(args)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .env_remove("EVCOP_SEED")
        .output()
        .unwrap()
}

/// Structural equality with numbers compared to 1e-12 relative.
pub fn close(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            (x - y).abs() <= 1e-12 * x.abs().max(1.0)
        }
        (Value::Array(x), Value::Array(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q))
        }
        (Value::Object(x), Value::Object(y)) => {
            x.keys().eq(y.keys()) && x.iter().all(|(k, v)| close(v, &y[k]))
        }
        _ => a == b,
    }
}

/// Golden file name and arguments. A `-` argument is replaced by a scratch
/// path whose contents are compared instead of stdout.
pub const GOLDEN: [(&str, &[&str]); 5] = [
    ("eval_hr.json", &["eval", "--family", "husler_reiss", "--lambda", "1", "--grid", "11"]),
    ("coeffs_logistic.json", &["coeffs", "--family", "logistic", "--theta", "2"]),
    (
        "estimate_cfg_gcm.json",
        &["estimate", "-i", DATA, "--estimator", "cfg", "--projection", "gcm", "--grid", "21"],
    ),
    ("sample_galambos.csv", &["sample", "--family", "galambos", "--theta", "1.5", "-n", "20"]),
    (
        "eval_logistic.svg",
        &["eval", "--family", "logistic", "--theta", "2", "--grid", "11", "--plot", "-", "-o", "/dev/null"],
    ),
];

/// Compares every golden case, or rewrites the files when `update` is set.
pub fn check_goldens(update: bool) -> Result<usize, String> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let scratch = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (name, args) in GOLDEN {
        let side = scratch.path().join(name);
        let side_arg = side.to_str().unwrap().to_string();
        let args: Vec<&str> = args.iter().map(|a| if *a == "-" { side_arg.as_str() } else { a }).collect();
        let out = evcop(&args);
        if out.status.code() != Some(0) {
            return Err(format!("{name}: exit {:?}", out.status.code()));
        }
        let got = if args.contains(&side_arg.as_str()) { std::fs::read(&side).unwrap() } else { out.stdout };
        let path = dir.join(name);
        if update {
            std::fs::write(&path, &got).map_err(|e| e.to_string())?;
            continue;
        }
        let want = std::fs::read(&path).map_err(|e| format!("{name}: {e}"))?;
        let same = if name.ends_with(".json") {
            let g: Value = serde_json::from_slice(&got).map_err(|e| e.to_string())?;
            let w: Value = serde_json::from_slice(&want).map_err(|e| e.to_string())?;
            close(&g, &w)
        } else {
            got == want
        };
        if !same {
            return Err(format!("{name} differs from the golden file"));
        }
    }
    Ok(GOLDEN.len())
}
