//! End-to-end behaviour of the command line: examples, exit codes and the
//! agreement of the two report formats.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use serde_json::Value;

fn run(line: &str) -> (i32, String, String) {
    let args: Vec<String> = std::iter::once("hyperlap").chain(line.split_whitespace()).map(String::from).collect();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = hyperlap_cli::run(&args, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rows(csv_text: &str) -> Vec<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    rdr.records()
        .map(|r| headers.iter().zip(r.unwrap().iter()).map(|(k, v)| (k.to_string(), v.to_string())).collect())
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("hyperlap-cli-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn iso_at_radius_one() {
    let (code, out, _) = run("iso --m 2 --r 1");
    assert_eq!(code, 0);
    let r = rows(&out);
    let h: f64 = r[0]["h"].parse().unwrap();
    let s = 1f64.sinh();
    assert!((h - s / (1f64.cosh() - 1.0)).abs() < 1e-12);
    assert!((h - 2.1639534).abs() < 1e-6);
}

#[test]
fn probe_example_has_three_decreasing_ratios() {
    let (code, out, _) = run("probe --m 2 --lambda 0.5 --r0 10 --count 3");
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    let ratios: Vec<f64> = r.iter().map(|x| x["ratio"].parse().unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]));
    for x in &r {
        assert!(x["ratio"].parse::<f64>().unwrap() <= x["bound"].parse::<f64>().unwrap());
    }
    assert_eq!(r[0]["decrease"], "n/a");
}

#[test]
fn spectrum_example_bottom() {
    let (code, out, _) = run("spectrum --m 2 --L 40 --k 5");
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 5);
    let bottom: f64 = r[0]["value"].parse().unwrap();
    assert!(bottom > 0.25 && bottom < 0.27);
    assert_eq!(r[0]["complete"], "true");
}

#[test]
fn csv_and_json_carry_the_same_rows() {
    for line in ["iso --m 2,3 --r 0.5,2", "probe --m 2", "laplace-error --perturbation cap"] {
        let (c1, csv_text, _) = run(line);
        let (c2, json_text, _) = run(&format!("{line} --output json"));
        assert_eq!((c1, c2), (0, 0));
        let json: Value = serde_json::from_str(&json_text).unwrap();
        let from_json = json["rows"].as_array().unwrap();
        let from_csv = rows(&csv_text);
        assert_eq!(from_json.len(), from_csv.len());
        for (j, c) in from_json.iter().zip(&from_csv) {
            let obj = j.as_object().unwrap();
            let mut keys: Vec<&String> = obj.keys().collect();
            keys.sort();
            assert_eq!(keys, c.keys().collect::<Vec<_>>());
            for (k, v) in obj {
                let cell = &c[k];
                match v {
                    Value::Number(n) => assert_eq!(n.as_f64().unwrap(), cell.parse::<f64>().unwrap(), "{k}"),
                    Value::String(s) => assert_eq!(s, cell, "{k}"),
                    other => panic!("unexpected JSON value {other}"),
                }
            }
        }
        assert_eq!(json["metadata"]["version"], env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn json_key_order_follows_the_csv_header() {
    let (_, csv_text, _) = run("iso --m 2 --r 1");
    let (_, json_text, _) = run("iso --m 2 --r 1 --output json");
    let header: Vec<&str> = csv_text.lines().next().unwrap().split(',').collect();
    let json: Value = serde_json::from_str(&json_text).unwrap();
    let keys: Vec<&str> = json["rows"][0].as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(header, keys);
}

#[test]
fn usage_errors_exit_two() {
    for line in [
        "iso --m 1",
        "iso --m 3 --n 2",
        "nonsense",
        "iso --bogus 1",
        "rayleigh --R 8,4",
        "probe --m 3 --lambda 0.5",
        "sandwich --m 3",
        "cheeger --perturbation trig",
        "spectrum --gamma file:/definitely/missing",
        "iso --k 0",
    ] {
        let (code, _, err) = run(line);
        assert_eq!(code, 2, "`{line}`: {err}");
        assert!(!err.is_empty(), "`{line}` explains itself");
    }
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = run("--help");
    assert_eq!(code, 0);
    assert!(out.contains("Usage"));
    let (code, out, _) = run("--version");
    assert_eq!(code, 0);
    assert!(out.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn computation_errors_exit_one_with_partial_rows() {
    // no grid resolves a relative change of 1e-300
    let (code, out, err) = run("spectrum --m 2 --L 10 --k 1 --tol 1e-300");
    assert_eq!(code, 1);
    assert!(err.contains("no convergence"), "{err}");
    assert!(rows(&out).is_empty());
}

#[test]
fn out_path_receives_the_report() {
    let dir = scratch("out");
    let path = dir.join("iso.csv");
    let (code, out, _) = run(&format!("iso --m 2 --r 1,2 --out {}", path.display()));
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let (_, direct, _) = run("iso --m 2 --r 1,2");
    assert_eq!(fs::read_to_string(&path).unwrap(), direct);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_feeds_the_run_and_flags_win() {
    let dir = scratch("cfg");
    let path = dir.join("probe.cfg");
    fs::write(&path, "# probe sweep\nm = 2\nlambda = 0.5\nr0 = 12\ncount = 2\n").unwrap();
    let (code, out, _) = run(&format!("probe --config {} --lambda 1.0", path.display()));
    assert_eq!(code, 0);
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|x| x["lambda"].parse::<f64>().unwrap() == 1.0));
    assert_eq!(r[0]["R"].parse::<f64>().unwrap(), 12.0);
    fs::write(&path, "lambda = 0.5\ncolour = blue\n").unwrap();
    assert_eq!(run(&format!("probe --config {}", path.display())).0, 2);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn file_spectra_drive_the_window() {
    let dir = scratch("gamma");
    let path = dir.join("circle.txt");
    // the unit circle: μ_j = j^2, multiplicity 2 for j >= 1
    let mut text = String::from("0 1\n");
    for j in 1..40 {
        text.push_str(&format!("{} 2\n", j * j));
    }
    fs::write(&path, text).unwrap();
    let (code, out, err) = run(&format!(
        "spectrum --m 2 --L 20 --k 5 --gamma file:{} --omega 6.283185307179586",
        path.display()
    ));
    assert_eq!(code, 0, "{err}");
    let (_, equator, _) = run("spectrum --m 2 --L 20 --k 5");
    let a: Vec<String> = rows(&out).iter().map(|x| x["value"].clone()).collect();
    let b: Vec<String> = rows(&equator).iter().map(|x| x["value"].clone()).collect();
    assert_eq!(a, b);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn every_subcommand_runs_with_defaults() {
    for sub in ["iso", "profile", "rayleigh", "quasimode", "spectrum", "probe", "sandwich", "laplace-error", "cheeger"] {
        let (code, out, err) = run(sub);
        assert_eq!(code, 0, "{sub}: {err}");
        let r = rows(&out);
        assert!(!r.is_empty(), "{sub} emitted rows");
        let keys: Vec<_> = r[0].keys().collect();
        assert!(r.iter().all(|x| x.keys().collect::<Vec<_>>() == keys), "{sub} keys are stable");
    }
}
