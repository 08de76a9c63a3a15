use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dynkin_cli::harness::{region_artifacts, run_price, run_table};
use dynkin_cli::output::Csv;
use dynkin_cli::{Comparator, RunConfig};

const TABLE1: &str = r#"{"sigma_low": 0.0, "sigma_high": 0.4, "rate": 0.06, "kind": "put",
    "strike": 100, "penalty": 5, "t0": 0, "maturity": 0.5,
    "n_list": [200, 400], "spots": [80, 100, 120]}"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn dynkin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynkin")).args(args).output().unwrap()
}

fn run_into(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    dynkin(&args)
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let fig = write_config(
        tmp.path(),
        "fig.json",
        r#"{"sigma_low": 0.0, "sigma_high": 0.4, "rate": 0.06, "kind": "call", "strike": 100,
            "penalty": 12, "maturity": 2, "n": 300, "spots": [100],
            "outputs": {"svg": "region.svg", "grid_export": true}}"#,
    );
    let t1 = write_config(tmp.path(), "t1.json", TABLE1);
    let mut outs = Vec::new();
    for threads in ["1", "4", "1"] {
        let out = tmp.path().join(format!("out{}", outs.len()));
        for (sub, cfg, extra) in
            [("price", &t1, vec![]), ("table", &t1, vec!["--comparator", "bs"]), ("region", &fig, vec![])]
        {
            let mut e = extra.clone();
            e.extend(["--threads", threads]);
            let o = run_into(sub, cfg, &out, &e);
            assert!(o.status.success(), "{sub}: {}", String::from_utf8_lossy(&o.stderr));
        }
        outs.push(dir_bytes(&out));
    }
    assert!(outs[0].len() >= 8, "{:?}", outs[0].iter().map(|f| &f.0).collect::<Vec<_>>());
    assert_eq!(outs[0], outs[1]);
    assert_eq!(outs[0], outs[2]);
}

#[test]
fn csv_outputs_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "c.json",
        &TABLE1.replace("\"spots\"", "\"outputs\": {\"grid_export\": true}, \"spots\""),
    );
    let out = tmp.path().join("out");
    assert!(run_into("price", &cfg, &out, &[]).status.success());
    assert!(run_into("converge", &cfg, &out, &[]).status.code() == Some(3));
    let files = dir_bytes(&out);
    assert!(files.iter().any(|f| f.0 == "grid_s80_n200.csv"));
    for (name, bytes) in files {
        let parsed = Csv::parse(&bytes).unwrap();
        assert_eq!(parsed.to_bytes().unwrap(), bytes, "{name}");
        assert!(!bytes.contains(&b'\r'), "{name}");
    }
    let grid = Csv::parse(&fs::read(out.join("grid_s100_n200.csv")).unwrap()).unwrap();
    assert_eq!(grid.header, ["k", "t_k", "z", "price", "J", "f", "g", "continuation"]);
    assert_eq!(grid.rows.len(), (0..=200).map(|k| 2 * k + 1).sum::<usize>());
}

#[test]
fn price_rows_are_ordered_and_match_table() {
    let cfg = RunConfig::from_json(TABLE1).unwrap();
    let rows = run_price(&cfg, 0).unwrap();
    let keys: Vec<(f64, usize)> = rows.iter().map(|r| (r.spot, r.n)).collect();
    assert_eq!(keys, [(80.0, 200), (80.0, 400), (100.0, 200), (100.0, 400), (120.0, 200), (120.0, 400)]);
    let table = run_table(&cfg, Comparator::Robust, 0).unwrap();
    for r in rows {
        assert_eq!(table.cell(r.spot, r.n), Some(r.value));
    }
    assert!((table.cell(80.0, 200).unwrap() - 20.7003).abs() < 5e-5);
    assert!((table.cell(100.0, 400).unwrap() - 5.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad_json = write_config(tmp.path(), "a.json", "{ nope");
    assert_eq!(run_into("price", &bad_json, &out, &[]).status.code(), Some(2));
    let unknown = write_config(tmp.path(), "b.json", &TABLE1.replace("\"rate\"", "\"rat\""));
    assert_eq!(run_into("price", &unknown, &out, &[]).status.code(), Some(2));
    let missing = tmp.path().join("missing.json");
    assert_eq!(run_into("price", &missing, &out, &[]).status.code(), Some(2));

    let inverted = write_config(tmp.path(), "c.json", &TABLE1.replace("\"sigma_low\": 0.0", "\"sigma_low\": 0.5"));
    let o = run_into("table", &inverted, &out, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));
    let few = write_config(tmp.path(), "d.json", TABLE1);
    assert_eq!(run_into("converge", &few, &out, &[]).status.code(), Some(3));
    let two_spots = write_config(tmp.path(), "e.json", TABLE1);
    assert_eq!(run_into("region", &two_spots, &out, &[]).status.code(), Some(3));

    let big =
        write_config(tmp.path(), "f.json", &TABLE1.replace("[200, 400]", "[11]").replace("[80, 100, 120]", "[100]"));
    assert_eq!(run_into("oracle-check", &big, &out, &[]).status.code(), Some(4));
    let small = write_config(tmp.path(), "g.json", &TABLE1.replace("[200, 400]", "[1, 2, 3]"));
    let o = run_into("oracle-check", &small, &out, &["--random", "5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(Csv::parse(&fs::read(out.join("oracle.csv")).unwrap()).unwrap().rows.len(), 9 + 5);
}

#[test]
fn constant_payoffs_price_to_the_constant() {
    let cfg = RunConfig::from_json(
        r#"{"sigma_low": 0.1, "sigma_high": 0.3, "kind": "constant", "constant": 3.25,
            "maturity": 1, "n_list": [5, 20, 80], "spots": [50, 100]}"#,
    )
    .unwrap();
    for r in run_price(&cfg, 0).unwrap() {
        assert_eq!(r.value, 3.25);
    }
    let report = &dynkin_cli::harness::run_converge(&cfg, 0).unwrap()[0];
    assert_eq!(report.spread, 0.0);
    assert_eq!(report.alpha, None);
}

#[test]
fn infinite_penalty_put_has_empty_seller_region() {
    let cfg = RunConfig::from_json(
        r#"{"sigma_low": 0.0, "sigma_high": 0.4, "rate": 0.06, "kind": "put", "strike": 100,
            "penalty": 1000000, "maturity": 0.5, "n": 200, "spots": [100]}"#,
    )
    .unwrap();
    let a = region_artifacts(&cfg, 0).unwrap();
    assert_eq!(a.file("region_robust.csv").unwrap(), b"k,t_k,z,price,flag\n");
    assert_eq!(a.file("boundary_robust.csv").unwrap(), b"t_k,b\n");
    assert_eq!(a.file("region_bs.csv").unwrap(), b"k,t_k,z,price,flag\n");
    assert!(a.summary.contains("T1 = -"));
}

#[test]
fn atm_put_root_is_a_seller_stop() {
    let cfg = RunConfig::from_json(&TABLE1.replace("[200, 400]", "[200]").replace("[80, 100, 120]", "[100]")).unwrap();
    let a = region_artifacts(&cfg, 0).unwrap();
    let csv = Csv::parse(a.file("region_robust.csv").unwrap()).unwrap();
    assert_eq!(csv.rows[0], ["0", "0", "0", "100", "S"]);
}

#[test]
fn region_svg_written_when_requested() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "fig.json",
        r#"{"sigma_low": 0.0, "sigma_high": 0.4, "rate": 0.06, "kind": "call", "strike": 100,
            "penalty": 12, "maturity": 2, "n": 200, "spots": [100], "outputs": {"svg": "fig.svg"}}"#,
    );
    let out = tmp.path().join("out");
    let o = run_into("region", &cfg, &out, &[]);
    assert!(o.status.success());
    let svg = fs::read_to_string(out.join("fig.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("T2 ="));
}

#[test]
fn table2_in_the_money_rows_sit_one_row_below_print() {
    // The reference in-the-money rows 105/110/115/120 (5, 10, 15, 20 robust;
    // 14.9355 binomial at "115") line up with S0 = 100/105/110/115 here.
    let cfg = RunConfig::from_json(
        &TABLE1
            .replace("\"put\"", "\"call\"")
            .replace("[200, 400]", "[200]")
            .replace("[80, 100, 120]", "[100, 105, 110, 115]"),
    )
    .unwrap();
    let t = run_table(&cfg, Comparator::BlackScholes, 0).unwrap();
    for (s, want) in [(100.0, 5.0), (105.0, 10.0), (110.0, 15.0), (115.0, 20.0)] {
        assert!((t.cell(s, 200).unwrap() - want).abs() < 1e-9, "{s}");
    }
    assert!((t.bs_cell(110.0, 200).unwrap() - 14.9355).abs() < 5e-4);
}
