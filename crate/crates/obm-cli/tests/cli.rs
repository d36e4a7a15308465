//! End-to-end tests of the `obm` binary: every CSV it writes must parse
//! with the crate's own readers, and the documented spot values must come
//! out of the real command pipeline.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use obm_cli::csvio::{parse_candidate_csv, parse_numeric_csv};

fn obm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn tmpdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("obm-cli-test-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn candidate_table_prints_the_published_top_value() {
    let dir = tmpdir("cand");
    let out = stdout(&obm(&["candidate", "--d", "10", "--levels", "10"], &dir));
    let rows = parse_candidate_csv(&out).unwrap();
    assert_eq!(rows.len(), 11);
    let (l, v) = rows[10];
    assert_eq!(l, 10);
    assert!((v - 7.8134).abs() < 1e-3, "f_10(10) = {v}");
}

#[test]
fn candidate_csv_round_trips_into_verify() {
    let dir = tmpdir("verify");
    let csv = dir.join("f3.csv");
    stdout(&obm(
        &["candidate", "--d", "3", "--levels", "8", "--csv", csv.to_str().unwrap()],
        &dir,
    ));
    let out = obm(
        &["verify", "--d", "3", "--file", csv.to_str().unwrap(), "--lmax", "6", "--mode", "exhaustive"],
        &dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));

    // Perturb one level upward: verification must fail with exit 1.
    let rows = parse_candidate_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    let bumped: Vec<String> = rows
        .iter()
        .map(|(l, v)| {
            if *l == 2 {
                format!("{l},{}", v * (1.0 + 1e-6))
            } else {
                format!("{l},{v}")
            }
        })
        .collect();
    let bad = dir.join("f3-bumped.csv");
    std::fs::write(&bad, format!("l,f(l)\n{}\n", bumped.join("\n"))).unwrap();
    let out = obm(
        &["verify", "--d", "3", "--file", bad.to_str().unwrap(), "--lmax", "6", "--mode", "exhaustive"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("violated"));
}

#[test]
fn bounds_csv_has_the_published_d2_row() {
    let dir = tmpdir("bounds");
    let csv = dir.join("bounds.csv");
    stdout(&obm(
        &["bounds", "--d-min", "2", "--d-max", "4", "--csv", csv.to_str().unwrap()],
        &dir,
    ));
    let (header, rows) = parse_numeric_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(header.join(","), "d,OCS,RANKING,DETERMINISTIC,SODA,UB");
    let d2 = &rows[0];
    assert_eq!(d2[0], 2.0);
    assert_eq!(d2[1], 0.875); // OCS
    assert_eq!(d2[2], 0.8264); // RANKING
    assert_eq!(d2[5], 0.875); // UB
}

#[test]
fn gen_simulate_exact_pipeline() {
    let dir = tmpdir("pipeline");
    let inst = dir.join("g2.json");
    stdout(&obm(&["gen", "--family", "general", "--d", "2", "--out", inst.to_str().unwrap()], &dir));
    let loaded = obm::instance::Instance::load(&inst).unwrap();
    assert_eq!(loaded, obm::generators::gen_general_ranking_hard(2).unwrap());

    let exact = stdout(&obm(&["exact", "--oracle", "ranking", "--file", inst.to_str().unwrap()], &dir));
    assert!(exact.contains("expected_matched = 8/3"), "{exact}");
    assert!(exact.contains("opt = 3"));

    let sim_csv = dir.join("sim.csv");
    let sim = stdout(&obm(
        &[
            "simulate", "--algo", "ranking", "--file", inst.to_str().unwrap(),
            "--trials", "200000", "--seed", "11", "--csv", sim_csv.to_str().unwrap(),
        ],
        &dir,
    ));
    assert!(sim.lines().next().unwrap().starts_with("trials,mean_matched,opt,ratio,stderr"));
    let (header, rows) = parse_numeric_csv(&std::fs::read_to_string(&sim_csv).unwrap()).unwrap();
    assert_eq!(header.join(","), obm::sim::SIM_CSV_HEADER);
    // Row keeps its numeric tail: trials, seed, mean, stderr, opt, ratio, ci.
    let row = &rows[0];
    let mean = row[2];
    let stderr = row[3];
    assert!((mean - 8.0 / 3.0).abs() <= 4.0 * stderr);

    // Determinism: identical invocation, identical bytes.
    let again = stdout(&obm(
        &[
            "simulate", "--algo", "ranking", "--file", inst.to_str().unwrap(),
            "--trials", "200000", "--seed", "11",
        ],
        &dir,
    ));
    assert_eq!(sim, again);
}

#[test]
fn compare_runs_ocs_against_ranking() {
    let dir = tmpdir("compare");
    let inst = dir.join("sd2.json");
    stdout(&obm(&["gen", "--family", "small-d", "--d", "2", "--out", inst.to_str().unwrap()], &dir));
    let out = stdout(&obm(
        &[
            "compare", "--algos", "ocs,ranking", "--file", inst.to_str().unwrap(),
            "--candidate", "semi2", "--trials", "100000", "--seed", "5",
        ],
        &dir,
    ));
    let (_, rows) = parse_numeric_csv(&out).unwrap();
    assert_eq!(rows.len(), 2);
    // ratio column: semi-OCS beats RANKING's 119/144 on this instance.
    let (ocs_ratio, rk_ratio) = (rows[0][5], rows[1][5]);
    assert!(ocs_ratio > rk_ratio, "{ocs_ratio} vs {rk_ratio}");
    assert!((rk_ratio - 119.0 / 144.0).abs() < 0.01);
}

#[test]
fn gbound_csv_round_trips() {
    let dir = tmpdir("gbound");
    let csv = dir.join("g.csv");
    stdout(&obm(
        &["gbound", "--d", "6", "--levels", "6", "--csv", csv.to_str().unwrap()],
        &dir,
    ));
    let (header, rows) = parse_numeric_csv(&std::fs::read_to_string(&csv).unwrap()).unwrap();
    assert_eq!(header.join(","), "l,g(l),certified");
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0][1], 1.0);
    assert!(rows.iter().all(|r| r[2] == 1.0), "all levels certified");
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn smalld_oracle_prints_the_exact_rational() {
    let dir = tmpdir("smalld");
    let out = stdout(&obm(&["exact", "--oracle", "smalld", "--d", "2"], &dir));
    assert!(out.contains("ratio = 119/144"), "{out}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tmpdir("usage");
    let out = obm(&["simulate", "--algo", "nosuch", "--file", "x", "--trials", "1"], &dir);
    assert_eq!(out.status.code(), Some(2));
    let out = obm(&["exact", "--oracle", "ranking"], &dir); // missing --file
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tables_gate_passes_and_is_deterministic() {
    let dir = tmpdir("tables");
    let out = obm(&["tables"], &dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout).to_string();
    assert!(text.contains("all cells match"));
    // The published d = 7 ratio cell prints as 0.8627.
    assert!(text.contains("0.8627"));
    let again = obm(&["tables"], &dir);
    assert_eq!(text, String::from_utf8_lossy(&again.stdout));
}
