use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn saxl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saxl"))
        .args(args)
        .env_remove("SAXL_CACHE")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn report(args: &[&str]) -> (i32, Value) {
    let o = saxl(args);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&o.stderr));
    });
    (code(&o), v)
}

#[test]
fn a5_at_29_has_one_regular_suborbit() {
    let (c, v) = report(&["verify", "--q", "29", "--family", "a5", "--no-timing"]);
    assert_eq!(c, 0);
    assert_eq!(v["regular_suborbits"], 1);
    assert_eq!(v["gamma_size"], 60);
    assert_eq!(v["diameter"], 2);
    assert_eq!(v["bg_verdict"], "holds");
    assert_eq!(v["verdict"], "match");
    assert_eq!(v["subgroup"]["classes"], 2);
    assert!(v.get("wall_time_ms").is_none());
}

#[test]
fn subfield_at_16_has_no_regular_suborbit() {
    let (c, v) = report(&["verify", "--q", "16", "--family", "subfield:2", "--no-timing"]);
    assert_eq!(c, 0);
    assert_eq!(v["gamma_size"], 0);
    assert_ne!(v["base_size"], "2");
    assert_eq!(v["checks"][0]["name"], "gamma size, subfield");
    assert_eq!(v["checks"][0]["ok"], true);
}

#[test]
fn even_dihedral_plus_needs_three_points() {
    let (c, v) = report(&["verify", "--p", "2", "--n", "3", "--family", "d-plus", "--no-timing"]);
    assert_eq!(c, 0);
    assert_eq!(v["base_size"], "3");
    assert_eq!(v["degree"], 28);
    assert_eq!(v["prediction"]["base_two"], false);
    let check = &v["checks"][0];
    assert_eq!((check["bound"].as_str(), check["observed"].as_str()), (Some("28"), Some("28")));
}

#[test]
fn formula_mismatch_exits_two() {
    // The closed form for the regular-suborbit union is off at q = 27.
    let (c, v) = report(&["verify", "--q", "27", "--family", "subfield:1", "--no-timing"]);
    assert_eq!(c, 2);
    assert_eq!(v["verdict"], "mismatch");
    assert_eq!(v["gamma_size"], 768);
    assert_eq!(v["checks"][0]["bound"], "696");
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["verify", "--q", "12", "--family", "a5"][..],
        &["verify", "--q", "13", "--family", "nonsense"],
        &["verify", "--q", "13", "--family", "d-plus", "--level", "PXL"],
        &["verify", "--family", "d-plus"],
        &["verify", "--q", "13", "--p", "13", "--n", "1", "--family", "d-plus"],
        &["survey", "--q-max", "13", "--families", ""],
        &["survey", "--q-max", "13", "--families", ",,"],
        &["feng", "--q", "16"],
        &["bogus"],
    ] {
        let o = saxl(args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(code(&saxl(&["--help"])), 0);
}

#[test]
fn oracle_mode_agrees() {
    let (c, v) = report(&["verify", "--q", "27", "--family", "d-plus", "--level", "PSigmaL", "--oracle", "--no-timing"]);
    assert_eq!(c, 0);
    assert_eq!(v["consistency"]["oracle_diameter"], v["diameter"]);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["ok"] == true));
}

#[test]
fn reports_are_byte_stable() {
    let args = ["verify", "--q", "25", "--family", "d-minus", "--level", "PGammaL", "--no-timing"];
    let a = saxl(&args);
    let b = saxl(&args);
    assert_eq!(a.stdout, b.stdout);
    let timed = saxl(&args[..args.len() - 1]);
    let v: Value = serde_json::from_slice(&timed.stdout).unwrap();
    assert!(v["wall_time_ms"].is_u64());
}

#[test]
fn json_and_dot_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let dot = dir.path().join("g.dot");
    let o = saxl(&[
        "verify",
        "--q",
        "5",
        "--family",
        "d-plus",
        "--no-timing",
        "--json",
        json.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(&json).unwrap(), o.stdout);
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("graph"));
    assert_eq!(text.matches(" -- ").count(), 30);
}

fn timed(args: &[&str], cache: &Path) -> (Output, u128) {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_saxl")).args(args).env("SAXL_CACHE", cache).output().unwrap();
    (o, start.elapsed().as_micros())
}

#[test]
fn cache_hits_and_recovers_from_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "--q", "49", "--family", "d-plus", "--level", "PGammaL", "--no-timing"];
    let (cold, cold_t) = timed(&args, dir.path());
    assert_eq!(code(&cold), 0);
    assert!(String::from_utf8_lossy(&cold.stderr).contains("cache: miss"));
    let (warm, warm_t) = timed(&args, dir.path());
    assert!(String::from_utf8_lossy(&warm.stderr).contains("cache: hit"));
    assert_eq!(warm.stdout, cold.stdout);
    assert!(warm_t < cold_t, "hit {warm_t}us vs miss {cold_t}us");

    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(entries.len(), 1, "no stray temp files");
    std::fs::write(&entries[0], b"{ not json").unwrap();
    let (again, _) = timed(&args, dir.path());
    assert!(String::from_utf8_lossy(&again.stderr).contains("corrupt"));
    assert_eq!(again.stdout, cold.stdout);
    let (fixed, _) = timed(&args, dir.path());
    assert!(String::from_utf8_lossy(&fixed.stderr).contains("cache: hit"));
}

#[test]
fn unwritable_cache_only_warns() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let (o, _) = timed(&["verify", "--q", "13", "--family", "d-plus", "--no-timing"], &blocker.join("sub"));
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let plain = saxl(&["verify", "--q", "13", "--family", "d-plus", "--no-timing"]);
    assert_eq!(o.stdout, plain.stdout);
}

fn csv_rows(bytes: &[u8]) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(bytes).records().map(|r| r.unwrap()).collect()
}

#[test]
fn survey_rows_are_ordered_and_job_independent() {
    let base = ["survey", "--q-min", "5", "--q-max", "25", "--families", "d-plus,a4,s4,a5"];
    let one = saxl(&[&base[..], &["--jobs", "1"]].concat());
    let four = saxl(&[&base[..], &["--jobs", "4"]].concat());
    assert_eq!(code(&one), 0, "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    let rows = csv_rows(&one.stdout);
    let qs: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(qs.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(qs.first(), Some(&5));
    assert_eq!(qs.last(), Some(&25));
    let status = |q: &str, fam: &str, level: &str| -> Vec<String> {
        rows.iter().filter(|r| &r[0] == q && &r[1] == fam && &r[2] == level).map(|r| r[14].to_string()).collect()
    };
    // A5 at 5 is the whole socle; A4 does not embed at 8.
    assert_eq!(status("5", "a5", "T"), ["n/a"]);
    assert_eq!(status("8", "a4", "T"), ["n/a"]);
    // Two classes of S4 at 17, one row each.
    assert_eq!(status("17", "s4", "T"), ["match", "match"]);
    // At q = 9 the outer group is Z2 x Z2; duplicate spellings of a level are dropped.
    let levels: Vec<&str> = rows.iter().filter(|r| &r[0] == "9" && &r[1] == "d-plus").map(|r| r.get(2).unwrap()).collect();
    assert_eq!(levels, ["T", "PGL", "PSigmaL", "PGammaL", "T:df^1"]);
}

#[test]
fn survey_mismatch_exits_two() {
    let o = saxl(&["survey", "--q-min", "27", "--q-max", "27", "--families", "subfield:1", "--levels", "T"]);
    assert_eq!(code(&o), 2);
    let rows = csv_rows(&o.stdout);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][14], "mismatch");
}

fn feng(q: &str) -> (i32, String) {
    let o = saxl(&["feng", "--q", q]);
    (code(&o), String::from_utf8(o.stdout).unwrap())
}

#[test]
fn feng_tables() {
    for (q, rows) in [("17", 15), ("25", 23)] {
        let (c, out) = feng(q);
        assert_eq!(c, 0);
        let (table, summary) = out.trim_end().rsplit_once('\n').unwrap();
        assert_eq!(summary, format!("# rows={rows} all_ok=true"));
        let recs = csv_rows(table.as_bytes());
        assert_eq!(recs.len(), rows);
        for r in &recs {
            assert_eq!(&r[1], &r[2], "count equals closed form");
            assert_eq!(&r[5], "true");
        }
    }
    let (_, out) = feng("17");
    let bound: u64 = csv_rows(out.rsplit_once('#').unwrap().0.as_bytes())[0][4].parse().unwrap();
    assert_eq!(bound, 1);
}
