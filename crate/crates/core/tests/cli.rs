use std::fs;
use std::path::{Path, PathBuf};

use tbix::cli::{run, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use tempfile::TempDir;

const CORPUS: &str = "the cat sat\nthe dog sat\na cat ran\n";

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn tbix(args: &[&str]) -> Output {
    let argv = std::iter::once("tbix").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    Output {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Builds the reference index and writes a query file next to it.
fn setup() -> (TempDir, PathBuf, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    let index = dir.path().join("index.tbix");
    let queries = dir.path().join("queries.txt");
    fs::write(&corpus, CORPUS).unwrap();
    fs::write(&queries, "cat sat\nthe\nzebra\n").unwrap();
    let r = tbix(&["build", "--corpus", p(&corpus), "--out", p(&index)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(r.out.trim(), "docs=3 terms=6 index_bits=72");
    (dir, index, queries)
}

#[test]
fn oracle_query_lines() {
    let (_dir, index, queries) = setup();
    let r = tbix(&[
        "query",
        "--index",
        p(&index),
        "--strategy",
        "oracle",
        "--queries",
        p(&queries),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let lines: Vec<serde_json::Value> = r
        .out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["docids"], serde_json::json!([0]));
    assert_eq!(lines[1]["docids"], serde_json::json!([0, 1]));
    assert_eq!(lines[2]["docids"], serde_json::json!([]));
    assert_eq!(lines[2]["unknown"], serde_json::json!(["zebra"]));
}

#[test]
fn every_strategy_agrees_on_the_reference_corpus() {
    let (_dir, index, queries) = setup();
    let runs = [
        vec!["--strategy", "exhaustive"],
        vec!["--strategy", "tiered", "--k", "1"],
        vec!["--strategy", "tiered", "--k", "1", "--fallback"],
        vec!["--strategy", "block", "--beta", "2"],
        vec!["--strategy", "block", "--beta", "2", "--hybrid", "1"],
    ];
    let docids = |out: &str| -> Vec<serde_json::Value> {
        out.lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["docids"].clone())
            .collect()
    };
    let want = docids(
        &tbix(&[
            "query",
            "--index",
            p(&index),
            "--strategy",
            "oracle",
            "--queries",
            p(&queries),
        ])
        .out,
    );
    for extra in runs {
        let mut args = vec!["query", "--index", p(&index), "--queries", p(&queries)];
        args.extend(extra.iter().copied());
        let r = tbix(&args);
        assert_eq!(r.code, EXIT_OK, "{extra:?}: {}", r.err);
        if extra.contains(&"--fallback") || extra[1] != "tiered" {
            assert_eq!(docids(&r.out), want, "{extra:?}");
        }
    }
}

#[test]
fn gain_and_guarantees_csv() {
    let (_dir, index, queries) = setup();
    let r = tbix(&["gain", "--index", p(&index), "--ks", "1", "--s", "0"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let mut rdr = csv::Reader::from_reader(r.out.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    let row = rdr.records().next().unwrap().unwrap();
    let get = |name: &str| {
        row.get(headers.iter().position(|h| h == name).unwrap())
            .unwrap()
            .to_string()
    };
    assert_eq!(get("replaced"), "3");
    assert_eq!(get("gain_s0"), "18");

    let r = tbix(&[
        "guarantees",
        "--index",
        p(&index),
        "--queries",
        p(&queries),
        "--ks",
        "1,2",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    let rows: Vec<Vec<String>> = csv::Reader::from_reader(r.out.as_bytes())
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    for row in &rows {
        let with: f64 = row[1].parse().unwrap();
        let without: f64 = row[2].parse().unwrap();
        assert!(without <= with);
    }
    assert_eq!(rows[1][1], "100");
}

#[test]
fn tier_and_blocks_persist_into_the_file() {
    let (dir, index, _) = setup();
    let tiered = dir.path().join("tiered.tbix");
    let r = tbix(&[
        "tier",
        "--index",
        p(&index),
        "--k",
        "1",
        "--out",
        p(&tiered),
    ]);
    assert_eq!((r.code, r.out.trim()), (EXIT_OK, "k=1 replaced=3"));
    let r = tbix(&["blocks", "--index", p(&tiered), "--beta", "2"]);
    assert_eq!(
        (r.code, r.out.trim()),
        (EXIT_OK, "beta=2 hybrid=0 blocks=2")
    );

    let file = tbix::format::IndexFile::from_bytes(&fs::read(&tiered).unwrap()).unwrap();
    assert_eq!(file.tiered.as_ref().map(|t| t.k()), Some(1));
    assert_eq!(file.blocks.as_ref().map(|b| b.beta()), Some(2));
}

#[test]
fn stats_csv() {
    let (_dir, index, _) = setup();
    let r = tbix(&["stats", "--index", p(&index)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert!(r.out.starts_with(
        "section,key,value\nsummary,docs,3\nsummary,terms,6\nsummary,total_bits,72\n"
    ));
    assert!(r.out.contains("df_histogram,1,3\n"));
    assert!(r.out.contains("df_histogram,2,3\n"));
}

#[test]
fn selftest_passes() {
    let r = tbix(&["selftest"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert!(r.out.trim_end().ends_with(" 0 failed"));
}

#[test]
fn usage_errors() {
    let (_dir, index, queries) = setup();
    assert_eq!(tbix(&["nosuch"]).code, EXIT_USAGE);
    assert_eq!(
        tbix(&["stats", "--index", p(&index), "--bogus"]).code,
        EXIT_USAGE
    );
    let r = tbix(&[
        "query",
        "--index",
        p(&index),
        "--strategy",
        "oracle",
        "--fallback",
        "--queries",
        p(&queries),
    ]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.err.contains("--fallback"));
    assert_eq!(
        tbix(&["tier", "--index", p(&index), "--k", "0"]).code,
        EXIT_USAGE
    );
    assert_eq!(tbix(&["--help"]).code, EXIT_OK);
}

#[test]
fn data_errors_name_the_offset() {
    let (dir, index, _) = setup();
    let missing = dir.path().join("missing.tbix");
    assert_eq!(tbix(&["stats", "--index", p(&missing)]).code, EXIT_DATA);

    let bytes = fs::read(&index).unwrap();
    let bad = dir.path().join("bad.tbix");
    fs::write(&bad, &bytes[..30]).unwrap();
    let r = tbix(&["stats", "--index", p(&bad)]);
    assert_eq!(r.code, EXIT_DATA);
    assert!(r.err.contains("offset"), "{}", r.err);

    fs::write(&bad, b"NOPE\x01\x00\x00\x00").unwrap();
    assert_eq!(tbix(&["stats", "--index", p(&bad)]).code, EXIT_DATA);
}

#[test]
fn output_is_deterministic() {
    let (dir, index, queries) = setup();
    let again = dir.path().join("again.tbix");
    let corpus = dir.path().join("corpus.txt");
    tbix(&["build", "--corpus", p(&corpus), "--out", p(&again)]);
    assert_eq!(fs::read(&index).unwrap(), fs::read(&again).unwrap());

    let args = [
        "query",
        "--index",
        p(&index),
        "--strategy",
        "exhaustive",
        "--model",
        "bloom",
        "--bits-per-pair",
        "4",
        "--queries",
        p(&queries),
    ];
    assert_eq!(tbix(&args).out, tbix(&args).out);
}
