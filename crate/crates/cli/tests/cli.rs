use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use bibcount::counting::{subject_group_count, CountingMethod};
use bibcount::ingest::parse_jsonl;
use bibcount::model::SubjectScheme;
use bibcount::rank::srcc_matrix;
use bibcount::table::format_fixed;

const CORPUS: &str = r#"{"id":"p1","year":2016,"doc_type":"article","subjects":["PHYS"],"authors":[{"countries":["IN"]},{"countries":["GB"]}]}
{"id":"p2","year":2016,"doc_type":"article","subjects":["MED"],"authors":[{"countries":["IN"]}]}
{"id":"p3","year":2015,"doc_type":"other","subjects":["MED"],"authors":[{"countries":["US"]}]}
{"id":"p4","year":2016,"doc_type":"review","subjects":["PHYS","MED"],"authors":[{"countries":["US","GB"]},{"countries":["US"]},{"countries":[]}]}
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bibcount"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.jsonl"), CORPUS).unwrap();
    std::fs::write(
        dir.path().join("scheme.json"),
        r#"{"phys":["PHYS"],"health":["MED"]}"#,
    )
    .unwrap();
    dir
}

#[test]
fn count_fractional_author() {
    let dir = setup();
    let o = run(
        &[
            "count",
            "--input",
            "c.jsonl",
            "--method",
            "fractional",
            "--mode",
            "author",
            "--format",
            "csv",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    // p3 has doc type "other" and is filtered out by default.
    assert_eq!(
        stdout(&o),
        "country,fractional-author\nIN,1.50\nGB,0.67\nUS,0.50\nZZ,0.33\n"
    );
}

#[test]
fn doc_type_and_year_filters() {
    let dir = setup();
    let o = run(
        &[
            "count",
            "--input",
            "c.jsonl",
            "--doc-types",
            "all",
            "--years",
            "2015-2016",
        ],
        dir.path(),
    );
    assert_eq!(stdout(&o), "country,whole\nGB,2\nIN,2\nUS,2\nZZ,1\n");
    let o = run(
        &[
            "count",
            "--input",
            "c.jsonl",
            "--doc-types",
            "all",
            "--years",
            "2015",
        ],
        dir.path(),
    );
    assert_eq!(stdout(&o), "country,whole\nUS,1\n");
}

#[test]
fn stdin_input() {
    let mut child = bin()
        .args(["rank", "--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(CORPUS.as_bytes())
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).starts_with("rank,country,whole,tie_rank\n1,GB,2,1.5\n1,IN,2,1.5\n3,US,1,3.0\n")
    );
    assert!(!stdout(&o).contains("ZZ"));
}

#[test]
fn collab_table() {
    let dir = setup();
    let o = run(&["collab", "--input", "c.jsonl"], dir.path());
    let text = stdout(&o);
    assert!(text.starts_with("country,wc,fc,icp,icp_pct,reduction_pct,ratio\n"));
    assert!(text.contains("\nIN,2,1.50,1,50.0,33.3,0.67\n"), "{text}");
}

#[test]
fn correlate_matches_library() {
    let dir = setup();
    let o = run(
        &[
            "correlate",
            "--input",
            "c.jsonl",
            "--scheme",
            "scheme.json",
            "--slices",
            "ALL,phys",
            "--stat",
            "spearman",
        ],
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let (corpus, _) = parse_jsonl(CORPUS.as_bytes(), "t").unwrap();
    let corpus =
        bibcount::ingest::apply_filter(&corpus, &bibcount::ingest::Filter::research_types())
            .with_scheme(
                SubjectScheme::from_json(r#"{"phys":["PHYS"],"health":["MED"]}"#).unwrap(),
            );
    let tables: Vec<_> = ["ALL", "phys"]
        .iter()
        .map(|s| subject_group_count(&corpus, s, CountingMethod::Whole).unwrap())
        .collect();
    let m = srcc_matrix(&tables).unwrap();
    let expected = format!(
        "slice,ALL,phys\nALL,1.000,{0}\nphys,{0},1.000\n",
        format_fixed(m.values[0][1], 3)
    );
    assert_eq!(stdout(&o), expected);
}

#[test]
fn subjects_long_table() {
    let dir = setup();
    let o = run(
        &[
            "subjects",
            "--input",
            "c.jsonl",
            "--scheme",
            "scheme.json",
            "--slices",
            "health",
        ],
        dir.path(),
    );
    assert_eq!(
        stdout(&o),
        "group,country,whole,rank\nhealth,GB,1,1\nhealth,IN,1,1\nhealth,US,1,1\n"
    );
    let o = run(
        &[
            "subjects",
            "--input",
            "c.jsonl",
            "--scheme",
            "scheme.json",
            "--slices",
            "health",
            "--include-unresolved",
        ],
        dir.path(),
    );
    assert!(stdout(&o).ends_with("health,ZZ,1,1\n"));
}

#[test]
fn replicate_table2_succeeds() {
    let dir = setup();
    let o = run(
        &["replicate", "--target", "table2", "--format", "md"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("Switzerland"));
    assert!(text.contains("All replicated values are within tolerance."));
}

#[test]
fn replicate_reports_failures_with_exit_1() {
    let dir = setup();
    let o = run(
        &[
            "replicate",
            "--target",
            "table4",
            "--srcc-basis",
            "average-rank",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("out of tolerance"));
}

#[test]
fn synth_is_deterministic_and_ingestible() {
    let dir = setup();
    let a = run(&["synth", "--seed", "42", "--n", "50"], dir.path());
    let b = run(&["synth", "--seed", "42", "--n", "50"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 50);
    let (corpus, report) = parse_jsonl(a.stdout.as_slice(), "synth").unwrap();
    assert!(report.is_clean());
    assert_eq!(corpus.len(), 50);
}

#[test]
fn output_file() {
    let dir = setup();
    let o = run(
        &["count", "--input", "c.jsonl", "--output", "out.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    assert!(text.starts_with("country,whole\n"));
}

#[test]
fn ingest_rejects_with_exit_1() {
    let dir = setup();
    std::fs::write(
        dir.path().join("bad.jsonl"),
        format!("{CORPUS}{{\"id\":\"p5\",\"year\":2016}}\nnot json\n"),
    )
    .unwrap();
    let o = run(&["ingest", "--input", "bad.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("severity,record_id,message\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("error,")).count(), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("6 records read: 4 accepted, 2 rejected"));

    let ok = run(&["ingest", "--input", "c.jsonl"], dir.path());
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn exit_codes() {
    let dir = setup();
    assert_eq!(
        run(&["count", "--input", "missing.jsonl"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(
            &["count", "--input", "c.jsonl", "--scheme", "missing.json"],
            dir.path()
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(
        run(&["count", "--input", "c.jsonl", "--bogus"], dir.path())
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        run(
            &["count", "--input", "c.jsonl", "--format", "xml"],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(
            &["count", "--input", "c.jsonl", "--group", "nope"],
            dir.path()
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(run(&[], dir.path()).status.code(), Some(1));
    assert_eq!(run(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(run(&["--version"], dir.path()).status.code(), Some(0));
}
