use std::path::{Path, PathBuf};

use seqprobe::eval::{bleu, corpus_bleu};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("seqprobe").chain(args.iter().copied());
    let code = seqprobe_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, err) = run(&[]);
    assert_eq!(code, 2);
    assert!(err.contains("Usage: seqprobe <COMMAND>"));
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["eval-auc", "--format", "xml"]).0, 2);
    assert_eq!(run(&["probe-sim"]).0, 2);
    assert_eq!(run(&["probe-sim", "--bisection", "3", "--catalog", "x.jsonl"]).0, 2);
    assert_eq!(run(&["train", "--corpus", "x.tsv"]).0, 2);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("probe-sim"));
}

#[test]
fn runtime_failures_exit_one() {
    let (code, _, err) = run(&["eval-bleu", "--input", "/definitely/missing.tsv"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    assert_eq!(run(&["rewrite", "--model", "/definitely/missing.json"]).0, 1);
}

#[test]
fn eval_auc_fixture_reports_three_quarters() {
    let (code, out, _) = run(&["eval-auc", "--input", &fixture("auc_four_rows.tsv")]);
    assert_eq!(code, 0);
    let r = json(&out);
    assert_eq!(r["metric"], "auc");
    assert_eq!(r["auc"], 0.75);
    assert_eq!(r["count"], 4);
    assert_eq!((r["positives"].as_u64(), r["negatives"].as_u64()), (Some(2), Some(2)));

    let (code, out, _) = run(&["eval-auc", "--input", &fixture("auc_four_rows.tsv"), "--format", "tsv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    let header: Vec<&str> = lines[0].split('\t').collect();
    let row: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(header.len(), row.len());
    assert_eq!(row[header.iter().position(|h| *h == "auc").unwrap()], "0.75");
}

#[test]
fn eval_bleu_matches_the_library() {
    let (code, out, _) = run(&["eval-bleu", "--input", &fixture("bleu.tsv")]);
    assert_eq!(code, 0);
    let r = json(&out);
    let t = |s: &str| s.split_whitespace().map(String::from).collect::<Vec<_>>();
    let pairs = vec![
        (t("the cat is on the mat"), vec![t("the cat is on the mat")]),
        (t("the the the the the the the"), vec![t("the cat is on the mat")]),
        (t("red scarf"), vec![t("red scarf"), t("red wool scarf")]),
    ];
    assert_eq!(r["score"].as_f64().unwrap(), corpus_bleu(&pairs, 4, false).unwrap());
    assert_eq!(r["count"], 3);
    assert_eq!(bleu(&pairs[2].0, &pairs[2].1, 4).unwrap(), 1.0);
    let (_, pooled, _) = run(&["eval-bleu", "--input", &fixture("bleu.tsv"), "--pooled"]);
    assert_eq!(json(&pooled)["score"].as_f64().unwrap(), corpus_bleu(&pairs, 4, true).unwrap());
}

#[test]
fn probe_sim_bisection_needs_three_questions() {
    let (code, out, _) = run(&["probe-sim", "--bisection", "3", "--threshold", "0.1", "--trials", "100"]);
    assert_eq!(code, 0);
    let r = json(&out);
    let run0 = &r["runs"][0];
    assert_eq!(run0["mean_questions"], 3.0);
    assert_eq!(run0["identified"], 100);
    assert_eq!(run0["questions_histogram"]["3"], 100);
    // same seed, same bytes
    let (_, again, _) = run(&["probe-sim", "--bisection", "3", "--threshold", "0.1", "--trials", "100"]);
    assert_eq!(out, again);
}

#[test]
fn probe_sim_reads_catalog_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.jsonl");
    std::fs::write(
        &path,
        r#"{"id": "a", "title": "red hat", "attributes": {"color": "red", "kind": "hat"}}
{"id": "b", "title": "blue hat", "attributes": {"color": "blue", "kind": "hat"}}
{"id": "c", "title": "red scarf", "attributes": {"color": "red", "kind": "scarf"}}
{"id": "d", "title": "blue scarf", "attributes": {"color": "blue", "kind": "scarf"}}
"#,
    )
    .unwrap();
    let p = path.display().to_string();
    let (code, out, _) = run(&["probe-sim", "--catalog", &p, "--threshold", "0.5", "--format", "tsv", "--seed", "4"]);
    assert_eq!(code, 0, "{out}");
    let row: Vec<&str> = out.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[0], "0.5");
    assert_eq!(row[2], "2");
    assert_eq!(row[3], "100");
}

fn write_corpus(dir: &Path) -> PathBuf {
    let path = dir.join("pairs.tsv");
    let corpus = seqprobe::synthetic::copy_task(60, 5, 2, 4, 3);
    let text: String = corpus
        .pairs
        .iter()
        .map(|(s, t)| format!("{}\t{}\n", s.join(" "), t.join(" ")))
        .collect();
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn train_rewrite_score_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out_dir = dir.path().join("model");
    let args = |epochs: &'static str| {
        vec![
            "train".to_string(),
            "--corpus".into(),
            corpus.display().to_string(),
            "--out".into(),
            out_dir.display().to_string(),
            "--d-emb".into(),
            "4".into(),
            "--d-h".into(),
            "6".into(),
            "--epochs".into(),
            epochs.into(),
            "--seed".into(),
            "5".into(),
        ]
    };
    let a = args("2");
    let a: Vec<&str> = a.iter().map(String::as_str).collect();
    let (code, first, err) = run(&a);
    assert_eq!(code, 0, "{err}");
    let report = json(&first);
    assert_eq!(report["loss_log"].as_array().unwrap().len(), 2);
    assert!(err.contains("epoch 2"));
    let (_, second, _) = run(&a);
    assert_eq!(first, second, "seeded training is reproducible");

    let model = out_dir.join("model.json").display().to_string();
    let inputs = dir.path().join("inputs.txt");
    std::fs::write(&inputs, "w1 w2 w3\nw4 w0\n").unwrap();
    let (code, out, err) = run(&["rewrite", "--model", &model, "--input", &inputs.display().to_string()]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<serde_json::Value> = out.lines().map(json).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l["probabilities"].as_array().is_some()));
    let (_, tsv, _) = run(&["rewrite", "--model", &model, "--input", &inputs.display().to_string(), "--format", "tsv"]);
    assert_eq!(tsv.lines().count(), 2);
    assert_eq!(tsv.lines().next().unwrap(), lines[0]["rewrite"]);

    let pairs = dir.path().join("score.tsv");
    std::fs::write(&pairs, "w1 w2\tw1 w2 w3\nw3\tw4 w0\n").unwrap();
    let (code, out, _) = run(&["score", "--model", &model, "--input", &pairs.display().to_string()]);
    assert_eq!(code, 0);
    let bundle = seqprobe::checkpoint::ModelBundle::load(Path::new(&model)).unwrap();
    let expect = bundle.score(&["w1", "w2", "w3"], &["w1", "w2"]).unwrap();
    let first: serde_json::Value = json(out.lines().next().unwrap());
    assert_eq!(first["log_likelihood"].as_f64().unwrap(), expect.log_likelihood);
    assert_eq!(first["length"], 3);
    let (_, tsv, _) = run(&["score", "--model", &model, "--input", &pairs.display().to_string(), "--format", "tsv"]);
    let row: Vec<f64> = tsv.lines().nth(1).unwrap().split('\t').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[0], expect.log_likelihood);

    // three more epochs from the saved state equal a fresh five-epoch run
    let (code, resumed, err) = run(&[
        "train",
        "--corpus",
        &corpus.display().to_string(),
        "--out",
        &out_dir.display().to_string(),
        "--epochs",
        "5",
        "--resume",
    ]);
    assert_eq!(code, 0, "{err}");
    let fresh_dir = dir.path().join("fresh");
    let mut b = args("5");
    b[4] = fresh_dir.display().to_string();
    let b: Vec<&str> = b.iter().map(String::as_str).collect();
    let (_, fresh, _) = run(&b);
    assert_eq!(json(&resumed)["loss_log"], json(&fresh)["loss_log"]);
}

#[test]
fn eval_auc_with_a_model_scores_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = write_corpus(dir.path());
    let out_dir = dir.path().join("m");
    let (code, _, err) = run(&[
        "train",
        "--corpus",
        &corpus.display().to_string(),
        "--out",
        &out_dir.display().to_string(),
        "--d-emb",
        "4",
        "--d-h",
        "4",
        "--epochs",
        "1",
    ]);
    assert_eq!(code, 0, "{err}");
    let rows = dir.path().join("rows.tsv");
    std::fs::write(&rows, "w1 w2\tw1 w2\tgood\nw3\tw1 w2\tbad\nw0\tw0 w4\texcellent\nw4\tw1\tfair\n").unwrap();
    let model = out_dir.join("model.json").display().to_string();
    let (code, out, err) = run(&["eval-auc", "--input", &rows.display().to_string(), "--model", &model]);
    assert_eq!(code, 0, "{err}");
    let a = json(&out)["auc"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&a));
}
