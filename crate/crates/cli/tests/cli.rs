use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phonotactic_cli::parse_complexity_tsv;
use phonotactic_core::syllabify::parse_rendered;
use phonotactic_core::PhoneTable;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phonotactic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const HEADER: &str = "site_id\tsite_name\tlongitude\tlatitude\tconcept_id\ttranscription\n";

fn write_corpus(dir: &Path, rows: &[&str]) -> String {
    let path = dir.join("corpus.tsv");
    fs::write(&path, format!("{HEADER}{}\n", rows.join("\n"))).unwrap();
    path.to_str().unwrap().to_string()
}

fn small_synth(dir: &Path) -> String {
    let d = dir.to_str().unwrap();
    let o = run(&["synth", "--seed", "3", "--n-sites", "4", "--words-per-site", "24", "--out", d]);
    assert!(o.status.success(), "{}", stderr(&o));
    dir.join("corpus.tsv").to_str().unwrap().to_string()
}

#[test]
fn clean_synth_corpus_validates() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = small_synth(tmp.path());
    let o = run(&["validate", &corpus]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["issues"].as_array().unwrap().len(), 0);
    assert_eq!(report["sites"].as_array().unwrap().len(), 4);
    assert_eq!(report["sites"][0]["n_words"], 24);
}

#[test]
fn bad_symbol_is_reported_with_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(tmp.path(), &["A\tAlpha\t5.0\t52.0\tc1\tpata", "A\tAlpha\t5.0\t52.0\tc2\tpa☃a"]);
    let o = run(&["validate", &corpus]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["unmatched_symbols"]["☃"], 1);
    assert_eq!(report["issues"][0]["concept_id"], "c2");
}

#[test]
fn missing_tone_names_site_and_concept() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(
        tmp.path(),
        &["M1\tMin one\t119.3\t26.1\tc1\tŋi31tʰæ51", "M1\tMin one\t119.3\t26.1\tc7\tŋi31tʰæ"],
    );
    let o = run(&["validate", "--profile", "min", &corpus]);
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let issue = &report["issues"][0];
    assert_eq!(issue["site_id"], "M1");
    assert_eq!(issue["concept_id"], "c7");
    assert!(issue["error"].as_str().unwrap().contains("not closed by a tone"));
}

#[test]
fn missing_input_names_the_path() {
    let o = run(&["correlate", "/no/such/complexity.tsv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/complexity.tsv"));
}

#[test]
fn seed_is_required_for_training_and_synthesis() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["synth", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--seed"));
    let corpus = small_synth(tmp.path());
    let o = run(&["complexity", &corpus]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(run(&["synth", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["surface", "x.tsv", "--corpus", "y.tsv", "--resolution", "7"]).status.code(), Some(2));
}

#[test]
fn syllabify_output_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(
        tmp.path(),
        &["D\tDorp\t5.0\t52.0\taarde\tʔɔrdə", "D\tDorp\t5.0\t52.0\tklaver\tklavɛiər", "D\tDorp\t5.0\t52.0\tstal\tstɑl"],
    );
    let out = tmp.path().join("out");
    let o = run(&["syllabify", "--profile", "dutch", &corpus, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let tsv = fs::read_to_string(out.join("syllables.tsv")).unwrap();
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines[0], "site_id\tconcept_id\tsyllables");
    assert_eq!(lines[1], "D\taarde\tʔ|ɔ|r.d|ə|");
    assert_eq!(lines[3], "D\tstal\tst|ɑ|l");
    for line in &lines[1..] {
        let rendered = line.split('\t').nth(2).unwrap();
        let (tokens, syllables) = parse_rendered(rendered, PhoneTable::builtin()).unwrap();
        assert_eq!(phonotactic_core::syllabify::render_syllables(&tokens, &syllables), rendered);
    }
}

#[test]
fn multitask_toggle_gives_two_tables_over_the_same_sites() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = small_synth(tmp.path());
    let d = tmp.path().to_str().unwrap();
    let model = [
        "--embedding-dim", "4", "--hidden-dim", "6", "--max-epochs", "3", "--folds", "2", "--seed", "5", "--out", d,
    ];
    for extra in [&[][..], &["--multitask"][..]] {
        let mut args = vec!["complexity", corpus.as_str()];
        args.extend_from_slice(&model);
        args.extend_from_slice(extra);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let single = parse_complexity_tsv(&fs::read_to_string(tmp.path().join("complexity.tsv")).unwrap()).unwrap();
    let multi =
        parse_complexity_tsv(&fs::read_to_string(tmp.path().join("complexity_multitask.tsv")).unwrap()).unwrap();
    let ids = |rows: &[phonotactic_core::phonolm::ComplexityRow]| rows.iter().map(|r| r.site_id.clone()).collect::<Vec<_>>();
    assert_eq!(ids(&single), ids(&multi));
    assert_eq!(ids(&single), ["S01", "S02", "S03", "S04"]);
    assert!(single.iter().all(|r| r.bits_per_phoneme > 0.0 && r.n_words == 24));

    let o = run(&["correlate", tmp.path().join("complexity_multitask.tsv").to_str().unwrap(), "--multitask", "--out", d]);
    assert!(o.status.success(), "{}", stderr(&o));
    let corr: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("correlation_multitask.json")).unwrap()).unwrap();
    assert_eq!(corr["multitask"], true);
    assert_eq!(corr["n"], 4);
}

#[test]
fn training_floor_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = small_synth(tmp.path());
    let o = run(&["complexity", &corpus, "--seed", "1", "--min-words", "50"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("training floor"));
}

#[test]
fn surface_rejects_unknown_sites() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = small_synth(tmp.path());
    let tsv = tmp.path().join("c.tsv");
    fs::write(
        &tsv,
        "site_id\tbits_per_phoneme\tavg_word_length\tn_words\nS01\t2.5\t4\t24\nS02\t2.4\t4\t24\nS03\t2.6\t4\t24\nZZ\t2.1\t5\t24\n",
    )
    .unwrap();
    let o = run(&["surface", tsv.to_str().unwrap(), "--corpus", &corpus]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ZZ"));
}

#[test]
fn feature_table_dump_reloads() {
    let o = run(&["features"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let table = phonotactic_core::phoncore::load_feature_table(&text).unwrap();
    assert_eq!(&table, PhoneTable::builtin());
}
