//! Drive the `gendial` binary through the staged workflow and the one-shot
//! `run` subcommand, over a synthetic vocabulary and an always-masculine
//! mock system.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gendial_core::pipeline::read_suite;
use gendial_core::vocab::{
    AdjectiveEntry, AdjType, AdverbEntry, OccupationEntry, Sentiment, Stereotype, Vocabulary,
};
use gendial_core::BinaryGender;

fn gendial(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gendial"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn synthetic_vocabulary() -> Vocabulary {
    let sentiments = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];
    let types = [AdjType::Character, AdjType::Appearance];
    Vocabulary::new(
        (0..350)
            .map(|i| AdjectiveEntry {
                lemma: format!("adj{i:03}"),
                stereotype: if i < 30 {
                    Stereotype::M
                } else if i < 60 {
                    Stereotype::F
                } else {
                    Stereotype::Neutral
                },
                sentiment: sentiments[i % 3],
                adj_type: types[(i / 3) % 2],
            })
            .collect(),
        (0..29)
            .map(|i| AdverbEntry {
                lemma: format!("adv{i:02}"),
                stereotype: if i < 15 { BinaryGender::M } else { BinaryGender::F },
            })
            .collect(),
        (0..44)
            .map(|i| OccupationEntry {
                lemma: format!("occ{i:02}"),
                stereotype: if i < 22 { BinaryGender::M } else { BinaryGender::F },
            })
            .collect(),
    )
}

/// Lay out vocabulary, synthetic dictionary and lexicon files.
fn write_inputs(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let v = synthetic_vocabulary();
    let vocab_dir = dir.join("vocab");
    fs::create_dir_all(&vocab_dir).unwrap();
    let (adj, adv, occ) = v.to_tsv();
    fs::write(vocab_dir.join("adjectives.tsv"), adj).unwrap();
    fs::write(vocab_dir.join("adverbs.tsv"), adv).unwrap();
    fs::write(vocab_dir.join("occupations.tsv"), occ).unwrap();

    let dict_dir = dir.join("dict");
    fs::create_dir_all(&dict_dir).unwrap();
    let mut dict = String::from("form\tlemma\tpos\tgender\n");
    let mut lex = String::from("source\ttarget_lemma\n");
    for a in v.adjectives() {
        dict.push_str(&format!("{0}o\t{0}o\tadj\tm\n{0}a\t{0}o\tadj\tf\n", a.lemma));
        lex.push_str(&format!("{0}\t{0}o\n", a.lemma));
    }
    fs::write(dict_dir.join("dict.es.tsv"), dict).unwrap();
    let lex_path = dir.join("translations.es.tsv");
    fs::write(&lex_path, lex).unwrap();
    (vocab_dir, dict_dir, lex_path)
}

/// Always-masculine mock: every known adjective token becomes its synthetic
/// masculine target form.
fn mock_translate_file(sources: &Path, out: &Path, vocab: &Vocabulary) {
    let adjectives: HashSet<&str> = vocab.adjectives().iter().map(|a| a.lemma.as_str()).collect();
    let text = fs::read_to_string(sources).unwrap();
    let mut translated = String::new();
    for line in text.lines() {
        let mut token = String::new();
        for c in line.chars().chain(std::iter::once('\n')) {
            if c.is_alphanumeric() || c == '\'' {
                token.push(c);
            } else {
                if adjectives.contains(token.as_str()) {
                    translated.push_str(&token);
                    translated.push('o');
                } else {
                    translated.push_str(&token);
                }
                token.clear();
                if c != '\n' {
                    translated.push(c);
                }
            }
        }
        translated.push('\n');
    }
    fs::write(out, translated).unwrap();
}

#[test]
fn help_lists_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = gendial(&["--help"], dir.path());
    assert_ok(&out, "--help");
    let help = String::from_utf8_lossy(&out.stdout).to_string();
    for sub in ["generate", "ingest", "label", "score", "regress", "run", "bundle"] {
        assert!(help.contains(sub), "help missing `{sub}`:\n{help}");
    }
}

#[test]
fn staged_workflow_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (vocab_dir, dict_dir, lex_path) = write_inputs(dir.path());

    let out = gendial(
        &[
            "generate",
            "--vocab-dir",
            vocab_dir.to_str().unwrap(),
            "--seed",
            "5",
            "--out",
            "suite.jsonl",
        ],
        dir.path(),
    );
    assert_ok(&out, "generate");
    let suite = read_suite(&dir.path().join("suite.jsonl")).unwrap();
    assert_eq!(suite.instances.len(), 6686);

    let vocab = synthetic_vocabulary();
    mock_translate_file(
        &dir.path().join("sources.txt"),
        &dir.path().join("system.out.txt"),
        &vocab,
    );

    let out = gendial(
        &[
            "ingest",
            "--suite",
            "suite.jsonl",
            "--system-out",
            "system.out.txt",
            "--system-id",
            "mock",
            "--lang",
            "es",
            "--out",
            "translations.jsonl",
        ],
        dir.path(),
    );
    assert_ok(&out, "ingest");

    let out = gendial(
        &[
            "label",
            "--suite",
            "suite.jsonl",
            "--vocab-dir",
            vocab_dir.to_str().unwrap(),
            "--translations",
            "translations.jsonl",
            "--dict-dir",
            dict_dir.to_str().unwrap(),
            "--dict-cache",
            "dict-cache.jsonl",
            "--lexicon",
            lex_path.to_str().unwrap(),
            "--system-id",
            "mock",
            "--lang",
            "es",
            "--out",
            "annotations.jsonl",
        ],
        dir.path(),
    );
    assert_ok(&out, "label");
    assert!(dir.path().join("dict-cache.jsonl").exists());

    let out = gendial(
        &[
            "score",
            "--suite",
            "suite.jsonl",
            "--annotations",
            "annotations.jsonl",
            "--kind",
            "all",
            "--per-template",
            "--out",
            "reports",
        ],
        dir.path(),
    );
    assert_ok(&out, "score");
    let adverb_tsv = fs::read_to_string(dir.path().join("reports/mock.adverb.tsv")).unwrap();
    // always-masculine: every M cell prints 1.000 and the delta is 0.000
    let row = adverb_tsv.lines().nth(1).unwrap();
    assert!(row.contains("1.000"), "{row}");
    assert!(row.ends_with("0.000"), "{row}");
    assert!(dir.path().join("reports/mock.single.char_amb.tsv").exists());
    assert!(dir.path().join("reports/mock.dialogue.char_amb.tsv").exists());

    let out = gendial(
        &[
            "regress",
            "--annotations",
            "annotations.jsonl",
            "--model",
            "all",
            "--per-variant",
            "--out",
            "reports",
        ],
        dir.path(),
    );
    assert_ok(&out, "regress");
    let table = fs::read_to_string(dir.path().join("reports/mock.regress.adverb.tsv")).unwrap();
    assert!(table.starts_with("term\tvalue\n"));
    assert!(table.contains("Intercept\t("));
    assert!(dir
        .path()
        .join("reports/mock.structure_style1_full.regress.structural.tsv")
        .exists());

    // stage isolation: wiping downstream artifacts and re-running from the
    // upstream annotations reproduces identical bytes
    let adverb_path = dir.path().join("reports/mock.adverb.tsv");
    let before = fs::read(&adverb_path).unwrap();
    fs::remove_dir_all(dir.path().join("reports")).unwrap();
    let out = gendial(
        &[
            "score",
            "--annotations",
            "annotations.jsonl",
            "--kind",
            "adverb",
            "--out",
            "reports",
        ],
        dir.path(),
    );
    assert_ok(&out, "re-score");
    assert_eq!(before, fs::read(&adverb_path).unwrap());

    let out = gendial(
        &["bundle", "--run-dir", "reports", "--out", "reports.tar"],
        dir.path(),
    );
    assert_ok(&out, "bundle");
    assert!(dir.path().join("reports.tar").exists());
}

#[test]
fn run_subcommand_with_config_and_failure_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (vocab_dir, dict_dir, lex_path) = write_inputs(dir.path());

    // produce the suite first so the mock can translate sources.txt
    let out = gendial(
        &[
            "generate",
            "--vocab-dir",
            vocab_dir.to_str().unwrap(),
            "--seed",
            "5",
            "--out",
            "suite.jsonl",
        ],
        dir.path(),
    );
    assert_ok(&out, "generate");
    let vocab = synthetic_vocabulary();
    mock_translate_file(
        &dir.path().join("sources.txt"),
        &dir.path().join("system.out.txt"),
        &vocab,
    );

    let config = serde_json::json!({
        "vocabDir": vocab_dir,
        "seed": 5,
        "balancingSeed": 3,
        "languages": ["ES"],
        "providers": [{"type": "local"}],
        "dictDir": dict_dir,
        "lexicons": {"es": lex_path},
        "outputDir": dir.path().join("run-out"),
    });
    fs::write(
        dir.path().join("config.json"),
        serde_json::to_string_pretty(&config).unwrap(),
    )
    .unwrap();

    let out = gendial(
        &[
            "run",
            "--config",
            "config.json",
            "--system-out",
            "mock=system.out.txt,es",
        ],
        dir.path(),
    );
    assert_ok(&out, "run");
    assert!(dir.path().join("run-out/manifest.json").exists());
    assert!(dir.path().join("run-out/reports/mock.adverb.tsv").exists());

    // a missing system output must fail the run (non-zero exit) while
    // keeping the generated artifacts
    let out = gendial(
        &[
            "run",
            "--config",
            "config.json",
            "--system-out",
            "ghost=missing.txt,es",
            "--out-dir",
            "run-out-2",
        ],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(dir.path().join("run-out-2/suite.jsonl").exists());
    assert!(dir.path().join("run-out-2/manifest.json").exists());
}
