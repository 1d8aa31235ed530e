//! The evaluation loop end to end on disk: full runs, resume-after-
//! interruption in every shape the writer can leave a file, and the
//! determinism promise that a resumed run finishes byte-identical to an
//! uninterrupted one.

use std::fs;
use std::path::Path;

use argbench_core::{
    build_client, compute_metrics, generate_dataset, run_evaluation, ConfusionMatrix, DatasetSpec,
    EvalError, EvalItem, Family, ModelConfig, Ontology,
};

fn items_for(spec: DatasetSpec) -> Vec<EvalItem> {
    generate_dataset(&spec, &Ontology::shipped())
        .unwrap()
        .iter()
        .map(EvalItem::from)
        .collect()
}

fn hundred_linear_items() -> Vec<EvalItem> {
    items_for(DatasetSpec {
        family: Family::Linear,
        n_min: 1,
        n_max: 20,
        variations: 5,
        master_seed: 7,
        shuffled: true,
    })
}

fn full_run_bytes(items: &[EvalItem], dir: &Path) -> Vec<u8> {
    let path = dir.join("reference.jsonl");
    let client = build_client(&ModelConfig::oracle()).unwrap();
    let outcome = run_evaluation(items, client.as_ref(), &path).unwrap();
    assert_eq!(outcome.new_requests, items.len());
    fs::read(&path).unwrap()
}

#[test]
fn an_oracle_run_is_perfect_and_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("results.jsonl");
    let items = hundred_linear_items();
    let client = build_client(&ModelConfig::oracle()).unwrap();

    let first = run_evaluation(&items, client.as_ref(), &path).unwrap();
    assert_eq!(first.new_requests, 100);
    assert_eq!(first.records.len(), 100);
    assert!(first.records.iter().all(|r| r.correct == Some(true)));
    let metrics = compute_metrics(&ConfusionMatrix::from_records(&first.records)).unwrap();
    assert!((metrics.accuracy - 100.0).abs() < 1e-9);

    let bytes = fs::read(&path).unwrap();
    let again = run_evaluation(&items, client.as_ref(), &path).unwrap();
    assert_eq!(again.new_requests, 0, "a finished run must not re-query");
    assert_eq!(again.records, first.records);
    assert_eq!(
        fs::read(&path).unwrap(),
        bytes,
        "idempotent down to the byte"
    );
}

#[test]
fn resuming_a_prefix_finishes_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let items = hundred_linear_items();
    let reference = full_run_bytes(&items, dir.path());

    // keep only the first 30 lines, as if the process died mid-run
    let text = String::from_utf8(reference.clone()).unwrap();
    let prefix: String = text.lines().take(30).map(|l| format!("{l}\n")).collect();
    let path = dir.path().join("resumed.jsonl");
    fs::write(&path, prefix).unwrap();

    let client = build_client(&ModelConfig::oracle()).unwrap();
    let outcome = run_evaluation(&items, client.as_ref(), &path).unwrap();
    assert_eq!(outcome.new_requests, 70);
    assert_eq!(outcome.records.len(), 100);
    assert_eq!(fs::read(&path).unwrap(), reference);
}

#[test]
fn a_torn_final_line_is_truncated_and_redone() {
    let dir = tempfile::tempdir().unwrap();
    let items = hundred_linear_items();
    let reference = full_run_bytes(&items, dir.path());

    let text = String::from_utf8(reference.clone()).unwrap();
    let mut torn: String = text.lines().take(50).map(|l| format!("{l}\n")).collect();
    let line_51 = text.lines().nth(50).unwrap();
    torn.push_str(&line_51[..line_51.len() / 2]); // half a record, no newline
    let path = dir.path().join("torn.jsonl");
    fs::write(&path, torn).unwrap();

    let client = build_client(&ModelConfig::oracle()).unwrap();
    let outcome = run_evaluation(&items, client.as_ref(), &path).unwrap();
    assert_eq!(outcome.new_requests, 50, "the torn line is re-evaluated");
    assert_eq!(fs::read(&path).unwrap(), reference);
}

#[test]
fn a_lost_trailing_newline_is_restored_without_requerying() {
    let dir = tempfile::tempdir().unwrap();
    let items = hundred_linear_items();
    let reference = full_run_bytes(&items, dir.path());

    let mut clipped = reference.clone();
    assert_eq!(clipped.pop(), Some(b'\n'));
    let path = dir.path().join("clipped.jsonl");
    fs::write(&path, &clipped).unwrap();

    let client = build_client(&ModelConfig::oracle()).unwrap();
    let outcome = run_evaluation(&items, client.as_ref(), &path).unwrap();
    assert_eq!(
        outcome.new_requests, 0,
        "the final record itself was intact"
    );
    assert_eq!(fs::read(&path).unwrap(), reference);
}

#[test]
fn damage_before_the_final_line_is_an_error_not_a_repair() {
    let dir = tempfile::tempdir().unwrap();
    let items = hundred_linear_items();
    let reference = full_run_bytes(&items, dir.path());

    let text = String::from_utf8(reference).unwrap();
    let mangled: String = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 2 {
                "oops, a cosmic ray\n".to_string()
            } else {
                format!("{l}\n")
            }
        })
        .collect();
    let path = dir.path().join("mangled.jsonl");
    fs::write(&path, &mangled).unwrap();

    let client = build_client(&ModelConfig::oracle()).unwrap();
    let error = run_evaluation(&items, client.as_ref(), &path).unwrap_err();
    assert!(
        matches!(error, EvalError::Corrupt { line: 3, .. }),
        "got {error:?}"
    );
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        mangled,
        "a corrupt file must be left untouched for inspection"
    );
}

#[test]
fn constant_baselines_score_as_the_parity_structure_dictates() {
    let dir = tempfile::tempdir().unwrap();
    let items = items_for(DatasetSpec {
        family: Family::Linear,
        n_min: 1,
        n_max: 25,
        variations: 4,
        master_seed: 3,
        shuffled: false,
    });
    let no_client = build_client(&ModelConfig::always_no()).unwrap();
    let path = dir.path().join("always_no.jsonl");
    let outcome = run_evaluation(&items, no_client.as_ref(), &path).unwrap();
    let matrix = ConfusionMatrix::from_records(&outcome.records);
    // 13 odd chain lengths are yes, 12 even are no, times 4 variations
    assert_eq!(matrix.true_neg, 48);
    assert_eq!(matrix.false_neg, 52);
    assert_eq!(matrix.true_pos + matrix.false_pos, 0);
    let metrics = compute_metrics(&matrix).unwrap();
    assert!((metrics.accuracy - 48.0).abs() < 1e-9);
    assert_eq!(metrics.precision, 0.0);
    assert_eq!(metrics.recall, 0.0);
    assert_eq!(metrics.f1, 0.0);
    assert_eq!(metrics.mcc, 0.0);
}

#[test]
fn fixture_gaps_surface_as_failed_records_not_errors() {
    let dir = tempfile::tempdir().unwrap();
    let items = items_for(DatasetSpec {
        family: Family::Linear,
        n_min: 1,
        n_max: 3,
        variations: 1,
        master_seed: 0,
        shuffled: false,
    });
    let fixtures_path = dir.path().join("replies.jsonl");
    // replies for the first two instances only
    let fixtures: String = items
        .iter()
        .take(2)
        .map(|item| {
            serde_json::json!({"instance_id": item.id, "raw_text": "Answer: yes"}).to_string()
                + "\n"
        })
        .collect();
    fs::write(&fixtures_path, fixtures).unwrap();
    let client = build_client(&ModelConfig::fixtures(fixtures_path.display().to_string())).unwrap();
    let path = dir.path().join("results.jsonl");
    let outcome = run_evaluation(&items, client.as_ref(), &path).unwrap();
    let matrix = ConfusionMatrix::from_records(&outcome.records);
    assert_eq!(matrix.failed, 1);
    assert_eq!(matrix.parsed, 2);
    let failed = &outcome.records[2];
    assert_eq!(failed.verdict, None);
    assert_eq!(failed.correct, None);
    assert!(failed.error.as_ref().unwrap().contains(&items[2].id));
}
