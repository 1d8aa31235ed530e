//! Evaluation: sending prompts to a model client, extracting verdicts from
//! free-form reply text, persisting per-instance results, and scoring them.
//!
//! Results are appended to a JSON Lines file in dataset order, flushed in
//! chunks, so an interrupted run resumes where it stopped: already-answered
//! instances are never re-queried, and a torn final line (the one partial
//! write an interruption can leave) is repaired by truncation. Scripted
//! model clients pin latency to zero, which makes a results file a pure
//! function of dataset and provider — rerunning a finished evaluation
//! changes nothing, byte for byte.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{Seek, SeekFrom, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::{ModelClient, ModelReply, TransportStatus};
use crate::par;
use crate::puzzle::{render_prompt, yes_no, DatasetRecord, PuzzleInstance};

/// Instances are evaluated and flushed in chunks of this many.
const CHUNK: usize = 64;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("failed to {action} {path}: {message}")]
    Io {
        action: &'static str,
        path: String,
        message: String,
    },
    #[error("{path} line {line}: corrupt results line: {message}")]
    Corrupt {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path} line {line}: found results for {found} where the dataset has {expected}")]
    IdMismatch {
        path: String,
        line: usize,
        found: String,
        expected: String,
    },
    #[error("{path} holds {found} records but the dataset has only {expected} instances")]
    ExtraRecords {
        path: String,
        found: usize,
        expected: usize,
    },
    #[error("results mention {id}, which is not in the dataset")]
    UnknownId { id: String },
    #[error("more than one record for instance {id}")]
    DuplicateId { id: String },
    #[error("run {run} covers {covered} of {expected} dataset instances (missing {example})")]
    CoverageMismatch {
        run: usize,
        covered: usize,
        expected: usize,
        example: String,
    },
    #[error("no record carries a parseable verdict, so no metrics can be computed")]
    NoParseableRecords,
}

/// What a reply said, once parsed.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unparseable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Unparseable => "unparseable",
        }
    }
}

/// Extract the verdict from reply text.
///
/// The answer instruction asks models to end with `Answer: yes or no`, so
/// the parser anchors on the **last** case-insensitive `answer:` marker and
/// reads the first alphabetic token after it — tolerating punctuation,
/// newlines, and markup like `**Answer: yes.**` between and around. A reply
/// with no marker still counts when the whole trimmed text is exactly `yes`
/// or `no`. Everything else is [`Verdict::Unparseable`].
pub fn parse_answer(raw: &str) -> Verdict {
    const MARKER: &[u8] = b"answer:";
    let bytes = raw.as_bytes();
    let marker_at = (0..bytes.len().saturating_sub(MARKER.len() - 1))
        .rev()
        .find(|&i| bytes[i..i + MARKER.len()].eq_ignore_ascii_case(MARKER));
    let token: String = match marker_at {
        // the matched window is ASCII, so the byte after it is a char boundary
        Some(i) => raw[i + MARKER.len()..]
            .chars()
            .skip_while(|c| !c.is_alphabetic())
            .take_while(|c| c.is_alphabetic())
            .collect(),
        None => raw.trim().to_string(),
    };
    if token.eq_ignore_ascii_case("yes") {
        Verdict::Yes
    } else if token.eq_ignore_ascii_case("no") {
        Verdict::No
    } else {
        Verdict::Unparseable
    }
}

/// One instance's evaluation outcome: a line of the results file.
///
/// `verdict` is `null` exactly when the transport failed (no reply text to
/// parse); `correct` is `null` in the same case, and `false` for a reply
/// that came back but could not be parsed.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: String,
    #[serde(with = "yes_no")]
    pub label: bool,
    pub verdict: Option<Verdict>,
    pub correct: Option<bool>,
    pub raw_text: String,
    pub status: TransportStatus,
    pub latency_ms: u64,
    pub attempts: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// What the evaluation loop needs to know about an instance.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EvalItem {
    pub id: String,
    pub prompt: String,
    pub label: bool,
}

impl From<&DatasetRecord> for EvalItem {
    fn from(record: &DatasetRecord) -> Self {
        EvalItem {
            id: record.id.clone(),
            prompt: record.prompt.clone(),
            label: record.label,
        }
    }
}

impl From<&PuzzleInstance> for EvalItem {
    fn from(instance: &PuzzleInstance) -> Self {
        EvalItem {
            id: instance.id.clone(),
            prompt: render_prompt(instance),
            label: instance.label,
        }
    }
}

/// Combine an item with the reply its prompt drew.
pub fn evaluate_reply(item: &EvalItem, reply: &ModelReply) -> EvalRecord {
    let verdict = match reply.status {
        TransportStatus::Failed => None,
        TransportStatus::Ok => Some(parse_answer(&reply.raw_text)),
    };
    let correct = verdict.map(|v| match v {
        Verdict::Yes => item.label,
        Verdict::No => !item.label,
        Verdict::Unparseable => false,
    });
    EvalRecord {
        id: item.id.clone(),
        label: item.label,
        verdict,
        correct,
        raw_text: reply.raw_text.clone(),
        status: reply.status,
        latency_ms: reply.latency_ms,
        attempts: reply.attempts,
        error: reply.error.clone(),
    }
}

/// A finished (or resumed-and-finished) evaluation run.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RunOutcome {
    /// Every record, resumed and fresh, in dataset order.
    pub records: Vec<EvalRecord>,
    /// How many instances were actually queried this time.
    pub new_requests: usize,
}

/// Evaluate every item against the client, appending to `results_path`.
///
/// If the file already holds records they must be a prefix of `items` in
/// order (same ids); those instances are not re-queried. A torn final line
/// is truncated away and re-evaluated; corruption anywhere else is an
/// error. Queries run in parallel under the `parallel` feature, but records
/// are written in dataset order either way, so the finished file is
/// identical.
pub fn run_evaluation(
    items: &[EvalItem],
    client: &dyn ModelClient,
    results_path: &Path,
) -> Result<RunOutcome, EvalError> {
    let io_err = |action: &'static str, e: std::io::Error| EvalError::Io {
        action,
        path: results_path.display().to_string(),
        message: e.to_string(),
    };

    let resumed = if results_path.exists() {
        resume_records(results_path)?
    } else {
        Vec::new()
    };
    if resumed.len() > items.len() {
        return Err(EvalError::ExtraRecords {
            path: results_path.display().to_string(),
            found: resumed.len(),
            expected: items.len(),
        });
    }
    for (index, (record, item)) in resumed.iter().zip(items).enumerate() {
        if record.id != item.id {
            return Err(EvalError::IdMismatch {
                path: results_path.display().to_string(),
                line: index + 1,
                found: record.id.clone(),
                expected: item.id.clone(),
            });
        }
    }

    let remaining = &items[resumed.len()..];
    let new_requests = remaining.len();
    let mut records = resumed;
    if !remaining.is_empty() {
        let mut out = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(results_path)
            .map_err(|e| io_err("open", e))?;
        for chunk in remaining.chunks(CHUNK) {
            let fresh: Vec<EvalRecord> = par::map(chunk, |item| {
                evaluate_reply(item, &client.query(&item.prompt, &item.id))
            });
            for record in &fresh {
                let line =
                    serde_json::to_string(record).expect("eval records serialize without fail");
                out.write_all(line.as_bytes())
                    .and_then(|_| out.write_all(b"\n"))
                    .map_err(|e| io_err("write", e))?;
            }
            out.flush().map_err(|e| io_err("write", e))?;
            records.extend(fresh);
        }
    }
    Ok(RunOutcome {
        records,
        new_requests,
    })
}

/// Read a possibly-interrupted results file, repairing a torn tail in
/// place. Only the final line may be damaged — that is the one partial
/// write `run_evaluation`'s append-and-flush discipline can leave behind —
/// so damage anywhere else is corruption, not interruption.
fn resume_records(path: &Path) -> Result<Vec<EvalRecord>, EvalError> {
    let io_err = |action: &'static str, e: std::io::Error| EvalError::Io {
        action,
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let text = fs::read_to_string(path).map_err(|e| io_err("read", e))?;
    let ends_with_newline = text.ends_with('\n');
    let mut segments: Vec<&str> = text.split('\n').collect();
    if ends_with_newline {
        segments.pop();
    }
    let mut records = Vec::with_capacity(segments.len());
    let mut keep_bytes = 0u64;
    let mut append_newline = false;
    let mut truncate = false;
    let final_index = segments.len().wrapping_sub(1);
    for (index, segment) in segments.iter().enumerate() {
        let is_final = index == final_index;
        match serde_json::from_str::<EvalRecord>(segment) {
            Ok(record) => {
                records.push(record);
                keep_bytes += segment.len() as u64;
                if is_final && !ends_with_newline {
                    // the line itself survived, only its newline was lost
                    append_newline = true;
                } else {
                    keep_bytes += 1;
                }
            }
            Err(e) => {
                if is_final {
                    truncate = true;
                    break;
                }
                return Err(EvalError::Corrupt {
                    path: path.display().to_string(),
                    line: index + 1,
                    message: e.to_string(),
                });
            }
        }
    }
    if truncate || append_newline {
        let file = fs::OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| io_err("open", e))?;
        file.set_len(keep_bytes).map_err(|e| io_err("repair", e))?;
        if append_newline {
            let mut file = file;
            file.seek(SeekFrom::End(0))
                .map_err(|e| io_err("repair", e))?;
            file.write_all(b"\n").map_err(|e| io_err("repair", e))?;
        }
    }
    Ok(records)
}

/// Read a finished results file. Strict: any bad line is an error — an
/// interrupted run should be resumed with [`run_evaluation`], not scored.
pub fn read_results(path: &Path) -> Result<Vec<EvalRecord>, EvalError> {
    let text = fs::read_to_string(path).map_err(|e| EvalError::Io {
        action: "read",
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut records = Vec::new();
    for (index, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|e| EvalError::Corrupt {
            path: path.display().to_string(),
            line: index + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Counts of parseable verdicts against labels, plus how many records fell
/// outside the matrix.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
    /// Records whose verdict was yes or no.
    pub parsed: usize,
    /// Replies that arrived but carried no recognizable answer.
    pub unparsed: usize,
    /// Transport failures: no reply to parse at all.
    pub failed: usize,
}

impl ConfusionMatrix {
    pub fn from_records(records: &[EvalRecord]) -> Self {
        let mut matrix = ConfusionMatrix::default();
        for record in records {
            match record.verdict {
                Some(Verdict::Yes) => {
                    matrix.parsed += 1;
                    if record.label {
                        matrix.true_pos += 1;
                    } else {
                        matrix.false_pos += 1;
                    }
                }
                Some(Verdict::No) => {
                    matrix.parsed += 1;
                    if record.label {
                        matrix.false_neg += 1;
                    } else {
                        matrix.true_neg += 1;
                    }
                }
                Some(Verdict::Unparseable) => matrix.unparsed += 1,
                None => matrix.failed += 1,
            }
        }
        matrix
    }
}

/// Scores over the parsed records, all scaled to percentage points:
/// accuracy, precision, recall, and F1 lie in [0, 100], the Matthews
/// correlation in [-100, 100]. Any score whose denominator is zero is
/// reported as 0.
#[derive(Copy, Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub mcc: f64,
}

fn ratio(numerator: f64, denominator: f64) -> f64 {
    if denominator == 0.0 {
        0.0
    } else {
        numerator / denominator
    }
}

/// Score a confusion matrix. Errors when nothing was parsed — a run where
/// every reply failed or defied parsing has no meaningful score.
pub fn compute_metrics(matrix: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    if matrix.parsed == 0 {
        return Err(EvalError::NoParseableRecords);
    }
    let tp = matrix.true_pos as f64;
    let fp = matrix.false_pos as f64;
    let tn = matrix.true_neg as f64;
    let fal_neg = matrix.false_neg as f64;
    let accuracy = ratio(tp + tn, matrix.parsed as f64);
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fal_neg);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    let mcc_denominator = ((tp + fp) * (tp + fal_neg) * (tn + fp) * (tn + fal_neg)).sqrt();
    let mcc = ratio(tp * tn - fp * fal_neg, mcc_denominator);
    Ok(Metrics {
        accuracy: 100.0 * accuracy,
        precision: 100.0 * precision,
        recall: 100.0 * recall,
        f1: 100.0 * f1,
        mcc: 100.0 * mcc,
    })
}

/// Grouping axes for per-slice scores.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum BreakdownKey {
    NArgs,
    NumPaths,
    Label,
}

impl BreakdownKey {
    pub fn as_str(&self) -> &'static str {
        match self {
            BreakdownKey::NArgs => "n_args",
            BreakdownKey::NumPaths => "num_paths",
            BreakdownKey::Label => "label",
        }
    }
}

impl fmt::Display for BreakdownKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BreakdownKey {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        match text {
            "n_args" => Ok(BreakdownKey::NArgs),
            "num_paths" => Ok(BreakdownKey::NumPaths),
            "label" => Ok(BreakdownKey::Label),
            other => Err(format!(
                "breakdown key must be \"n_args\", \"num_paths\", or \"label\", got {other:?}"
            )),
        }
    }
}

/// One row of a per-slice score table.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub key: String,
    pub parsed: usize,
    pub percent_correct: f64,
}

/// A breakdown row further split by ground-truth label.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct LabelledBreakdownRow {
    pub key: String,
    pub label: String,
    pub parsed: usize,
    pub percent_correct: f64,
}

fn dataset_index<'a>(
    dataset: &'a [DatasetRecord],
) -> Result<HashMap<&'a str, &'a DatasetRecord>, EvalError> {
    let mut index = HashMap::with_capacity(dataset.len());
    for record in dataset {
        if index.insert(record.id.as_str(), record).is_some() {
            return Err(EvalError::DuplicateId {
                id: record.id.clone(),
            });
        }
    }
    Ok(index)
}

fn group_key(data: &DatasetRecord, key: BreakdownKey) -> (u64, String) {
    match key {
        BreakdownKey::NArgs => (data.n_args as u64, data.n_args.to_string()),
        BreakdownKey::NumPaths => (data.num_paths as u64, data.num_paths.to_string()),
        BreakdownKey::Label => (
            data.label as u64,
            if data.label { "yes" } else { "no" }.to_string(),
        ),
    }
}

fn percent(correct: usize, parsed: usize) -> f64 {
    if parsed == 0 {
        0.0
    } else {
        100.0 * correct as f64 / parsed as f64
    }
}

#[derive(Default)]
struct GroupAcc {
    parsed: usize,
    correct: usize,
}

impl GroupAcc {
    fn add(&mut self, record: &EvalRecord) {
        if matches!(record.verdict, Some(Verdict::Yes) | Some(Verdict::No)) {
            self.parsed += 1;
            if record.correct == Some(true) {
                self.correct += 1;
            }
        }
    }
}

/// Percent-correct per value of the grouping key, rows in ascending key
/// order (numeric keys sort numerically). Every evaluated record must
/// resolve to a dataset instance.
pub fn breakdown(
    records: &[EvalRecord],
    dataset: &[DatasetRecord],
    key: BreakdownKey,
) -> Result<Vec<BreakdownRow>, EvalError> {
    let index = dataset_index(dataset)?;
    let mut groups: BTreeMap<(u64, String), GroupAcc> = BTreeMap::new();
    for record in records {
        let data = index
            .get(record.id.as_str())
            .ok_or_else(|| EvalError::UnknownId {
                id: record.id.clone(),
            })?;
        groups.entry(group_key(data, key)).or_default().add(record);
    }
    Ok(groups
        .into_iter()
        .map(|((_, key), acc)| BreakdownRow {
            key,
            parsed: acc.parsed,
            percent_correct: percent(acc.correct, acc.parsed),
        })
        .collect())
}

/// Like [`breakdown`], but each key slice is further split by ground-truth
/// label ("no" rows before "yes" within a key).
pub fn breakdown_split_by_label(
    records: &[EvalRecord],
    dataset: &[DatasetRecord],
    key: BreakdownKey,
) -> Result<Vec<LabelledBreakdownRow>, EvalError> {
    let index = dataset_index(dataset)?;
    let mut groups: BTreeMap<((u64, String), bool), GroupAcc> = BTreeMap::new();
    for record in records {
        let data = index
            .get(record.id.as_str())
            .ok_or_else(|| EvalError::UnknownId {
                id: record.id.clone(),
            })?;
        groups
            .entry((group_key(data, key), data.label))
            .or_default()
            .add(record);
    }
    Ok(groups
        .into_iter()
        .map(|(((_, key), label), acc)| LabelledBreakdownRow {
            key,
            label: if label { "yes" } else { "no" }.to_string(),
            parsed: acc.parsed,
            percent_correct: percent(acc.correct, acc.parsed),
        })
        .collect())
}

/// The ids at least one run got wrong: answered incorrectly, failed to
/// parse, or failed in transport. Every run must cover the dataset exactly
/// — a hard subset drawn from partial runs would silently understate
/// difficulty.
pub fn select_hard_subset(
    runs: &[Vec<EvalRecord>],
    dataset: &[DatasetRecord],
) -> Result<BTreeSet<String>, EvalError> {
    let index = dataset_index(dataset)?;
    let mut hard = BTreeSet::new();
    for (run_index, run) in runs.iter().enumerate() {
        let mut seen = HashSet::with_capacity(run.len());
        for record in run {
            if !index.contains_key(record.id.as_str()) {
                return Err(EvalError::UnknownId {
                    id: record.id.clone(),
                });
            }
            if !seen.insert(record.id.as_str()) {
                return Err(EvalError::DuplicateId {
                    id: record.id.clone(),
                });
            }
            if record.correct != Some(true) {
                hard.insert(record.id.clone());
            }
        }
        if seen.len() != dataset.len() {
            let example = dataset
                .iter()
                .find(|d| !seen.contains(d.id.as_str()))
                .expect("seen is smaller than the dataset")
                .id
                .clone();
            return Err(EvalError::CoverageMismatch {
                run: run_index + 1,
                covered: seen.len(),
                expected: dataset.len(),
                example,
            });
        }
    }
    Ok(hard)
}
