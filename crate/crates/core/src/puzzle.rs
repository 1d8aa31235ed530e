//! Witness puzzles: binding graphs to names and statements, rendering the
//! prompt text, shuffling presentation, re-parsing prompts, and assembling
//! labeled datasets.
//!
//! A puzzle presents one witness per argument. The root witness asserts the
//! statement; every other witness accuses the witness of the argument they
//! attack of lying. The prompt template is fixed down to the byte — datasets
//! promise exact regenerability — and [`reparse_prompt`] inverts it, which
//! both verifies the rendering grammar round-trips and powers the oracle
//! model client.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{enumerate_topologies, ArgumentId, AttackGraph, GraphError, Topology};
use crate::ontology::Ontology;
use crate::par;
use crate::seeded::{derive_seed, SeedStream, PURPOSE_SAMPLE, PURPOSE_SHUFFLE};
use crate::semantics::root_accepted;

/// Version stamp written into every dataset line; readers reject anything
/// else.
pub const SCHEMA_VERSION: u32 = 1;

const HEADER: &str = "The following is a reasoning puzzle. Witnesses should be believed unless there is testimony that they are lying. Now consider the following facts:";
const INSTRUCTION: &str = "End your answer with: \"Answer: yes or no\".";
const QUESTION_PREFIX: &str = "Question: should it be believed that ";
const FACT_PREFIX: &str = "Witness ";
const SAYS_SEP: &str = " says that ";
const ACCUSE_SEP: &str = " says that witness ";
const ACCUSE_SUFFIX: &str = " is lying.";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PuzzleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("the ontology has {available} names but the topology needs {needed}")]
    NotEnoughNames { needed: usize, available: usize },
    #[error("expected {needed} witness names, got {got}")]
    WrongNameCount { needed: usize, got: usize },
    #[error("witness name {name:?} is bound to more than one argument")]
    DuplicateNameBinding { name: String },
    #[error("variations must be at least 1")]
    ZeroVariations,
}

/// One concrete puzzle: a benchmark graph with witnesses bound to arguments,
/// a statement, a presentation order for the fact lines, and the ground-truth
/// label.
///
/// Fields are public for test construction; instances produced by
/// [`sample_instance`] / [`generate_dataset`] always satisfy: `witness_names`
/// is injective and indexed by argument id, `presentation_order` is a
/// permutation of all ids (ascending when `shuffled` is false), and `label`
/// equals grounded acceptance of the root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PuzzleInstance {
    pub id: String,
    pub topology: Topology,
    pub graph: AttackGraph,
    pub witness_names: Vec<String>,
    pub statement: String,
    pub presentation_order: Vec<ArgumentId>,
    pub label: bool,
    pub seed: u64,
    pub shuffled: bool,
}

impl PuzzleInstance {
    /// Build an instance from explicit bindings, with canonical presentation
    /// and seed 0. This is the entry point for fixtures and golden tests;
    /// dataset generation goes through [`sample_instance`].
    pub fn with_bindings(
        topology: Topology,
        witness_names: Vec<String>,
        statement: String,
    ) -> Result<Self, PuzzleError> {
        let graph = topology.to_graph()?;
        if witness_names.len() != graph.n() {
            return Err(PuzzleError::WrongNameCount {
                needed: graph.n(),
                got: witness_names.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &witness_names {
            if !seen.insert(name) {
                return Err(PuzzleError::DuplicateNameBinding { name: name.clone() });
            }
        }
        let label = root_accepted(&graph);
        let presentation_order = graph.arguments().collect();
        Ok(PuzzleInstance {
            id: format!("{topology}:manual"),
            topology,
            graph,
            witness_names,
            statement,
            presentation_order,
            label,
            seed: 0,
            shuffled: false,
        })
    }

    pub fn name_of(&self, id: ArgumentId) -> &str {
        &self.witness_names[id.0]
    }
}

/// Deterministically bind a topology to ontology elements: one uniformly
/// drawn statement and distinct uniformly drawn names, assigned to arguments
/// in id order. The same (topology, ontology, seed) triple always yields the
/// identical instance.
pub fn sample_instance(
    topology: &Topology,
    ontology: &Ontology,
    seed: u64,
) -> Result<PuzzleInstance, PuzzleError> {
    let graph = topology.to_graph()?;
    let n = graph.n();
    if ontology.names().len() < n {
        return Err(PuzzleError::NotEnoughNames {
            needed: n,
            available: ontology.names().len(),
        });
    }
    let mut stream = SeedStream::new(seed);
    let statement =
        ontology.statements()[stream.below(ontology.statements().len() as u64) as usize].clone();
    let witness_names: Vec<String> = stream
        .distinct_indices(n, ontology.names().len())
        .into_iter()
        .map(|i| ontology.names()[i].clone())
        .collect();
    let label = root_accepted(&graph);
    let presentation_order = graph.arguments().collect();
    Ok(PuzzleInstance {
        id: format!("{topology}:s{seed:016x}"),
        topology: topology.clone(),
        graph,
        witness_names,
        statement,
        presentation_order,
        label,
        seed,
        shuffled: false,
    })
}

/// Render the exact prompt text: header, blank line, one fact line per
/// argument in presentation order, blank line, question, answer instruction.
/// LF separators, no trailing whitespace.
pub fn render_prompt(instance: &PuzzleInstance) -> String {
    let mut lines = Vec::with_capacity(instance.graph.n() + 5);
    lines.push(HEADER.to_string());
    lines.push(String::new());
    for &arg in &instance.presentation_order {
        lines.push(fact_line(instance, arg));
    }
    lines.push(String::new());
    lines.push(format!("{QUESTION_PREFIX}{}?", instance.statement));
    lines.push(INSTRUCTION.to_string());
    lines.join("\n")
}

fn fact_line(instance: &PuzzleInstance, arg: ArgumentId) -> String {
    let name = instance.name_of(arg);
    if arg.0 == 0 {
        format!("{FACT_PREFIX}{name}{SAYS_SEP}{}.", instance.statement)
    } else {
        let target = instance
            .graph
            .sole_target(arg)
            .expect("benchmark instances give every non-root argument one target");
        format!(
            "{FACT_PREFIX}{name}{ACCUSE_SEP}{}{ACCUSE_SUFFIX}",
            instance.name_of(target)
        )
    }
}

/// Copy of the instance with a uniformly re-drawn presentation order (the
/// identity permutation is as likely as any other). Graph, bindings, and
/// label are untouched.
pub fn shuffle_presentation(instance: &PuzzleInstance, seed: u64) -> PuzzleInstance {
    let mut shuffled = instance.clone();
    SeedStream::new(seed).shuffle(&mut shuffled.presentation_order);
    shuffled.shuffled = true;
    shuffled
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptParseError {
    #[error("line {line}: expected the puzzle header")]
    BadHeader { line: usize },
    #[error("line {line}: expected a blank line")]
    ExpectedBlank { line: usize },
    #[error("line {line}: malformed fact line {text:?}")]
    BadFactLine { line: usize, text: String },
    #[error("line {line}: witness {name:?} testifies more than once")]
    DuplicateWitness { line: usize, name: String },
    #[error("line {line}: witness {name:?} is accused but never testifies")]
    UnknownWitness { line: usize, name: String },
    #[error("expected exactly one statement line, found {found}")]
    StatementCount { found: usize },
    #[error("line {line}: expected the question line")]
    BadQuestion { line: usize },
    #[error("line {line}: the question does not repeat the witness statement")]
    QuestionMismatch { line: usize },
    #[error("line {line}: expected the answer instruction line")]
    BadInstruction { line: usize },
    #[error("line {line}: unexpected content after the instruction line")]
    TrailingContent { line: usize },
    #[error("prompt ends at line {line}, expected {expected}")]
    Truncated { line: usize, expected: &'static str },
}

/// A prompt read back into its formal parts. Argument ids are canonical:
/// the statement-asserting witness is id 0 and the remaining witnesses are
/// numbered in order of appearance, so `graph` is directly usable with the
/// semantics engine regardless of how the prompt was shuffled.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ReparsedPrompt {
    pub graph: AttackGraph,
    pub names: Vec<String>,
    pub statement: String,
}

impl ReparsedPrompt {
    /// True when this parse reproduces the instance: same statement, same
    /// name set, and the same attack structure under the correspondence that
    /// matches witnesses by name.
    pub fn matches_instance(&self, instance: &PuzzleInstance) -> bool {
        if self.statement != instance.statement {
            return false;
        }
        if self.names.len() != instance.witness_names.len() {
            return false;
        }
        if self.names[0] != instance.witness_names[0] {
            return false;
        }
        let to_reparsed: HashMap<&str, ArgumentId> = self
            .names
            .iter()
            .enumerate()
            .map(|(i, name)| (name.as_str(), ArgumentId(i)))
            .collect();
        if instance
            .witness_names
            .iter()
            .any(|name| !to_reparsed.contains_key(name.as_str()))
        {
            return false;
        }
        if self.graph.edge_count() != instance.graph.edge_count() {
            return false;
        }
        instance.graph.edges().all(|(attacker, target)| {
            let a = to_reparsed[instance.name_of(attacker)];
            let t = to_reparsed[instance.name_of(target)];
            self.graph.has_edge(a, t)
        })
    }
}

enum FactContent {
    Statement(String),
    Accusation { target: String },
}

struct Fact {
    line: usize,
    speaker: String,
    content: FactContent,
}

/// Invert [`render_prompt`]: recover the attack graph, the name binding, and
/// the statement from prompt text. Strict by design — the grammar is the
/// dataset contract, so any deviation is an error, reported with its line
/// number.
pub fn reparse_prompt(prompt: &str) -> Result<ReparsedPrompt, PromptParseError> {
    let lines: Vec<&str> = prompt.split('\n').collect();
    let line_no = |index: usize| index + 1;

    let mut index = 0;
    let need = |idx: &mut usize, expected: &'static str| -> Result<&str, PromptParseError> {
        let line = lines
            .get(*idx)
            .copied()
            .ok_or(PromptParseError::Truncated {
                line: line_no(*idx),
                expected,
            })?;
        *idx += 1;
        Ok(line)
    };

    if need(&mut index, "the puzzle header")? != HEADER {
        return Err(PromptParseError::BadHeader { line: 1 });
    }
    if !need(&mut index, "a blank line")?.is_empty() {
        return Err(PromptParseError::ExpectedBlank { line: 2 });
    }

    let mut facts: Vec<Fact> = Vec::new();
    loop {
        let at = index;
        let line = need(&mut index, "a fact line or a blank line")?;
        if line.is_empty() {
            break;
        }
        facts.push(parse_fact_line(line, line_no(at))?);
    }

    let mut seen = HashSet::new();
    for fact in &facts {
        if !seen.insert(fact.speaker.clone()) {
            return Err(PromptParseError::DuplicateWitness {
                line: fact.line,
                name: fact.speaker.clone(),
            });
        }
    }

    let statement_facts: Vec<&Fact> = facts
        .iter()
        .filter(|f| matches!(f.content, FactContent::Statement(_)))
        .collect();
    if statement_facts.len() != 1 {
        return Err(PromptParseError::StatementCount {
            found: statement_facts.len(),
        });
    }
    let root = statement_facts[0];
    let statement = match &root.content {
        FactContent::Statement(s) => s.clone(),
        FactContent::Accusation { .. } => unreachable!("filtered to statements"),
    };

    // canonical ids: the root witness is 0, the rest keep appearance order
    let mut names: Vec<String> = vec![root.speaker.clone()];
    names.extend(
        facts
            .iter()
            .filter(|f| f.speaker != root.speaker)
            .map(|f| f.speaker.clone()),
    );
    let id_of: HashMap<&str, ArgumentId> = names
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), ArgumentId(i)))
        .collect();

    let mut edges = Vec::new();
    for fact in &facts {
        if let FactContent::Accusation { target } = &fact.content {
            let target_id =
                *id_of
                    .get(target.as_str())
                    .ok_or_else(|| PromptParseError::UnknownWitness {
                        line: fact.line,
                        name: target.clone(),
                    })?;
            edges.push((id_of[fact.speaker.as_str()], target_id));
        }
    }

    let at = index;
    let question = need(&mut index, "the question line")?;
    let questioned = question
        .strip_prefix(QUESTION_PREFIX)
        .and_then(|rest| rest.strip_suffix('?'))
        .ok_or(PromptParseError::BadQuestion { line: line_no(at) })?;
    if questioned != statement {
        return Err(PromptParseError::QuestionMismatch { line: line_no(at) });
    }

    let at = index;
    if need(&mut index, "the answer instruction line")? != INSTRUCTION {
        return Err(PromptParseError::BadInstruction { line: line_no(at) });
    }
    if index < lines.len() {
        return Err(PromptParseError::TrailingContent {
            line: line_no(index),
        });
    }

    let graph =
        AttackGraph::new(names.len(), edges).expect("ids were assigned within 0..names.len()");
    Ok(ReparsedPrompt {
        graph,
        names,
        statement,
    })
}

fn parse_fact_line(line: &str, line_no: usize) -> Result<Fact, PromptParseError> {
    let malformed = || PromptParseError::BadFactLine {
        line: line_no,
        text: line.to_string(),
    };
    let rest = line.strip_prefix(FACT_PREFIX).ok_or_else(malformed)?;
    // an accusation ends with the fixed suffix and names its target after
    // the first accusation separator; anything else is the statement form
    if let Some(body) = rest.strip_suffix(ACCUSE_SUFFIX) {
        if let Some(sep) = body.find(ACCUSE_SEP) {
            let speaker = &body[..sep];
            let target = &body[sep + ACCUSE_SEP.len()..];
            if speaker.is_empty() || target.is_empty() {
                return Err(malformed());
            }
            return Ok(Fact {
                line: line_no,
                speaker: speaker.to_string(),
                content: FactContent::Accusation {
                    target: target.to_string(),
                },
            });
        }
    }
    let sep = rest.find(SAYS_SEP).ok_or_else(malformed)?;
    let speaker = &rest[..sep];
    let statement = rest[sep + SAYS_SEP.len()..]
        .strip_suffix('.')
        .ok_or_else(malformed)?;
    if speaker.is_empty() || statement.is_empty() {
        return Err(malformed());
    }
    Ok(Fact {
        line: line_no,
        speaker: speaker.to_string(),
        content: FactContent::Statement(statement.to_string()),
    })
}

/// The two benchmark families.
#[derive(Copy, Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Linear,
    Nonlinear,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Linear => "linear",
            Family::Nonlinear => "nonlinear",
        })
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        match text {
            "linear" => Ok(Family::Linear),
            "nonlinear" => Ok(Family::Nonlinear),
            other => Err(format!(
                "family must be \"linear\" or \"nonlinear\", got {other:?}"
            )),
        }
    }
}

/// Parameters of one generated dataset.
#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub struct DatasetSpec {
    pub family: Family,
    pub n_min: usize,
    pub n_max: usize,
    pub variations: usize,
    pub master_seed: u64,
    pub shuffled: bool,
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<(), PuzzleError> {
        if self.n_min == 0 {
            return Err(GraphError::ZeroCount.into());
        }
        if self.n_min > self.n_max {
            return Err(GraphError::InvertedRange {
                n_min: self.n_min,
                n_max: self.n_max,
            }
            .into());
        }
        if self.variations == 0 {
            return Err(PuzzleError::ZeroVariations);
        }
        Ok(())
    }

    /// The topology inventory this spec spans, in dataset order: one chain
    /// per argument count for the linear family, every star shape (one per
    /// integer partition of n−1) for the non-linear family.
    pub fn topologies(&self) -> Result<Vec<Topology>, PuzzleError> {
        self.validate()?;
        Ok(match self.family {
            Family::Linear => (self.n_min..=self.n_max).map(Topology::linear).collect(),
            Family::Nonlinear => enumerate_topologies(self.n_min, self.n_max)?,
        })
    }
}

/// Generate the full dataset for a spec: `variations` instances per
/// topology, topology-major order, each sampled with a seed derived from
/// (master seed, topology index, variation index). With `spec.shuffled`,
/// every instance's presentation order is re-drawn with a separately derived
/// seed. Ids read `<topology>:v<variation>`, plus `:sh` when shuffled.
///
/// Runs in parallel under the `parallel` feature; output order and content
/// are identical either way.
pub fn generate_dataset(
    spec: &DatasetSpec,
    ontology: &Ontology,
) -> Result<Vec<PuzzleInstance>, PuzzleError> {
    let (topologies, coords) = dataset_coords(spec)?;
    par::try_map(&coords, |&(t, v)| {
        build_instance(spec, ontology, &topologies, t, v)
    })
}

/// Sequential variant of [`generate_dataset`] with identical output; the
/// baseline for the generation benchmarks.
pub fn generate_dataset_seq(
    spec: &DatasetSpec,
    ontology: &Ontology,
) -> Result<Vec<PuzzleInstance>, PuzzleError> {
    let (topologies, coords) = dataset_coords(spec)?;
    par::try_map_seq(&coords, |&(t, v)| {
        build_instance(spec, ontology, &topologies, t, v)
    })
}

fn dataset_coords(spec: &DatasetSpec) -> Result<(Vec<Topology>, Vec<(usize, usize)>), PuzzleError> {
    let topologies = spec.topologies()?;
    let coords = (0..topologies.len())
        .flat_map(|t| (0..spec.variations).map(move |v| (t, v)))
        .collect();
    Ok((topologies, coords))
}

fn build_instance(
    spec: &DatasetSpec,
    ontology: &Ontology,
    topologies: &[Topology],
    t: usize,
    v: usize,
) -> Result<PuzzleInstance, PuzzleError> {
    let topology = &topologies[t];
    let sample_seed = derive_seed(spec.master_seed, t as u64, v as u64, PURPOSE_SAMPLE);
    let mut instance = sample_instance(topology, ontology, sample_seed)?;
    if spec.shuffled {
        let shuffle_seed = derive_seed(spec.master_seed, t as u64, v as u64, PURPOSE_SHUFFLE);
        instance = shuffle_presentation(&instance, shuffle_seed);
    }
    instance.id = if spec.shuffled {
        format!("{topology}:v{v}:sh")
    } else {
        format!("{topology}:v{v}")
    };
    Ok(instance)
}

/// (De)serialize a boolean label as the strings "yes"/"no".
pub(crate) mod yes_no {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &bool, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(if *value { "yes" } else { "no" })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<bool, D::Error> {
        match String::deserialize(de)?.as_str() {
            "yes" => Ok(true),
            "no" => Ok(false),
            other => Err(serde::de::Error::custom(format!(
                "label must be \"yes\" or \"no\", got {other:?}"
            ))),
        }
    }
}

/// One dataset line: everything needed to evaluate, score, and regenerate an
/// instance.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub schema_version: u32,
    pub id: String,
    pub family: Family,
    pub topology: String,
    pub n_args: usize,
    pub num_paths: usize,
    pub path_lengths: Vec<usize>,
    pub names: Vec<String>,
    pub statement: String,
    pub presentation_order: Vec<usize>,
    pub shuffled: bool,
    #[serde(with = "yes_no")]
    pub label: bool,
    pub seed: u64,
    pub prompt: String,
}

impl DatasetRecord {
    pub fn from_instance(instance: &PuzzleInstance) -> Self {
        let family = match instance.topology {
            Topology::Linear { .. } => Family::Linear,
            Topology::Star { .. } => Family::Nonlinear,
        };
        DatasetRecord {
            schema_version: SCHEMA_VERSION,
            id: instance.id.clone(),
            family,
            topology: instance.topology.to_string(),
            n_args: instance.topology.n_args(),
            num_paths: instance.topology.num_paths(),
            path_lengths: instance.topology.path_lengths(),
            names: instance.witness_names.clone(),
            statement: instance.statement.clone(),
            presentation_order: instance.presentation_order.iter().map(|id| id.0).collect(),
            shuffled: instance.shuffled,
            label: instance.label,
            seed: instance.seed,
            prompt: render_prompt(instance),
        }
    }
}

/// Render every instance into its dataset line (parallel under the
/// `parallel` feature).
pub fn dataset_records(instances: &[PuzzleInstance]) -> Vec<DatasetRecord> {
    par::map(instances, DatasetRecord::from_instance)
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to {action} {path}: {message}")]
    Io {
        action: &'static str,
        path: String,
        message: String,
    },
    #[error("{path} line {line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path} line {line}: schema version {found} is not supported (expected {expected})")]
    SchemaVersion {
        path: String,
        line: usize,
        found: u32,
        expected: u32,
    },
}

/// Write a dataset as JSON Lines, one record per line, in the given order.
pub fn write_dataset(path: &Path, records: &[DatasetRecord]) -> Result<(), DataError> {
    let io_err = |action: &'static str, e: std::io::Error| DataError::Io {
        action,
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let file = fs::File::create(path).map_err(|e| io_err("create", e))?;
    let mut out = std::io::BufWriter::new(file);
    for record in records {
        let line =
            serde_json::to_string(record).expect("dataset records serialize to JSON without fail");
        out.write_all(line.as_bytes())
            .and_then(|_| out.write_all(b"\n"))
            .map_err(|e| io_err("write", e))?;
    }
    out.flush().map_err(|e| io_err("write", e))
}

/// Read a JSON Lines dataset, rejecting unknown schema versions and any
/// malformed line.
pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>, DataError> {
    let file = fs::File::open(path).map_err(|e| DataError::Io {
        action: "open",
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| DataError::Io {
            action: "read",
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if line.is_empty() {
            continue;
        }
        let record: DatasetRecord =
            serde_json::from_str(&line).map_err(|e| DataError::Malformed {
                path: path.display().to_string(),
                line: index + 1,
                message: e.to_string(),
            })?;
        if record.schema_version != SCHEMA_VERSION {
            return Err(DataError::SchemaVersion {
                path: path.display().to_string(),
                line: index + 1,
                found: record.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_WITNESS_GOLDEN: &str = "The following is a reasoning puzzle. Witnesses should be believed unless there is testimony that they are lying. Now consider the following facts:\n\nWitness Alice says that the train is late.\nWitness Bob says that witness Alice is lying.\n\nQuestion: should it be believed that the train is late?\nEnd your answer with: \"Answer: yes or no\".";

    const FOUR_WITNESS_GOLDEN: &str = "The following is a reasoning puzzle. Witnesses should be believed unless there is testimony that they are lying. Now consider the following facts:\n\nWitness Alice says that the train is late.\nWitness Bob says that witness Alice is lying.\nWitness Charlie says that witness Alice is lying.\nWitness Dan says that witness Charlie is lying.\n\nQuestion: should it be believed that the train is late?\nEnd your answer with: \"Answer: yes or no\".";

    fn two_witness_instance() -> PuzzleInstance {
        PuzzleInstance::with_bindings(
            Topology::linear(2),
            vec!["Alice".into(), "Bob".into()],
            "the train is late".into(),
        )
        .unwrap()
    }

    fn four_witness_instance() -> PuzzleInstance {
        PuzzleInstance::with_bindings(
            Topology::star(vec![1, 2]),
            vec!["Alice".into(), "Bob".into(), "Charlie".into(), "Dan".into()],
            "the train is late".into(),
        )
        .unwrap()
    }

    #[test]
    fn renders_the_two_witness_golden_byte_for_byte() {
        assert_eq!(render_prompt(&two_witness_instance()), TWO_WITNESS_GOLDEN);
    }

    #[test]
    fn renders_the_four_witness_golden_byte_for_byte() {
        assert_eq!(render_prompt(&four_witness_instance()), FOUR_WITNESS_GOLDEN);
    }

    #[test]
    fn lone_witness_prompt_has_one_fact_line() {
        let instance = PuzzleInstance::with_bindings(
            Topology::linear(1),
            vec!["Ava".into()],
            "the shop is open".into(),
        )
        .unwrap();
        let prompt = render_prompt(&instance);
        let lines: Vec<&str> = prompt.split('\n').collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[2], "Witness Ava says that the shop is open.");
        assert!(instance.label);
    }

    #[test]
    fn bindings_are_validated() {
        assert_eq!(
            PuzzleInstance::with_bindings(
                Topology::linear(2),
                vec!["Ava".into()],
                "the shop is open".into()
            )
            .unwrap_err(),
            PuzzleError::WrongNameCount { needed: 2, got: 1 }
        );
        assert_eq!(
            PuzzleInstance::with_bindings(
                Topology::linear(2),
                vec!["Ava".into(), "Ava".into()],
                "the shop is open".into()
            )
            .unwrap_err(),
            PuzzleError::DuplicateNameBinding { name: "Ava".into() }
        );
    }

    #[test]
    fn sampling_is_deterministic_and_injective() {
        let ontology = Ontology::shipped();
        let topo = Topology::star(vec![3, 2, 1]);
        let a = sample_instance(&topo, &ontology, 99).unwrap();
        let b = sample_instance(&topo, &ontology, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_instance(&topo, &ontology, 100).unwrap();
        assert!(
            c.witness_names != a.witness_names || c.statement != a.statement,
            "different seeds should not collide on every binding"
        );
        let distinct: HashSet<&String> = a.witness_names.iter().collect();
        assert_eq!(distinct.len(), a.witness_names.len());
        assert!(!a.label, "a star with an odd path is rejected");
    }

    #[test]
    fn sampling_needs_enough_names() {
        let tiny = Ontology::from_texts("Ada\nGrace\n", "the shop is open").unwrap();
        let err = sample_instance(&Topology::linear(3), &tiny, 0).unwrap_err();
        assert_eq!(
            err,
            PuzzleError::NotEnoughNames {
                needed: 3,
                available: 2
            }
        );
        assert!(sample_instance(&Topology::linear(2), &tiny, 0).is_ok());
    }

    #[test]
    fn shuffling_preserves_everything_but_order() {
        let instance = four_witness_instance();
        let shuffled = shuffle_presentation(&instance, 5);
        assert_eq!(shuffled.label, instance.label);
        assert_eq!(shuffled.graph, instance.graph);
        assert_eq!(shuffled.witness_names, instance.witness_names);
        assert!(shuffled.shuffled);
        let mut order: Vec<usize> = shuffled.presentation_order.iter().map(|a| a.0).collect();
        order.sort_unstable();
        assert_eq!(order, vec![0, 1, 2, 3]);
        // fact lines are the same multiset, possibly reordered
        let mut original: Vec<String> = render_prompt(&instance)
            .split('\n')
            .map(String::from)
            .collect();
        let mut reshuffled: Vec<String> = render_prompt(&shuffled)
            .split('\n')
            .map(String::from)
            .collect();
        original.sort();
        reshuffled.sort();
        assert_eq!(original, reshuffled);
        // determinism
        assert_eq!(shuffle_presentation(&instance, 5), shuffled);
    }

    #[test]
    fn shuffling_a_lone_witness_changes_nothing() {
        let instance = PuzzleInstance::with_bindings(
            Topology::linear(1),
            vec!["Ava".into()],
            "the shop is open".into(),
        )
        .unwrap();
        let shuffled = shuffle_presentation(&instance, 7);
        assert_eq!(shuffled.presentation_order, instance.presentation_order);
        assert_eq!(render_prompt(&shuffled), render_prompt(&instance));
    }

    #[test]
    fn some_seed_presents_the_four_witnesses_fully_reversed() {
        // the fully reversed order (Dan, Charlie, Bob, Alice) is one of 24
        // permutations, so a short seed search must find it
        let instance = four_witness_instance();
        let seed = (0..500)
            .find(|&s| {
                shuffle_presentation(&instance, s)
                    .presentation_order
                    .iter()
                    .map(|a| a.0)
                    .collect::<Vec<_>>()
                    == vec![3, 2, 1, 0]
            })
            .expect("reversed order not found in 500 seeds");
        let prompt = render_prompt(&shuffle_presentation(&instance, seed));
        let fact_lines: Vec<&str> = prompt.split('\n').skip(2).take(4).collect();
        assert_eq!(
            fact_lines,
            vec![
                "Witness Dan says that witness Charlie is lying.",
                "Witness Charlie says that witness Alice is lying.",
                "Witness Bob says that witness Alice is lying.",
                "Witness Alice says that the train is late.",
            ]
        );
    }

    #[test]
    fn reparse_recovers_the_two_witness_graph() {
        let parsed = reparse_prompt(TWO_WITNESS_GOLDEN).unwrap();
        assert_eq!(parsed.graph, crate::graph::make_linear(2).unwrap());
        assert_eq!(parsed.names, vec!["Alice", "Bob"]);
        assert_eq!(parsed.statement, "the train is late");
    }

    #[test]
    fn reparse_recovers_the_four_witness_star() {
        let parsed = reparse_prompt(FOUR_WITNESS_GOLDEN).unwrap();
        assert_eq!(parsed.graph, crate::graph::make_star(&[1, 2]).unwrap());
        assert_eq!(parsed.names, vec!["Alice", "Bob", "Charlie", "Dan"]);
        assert!(parsed.matches_instance(&four_witness_instance()));
    }

    #[test]
    fn reparse_handles_shuffled_presentations() {
        let instance = four_witness_instance();
        for seed in 0..24 {
            let shuffled = shuffle_presentation(&instance, seed);
            let parsed = reparse_prompt(&render_prompt(&shuffled)).unwrap();
            assert!(
                parsed.matches_instance(&shuffled),
                "round trip failed for shuffle seed {seed}"
            );
            assert!(!crate::semantics::root_accepted(&parsed.graph));
        }
    }

    #[test]
    fn reparse_rejects_a_deleted_question_line() {
        let broken = TWO_WITNESS_GOLDEN.replace(
            "\nQuestion: should it be believed that the train is late?",
            "",
        );
        let err = reparse_prompt(&broken).unwrap_err();
        assert_eq!(err, PromptParseError::BadQuestion { line: 6 });
    }

    #[test]
    fn reparse_rejects_an_unknown_accused_witness() {
        let broken =
            TWO_WITNESS_GOLDEN.replace("witness Alice is lying", "witness Mallory is lying");
        let err = reparse_prompt(&broken).unwrap_err();
        assert_eq!(
            err,
            PromptParseError::UnknownWitness {
                line: 4,
                name: "Mallory".into()
            }
        );
    }

    #[test]
    fn reparse_rejects_malformed_fact_lines() {
        let broken = TWO_WITNESS_GOLDEN.replace(
            "Witness Bob says that witness Alice is lying.",
            "Bob claims Alice lies.",
        );
        assert_eq!(
            reparse_prompt(&broken).unwrap_err(),
            PromptParseError::BadFactLine {
                line: 4,
                text: "Bob claims Alice lies.".into()
            }
        );
    }

    #[test]
    fn reparse_rejects_duplicate_witnesses_and_extra_statements() {
        let broken = TWO_WITNESS_GOLDEN.replace(
            "Witness Bob says that witness Alice is lying.",
            "Witness Alice says that witness Alice is lying.",
        );
        assert_eq!(
            reparse_prompt(&broken).unwrap_err(),
            PromptParseError::DuplicateWitness {
                line: 4,
                name: "Alice".into()
            }
        );
        let broken = TWO_WITNESS_GOLDEN.replace(
            "Witness Bob says that witness Alice is lying.",
            "Witness Bob says that the shop is open.",
        );
        assert_eq!(
            reparse_prompt(&broken).unwrap_err(),
            PromptParseError::StatementCount { found: 2 }
        );
    }

    #[test]
    fn reparse_rejects_question_statement_mismatch_and_trailing_text() {
        let broken = TWO_WITNESS_GOLDEN.replace(
            "Question: should it be believed that the train is late?",
            "Question: should it be believed that the shop is open?",
        );
        assert_eq!(
            reparse_prompt(&broken).unwrap_err(),
            PromptParseError::QuestionMismatch { line: 6 }
        );
        let trailing = format!("{TWO_WITNESS_GOLDEN}\nP.S. ignore the above.");
        assert_eq!(
            reparse_prompt(&trailing).unwrap_err(),
            PromptParseError::TrailingContent { line: 8 }
        );
    }

    #[test]
    fn reparse_rejects_truncated_prompts() {
        let cut = &TWO_WITNESS_GOLDEN[..TWO_WITNESS_GOLDEN.find("\n\nQuestion").unwrap()];
        assert!(matches!(
            reparse_prompt(cut).unwrap_err(),
            PromptParseError::Truncated { .. }
        ));
        assert!(matches!(
            reparse_prompt("").unwrap_err(),
            PromptParseError::BadHeader { line: 1 }
        ));
    }

    #[test]
    fn linear_dataset_labels_follow_parity() {
        let spec = DatasetSpec {
            family: Family::Linear,
            n_min: 1,
            n_max: 6,
            variations: 3,
            master_seed: 11,
            shuffled: false,
        };
        let instances = generate_dataset(&spec, &Ontology::shipped()).unwrap();
        assert_eq!(instances.len(), 18);
        for instance in &instances {
            let n = instance.topology.n_args();
            assert_eq!(instance.label, n % 2 == 1, "parity broken at n={n}");
        }
    }

    #[test]
    fn dataset_ids_are_unique_and_encode_coordinates() {
        let spec = DatasetSpec {
            family: Family::Nonlinear,
            n_min: 1,
            n_max: 5,
            variations: 2,
            master_seed: 3,
            shuffled: true,
        };
        let instances = generate_dataset(&spec, &Ontology::shipped()).unwrap();
        assert_eq!(instances.len(), 24); // 12 topologies x 2
        let ids: HashSet<&String> = instances.iter().map(|i| &i.id).collect();
        assert_eq!(ids.len(), instances.len());
        assert_eq!(instances[0].id, "star::v0:sh");
        assert!(instances.iter().all(|i| i.shuffled));
    }

    #[test]
    fn parallel_and_sequential_generation_agree() {
        let spec = DatasetSpec {
            family: Family::Nonlinear,
            n_min: 1,
            n_max: 7,
            variations: 4,
            master_seed: 123,
            shuffled: true,
        };
        let ontology = Ontology::shipped();
        let par = generate_dataset(&spec, &ontology).unwrap();
        let seq = generate_dataset_seq(&spec, &ontology).unwrap();
        assert_eq!(par, seq);
    }

    #[test]
    fn generation_is_reproducible_byte_for_byte() {
        let spec = DatasetSpec {
            family: Family::Linear,
            n_min: 1,
            n_max: 10,
            variations: 5,
            master_seed: 777,
            shuffled: true,
        };
        let ontology = Ontology::shipped();
        let once = dataset_records(&generate_dataset(&spec, &ontology).unwrap());
        let twice = dataset_records(&generate_dataset(&spec, &ontology).unwrap());
        let a: Vec<String> = once
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect();
        let b: Vec<String> = twice
            .iter()
            .map(|r| serde_json::to_string(r).unwrap())
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn spec_validation_errors() {
        let mut spec = DatasetSpec {
            family: Family::Linear,
            n_min: 5,
            n_max: 4,
            variations: 1,
            master_seed: 0,
            shuffled: false,
        };
        assert!(matches!(
            spec.validate().unwrap_err(),
            PuzzleError::Graph(GraphError::InvertedRange { n_min: 5, n_max: 4 })
        ));
        spec.n_min = 0;
        assert!(matches!(
            spec.validate().unwrap_err(),
            PuzzleError::Graph(GraphError::ZeroCount)
        ));
        spec.n_min = 1;
        spec.n_max = 4;
        spec.variations = 0;
        assert_eq!(spec.validate().unwrap_err(), PuzzleError::ZeroVariations);
    }

    #[test]
    fn dataset_records_round_trip_through_jsonl() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.jsonl");
        let spec = DatasetSpec {
            family: Family::Nonlinear,
            n_min: 1,
            n_max: 4,
            variations: 2,
            master_seed: 9,
            shuffled: false,
        };
        let records = dataset_records(&generate_dataset(&spec, &Ontology::shipped()).unwrap());
        write_dataset(&path, &records).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(back, records);
        // a record knows its own shape
        let star = back.iter().find(|r| r.topology == "star:2+1").unwrap();
        assert_eq!(star.n_args, 4);
        assert_eq!(star.num_paths, 2);
        assert_eq!(star.path_lengths, vec![2, 1]);
        assert_eq!(star.family, Family::Nonlinear);
        assert!(!star.label);
    }

    #[test]
    fn dataset_reader_rejects_bad_lines_and_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dataset.jsonl");
        fs::write(&path, "{not json}\n").unwrap();
        assert!(matches!(
            read_dataset(&path).unwrap_err(),
            DataError::Malformed { line: 1, .. }
        ));
        let spec = DatasetSpec {
            family: Family::Linear,
            n_min: 1,
            n_max: 1,
            variations: 1,
            master_seed: 0,
            shuffled: false,
        };
        let records = dataset_records(&generate_dataset(&spec, &Ontology::shipped()).unwrap());
        let mut line = serde_json::to_value(&records[0]).unwrap();
        line["schema_version"] = serde_json::Value::from(99);
        fs::write(&path, format!("{line}\n")).unwrap();
        assert!(matches!(
            read_dataset(&path).unwrap_err(),
            DataError::SchemaVersion {
                line: 1,
                found: 99,
                expected: 1,
                ..
            }
        ));
    }

    #[test]
    fn label_serialization_uses_yes_no_strings() {
        let instance = PuzzleInstance::with_bindings(
            Topology::linear(1),
            vec!["Ava".into()],
            "the shop is open".into(),
        )
        .unwrap();
        let json = serde_json::to_value(DatasetRecord::from_instance(&instance)).unwrap();
        assert_eq!(json["label"], "yes");
        assert_eq!(json["schema_version"], 1);
        assert_eq!(json["topology"], "linear:1");
    }

    #[test]
    fn family_parses_and_prints() {
        assert_eq!("linear".parse::<Family>().unwrap(), Family::Linear);
        assert_eq!("nonlinear".parse::<Family>().unwrap(), Family::Nonlinear);
        assert!("chain".parse::<Family>().is_err());
        assert_eq!(Family::Linear.to_string(), "linear");
    }
}
