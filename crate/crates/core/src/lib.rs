//! Generation, labelling, evaluation, and scoring for witness-testimony
//! reasoning benchmarks.
//!
//! A benchmark instance is an attack graph over arguments — a chain, or a
//! star of chains all aimed at one root — dressed up as witnesses accusing
//! each other of lying. Grounded semantics labels every graph exactly, so
//! each generated prompt ships with its ground-truth answer. The crate
//! covers the full loop:
//!
//! * [`graph`] — attack graphs, the two topology families, and exhaustive
//!   shape enumeration via integer partitions;
//! * [`semantics`] — grounded labelling, closed-form parity rules, and a
//!   brute-force stable-extension cross-check;
//! * [`seeded`] — deterministic seed derivation and sampling primitives
//!   with frozen byte-level behavior;
//! * [`ontology`] — the shipped name and statement word lists;
//! * [`puzzle`] — instance sampling, byte-exact prompt rendering and
//!   re-parsing, and dataset files;
//! * [`gateway`] — model clients: HTTP chat endpoints, a perfect oracle,
//!   constant baselines, and fixture replay;
//! * [`eval`] — the evaluation loop with resume, verdict parsing, metrics,
//!   breakdowns, and hard-subset selection;
//! * [`report`] — manifests, CSV tables, and SVG charts.
//!
//! The `parallel` feature (on by default) runs generation and evaluation
//! data-parallel; disabling it swaps in sequential loops with bit-identical
//! output.

pub mod eval;
pub mod gateway;
pub mod graph;
pub mod ontology;
mod par;
pub mod puzzle;
pub mod report;
pub mod seeded;
pub mod semantics;

pub use eval::{
    breakdown, breakdown_split_by_label, compute_metrics, evaluate_reply, parse_answer,
    read_results, run_evaluation, select_hard_subset, BreakdownKey, BreakdownRow, ConfusionMatrix,
    EvalError, EvalItem, EvalRecord, LabelledBreakdownRow, Metrics, RunOutcome, Verdict,
};
pub use gateway::{
    build_client, load_model_config, GatewayError, ModelClient, ModelConfig, ModelReply, Provider,
    TransportStatus,
};
pub use graph::{
    enumerate_partitions, enumerate_topologies, make_linear, make_star, ArgumentId, AttackGraph,
    GraphError, Topology,
};
pub use ontology::{Ontology, OntologyError};
pub use puzzle::{
    dataset_records, generate_dataset, generate_dataset_seq, read_dataset, render_prompt,
    reparse_prompt, sample_instance, shuffle_presentation, write_dataset, DataError, DatasetRecord,
    DatasetSpec, Family, PromptParseError, PuzzleError, PuzzleInstance, ReparsedPrompt,
    SCHEMA_VERSION,
};
pub use report::{
    read_breakdown_csv, read_labelled_breakdown_csv, read_manifest, read_metrics_csv,
    render_reports, write_breakdown_csv, write_combined_metrics_csv, write_labelled_breakdown_csv,
    write_manifest, write_metrics_csv, BarChart, MetricsSummary, ReportError, RunManifest, Series,
};
pub use seeded::{derive_seed, splitmix64, SeedStream};
pub use semantics::{
    brute_force_extensions, closed_form_accept, grounded_labelling, root_accepted, Label,
    Labelling, SemanticsError,
};
