//! Argument acceptance under grounded semantics.
//!
//! The engine computes the grounded labelling — the least fixed point that
//! marks an argument IN when all of its attackers are OUT and OUT when some
//! attacker is IN — for arbitrary digraphs, plus two cross-checks: the
//! closed-form acceptance rule for the benchmark shapes (a chain is accepted
//! iff its length is odd; a star root iff every path has even length), and a
//! subset-enumerating stable-extension oracle for desk-scale graphs. On every
//! benchmark graph all three agree, which is exactly what the test suite
//! pins down.

use std::collections::{BTreeSet, VecDeque};

use thiserror::Error;

use crate::graph::{ArgumentId, AttackGraph, Topology};

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Label {
    In,
    Out,
    Undec,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::In => "IN",
            Label::Out => "OUT",
            Label::Undec => "UNDEC",
        }
    }
}

/// One label per argument id.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Labelling {
    labels: Vec<Label>,
}

impl Labelling {
    pub fn get(&self, id: ArgumentId) -> Label {
        self.labels[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ArgumentId, Label)> + '_ {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (ArgumentId(i), l))
    }

    pub fn in_set(&self) -> BTreeSet<ArgumentId> {
        self.iter()
            .filter(|&(_, l)| l == Label::In)
            .map(|(id, _)| id)
            .collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("brute-force enumeration is capped at {max} arguments, got {n}")]
    GraphTooLarge { n: usize, max: usize },
}

/// Grounded labelling by propagation from unattacked arguments.
///
/// Seeds the queue with every argument whose live-attacker count is zero
/// (IN), turns the targets of IN arguments OUT, and decrements live-attacker
/// counts as attackers go OUT; whatever never gets labelled is UNDEC. This is
/// the standard linear-time formulation of the least fixed point of the
/// characteristic function, so the result does not depend on processing
/// order.
pub fn grounded_labelling(graph: &AttackGraph) -> Labelling {
    let n = graph.n();
    let targets = graph.targets();
    let mut live_attackers: Vec<usize> = vec![0; n];
    for (_, t) in graph.edges() {
        live_attackers[t.0] += 1;
    }

    let mut labels: Vec<Option<Label>> = vec![None; n];
    let mut queue: VecDeque<ArgumentId> = VecDeque::new();
    for id in 0..n {
        if live_attackers[id] == 0 {
            labels[id] = Some(Label::In);
            queue.push_back(ArgumentId(id));
        }
    }

    while let Some(arg) = queue.pop_front() {
        match labels[arg.0] {
            Some(Label::In) => {
                for &t in &targets[arg.0] {
                    if labels[t.0].is_none() {
                        labels[t.0] = Some(Label::Out);
                        queue.push_back(t);
                    }
                }
            }
            Some(Label::Out) => {
                for &t in &targets[arg.0] {
                    live_attackers[t.0] -= 1;
                    if live_attackers[t.0] == 0 && labels[t.0].is_none() {
                        labels[t.0] = Some(Label::In);
                        queue.push_back(t);
                    }
                }
            }
            _ => unreachable!("only labelled arguments are queued"),
        }
    }

    Labelling {
        labels: labels
            .into_iter()
            .map(|l| l.unwrap_or(Label::Undec))
            .collect(),
    }
}

/// True iff the grounded labelling accepts the root argument (id 0). An
/// UNDEC root — possible only on non-benchmark inputs — counts as not
/// accepted; callers that need the three-valued answer use
/// [`grounded_labelling`] directly.
pub fn root_accepted(graph: &AttackGraph) -> bool {
    grounded_labelling(graph).get(ArgumentId(0)) == Label::In
}

/// Closed-form root acceptance for the benchmark shapes: a chain of n
/// arguments is accepted iff n is odd; a star root is accepted iff every
/// attached path has even length (vacuously, a lone root is accepted).
pub fn closed_form_accept(topology: &Topology) -> bool {
    match topology {
        Topology::Linear { n } => n % 2 == 1,
        Topology::Star { paths } => paths.iter().all(|len| len % 2 == 0),
    }
}

/// Maximum argument count [`brute_force_extensions`] will enumerate.
pub const BRUTE_FORCE_MAX_ARGS: usize = 20;

/// All stable extensions by subset enumeration: conflict-free sets that
/// attack every argument outside themselves. Deliberately naive — it is the
/// independent oracle the fixed-point engine is checked against — and
/// therefore capped at [`BRUTE_FORCE_MAX_ARGS`] arguments.
pub fn brute_force_extensions(
    graph: &AttackGraph,
) -> Result<Vec<BTreeSet<ArgumentId>>, SemanticsError> {
    let n = graph.n();
    if n > BRUTE_FORCE_MAX_ARGS {
        return Err(SemanticsError::GraphTooLarge {
            n,
            max: BRUTE_FORCE_MAX_ARGS,
        });
    }
    let edges: Vec<(usize, usize)> = graph.edges().map(|(a, t)| (a.0, t.0)).collect();
    let mut extensions = Vec::new();
    for subset in 0u32..1 << n {
        let contains = |id: usize| subset >> id & 1 == 1;
        let conflict_free = edges.iter().all(|&(a, t)| !(contains(a) && contains(t)));
        if !conflict_free {
            continue;
        }
        let attacks_all_outside = (0..n)
            .filter(|&id| !contains(id))
            .all(|outside| edges.iter().any(|&(a, t)| t == outside && contains(a)));
        if attacks_all_outside {
            extensions.push((0..n).filter(|&id| contains(id)).map(ArgumentId).collect());
        }
    }
    Ok(extensions)
}
