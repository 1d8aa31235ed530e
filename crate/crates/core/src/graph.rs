//! Attack graphs and the two benchmark topology families.
//!
//! An [`AttackGraph`] is a finite digraph whose edges read "attacker defeats
//! target unless itself defeated". The semantics engine accepts any such
//! digraph, cycles included, but the benchmark generators only ever build
//! in-trees: a root argument (id 0) attacked by disjoint directed paths.
//! [`Topology`] names those shapes — a single chain, or a star of chains
//! indexed by an integer partition — and round-trips through a compact text
//! form used in dataset files and on the command line.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Index of one argument within a graph; id 0 is always the root argument
/// whose acceptance the puzzle question asks about.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ArgumentId(pub usize);

impl fmt::Display for ArgumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("an attack graph needs at least one argument")]
    EmptyGraph,
    #[error("edge {attacker}->{target} references an argument outside 0..{n}")]
    EdgeOutOfRange {
        attacker: usize,
        target: usize,
        n: usize,
    },
    #[error("a linear graph needs at least one argument")]
    EmptyLinear,
    #[error("star path lengths must be positive, but path {index} has length 0")]
    ZeroLengthPath { index: usize },
    #[error("argument count range is inverted: {n_min} > {n_max}")]
    InvertedRange { n_min: usize, n_max: usize },
    #[error("argument counts start at 1, got 0")]
    ZeroCount,
}

/// A finite digraph of attacking arguments.
///
/// Arguments are the ids `0..n`; edges are ordered (attacker, target) pairs
/// kept in a sorted set so iteration order is deterministic everywhere.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AttackGraph {
    n: usize,
    edges: BTreeSet<(ArgumentId, ArgumentId)>,
}

impl AttackGraph {
    /// Build a graph over arguments `0..n` with the given attack edges.
    /// Any digraph is accepted (cycles and self-attacks included); only the
    /// generators below promise benchmark shape.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (ArgumentId, ArgumentId)>,
    ) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let edges: BTreeSet<_> = edges.into_iter().collect();
        for &(a, t) in &edges {
            if a.0 >= n || t.0 >= n {
                return Err(GraphError::EdgeOutOfRange {
                    attacker: a.0,
                    target: t.0,
                    n,
                });
            }
        }
        Ok(AttackGraph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (ArgumentId, ArgumentId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn arguments(&self) -> impl Iterator<Item = ArgumentId> {
        (0..self.n).map(ArgumentId)
    }

    /// Attacker lists indexed by target id.
    pub fn attackers(&self) -> Vec<Vec<ArgumentId>> {
        let mut by_target = vec![Vec::new(); self.n];
        for &(a, t) in &self.edges {
            by_target[t.0].push(a);
        }
        by_target
    }

    /// Target lists indexed by attacker id.
    pub fn targets(&self) -> Vec<Vec<ArgumentId>> {
        let mut by_attacker = vec![Vec::new(); self.n];
        for &(a, t) in &self.edges {
            by_attacker[a.0].push(t);
        }
        by_attacker
    }

    /// The unique argument this one attacks, when it attacks exactly one.
    /// Benchmark graphs guarantee this for every non-root argument.
    pub fn sole_target(&self, attacker: ArgumentId) -> Option<ArgumentId> {
        let mut found = None;
        for &(a, t) in &self.edges {
            if a == attacker {
                if found.is_some() {
                    return None;
                }
                found = Some(t);
            }
        }
        found
    }

    pub fn has_edge(&self, attacker: ArgumentId, target: ArgumentId) -> bool {
        self.edges.contains(&(attacker, target))
    }

    /// True when the graph has benchmark shape: the root (id 0) attacks
    /// nothing, every other argument attacks exactly one argument, at most
    /// the root is attacked more than once, and following attacks from any
    /// argument reaches the root. Equivalent to "disjoint directed paths all
    /// terminating at the root".
    pub fn is_benchmark_shape(&self) -> bool {
        let targets = self.targets();
        let attackers = self.attackers();
        if !targets[0].is_empty() {
            return false;
        }
        for id in 1..self.n {
            if targets[id].len() != 1 {
                return false;
            }
            if attackers[id].len() > 1 {
                return false;
            }
        }
        // walk each chain down to the root; out-degrees are 1 so the walk is
        // forced, and more than n steps means a cycle
        for start in 1..self.n {
            let mut at = ArgumentId(start);
            let mut steps = 0;
            while at.0 != 0 {
                at = targets[at.0][0];
                steps += 1;
                if steps > self.n {
                    return false;
                }
            }
        }
        true
    }
}

/// A benchmark graph shape: a single chain of `n` arguments, or a root
/// attacked by disjoint chains with the given lengths.
///
/// The star path list is ordered (so a specific presentation can put a short
/// path before a long one); enumeration canonicalizes to non-increasing
/// order, which is also the partition convention used in the text form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Topology {
    Linear { n: usize },
    Star { paths: Vec<usize> },
}

impl Topology {
    pub fn linear(n: usize) -> Self {
        Topology::Linear { n }
    }

    pub fn star(paths: impl Into<Vec<usize>>) -> Self {
        Topology::Star {
            paths: paths.into(),
        }
    }

    /// Total number of arguments in the built graph.
    pub fn n_args(&self) -> usize {
        match self {
            Topology::Linear { n } => *n,
            Topology::Star { paths } => 1 + paths.iter().sum::<usize>(),
        }
    }

    /// Number of directed attack paths feeding the root. A chain of n ≥ 2
    /// arguments is one path; a lone argument has none.
    pub fn num_paths(&self) -> usize {
        match self {
            Topology::Linear { n } => usize::from(*n > 1),
            Topology::Star { paths } => paths.len(),
        }
    }

    /// Lengths of the attack paths, in stored order.
    pub fn path_lengths(&self) -> Vec<usize> {
        match self {
            Topology::Linear { n } => {
                if *n > 1 {
                    vec![n - 1]
                } else {
                    Vec::new()
                }
            }
            Topology::Star { paths } => paths.clone(),
        }
    }

    /// Canonical form for deduplication: star paths sorted non-increasing.
    pub fn canonical(&self) -> Topology {
        match self {
            Topology::Linear { n } => Topology::Linear { n: *n },
            Topology::Star { paths } => {
                let mut sorted = paths.clone();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                Topology::Star { paths: sorted }
            }
        }
    }

    pub fn to_graph(&self) -> Result<AttackGraph, GraphError> {
        match self {
            Topology::Linear { n } => make_linear(*n),
            Topology::Star { paths } => make_star(paths),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Linear { n } => write!(f, "linear:{n}"),
            Topology::Star { paths } => {
                write!(f, "star:")?;
                for (i, len) in paths.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{len}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyParseError {
    #[error("topology {text:?} must start with \"linear:\" or \"star:\"")]
    UnknownKind { text: String },
    #[error("bad argument count in {text:?}: {reason}")]
    BadCount { text: String, reason: String },
    #[error("bad path length {part:?} in {text:?}: {reason}")]
    BadPathLength {
        text: String,
        part: String,
        reason: String,
    },
}

impl FromStr for Topology {
    type Err = TopologyParseError;

    /// Parse the text form: `linear:<n>` or `star:<l1>+<l2>+...`, where a
    /// star with no paths (the lone root) is written `star:`.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        if let Some(count) = text.strip_prefix("linear:") {
            let n: usize = count.parse().map_err(|e| TopologyParseError::BadCount {
                text: text.to_string(),
                reason: format!("{e}"),
            })?;
            if n == 0 {
                return Err(TopologyParseError::BadCount {
                    text: text.to_string(),
                    reason: "argument count must be at least 1".to_string(),
                });
            }
            return Ok(Topology::Linear { n });
        }
        if let Some(list) = text.strip_prefix("star:") {
            if list.is_empty() {
                return Ok(Topology::Star { paths: Vec::new() });
            }
            let mut paths = Vec::new();
            for part in list.split('+') {
                let len: usize = part
                    .parse()
                    .map_err(|e| TopologyParseError::BadPathLength {
                        text: text.to_string(),
                        part: part.to_string(),
                        reason: format!("{e}"),
                    })?;
                if len == 0 {
                    return Err(TopologyParseError::BadPathLength {
                        text: text.to_string(),
                        part: part.to_string(),
                        reason: "path lengths must be at least 1".to_string(),
                    });
                }
                paths.push(len);
            }
            return Ok(Topology::Star { paths });
        }
        Err(TopologyParseError::UnknownKind {
            text: text.to_string(),
        })
    }
}

/// All integer partitions of `m` as non-increasing part lists, in
/// reverse-lexicographic order: `[m]` first, all-ones last. The partition of
/// 0 is the single empty list.
pub fn enumerate_partitions(m: usize) -> Vec<Vec<usize>> {
    fn extend(
        remaining: usize,
        max_part: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            extend(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(m, m.max(1), &mut Vec::new(), &mut out);
    out
}

/// A chain of `n` arguments: argument i+1 attacks argument i, id 0 is the
/// root.
pub fn make_linear(n: usize) -> Result<AttackGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptyLinear);
    }
    let edges = (0..n - 1).map(|i| (ArgumentId(i + 1), ArgumentId(i)));
    AttackGraph::new(n, edges)
}

/// A root (id 0) attacked by one disjoint chain per entry of `paths`. Ids are
/// assigned in presentation order: root first, then each path from its
/// root-attacker outward, in list order.
pub fn make_star(paths: &[usize]) -> Result<AttackGraph, GraphError> {
    for (index, &len) in paths.iter().enumerate() {
        if len == 0 {
            return Err(GraphError::ZeroLengthPath { index });
        }
    }
    let n = 1 + paths.iter().sum::<usize>();
    let mut edges = Vec::with_capacity(n - 1);
    let mut next = 1;
    for &len in paths {
        edges.push((ArgumentId(next), ArgumentId(0)));
        for step in 0..len - 1 {
            edges.push((ArgumentId(next + step + 1), ArgumentId(next + step)));
        }
        next += len;
    }
    AttackGraph::new(n, edges)
}

/// One star topology per integer partition of n−1, for every n in
/// `n_min..=n_max`; ascending n outer, partition order inner. This is the
/// benchmark's full non-linear shape inventory for the range.
pub fn enumerate_topologies(n_min: usize, n_max: usize) -> Result<Vec<Topology>, GraphError> {
    if n_min == 0 {
        return Err(GraphError::ZeroCount);
    }
    if n_min > n_max {
        return Err(GraphError::InvertedRange { n_min, n_max });
    }
    let mut out = Vec::new();
    for n in n_min..=n_max {
        for paths in enumerate_partitions(n - 1) {
            out.push(Topology::Star { paths });
        }
    }
    Ok(out)
}
