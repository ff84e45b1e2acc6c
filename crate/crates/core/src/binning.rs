//! Desk-scale protocol instances: integer message spaces with exact uniform
//! binning, the block-Markov transmission schedule and exhaustive checks of
//! the counting identities behind the error analysis.
//!
//! Message values are 1-based.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::message_tree::{MessageId, MessageTree, ProtocolSpec, SpecError};

/// Largest root space that [`count_valid_combinations`] will enumerate.
pub const MAX_ENUMERATION: u64 = 1 << 20;

/// Value given to instances whose parent would have been sent before the
/// first block.
pub const WARM_UP_MESSAGE: u64 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BinningError {
    #[error("no size given for {0}")]
    MissingSize(MessageId),
    #[error("size given for {0}, which is not in the tree")]
    UnknownMessage(MessageId),
    #[error("{0} has size zero")]
    ZeroSize(MessageId),
    #[error("size {child_size} of {child} does not divide size {parent_size} of its parent {parent}")]
    Divisibility {
        child: MessageId,
        child_size: u64,
        parent: MessageId,
        parent_size: u64,
    },
    #[error("root space of {0} messages is too large to enumerate (limit {MAX_ENUMERATION})")]
    SpaceTooLarge(u64),
    #[error("source stream has {found} messages, expected {expected}")]
    StreamLength { expected: usize, found: usize },
    #[error("source message {0} is outside the root space")]
    StreamValue(u64),
    #[error("terminal {0} decodes nothing")]
    EmptyDecodingSet(usize),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// Message spaces and one uniform partition per tree edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BinningInstance {
    tree: MessageTree,
    sizes: BTreeMap<MessageId, u64>,
    /// `bins[child][v - 1]` is the bin of parent value `v`.
    bins: BTreeMap<MessageId, Vec<u64>>,
}

/// Builds a partition of each parent space into equal bins, one per child
/// value. The same seed always yields the same partitions.
pub fn make_instance(
    spec: &ProtocolSpec,
    sizes: &BTreeMap<MessageId, u64>,
    seed: u64,
) -> Result<BinningInstance, BinningError> {
    let tree = spec.tree().clone();
    if let Some(&m) = sizes.keys().find(|&&m| !tree.contains(m)) {
        return Err(BinningError::UnknownMessage(m));
    }
    for m in tree.nodes() {
        match sizes.get(&m) {
            None => return Err(BinningError::MissingSize(m)),
            Some(0) => return Err(BinningError::ZeroSize(m)),
            Some(_) => {}
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bins = BTreeMap::new();
    for m in tree.nodes() {
        let Some(parent) = tree.parent(m) else { continue };
        let (child_size, parent_size) = (sizes[&m], sizes[&parent]);
        if parent_size % child_size != 0 {
            return Err(BinningError::Divisibility {
                child: m,
                child_size,
                parent,
                parent_size,
            });
        }
        let per_bin = parent_size / child_size;
        let mut order: Vec<u64> = (0..parent_size).collect();
        order.shuffle(&mut rng);
        let mut table = vec![0; parent_size as usize];
        for (slot, &v) in order.iter().enumerate() {
            table[v as usize] = slot as u64 / per_bin + 1;
        }
        bins.insert(m, table);
    }
    Ok(BinningInstance {
        tree,
        sizes: sizes.clone(),
        bins,
    })
}

impl BinningInstance {
    pub fn tree(&self) -> &MessageTree {
        &self.tree
    }

    pub fn size(&self, m: MessageId) -> u64 {
        self.sizes[&m]
    }

    pub fn sizes(&self) -> &BTreeMap<MessageId, u64> {
        &self.sizes
    }

    /// Bin of the parent value `v` under the partition that defines `child`.
    /// Returns `None` for the root.
    pub fn bin(&self, child: MessageId, v: u64) -> Option<u64> {
        self.bins.get(&child).map(|t| t[(v - 1) as usize])
    }

    /// Members of bin `b` of `child`'s partition, in increasing order.
    pub fn bin_members(&self, child: MessageId, b: u64) -> Vec<u64> {
        self.bins.get(&child).map_or_else(Vec::new, |t| {
            (1..=t.len() as u64).filter(|&v| t[(v - 1) as usize] == b).collect()
        })
    }

    /// Value of `m` determined by the root value, composing the partitions
    /// along the path from the root.
    pub fn project(&self, root_value: u64, m: MessageId) -> u64 {
        let mut path = vec![m];
        while let Some(p) = self.tree.parent(*path.last().expect("nonempty")) {
            path.push(p);
        }
        path.iter()
            .rev()
            .skip(1)
            .fold(root_value, |v, &c| self.bin(c, v).expect("non-root"))
    }

    /// Every bin of every partition has exactly parent/child members.
    pub fn partitions_are_exact(&self) -> bool {
        self.bins.iter().all(|(&child, table)| {
            let parent = self.tree.parent(child).expect("non-root");
            let (n, c) = (self.sizes[&parent], self.sizes[&child]);
            let mut counts = vec![0u64; c as usize];
            for &b in table {
                if b == 0 || b > c {
                    return false;
                }
                counts[(b - 1) as usize] += 1;
            }
            table.len() as u64 == n && counts.iter().all(|&x| x == n / c)
        })
    }
}

/// Uniform source messages for `blocks` blocks, reproducible from `seed`.
pub fn random_source_stream(instance: &BinningInstance, blocks: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = instance.size(MessageId::ROOT);
    (0..blocks).map(|_| rng.random_range(1..=n)).collect()
}

/// Message instances of every block of a block-Markov transmission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleTrace {
    pub blocks: usize,
    pub source_stream: Vec<u64>,
    #[serde(skip)]
    values: BTreeMap<(usize, MessageId), u64>,
}

/// Fills in every message for blocks `1..=blocks`. A message of order `k`
/// with a parent of order `l` carries the parent's bin from `k - l` blocks
/// earlier; when that block precedes the stream the instance is
/// [`WARM_UP_MESSAGE`].
pub fn run_schedule(
    instance: &BinningInstance,
    spec: &ProtocolSpec,
    blocks: usize,
    source_stream: &[u64],
) -> Result<ScheduleTrace, BinningError> {
    if source_stream.len() != blocks {
        return Err(BinningError::StreamLength {
            expected: blocks,
            found: source_stream.len(),
        });
    }
    let root_size = instance.size(MessageId::ROOT);
    if let Some(&v) = source_stream.iter().find(|&&v| v == 0 || v > root_size) {
        return Err(BinningError::StreamValue(v));
    }
    // Parents before children, so the lag-zero edges resolve within a block.
    let mut order = vec![MessageId::ROOT];
    let mut i = 0;
    while i < order.len() {
        order.extend_from_slice(spec.tree().children(order[i]));
        i += 1;
    }
    let mut values = BTreeMap::new();
    for t in 1..=blocks {
        for &m in &order {
            let v = match spec.tree().parent(m) {
                None => source_stream[t - 1],
                Some(p) => {
                    let lag = (m.order() - p.order()) as usize;
                    if lag >= t {
                        WARM_UP_MESSAGE
                    } else {
                        instance.bin(m, values[&(t - lag, p)]).expect("non-root")
                    }
                }
            };
            values.insert((t, m), v);
        }
    }
    Ok(ScheduleTrace {
        blocks,
        source_stream: source_stream.to_vec(),
        values,
    })
}

impl ScheduleTrace {
    pub fn value(&self, block: usize, m: MessageId) -> Option<u64> {
        self.values.get(&(block, m)).copied()
    }

    /// Blocks at which the timing relation of some edge fails.
    pub fn timing_violations(&self, instance: &BinningInstance) -> Vec<(usize, MessageId)> {
        self.values
            .iter()
            .filter_map(|(&(t, m), &v)| {
                let p = instance.tree().parent(m)?;
                let lag = (m.order() - p.order()) as usize;
                if lag >= t {
                    return None;
                }
                let expected = instance.bin(m, self.values[&(t - lag, p)])?;
                (expected != v).then_some((t, m))
            })
            .collect()
    }

    /// Whitespace-separated table with one row per block and message.
    pub fn to_table(&self, spec: &ProtocolSpec) -> String {
        let sender: BTreeMap<MessageId, usize> = spec
            .message_sets()
            .iter()
            .enumerate()
            .flat_map(|(k, a)| a.iter().map(move |&m| (m, k)))
            .collect();
        let mut rows: Vec<(usize, usize, MessageId, u64)> = self
            .values
            .iter()
            .map(|(&(t, m), &v)| (t, sender[&m], m, v))
            .collect();
        rows.sort();
        let mut out = String::from("block terminal message value\n");
        for (t, k, m, v) in rows {
            out.push_str(&format!("{t} {k} {m} {v}\n"));
        }
        out
    }
}

/// Blocks over which terminal `k` decodes at block `t`:
/// `[t - (k - q) + 1, t]` with `q` the lowest order in its decoding set.
pub fn decoding_window(spec: &ProtocolSpec, k: usize, t: i64) -> Result<RangeInclusive<i64>, BinningError> {
    let q = spec
        .decoding_set(k)?
        .iter()
        .map(|m| m.order() as i64)
        .min()
        .ok_or(BinningError::EmptyDecodingSet(k))?;
    Ok(t - (k as i64 - q) + 1..=t)
}

fn tuples(instance: &BinningInstance, set: &[MessageId]) -> Result<Vec<Vec<u64>>, BinningError> {
    let n = instance.size(MessageId::ROOT);
    if n > MAX_ENUMERATION {
        return Err(BinningError::SpaceTooLarge(n));
    }
    Ok((1..=n)
        .map(|r| set.iter().map(|&m| instance.project(r, m)).collect())
        .collect())
}

/// Number of distinct joint values of `set` reachable from some root value.
pub fn count_valid_combinations(
    instance: &BinningInstance,
    set: &BTreeSet<MessageId>,
) -> Result<u64, BinningError> {
    for &m in set {
        if !instance.tree().contains(m) {
            return Err(BinningError::UnknownMessage(m));
        }
    }
    let members: Vec<_> = set.iter().copied().collect();
    let distinct: HashSet<Vec<u64>> = tuples(instance, &members)?.into_iter().collect();
    Ok(distinct.len() as u64)
}

/// Counting checks for one candidate set of correctly decoded messages.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetCheck {
    pub subset: BTreeSet<MessageId>,
    pub minimal_generator: BTreeSet<MessageId>,
    pub residual: BTreeSet<MessageId>,
    pub count: u64,
    pub generator_count: u64,
    /// `count(T) / prod(sizes of the minimal generator)`.
    pub expected_completions: f64,
    pub mean_completions: f64,
    pub min_completions: u64,
    pub max_completions: u64,
}

impl SubsetCheck {
    pub fn generator_identity(&self) -> bool {
        self.count == self.generator_count
    }

    /// Relative gap between the mean completion count and its nominal value.
    pub fn relative_error(&self) -> f64 {
        (self.mean_completions - self.expected_completions).abs() / self.expected_completions
    }

    /// Every assignment has exactly the nominal number of completions.
    pub fn exact_completions(&self) -> bool {
        let e = self.expected_completions;
        e.fract() == 0.0 && self.min_completions as f64 == e && self.max_completions as f64 == e
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingReport {
    pub terminal: usize,
    pub decodable: BTreeSet<MessageId>,
    /// The decodable set is totally ordered by ancestry.
    pub chain: bool,
    pub decodable_count: u64,
    pub decoding_count: u64,
    pub subsets: Vec<SubsetCheck>,
}

/// Relative tolerance for the completion count on branching decodable sets.
pub const BRANCHING_TOLERANCE: f64 = 0.25;

impl CountingReport {
    pub fn decoding_identity(&self) -> bool {
        self.decodable_count == self.decoding_count
    }

    pub fn generator_identities(&self) -> bool {
        self.subsets.iter().all(SubsetCheck::generator_identity)
    }

    /// Exact per assignment on chains, mean within tolerance otherwise.
    pub fn completion_identities(&self) -> bool {
        if self.chain {
            self.subsets.iter().all(SubsetCheck::exact_completions)
        } else {
            self.subsets
                .iter()
                .all(|s| s.relative_error() <= BRANCHING_TOLERANCE)
        }
    }

    pub fn passes(&self) -> bool {
        self.decoding_identity() && self.generator_identities() && self.completion_identities()
    }

    /// Largest relative deviation of a single assignment from the nominal count.
    pub fn spread(&self) -> f64 {
        self.subsets
            .iter()
            .map(|s| {
                let e = s.expected_completions;
                ((s.max_completions as f64 - e) / e).max((e - s.min_completions as f64) / e)
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for CountingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |ok: bool| if ok { "pass" } else { "fail" };
        write!(
            f,
            "terminal {}: {} subsets, {}; decoding count {}; generator counts {}; completions {} (spread {:.3})",
            self.terminal,
            self.subsets.len(),
            if self.chain { "chain" } else { "branching" },
            mark(self.decoding_identity()),
            mark(self.generator_identities()),
            mark(self.completion_identities()),
            self.spread()
        )
    }
}

/// Enumerates every root value and checks, for each subset `I` of the
/// decodable set of terminal `k`, that the decodable set has as many joint
/// values as the decoding set, that `I` has as many as its minimal
/// generator, and how many residual values complete each value of `I`.
pub fn verify_counting_identities(
    instance: &BinningInstance,
    spec: &ProtocolSpec,
    k: usize,
) -> Result<CountingReport, BinningError> {
    let decodable = spec.decodable_set(k)?;
    let decoding = spec.decoding_set(k)?.clone();
    let all: Vec<MessageId> = decodable.iter().copied().collect();
    let rows = tuples(instance, &all)?;
    let column = |m: MessageId| all.iter().position(|&x| x == m).expect("member");
    let distinct = |cols: &[usize]| -> usize {
        rows.iter()
            .map(|r| cols.iter().map(|&c| r[c]).collect::<Vec<_>>())
            .collect::<HashSet<_>>()
            .len()
    };
    let decodable_count = distinct(&(0..all.len()).collect::<Vec<_>>()) as u64;
    let decoding_count = count_valid_combinations(instance, &decoding)?;

    let mut subsets = Vec::new();
    for mask in 0u64..1 << all.len() {
        let subset: BTreeSet<MessageId> = all
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &m)| m)
            .collect();
        let generator = spec.minimal_generator(&subset).map_err(SpecError::from)?;
        let residual = spec.residual_set(k, &subset)?;
        let cols: Vec<usize> = subset.iter().map(|&m| column(m)).collect();
        let gen_cols: Vec<usize> = generator.iter().map(|&m| column(m)).collect();
        let res_cols: Vec<usize> = residual.iter().map(|&m| column(m)).collect();

        let mut completions: HashMap<Vec<u64>, HashSet<Vec<u64>>> = HashMap::new();
        for r in &rows {
            completions
                .entry(cols.iter().map(|&c| r[c]).collect())
                .or_default()
                .insert(res_cols.iter().map(|&c| r[c]).collect());
        }
        let sizes: Vec<u64> = completions.values().map(|s| s.len() as u64).collect();
        let nominal: f64 = generator.iter().map(|&m| instance.size(m) as f64).product();
        subsets.push(SubsetCheck {
            count: completions.len() as u64,
            generator_count: distinct(&gen_cols) as u64,
            expected_completions: decodable_count as f64 / nominal,
            mean_completions: sizes.iter().sum::<u64>() as f64 / sizes.len() as f64,
            min_completions: *sizes.iter().min().expect("at least one root"),
            max_completions: *sizes.iter().max().expect("at least one root"),
            subset,
            minimal_generator: generator,
            residual,
        });
    }
    Ok(CountingReport {
        terminal: k,
        chain: spec.tree().is_chain(&decodable),
        decodable,
        decodable_count,
        decoding_count,
        subsets,
    })
}
