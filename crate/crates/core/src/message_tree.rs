//! Message trees, message-set partitions and decoding sets.
//!
//! A parity-forwarding protocol is the triple (tree, message sets, decoding
//! sets). The tree records which message is a bin index ("parity") of which;
//! the message sets assign every message to the terminal that transmits it;
//! the decoding sets say what each relay (and the destination) decodes.
//!
//! Generation in a tree is ancestry: a set `F` generates `m` iff some member
//! of `F` is an ancestor of `m` (every message is its own ancestor).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Identifies a message `m[k,l]`: `order` is the transmitting terminal, `index`
/// its position in that terminal's superposition order.
///
/// The source message `m[0]` is the last message of terminal 0, so it sorts
/// after every `m[0,l]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MessageId {
    order: u32,
    index: u32,
}

impl MessageId {
    /// The source message `m[0]`, root of every message tree.
    pub const ROOT: MessageId = MessageId {
        order: 0,
        index: u32::MAX,
    };

    /// `m[order,index]`. `index` starts at 1.
    pub fn new(order: u32, index: u32) -> Self {
        assert!((1..u32::MAX).contains(&index), "message index out of range");
        MessageId { order, index }
    }

    pub fn order(self) -> u32 {
        self.order
    }

    /// Second subscript; `None` for the root.
    pub fn index(self) -> Option<u32> {
        (!self.is_root()).then_some(self.index)
    }

    pub fn is_root(self) -> bool {
        self == Self::ROOT
    }

    /// The bracketed subscript, `[0]` or `[k,l]`.
    pub fn subscript(self) -> String {
        if self.is_root() {
            "[0]".to_string()
        } else {
            format!("[{},{}]", self.order, self.index)
        }
    }

    /// Ordering key inside a terminal's superposition stack.
    fn stack_position(self) -> u32 {
        self.index
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.subscript())
    }
}

/// Serialized as its display form, `m[0]` or `m[k,l]`.
impl Serialize for MessageId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("unknown message {0}")]
    UnknownMessage(MessageId),
    #[error("duplicate edge into {0}")]
    DuplicateEdge(MessageId),
    #[error("{0} has more than one parent")]
    MultipleParents(MessageId),
    #[error("the root m[0] cannot have a parent")]
    RootHasParent,
    #[error("{0} is not reachable from the root")]
    Unreachable(MessageId),
}

/// Rooted directed tree of messages; each edge parent -> child forms the
/// child as a bin index of the parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageTree {
    parent: BTreeMap<MessageId, MessageId>,
    children: BTreeMap<MessageId, Vec<MessageId>>,
}

impl MessageTree {
    /// The tree holding only `m[0]`.
    pub fn root_only() -> Self {
        let mut children = BTreeMap::new();
        children.insert(MessageId::ROOT, Vec::new());
        MessageTree {
            parent: BTreeMap::new(),
            children,
        }
    }

    /// Builds a tree from `(parent, child)` edges. The root is always `m[0]`.
    pub fn from_edges(edges: &[(MessageId, MessageId)]) -> Result<Self, TreeError> {
        let mut tree = Self::root_only();
        for &(parent, child) in edges {
            if child.is_root() {
                return Err(TreeError::RootHasParent);
            }
            if let Some(&existing) = tree.parent.get(&child) {
                return Err(if existing == parent {
                    TreeError::DuplicateEdge(child)
                } else {
                    TreeError::MultipleParents(child)
                });
            }
            tree.parent.insert(child, parent);
            tree.children.entry(parent).or_default().push(child);
            tree.children.entry(child).or_default();
        }
        for list in tree.children.values_mut() {
            list.sort();
        }
        // With single parents, reachability from the root rules out cycles.
        let reachable = tree.descendants_unchecked(MessageId::ROOT);
        if let Some(&lost) = tree.children.keys().find(|m| !reachable.contains(m)) {
            return Err(TreeError::Unreachable(lost));
        }
        Ok(tree)
    }

    pub fn contains(&self, m: MessageId) -> bool {
        self.children.contains_key(&m)
    }

    pub fn nodes(&self) -> impl Iterator<Item = MessageId> + '_ {
        self.children.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.children.len()
    }

    pub fn is_empty(&self) -> bool {
        self.children.is_empty()
    }

    pub fn parent(&self, m: MessageId) -> Option<MessageId> {
        self.parent.get(&m).copied()
    }

    pub fn children(&self, m: MessageId) -> &[MessageId] {
        self.children.get(&m).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Edges in `(parent, child)` form, sorted by child.
    pub fn edges(&self) -> Vec<(MessageId, MessageId)> {
        self.parent.iter().map(|(&c, &p)| (p, c)).collect()
    }

    fn check(&self, m: MessageId) -> Result<(), TreeError> {
        if self.contains(m) {
            Ok(())
        } else {
            Err(TreeError::UnknownMessage(m))
        }
    }

    /// All messages reachable from `m`, including `m` itself.
    pub fn descendants(&self, m: MessageId) -> Result<BTreeSet<MessageId>, TreeError> {
        self.check(m)?;
        Ok(self.descendants_unchecked(m))
    }

    fn descendants_unchecked(&self, m: MessageId) -> BTreeSet<MessageId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![m];
        while let Some(cur) = stack.pop() {
            if out.insert(cur) {
                stack.extend_from_slice(self.children(cur));
            }
        }
        out
    }

    /// `true` iff `descendant` lies on or below `ancestor`.
    pub fn is_ancestor(&self, ancestor: MessageId, descendant: MessageId) -> bool {
        let mut cur = Some(descendant);
        while let Some(m) = cur {
            if m == ancestor {
                return true;
            }
            cur = self.parent(m);
        }
        false
    }

    /// `true` iff every member of `targets` descends from some member of `generators`.
    pub fn generates<'a, F, G>(&self, generators: F, targets: G) -> Result<bool, TreeError>
    where
        F: IntoIterator<Item = &'a MessageId> + Clone,
        G: IntoIterator<Item = &'a MessageId>,
    {
        for &g in generators.clone() {
            self.check(g)?;
        }
        for &t in targets {
            self.check(t)?;
            if !self.generated_by(generators.clone(), t) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn generated_by<'a, F>(&self, generators: F, target: MessageId) -> bool
    where
        F: IntoIterator<Item = &'a MessageId>,
    {
        generators.into_iter().any(|&f| self.is_ancestor(f, target))
    }

    /// Members of `set` with no proper ancestor also in `set`.
    pub fn minimal_generator(&self, set: &BTreeSet<MessageId>) -> Result<BTreeSet<MessageId>, TreeError> {
        for &m in set {
            self.check(m)?;
        }
        Ok(set
            .iter()
            .copied()
            .filter(|&m| !set.iter().any(|&a| a != m && self.is_ancestor(a, m)))
            .collect())
    }

    /// Height of the tree in edges.
    pub fn depth(&self) -> usize {
        self.nodes()
            .map(|m| {
                let mut d = 0;
                let mut cur = m;
                while let Some(p) = self.parent(cur) {
                    d += 1;
                    cur = p;
                }
                d
            })
            .max()
            .unwrap_or(0)
    }

    /// `true` when the set is totally ordered by ancestry.
    pub fn is_chain(&self, set: &BTreeSet<MessageId>) -> bool {
        let v: Vec<_> = set.iter().copied().collect();
        v.iter().enumerate().all(|(i, &a)| {
            v[i + 1..]
                .iter()
                .all(|&b| self.is_ancestor(a, b) || self.is_ancestor(b, a))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("expected {expected} message sets (terminals 0..=K), found {found}")]
    MessageSetCount { expected: usize, found: usize },
    #[error("expected {expected} decoding sets (terminals 1..=K+1), found {found}")]
    DecodingSetCount { expected: usize, found: usize },
    #[error("{0} is listed in more than one message set")]
    NotDisjoint(MessageId),
    #[error("{0} is not assigned to any message set")]
    Unassigned(MessageId),
    #[error("{message} is of order {} but is listed in message set {set}", message.order())]
    WrongOrder { message: MessageId, set: usize },
    #[error("message set {0} is empty; omit silent relays from the network")]
    EmptyMessageSet(usize),
    #[error("message set {set} must use indices 1..={count}, found {message}")]
    IndexGap { set: usize, count: usize, message: MessageId },
    #[error("{message} in message set {earlier} descends from message set {later}")]
    SetOrdering {
        message: MessageId,
        earlier: usize,
        later: usize,
    },
    #[error("the destination must decode exactly {{m[0]}}")]
    DestinationDecodingSet,
    #[error("terminal index {index} outside 1..={max}")]
    TerminalOutOfRange { index: usize, max: usize },
    #[error("{message} is not in the decodable set of terminal {terminal}")]
    NotDecodable { message: MessageId, terminal: usize },
}

/// A parity-forwarding protocol: message tree, message sets `A[0..=K]` and
/// decoding sets `D[1..=K+1]`.
///
/// Construction checks the structural rules (partition, set ordering,
/// destination decodes the root). The decoding-set properties are reported
/// by [`ProtocolSpec::validate_decoding_sets`] instead, so invalid choices can
/// still be loaded and diagnosed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolSpec {
    tree: MessageTree,
    message_sets: Vec<BTreeSet<MessageId>>,
    decoding_sets: Vec<BTreeSet<MessageId>>,
}

impl ProtocolSpec {
    pub fn new(
        tree: MessageTree,
        message_sets: Vec<BTreeSet<MessageId>>,
        decoding_sets: Vec<BTreeSet<MessageId>>,
    ) -> Result<Self, SpecError> {
        if message_sets.is_empty() {
            return Err(SpecError::MessageSetCount {
                expected: 1,
                found: 0,
            });
        }
        let relays = message_sets.len() - 1;
        if decoding_sets.len() != relays + 1 {
            return Err(SpecError::DecodingSetCount {
                expected: relays + 1,
                found: decoding_sets.len(),
            });
        }

        let mut owner = BTreeMap::new();
        for (k, set) in message_sets.iter().enumerate() {
            if set.is_empty() {
                return Err(SpecError::EmptyMessageSet(k));
            }
            for &m in set {
                if !tree.contains(m) {
                    return Err(TreeError::UnknownMessage(m).into());
                }
                if m.order() as usize != k {
                    return Err(SpecError::WrongOrder { message: m, set: k });
                }
                if owner.insert(m, k).is_some() {
                    return Err(SpecError::NotDisjoint(m));
                }
            }
            // Indices must be 1..=n_k; the root stands in for index n_0.
            let count = set.len();
            for &m in set {
                let ok = match m.index() {
                    None => true,
                    Some(i) => (i as usize) <= if k == 0 { count - 1 } else { count },
                };
                if !ok {
                    return Err(SpecError::IndexGap { set: k, count, message: m });
                }
            }
        }
        if !message_sets[0].contains(&MessageId::ROOT) {
            return Err(SpecError::Unassigned(MessageId::ROOT));
        }
        if let Some(m) = tree.nodes().find(|m| !owner.contains_key(m)) {
            return Err(SpecError::Unassigned(m));
        }
        for (i, earlier) in message_sets.iter().enumerate() {
            for (j, later) in message_sets.iter().enumerate().skip(i + 1) {
                for &m in earlier {
                    if later.iter().any(|&a| tree.is_ancestor(a, m)) {
                        return Err(SpecError::SetOrdering {
                            message: m,
                            earlier: i,
                            later: j,
                        });
                    }
                }
            }
        }
        for set in &decoding_sets {
            for &m in set {
                if !tree.contains(m) {
                    return Err(TreeError::UnknownMessage(m).into());
                }
            }
        }
        let dest = decoding_sets.last().expect("at least one decoding set");
        if dest.len() != 1 || !dest.contains(&MessageId::ROOT) {
            return Err(SpecError::DestinationDecodingSet);
        }
        Ok(ProtocolSpec {
            tree,
            message_sets,
            decoding_sets,
        })
    }

    pub fn tree(&self) -> &MessageTree {
        &self.tree
    }

    /// Number of relays `K`.
    pub fn relays(&self) -> usize {
        self.message_sets.len() - 1
    }

    /// Index of the destination, `K + 1`.
    pub fn destination(&self) -> usize {
        self.relays() + 1
    }

    /// `A[k]` for `k` in `0..=K`.
    pub fn message_set(&self, k: usize) -> &BTreeSet<MessageId> {
        &self.message_sets[k]
    }

    pub fn message_sets(&self) -> &[BTreeSet<MessageId>] {
        &self.message_sets
    }

    /// `D[k]` for `k` in `1..=K+1`.
    pub fn decoding_set(&self, k: usize) -> Result<&BTreeSet<MessageId>, SpecError> {
        self.check_terminal(k)?;
        Ok(&self.decoding_sets[k - 1])
    }

    pub fn decoding_sets(&self) -> &[BTreeSet<MessageId>] {
        &self.decoding_sets
    }

    /// Channel input of terminal `k`: the last message in its superposition stack.
    pub fn channel_input(&self, k: usize) -> MessageId {
        *self.message_sets[k]
            .iter()
            .max_by_key(|m| m.stack_position())
            .expect("message sets are non-empty")
    }

    fn check_terminal(&self, k: usize) -> Result<(), SpecError> {
        if k == 0 || k > self.destination() {
            Err(SpecError::TerminalOutOfRange {
                index: k,
                max: self.destination(),
            })
        } else {
            Ok(())
        }
    }

    pub fn descendants(&self, m: MessageId) -> Result<BTreeSet<MessageId>, TreeError> {
        self.tree.descendants(m)
    }

    pub fn generates(
        &self,
        generators: &BTreeSet<MessageId>,
        targets: &BTreeSet<MessageId>,
    ) -> Result<bool, TreeError> {
        self.tree.generates(generators, targets)
    }

    /// Known message set of `m`: the messages its codeword is superposed on.
    ///
    /// Ordered for superposition: higher-order messages first (descending
    /// order, ascending index), then the same terminal's earlier messages.
    pub fn known_set(&self, m: MessageId) -> Result<Vec<MessageId>, TreeError> {
        if !self.tree.contains(m) {
            return Err(TreeError::UnknownMessage(m));
        }
        let k = m.order() as usize;
        let mut higher: Vec<MessageId> = if k == 0 {
            // The source computes every parity of its own message.
            self.tree.nodes().filter(|x| x.order() > 0).collect()
        } else {
            let d = &self.decoding_sets[k - 1];
            self.tree
                .nodes()
                .filter(|&x| x.order() as usize > k && self.tree.generated_by(d, x))
                .collect()
        };
        higher.sort_by(|a, b| b.order().cmp(&a.order()).then(a.cmp(b)));
        let same = self.message_sets[k]
            .iter()
            .copied()
            .filter(|x| x.stack_position() < m.stack_position());
        higher.extend(same);
        Ok(higher)
    }

    /// Decodable set `T[k]`: lower-order messages generated by `D[k]`.
    pub fn decodable_set(&self, k: usize) -> Result<BTreeSet<MessageId>, SpecError> {
        let d = self.decoding_set(k)?;
        Ok(self
            .tree
            .nodes()
            .filter(|&m| (m.order() as usize) < k && self.tree.generated_by(d, m))
            .collect())
    }

    pub fn minimal_generator(&self, set: &BTreeSet<MessageId>) -> Result<BTreeSet<MessageId>, TreeError> {
        self.tree.minimal_generator(set)
    }

    /// Members of `T[k]` not generated by `correct`, which must be a subset of `T[k]`.
    pub fn residual_set(
        &self,
        k: usize,
        correct: &BTreeSet<MessageId>,
    ) -> Result<BTreeSet<MessageId>, SpecError> {
        let t = self.decodable_set(k)?;
        if let Some(&m) = correct.iter().find(|m| !t.contains(m)) {
            return Err(SpecError::NotDecodable {
                message: m,
                terminal: k,
            });
        }
        Ok(t.into_iter()
            .filter(|&m| !self.tree.generated_by(correct, m))
            .collect())
    }

    /// Checks the decoding-set properties for every terminal.
    pub fn validate_decoding_sets(&self) -> ValidationReport {
        let terminals = (1..=self.destination())
            .map(|k| self.check_decoding_set(k))
            .collect();
        ValidationReport { terminals }
    }

    fn check_decoding_set(&self, k: usize) -> TerminalCheck {
        let d = &self.decoding_sets[k - 1];
        let empty = BTreeSet::new();
        let a = self.message_sets.get(k).unwrap_or(&empty);

        let mut generates = BTreeSet::new();
        for &m in a {
            if !self.tree.generated_by(d, m) || d.contains(&m) {
                generates.insert(m);
            }
        }

        let mut no_parity = BTreeSet::new();
        for &x in d {
            for &y in d {
                if x != y && self.tree.is_ancestor(x, y) {
                    no_parity.insert(y);
                }
            }
        }

        let mut stack_prefix = BTreeSet::new();
        for &x in d {
            let same_terminal = self.message_sets[x.order() as usize]
                .iter()
                .filter(|y| y.stack_position() <= x.stack_position());
            for &y in same_terminal {
                if !self.tree.generated_by(d, y) {
                    stack_prefix.insert(y);
                }
            }
        }

        let lower_order = d.iter().copied().filter(|m| m.order() as usize >= k).collect();

        TerminalCheck {
            terminal: k,
            generates,
            no_parity,
            stack_prefix,
            lower_order,
        }
    }
}

/// Outcome of the decoding-set checks for one terminal. Each field lists the
/// offending messages; an empty set means the property holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TerminalCheck {
    pub terminal: usize,
    /// `D[k]` generates `A[k]` and is disjoint from it.
    pub generates: BTreeSet<MessageId>,
    /// No message sits in `D[k]` together with one of its proper parities.
    pub no_parity: BTreeSet<MessageId>,
    /// Every earlier message in the stack of a decoded message is generated.
    pub stack_prefix: BTreeSet<MessageId>,
    /// Every decoded message has order below `k`.
    pub lower_order: BTreeSet<MessageId>,
}

impl TerminalCheck {
    pub fn passes(&self) -> bool {
        self.generates.is_empty()
            && self.no_parity.is_empty()
            && self.stack_prefix.is_empty()
            && self.lower_order.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub terminals: Vec<TerminalCheck>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.terminals.iter().all(TerminalCheck::passes)
    }

    pub fn terminal(&self, k: usize) -> Option<&TerminalCheck> {
        self.terminals.iter().find(|t| t.terminal == k)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn verdict(set: &BTreeSet<MessageId>) -> String {
            if set.is_empty() {
                "pass".into()
            } else {
                let ids: Vec<_> = set.iter().map(|m| m.to_string()).collect();
                format!("fail ({})", ids.join(", "))
            }
        }
        for t in &self.terminals {
            writeln!(
                f,
                "D[{}]: P1 {}; P2 {}; P3 {}; order {}",
                t.terminal,
                verdict(&t.generates),
                verdict(&t.no_parity),
                verdict(&t.stack_prefix),
                verdict(&t.lower_order),
            )?;
        }
        write!(f, "{}", if self.is_valid() { "valid" } else { "invalid" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(k: u32, l: u32) -> MessageId {
        MessageId::new(k, l)
    }

    fn set(ids: &[MessageId]) -> BTreeSet<MessageId> {
        ids.iter().copied().collect()
    }

    fn chain() -> MessageTree {
        MessageTree::from_edges(&[(MessageId::ROOT, m(1, 1)), (m(1, 1), m(2, 1))]).unwrap()
    }

    #[test]
    fn root_sorts_after_source_parities() {
        assert!(m(0, 1) < MessageId::ROOT);
        assert!(MessageId::ROOT < m(1, 1));
        assert_eq!(MessageId::ROOT.to_string(), "m[0]");
        assert_eq!(m(2, 3).to_string(), "m[2,3]");
    }

    #[test]
    fn chain_descendants() {
        let t = chain();
        assert_eq!(
            t.descendants(MessageId::ROOT).unwrap(),
            set(&[MessageId::ROOT, m(1, 1), m(2, 1)])
        );
        assert_eq!(t.descendants(m(2, 1)).unwrap(), set(&[m(2, 1)]));
        assert_eq!(
            t.descendants(m(3, 1)),
            Err(TreeError::UnknownMessage(m(3, 1)))
        );
    }

    #[test]
    fn generation_is_ancestry() {
        let t = chain();
        let all = set(&[MessageId::ROOT, m(1, 1), m(2, 1)]);
        assert!(t.generates(&set(&[MessageId::ROOT]), &all).unwrap());
        assert!(!t.generates(&set(&[m(1, 1)]), &set(&[MessageId::ROOT])).unwrap());
        assert!(t.generates(&set(&[]), &set(&[])).unwrap());
    }

    #[test]
    fn tree_rejects_bad_edges() {
        assert_eq!(
            MessageTree::from_edges(&[(MessageId::ROOT, m(1, 1)), (MessageId::ROOT, m(1, 1))]),
            Err(TreeError::DuplicateEdge(m(1, 1)))
        );
        assert_eq!(
            MessageTree::from_edges(&[(MessageId::ROOT, m(1, 1)), (m(2, 1), m(1, 1))]),
            Err(TreeError::MultipleParents(m(1, 1)))
        );
        assert_eq!(
            MessageTree::from_edges(&[(m(1, 1), MessageId::ROOT)]),
            Err(TreeError::RootHasParent)
        );
        // A detached two-cycle never reaches the root.
        assert!(matches!(
            MessageTree::from_edges(&[(m(1, 1), m(2, 1)), (m(2, 1), m(1, 1))]),
            Err(TreeError::Unreachable(_))
        ));
    }

    #[test]
    fn minimal_generator_of_chain_prefix() {
        let t = chain();
        assert_eq!(
            t.minimal_generator(&set(&[MessageId::ROOT, m(1, 1)])).unwrap(),
            set(&[MessageId::ROOT])
        );
        assert!(t.minimal_generator(&set(&[])).unwrap().is_empty());
    }

    #[test]
    fn spec_rejects_structural_errors() {
        let t = chain();
        let a = vec![set(&[MessageId::ROOT]), set(&[m(1, 1)]), set(&[m(2, 1)])];
        let d = vec![set(&[MessageId::ROOT]), set(&[MessageId::ROOT]), set(&[MessageId::ROOT])];
        assert!(ProtocolSpec::new(t.clone(), a.clone(), d.clone()).is_ok());

        let mut bad_d = d.clone();
        bad_d[2] = set(&[m(1, 1)]);
        assert_eq!(
            ProtocolSpec::new(t.clone(), a.clone(), bad_d),
            Err(SpecError::DestinationDecodingSet)
        );

        let mut empty = a.clone();
        empty.push(BTreeSet::new());
        let mut d4 = d.clone();
        d4.push(set(&[MessageId::ROOT]));
        assert_eq!(
            ProtocolSpec::new(t.clone(), empty, d4),
            Err(SpecError::EmptyMessageSet(3))
        );

        let swapped = vec![set(&[MessageId::ROOT]), set(&[m(2, 1)]), set(&[m(1, 1)])];
        assert!(matches!(
            ProtocolSpec::new(t, swapped, d),
            Err(SpecError::WrongOrder { .. })
        ));
    }

    #[test]
    fn source_known_set_covers_all_parities() {
        let t = chain();
        let spec = ProtocolSpec::new(
            t,
            vec![set(&[MessageId::ROOT]), set(&[m(1, 1)]), set(&[m(2, 1)])],
            vec![set(&[MessageId::ROOT]), set(&[m(1, 1)]), set(&[MessageId::ROOT])],
        )
        .unwrap();
        assert_eq!(spec.known_set(MessageId::ROOT).unwrap(), vec![m(2, 1), m(1, 1)]);
        assert_eq!(spec.known_set(m(1, 1)).unwrap(), vec![m(2, 1)]);
        assert!(spec.known_set(m(2, 1)).unwrap().is_empty());
    }

    #[test]
    fn residual_rejects_non_subsets() {
        let t = chain();
        let spec = ProtocolSpec::new(
            t,
            vec![set(&[MessageId::ROOT]), set(&[m(1, 1)]), set(&[m(2, 1)])],
            vec![set(&[MessageId::ROOT]), set(&[m(1, 1)]), set(&[MessageId::ROOT])],
        )
        .unwrap();
        assert_eq!(
            spec.residual_set(2, &set(&[MessageId::ROOT])),
            Err(SpecError::NotDecodable {
                message: MessageId::ROOT,
                terminal: 2
            })
        );
        assert_eq!(
            spec.decodable_set(4),
            Err(SpecError::TerminalOutOfRange { index: 4, max: 3 })
        );
    }
}
