//! Ready-made protocols for common relay topologies.

use std::collections::BTreeSet;

use crate::message_tree::{MessageId, MessageTree, ProtocolSpec};

fn m(order: u32, index: u32) -> MessageId {
    MessageId::new(order, index)
}

fn set<I: IntoIterator<Item = MessageId>>(ids: I) -> BTreeSet<MessageId> {
    ids.into_iter().collect()
}

/// Relay `k`'s single message in a chain: `m[0]` for the source, `m[k,1]` otherwise.
pub fn chain_message(k: usize) -> MessageId {
    if k == 0 {
        MessageId::ROOT
    } else {
        m(k as u32, 1)
    }
}

/// Chain tree `m[0] -> m[1,1] -> ... -> m[K,1]` with one message per terminal.
fn chain_protocol(relays: usize, decode: impl Fn(usize) -> MessageId) -> ProtocolSpec {
    let edges: Vec<_> = (1..=relays)
        .map(|k| (chain_message(k - 1), chain_message(k)))
        .collect();
    let tree = MessageTree::from_edges(&edges).expect("chain is a tree");
    let message_sets = (0..=relays).map(|k| set([chain_message(k)])).collect();
    let mut decoding_sets: Vec<_> = (1..=relays).map(|k| set([decode(k)])).collect();
    decoding_sets.push(set([MessageId::ROOT]));
    ProtocolSpec::new(tree, message_sets, decoding_sets).expect("chain protocol is well formed")
}

/// Every relay decodes the source message.
pub fn multihop(relays: usize) -> ProtocolSpec {
    chain_protocol(relays, |_| MessageId::ROOT)
}

/// Single-relay decode-and-forward.
pub fn single_relay_df() -> ProtocolSpec {
    multihop(1)
}

/// Two relays that both decode the source message.
pub fn protocol_a() -> ProtocolSpec {
    multihop(2)
}

/// Each relay decodes only its predecessor's message.
pub fn short_range(relays: usize) -> ProtocolSpec {
    chain_protocol(relays, |k| chain_message(k - 1))
}

/// Two relays where the second decodes only the first relay's message.
pub fn protocol_b() -> ProtocolSpec {
    short_range(2)
}

/// Relays coupled in pairs: odd relays decode their predecessor, even relays
/// decode the message two steps back. `relays` must be odd.
pub fn coupled(relays: usize) -> ProtocolSpec {
    assert!(relays % 2 == 1, "coupled relays need an odd relay count");
    chain_protocol(relays, |k| {
        if k % 2 == 1 {
            chain_message(k - 1)
        } else {
            chain_message(k - 2)
        }
    })
}

/// Two relays; the first sends two parities of the source message and the
/// second decodes only the first of them.
pub fn semideterministic() -> ProtocolSpec {
    let tree = MessageTree::from_edges(&[
        (MessageId::ROOT, m(1, 1)),
        (MessageId::ROOT, m(1, 2)),
        (m(1, 1), m(2, 1)),
    ])
    .expect("tree");
    ProtocolSpec::new(
        tree,
        vec![set([MessageId::ROOT]), set([m(1, 1), m(1, 2)]), set([m(2, 1)])],
        vec![set([MessageId::ROOT]), set([m(1, 1)]), set([MessageId::ROOT])],
    )
    .expect("well formed")
}

/// Single relay with the source message split by a parity `m[0,1]` that the
/// relay decodes.
pub fn generalized_df() -> ProtocolSpec {
    let tree = MessageTree::from_edges(&[(MessageId::ROOT, m(0, 1)), (m(0, 1), m(1, 1))]).expect("tree");
    ProtocolSpec::new(
        tree,
        vec![set([m(0, 1), MessageId::ROOT]), set([m(1, 1)])],
        vec![set([m(0, 1)]), set([MessageId::ROOT])],
    )
    .expect("well formed")
}

/// Four relays on a branching tree: relay 1 sends two parities of the source
/// message, relays 2 and 3 extend one branch and relay 4 the other.
pub fn four_relay_branching() -> ProtocolSpec {
    let tree = MessageTree::from_edges(&[
        (MessageId::ROOT, m(1, 1)),
        (MessageId::ROOT, m(1, 2)),
        (m(1, 1), m(2, 1)),
        (m(2, 1), m(3, 1)),
        (m(1, 2), m(4, 1)),
    ])
    .expect("tree");
    ProtocolSpec::new(
        tree,
        vec![
            set([MessageId::ROOT]),
            set([m(1, 1), m(1, 2)]),
            set([m(2, 1)]),
            set([m(3, 1)]),
            set([m(4, 1)]),
        ],
        vec![
            set([MessageId::ROOT]),
            set([m(1, 1), m(1, 2)]),
            set([m(2, 1)]),
            set([m(1, 1), m(1, 2)]),
            set([MessageId::ROOT]),
        ],
    )
    .expect("well formed")
}

/// Three relays where relay 3 decodes three messages of mixed order.
/// `valid` selects a decoding set for relay 3 that satisfies every rule; the
/// other choice skips an earlier message of relay 1's stack.
pub fn mixed_decoding(valid: bool) -> ProtocolSpec {
    let tree = MessageTree::from_edges(&[
        (MessageId::ROOT, m(1, 2)),
        (MessageId::ROOT, m(1, 3)),
        (MessageId::ROOT, m(2, 2)),
        (m(1, 2), m(1, 1)),
        (m(1, 3), m(2, 1)),
        (m(2, 2), m(3, 1)),
    ])
    .expect("tree");
    let d3 = if valid {
        set([m(1, 2), m(1, 3), m(2, 2)])
    } else {
        set([m(1, 1), m(1, 3), m(2, 2)])
    };
    ProtocolSpec::new(
        tree,
        vec![
            set([MessageId::ROOT]),
            set([m(1, 1), m(1, 2), m(1, 3)]),
            set([m(2, 1), m(2, 2)]),
            set([m(3, 1)]),
        ],
        vec![set([MessageId::ROOT]), set([MessageId::ROOT]), d3, set([MessageId::ROOT])],
    )
    .expect("well formed")
}
