//! Parity-forwarding decode-and-forward protocols for multi-relay networks.
//!
//! A protocol is a message tree plus message and decoding sets
//! ([`ProtocolSpec`]). From it this crate generates the achievable-rate
//! constraints, projects them onto the source rate, checks them against the
//! cut-set bound under declared Markov assumptions, evaluates Gaussian
//! instances, and checks the binning combinatorics by enumeration.

pub mod binning;
pub mod expr;
pub mod gaussian;
pub mod message_tree;
pub mod numeric;
pub mod protocols;
pub mod rate_engine;
pub mod rewrite;
pub mod spec_format;

pub use binning::{
    count_valid_combinations, decoding_window, make_instance, random_source_stream, run_schedule, verify_counting_identities,
    BinningError, BinningInstance, CountingReport, ScheduleTrace, SubsetCheck,
};
pub use expr::{MiAtom, MiExpr, ParseError, Rate, Term, Var};
pub use gaussian::{
    compare_protocols, optimize, rate_protocol_a, rate_protocol_b, GaussianComparison,
    GaussianError, GaussianNet, GaussianProtocol, InputParams, OptimizeOptions, Optimum,
};
pub use message_tree::{
    MessageId, MessageTree, ProtocolSpec, SpecError, TerminalCheck, TreeError, ValidationReport,
};
pub use rate_engine::{
    canonical_equal, chain_rule_canonicalize, eliminate_unbounded, generate_constraints,
    project_source_rate, source_region, ConstraintSystem, EngineError, GeneratedConstraint,
    GeneratedSystem, Inequality, ProjectionOptions, SystemDiff,
};
pub use numeric::{numeric_mi, DiscreteJointDistribution, Factorization, NumericError};
pub use rewrite::{
    check_capacity, cutset_bound, cutset_bounds, reduce, rewrite_moves, CapacityReport,
    ChannelInputs, Derivation, MarkovAssumptionSet, ReduceError, ReduceOptions, Rule, RuleFamily,
};
pub use spec_format::{DocError, SpecDocument};
