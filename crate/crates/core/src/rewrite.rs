//! Cut-set bounds and reduction of information expressions under Markov and
//! determinism assumptions.
//!
//! [`reduce`] searches for a chain of equalities between two expressions
//! using five rule families:
//!
//! - R1: split or merge arguments, `I(A,B;Y|W) = I(A;Y|W) + I(B;Y|W,A)`
//! - R2: split or merge outputs, `I(A;Y,Z|W) = I(A;Y|W) + I(A;Z|W,Y)`
//! - R3: `I(P;Q|S) = 0` for a declared chain `A - B - C` with `P ⊆ A`,
//!   `Q ⊆ C` and `B ⊆ S ⊆ A ∪ B ∪ C` (either orientation)
//! - R4: determinism: terms that vanish because an argument or output is a
//!   function of the conditioning, conditioning variables that are functions
//!   of the rest, and `I(A;Z|S) = H(Z|S)` when `Z` is a function of `(A, S)`
//! - R5: `I(Z;Z|W) = H(Z|W)`
//!
//! The search runs breadth-first from both ends and stops at a combined depth
//! bound, so failure means "not derivable within the bound", never an
//! inequality.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::expr::{MiAtom, MiExpr, Rate, Term, Var};
use crate::message_tree::{MessageId, ProtocolSpec};
use crate::rate_engine::{ConstraintSystem, Inequality};

/// Declared structure of the channel.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct MarkovAssumptionSet {
    /// `(A, B, C)`: `A - B - C` is a Markov chain.
    pub chains: Vec<(BTreeSet<Var>, BTreeSet<Var>, BTreeSet<Var>)>,
    /// `(Z, S)`: `Z` is a deterministic function of `S`.
    pub determinisms: Vec<(Var, BTreeSet<Var>)>,
    /// `(from, to)`: the codeword variable `from` is chosen equal to `to`
    /// when matching achievable constraints against cut-set bounds.
    pub substitutions: Vec<(Var, Var)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssumptionError {
    #[error("sets of the Markov chain {0} overlap")]
    OverlappingChain(String),
    #[error("a Markov chain needs three nonempty sets")]
    EmptyChainSet,
    #[error("{0} is declared as a function of itself")]
    SelfDetermined(Var),
    #[error("{0} is substituted more than once")]
    DuplicateSubstitution(Var),
}

impl MarkovAssumptionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.chains.is_empty() && self.determinisms.is_empty() && self.substitutions.is_empty()
    }

    pub fn chain<A, B, C>(mut self, a: A, b: B, c: C) -> Self
    where
        A: IntoIterator<Item = Var>,
        B: IntoIterator<Item = Var>,
        C: IntoIterator<Item = Var>,
    {
        self.chains.push((
            a.into_iter().collect(),
            b.into_iter().collect(),
            c.into_iter().collect(),
        ));
        self
    }

    pub fn deterministic<S: IntoIterator<Item = Var>>(mut self, output: Var, inputs: S) -> Self {
        self.determinisms.push((output, inputs.into_iter().collect()));
        self
    }

    pub fn substitute(mut self, from: Var, to: Var) -> Self {
        self.substitutions.push((from, to));
        self
    }

    pub fn validate(&self) -> Result<(), AssumptionError> {
        for (a, b, c) in &self.chains {
            if a.is_empty() || b.is_empty() || c.is_empty() {
                return Err(AssumptionError::EmptyChainSet);
            }
            if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
                return Err(AssumptionError::OverlappingChain(format_chain(a, b, c)));
            }
        }
        for (z, s) in &self.determinisms {
            if s.contains(z) {
                return Err(AssumptionError::SelfDetermined(*z));
            }
        }
        let mut seen = BTreeSet::new();
        for (from, _) in &self.substitutions {
            if !seen.insert(*from) {
                return Err(AssumptionError::DuplicateSubstitution(*from));
            }
        }
        Ok(())
    }

    fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for (a, b, c) in &self.chains {
            out.extend(a.iter().chain(b).chain(c));
        }
        for (z, s) in &self.determinisms {
            out.insert(*z);
            out.extend(s);
        }
        out
    }

    fn map_var(&self, v: Var) -> Var {
        self.substitutions
            .iter()
            .find(|(from, _)| *from == v)
            .map_or(v, |&(_, to)| to)
    }

    fn map_set(&self, s: &BTreeSet<Var>) -> BTreeSet<Var> {
        s.iter().map(|&v| self.map_var(v)).collect()
    }

    /// Applies the substitutions to every variable of `expr`, then removes
    /// conditioning variables from the other positions of each term.
    pub fn substitute_expr(&self, expr: &MiExpr) -> MiExpr {
        MiExpr::new(
            expr.terms()
                .iter()
                .map(|t| match t {
                    Term::Mi(a) => {
                        let cond = self.map_set(&a.cond);
                        Term::Mi(MiAtom {
                            args: self.map_set(&a.args).difference(&cond).copied().collect(),
                            outputs: self.map_set(&a.outputs).difference(&cond).copied().collect(),
                            cond,
                        })
                    }
                    Term::Entropy { vars, cond } => {
                        let cond = self.map_set(cond);
                        Term::Entropy {
                            vars: self.map_set(vars).difference(&cond).copied().collect(),
                            cond,
                        }
                    }
                })
                .collect(),
        )
    }
}

pub(crate) fn format_set(s: &BTreeSet<Var>) -> String {
    let items: Vec<String> = s.iter().map(Var::to_string).collect();
    format!("{{{}}}", items.join(","))
}

fn format_chain(a: &BTreeSet<Var>, b: &BTreeSet<Var>, c: &BTreeSet<Var>) -> String {
    format!("{} - {} - {}", format_set(a), format_set(b), format_set(c))
}

impl fmt::Display for MarkovAssumptionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b, c) in &self.chains {
            writeln!(f, "markov {}", format_chain(a, b, c))?;
        }
        for (z, s) in &self.determinisms {
            let inputs: Vec<String> = s.iter().map(Var::to_string).collect();
            writeln!(f, "deterministic {z} = f({})", inputs.join(","))?;
        }
        for (from, to) in &self.substitutions {
            writeln!(f, "substitute {from} = {to}")?;
        }
        Ok(())
    }
}

/// Rewrite rules, one variant per direction.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rule {
    ArgSplit,
    ArgMerge,
    OutputSplit,
    OutputMerge,
    MarkovDrop,
    DeterministicVanish,
    DeterministicCondition,
    DeterministicEntropy,
    SelfInformation,
}

/// The five rule families.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RuleFamily {
    R1,
    R2,
    R3,
    R4,
    R5,
}

impl Rule {
    pub fn family(self) -> RuleFamily {
        match self {
            Rule::ArgSplit | Rule::ArgMerge => RuleFamily::R1,
            Rule::OutputSplit | Rule::OutputMerge => RuleFamily::R2,
            Rule::MarkovDrop => RuleFamily::R3,
            Rule::DeterministicVanish | Rule::DeterministicCondition | Rule::DeterministicEntropy => {
                RuleFamily::R4
            }
            Rule::SelfInformation => RuleFamily::R5,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Rule::ArgSplit => "split arguments",
            Rule::ArgMerge => "merge arguments",
            Rule::OutputSplit => "split outputs",
            Rule::OutputMerge => "merge outputs",
            Rule::MarkovDrop => "drop by Markov chain",
            Rule::DeterministicVanish => "drop determined term",
            Rule::DeterministicCondition => "drop determined conditioning",
            Rule::DeterministicEntropy => "information of a function is its entropy",
            Rule::SelfInformation => "I(Z;Z|W) = H(Z|W)",
        }
    }
}

impl fmt::Display for RuleFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.family(), self.name())
    }
}

/// One equality step. `reversed` marks a rule applied right-to-left.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Step {
    pub rule: Rule,
    pub reversed: bool,
    pub result: MiExpr,
}

/// A chain of equalities from `start` to the last step's result.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Derivation {
    pub start: MiExpr,
    pub steps: Vec<Step>,
}

impl Derivation {
    pub fn end(&self) -> &MiExpr {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The same chain read from its end back to its start.
    pub fn reversed(&self) -> Derivation {
        let mut states: Vec<&MiExpr> = vec![&self.start];
        states.extend(self.steps.iter().map(|s| &s.result));
        let steps = self
            .steps
            .iter()
            .enumerate()
            .rev()
            .map(|(i, s)| Step {
                rule: s.rule,
                reversed: !s.reversed,
                result: states[i].clone(),
            })
            .collect();
        Derivation {
            start: self.end().clone(),
            steps,
        }
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "  {}", self.start)?;
        for s in &self.steps {
            let dir = if s.reversed { " (reversed)" } else { "" };
            writeln!(f, "  = {}    [{}{}]", s.result, s.rule, dir)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("not derivable within {depth} steps")]
    NotDerivable { depth: usize },
    #[error("search budget of {states} states exhausted before depth {depth}")]
    BudgetExhausted { states: usize, depth: usize },
    #[error("expressions use {0} distinct variables; at most 64 are supported")]
    TooManyVariables(usize),
    #[error(transparent)]
    Assumptions(#[from] AssumptionError),
}

#[derive(Clone, Copy, Debug)]
pub struct ReduceOptions {
    /// Maximum total number of rewrite steps.
    pub max_depth: usize,
    /// Maximum number of distinct expressions visited.
    pub max_states: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            max_depth: 8,
            max_states: 400_000,
        }
    }
}

type Mask = u64;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
enum Bits {
    I(Mask, Mask, Mask),
    H(Mask, Mask),
}

type State = Vec<Bits>;

fn bits_normalized(t: Bits) -> Option<Bits> {
    match t {
        Bits::I(a, b, c) => {
            let (a, b) = (a & !c, b & !c);
            (a != 0 && b != 0).then_some(Bits::I(a, b, c))
        }
        Bits::H(z, c) => {
            let z = z & !c;
            (z != 0).then_some(Bits::H(z, c))
        }
    }
}

fn subset(a: Mask, b: Mask) -> bool {
    a & !b == 0
}

/// Nonempty proper submasks of `m`.
fn proper_submasks(m: Mask) -> impl Iterator<Item = Mask> {
    let mut s = m;
    std::iter::from_fn(move || {
        s = (s.wrapping_sub(1)) & m;
        (s != 0).then_some(s)
    })
}

struct Compiled {
    vars: Vec<Var>,
    chains: Vec<(Mask, Mask, Mask)>,
    determinisms: Vec<(Mask, Mask)>,
}

impl Compiled {
    fn new(universe: BTreeSet<Var>, assumptions: &MarkovAssumptionSet) -> Result<Self, ReduceError> {
        let vars: Vec<Var> = universe.into_iter().collect();
        if vars.len() > 64 {
            return Err(ReduceError::TooManyVariables(vars.len()));
        }
        let mut c = Compiled {
            vars,
            chains: Vec::new(),
            determinisms: Vec::new(),
        };
        c.chains = assumptions
            .chains
            .iter()
            .map(|(a, b, cc)| (c.mask(a), c.mask(b), c.mask(cc)))
            .collect();
        c.determinisms = assumptions
            .determinisms
            .iter()
            .map(|(z, s)| (c.bit(*z), c.mask(s)))
            .collect();
        Ok(c)
    }

    fn bit(&self, v: Var) -> Mask {
        1 << self.vars.binary_search(&v).expect("variable in universe")
    }

    fn mask(&self, s: &BTreeSet<Var>) -> Mask {
        s.iter().fold(0, |m, &v| m | self.bit(v))
    }

    fn set(&self, m: Mask) -> BTreeSet<Var> {
        (0..self.vars.len())
            .filter(|i| m & (1 << i) != 0)
            .map(|i| self.vars[i])
            .collect()
    }

    fn compile(&self, e: &MiExpr) -> State {
        let mut out: State = e
            .terms()
            .iter()
            .filter_map(|t| {
                bits_normalized(match t {
                    Term::Mi(a) => Bits::I(self.mask(&a.args), self.mask(&a.outputs), self.mask(&a.cond)),
                    Term::Entropy { vars, cond } => Bits::H(self.mask(vars), self.mask(cond)),
                })
            })
            .collect();
        out.sort();
        out
    }

    fn expr(&self, s: &State) -> MiExpr {
        MiExpr::new(
            s.iter()
                .map(|t| match *t {
                    Bits::I(a, b, c) => Term::Mi(MiAtom {
                        args: self.set(a),
                        outputs: self.set(b),
                        cond: self.set(c),
                    }),
                    Bits::H(z, c) => Term::Entropy {
                        vars: self.set(z),
                        cond: self.set(c),
                    },
                })
                .collect(),
        )
    }

    fn closure(&self, mut s: Mask) -> Mask {
        loop {
            let before = s;
            for &(z, inputs) in &self.determinisms {
                if subset(inputs, s) {
                    s |= z;
                }
            }
            if s == before {
                return s;
            }
        }
    }

    fn markov_zero(&self, p: Mask, q: Mask, s: Mask) -> bool {
        self.chains.iter().any(|&(a, b, c)| {
            let within = subset(b, s) && subset(s, a | b | c);
            within && ((subset(p, a) && subset(q, c)) || (subset(p, c) && subset(q, a)))
        })
    }

    /// Every single-term rewrite of `t`: `(rule, replacement terms)`.
    fn term_moves(&self, t: Bits, out: &mut Vec<(Rule, Vec<Bits>)>) {
        match t {
            Bits::I(a, b, c) => {
                if a.count_ones() >= 2 {
                    for s in proper_submasks(a) {
                        out.push((Rule::ArgSplit, vec![Bits::I(a & !s, b, c), Bits::I(s, b, c | (a & !s))]));
                    }
                }
                if b.count_ones() >= 2 {
                    for s in proper_submasks(b) {
                        out.push((Rule::OutputSplit, vec![Bits::I(a, s, c), Bits::I(a, b & !s, c | s)]));
                    }
                }
                if self.markov_zero(a, b, c) {
                    out.push((Rule::MarkovDrop, vec![]));
                }
                let cl = self.closure(c);
                if subset(a, cl) || subset(b, cl) {
                    out.push((Rule::DeterministicVanish, vec![]));
                } else {
                    if subset(b, self.closure(a | c)) {
                        out.push((Rule::DeterministicEntropy, vec![Bits::H(b, c)]));
                    }
                    if a != b && subset(a, self.closure(b | c)) {
                        out.push((Rule::DeterministicEntropy, vec![Bits::H(a, c)]));
                    }
                }
                self.condition_moves(c, |c2| Bits::I(a, b, c2), out);
                if a == b {
                    out.push((Rule::SelfInformation, vec![Bits::H(a, c)]));
                }
            }
            Bits::H(z, c) => {
                if subset(z, self.closure(c)) {
                    out.push((Rule::DeterministicVanish, vec![]));
                }
                self.condition_moves(c, |c2| Bits::H(z, c2), out);
            }
        }
    }

    fn condition_moves(&self, c: Mask, rebuild: impl Fn(Mask) -> Bits, out: &mut Vec<(Rule, Vec<Bits>)>) {
        let mut rest = c;
        while rest != 0 {
            let v = rest & rest.wrapping_neg();
            rest &= !v;
            if subset(v, self.closure(c & !v)) {
                out.push((Rule::DeterministicCondition, vec![rebuild(c & !v)]));
            }
        }
    }

    /// Two-term merges: `(rule, merged term)`.
    fn pair_merge(x: Bits, y: Bits) -> Option<(Rule, Bits)> {
        let (Bits::I(a1, b1, c1), Bits::I(a2, b2, c2)) = (x, y) else {
            return None;
        };
        if b1 == b2 && a1 & a2 == 0 && c1 == c2 | a2 && c2 & a2 == 0 {
            return Some((Rule::ArgMerge, Bits::I(a1 | a2, b1, c2)));
        }
        if a1 == a2 && b1 & b2 == 0 && c2 == c1 | b1 && c1 & b1 == 0 {
            return Some((Rule::OutputMerge, Bits::I(a1, b1 | b2, c1)));
        }
        None
    }

    fn moves(&self, state: &State) -> Vec<(Rule, State)> {
        let mut out = Vec::new();
        let mut local = Vec::new();
        for (i, &t) in state.iter().enumerate() {
            local.clear();
            self.term_moves(t, &mut local);
            for (rule, replacement) in local.drain(..) {
                let mut next: State = state
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &u)| u)
                    .collect();
                next.extend(replacement.into_iter().filter_map(bits_normalized));
                next.sort();
                out.push((rule, next));
            }
        }
        for i in 0..state.len() {
            for j in 0..state.len() {
                if i == j {
                    continue;
                }
                if let Some((rule, merged)) = Self::pair_merge(state[i], state[j]) {
                    let mut next: State = state
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != i && k != j)
                        .map(|(_, &u)| u)
                        .collect();
                    next.extend(bits_normalized(merged));
                    next.sort();
                    out.push((rule, next));
                }
            }
        }
        out
    }
}

/// Every single-step rewrite of `expr` under `assumptions`.
pub fn rewrite_moves(expr: &MiExpr, assumptions: &MarkovAssumptionSet) -> Result<Vec<(Rule, MiExpr)>, ReduceError> {
    assumptions.validate()?;
    let mut universe = expr.variables();
    universe.extend(assumptions.variables());
    let c = Compiled::new(universe, assumptions)?;
    let state = c.compile(expr);
    Ok(c.moves(&state).into_iter().map(|(r, s)| (r, c.expr(&s))).collect())
}

type Visited = HashMap<State, Option<(State, Rule)>>;

fn chain_back(visited: &Visited, from: &State) -> Vec<(State, Rule)> {
    let mut out = Vec::new();
    let mut cur = from.clone();
    while let Some(Some((prev, rule))) = visited.get(&cur) {
        out.push((cur.clone(), *rule));
        cur = prev.clone();
    }
    out.reverse();
    out
}

/// Searches for a derivation of `expr = target` of at most
/// `options.max_depth` steps.
pub fn reduce(
    expr: &MiExpr,
    assumptions: &MarkovAssumptionSet,
    target: &MiExpr,
    options: ReduceOptions,
) -> Result<Derivation, ReduceError> {
    assumptions.validate()?;
    let mut universe = expr.variables();
    universe.extend(target.variables());
    universe.extend(assumptions.variables());
    let c = Compiled::new(universe, assumptions)?;
    let start = c.compile(expr);
    let goal = c.compile(target);

    let mut fwd: Visited = HashMap::from([(start.clone(), None)]);
    let mut bwd: Visited = HashMap::from([(goal.clone(), None)]);
    let mut fwd_frontier = vec![start.clone()];
    let mut bwd_frontier = vec![goal.clone()];
    let (mut fwd_depth, mut bwd_depth) = (0, 0);

    let mut meet = fwd.contains_key(&goal).then(|| goal.clone());
    while meet.is_none() && fwd_depth + bwd_depth < options.max_depth {
        let forward = match (fwd_frontier.is_empty(), bwd_frontier.is_empty()) {
            (true, true) => break,
            (true, false) => false,
            (false, true) => true,
            (false, false) => fwd_frontier.len() <= bwd_frontier.len(),
        };
        let (visited, other, frontier) = if forward {
            fwd_depth += 1;
            (&mut fwd, &bwd, &mut fwd_frontier)
        } else {
            bwd_depth += 1;
            (&mut bwd, &fwd, &mut bwd_frontier)
        };
        let mut next = Vec::new();
        'expand: for state in frontier.iter() {
            for (rule, succ) in c.moves(state) {
                if visited.contains_key(&succ) {
                    continue;
                }
                visited.insert(succ.clone(), Some((state.clone(), rule)));
                if other.contains_key(&succ) {
                    meet = Some(succ);
                    break 'expand;
                }
                next.push(succ);
            }
        }
        *frontier = next;
        if meet.is_none() && fwd.len() + bwd.len() > options.max_states {
            return Err(ReduceError::BudgetExhausted {
                states: options.max_states,
                depth: fwd_depth + bwd_depth,
            });
        }
    }

    let Some(meet) = meet else {
        return Err(ReduceError::NotDerivable {
            depth: options.max_depth,
        });
    };

    let mut steps: Vec<Step> = chain_back(&fwd, &meet)
        .into_iter()
        .map(|(s, rule)| Step {
            rule,
            reversed: false,
            result: c.expr(&s),
        })
        .collect();
    // The backward chain runs goal -> meet; walk it from meet back to goal.
    let back = chain_back(&bwd, &meet);
    let mut states: Vec<State> = vec![goal.clone()];
    states.extend(back.iter().map(|(s, _)| s.clone()));
    for i in (0..back.len()).rev() {
        steps.push(Step {
            rule: back[i].1,
            reversed: true,
            result: c.expr(&states[i]),
        });
    }
    Ok(Derivation {
        start: c.expr(&start),
        steps,
    })
}

/// The channel input of each terminal, `X_0` through `X_K`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChannelInputs {
    inputs: Vec<Var>,
}

impl ChannelInputs {
    /// `X[0], X[1,1], ..., X[K,1]`.
    pub fn standard(relays: usize) -> Self {
        let inputs = (0..=relays)
            .map(|k| {
                Var::X(if k == 0 {
                    MessageId::ROOT
                } else {
                    MessageId::new(k as u32, 1)
                })
            })
            .collect();
        ChannelInputs { inputs }
    }

    /// The last message of each terminal's superposition stack.
    pub fn of(spec: &ProtocolSpec) -> Self {
        ChannelInputs {
            inputs: (0..=spec.relays()).map(|k| Var::X(spec.channel_input(k))).collect(),
        }
    }

    pub fn relays(&self) -> usize {
        self.inputs.len() - 1
    }

    pub fn input(&self, k: usize) -> Var {
        self.inputs[k]
    }
}

/// Cut-set bounds `R[0] <= I(X_0..X_k; Y_{k+1}..Y_{K+1} | X_{k+1}..X_K)` for
/// `k = 0..=K`, in cut order.
pub fn cutset_bounds(inputs: &ChannelInputs) -> Vec<Inequality> {
    let relays = inputs.relays();
    (0..=relays)
        .map(|k| {
            Inequality::source_bound(vec![MiAtom::new(
                (0..=k).map(|i| inputs.input(i)),
                (k + 1..=relays + 1).map(|j| Var::Y(j as u32)),
                (k + 1..=relays).map(|i| inputs.input(i)),
            )])
        })
        .collect()
}

/// Cut-set bounds for `K` relays with the standard channel inputs.
pub fn cutset_bound(relays: usize) -> ConstraintSystem {
    ConstraintSystem::new(cutset_bounds(&ChannelInputs::standard(relays)))
}

fn rhs_expr(q: &Inequality) -> MiExpr {
    MiExpr::new(q.rhs_mi.iter().cloned().map(Term::Mi).collect())
}

/// Outcome for one cut.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CutMatch {
    pub cut: Inequality,
    /// Index into [`CapacityReport::achievable`] and the derivation from the
    /// cut's right side to that constraint's right side.
    pub matched: Option<(usize, Derivation)>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CapacityReport {
    /// Achievable constraints after substitutions.
    pub achievable: Vec<Inequality>,
    pub cuts: Vec<CutMatch>,
    /// Achievable constraints no cut was reduced to.
    pub unmatched_achievable: Vec<usize>,
}

impl CapacityReport {
    pub fn matched_cuts(&self) -> usize {
        self.cuts.iter().filter(|c| c.matched.is_some()).count()
    }

    /// Every cut reduces to an achievable constraint and every achievable
    /// constraint is reached by some cut.
    pub fn verified(&self) -> bool {
        self.matched_cuts() == self.cuts.len() && self.unmatched_achievable.is_empty()
    }

    pub fn summary(&self) -> String {
        let verdict = if self.verified() {
            "capacity verified"
        } else {
            "capacity not verified"
        };
        format!("{verdict}: {}/{} cuts", self.matched_cuts(), self.cuts.len())
    }
}

impl fmt::Display for CapacityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, cut) in self.cuts.iter().enumerate() {
            writeln!(f, "cut {i}: {}", cut.cut)?;
            match &cut.matched {
                Some((j, d)) => {
                    writeln!(f, "  matches {} ({} steps)", self.achievable[*j], d.len())?;
                    write!(f, "{d}")?;
                }
                None => writeln!(f, "  no matching achievable constraint")?,
            }
        }
        for &j in &self.unmatched_achievable {
            writeln!(f, "unmatched achievable constraint: {}", self.achievable[j])?;
        }
        writeln!(f, "{}", self.summary())
    }
}

/// Tries to reduce each cut-set bound to an achievable constraint of a
/// projected (`R[0]`-only) region.
pub fn check_capacity(
    achievable: &ConstraintSystem,
    inputs: &ChannelInputs,
    assumptions: &MarkovAssumptionSet,
    options: ReduceOptions,
) -> Result<CapacityReport, ReduceError> {
    assumptions.validate()?;
    let rows: Vec<Inequality> = achievable
        .inequalities()
        .iter()
        .filter(|q| q.lhs == [Rate::SOURCE] && q.rhs_rates.is_empty())
        .map(|q| {
            let rhs = assumptions.substitute_expr(&rhs_expr(q));
            let mi = rhs
                .terms()
                .iter()
                .filter_map(|t| match t {
                    Term::Mi(a) => Some(a.clone()),
                    Term::Entropy { .. } => None,
                })
                .collect();
            Inequality::new(q.lhs.clone(), mi, Vec::new())
        })
        .collect();
    let targets: Vec<MiExpr> = rows.iter().map(rhs_expr).collect();

    let mut cuts = Vec::new();
    let mut reached = BTreeSet::new();
    for cut in cutset_bounds(inputs) {
        let expr = rhs_expr(&cut);
        let mut matched = None;
        for (j, target) in targets.iter().enumerate() {
            match reduce(&expr, assumptions, target, options) {
                Ok(d) => {
                    matched = Some((j, d));
                    break;
                }
                Err(ReduceError::NotDerivable { .. } | ReduceError::BudgetExhausted { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        if let Some((j, _)) = &matched {
            reached.insert(*j);
        }
        cuts.push(CutMatch { cut, matched });
    }
    let unmatched_achievable = (0..rows.len()).filter(|j| !reached.contains(j)).collect();
    Ok(CapacityReport {
        achievable: rows,
        cuts,
        unmatched_achievable,
    })
}
