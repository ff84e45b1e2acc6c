//! Rate-constraint generation, chain-rule canonicalization and projection
//! onto the source rate.
//!
//! For every terminal `k` and every subset `I` of its decodable set, the
//! protocol yields
//!
//! ```text
//! sum_{m in D[k]} R_m <= sum_{m in I'} I(X_m; Y[k] | known(m)) + sum_{m in J_I} R_m
//! ```
//!
//! where `J_I` is the minimal generator of `I` and `I'` the residual set.
//! Mutual-information atoms are opaque nonnegative quantities throughout;
//! the only identity applied to them is the chain rule.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::{Cursor, MiAtom, ParseError, Rate, Term, Var};
use crate::message_tree::{MessageId, ProtocolSpec, SpecError, ValidationReport};

/// `sum(lhs) <= sum(rhs_mi) + sum(rhs_rates)`. All three parts are sorted
/// multisets.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Inequality {
    pub lhs: Vec<Rate>,
    pub rhs_mi: Vec<MiAtom>,
    pub rhs_rates: Vec<Rate>,
}

impl Inequality {
    pub fn new(mut lhs: Vec<Rate>, mut rhs_mi: Vec<MiAtom>, mut rhs_rates: Vec<Rate>) -> Self {
        lhs.sort();
        rhs_mi.sort();
        rhs_rates.sort();
        Inequality {
            lhs,
            rhs_mi,
            rhs_rates,
        }
    }

    /// `R[0] <= rhs_mi`.
    pub fn source_bound(rhs_mi: Vec<MiAtom>) -> Self {
        Inequality::new(vec![Rate::SOURCE], rhs_mi, Vec::new())
    }

    /// Same inequality with its MI sum merged by the chain rule.
    pub fn canonical(&self) -> Self {
        Inequality {
            lhs: self.lhs.clone(),
            rhs_mi: chain_rule_canonicalize(&self.rhs_mi),
            rhs_rates: self.rhs_rates.clone(),
        }
    }

    pub fn rates(&self) -> impl Iterator<Item = Rate> + '_ {
        self.lhs.iter().chain(&self.rhs_rates).copied()
    }

    /// `true` when both sides carry the same rates and nothing else.
    pub fn is_tautology(&self) -> bool {
        self.rhs_mi.is_empty() && self.lhs == self.rhs_rates
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lhs: Vec<String> = self.lhs.iter().map(Rate::to_string).collect();
        let rhs: Vec<String> = self
            .rhs_mi
            .iter()
            .map(MiAtom::to_string)
            .chain(self.rhs_rates.iter().map(Rate::to_string))
            .collect();
        let lhs = if lhs.is_empty() { "0".to_string() } else { lhs.join(" + ") };
        let rhs = if rhs.is_empty() { "0".to_string() } else { rhs.join(" + ") };
        write!(f, "{lhs} <= {rhs}")
    }
}

impl FromStr for Inequality {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let mut c = Cursor::new(s);
        let mut lhs = Vec::new();
        if !c.eat("0") {
            loop {
                lhs.push(c.rate()?);
                if !c.eat("+") {
                    break;
                }
            }
        }
        c.expect("<=")?;
        let mut mi = Vec::new();
        let mut rates = Vec::new();
        if !c.eat("0") {
            loop {
                match c.peek() {
                    Some('R') => rates.push(c.rate()?),
                    _ => match c.term()? {
                        Term::Mi(a) => mi.push(a),
                        Term::Entropy { .. } => {
                            return c.error("entropy terms are not allowed in rate constraints")
                        }
                    },
                }
                if !c.eat("+") {
                    break;
                }
            }
        }
        c.finish()?;
        Ok(Inequality::new(lhs, mi, rates))
    }
}

/// A set of rate constraints, kept in sorted order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ConstraintSystem {
    inequalities: Vec<Inequality>,
}

impl ConstraintSystem {
    pub fn new(mut inequalities: Vec<Inequality>) -> Self {
        inequalities.sort();
        ConstraintSystem { inequalities }
    }

    pub fn inequalities(&self) -> &[Inequality] {
        &self.inequalities
    }

    pub fn len(&self) -> usize {
        self.inequalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inequalities.is_empty()
    }

    pub fn source_rate(&self) -> Rate {
        Rate::SOURCE
    }

    /// Every rate symbol mentioned anywhere.
    pub fn rates(&self) -> BTreeSet<Rate> {
        self.inequalities.iter().flat_map(Inequality::rates).collect()
    }

    /// Every MI atom mentioned anywhere.
    pub fn atoms(&self) -> BTreeSet<MiAtom> {
        self.inequalities
            .iter()
            .flat_map(|q| q.rhs_mi.iter().cloned())
            .collect()
    }

    /// Canonicalizes every MI sum and removes duplicates.
    pub fn canonical(&self) -> Self {
        let set: BTreeSet<Inequality> = self.inequalities.iter().map(Inequality::canonical).collect();
        ConstraintSystem {
            inequalities: set.into_iter().collect(),
        }
    }

    /// Parses one inequality per line; blank lines and `#` comments are skipped.
    pub fn parse_lines(text: &str) -> Result<Self, (usize, ParseError)> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            out.push(line.parse().map_err(|e| (i + 1, e))?);
        }
        Ok(ConstraintSystem::new(out))
    }
}

impl fmt::Display for ConstraintSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.inequalities {
            writeln!(f, "{q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("decoding sets violate the protocol rules:\n{0}")]
    InvalidDecodingSets(ValidationReport),
    #[error("decodable set of terminal {terminal} has {size} messages; at most {max} are supported")]
    DecodableSetTooLarge { terminal: usize, size: usize, max: usize },
    #[error("projection exceeded {bound} inequalities while eliminating {rate} ({count} rows)")]
    TooManyInequalities { bound: usize, count: usize, rate: Rate },
}

/// One emitted constraint with the terminal and subset it came from.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneratedConstraint {
    pub terminal: usize,
    pub subset: BTreeSet<MessageId>,
    pub inequality: Inequality,
    /// Set for the `I = T[k]` case, which reads `R <= R`.
    pub tautology: bool,
}

/// Every constraint of the rate theorem, tautologies included and marked.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GeneratedSystem {
    pub entries: Vec<GeneratedConstraint>,
}

impl GeneratedSystem {
    /// The constraint system with tautologies dropped and duplicates removed.
    pub fn system(&self) -> ConstraintSystem {
        let set: BTreeSet<Inequality> = self
            .entries
            .iter()
            .filter(|e| !e.tautology)
            .map(|e| e.inequality.clone())
            .collect();
        ConstraintSystem {
            inequalities: set.into_iter().collect(),
        }
    }

    pub fn for_terminal(&self, k: usize) -> impl Iterator<Item = &GeneratedConstraint> {
        self.entries.iter().filter(move |e| e.terminal == k)
    }
}

const MAX_DECODABLE: usize = 20;

/// Enumerates the rate constraints of every terminal.
///
/// Fails if the decoding sets do not satisfy the protocol rules.
pub fn generate_constraints(spec: &ProtocolSpec) -> Result<GeneratedSystem, EngineError> {
    let report = spec.validate_decoding_sets();
    if !report.is_valid() {
        return Err(EngineError::InvalidDecodingSets(report));
    }
    let mut entries = Vec::new();
    for k in 1..=spec.destination() {
        let lhs: Vec<Rate> = spec.decoding_set(k)?.iter().map(|&m| Rate(m)).collect();
        let decodable: Vec<MessageId> = spec.decodable_set(k)?.into_iter().collect();
        if decodable.len() > MAX_DECODABLE {
            return Err(EngineError::DecodableSetTooLarge {
                terminal: k,
                size: decodable.len(),
                max: MAX_DECODABLE,
            });
        }
        for mask in 0u32..(1 << decodable.len()) {
            let subset: BTreeSet<MessageId> = decodable
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &m)| m)
                .collect();
            let generator = spec.minimal_generator(&subset).map_err(SpecError::from)?;
            let residual = spec.residual_set(k, &subset)?;
            let mut rhs_mi = Vec::with_capacity(residual.len());
            for &m in &residual {
                let known = spec.known_set(m).map_err(SpecError::from)?;
                rhs_mi.push(MiAtom::new(
                    [Var::X(m)],
                    [Var::Y(k as u32)],
                    known.into_iter().map(Var::X),
                ));
            }
            let inequality = Inequality::new(
                lhs.clone(),
                rhs_mi,
                generator.iter().map(|&m| Rate(m)).collect(),
            );
            let tautology = inequality.is_tautology();
            entries.push(GeneratedConstraint {
                terminal: k,
                subset,
                inequality,
                tautology,
            });
        }
    }
    Ok(GeneratedSystem { entries })
}

/// Finds `I(A;Y|B,C) + I(B;Y|C)` at positions `(i, j)`.
fn find_merge(atoms: &[MiAtom]) -> Option<(usize, usize)> {
    for (i, upper) in atoms.iter().enumerate() {
        for (j, lower) in atoms.iter().enumerate() {
            if i != j
                && upper.outputs == lower.outputs
                && upper.args.is_disjoint(&lower.args)
                && lower.cond.is_subset(&upper.cond)
                && lower.args.is_subset(&upper.cond)
                && upper.cond.len() == lower.cond.len() + lower.args.len()
            {
                return Some((i, j));
            }
        }
    }
    None
}

/// Merges `I(A;Y|B,C) + I(B;Y|C)` into `I(A,B;Y|C)` until no pair merges.
///
/// The input is sorted before each pass, so the result does not depend on
/// the order in which atoms are supplied.
pub fn chain_rule_canonicalize(atoms: &[MiAtom]) -> Vec<MiAtom> {
    let mut out = atoms.to_vec();
    out.sort();
    while let Some((i, j)) = find_merge(&out) {
        let upper = &out[i];
        let lower = &out[j];
        let merged = MiAtom {
            args: upper.args.union(&lower.args).copied().collect(),
            outputs: upper.outputs.clone(),
            cond: lower.cond.clone(),
        };
        let (hi, lo) = if i > j { (i, j) } else { (j, i) };
        out.remove(hi);
        out.remove(lo);
        out.push(merged);
        out.sort();
    }
    out
}

/// Drops every inequality that has a rate on its right side which never
/// appears on any left side, repeating until nothing changes.
pub fn eliminate_unbounded(system: &ConstraintSystem) -> ConstraintSystem {
    let mut rows = system.inequalities.clone();
    loop {
        let bounded: BTreeSet<Rate> = rows.iter().flat_map(|q| q.lhs.iter().copied()).collect();
        let before = rows.len();
        rows.retain(|q| q.rhs_rates.iter().all(|r| bounded.contains(r)));
        if rows.len() == before {
            return ConstraintSystem { inequalities: rows };
        }
    }
}

/// Internal form with multiplicities, used during elimination.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
struct Row {
    lhs: BTreeMap<Rate, u64>,
    rates: BTreeMap<Rate, u64>,
    mi: BTreeMap<MiAtom, u64>,
}

fn counts<T: Ord + Clone>(items: &[T]) -> BTreeMap<T, u64> {
    let mut out = BTreeMap::new();
    for x in items {
        *out.entry(x.clone()).or_insert(0) += 1;
    }
    out
}

fn expand<T: Clone>(map: &BTreeMap<T, u64>) -> Vec<T> {
    map.iter()
        .flat_map(|(x, &n)| std::iter::repeat_n(x.clone(), n as usize))
        .collect()
}

fn add_scaled<T: Ord + Clone>(into: &mut BTreeMap<T, u64>, from: &BTreeMap<T, u64>, scale: u64) {
    for (x, &n) in from {
        *into.entry(x.clone()).or_insert(0) += n * scale;
    }
}

fn is_submultiset<T: Ord>(small: &BTreeMap<T, u64>, big: &BTreeMap<T, u64>) -> bool {
    small.iter().all(|(x, &n)| big.get(x).is_some_and(|&m| m >= n))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Row {
    fn from_inequality(q: &Inequality) -> Self {
        let mut row = Row {
            lhs: counts(&q.lhs),
            rates: counts(&q.rhs_rates),
            mi: counts(&q.rhs_mi),
        };
        row.cancel();
        row
    }

    fn to_inequality(&self) -> Inequality {
        Inequality::new(expand(&self.lhs), expand(&self.mi), expand(&self.rates))
    }

    /// Removes rates present on both sides.
    fn cancel(&mut self) {
        let shared: Vec<Rate> = self
            .lhs
            .keys()
            .filter(|r| self.rates.contains_key(r))
            .copied()
            .collect();
        for r in shared {
            let c = self.lhs[&r].min(self.rates[&r]);
            for side in [&mut self.lhs, &mut self.rates] {
                let n = side.get_mut(&r).expect("present");
                *n -= c;
                if *n == 0 {
                    side.remove(&r);
                }
            }
        }
    }

    /// Cancels, merges the MI sum, and divides out common factors.
    fn normalize(&mut self) {
        self.cancel();
        self.mi = counts(&chain_rule_canonicalize(&expand(&self.mi)));
        let g = self
            .lhs
            .values()
            .chain(self.rates.values())
            .chain(self.mi.values())
            .fold(0, |g, &n| gcd(g, n));
        if g > 1 {
            for side in [&mut self.lhs, &mut self.rates] {
                side.values_mut().for_each(|n| *n /= g);
            }
            self.mi.values_mut().for_each(|n| *n /= g);
        }
    }

    fn dominates(&self, other: &Row) -> bool {
        self.lhs == other.lhs
            && is_submultiset(&self.rates, &other.rates)
            && is_submultiset(&self.mi, &other.mi)
    }
}

/// Removes duplicate and dominated rows, and rows with an empty left side
/// (those hold trivially since every right-hand quantity is nonnegative).
fn prune(rows: Vec<Row>) -> Vec<Row> {
    let rows: Vec<Row> = rows
        .into_iter()
        .filter(|r| !r.lhs.is_empty())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    rows.iter()
        .enumerate()
        .filter(|(i, r)| {
            !rows
                .iter()
                .enumerate()
                .any(|(j, other)| *i != j && other.dominates(r))
        })
        .map(|(_, r)| r.clone())
        .collect()
}

/// Options for [`project_source_rate`].
#[derive(Clone, Copy, Debug)]
pub struct ProjectionOptions {
    /// Abort once the working set grows beyond this many inequalities.
    pub max_inequalities: usize,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        ProjectionOptions {
            max_inequalities: 10_000,
        }
    }
}

/// Fourier–Motzkin elimination of every rate except `R[0]`.
///
/// Rates are nonnegative, so an upper bound on a rate also yields the
/// inequality with that rate removed from its left side. MI atoms are
/// opaque nonnegative constants.
pub fn project_source_rate(
    system: &ConstraintSystem,
    options: ProjectionOptions,
) -> Result<ConstraintSystem, EngineError> {
    let mut rows: Vec<Row> = system
        .inequalities
        .iter()
        .map(|q| {
            let mut r = Row::from_inequality(q);
            r.normalize();
            r
        })
        .collect();
    rows = prune(rows);

    loop {
        let symbols: BTreeSet<Rate> = rows
            .iter()
            .flat_map(|r| r.lhs.keys().chain(r.rates.keys()).copied())
            .filter(|&r| r != Rate::SOURCE)
            .collect();
        let Some(target) = symbols.into_iter().min_by_key(|&s| {
            let up = rows.iter().filter(|r| r.lhs.contains_key(&s)).count();
            let down = rows.iter().filter(|r| r.rates.contains_key(&s)).count();
            (up * down, s)
        }) else {
            break;
        };

        let (mut upper, mut lower, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in rows {
            if r.lhs.contains_key(&target) {
                upper.push(r);
            } else if r.rates.contains_key(&target) {
                lower.push(r);
            } else {
                rest.push(r);
            }
        }

        for u in &upper {
            let a = u.lhs[&target];
            let mut dropped = u.clone();
            dropped.lhs.remove(&target);
            dropped.normalize();
            rest.push(dropped);
            for l in &lower {
                let b = l.rates[&target];
                let mut uu = u.clone();
                uu.lhs.remove(&target);
                let mut ll = l.clone();
                ll.rates.remove(&target);
                let mut combined = Row {
                    lhs: BTreeMap::new(),
                    rates: BTreeMap::new(),
                    mi: BTreeMap::new(),
                };
                add_scaled(&mut combined.lhs, &uu.lhs, b);
                add_scaled(&mut combined.lhs, &ll.lhs, a);
                add_scaled(&mut combined.rates, &uu.rates, b);
                add_scaled(&mut combined.rates, &ll.rates, a);
                add_scaled(&mut combined.mi, &uu.mi, b);
                add_scaled(&mut combined.mi, &ll.mi, a);
                combined.normalize();
                rest.push(combined);
                if rest.len() > options.max_inequalities {
                    return Err(EngineError::TooManyInequalities {
                        bound: options.max_inequalities,
                        count: rest.len(),
                        rate: target,
                    });
                }
            }
        }
        rows = prune(rest);
    }

    Ok(ConstraintSystem::new(
        rows.iter().map(Row::to_inequality).collect(),
    ))
}

/// Generation, unbounded-rate removal and projection in one call.
pub fn source_region(spec: &ProtocolSpec) -> Result<ConstraintSystem, EngineError> {
    let raw = generate_constraints(spec)?.system();
    project_source_rate(&eliminate_unbounded(&raw), ProjectionOptions::default())
}

/// Result of [`canonical_equal`]: inequalities present on only one side.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SystemDiff {
    pub only_left: Vec<Inequality>,
    pub only_right: Vec<Inequality>,
}

impl SystemDiff {
    pub fn is_empty(&self) -> bool {
        self.only_left.is_empty() && self.only_right.is_empty()
    }
}

impl fmt::Display for SystemDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.only_left {
            writeln!(f, "- {q}")?;
        }
        for q in &self.only_right {
            writeln!(f, "+ {q}")?;
        }
        Ok(())
    }
}

/// Compares two systems as multisets of chain-rule-canonical inequalities.
pub fn canonical_equal(a: &ConstraintSystem, b: &ConstraintSystem) -> (bool, SystemDiff) {
    let mut left: Vec<Inequality> = a.inequalities.iter().map(Inequality::canonical).collect();
    let mut right: Vec<Inequality> = b.inequalities.iter().map(Inequality::canonical).collect();
    left.sort();
    right.sort();
    let mut diff = SystemDiff::default();
    let (mut i, mut j) = (0, 0);
    while i < left.len() || j < right.len() {
        match (left.get(i), right.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => {
                diff.only_left.push(x.clone());
                i += 1;
            }
            (Some(_), Some(y)) => {
                diff.only_right.push(y.clone());
                j += 1;
            }
            (Some(x), None) => {
                diff.only_left.push(x.clone());
                i += 1;
            }
            (None, Some(y)) => {
                diff.only_right.push(y.clone());
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    (diff.is_empty(), diff)
}
