//! Oracles shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::PathBuf;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use parfwd_core::protocols::{self, chain_message};
use parfwd_core::{
    generate_constraints, numeric_mi, rewrite_moves, ConstraintSystem, Factorization, Inequality,
    MarkovAssumptionSet, MiAtom, MiExpr, ProtocolSpec, Rate, RuleFamily, SpecDocument, Var,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn specs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

pub fn load(name: &str) -> SpecDocument {
    let text = fs::read_to_string(specs_dir().join(name)).expect("bundled spec");
    SpecDocument::parse(&text).expect("bundled spec parses")
}

/// Every bundled spec file, valid ones first.
pub fn bundled_specs() -> Vec<PathBuf> {
    let mut out = Vec::new();
    for dir in [specs_dir(), specs_dir().join("invalid")] {
        let mut files: Vec<_> = fs::read_dir(dir)
            .expect("specs dir")
            .map(|e| e.expect("entry").path())
            .filter(|p| p.extension().is_some_and(|e| e == "spec"))
            .collect();
        files.sort();
        out.extend(files);
    }
    out
}

// Closed-form regions, written out from the rate formulas rather than
// derived by the engine.

fn x(k: usize) -> String {
    if k == 0 {
        "X[0]".into()
    } else {
        format!("X[{k},1]")
    }
}

fn xs(lo: usize, hi: usize) -> String {
    (lo..=hi).map(x).collect::<Vec<_>>().join(",")
}

fn mi(args: &str, y: usize, cond: &str) -> String {
    if cond.is_empty() {
        format!("I({args};Y[{y}])")
    } else {
        format!("I({args};Y[{y}]|{cond})")
    }
}

fn cond(lo: usize, hi: usize) -> String {
    if lo > hi {
        String::new()
    } else {
        xs(lo, hi)
    }
}

/// `R0 <= I(X_0..X_{k-1}; Y_k | X_k..X_K)` for `k = 1..=K+1`.
pub fn multihop_region(relays: usize) -> String {
    (1..=relays + 1)
        .map(|k| format!("R[0] <= {}", mi(&xs(0, k - 1), k, &cond(k, relays))))
        .collect::<Vec<_>>()
        .join("\n")
}

/// First-hop bound, one row per relay hand-off, and the cooperative bound.
pub fn short_range_region(relays: usize) -> String {
    let dest = relays + 1;
    let mut rows = vec![format!("R[0] <= {}", mi(&x(0), 1, &cond(1, relays)))];
    for l in 1..relays {
        rows.push(format!(
            "R[0] <= {} + {}",
            mi(&xs(0, l - 1), dest, &cond(l, relays)),
            mi(&x(l), l + 1, &cond(l + 1, relays))
        ));
    }
    rows.push(format!("R[0] <= {}", mi(&xs(0, relays), dest, "")));
    rows.join("\n")
}

pub const SINGLE_RELAY_DF: &str = "R[0] <= I(X[0];Y[1]|X[1,1])\nR[0] <= I(X[0],X[1,1];Y[2])";

pub const PROTOCOL_A: &str = "R[0] <= I(X[0];Y[1]|X[1,1],X[2,1])
R[0] <= I(X[0],X[1,1];Y[2]|X[2,1])
R[0] <= I(X[0],X[1,1],X[2,1];Y[3])";

pub const PROTOCOL_B: &str = "R[0] <= I(X[0];Y[1]|X[1,1],X[2,1])
R[0] <= I(X[0];Y[3]|X[1,1],X[2,1]) + I(X[1,1];Y[2]|X[2,1])
R[0] <= I(X[0],X[1,1],X[2,1];Y[3])";

pub const COUPLED_K3: &str = "R[0] <= I(X[0];Y[1]|X[1,1],X[2,1],X[3,1])
R[0] <= I(X[0],X[1,1];Y[2]|X[2,1],X[3,1])
R[0] <= I(X[2,1];Y[3]|X[3,1]) + I(X[0],X[1,1];Y[4]|X[2,1],X[3,1])
R[0] <= I(X[0],X[1,1],X[2,1],X[3,1];Y[4])";

pub const SEMIDETERMINISTIC: &str = "R[0] <= I(X[0];Y[1]|X[1,1],X[1,2],X[2,1])
R[0] <= I(X[0],X[1,2];Y[3]|X[1,1],X[2,1]) + I(X[1,1];Y[2]|X[2,1])
R[0] <= I(X[0],X[1,1],X[1,2],X[2,1];Y[3])";

pub const GENERALIZED_DF: &str = "R[0] <= I(X[0];Y[2]|X[0,1],X[1,1]) + I(X[0,1];Y[1]|X[1,1])
R[0] <= I(X[0],X[0,1],X[1,1];Y[2])";

/// Regression protocols with their expected source-rate regions.
pub fn regression_cases() -> Vec<(&'static str, ProtocolSpec, ConstraintSystem)> {
    let sys = |t: &str| ConstraintSystem::parse_lines(t).expect("target parses");
    vec![
        ("single-relay DF", protocols::single_relay_df(), sys(SINGLE_RELAY_DF)),
        ("protocol A", protocols::protocol_a(), sys(PROTOCOL_A)),
        ("protocol B", protocols::protocol_b(), sys(PROTOCOL_B)),
        ("multihop K=1", protocols::multihop(1), sys(&multihop_region(1))),
        ("multihop K=2", protocols::multihop(2), sys(&multihop_region(2))),
        ("multihop K=3", protocols::multihop(3), sys(&multihop_region(3))),
        ("short-range K=2", protocols::short_range(2), sys(&short_range_region(2))),
        ("short-range K=3", protocols::short_range(3), sys(&short_range_region(3))),
        ("coupled K=3", protocols::coupled(3), sys(COUPLED_K3)),
        ("semideterministic", protocols::semideterministic(), sys(SEMIDETERMINISTIC)),
        ("generalized DF", protocols::generalized_df(), sys(GENERALIZED_DF)),
    ]
}

/// Chain-rule consistent assignment of mutual informations: for each
/// receiver `Y`, `g_Y(S) = sum of w[Y, T]` over nonempty `T ⊆ S`, and
/// `I(A; Y | C) = g_Y(A ∪ C) - g_Y(C)`. Weights are uniform in `[0, 1)`.
pub struct Valuation {
    vars: Vec<Var>,
    weights: HashMap<(u32, u64), f64>,
}

impl Valuation {
    pub fn random(system: &ConstraintSystem, rng: &mut impl Rng) -> Self {
        let mut vars = BTreeSet::new();
        let mut receivers = BTreeSet::new();
        for a in system.atoms() {
            vars.extend(a.args.iter().chain(&a.cond).copied());
            receivers.insert(a.receiver().expect("single receiver"));
        }
        let vars: Vec<Var> = vars.into_iter().collect();
        assert!(vars.len() <= 16, "too many variables for an explicit valuation");
        let mut weights = HashMap::new();
        for &y in &receivers {
            for t in 1u64..1 << vars.len() {
                weights.insert((y, t), rng.random::<f64>());
            }
        }
        Valuation { vars, weights }
    }

    fn mask(&self, s: &BTreeSet<Var>) -> u64 {
        s.iter()
            .map(|v| 1u64 << self.vars.iter().position(|x| x == v).expect("known variable"))
            .fold(0, |a, b| a | b)
    }

    pub fn atom(&self, a: &MiAtom) -> f64 {
        let y = a.receiver().expect("single receiver");
        let c = self.mask(&a.cond);
        let ac = c | self.mask(&a.args);
        (1u64..1 << self.vars.len())
            .filter(|&t| t & !ac == 0 && t & !c != 0)
            .map(|t| self.weights[&(y, t)])
            .sum()
    }

    pub fn atoms(&self, atoms: &[MiAtom]) -> f64 {
        atoms.iter().map(|a| self.atom(a)).sum()
    }
}

/// Largest `R[0]` satisfying `system` with every rate nonnegative, by linear
/// programming. `None` when the program is infeasible or unbounded.
pub fn lp_max_source_rate(system: &ConstraintSystem, val: &Valuation) -> Option<f64> {
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let rates: BTreeMap<Rate, minilp::Variable> = system
        .rates()
        .into_iter()
        .map(|r| {
            let obj = if r == Rate::SOURCE { 1.0 } else { 0.0 };
            (r, problem.add_var(obj, (0.0, f64::INFINITY)))
        })
        .collect();
    for q in system.inequalities() {
        let mut coeffs: BTreeMap<Rate, f64> = BTreeMap::new();
        for r in &q.lhs {
            *coeffs.entry(*r).or_default() += 1.0;
        }
        for r in &q.rhs_rates {
            *coeffs.entry(*r).or_default() -= 1.0;
        }
        let row: Vec<_> = coeffs
            .iter()
            .filter(|(_, &c)| c != 0.0)
            .map(|(r, &c)| (rates[r], c))
            .collect();
        let rhs = val.atoms(&q.rhs_mi);
        if row.is_empty() {
            if rhs < 0.0 {
                return None;
            }
            continue;
        }
        problem.add_constraint(row.as_slice(), ComparisonOp::Le, rhs);
    }
    problem.solve().ok().map(|s| s.objective())
}

/// Largest `R[0]` allowed by a region whose rows bound only `R[0]`.
pub fn region_max_source_rate(region: &ConstraintSystem, val: &Valuation) -> f64 {
    region
        .inequalities()
        .iter()
        .map(|q: &Inequality| {
            assert!(q.rhs_rates.is_empty() && q.lhs.iter().all(|&r| r == Rate::SOURCE));
            val.atoms(&q.rhs_mi) / q.lhs.len() as f64
        })
        .fold(f64::INFINITY, f64::min)
}

/// Largest gap between the LP optimum of the generated system and the
/// projected region over `samples` random valuations.
pub fn projection_gap(spec: &ProtocolSpec, region: &ConstraintSystem, samples: usize, seed: u64) -> f64 {
    let raw = generate_constraints(spec).expect("generation").system();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let val = Valuation::random(&raw, &mut rng);
        let lp = lp_max_source_rate(&raw, &val).expect("bounded program");
        let projected = region_max_source_rate(region, &val);
        worst = worst.max((lp - projected).abs());
    }
    worst
}

// Rewrite-rule soundness on distributions that satisfy the assumptions.

pub struct RuleCase {
    pub family: RuleFamily,
    pub assumptions: MarkovAssumptionSet,
    pub exprs: Vec<MiExpr>,
    /// Builds a factorization whose joint satisfies `assumptions`.
    pub model: fn(&mut ChaCha8Rng) -> Factorization,
}

fn v(s: &str) -> Var {
    s.parse().expect("variable")
}

fn alphabet(rng: &mut ChaCha8Rng) -> usize {
    rng.random_range(2..=3)
}

fn generic_model(rng: &mut ChaCha8Rng) -> Factorization {
    let x0 = Var::X(chain_message(0));
    Factorization::new()
        .random(x0, alphabet(rng), &[])
        .random(v("X[1,1]"), alphabet(rng), &[x0])
        .random(v("X[2,1]"), alphabet(rng), &[x0, v("X[1,1]")])
        .random(v("Y[1]"), alphabet(rng), &[x0, v("X[1,1]"), v("X[2,1]")])
        .random(v("Y[2]"), alphabet(rng), &[v("Y[1]"), v("X[2,1]")])
}

/// `(X[0], X[2,1]) - (X[1,1], Y[1]) - Y[2]`.
fn markov_model(rng: &mut ChaCha8Rng) -> Factorization {
    let b = [v("X[1,1]"), v("Y[1]")];
    Factorization::new()
        .random(b[0], alphabet(rng), &[])
        .random(b[1], alphabet(rng), &[b[0]])
        .random(v("X[0]"), alphabet(rng), &b)
        .random(v("X[2,1]"), alphabet(rng), &[v("X[0]"), b[0], b[1]])
        .random(v("Y[2]"), alphabet(rng), &b)
}

/// `Y[2] = f(X[1,2], X[2,1])`.
fn deterministic_model(rng: &mut ChaCha8Rng) -> Factorization {
    Factorization::new()
        .random(v("X[1,2]"), alphabet(rng), &[])
        .random(v("X[2,1]"), alphabet(rng), &[v("X[1,2]")])
        .function(v("Y[2]"), alphabet(rng), &[v("X[1,2]"), v("X[2,1]")])
        .random(v("X[0]"), alphabet(rng), &[v("X[1,2]")])
        .random(v("Y[1]"), alphabet(rng), &[v("X[0]"), v("X[2,1]"), v("Y[2]")])
}

fn exprs(list: &[&str]) -> Vec<MiExpr> {
    list.iter().map(|s| s.parse().expect("expression")).collect()
}

pub fn rule_cases() -> Vec<RuleCase> {
    vec![
        RuleCase {
            family: RuleFamily::R1,
            assumptions: MarkovAssumptionSet::new(),
            exprs: exprs(&[
                "I(X[0],X[1,1];Y[1]|X[2,1])",
                "I(X[0],X[1,1],X[2,1];Y[2])",
                "I(X[0];Y[1]|X[1,1]) + I(X[1,1];Y[1])",
            ]),
            model: generic_model,
        },
        RuleCase {
            family: RuleFamily::R2,
            assumptions: MarkovAssumptionSet::new(),
            exprs: exprs(&[
                "I(X[0];Y[1],Y[2]|X[1,1])",
                "I(X[0],X[2,1];Y[1],Y[2])",
                "I(X[0];Y[1]) + I(X[0];Y[2]|Y[1])",
            ]),
            model: generic_model,
        },
        RuleCase {
            family: RuleFamily::R3,
            assumptions: MarkovAssumptionSet::new().chain(
                [v("X[0]"), v("X[2,1]")],
                [v("X[1,1]"), v("Y[1]")],
                [v("Y[2]")],
            ),
            exprs: exprs(&[
                "I(X[0];Y[2]|X[1,1],Y[1])",
                "I(X[0],X[2,1];Y[2]|X[1,1],Y[1])",
                "I(X[0];Y[2]|X[1,1],X[2,1],Y[1])",
                "I(Y[2];X[2,1]|X[1,1],Y[1]) + I(X[0];Y[1])",
            ]),
            model: markov_model,
        },
        RuleCase {
            family: RuleFamily::R4,
            assumptions: MarkovAssumptionSet::new().deterministic(v("Y[2]"), [v("X[1,2]"), v("X[2,1]")]),
            exprs: exprs(&[
                "I(X[1,2];Y[2]|X[2,1])",
                "I(X[1,2],X[2,1];Y[2])",
                "I(Y[2];Y[1]|X[1,2],X[2,1])",
                "H(Y[2]|X[1,2],X[2,1])",
                "I(X[0];Y[1]|X[1,2],X[2,1],Y[2])",
            ]),
            model: deterministic_model,
        },
        RuleCase {
            family: RuleFamily::R5,
            assumptions: MarkovAssumptionSet::new(),
            exprs: exprs(&["I(Y[1];Y[1]|X[0])", "I(X[1,1];X[1,1])"]),
            model: generic_model,
        },
    ]
}

pub struct RuleSoundness {
    pub family: RuleFamily,
    pub samples: usize,
    pub checked_moves: usize,
    pub max_error: f64,
}

/// Checks every single-step rewrite of the case's family against exact
/// information values on `samples` sampled joints.
pub fn check_rule_case(case: &RuleCase, samples: usize, seed: u64) -> RuleSoundness {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked_moves = 0;
    let mut max_error: f64 = 0.0;
    for _ in 0..samples {
        let dist = (case.model)(&mut rng).sample(&mut rng).expect("joint");
        for e in &case.exprs {
            let before = numeric_mi(e, &dist).expect("value");
            for (rule, after) in rewrite_moves(e, &case.assumptions).expect("moves") {
                if rule.family() != case.family {
                    continue;
                }
                let value = numeric_mi(&after, &dist).expect("value");
                max_error = max_error.max((value - before).abs());
                checked_moves += 1;
            }
        }
    }
    RuleSoundness {
        family: case.family,
        samples,
        checked_moves,
        max_error,
    }
}
