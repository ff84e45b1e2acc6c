//! Exact evaluation of information expressions over small discrete joint
//! distributions.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use thiserror::Error;

use crate::expr::{MiAtom, MiExpr, Term, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("variable {0} is not part of the distribution")]
    MissingLabel(Var),
    #[error("probabilities must be nonnegative and sum to 1 (sum is {0})")]
    NotNormalized(f64),
    #[error("table has {found} entries, expected {expected}")]
    Shape { expected: usize, found: usize },
    #[error("{0} is declared twice")]
    Duplicate(Var),
    #[error("{var} depends on {parent}, which is not declared earlier")]
    UndeclaredParent { var: Var, parent: Var },
}

/// Joint probability table over labelled variables. Entries are stored in
/// row-major order with the last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJointDistribution {
    vars: Vec<Var>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl DiscreteJointDistribution {
    pub fn new(vars: Vec<Var>, sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self, NumericError> {
        let mut seen = BTreeSet::new();
        for &v in &vars {
            if !seen.insert(v) {
                return Err(NumericError::Duplicate(v));
            }
        }
        let expected: usize = sizes.iter().product();
        if probs.len() != expected || sizes.len() != vars.len() {
            return Err(NumericError::Shape {
                expected,
                found: probs.len(),
            });
        }
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(NumericError::NotNormalized(sum));
        }
        Ok(DiscreteJointDistribution { vars, sizes, probs })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn alphabet_size(&self, v: Var) -> Option<usize> {
        self.position(v).map(|i| self.sizes[i])
    }

    fn position(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|&x| x == v)
    }

    /// Entropy in bits of the listed variables jointly.
    pub fn entropy(&self, set: &BTreeSet<Var>) -> Result<f64, NumericError> {
        let positions: Vec<usize> = set
            .iter()
            .map(|&v| self.position(v).ok_or(NumericError::MissingLabel(v)))
            .collect::<Result<_, _>>()?;
        if positions.is_empty() {
            return Ok(0.0);
        }
        let marginal_len: usize = positions.iter().map(|&i| self.sizes[i]).product();
        let mut marginal = vec![0.0; marginal_len];
        let mut digits = vec![0usize; self.vars.len()];
        for &p in &self.probs {
            let key = positions
                .iter()
                .fold(0, |acc, &i| acc * self.sizes[i] + digits[i]);
            marginal[key] += p;
            for i in (0..digits.len()).rev() {
                digits[i] += 1;
                if digits[i] < self.sizes[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
        Ok(-marginal
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.log2())
            .sum::<f64>())
    }

    /// `I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C)`.
    pub fn mutual_information(&self, atom: &MiAtom) -> Result<f64, NumericError> {
        let ac: BTreeSet<Var> = atom.args.union(&atom.cond).copied().collect();
        let bc: BTreeSet<Var> = atom.outputs.union(&atom.cond).copied().collect();
        let abc: BTreeSet<Var> = ac.union(&atom.outputs).copied().collect();
        Ok(self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(&atom.cond)?)
    }

    pub fn term(&self, term: &Term) -> Result<f64, NumericError> {
        match term {
            Term::Mi(a) => self.mutual_information(a),
            Term::Entropy { vars, cond } => {
                let all: BTreeSet<Var> = vars.union(cond).copied().collect();
                Ok(self.entropy(&all)? - self.entropy(cond)?)
            }
        }
    }
}

/// Value of an information expression in bits.
pub fn numeric_mi(expr: &MiExpr, dist: &DiscreteJointDistribution) -> Result<f64, NumericError> {
    expr.terms().iter().map(|t| dist.term(t)).sum()
}

/// One factor of a joint distribution built in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    /// `p(var | parents)` with a random conditional table.
    Random { var: Var, size: usize, parents: Vec<Var> },
    /// `var = f(inputs)` with a random function table.
    Function { var: Var, size: usize, inputs: Vec<Var> },
}

impl Factor {
    fn var(&self) -> Var {
        match self {
            Factor::Random { var, .. } | Factor::Function { var, .. } => *var,
        }
    }

    fn size(&self) -> usize {
        match self {
            Factor::Random { size, .. } | Factor::Function { size, .. } => *size,
        }
    }

    fn parents(&self) -> &[Var] {
        match self {
            Factor::Random { parents, .. } => parents,
            Factor::Function { inputs, .. } => inputs,
        }
    }
}

/// A product of conditionals. Every Markov chain implied by the parent
/// structure and every declared function holds exactly in the sampled joint.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Factorization {
    factors: Vec<Factor>,
}

impl Factorization {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn random(mut self, var: Var, size: usize, parents: &[Var]) -> Self {
        self.factors.push(Factor::Random {
            var,
            size,
            parents: parents.to_vec(),
        });
        self
    }

    pub fn function(mut self, var: Var, size: usize, inputs: &[Var]) -> Self {
        self.factors.push(Factor::Function {
            var,
            size,
            inputs: inputs.to_vec(),
        });
        self
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// Draws random tables for every factor and multiplies them out.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DiscreteJointDistribution, NumericError> {
        let mut index: BTreeMap<Var, usize> = BTreeMap::new();
        for (i, f) in self.factors.iter().enumerate() {
            for &p in f.parents() {
                if !index.contains_key(&p) {
                    return Err(NumericError::UndeclaredParent { var: f.var(), parent: p });
                }
            }
            if index.insert(f.var(), i).is_some() {
                return Err(NumericError::Duplicate(f.var()));
            }
        }
        let sizes: Vec<usize> = self.factors.iter().map(Factor::size).collect();

        // tables[i][parent_config * size + value]
        let tables: Vec<Vec<f64>> = self
            .factors
            .iter()
            .map(|f| {
                let configs: usize = f.parents().iter().map(|p| sizes[index[p]]).product();
                let mut t = vec![0.0; configs * f.size()];
                for c in 0..configs {
                    let row = &mut t[c * f.size()..(c + 1) * f.size()];
                    match f {
                        Factor::Random { .. } => {
                            for x in row.iter_mut() {
                                *x = rng.random_range(0.05..1.0);
                            }
                            let s: f64 = row.iter().sum();
                            row.iter_mut().for_each(|x| *x /= s);
                        }
                        Factor::Function { .. } => {
                            row[rng.random_range(0..f.size())] = 1.0;
                        }
                    }
                }
                t
            })
            .collect();

        let total: usize = sizes.iter().product();
        let mut probs = Vec::with_capacity(total);
        let mut digits = vec![0usize; sizes.len()];
        for _ in 0..total {
            let mut p = 1.0;
            for (i, f) in self.factors.iter().enumerate() {
                let config = f
                    .parents()
                    .iter()
                    .fold(0, |acc, v| acc * sizes[index[v]] + digits[index[v]]);
                p *= tables[i][config * f.size() + digits[i]];
            }
            probs.push(p);
            for i in (0..digits.len()).rev() {
                digits[i] += 1;
                if digits[i] < sizes[i] {
                    break;
                }
                digits[i] = 0;
            }
        }
        // Absorb rounding so the table passes the normalization check.
        let s: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= s);
        DiscreteJointDistribution::new(self.factors.iter().map(Factor::var).collect(), sizes, probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::message_tree::MessageId;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn x(k: u32) -> Var {
        if k == 0 {
            Var::X(MessageId::ROOT)
        } else {
            Var::X(MessageId::new(k, 1))
        }
    }

    #[test]
    fn independent_variables_share_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = Factorization::new()
            .random(x(0), 3, &[])
            .random(Var::Y(1), 2, &[])
            .sample(&mut rng)
            .unwrap();
        let e: MiExpr = "I(X[0];Y[1])".parse().unwrap();
        assert!(numeric_mi(&e, &d).unwrap().abs() < 1e-9);
    }

    #[test]
    fn copy_of_uniform_carries_two_bits() {
        let probs = (0..16).map(|i| if i / 4 == i % 4 { 0.25 } else { 0.0 }).collect();
        let d = DiscreteJointDistribution::new(vec![x(0), Var::Y(1)], vec![4, 4], probs).unwrap();
        let e: MiExpr = "I(X[0];Y[1])".parse().unwrap();
        assert!((numeric_mi(&e, &d).unwrap() - 2.0).abs() < 1e-12);
        let h: MiExpr = "H(Y[1]|X[0])".parse().unwrap();
        assert!(numeric_mi(&h, &d).unwrap().abs() < 1e-12);
    }

    #[test]
    fn missing_label_is_reported() {
        let d = DiscreteJointDistribution::new(vec![x(0)], vec![2], vec![0.5, 0.5]).unwrap();
        let e: MiExpr = "I(X[0];Y[1])".parse().unwrap();
        assert_eq!(numeric_mi(&e, &d), Err(NumericError::MissingLabel(Var::Y(1))));
    }

    #[test]
    fn rejects_unnormalized_tables() {
        assert!(matches!(
            DiscreteJointDistribution::new(vec![x(0)], vec![2], vec![0.5, 0.6]),
            Err(NumericError::NotNormalized(_))
        ));
    }

    #[test]
    fn function_factor_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = Factorization::new()
            .random(x(1), 3, &[])
            .random(x(2), 2, &[x(1)])
            .function(Var::Y(2), 3, &[x(1), x(2)])
            .sample(&mut rng)
            .unwrap();
        let h: MiExpr = "H(Y[2]|X[1,1],X[2,1])".parse().unwrap();
        assert!(numeric_mi(&h, &d).unwrap().abs() < 1e-12);
    }
}
