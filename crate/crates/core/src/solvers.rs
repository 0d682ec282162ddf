//! Solution concepts: Shapley value, the pessimistic recursive core, the
//! minimal claim function derived from it, and the extended Shapley value
//! of a partition function.

use std::collections::HashMap;

use num::{BigInt, BigRational, ToPrimitive, Zero};
use serde::Serialize;

use crate::coalition::{factorial, partitions_of, Coalition, Partition};
use crate::error::GameError;
use crate::game::{CharacteristicFunction, PartitionFunction};
use crate::lp::{BoundedSimplex, LinearProgram, LpSolver};
use crate::scenario::Matrix;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

/// Shapley value in exact rational arithmetic. Each input value is taken
/// as the exact binary rational it represents.
pub fn shapley_exact(v: &CharacteristicFunction) -> Vec<BigRational> {
    let n = v.player_count;
    let n_fact = BigInt::from(factorial(n));
    let weights: Vec<BigRational> = (0..n)
        .map(|s| BigRational::new(BigInt::from(factorial(s) * factorial(n - s - 1)), n_fact.clone()))
        .collect();
    let values: Vec<BigRational> = v.values.iter().map(|&x| exact(x)).collect();
    let grand = v.grand();
    (0..n)
        .map(|i| {
            let others = grand.difference(Coalition::singleton(i));
            let mut total = BigRational::zero();
            // The empty coalition is not yielded by subsets(); handle it first.
            let with_i = Coalition::singleton(i);
            total += &weights[0] * (&values[with_i.bits() as usize] - &values[0]);
            for c in others.subsets() {
                let marginal = &values[c.with(i).bits() as usize] - &values[c.bits() as usize];
                total += &weights[c.len()] * marginal;
            }
            total
        })
        .collect()
}

pub fn shapley(v: &CharacteristicFunction) -> Vec<f64> {
    shapley_exact(v)
        .iter()
        .map(|x| x.to_f64().unwrap_or(f64::NAN))
        .collect()
}

fn strictly_greater(a: f64, b: f64) -> bool {
    a > b + 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// How a coalition's value is divided among its members when checking
/// whether a subset of them would deviate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffDivision {
    /// A partition is stable if some division of every block's value
    /// leaves no deviating subset strictly better off.
    #[default]
    CoreImputation,
    /// Members receive equal shares of their block's value.
    EqualSplit,
}

/// Recursive-core stability over a partition function, memoized on the
/// residual player set and the fixed arrangement of everyone else.
pub struct RecursiveCore<'a> {
    pf: &'a PartitionFunction,
    fallback: bool,
    division: PayoffDivision,
    memo: HashMap<(Coalition, Partition), Vec<Partition>>,
    empty_cores: Vec<(Coalition, Partition)>,
}

impl<'a> RecursiveCore<'a> {
    pub fn new(pf: &'a PartitionFunction, pessimistic_fallback: bool) -> Self {
        Self::with_division(pf, pessimistic_fallback, PayoffDivision::default())
    }

    pub fn with_division(pf: &'a PartitionFunction, pessimistic_fallback: bool, division: PayoffDivision) -> Self {
        RecursiveCore {
            pf,
            fallback: pessimistic_fallback,
            division,
            memo: HashMap::new(),
            empty_cores: Vec::new(),
        }
    }

    fn value(&self, c: Coalition, full: &Partition) -> f64 {
        self.pf
            .value(c, full)
            .expect("partition function covers every embedded coalition")
    }

    /// Residual games met so far whose stable set was empty.
    pub fn empty_cores(&self) -> &[(Coalition, Partition)] {
        &self.empty_cores
    }

    /// Stable partitions of `players` when everyone else is arranged as
    /// `outside`. A subset `D` blocks an outcome when, whatever stable
    /// arrangement the remaining players settle into, it earns strictly
    /// more than its members currently receive.
    pub fn stable_partitions(&mut self, players: Coalition, outside: &Partition) -> Vec<Partition> {
        let key = (players, outside.clone());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        // What each subset can secure by deviating does not depend on the
        // partition being tested.
        let guarantees: Vec<(Coalition, f64)> = players
            .subsets()
            .map(|d| (d, self.guarantee(players, outside, d)))
            .collect();
        let mut stable = Vec::new();
        for q in partitions_of(players) {
            let full = outside.merge(&q).expect("disjoint supports");
            let block_values: Vec<f64> = q.blocks().iter().map(|b| self.value(*b, &full)).collect();
            let ok = match self.division {
                PayoffDivision::EqualSplit => guarantees.iter().all(|&(d, g)| {
                    let current: f64 = q
                        .blocks()
                        .iter()
                        .zip(&block_values)
                        .map(|(b, v)| v * b.intersection(d).len() as f64 / b.len() as f64)
                        .sum();
                    !strictly_greater(g, current)
                }),
                PayoffDivision::CoreImputation => imputation_exists(players, &q, &block_values, &guarantees),
            };
            if ok {
                stable.push(q);
            }
        }
        self.memo.insert(key, stable.clone());
        stable
    }

    /// Residual reactions after a deviation; `None` when the residual core
    /// is empty and no fallback applies.
    fn reactions(&mut self, residual: Coalition, outside: &Partition) -> Option<Vec<Partition>> {
        if residual.is_empty() {
            return Some(partitions_of(residual));
        }
        let st = self.stable_partitions(residual, outside);
        if !st.is_empty() {
            return Some(st);
        }
        let key = (residual, outside.clone());
        if !self.empty_cores.contains(&key) {
            self.empty_cores.push(key);
        }
        self.fallback.then(|| partitions_of(residual))
    }

    /// Worst value `deviator` obtains over the stable reactions of the
    /// players it leaves behind. Infinite when the residual core is empty
    /// and there is no fallback: nothing can stop the deviation.
    fn guarantee(&mut self, players: Coalition, outside: &Partition, deviator: Coalition) -> f64 {
        let residual = players.difference(deviator);
        let fixed = outside
            .merge(&Partition::new(vec![deviator]).expect("nonempty"))
            .expect("disjoint");
        let Some(reactions) = self.reactions(residual, &fixed) else {
            return f64::INFINITY;
        };
        reactions
            .iter()
            .map(|r| {
                let full = fixed.merge(r).expect("disjoint");
                self.value(deviator, &full)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Is there a payoff vector that splits each block's value among its
/// members and gives every subset at least its guarantee?
fn imputation_exists(players: Coalition, q: &Partition, block_values: &[f64], guarantees: &[(Coalition, f64)]) -> bool {
    if guarantees.iter().any(|(_, g)| g.is_infinite()) {
        return false;
    }
    let members: Vec<usize> = players.members().collect();
    let pos = |i: usize| members.iter().position(|&m| m == i).expect("member");
    let k = members.len();
    let d = guarantees.len();
    let scale = 1.0
        + block_values
            .iter()
            .chain(guarantees.iter().map(|(_, g)| g))
            .fold(0.0f64, |a, v| a.max(v.abs()));
    // Free payoffs x = x+ - x-, and one surplus variable per subset.
    let bound = 4.0 * (k as f64 + 1.0) * scale;
    let vars = 2 * k + d;
    let rows = q.len() + d;
    let mut eq = Matrix::zeros(rows, vars);
    let mut rhs = Vec::with_capacity(rows);
    for (r, (b, v)) in q.blocks().iter().zip(block_values).enumerate() {
        for i in b.members() {
            eq.set(r, pos(i), 1.0);
            eq.set(r, k + pos(i), -1.0);
        }
        rhs.push(*v);
    }
    for (t, (dev, g)) in guarantees.iter().enumerate() {
        let r = q.len() + t;
        for i in dev.members() {
            eq.set(r, pos(i), 1.0);
            eq.set(r, k + pos(i), -1.0);
        }
        eq.set(r, 2 * k + t, -1.0);
        // Equality counts as unblocked: deviation must be strictly better.
        rhs.push(g - 1e-9 * (1.0 + g.abs()));
    }
    let mut upper = vec![bound; vars];
    for u in upper.iter_mut().skip(2 * k) {
        *u = 4.0 * bound * (k as f64 + 1.0);
    }
    let lp = LinearProgram {
        costs: vec![0.0; vars],
        equalities: eq,
        rhs,
        upper,
    };
    BoundedSimplex::default().solve(&lp, 1e-9).is_ok()
}

/// Stable partitions of `players` given the fixed arrangement `outside`
/// of the remaining players.
pub fn recursive_core_stable_partitions(
    pf: &PartitionFunction,
    players: Coalition,
    outside: &Partition,
    pessimistic_fallback: bool,
) -> Vec<Partition> {
    RecursiveCore::new(pf, pessimistic_fallback).stable_partitions(players, outside)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StableResidual {
    pub coalition: Coalition,
    pub partitions: Vec<Partition>,
    /// True when the residual core was empty and every residual partition
    /// was considered instead.
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimalClaim {
    pub game: CharacteristicFunction,
    pub stable: Vec<StableResidual>,
    pub warnings: Vec<String>,
}

/// Minimal claim function: each coalition gets its worst embedded value
/// over the stable arrangements of the players outside it.
pub fn minimal_claim(pf: &PartitionFunction, pessimistic_fallback: bool) -> Result<MinimalClaim, GameError> {
    minimal_claim_with(pf, pessimistic_fallback, PayoffDivision::default())
}

pub fn minimal_claim_with(
    pf: &PartitionFunction,
    pessimistic_fallback: bool,
    division: PayoffDivision,
) -> Result<MinimalClaim, GameError> {
    let n = pf.player_count;
    let grand = pf.grand();
    let mut core = RecursiveCore::with_division(pf, pessimistic_fallback, division);
    let mut values = vec![0.0; 1 << n];
    let mut stable = Vec::new();
    let mut warnings = Vec::new();
    for c in grand.subsets() {
        let outside = Partition::new(vec![c]).expect("nonempty");
        if c == grand {
            values[c.bits() as usize] = pf.value(c, &outside).ok_or_else(|| GameError::MissingValue {
                coalition: format!("{c:?}"),
                partition: format!("{outside:?}"),
            })?;
            continue;
        }
        let residual = grand.difference(c);
        let mut st = core.stable_partitions(residual, &outside);
        let fallback = st.is_empty();
        if fallback {
            if !pessimistic_fallback {
                return Err(GameError::EmptyRecursiveCore(format!("{residual:?} given {c:?}")));
            }
            warnings.push(format!(
                "recursive core of residual game {residual:?} (after {c:?} forms) is empty; minimum taken over all residual partitions"
            ));
            st = partitions_of(residual);
        }
        let v = st
            .iter()
            .map(|q| {
                let full = outside.merge(q).expect("disjoint");
                pf.value(c, &full).expect("embedded value")
            })
            .fold(f64::INFINITY, f64::min);
        values[c.bits() as usize] = v;
        stable.push(StableResidual {
            coalition: c,
            partitions: st,
            fallback,
        });
    }
    for (players, outside) in core.empty_cores() {
        let msg = format!("empty recursive core in nested residual game {players:?} given {outside:?}");
        if !warnings.contains(&msg) {
            warnings.push(msg);
        }
    }
    Ok(MinimalClaim {
        game: CharacteristicFunction {
            player_count: n,
            values,
            reference_costs: pf.reference_costs.clone(),
            records: None,
        },
        stable,
        warnings,
    })
}

/// Auxiliary game where each coalition faces the rest of the players
/// united: `w(C) = v_{C, N\C}(C)`, `w(N) = v_{N}(N)`.
pub fn complement_embedding(pf: &PartitionFunction) -> CharacteristicFunction {
    let n = pf.player_count;
    let grand = pf.grand();
    let mut values = vec![0.0; 1 << n];
    for c in grand.subsets() {
        let rest = grand.difference(c);
        let blocks = if rest.is_empty() { vec![c] } else { vec![c, rest] };
        let p = Partition::new(blocks).expect("disjoint");
        values[c.bits() as usize] = pf.value(c, &p).expect("embedded value");
    }
    CharacteristicFunction {
        player_count: n,
        values,
        reference_costs: pf.reference_costs.clone(),
        records: None,
    }
}

/// Extended Shapley value with trivial prior coalition structure.
pub fn extended_shapley(pf: &PartitionFunction) -> Vec<f64> {
    shapley(&complement_embedding(pf))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMethod {
    CffShapley,
    PffMinimalClaimShapley,
    PffExtendedShapley,
}

impl PowerMethod {
    pub fn tag(self) -> &'static str {
        match self {
            PowerMethod::CffShapley => "cff_shapley",
            PowerMethod::PffMinimalClaimShapley => "pff_minimal_claim_shapley",
            PowerMethod::PffExtendedShapley => "pff_extended_shapley",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StableEntry {
    pub coalition: String,
    pub stable_residual_partitions: Vec<String>,
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerReport {
    pub method: PowerMethod,
    pub players: Vec<String>,
    pub shapley: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stable_partitions: Option<Vec<StableEntry>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PowerReport {
    pub fn cff(players: &[String], v: &CharacteristicFunction) -> Self {
        PowerReport {
            method: PowerMethod::CffShapley,
            players: players.to_vec(),
            shapley: shapley(v),
            stable_partitions: None,
            warnings: Vec::new(),
        }
    }

    pub fn minimal_claim(players: &[String], mc: &MinimalClaim) -> Self {
        let stable = mc
            .stable
            .iter()
            .map(|s| StableEntry {
                coalition: s.coalition.label(players),
                stable_residual_partitions: s.partitions.iter().map(|p| p.label(players)).collect(),
                fallback: s.fallback,
            })
            .collect();
        PowerReport {
            method: PowerMethod::PffMinimalClaimShapley,
            players: players.to_vec(),
            shapley: shapley(&mc.game),
            stable_partitions: Some(stable),
            warnings: mc.warnings.clone(),
        }
    }

    pub fn extended(players: &[String], pf: &PartitionFunction) -> Self {
        PowerReport {
            method: PowerMethod::PffExtendedShapley,
            players: players.to_vec(),
            shapley: extended_shapley(pf),
            stable_partitions: None,
            warnings: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(m: &[usize]) -> Coalition {
        Coalition::from_members(m.iter().copied())
    }

    fn p(blocks: &[&[usize]]) -> Partition {
        Partition::new(blocks.iter().map(|b| c(b)).collect()).unwrap()
    }

    fn cff(pairs: &[(&[usize], f64)]) -> CharacteristicFunction {
        CharacteristicFunction::from_pairs(3, pairs.iter().map(|(m, v)| (c(m), *v))).unwrap()
    }

    /// Partition function with explicit per-partition values (A=0,B=1,C=2).
    fn blocking_game() -> PartitionFunction {
        PartitionFunction::from_values(
            3,
            [
                (p(&[&[0], &[1], &[2]]), vec![0.0, 3.0, 0.0]),
                (p(&[&[0, 1], &[2]]), vec![2.0, 1.0]),
                (p(&[&[0, 2], &[1]]), vec![2.0, 2.0]),
                (p(&[&[0], &[1, 2]]), vec![1.0, 2.0]),
                (p(&[&[0, 1, 2]]), vec![4.0]),
            ],
        )
        .unwrap()
    }

    fn tpa_table() -> PartitionFunction {
        PartitionFunction::from_values(
            3,
            [
                (p(&[&[0, 1, 2]]), vec![86.0]),
                (p(&[&[0, 1], &[2]]), vec![58.0, 12.0]),
                (p(&[&[0, 2], &[1]]), vec![16.0, 0.0]),
                (p(&[&[0], &[1, 2]]), vec![0.0, 0.0]),
                (p(&[&[0], &[1], &[2]]), vec![0.0, 0.0, 0.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn shapley_of_example_games() {
        let t1 = cff(&[(&[0, 1], 10.0), (&[0, 2], 16.0), (&[0, 1, 2], 86.0)]);
        assert_eq!(shapley(&t1), vec![33.0, 25.0, 28.0]);
        let t3 = cff(&[(&[0, 1], 58.0), (&[0, 2], 16.0), (&[0, 1, 2], 86.0)]);
        assert_eq!(shapley(&t3), vec![41.0, 33.0, 12.0]);
        let t5 = cff(&[(&[2], 12.0), (&[0, 1], 58.0), (&[0, 2], 16.0), (&[0, 1, 2], 86.0)]);
        assert_eq!(shapley(&t5), vec![39.0, 31.0, 16.0]);
    }

    #[test]
    fn residual_core_of_blocking_game() {
        let pf = blocking_game();
        let st = recursive_core_stable_partitions(&pf, c(&[1, 2]), &p(&[&[0]]), true);
        assert_eq!(st, vec![p(&[&[1], &[2]])]);
        let single = recursive_core_stable_partitions(&pf, c(&[2]), &p(&[&[0, 1]]), true);
        assert_eq!(single, vec![p(&[&[2]])]);
    }

    #[test]
    fn minimal_claim_of_blocking_game() {
        let mc = minimal_claim(&blocking_game(), true).unwrap();
        assert_eq!(mc.game.value(c(&[0])), 0.0);
        assert_eq!(mc.game.value(c(&[0, 1, 2])), 4.0);
    }

    #[test]
    fn minimal_claim_of_tpa_table() {
        let pf = tpa_table();
        let mc = minimal_claim(&pf, true).unwrap();
        let expected = [0.0, 0.0, 12.0, 58.0, 16.0, 0.0, 86.0];
        let order = [c(&[0]), c(&[1]), c(&[2]), c(&[0, 1]), c(&[0, 2]), c(&[1, 2]), c(&[0, 1, 2])];
        for (coal, v) in order.iter().zip(expected) {
            assert_eq!(mc.game.value(*coal), v, "{coal:?}");
        }
        let st = recursive_core_stable_partitions(&pf, c(&[2]), &p(&[&[0, 1]]), true);
        assert_eq!(st, vec![p(&[&[2]])]);
        assert!(mc.warnings.is_empty());
    }

    #[test]
    fn extended_shapley_of_tpa_table() {
        assert_eq!(extended_shapley(&tpa_table()), vec![39.0, 31.0, 16.0]);
    }

    #[test]
    fn division_rule_matters() {
        // A alone secures 8 while the pair is worth 10: equal split leaves
        // A short, but giving A at least 8 keeps the pair together.
        let pf = PartitionFunction::from_values(
            2,
            [(p(&[&[0, 1]]), vec![10.0]), (p(&[&[0], &[1]]), vec![8.0, 0.0])],
        )
        .unwrap();
        let grand = Coalition::grand(2);
        let core = RecursiveCore::with_division(&pf, true, PayoffDivision::CoreImputation).stable_partitions(grand, &p(&[]));
        assert_eq!(core, vec![p(&[&[0, 1]])]);
        let split = RecursiveCore::with_division(&pf, true, PayoffDivision::EqualSplit).stable_partitions(grand, &p(&[]));
        assert!(split.is_empty());
    }

    #[test]
    fn equal_split_agrees_on_small_tables() {
        for pf in [blocking_game(), tpa_table()] {
            let a = minimal_claim_with(&pf, true, PayoffDivision::EqualSplit).unwrap();
            let b = minimal_claim_with(&pf, true, PayoffDivision::CoreImputation).unwrap();
            assert_eq!(a.game.values, b.game.values);
        }
    }

    #[test]
    fn empty_core_fallback() {
        // Three-player majority-like game: every two-player coalition is
        // worth more than the grand coalition split, so nothing is stable.
        let pf = PartitionFunction::from_values(
            3,
            [
                (p(&[&[0, 1, 2]]), vec![0.0]),
                (p(&[&[0, 1], &[2]]), vec![6.0, 0.0]),
                (p(&[&[0, 2], &[1]]), vec![6.0, 0.0]),
                (p(&[&[0], &[1, 2]]), vec![0.0, 6.0]),
                (p(&[&[0], &[1], &[2]]), vec![0.0, 0.0, 0.0]),
            ],
        )
        .unwrap();
        let st = recursive_core_stable_partitions(&pf, Coalition::grand(3), &p(&[]), true);
        assert!(st.is_empty());
        // Two-player residuals still have a core, so minimal claim is total.
        assert!(minimal_claim(&pf, false).is_ok());
    }
}
