//! Exhaustive optimization over deterministic local-hidden-variable
//! assignments.
//!
//! Only variables that occur in the optimized object are enumerated: for a
//! Pauli sum one +-1 variable per (qubit, letter) pair that appears, for an
//! abstract expression one per (party, setting) pair. Sums of +-1 terms are
//! evaluated in f64, which is exact for integer coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::bell::{BellInequality, TwoSettingExpression};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pauli::{Letter, PauliSum};

/// Enumeration is capped at 2^26 assignments.
pub const MAX_VARIABLES: usize = 26;

/// Facet tests are capped at this many parties.
pub const MAX_FACET_PARTIES: usize = 5;

const PARALLEL_CUTOFF: usize = 18;
const BLOCK_BITS: usize = 14;

/// Outcome of a classical-bound search against a quantum value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsReport {
    pub classical_max: f64,
    pub quantum_value: f64,
    pub violation: f64,
    pub argmax: BTreeMap<String, i8>,
    pub lemma1_used: bool,
}

/// Outcome of a facet test on a two-setting expression.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FacetReport {
    pub saturating_count: usize,
    pub affine_rank: usize,
    pub is_facet: bool,
}

fn evaluate(terms: &[(f64, u64)], assignment: u64) -> f64 {
    let mut value = 0.0;
    for &(coeff, mask) in terms {
        if (mask & assignment).count_ones() % 2 == 0 {
            value += coeff;
        } else {
            value -= coeff;
        }
    }
    value
}

fn best_in_range(terms: &[(f64, u64)], range: Range<u64>) -> (f64, u64) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = u64::MAX;
    for assignment in range {
        let value = evaluate(terms, assignment).abs();
        if value > best {
            best = value;
            arg = assignment;
        }
    }
    (best, arg)
}

/// Maximum of |sum of coeff * product of assigned variables| over all 2^v
/// assignments, with the smallest maximizing assignment (bit 0 encodes +1).
fn enumerate_abs_max(variables: usize, terms: &[(f64, u64)]) -> Result<(f64, u64)> {
    if variables > MAX_VARIABLES {
        return Err(Error::ResourceCap(variables, MAX_VARIABLES));
    }
    let total = 1u64 << variables;
    if variables <= PARALLEL_CUTOFF {
        return Ok(best_in_range(terms, 0..total));
    }
    let blocks = total >> BLOCK_BITS;
    Ok((0..blocks)
        .into_par_iter()
        .map(|block| {
            best_in_range(terms, block << BLOCK_BITS..(block + 1) << BLOCK_BITS)
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |left, right| {
                if right.0 > left.0 || (right.0 == left.0 && right.1 < left.1) {
                    right
                } else {
                    left
                }
            },
        ))
}

fn letter_rank(letter: Letter) -> u8 {
    match letter {
        Letter::I => 0,
        Letter::X => 1,
        Letter::Y => 2,
        Letter::Z => 3,
    }
}

fn pauli_variable_name(qubit: usize, letter: Letter) -> String {
    format!("{}{}", letter.as_char(), qubit)
}

/// The distinct (qubit, letter) pairs of a sum, in (qubit, X < Y < Z) order.
fn pauli_variables(sum: &PauliSum) -> Vec<(usize, Letter)> {
    let mut seen: BTreeSet<(usize, u8)> = BTreeSet::new();
    for (_, p) in sum.terms() {
        for qubit in 1..=sum.n() {
            let letter = p.letter(qubit);
            if letter != Letter::I {
                seen.insert((qubit, letter_rank(letter)));
            }
        }
    }
    seen.iter()
        .map(|&(qubit, rank)| {
            let letter = match rank {
                1 => Letter::X,
                2 => Letter::Y,
                _ => Letter::Z,
            };
            (qubit, letter)
        })
        .collect()
}

/// Largest |LHV value| of a Pauli sum, with an assignment reaching it.
///
/// With a graph supplied, every term is first checked to be a positive
/// multiple of one of the graph state's stabilizer elements; the search may
/// then pin every Z variable to +1 without changing the maximum, which
/// shrinks the enumeration.
pub fn classical_max_sum(
    sum: &PauliSum,
    lemma1: Option<&Graph>,
) -> Result<(f64, BTreeMap<String, i8>)> {
    if sum.is_empty() {
        return Err(Error::ZeroClassicalBound);
    }
    if let Some(g) = lemma1 {
        if g.n() != sum.n() {
            return Err(Error::DimensionMismatch(g.n(), sum.n()));
        }
        for (coeff, p) in sum.terms() {
            let sign = g.graph_state_expectation(p)?;
            if sign == 0 || f64::from(sign) * coeff <= 0.0 {
                return Err(Error::NotAStabilizerSum { term: format!("{coeff} * {p}") });
            }
        }
    }

    let variables = pauli_variables(sum);
    let mut bit_of: BTreeMap<(usize, u8), usize> = BTreeMap::new();
    let mut free = 0usize;
    for &(qubit, letter) in &variables {
        let pinned = lemma1.is_some() && letter == Letter::Z;
        if !pinned {
            bit_of.insert((qubit, letter_rank(letter)), free);
            free += 1;
        }
    }

    let mut terms = Vec::with_capacity(sum.len());
    for (coeff, p) in sum.terms() {
        let mut mask = 0u64;
        for qubit in 1..=sum.n() {
            let letter = p.letter(qubit);
            if letter == Letter::I {
                continue;
            }
            if let Some(&bit) = bit_of.get(&(qubit, letter_rank(letter))) {
                mask |= 1 << bit;
            }
        }
        terms.push((*coeff, mask));
    }

    let (max, arg) = enumerate_abs_max(free, &terms)?;
    let mut argmax = BTreeMap::new();
    for &(qubit, letter) in &variables {
        let value = match bit_of.get(&(qubit, letter_rank(letter))) {
            Some(&bit) => {
                if arg >> bit & 1 == 0 {
                    1
                } else {
                    -1
                }
            }
            None => 1,
        };
        argmax.insert(pauli_variable_name(qubit, letter), value);
    }
    Ok((max, argmax))
}

/// Evaluates a Pauli sum at one +-1 assignment of its (qubit, letter)
/// variables. Every occurring variable must be present in the map.
pub fn classical_value(sum: &PauliSum, assignment: &BTreeMap<String, i8>) -> Result<f64> {
    let mut total = 0.0;
    for (coeff, p) in sum.terms() {
        let mut product = 1.0;
        for qubit in 1..=sum.n() {
            let letter = p.letter(qubit);
            if letter == Letter::I {
                continue;
            }
            let name = pauli_variable_name(qubit, letter);
            let value = assignment
                .get(&name)
                .ok_or_else(|| Error::Construction(format!("assignment misses {name}")))?;
            if *value != 1 && *value != -1 {
                return Err(Error::Construction(format!("{name} must be +1 or -1")));
            }
            product *= f64::from(*value);
        }
        total += coeff * product;
    }
    Ok(total)
}

fn product_observables(b: &BellInequality) -> bool {
    let obs = b.observables();
    for party in 0..obs.party_count() {
        for setting in 0..2 {
            let o = obs.observable(party, setting);
            if o.len() != 1 {
                return false;
            }
            let (coeff, _) = o.terms()[0];
            if (coeff.abs() - 1.0).abs() > 1e-12 {
                return false;
            }
        }
    }
    true
}

/// Classical bound, quantum value and violation of an inequality. When every
/// observable is a single Pauli string, the search runs over per-qubit letter
/// variables, which is the classical quantity the operator form bounds.
/// Composite observables (rotated settings) are searched per party and
/// setting instead: assigning letters independently would overshoot the
/// two-setting bound those constructions are chosen for.
pub fn violation_report(b: &BellInequality, lemma1: Option<&Graph>) -> Result<BoundsReport> {
    let (classical_max, argmax, lemma1_used) = if product_observables(b) {
        let sum = b
            .pauli_form()
            .ok_or_else(|| Error::Construction("inequality has no expanded operator".into()))?;
        let (max, arg) = classical_max_sum(sum, lemma1)?;
        (max, arg, lemma1.is_some())
    } else {
        if lemma1.is_some() {
            return Err(Error::Construction(
                "the Z-pinning restriction needs product observables".into(),
            ));
        }
        let (max, arg) = classical_max_settings(b.expression())?;
        (max, arg, false)
    };
    if classical_max == 0.0 {
        return Err(Error::ZeroClassicalBound);
    }
    Ok(BoundsReport {
        classical_max,
        quantum_value: b.quantum_value(),
        violation: b.quantum_value() / classical_max,
        argmax,
        lemma1_used,
    })
}

fn setting_variables(e: &TwoSettingExpression) -> Vec<(usize, u8)> {
    let mut vars = Vec::new();
    for party in 0..e.party_count() {
        for setting in 0..2u8 {
            if e.setting_occurs(party, setting) {
                vars.push((party, setting));
            }
        }
    }
    vars
}

/// Largest |LHV value| of an abstract expression over its occurring
/// (party, setting) variables, with an assignment reaching it.
pub fn classical_max_settings(
    e: &TwoSettingExpression,
) -> Result<(f64, BTreeMap<String, i8>)> {
    if e.terms().is_empty() {
        return Err(Error::ZeroClassicalBound);
    }
    let variables = setting_variables(e);
    let mut bit_of = BTreeMap::new();
    for (bit, &key) in variables.iter().enumerate() {
        bit_of.insert(key, bit);
    }
    let terms: Vec<(f64, u64)> = e
        .terms()
        .iter()
        .map(|(coeff, choices)| {
            let mut mask = 0u64;
            for (party, &choice) in choices.iter().enumerate() {
                mask |= 1 << bit_of[&(party, choice)];
            }
            (*coeff, mask)
        })
        .collect();
    let (max, arg) = enumerate_abs_max(variables.len(), &terms)?;
    let mut argmax = BTreeMap::new();
    for (bit, &(party, setting)) in variables.iter().enumerate() {
        let name = format!("{}{}", e.setting_name(party, setting as usize), party + 1);
        argmax.insert(name, if arg >> bit & 1 == 0 { 1 } else { -1 });
    }
    Ok((max, argmax))
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Affine rank of a set of integer vectors: the linear rank of the
/// differences against the first one, by fraction-free elimination.
fn affine_rank(vectors: &[Vec<i8>]) -> usize {
    if vectors.len() <= 1 {
        return 0;
    }
    let base = &vectors[0];
    let cols = base.len();
    let mut rows: Vec<Vec<i64>> = vectors[1..]
        .iter()
        .map(|v| v.iter().zip(base).map(|(a, b)| i64::from(*a) - i64::from(*b)).collect())
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot_row) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, pivot_row);
        let pivot = rows[rank][col];
        for r in rank + 1..rows.len() {
            let factor = rows[r][col];
            if factor == 0 {
                continue;
            }
            for c in col..cols {
                rows[r][c] = rows[r][c] * pivot - rows[rank][c] * factor;
            }
            let row_gcd = rows[r].iter().fold(0, |acc, &x| gcd(acc, x));
            if row_gcd > 1 {
                for x in &mut rows[r] {
                    *x /= row_gcd;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Tests whether an integer-coefficient expression supports a facet of the
/// full-correlation polytope: the deterministic correlation vectors that
/// reach the classical bound must have affine rank 2^P - 1. Variables that
/// never occur in a term are fixed to +1 when building the vectors.
pub fn facet_test(e: &TwoSettingExpression) -> Result<FacetReport> {
    let p = e.party_count();
    if p > MAX_FACET_PARTIES {
        return Err(Error::ResourceCap(p, MAX_FACET_PARTIES));
    }
    if e.terms().is_empty() {
        return Err(Error::ZeroClassicalBound);
    }
    if e.integer_coefficients().is_none() {
        return Err(Error::NonIntegerCoefficients);
    }

    let variables = setting_variables(e);
    let mut bit_of: BTreeMap<(usize, u8), usize> = BTreeMap::new();
    for (bit, &key) in variables.iter().enumerate() {
        bit_of.insert(key, bit);
    }
    let terms: Vec<(f64, u64)> = e
        .terms()
        .iter()
        .map(|(coeff, choices)| {
            let mut mask = 0u64;
            for (party, &choice) in choices.iter().enumerate() {
                mask |= 1 << bit_of[&(party, choice)];
            }
            (*coeff, mask)
        })
        .collect();

    let total = 1u64 << variables.len();
    let mut bound = f64::NEG_INFINITY;
    for assignment in 0..total {
        bound = bound.max(evaluate(&terms, assignment));
    }

    let coords = 1usize << p;
    let mut distinct: BTreeSet<Vec<i8>> = BTreeSet::new();
    for assignment in 0..total {
        if evaluate(&terms, assignment) != bound {
            continue;
        }
        let mut vector = Vec::with_capacity(coords);
        for pattern in 0..coords {
            let mut product: i8 = 1;
            for party in 0..p {
                let setting = (pattern >> party & 1) as u8;
                if let Some(&bit) = bit_of.get(&(party, setting)) {
                    if assignment >> bit & 1 == 1 {
                        product = -product;
                    }
                }
            }
            vector.push(product);
        }
        distinct.insert(vector);
    }

    let vectors: Vec<Vec<i8>> = distinct.into_iter().collect();
    let rank = affine_rank(&vectors);
    Ok(FacetReport {
        saturating_count: vectors.len(),
        affine_rank: rank,
        is_facet: rank == coords - 1,
    })
}
