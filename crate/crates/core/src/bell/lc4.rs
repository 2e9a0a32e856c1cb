//! The eight three-party inequalities of the four-vertex path state. Each
//! has four stabilizer-element terms, classical bound 2 and quantum value 4;
//! the second one is the standard anchored form, the rest regroup qubits 1
//! and 2 into one party, and the last four mirror the first four under the
//! path reversal 1<->4, 2<->3.

use crate::error::Result;
use crate::graph::{self, Graph};
use crate::pauli::Letter::{self, X, Y, Z};
use crate::pauli::PauliSum;

use super::{
    expand, relabelled, single_term, theorem1_operator, BellInequality, ObservableMap,
    PartyLayout, TwoSettingExpression,
};

struct MemberSpec {
    parties: [Vec<usize>; 3],
    observables: [[Vec<(usize, Letter)>; 2]; 3],
    terms: [(f64, [u8; 3]); 4],
    generator_subsets: [Vec<usize>; 4],
}

fn build_member(g: &Graph, spec: MemberSpec) -> Result<BellInequality> {
    let n = g.n();
    let expression = TwoSettingExpression::new(
        3,
        spec.terms.iter().map(|(c, choices)| (*c, choices.to_vec())).collect(),
    )?;
    let mut observables = Vec::with_capacity(3);
    for [first, second] in &spec.observables {
        observables.push([single_term(n, first)?, single_term(n, second)?]);
    }
    let observables = ObservableMap::new(n, observables)?;
    let pauli_form = expand(&expression, &observables)?;

    let mut subset_terms = Vec::with_capacity(4);
    for subset in &spec.generator_subsets {
        subset_terms.push((1.0, g.stabilizer_element(subset)?));
    }
    let from_subsets = PauliSum::from_terms(n, subset_terms)?;
    debug_assert_eq!(pauli_form, from_subsets);

    let quantum = g.graph_state_expectation_sum(&pauli_form)?;
    debug_assert_eq!(quantum, 4.0);

    BellInequality::new(
        expression,
        PartyLayout::new(spec.parties.to_vec())?,
        observables,
        2.0,
        quantum,
        Some(pauli_form),
    )
}

/// Builds all eight inequalities, in a fixed order.
pub fn lc4_set() -> Result<Vec<BellInequality>> {
    let g = graph::path(4)?;
    let mut members = Vec::with_capacity(8);

    members.push(build_member(
        &g,
        MemberSpec {
            parties: [vec![1, 2], vec![3], vec![4]],
            observables: [
                [vec![(1, X)], vec![(1, Z), (2, Y)]],
                [vec![(3, X)], vec![(3, Y)]],
                [vec![(4, Z)], vec![(4, Y)]],
            ],
            terms: [
                (1.0, [0, 0, 0]),
                (1.0, [1, 1, 0]),
                (1.0, [0, 1, 1]),
                (-1.0, [1, 0, 1]),
            ],
            generator_subsets: [vec![1, 3], vec![2, 3], vec![1, 3, 4], vec![2, 3, 4]],
        },
    )?);

    members.push(theorem1_operator(&g, 3, &[2, 4])?);

    members.push(build_member(
        &g,
        MemberSpec {
            parties: [vec![1, 2], vec![3], vec![4]],
            observables: [
                [vec![(1, X)], vec![(1, Y), (2, X)]],
                [vec![(3, X)], vec![(3, Y)]],
                [vec![(4, Z)], vec![(4, Y)]],
            ],
            terms: [
                (1.0, [0, 0, 0]),
                (-1.0, [1, 1, 0]),
                (1.0, [0, 1, 1]),
                (1.0, [1, 0, 1]),
            ],
            generator_subsets: [vec![1, 3], vec![1, 2, 3], vec![1, 3, 4], vec![1, 2, 3, 4]],
        },
    )?);

    members.push(build_member(
        &g,
        MemberSpec {
            parties: [vec![1, 2], vec![3], vec![4]],
            observables: [
                [vec![(2, Z)], vec![(1, Y), (2, X)]],
                [vec![(3, X)], vec![(3, Y)]],
                [vec![(4, Z)], vec![(4, Y)]],
            ],
            terms: [
                (1.0, [0, 0, 0]),
                (-1.0, [1, 1, 0]),
                (1.0, [0, 1, 1]),
                (1.0, [1, 0, 1]),
            ],
            generator_subsets: [vec![3], vec![1, 2, 3], vec![3, 4], vec![1, 2, 3, 4]],
        },
    )?);

    let reversal = [4, 3, 2, 1];
    for k in 0..4 {
        members.push(relabelled(&members[k], &reversal)?);
    }
    Ok(members)
}
