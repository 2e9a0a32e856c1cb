//! Products of Bell inequalities acting on disjoint or Z-compatible parts of
//! one graph, and the per-family composites they generate.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{self, Family, Graph};
use crate::pauli::Letter;

use super::{
    fc3_operator, theorem1_operator, BellInequality, ObservableMap, PartyLayout,
    TwoSettingExpression,
};

const MAX_COMPOSITE_TERMS: u128 = 1 << 20;

/// Multiplies Bell inequalities into one. Requires that wherever two parts
/// touch the same qubit, every part acting there uses one identical Pauli
/// letter; then classical bounds and quantum values both multiply.
pub fn composite(parts: &[BellInequality]) -> Result<BellInequality> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Construction("composite of zero inequalities".into()))?;
    let n = first.n();
    let mut forms = Vec::with_capacity(parts.len());
    for part in parts {
        if part.n() != n {
            return Err(Error::DimensionMismatch(part.n(), n));
        }
        forms.push(part.pauli_form().ok_or_else(|| {
            Error::Construction("composite parts need expanded operators".into())
        })?);
    }

    for qubit in 1..=n {
        let mut acting: Vec<BTreeSet<char>> = Vec::new();
        for form in &forms {
            let letters: BTreeSet<char> = form
                .terms()
                .iter()
                .map(|(_, p)| p.letter(qubit))
                .filter(|&l| l != Letter::I)
                .map(|l| l.as_char())
                .collect();
            if !letters.is_empty() {
                acting.push(letters);
            }
        }
        if acting.len() >= 2 && (acting[0].len() != 1 || acting.iter().any(|s| *s != acting[0])) {
            return Err(Error::IncompatibleParts { qubit });
        }
    }

    let term_total: u128 = parts
        .iter()
        .map(|p| p.expression().terms().len() as u128)
        .product();
    if term_total > MAX_COMPOSITE_TERMS {
        return Err(Error::ResourceCap(term_total as usize, MAX_COMPOSITE_TERMS as usize));
    }

    let mut pauli_form = forms[0].clone();
    for form in &forms[1..] {
        pauli_form = pauli_form.mul(form)?;
    }

    let mut parties = Vec::new();
    let mut observables = Vec::new();
    let mut setting_names = Vec::new();
    for part in parts {
        parties.extend(part.layout().parties().iter().cloned());
        for k in 0..part.observables().party_count() {
            observables.push([
                part.observables().observable(k, 0).clone(),
                part.observables().observable(k, 1).clone(),
            ]);
            setting_names.push([
                part.expression().setting_name(k, 0).to_string(),
                part.expression().setting_name(k, 1).to_string(),
            ]);
        }
    }

    let mut terms: Vec<(f64, Vec<u8>)> = vec![(1.0, Vec::new())];
    for part in parts {
        let mut next = Vec::with_capacity(terms.len() * part.expression().terms().len());
        for (base_coeff, base) in &terms {
            for (coeff, choices) in part.expression().terms() {
                let mut combined = Vec::with_capacity(base.len() + choices.len());
                combined.extend_from_slice(base);
                combined.extend_from_slice(choices);
                next.push((base_coeff * coeff, combined));
            }
        }
        terms = next;
    }

    let expression =
        TwoSettingExpression::with_setting_names(parties.len(), setting_names, terms)?;
    let classical: f64 = parts.iter().map(|p| p.classical_bound()).product();
    let quantum: f64 = parts.iter().map(|p| p.quantum_value()).product();

    BellInequality::new(
        expression,
        PartyLayout::new(parties)?,
        ObservableMap::new(n, observables)?,
        classical,
        quantum,
        Some(pauli_form),
    )
}

/// Greedy block selection: scan vertices in ascending order, anchor a block
/// at the first unused vertex with two pairwise non-adjacent unused
/// neighbours, then retire the block's vertices and all their neighbours.
pub fn select_blocks(g: &Graph) -> Result<Vec<(usize, Vec<usize>)>> {
    let mut used = 0u64;
    let mut blocks = Vec::new();
    for i in 1..=g.n() {
        if used >> (i - 1) & 1 == 1 {
            continue;
        }
        let candidates: Vec<usize> = g
            .neighbours(i)?
            .into_iter()
            .filter(|&v| used >> (v - 1) & 1 == 0)
            .collect();
        if candidates.len() < 2 {
            continue;
        }
        let mut chosen: Vec<usize> = Vec::new();
        for &v in &candidates {
            if chosen.iter().all(|&u| !g.are_adjacent(u, v).unwrap_or(false)) {
                chosen.push(v);
            }
        }
        if chosen.len() < 2 {
            // The ascending scan can trap itself behind one vertex adjacent
            // to every later candidate; restart from the first independent
            // pair instead.
            let mut pair = None;
            'pairs: for (idx, &a) in candidates.iter().enumerate() {
                for &b in &candidates[idx + 1..] {
                    if !g.are_adjacent(a, b)? {
                        pair = Some((a, b));
                        break 'pairs;
                    }
                }
            }
            let Some((a, b)) = pair else { continue };
            chosen = vec![a, b];
            for &v in &candidates {
                if !chosen.contains(&v)
                    && chosen.iter().all(|&u| !g.are_adjacent(u, v).unwrap_or(false))
                {
                    chosen.push(v);
                }
            }
            chosen.sort_unstable();
        }
        used |= 1 << (i - 1);
        used |= g.neighbours_mask(i)?;
        for &v in &chosen {
            used |= 1 << (v - 1);
            used |= g.neighbours_mask(v)?;
        }
        blocks.push((i, chosen));
    }
    Ok(blocks)
}

/// Runs block selection on a graph and multiplies the per-block inequalities.
pub fn blocks_composite(g: &Graph) -> Result<BellInequality> {
    let blocks = select_blocks(g)?;
    if blocks.is_empty() {
        return Err(Error::Construction(
            "no vertex with two non-adjacent neighbours; no block inequality exists".into(),
        ));
    }
    let mut parts = Vec::with_capacity(blocks.len());
    for (i, i_set) in &blocks {
        parts.push(theorem1_operator(g, *i, i_set)?);
    }
    let b = composite(&parts)?;
    debug_assert_eq!(
        g.graph_state_expectation_sum(b.pauli_form().unwrap()).unwrap(),
        b.quantum_value()
    );
    Ok(b)
}

/// Anchors and neighbour sets of the path composite: (2, {1,3}), (6, {5,7})
/// and so on, one block per four vertices.
pub fn lc_blocks(n: usize) -> Vec<(usize, Vec<usize>)> {
    let mut blocks = Vec::new();
    let mut i = 2;
    while i + 1 <= n {
        blocks.push((i, vec![i - 1, i + 1]));
        i += 4;
    }
    blocks
}

/// Anchors and neighbour sets of the ring composite for n >= 4; the ring
/// lags the path by one block because wrap-around edges eat slack.
pub fn rc_blocks(n: usize) -> Vec<(usize, Vec<usize>)> {
    (0..(n / 4).max(1))
        .map(|k| (4 * k + 2, vec![4 * k + 1, 4 * k + 3]))
        .collect()
}

fn assembled_blocks(g: &Graph, blocks: &[(usize, Vec<usize>)]) -> Result<BellInequality> {
    let mut parts = Vec::with_capacity(blocks.len());
    for (i, i_set) in blocks {
        parts.push(theorem1_operator(g, *i, i_set)?);
    }
    let b = composite(&parts)?;
    debug_assert_eq!(
        g.graph_state_expectation_sum(b.pauli_form().unwrap()).unwrap(),
        b.quantum_value()
    );
    Ok(b)
}

/// The linear-cluster composite: blocks anchored at vertices 2, 6, 10, ...
/// of the path, each with the two flanking neighbours.
pub fn lc_composite(n: usize) -> Result<BellInequality> {
    let g = graph::path(n)?;
    let blocks = lc_blocks(n);
    if blocks.is_empty() {
        return Err(Error::Construction(format!(
            "a path of {n} vertices has no interior vertex to anchor a block"
        )));
    }
    assembled_blocks(&g, &blocks)
}

fn rc_composite(n: usize) -> Result<BellInequality> {
    let g = graph::ring(n)?;
    if n == 3 {
        return fc3_operator(&g, 1, 2, 3);
    }
    assembled_blocks(&g, &rc_blocks(n))
}

/// The standard inequality for each named family: blocks along a path or
/// ring, the triangle form for the smallest ring and for complete graphs,
/// the full Mermin-type form on a star, block selection on a grid.
pub fn family_composite(
    family: Family,
    n: usize,
    dims: Option<(usize, usize)>,
) -> Result<BellInequality> {
    match family {
        Family::LC => lc_composite(n),
        Family::RC => rc_composite(n),
        Family::ST => {
            let g = graph::star(n)?;
            let leaves: Vec<usize> = (2..=n).collect();
            theorem1_operator(&g, 1, &leaves)
        }
        Family::FC => {
            let g = graph::complete(n)?;
            if n < 3 {
                return Err(Error::Construction(
                    "complete-graph inequalities need at least three vertices".into(),
                ));
            }
            fc3_operator(&g, 1, 2, 3)
        }
        Family::Grid => {
            let g = graph::family(Family::Grid, n, dims)?;
            blocks_composite(&g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::expand;

    #[test]
    fn violations_grow_every_fourth_path_vertex() {
        let expected = [2.0, 2.0, 2.0, 2.0, 4.0, 4.0, 4.0, 4.0, 8.0, 8.0];
        for (n, want) in (3..=12).zip(expected) {
            let b = lc_composite(n).unwrap();
            assert_eq!(b.violation(), want, "path n={n}");
        }
    }

    #[test]
    fn violations_grow_every_fourth_ring_vertex_with_a_lag() {
        let expected = [2.0, 2.0, 2.0, 2.0, 2.0, 4.0, 4.0, 4.0, 4.0, 8.0];
        for (n, want) in (3..=12).zip(expected) {
            let b = family_composite(Family::RC, n, None).unwrap();
            assert_eq!(b.violation(), want, "ring n={n}");
        }
    }

    #[test]
    fn star_violations_double_every_second_vertex() {
        let expected = [2.0, 2.0, 4.0, 4.0, 8.0, 8.0, 16.0, 16.0, 32.0, 32.0];
        for (n, want) in (3..=12).zip(expected) {
            let b = family_composite(Family::ST, n, None).unwrap();
            assert_eq!(b.violation(), want, "star n={n}");
        }
    }

    #[test]
    fn composite_multiplies_terms_bounds_and_values() {
        let b = lc_composite(8).unwrap();
        assert_eq!(b.classical_bound(), 4.0);
        assert_eq!(b.quantum_value(), 16.0);
        assert_eq!(b.pauli_form().unwrap().len(), 16);
        assert_eq!(b.layout().party_count(), 6);
        assert_eq!(b.expression().terms().len(), 16);
        let expanded = expand(b.expression(), b.observables()).unwrap();
        assert_eq!(&expanded, b.pauli_form().unwrap());
    }

    #[test]
    fn composite_rejects_blocks_sharing_more_than_one_letter() {
        let g = graph::path(5).unwrap();
        let left = theorem1_operator(&g, 2, &[1, 3]).unwrap();
        let right = theorem1_operator(&g, 4, &[3, 5]).unwrap();
        assert_eq!(
            composite(&[left, right]).unwrap_err(),
            Error::IncompatibleParts { qubit: 2 }
        );
    }

    #[test]
    fn block_selection_on_paths_matches_the_fixed_anchors() {
        let g = graph::path(12).unwrap();
        let blocks = select_blocks(&g).unwrap();
        assert_eq!(
            blocks,
            vec![(2, vec![1, 3]), (6, vec![5, 7]), (10, vec![9, 11])]
        );
        let via_blocks = blocks_composite(&g).unwrap();
        let via_family = lc_composite(12).unwrap();
        assert_eq!(via_blocks.pauli_form(), via_family.pauli_form());
    }

    #[test]
    fn block_selection_covers_the_grid_corners() {
        let g = graph::grid(3, 3).unwrap();
        let blocks = select_blocks(&g).unwrap();
        assert_eq!(blocks, vec![(1, vec![2, 4]), (9, vec![6, 8])]);
        let b = blocks_composite(&g).unwrap();
        assert_eq!(b.violation(), 4.0);
        let expanded = expand(b.expression(), b.observables()).unwrap();
        assert_eq!(&expanded, b.pauli_form().unwrap());
    }

    #[test]
    fn block_selection_recovers_from_a_dominating_first_neighbour() {
        // Vertex 1 has neighbours 2, 3, 4 with 2 adjacent to both others, so
        // the ascending scan alone would stall at {2}.
        let g = Graph::from_edges(4, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4)]).unwrap();
        let blocks = select_blocks(&g).unwrap();
        assert_eq!(blocks, vec![(1, vec![3, 4])]);
    }

    #[test]
    fn ring_four_composite_tolerates_shared_z_tails() {
        let b = family_composite(Family::RC, 4, None).unwrap();
        assert!(!b.layout().is_disjoint());
        assert_eq!(b.violation(), 2.0);
        let expanded = expand(b.expression(), b.observables()).unwrap();
        assert_eq!(&expanded, b.pauli_form().unwrap());
    }

    #[test]
    fn complete_family_uses_the_triangle_form() {
        let b = family_composite(Family::FC, 6, None).unwrap();
        assert_eq!(b.classical_bound(), 2.0);
        assert_eq!(b.quantum_value(), 4.0);
        assert_eq!(b.pauli_form().unwrap().len(), 4);
    }

    #[test]
    fn too_short_paths_are_rejected() {
        assert!(lc_composite(2).is_err());
        assert!(blocks_composite(&graph::path(2).unwrap()).is_err());
    }
}
