//! Bell inequalities built from graph-state stabilizer elements.
//!
//! An inequality couples an abstract two-setting expression (which fixes the
//! classical bound) with concrete Pauli observables per party; expanding the
//! expression through the observables yields the operator whose graph-state
//! expectation gives the quantum value.

mod compose;
mod lc4;

pub use compose::{
    blocks_composite, composite, family_composite, lc_blocks, lc_composite, rc_blocks,
    select_blocks,
};
pub use lc4::lc4_set;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{mask_to_vertices, vertices_to_mask, Graph};
use crate::pauli::{Letter, PauliString, PauliSum};

fn pow2(exponent: usize) -> f64 {
    (1u64 << exponent) as f64
}

/// Largest classical value of the m-party Mermin setting pattern.
pub fn mermin_bound(m: usize) -> f64 {
    if m % 2 == 1 {
        pow2((m - 1) / 2)
    } else {
        pow2(m / 2)
    }
}

/// Largest classical value of the m-party Ardehali setting pattern.
pub fn ardehali_bound(m: usize) -> f64 {
    if m % 2 == 1 {
        pow2((m + 1) / 2)
    } else {
        pow2(m / 2)
    }
}

/// Ordered qubit groups, one per party. Groups are normally disjoint; when
/// two reduced neighbourhoods intersect, the shared qubits carry Z in every
/// affected observable and may appear in more than one group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyLayout {
    parties: Vec<Vec<usize>>,
}

impl PartyLayout {
    pub fn new(parties: Vec<Vec<usize>>) -> Result<PartyLayout> {
        if parties.is_empty() {
            return Err(Error::Construction("layout needs at least one party".into()));
        }
        let mut sorted = parties;
        for group in &mut sorted {
            if group.is_empty() {
                return Err(Error::Construction("empty party in layout".into()));
            }
            group.sort_unstable();
            group.dedup();
        }
        Ok(PartyLayout { parties: sorted })
    }

    pub fn parties(&self) -> &[Vec<usize>] {
        &self.parties
    }

    pub fn party_count(&self) -> usize {
        self.parties.len()
    }

    pub fn is_disjoint(&self) -> bool {
        let mut seen = 0u64;
        for group in &self.parties {
            let mask = vertices_to_mask(group);
            if seen & mask != 0 {
                return false;
            }
            seen |= mask;
        }
        true
    }
}

/// The two dichotomic observables of each party, as Pauli sums.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableMap {
    n: usize,
    per_party: Vec<[PauliSum; 2]>,
}

impl ObservableMap {
    pub fn new(n: usize, per_party: Vec<[PauliSum; 2]>) -> Result<ObservableMap> {
        for pair in &per_party {
            for obs in pair {
                if obs.n() != n {
                    return Err(Error::DimensionMismatch(obs.n(), n));
                }
            }
        }
        Ok(ObservableMap { n, per_party })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn party_count(&self) -> usize {
        self.per_party.len()
    }

    pub fn observable(&self, party: usize, setting: usize) -> &PauliSum {
        &self.per_party[party][setting]
    }

    /// Checks that every observable squares to the identity.
    pub fn is_dichotomic(&self) -> Result<bool> {
        let identity = PauliSum::from_terms(self.n, [(1.0, PauliString::identity(self.n)?)])?;
        for pair in &self.per_party {
            for obs in pair {
                let squared = match obs.mul(obs) {
                    Ok(s) => s,
                    Err(_) => return Ok(false),
                };
                if squared.max_coeff_distance(&identity)? > 1e-12 {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Linear combination of full-correlation terms; each term picks setting 0
/// or 1 for every party.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSettingExpression {
    parties: usize,
    setting_names: Vec<[String; 2]>,
    terms: Vec<(f64, Vec<u8>)>,
}

impl TwoSettingExpression {
    pub fn new(parties: usize, terms: Vec<(f64, Vec<u8>)>) -> Result<TwoSettingExpression> {
        let names = (0..parties).map(|_| ["A".to_string(), "B".to_string()]).collect();
        TwoSettingExpression::with_setting_names(parties, names, terms)
    }

    pub fn with_setting_names(
        parties: usize,
        setting_names: Vec<[String; 2]>,
        terms: Vec<(f64, Vec<u8>)>,
    ) -> Result<TwoSettingExpression> {
        if parties == 0 {
            return Err(Error::Construction("expression needs at least one party".into()));
        }
        if setting_names.len() != parties {
            return Err(Error::DimensionMismatch(setting_names.len(), parties));
        }
        let mut cleaned = Vec::with_capacity(terms.len());
        for (coeff, choices) in terms {
            if choices.len() != parties {
                return Err(Error::DimensionMismatch(choices.len(), parties));
            }
            if choices.iter().any(|&c| c > 1) {
                return Err(Error::Construction("setting choices must be 0 or 1".into()));
            }
            cleaned.push((coeff, choices));
        }
        cleaned.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(f64, Vec<u8>)> = Vec::with_capacity(cleaned.len());
        for (coeff, choices) in cleaned {
            match merged.last_mut() {
                Some((last, prev)) if *prev == choices => *last += coeff,
                _ => merged.push((coeff, choices)),
            }
        }
        merged.retain(|(coeff, _)| *coeff != 0.0);
        Ok(TwoSettingExpression { parties, setting_names, terms: merged })
    }

    pub fn party_count(&self) -> usize {
        self.parties
    }

    pub fn terms(&self) -> &[(f64, Vec<u8>)] {
        &self.terms
    }

    pub fn setting_name(&self, party: usize, setting: usize) -> &str {
        &self.setting_names[party][setting]
    }

    /// Coefficients as integers, if every coefficient is one exactly.
    pub fn integer_coefficients(&self) -> Option<Vec<i64>> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (coeff, _) in &self.terms {
            if coeff.fract() != 0.0 || coeff.abs() > (1i64 << 52) as f64 {
                return None;
            }
            out.push(*coeff as i64);
        }
        Some(out)
    }

    /// Whether a given (party, setting) variable appears in any term.
    pub fn setting_occurs(&self, party: usize, setting: u8) -> bool {
        self.terms.iter().any(|(_, choices)| choices[party] == setting)
    }
}

/// The m-party Mermin pattern: every term with an odd number of second
/// settings, weighted (-1)^((b-1)/2) for b of them.
pub fn mermin_expression(m: usize) -> Result<TwoSettingExpression> {
    if m == 0 {
        return Err(Error::Construction("pattern needs at least one party".into()));
    }
    if m > 24 {
        return Err(Error::ResourceCap(m, 24));
    }
    let mut terms = Vec::new();
    for pattern in 0u64..(1 << m) {
        let b = pattern.count_ones();
        if b % 2 == 0 {
            continue;
        }
        let coeff = if ((b - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let choices: Vec<u8> = (0..m).map(|k| (pattern >> k & 1) as u8).collect();
        terms.push((coeff, choices));
    }
    TwoSettingExpression::new(m, terms)
}

/// The 2-party CHSH form AA + AB + BA - BB, the facet-defining member of the
/// family at m = 2.
pub fn chsh_expression() -> Result<TwoSettingExpression> {
    TwoSettingExpression::new(
        2,
        vec![
            (1.0, vec![0, 0]),
            (1.0, vec![0, 1]),
            (1.0, vec![1, 0]),
            (-1.0, vec![1, 1]),
        ],
    )
}

/// The m-party Ardehali pattern. Party 1 measures Q or W; the other parties'
/// terms split by the parity of their second-setting count b:
/// even b = 2t pairs with (Q - W) at weight (-1)^(t+1), odd b = 2t+1 pairs
/// with (Q + W) at weight (-1)^t.
pub fn ardehali_expression_pattern(m: usize) -> Result<TwoSettingExpression> {
    if m < 2 {
        return Err(Error::Construction(format!(
            "the Ardehali pattern needs at least two parties, got {m}"
        )));
    }
    if m > 24 {
        return Err(Error::ResourceCap(m, 24));
    }
    let mut names = vec![["Q".to_string(), "W".to_string()]];
    names.extend((1..m).map(|_| ["A".to_string(), "B".to_string()]));
    let mut terms = Vec::new();
    for pattern in 0u64..(1 << (m - 1)) {
        let b = pattern.count_ones();
        let rest: Vec<u8> = (0..m - 1).map(|k| (pattern >> k & 1) as u8).collect();
        let (q_coeff, w_coeff) = if b % 2 == 0 {
            let s = if (b / 2) % 2 == 0 { -1.0 } else { 1.0 };
            (s, -s)
        } else {
            let s = if ((b - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            (s, s)
        };
        for (setting, coeff) in [(0u8, q_coeff), (1u8, w_coeff)] {
            let mut choices = Vec::with_capacity(m);
            choices.push(setting);
            choices.extend_from_slice(&rest);
            terms.push((coeff, choices));
        }
    }
    TwoSettingExpression::with_setting_names(m, names, terms)
}

/// A lone product term over the first settings of every party.
pub fn single_term_expression(parties: usize) -> Result<TwoSettingExpression> {
    TwoSettingExpression::new(parties, vec![(1.0, vec![0; parties])])
}

/// Expands an expression through concrete observables into a Pauli sum.
pub fn expand(expression: &TwoSettingExpression, observables: &ObservableMap) -> Result<PauliSum> {
    if observables.party_count() != expression.party_count() {
        return Err(Error::DimensionMismatch(
            observables.party_count(),
            expression.party_count(),
        ));
    }
    let n = observables.n();
    let mut total = PauliSum::zero(n)?;
    for (coeff, choices) in expression.terms() {
        let mut product =
            PauliSum::from_terms(n, [(*coeff, PauliString::identity(n)?)])?;
        for (party, &choice) in choices.iter().enumerate() {
            product = product.mul(observables.observable(party, choice as usize))?;
        }
        total = total.add(&product)?;
    }
    Ok(total)
}

/// A Bell inequality: abstract expression, party structure, observables, the
/// certified classical bound and the graph-state quantum value.
#[derive(Clone, Debug, PartialEq)]
pub struct BellInequality {
    expression: TwoSettingExpression,
    layout: PartyLayout,
    observables: ObservableMap,
    classical_bound: f64,
    quantum_value: f64,
    pauli_form: Option<PauliSum>,
}

impl BellInequality {
    pub fn new(
        expression: TwoSettingExpression,
        layout: PartyLayout,
        observables: ObservableMap,
        classical_bound: f64,
        quantum_value: f64,
        pauli_form: Option<PauliSum>,
    ) -> Result<BellInequality> {
        if layout.party_count() != expression.party_count()
            || observables.party_count() != expression.party_count()
        {
            return Err(Error::DimensionMismatch(
                layout.party_count(),
                expression.party_count(),
            ));
        }
        if classical_bound <= 0.0 {
            return Err(Error::ZeroClassicalBound);
        }
        Ok(BellInequality {
            expression,
            layout,
            observables,
            classical_bound,
            quantum_value,
            pauli_form,
        })
    }

    pub fn expression(&self) -> &TwoSettingExpression {
        &self.expression
    }

    pub fn layout(&self) -> &PartyLayout {
        &self.layout
    }

    pub fn observables(&self) -> &ObservableMap {
        &self.observables
    }

    pub fn classical_bound(&self) -> f64 {
        self.classical_bound
    }

    pub fn quantum_value(&self) -> f64 {
        self.quantum_value
    }

    pub fn violation(&self) -> f64 {
        self.quantum_value / self.classical_bound
    }

    pub fn pauli_form(&self) -> Option<&PauliSum> {
        self.pauli_form.as_ref()
    }

    pub fn n(&self) -> usize {
        self.observables.n()
    }

    /// Serializable view; requires an expanded operator.
    pub fn to_json(&self) -> Result<BellInequalityJson> {
        let pauli_form = self
            .pauli_form
            .as_ref()
            .ok_or_else(|| Error::Construction("inequality has no expanded operator".into()))?;
        Ok(BellInequalityJson {
            n: self.n(),
            parties: self.layout.parties().to_vec(),
            terms: pauli_form
                .terms()
                .iter()
                .map(|(coeff, p)| TermJson { coeff: *coeff, pauli: p.to_string() })
                .collect(),
            classical_bound: self.classical_bound,
            quantum_value: self.quantum_value,
            violation: self.violation(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermJson {
    pub coeff: f64,
    pub pauli: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellInequalityJson {
    pub n: usize,
    pub parties: Vec<Vec<usize>>,
    pub terms: Vec<TermJson>,
    pub classical_bound: f64,
    pub quantum_value: f64,
    pub violation: f64,
}

fn letter_product(n: usize, letters: &[(usize, Letter)]) -> Result<PauliString> {
    let mut product = PauliString::identity(n)?;
    for &(qubit, letter) in letters {
        product = product.mul(&PauliString::single(n, qubit, letter)?)?;
    }
    Ok(product)
}

fn single_term(n: usize, letters: &[(usize, Letter)]) -> Result<PauliSum> {
    PauliSum::from_terms(n, [(1.0, letter_product(n, letters)?)])
}

/// Reduced neighbourhood: neighbours of v outside I and the anchor i.
fn reduced_neighbourhood(g: &Graph, v: usize, i: usize, i_set: u64) -> Result<u64> {
    Ok(g.neighbours_mask(v)? & !i_set & !(1u64 << (i - 1)))
}

fn validate_anchor_set(g: &Graph, i: usize, i_set: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = i_set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != i_set.len() {
        return Err(Error::Construction("repeated vertex in the independent set".into()));
    }
    for &j in &sorted {
        if !g.are_adjacent(i, j)? {
            return Err(Error::NotANeighbour { anchor: i, vertex: j });
        }
    }
    for (idx, &a) in sorted.iter().enumerate() {
        for &b in &sorted[idx + 1..] {
            if g.are_adjacent(a, b)? {
                return Err(Error::NotIndependent(a, b));
            }
        }
    }
    Ok(sorted)
}

struct AnsatzParts {
    layout: PartyLayout,
    mermin_observables: Vec<[PauliSum; 2]>,
    stabilizer_sum: PauliSum,
    terms: usize,
}

/// Shared scaffolding for the single-anchor constructions: party 1 holds the
/// anchor i with observables Y/X times Z on its reduced neighbourhood, party
/// j+1 holds I_j with observables Z and Y times Z on its reduced
/// neighbourhood; the operator sums the stabilizer elements over {i} plus
/// every subset of I.
fn ansatz_parts(g: &Graph, i: usize, i_sorted: &[usize]) -> Result<AnsatzParts> {
    if i_sorted.len() > 20 {
        return Err(Error::ResourceCap(i_sorted.len(), 20));
    }
    let n = g.n();
    let i_mask = vertices_to_mask(i_sorted);

    let mut parties = Vec::with_capacity(i_sorted.len() + 1);
    let mut observables = Vec::with_capacity(i_sorted.len() + 1);

    let anchor_reduced = reduced_neighbourhood(g, i, i, i_mask)?;
    let mut anchor_group = vec![i];
    anchor_group.extend(mask_to_vertices(anchor_reduced));
    parties.push(anchor_group);
    let anchor_tail: Vec<(usize, Letter)> =
        mask_to_vertices(anchor_reduced).into_iter().map(|q| (q, Letter::Z)).collect();
    let mut a1 = vec![(i, Letter::Y)];
    a1.extend(anchor_tail.iter().cloned());
    let mut b1 = vec![(i, Letter::X)];
    b1.extend(anchor_tail.iter().cloned());
    observables.push([single_term(n, &a1)?, single_term(n, &b1)?]);

    for &j in i_sorted {
        let reduced = reduced_neighbourhood(g, j, i, i_mask)?;
        let mut group = vec![j];
        group.extend(mask_to_vertices(reduced));
        parties.push(group);
        let mut b = vec![(j, Letter::Y)];
        b.extend(mask_to_vertices(reduced).into_iter().map(|q| (q, Letter::Z)));
        observables.push([single_term(n, &[(j, Letter::Z)])?, single_term(n, &b)?]);
    }

    let mut stabilizer_terms = Vec::with_capacity(1 << i_sorted.len());
    for subset in 0u64..(1 << i_sorted.len()) {
        let mut mask = 1u64 << (i - 1);
        for (idx, &j) in i_sorted.iter().enumerate() {
            if subset >> idx & 1 == 1 {
                mask |= 1 << (j - 1);
            }
        }
        stabilizer_terms.push((1.0, g.stabilizer_element_mask(mask)?));
    }
    let stabilizer_sum = PauliSum::from_terms(n, stabilizer_terms)?;

    Ok(AnsatzParts {
        layout: PartyLayout::new(parties)?,
        mermin_observables: observables,
        stabilizer_sum,
        terms: 1 << i_sorted.len(),
    })
}

/// The Mermin-type inequality anchored at vertex i with independent
/// neighbour set I: operator g_i prod_(j in I) (1 + g_j), classical bound
/// L_M(|I|+1), quantum value 2^|I| on the graph state.
pub fn theorem1_operator(g: &Graph, i: usize, i_set: &[usize]) -> Result<BellInequality> {
    if i_set.is_empty() {
        return Err(Error::Construction(
            "the independent neighbour set must not be empty".into(),
        ));
    }
    let sorted = validate_anchor_set(g, i, i_set)?;
    let parts = ansatz_parts(g, i, &sorted)?;
    let m = sorted.len() + 1;

    let quantum = g.graph_state_expectation_sum(&parts.stabilizer_sum)?;
    debug_assert_eq!(quantum, parts.terms as f64);

    BellInequality::new(
        mermin_expression(m)?,
        parts.layout,
        ObservableMap::new(g.n(), parts.mermin_observables)?,
        mermin_bound(m),
        quantum,
        Some(parts.stabilizer_sum),
    )
}

/// The Ardehali-type inequality for the same anchor structure: party 1
/// measures the rotated pair Q = (A - B)/sqrt(2), W = (A + B)/sqrt(2), the
/// operator is sqrt(2) times the Mermin-type one, and the classical bound is
/// L_A(|I|+1). Strictly better than the Mermin form for odd |I|.
pub fn ardehali_operator(g: &Graph, i: usize, i_set: &[usize]) -> Result<BellInequality> {
    if i_set.len() < 2 {
        return Err(Error::Construction(
            "the Ardehali form needs an independent set of at least two vertices".into(),
        ));
    }
    let sorted = validate_anchor_set(g, i, i_set)?;
    let parts = ansatz_parts(g, i, &sorted)?;
    let m = sorted.len() + 1;
    let n = g.n();

    let mut observables = parts.mermin_observables;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let [a1, b1] = observables[0].clone();
    let q = a1.scaled(inv_sqrt2)?.add(&b1.scaled(-inv_sqrt2)?)?;
    let w = a1.scaled(inv_sqrt2)?.add(&b1.scaled(inv_sqrt2)?)?;
    observables[0] = [q, w];

    let pauli_form = parts.stabilizer_sum.scaled(std::f64::consts::SQRT_2)?;
    let quantum = g.graph_state_expectation_sum(&pauli_form)?;

    BellInequality::new(
        ardehali_expression_pattern(m)?,
        parts.layout,
        ObservableMap::new(n, observables)?,
        ardehali_bound(m),
        quantum,
        Some(pauli_form),
    )
}

/// The triangle inequality g_a + g_b + g_c + g_a g_b g_c for three pairwise
/// adjacent vertices: classical bound 2, quantum value 4. This is the Mermin
/// pattern again, with party observables Z and X times Z on the reduced
/// neighbourhood.
pub fn fc3_operator(g: &Graph, a: usize, b: usize, c: usize) -> Result<BellInequality> {
    let mut triple = [a, b, c];
    triple.sort_unstable();
    let [a, b, c] = triple;
    if a == b || b == c {
        return Err(Error::NotATriangle(a, b, c));
    }
    if !(g.are_adjacent(a, b)? && g.are_adjacent(a, c)? && g.are_adjacent(b, c)?) {
        return Err(Error::NotATriangle(a, b, c));
    }
    let n = g.n();
    let triple_mask = vertices_to_mask(&triple);

    let mut parties = Vec::new();
    let mut observables = Vec::new();
    for &v in &triple {
        let reduced = g.neighbours_mask(v)? & !triple_mask;
        let mut group = vec![v];
        group.extend(mask_to_vertices(reduced));
        parties.push(group);
        let mut x_obs = vec![(v, Letter::X)];
        x_obs.extend(mask_to_vertices(reduced).into_iter().map(|q| (q, Letter::Z)));
        observables.push([single_term(n, &[(v, Letter::Z)])?, single_term(n, &x_obs)?]);
    }

    let pauli_form = PauliSum::from_terms(
        n,
        [
            (1.0, g.stabilizer_element(&[a])?),
            (1.0, g.stabilizer_element(&[b])?),
            (1.0, g.stabilizer_element(&[c])?),
            (1.0, g.stabilizer_element(&[a, b, c])?),
        ],
    )?;
    let quantum = g.graph_state_expectation_sum(&pauli_form)?;
    debug_assert_eq!(quantum, 4.0);

    BellInequality::new(
        mermin_expression(3)?,
        PartyLayout::new(parties)?,
        ObservableMap::new(n, observables)?,
        2.0,
        quantum,
        Some(pauli_form),
    )
}

/// A violation-2 inequality that exists for every connected graph with a
/// vertex of degree at least two: the Mermin-type form on two non-adjacent
/// neighbours when possible, otherwise the triangle form.
pub fn basic_inequality(g: &Graph) -> Result<BellInequality> {
    for i in 1..=g.n() {
        let neighbours = g.neighbours(i)?;
        if neighbours.len() < 2 {
            continue;
        }
        for (idx, &j) in neighbours.iter().enumerate() {
            for &k in &neighbours[idx + 1..] {
                if !g.are_adjacent(j, k)? {
                    return theorem1_operator(g, i, &[j, k]);
                }
            }
        }
        return fc3_operator(g, i, neighbours[0], neighbours[1]);
    }
    Err(Error::Construction(
        "no vertex has two neighbours; the graph state admits no violation here".into(),
    ))
}

fn relabel_sum(sum: &PauliSum, perm: &[usize]) -> Result<PauliSum> {
    let mut terms = Vec::with_capacity(sum.len());
    for (coeff, p) in sum.terms() {
        terms.push((*coeff, p.relabelled(perm)?));
    }
    PauliSum::from_terms(sum.n(), terms)
}

/// Applies a vertex permutation to every qubit-indexed part of an
/// inequality; the abstract expression and both bounds are unchanged.
pub fn relabelled(b: &BellInequality, perm: &[usize]) -> Result<BellInequality> {
    let n = b.n();
    let pauli_form = match b.pauli_form() {
        Some(sum) => Some(relabel_sum(sum, perm)?),
        None => None,
    };
    let mut parties = Vec::with_capacity(b.layout().party_count());
    for group in b.layout().parties() {
        for &q in group {
            if q == 0 || q > perm.len() {
                return Err(Error::QubitOutOfRange(q, perm.len()));
            }
        }
        parties.push(group.iter().map(|&q| perm[q - 1]).collect());
    }
    let mut observables = Vec::with_capacity(b.observables().party_count());
    for party in 0..b.observables().party_count() {
        observables.push([
            relabel_sum(b.observables().observable(party, 0), perm)?,
            relabel_sum(b.observables().observable(party, 1), perm)?,
        ]);
    }
    BellInequality::new(
        b.expression().clone(),
        PartyLayout::new(parties)?,
        ObservableMap::new(n, observables)?,
        b.classical_bound(),
        b.quantum_value(),
        pauli_form,
    )
}

/// Fixes Z measurement outcomes on a set of vertices: every term must act as
/// Z or identity there; Z factors fold into the coefficients as the chosen
/// outcomes and the conditioned qubits leave the inequality's support.
pub fn condition_on_z(
    b: &BellInequality,
    outcomes: &[(usize, i32)],
) -> Result<BellInequality> {
    let n = b.n();
    let mut outcome_mask = 0u64;
    let mut signs = std::collections::BTreeMap::new();
    for &(vertex, outcome) in outcomes {
        if vertex == 0 || vertex > n {
            return Err(Error::QubitOutOfRange(vertex, n));
        }
        if outcome != 1 && outcome != -1 {
            return Err(Error::Construction(format!(
                "outcome for vertex {vertex} must be +1 or -1, got {outcome}"
            )));
        }
        if signs.insert(vertex, outcome).is_some() {
            return Err(Error::Construction(format!("vertex {vertex} conditioned twice")));
        }
        outcome_mask |= 1 << (vertex - 1);
    }

    let substitute = |sum: &PauliSum| -> Result<PauliSum> {
        let mut new_terms = Vec::with_capacity(sum.len());
        for (coeff, p) in sum.terms() {
            let mut c = *coeff;
            for (&vertex, &outcome) in &signs {
                match p.letter(vertex) {
                    Letter::I => {}
                    Letter::Z => {
                        if outcome == -1 {
                            c = -c;
                        }
                    }
                    other => {
                        return Err(Error::ConditionedVertexNotDiagonal {
                            vertex,
                            letter: other.as_char(),
                        })
                    }
                }
            }
            let stripped =
                PauliString::from_masks(n, p.x_mask(), p.z_mask() & !outcome_mask, p.phase())?;
            new_terms.push((c, stripped));
        }
        PauliSum::from_terms(n, new_terms)
    };

    let pauli_form = match b.pauli_form() {
        Some(sum) => Some(substitute(sum)?),
        None => None,
    };
    let mut observables = Vec::with_capacity(b.observables().party_count());
    for party in 0..b.observables().party_count() {
        observables.push([
            substitute(b.observables().observable(party, 0))?,
            substitute(b.observables().observable(party, 1))?,
        ]);
    }
    let mut parties = Vec::with_capacity(b.layout().party_count());
    for group in b.layout().parties() {
        let kept: Vec<usize> =
            group.iter().copied().filter(|&q| outcome_mask >> (q - 1) & 1 == 0).collect();
        if kept.is_empty() {
            return Err(Error::Construction(
                "conditioning would remove a party entirely".into(),
            ));
        }
        parties.push(kept);
    }

    BellInequality::new(
        b.expression().clone(),
        PartyLayout::new(parties)?,
        ObservableMap::new(n, observables)?,
        b.classical_bound(),
        b.quantum_value(),
        pauli_form,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;

    #[test]
    fn mermin_and_ardehali_bounds() {
        let lm: Vec<f64> = (1..=6).map(mermin_bound).collect();
        assert_eq!(lm, vec![1.0, 2.0, 2.0, 4.0, 4.0, 8.0]);
        let la: Vec<f64> = (2..=6).map(ardehali_bound).collect();
        assert_eq!(la, vec![2.0, 4.0, 4.0, 8.0, 8.0]);
    }

    #[test]
    fn mermin_pattern_has_odd_second_setting_counts() {
        for m in 1..=6 {
            let e = mermin_expression(m).unwrap();
            assert_eq!(e.terms().len(), 1 << (m - 1));
            for (coeff, choices) in e.terms() {
                let b: u32 = choices.iter().map(|&c| c as u32).sum();
                assert_eq!(b % 2, 1);
                let expected = if ((b - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                assert_eq!(*coeff, expected);
            }
        }
    }

    #[test]
    fn lc3_inequality_matches_hand_expansion() {
        let g = graph::path(3).unwrap();
        let b = theorem1_operator(&g, 2, &[1, 3]).unwrap();
        let expected = PauliSum::from_texts(
            3,
            &[(1.0, "ZXZ"), (1.0, "YYZ"), (1.0, "ZYY"), (-1.0, "YXY")],
        )
        .unwrap();
        assert_eq!(b.pauli_form().unwrap(), &expected);
        assert_eq!(b.classical_bound(), 2.0);
        assert_eq!(b.quantum_value(), 4.0);
        assert_eq!(b.violation(), 2.0);
        assert_eq!(b.layout().parties(), &[vec![2], vec![1], vec![3]]);
        assert!(b.layout().is_disjoint());
    }

    #[test]
    fn expansion_through_observables_reproduces_the_operator() {
        let cases = [
            (graph::path(3).unwrap(), 2usize, vec![1usize, 3]),
            (graph::path(5).unwrap(), 2, vec![1, 3]),
            (graph::star(5).unwrap(), 1, vec![2, 3, 4, 5]),
            (graph::ring(6).unwrap(), 2, vec![1, 3]),
            (graph::grid(2, 3).unwrap(), 2, vec![1, 3, 5]),
        ];
        for (g, i, i_set) in cases {
            let b = theorem1_operator(&g, i, &i_set).unwrap();
            assert!(b.observables().is_dichotomic().unwrap());
            let expanded = expand(b.expression(), b.observables()).unwrap();
            assert_eq!(&expanded, b.pauli_form().unwrap());
        }
    }

    #[test]
    fn overlapping_reduced_neighbourhoods_still_expand_correctly() {
        let g = graph::ring(4).unwrap();
        let b = theorem1_operator(&g, 2, &[1, 3]).unwrap();
        assert!(!b.layout().is_disjoint());
        assert_eq!(b.layout().parties(), &[vec![2], vec![1, 4], vec![3, 4]]);
        let expanded = expand(b.expression(), b.observables()).unwrap();
        assert_eq!(&expanded, b.pauli_form().unwrap());
        assert_eq!(b.quantum_value(), 4.0);
    }

    #[test]
    fn theorem1_rejects_bad_anchor_sets() {
        let g = graph::path(5).unwrap();
        assert!(matches!(
            theorem1_operator(&g, 2, &[4]).unwrap_err(),
            Error::NotANeighbour { anchor: 2, vertex: 4 }
        ));
        assert!(matches!(
            theorem1_operator(&g, 2, &[]).unwrap_err(),
            Error::Construction(_)
        ));
        let triangle = graph::complete(3).unwrap();
        assert_eq!(
            theorem1_operator(&triangle, 1, &[2, 3]).unwrap_err(),
            Error::NotIndependent(2, 3)
        );
    }

    #[test]
    fn single_neighbour_form_reaches_no_violation() {
        let g = graph::path(5).unwrap();
        let b = theorem1_operator(&g, 2, &[1]).unwrap();
        assert_eq!(b.classical_bound(), 2.0);
        assert_eq!(b.quantum_value(), 2.0);
        assert_eq!(b.violation(), 1.0);
    }

    #[test]
    fn ardehali_operator_is_sqrt2_times_the_mermin_one() {
        let g = graph::star(4).unwrap();
        let mermin = theorem1_operator(&g, 1, &[2, 3, 4]).unwrap();
        let ardehali = ardehali_operator(&g, 1, &[2, 3, 4]).unwrap();
        assert_eq!(ardehali.classical_bound(), 4.0);
        let scaled = mermin.pauli_form().unwrap().scaled(std::f64::consts::SQRT_2).unwrap();
        let distance = ardehali.pauli_form().unwrap().max_coeff_distance(&scaled).unwrap();
        assert!(distance < 1e-12);
        assert!((ardehali.quantum_value() - 8.0 * std::f64::consts::SQRT_2).abs() < 1e-12);

        let expanded = expand(ardehali.expression(), ardehali.observables()).unwrap();
        let distance = expanded.max_coeff_distance(ardehali.pauli_form().unwrap()).unwrap();
        assert!(distance < 1e-12);
        assert!(ardehali.observables().is_dichotomic().unwrap());

        assert!(ardehali_operator(&g, 1, &[2]).is_err());
    }

    #[test]
    fn triangle_operator_on_complete_graphs() {
        let g = graph::complete(5).unwrap();
        let b = fc3_operator(&g, 1, 2, 3).unwrap();
        let expected = PauliSum::from_texts(
            5,
            &[
                (1.0, "XZZZZ"),
                (1.0, "ZXZZZ"),
                (1.0, "ZZXZZ"),
                (-1.0, "XXXZZ"),
            ],
        )
        .unwrap();
        assert_eq!(b.pauli_form().unwrap(), &expected);
        assert_eq!(b.classical_bound(), 2.0);
        assert_eq!(b.quantum_value(), 4.0);
        let expanded = expand(b.expression(), b.observables()).unwrap();
        assert_eq!(&expanded, b.pauli_form().unwrap());

        assert!(matches!(
            fc3_operator(&graph::path(3).unwrap(), 1, 2, 3).unwrap_err(),
            Error::NotATriangle(1, 2, 3)
        ));
    }

    #[test]
    fn basic_inequality_prefers_independent_pairs() {
        let path = graph::path(4).unwrap();
        let b = basic_inequality(&path).unwrap();
        assert_eq!(b.violation(), 2.0);

        let triangle = graph::complete(3).unwrap();
        let t = basic_inequality(&triangle).unwrap();
        assert_eq!(t.violation(), 2.0);
        assert_eq!(t.pauli_form().unwrap().len(), 4);

        let edge = graph::path(2).unwrap();
        assert!(basic_inequality(&edge).is_err());
    }

    #[test]
    fn conditioning_flips_exactly_the_z_terms() {
        let g = graph::path(5).unwrap();
        let b = theorem1_operator(&g, 3, &[2, 4]).unwrap();
        let conditioned = condition_on_z(&b, &[(1, -1), (5, 1)]).unwrap();
        let original = b.pauli_form().unwrap();
        let new = conditioned.pauli_form().unwrap();
        assert_eq!(original.len(), new.len());
        for ((c0, p0), (c1, p1)) in original.terms().iter().zip(new.terms()) {
            let had_z1 = p0.letter(1) == Letter::Z;
            assert_eq!(p1.letter(1), Letter::I);
            assert_eq!(p1.letter(5), Letter::I);
            assert_eq!(*c1, if had_z1 { -c0 } else { *c0 });
        }
        assert_eq!(conditioned.classical_bound(), 2.0);
    }

    #[test]
    fn conditioning_on_absent_vertices_changes_nothing() {
        let g = graph::path(3).unwrap();
        let b = theorem1_operator(&g, 2, &[1, 3]).unwrap();
        let conditioned = condition_on_z(&b, &[]).unwrap();
        assert_eq!(conditioned.pauli_form(), b.pauli_form());
    }

    #[test]
    fn conditioning_reduces_a_padded_operator_to_its_core() {
        let g = Graph::from_edges(
            6,
            &[(1, 2), (2, 3), (1, 4), (2, 5), (3, 6)],
        )
        .unwrap();
        let b = theorem1_operator(&g, 2, &[1, 3]).unwrap();
        let conditioned = condition_on_z(&b, &[(4, 1), (5, 1), (6, 1)]).unwrap();
        let core = PauliSum::from_texts(
            6,
            &[
                (1.0, "ZXZIII"),
                (1.0, "YYZIII"),
                (1.0, "ZYYIII"),
                (-1.0, "YXYIII"),
            ],
        )
        .unwrap();
        assert_eq!(conditioned.pauli_form().unwrap(), &core);
        assert_eq!(conditioned.layout().parties(), &[vec![2], vec![1], vec![3]]);
    }

    #[test]
    fn conditioning_rejects_x_or_y_support() {
        let g = graph::path(3).unwrap();
        let b = theorem1_operator(&g, 2, &[1, 3]).unwrap();
        assert!(matches!(
            condition_on_z(&b, &[(2, 1)]).unwrap_err(),
            Error::ConditionedVertexNotDiagonal { vertex: 2, .. }
        ));
        assert!(condition_on_z(&b, &[(1, 0)]).is_err());
        assert!(condition_on_z(&b, &[(1, 1), (1, -1)]).is_err());
    }

    #[test]
    fn json_view_lists_parties_and_signed_terms() {
        let g = graph::path(3).unwrap();
        let b = theorem1_operator(&g, 2, &[1, 3]).unwrap();
        let json = b.to_json().unwrap();
        assert_eq!(json.n, 3);
        assert_eq!(json.parties, vec![vec![2], vec![1], vec![3]]);
        assert_eq!(json.violation, 2.0);
        let rendered: Vec<(f64, &str)> =
            json.terms.iter().map(|t| (t.coeff, t.pauli.as_str())).collect();
        assert!(rendered.contains(&(-1.0, "YXY")));
        assert!(rendered.contains(&(1.0, "ZXZ")));
    }
}
