//! Simple graphs on up to 64 vertices and their graph-state stabilizers.
//!
//! Vertex k owns the stabilizer generator X on k times Z on every neighbour
//! of k; products of generators over vertex subsets form the full stabilizer
//! group of the graph state.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pauli::{PauliString, MAX_QUBITS};

/// Undirected simple graph stored as per-vertex neighbour masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn empty(n: usize) -> Result<Graph> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n, MAX_QUBITS));
        }
        Ok(Graph { n, adj: vec![0; n] })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::empty(n)?;
        for &(a, b) in edges {
            g.check_vertex(a)?;
            g.check_vertex(b)?;
            if a == b {
                return Err(Error::Construction(format!("self-loop at vertex {a}")));
            }
            g.adj[a - 1] |= 1 << (b - 1);
            g.adj[b - 1] |= 1 << (a - 1);
        }
        Ok(g)
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v == 0 || v > self.n {
            return Err(Error::QubitOutOfRange(v, self.n));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Neighbour mask of a 1-based vertex; bit k-1 stands for vertex k.
    pub fn neighbours_mask(&self, v: usize) -> Result<u64> {
        self.check_vertex(v)?;
        Ok(self.adj[v - 1])
    }

    pub fn neighbours(&self, v: usize) -> Result<Vec<usize>> {
        Ok(mask_to_vertices(self.neighbours_mask(v)?))
    }

    pub fn degree(&self, v: usize) -> Result<usize> {
        Ok(self.neighbours_mask(v)?.count_ones() as usize)
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> Result<bool> {
        self.check_vertex(b)?;
        Ok(self.neighbours_mask(a)? & (1 << (b - 1)) != 0)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges = Vec::new();
        for a in 1..=self.n {
            let mut mask = self.adj[a - 1] >> a;
            while mask != 0 {
                let b = a + 1 + mask.trailing_zeros() as usize;
                edges.push((a, b));
                mask &= mask - 1;
            }
        }
        edges
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let mut reached = 1u64;
        let mut frontier = 1u64;
        while frontier != 0 {
            let mut next = 0u64;
            let mut mask = frontier;
            while mask != 0 {
                let v = mask.trailing_zeros() as usize;
                next |= self.adj[v];
                mask &= mask - 1;
            }
            frontier = next & !reached;
            reached |= next;
        }
        reached.count_ones() as usize == self.n
    }

    /// Whether the given vertices are pairwise non-adjacent.
    pub fn is_independent_set(&self, vertices: &[usize]) -> Result<bool> {
        let mut mask = 0u64;
        for &v in vertices {
            self.check_vertex(v)?;
            mask |= 1 << (v - 1);
        }
        for &v in vertices {
            if self.adj[v - 1] & mask != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The stabilizer generator of vertex k: X on k, Z on its neighbours.
    pub fn generator(&self, k: usize) -> Result<PauliString> {
        self.check_vertex(k)?;
        PauliString::from_masks(self.n, 1 << (k - 1), self.adj[k - 1], 0)
    }

    /// Product of generators over a vertex subset, multiplied in ascending
    /// vertex order. The subset is a bit mask (bit k-1 stands for vertex k).
    pub fn stabilizer_element_mask(&self, subset: u64) -> Result<PauliString> {
        if self.n < MAX_QUBITS && subset >> self.n != 0 {
            return Err(Error::QubitOutOfRange(
                64 - subset.leading_zeros() as usize,
                self.n,
            ));
        }
        let mut product = PauliString::identity(self.n)?;
        let mut mask = subset;
        while mask != 0 {
            let k = mask.trailing_zeros() as usize + 1;
            product = product.mul(&self.generator(k)?)?;
            mask &= mask - 1;
        }
        Ok(product)
    }

    pub fn stabilizer_element(&self, vertices: &[usize]) -> Result<PauliString> {
        let mut subset = 0u64;
        for &v in vertices {
            self.check_vertex(v)?;
            subset |= 1 << (v - 1);
        }
        self.stabilizer_element_mask(subset)
    }

    /// Expectation of a Hermitian Pauli string in this graph's state: +1 or -1
    /// when the string is plus or minus a stabilizer element, 0 otherwise.
    ///
    /// The X support of a stabilizer element equals its generating subset, so
    /// the only candidate subset is the string's own X mask.
    pub fn graph_state_expectation(&self, p: &PauliString) -> Result<i32> {
        if p.n() != self.n {
            return Err(Error::DimensionMismatch(p.n(), self.n));
        }
        if !p.is_hermitian() {
            return Err(Error::NotHermitian(p.to_string()));
        }
        let candidate = self.stabilizer_element_mask(p.x_mask())?;
        if candidate.z_mask() != p.z_mask() {
            return Ok(0);
        }
        Ok(if candidate.phase() == p.phase() { 1 } else { -1 })
    }

    /// Expectation of a Pauli sum in this graph's state.
    pub fn graph_state_expectation_sum(&self, sum: &crate::pauli::PauliSum) -> Result<f64> {
        if sum.n() != self.n {
            return Err(Error::DimensionMismatch(sum.n(), self.n));
        }
        let mut total = 0.0;
        for (coeff, p) in sum.terms() {
            total += coeff * self.graph_state_expectation(p)? as f64;
        }
        Ok(total)
    }
}

pub fn mask_to_vertices(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize + 1);
        m &= m - 1;
    }
    out
}

pub fn vertices_to_mask(vertices: &[usize]) -> u64 {
    vertices.iter().fold(0u64, |m, &v| m | 1 << (v - 1))
}

/// Named graph families used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Linear cluster: path 1-2-...-n.
    LC,
    /// Ring cluster: cycle on n >= 3 vertices.
    RC,
    /// Star: vertex 1 joined to all others, n >= 2.
    ST,
    /// Fully connected graph.
    FC,
    /// Rectangular grid, row-major numbering, 4-neighbour adjacency.
    Grid,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::LC => "LC",
            Family::RC => "RC",
            Family::ST => "ST",
            Family::FC => "FC",
            Family::Grid => "GRID",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s.to_ascii_uppercase().as_str() {
            "LC" => Ok(Family::LC),
            "RC" => Ok(Family::RC),
            "ST" => Ok(Family::ST),
            "FC" => Ok(Family::FC),
            "GRID" => Ok(Family::Grid),
            _ => Err(Error::Construction(format!("unknown graph family {s:?}"))),
        }
    }
}

pub fn path(n: usize) -> Result<Graph> {
    let edges: Vec<_> = (1..n).map(|k| (k, k + 1)).collect();
    Graph::from_edges(n, &edges)
}

pub fn ring(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::Construction(format!("ring needs n >= 3, got {n}")));
    }
    let mut edges: Vec<_> = (1..n).map(|k| (k, k + 1)).collect();
    edges.push((n, 1));
    Graph::from_edges(n, &edges)
}

pub fn star(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Construction(format!("star needs n >= 2, got {n}")));
    }
    let edges: Vec<_> = (2..=n).map(|k| (1, k)).collect();
    Graph::from_edges(n, &edges)
}

pub fn complete(n: usize) -> Result<Graph> {
    let mut edges = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            edges.push((a, b));
        }
    }
    Graph::from_edges(n, &edges)
}

pub fn grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 {
        return Err(Error::Construction("grid needs rows, cols >= 1".to_string()));
    }
    let n = rows
        .checked_mul(cols)
        .filter(|&n| n <= MAX_QUBITS)
        .ok_or(Error::TooManyQubits(rows.saturating_mul(cols), MAX_QUBITS))?;
    let at = |r: usize, c: usize| (r - 1) * cols + c;
    let mut edges = Vec::new();
    for r in 1..=rows {
        for c in 1..=cols {
            if c < cols {
                edges.push((at(r, c), at(r, c + 1)));
            }
            if r < rows {
                edges.push((at(r, c), at(r + 1, c)));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Builds a family member; `n` is ignored for grids, which take rows x cols.
pub fn family(family: Family, n: usize, rows_cols: Option<(usize, usize)>) -> Result<Graph> {
    match family {
        Family::LC => path(n),
        Family::RC => ring(n),
        Family::ST => star(n),
        Family::FC => complete(n),
        Family::Grid => {
            let (rows, cols) = rows_cols.ok_or_else(|| {
                Error::Construction("grid family needs rows and cols".to_string())
            })?;
            grid(rows, cols)
        }
    }
}

/// Parses the edge-list format: optional # comment lines, then the vertex
/// count on its own line, then one edge ("a b", 1-based) per line. Duplicate
/// edges are idempotent.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut n: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match n {
            None => {
                if fields.len() != 1 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "expected the vertex count alone on the first line".to_string(),
                    });
                }
                let count: usize = fields[0].parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid vertex count {:?}", fields[0]),
                })?;
                if count == 0 || count > MAX_QUBITS {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("vertex count must be 1..=64, got {count}"),
                    });
                }
                n = Some(count);
            }
            Some(count) => {
                if fields.len() != 2 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected two vertex indices, got {} fields", fields.len()),
                    });
                }
                let mut pair = [0usize; 2];
                for (slot, field) in pair.iter_mut().zip(&fields) {
                    let v: usize = field.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid vertex index {field:?}"),
                    })?;
                    if v == 0 || v > count {
                        return Err(Error::Parse {
                            line: line_no,
                            message: format!("vertex {v} out of range 1..={count}"),
                        });
                    }
                    *slot = v;
                }
                if pair[0] == pair[1] {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("self-loop at vertex {}", pair[0]),
                    });
                }
                edges.push((pair[0], pair[1]));
            }
        }
    }
    let n = n.ok_or(Error::Parse { line: 0, message: "empty graph file".to_string() })?;
    Graph::from_edges(n, &edges)
}
