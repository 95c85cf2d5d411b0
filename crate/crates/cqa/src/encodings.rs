//! Problem-Hamiltonian builders: graph isomorphism on the n×n grid (with
//! the penalty baseline and the qudit/log-binary configuration models),
//! NAE3SAT clause sums, the LHZ local-field instance, and the closed-form
//! resource counts.
//!
//! Grid convention: site (i, j) of the n×n grid is bit i·n + j, and a
//! *down* spin (bit 1, σ^z = −1) marks vertex i of G₁ as mapped to vertex
//! j of G₂. Each row and column of an allowed state then carries
//! magnetization Σz = n − 2.

use crate::constraints::Constraint;
use crate::error::{CqaError, Result};
use crate::pauli::{Axis, Hamiltonian, PauliTerm};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Simple undirected graph on vertices 0..n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n_vertices: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson { n: g.n_vertices, edges: g.edges.iter().map(|&(u, v)| [u, v]).collect() }
    }
}

impl TryFrom<GraphJson> for Graph {
    type Error = CqaError;
    fn try_from(j: GraphJson) -> Result<Self> {
        Graph::new(j.n, &j.edges.iter().map(|&[u, v]| (u, v)).collect::<Vec<_>>())
    }
}

impl Graph {
    pub fn new(n_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            if u == v {
                return Err(CqaError::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if u >= n_vertices || v >= n_vertices {
                return Err(CqaError::InvalidGraph(format!(
                    "edge ({u},{v}) outside 0..{n_vertices}"
                )));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Self { n_vertices, edges: set })
    }

    pub fn complete(n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::new(n, &edges)
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::new(n, &(0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect::<Vec<_>>())
    }

    pub fn ring(n: usize) -> Result<Self> {
        let mut edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        edges.push((n - 1, 0));
        Self::new(n, &edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edges.contains(&(u.min(v), u.max(v)))
    }

    /// All unordered vertex pairs that are not edges.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n_vertices {
            for v in u + 1..self.n_vertices {
                if !self.edges.contains(&(u, v)) {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

fn grid_site(n: usize, row: usize, col: usize) -> usize {
    row * n + col
}

/// (1−Z_a)(1−Z_b)/4: the both-mapped indicator for two grid sites.
fn both_mapped(n_sites: usize, a: usize, b: usize) -> Result<[PauliTerm; 4]> {
    let quarter = c(0.25);
    Ok([
        PauliTerm::identity(n_sites, quarter),
        PauliTerm::single(n_sites, a, Axis::Z)?.scaled(-quarter),
        PauliTerm::single(n_sites, b, Axis::Z)?.scaled(-quarter),
        PauliTerm::string(n_sites, (1u64 << a) | (1u64 << b), Axis::Z, quarter)?,
    ])
}

/// Grid encoding of graph isomorphism: the problem Hamiltonian counts edge
/// mismatches between the graphs under the mapping, and the 2n bijectivity
/// constraints fix every row and column to one mapped vertex
/// (magnetization n−2).
pub fn build_gi_grid(g1: &Graph, g2: &Graph) -> Result<(Hamiltonian, Vec<Constraint>)> {
    let n = g1.n_vertices();
    if n != g2.n_vertices() {
        return Err(CqaError::VertexCountMismatch { left: n, right: g2.n_vertices() });
    }
    if n < 2 {
        return Err(CqaError::InvalidGraph("need at least two vertices".into()));
    }
    let sites = n * n;
    let mut terms = Vec::new();
    // Both assignments of an unordered pair to an unordered pair are
    // penalized, so a permutation state picks up exactly one unit per edge
    // mismatch.
    let mut penalize = |i: usize, j: usize, u: usize, v: usize| -> Result<()> {
        terms.extend(both_mapped(sites, grid_site(n, i, u), grid_site(n, j, v))?);
        terms.extend(both_mapped(sites, grid_site(n, i, v), grid_site(n, j, u))?);
        Ok(())
    };
    for &(i, j) in &g1.non_edges() {
        for (u, v) in g2.edges() {
            penalize(i, j, u, v)?;
        }
    }
    for (i, j) in g1.edges() {
        for &(u, v) in &g2.non_edges() {
            penalize(i, j, u, v)?;
        }
    }
    let h = Hamiltonian::from_terms(sites, terms)?;

    let mut constraints = Vec::with_capacity(2 * n);
    for row in 0..n {
        let mut coeffs = vec![0i64; sites];
        for col in 0..n {
            coeffs[grid_site(n, row, col)] = 1;
        }
        constraints.push(Constraint::linear_z(coeffs, n as i64 - 2)?);
    }
    for col in 0..n {
        let mut coeffs = vec![0i64; sites];
        for row in 0..n {
            coeffs[grid_site(n, row, col)] = 1;
        }
        constraints.push(Constraint::linear_z(coeffs, n as i64 - 2)?);
    }
    Ok((h, constraints))
}

/// Penalty baseline for the 2n bijectivity constraints:
/// Σ over rows and columns of (mapped count − 1)², expanded to Z strings.
/// Zero exactly on permutation states.
pub fn build_gi_penalty(n: usize) -> Result<Hamiltonian> {
    if n < 2 {
        return Err(CqaError::InvalidGraph("need at least two vertices".into()));
    }
    let sites = n * n;
    let mut total = Hamiltonian::zero(sites)?;
    let mut add_line = |line_sites: Vec<usize>| -> Result<()> {
        // Σ (1−Z)/2 − 1 over the line, then squared.
        let mut terms = vec![PauliTerm::identity(sites, c(n as f64 / 2.0 - 1.0))];
        for &s in &line_sites {
            terms.push(PauliTerm::single(sites, s, Axis::Z)?.scaled(c(-0.5)));
        }
        let line = Hamiltonian::from_terms(sites, terms)?;
        total = total.add(&line.compose(&line)?)?;
        Ok(())
    };
    for row in 0..n {
        add_line((0..n).map(|col| grid_site(n, row, col)).collect())?;
    }
    for col in 0..n {
        add_line((0..n).map(|row| grid_site(n, row, col)).collect())?;
    }
    Ok(total)
}

/// Independent oracle-style evaluation: the number of edge mismatches
/// between two graphs under an explicit vertex mapping.
pub fn mismatch_count(g1: &Graph, g2: &Graph, image: &[usize]) -> usize {
    let n = g1.n_vertices();
    let mut count = 0;
    for i in 0..n {
        for j in i + 1..n {
            let e1 = g1.has_edge(i, j);
            let e2 = image[i] != image[j] && g2.has_edge(image[i], image[j]);
            if e1 != e2 {
                count += 1;
            }
        }
    }
    count
}

/// NAE3SAT problem Hamiltonian: clause projectors over the non-constrained
/// clauses only; the constrained clauses are enforced by the driver.
pub fn build_nae_problem(n: usize, clauses: &[Constraint], constrained: &[usize]) -> Result<Hamiltonian> {
    for c in clauses {
        if !matches!(c, Constraint::ClauseIndicator { .. }) {
            return Err(CqaError::InvalidConstraint("clause list must hold clause indicators".into()));
        }
    }
    let mut marked = vec![false; clauses.len()];
    let mut covered = 0u64;
    for &idx in constrained {
        if idx >= clauses.len() {
            return Err(CqaError::InvalidConstraint(format!("constrained index {idx} out of range")));
        }
        marked[idx] = true;
        if let Constraint::ClauseIndicator { support, .. } = &clauses[idx] {
            let mask = support.iter().fold(0u64, |m, &s| m | 1 << s);
            if covered & mask != 0 {
                return Err(CqaError::OverlappingSupports(format!(
                    "constrained clause {idx} overlaps another constrained clause"
                )));
            }
            covered |= mask;
        }
    }
    let mut h = Hamiltonian::zero(n)?;
    for (idx, clause) in clauses.iter().enumerate() {
        if !marked[idx] {
            h = h.add(&clause.as_hamiltonian(n)?)?;
        }
    }
    Ok(h)
}

/// LHZ instance: M = n(n−1)/2 physical spins with local fields J_k and
/// L = M − n parity-cycle constraints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LhzInstanceJson", into = "LhzInstanceJson")]
pub struct LhzInstance {
    n_logical: usize,
    j: Vec<f64>,
    cycles: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct LhzInstanceJson {
    n_logical: usize,
    #[serde(rename = "J")]
    j: Vec<f64>,
    cycles: Vec<Vec<usize>>,
}

impl From<LhzInstance> for LhzInstanceJson {
    fn from(inst: LhzInstance) -> Self {
        LhzInstanceJson { n_logical: inst.n_logical, j: inst.j, cycles: inst.cycles }
    }
}

impl TryFrom<LhzInstanceJson> for LhzInstance {
    type Error = CqaError;
    fn try_from(j: LhzInstanceJson) -> Result<Self> {
        LhzInstance::new(j.n_logical, j.j, j.cycles)
    }
}

impl LhzInstance {
    pub fn new(n_logical: usize, j: Vec<f64>, cycles: Vec<Vec<usize>>) -> Result<Self> {
        if n_logical < 3 {
            return Err(CqaError::InvalidInstance("LHZ needs at least 3 logical spins".into()));
        }
        let m = n_logical * (n_logical - 1) / 2;
        let l = m - n_logical;
        if j.len() != m {
            return Err(CqaError::LengthMismatch { expected: m, actual: j.len() });
        }
        if cycles.len() != l {
            return Err(CqaError::InvalidInstance(format!(
                "expected L = M − n = {l} cycles, got {}",
                cycles.len()
            )));
        }
        for cyc in &cycles {
            if cyc.len() < 3 {
                return Err(CqaError::InvalidCycle(format!("cycle length {} < 3", cyc.len())));
            }
            let mut seen = BTreeSet::new();
            for &s in cyc {
                if s >= m {
                    return Err(CqaError::SiteOutOfRange { site: s, n_sites: m });
                }
                if !seen.insert(s) {
                    return Err(CqaError::InvalidCycle(format!("site {s} repeated in cycle")));
                }
            }
        }
        Ok(Self { n_logical, j, cycles })
    }

    /// Physical spin index of the logical pair (i, j), i < j.
    pub fn pair_index(n_logical: usize, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < n_logical);
        i * n_logical - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Canonical instance: triangle cycles (0,i)(0,j)(i,j) for
    /// 1 ≤ i < j < n, dropping the last one so that exactly L = M − n
    /// spanning parity checks remain.
    pub fn with_triangle_cycles(n_logical: usize, j: Vec<f64>) -> Result<Self> {
        if n_logical < 3 {
            return Err(CqaError::InvalidInstance("LHZ needs at least 3 logical spins".into()));
        }
        let mut cycles = Vec::new();
        for a in 1..n_logical {
            for b in a + 1..n_logical {
                cycles.push(vec![
                    Self::pair_index(n_logical, 0, a),
                    Self::pair_index(n_logical, 0, b),
                    Self::pair_index(n_logical, a, b),
                ]);
            }
        }
        cycles.pop();
        Self::new(n_logical, j, cycles)
    }

    pub fn n_logical(&self) -> usize {
        self.n_logical
    }
    pub fn num_spins(&self) -> usize {
        self.n_logical * (self.n_logical - 1) / 2
    }
    pub fn num_cycles(&self) -> usize {
        self.cycles.len()
    }
    pub fn fields(&self) -> &[f64] {
        &self.j
    }
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }
}

/// Local-field problem Hamiltonian Σ J_k Z_k plus Z-parity constraints for
/// the selected cycles. Cycle overlap is allowed here; only the two-flip
/// driver path restricts to non-overlapping cycles.
pub fn build_lhz(inst: &LhzInstance, constrained: &[usize]) -> Result<(Hamiltonian, Vec<Constraint>)> {
    let m = inst.num_spins();
    let mut terms = Vec::with_capacity(m);
    for (k, &jk) in inst.fields().iter().enumerate() {
        terms.push(PauliTerm::single(m, k, Axis::Z)?.scaled(c(jk)));
    }
    let h = Hamiltonian::from_terms(m, terms)?;
    let mut constraints = Vec::with_capacity(constrained.len());
    let mut seen = BTreeSet::new();
    for &idx in constrained {
        if idx >= inst.num_cycles() {
            return Err(CqaError::InvalidInstance(format!("cycle index {idx} out of range")));
        }
        if !seen.insert(idx) {
            continue;
        }
        constraints.push(Constraint::z_parity(inst.cycles()[idx].clone(), 1)?);
    }
    Ok((h, constraints))
}

/// Penalty baseline Σ αₗ(1 − Cₗ) for the selected cycles; 0 on satisfying
/// states and 2αₗ per violated cycle.
pub fn lhz_penalty(inst: &LhzInstance, cycle_indices: &[usize], alphas: &[f64]) -> Result<Hamiltonian> {
    if cycle_indices.len() != alphas.len() {
        return Err(CqaError::LengthMismatch { expected: cycle_indices.len(), actual: alphas.len() });
    }
    let m = inst.num_spins();
    let mut terms = Vec::new();
    for (&idx, &alpha) in cycle_indices.iter().zip(alphas) {
        if idx >= inst.num_cycles() {
            return Err(CqaError::InvalidInstance(format!("cycle index {idx} out of range")));
        }
        let mask = inst.cycles()[idx].iter().fold(0u64, |acc, &s| acc | 1 << s);
        terms.push(PauliTerm::identity(m, c(alpha)));
        terms.push(PauliTerm::string(m, mask, Axis::Z, c(-alpha))?);
    }
    Hamiltonian::from_terms(m, terms)
}

/// Generator that swaps two values between two word positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HopGenerator {
    pub positions: (usize, usize),
    pub values: (u8, u8),
}

impl HopGenerator {
    /// Applies the swap if the word matches in either orientation.
    pub fn apply(&self, word: &[u8]) -> Option<Vec<u8>> {
        let (p, q) = self.positions;
        let (a, b) = self.values;
        if (word[p], word[q]) == (a, b) || (word[p], word[q]) == (b, a) {
            let mut out = word.to_vec();
            out.swap(p, q);
            Some(out)
        } else {
            None
        }
    }
}

/// Discrete configuration space: words over an alphabet with a diagonal
/// cost and value-swap hop generators. Realizes both the n-level qudit
/// encoding and the ⌈log₂n⌉-qubit block encoding of the mapping word.
pub struct ConfigModel {
    pub word_length: usize,
    pub alphabet_size: usize,
    cost: Box<dyn Fn(&[u8]) -> f64 + Send + Sync>,
    pub hops: Vec<HopGenerator>,
}

impl ConfigModel {
    pub fn new(
        word_length: usize,
        alphabet_size: usize,
        cost: Box<dyn Fn(&[u8]) -> f64 + Send + Sync>,
        hops: Vec<HopGenerator>,
    ) -> Result<Self> {
        for h in &hops {
            if h.positions.0 >= word_length || h.positions.1 >= word_length {
                return Err(CqaError::SiteOutOfRange {
                    site: h.positions.0.max(h.positions.1),
                    n_sites: word_length,
                });
            }
            if h.values.0 as usize >= alphabet_size || h.values.1 as usize >= alphabet_size {
                return Err(CqaError::InvalidInstance("hop value outside the alphabet".into()));
            }
        }
        Ok(Self { word_length, alphabet_size, cost, hops })
    }

    pub fn cost(&self, word: &[u8]) -> f64 {
        (self.cost)(word)
    }

    /// Every word of the configuration space (guarded against blow-up).
    pub fn enumerate_words(&self) -> Result<Vec<Vec<u8>>> {
        let count = (self.alphabet_size as u128).pow(self.word_length as u32);
        if count > 1 << 20 {
            return Err(CqaError::DimensionLimit { dim: usize::MAX, limit: 1 << 20 });
        }
        let mut words = vec![vec![0u8; self.word_length]];
        for pos in 0..self.word_length {
            let mut next = Vec::with_capacity(words.len() * self.alphabet_size);
            for w in &words {
                for v in 0..self.alphabet_size {
                    let mut w2 = w.clone();
                    w2[pos] = v as u8;
                    next.push(w2);
                }
            }
            words = next;
        }
        words.sort();
        Ok(words)
    }
}

/// All permutation words of length n (each value used once).
pub fn permutation_words(n: usize) -> Vec<Vec<u8>> {
    fn rec(n: usize, used: &mut u64, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n as u8 {
            if *used >> v & 1 == 0 {
                *used |= 1 << v;
                cur.push(v);
                rec(n, used, cur, out);
                cur.pop();
                *used &= !(1 << v);
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut 0, &mut Vec::new(), &mut out);
    out
}

/// Qudit encoding of graph isomorphism: word position i holds the image of
/// vertex i, the cost counts edge mismatches, and the hops swap the values
/// of neighboring positions on a periodic chain.
pub fn build_gi_qudit(g1: &Graph, g2: &Graph) -> Result<ConfigModel> {
    let n = g1.n_vertices();
    if n != g2.n_vertices() {
        return Err(CqaError::VertexCountMismatch { left: n, right: g2.n_vertices() });
    }
    if n < 2 {
        return Err(CqaError::InvalidGraph("need at least two vertices".into()));
    }
    let (g1c, g2c) = (g1.clone(), g2.clone());
    let cost = Box::new(move |word: &[u8]| {
        let image: Vec<usize> = word.iter().map(|&v| v as usize).collect();
        mismatch_count(&g1c, &g2c, &image) as f64
    });
    let mut hops = Vec::new();
    let neighbor_pairs = if n == 2 { 1 } else { n };
    for i in 0..neighbor_pairs {
        for a in 0..n as u8 {
            for b in a + 1..n as u8 {
                hops.push(HopGenerator { positions: (i, (i + 1) % n), values: (a, b) });
            }
        }
    }
    ConfigModel::new(n, n, cost, hops)
}

/// Encoding families with closed-form resource counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingKind {
    GiStandard,
    GiPartial,
    GiFourbody,
    GiLogBinary,
    GiQudit,
    Lhz,
}

impl std::str::FromStr for EncodingKind {
    type Err = CqaError;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| CqaError::InvalidFormat(format!("unknown encoding tag {s:?}")))
    }
}

/// Qubit and coupling-resource counts for one encoding at size n.
///
/// The `edges` field counts the resource the corresponding construction is
/// measured by: penalty-clique edges for the standard and partial grid
/// encodings, hop generators for the four-body/log-binary/qudit drivers,
/// and parity constraints for LHZ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceCount {
    pub qubits: u64,
    pub edges: u64,
}

fn ceil_log2(n: u64) -> u64 {
    u64::from(u64::BITS - (n - 1).leading_zeros())
}

pub fn resource_counts(encoding: EncodingKind, n: usize) -> Result<ResourceCount> {
    if n < 2 {
        return Err(CqaError::InvalidInstance(format!("encoding size {n} < 2")));
    }
    let n = n as u64;
    let counts = match encoding {
        EncodingKind::GiStandard => ResourceCount { qubits: n * n, edges: n * n * (n - 1) },
        EncodingKind::GiPartial => {
            ResourceCount { qubits: n * n, edges: n * n * (n - 1) / 2 + n * n }
        }
        EncodingKind::GiFourbody => ResourceCount { qubits: n * n, edges: n * n * (n - 1) / 2 },
        EncodingKind::GiLogBinary => {
            ResourceCount { qubits: n * ceil_log2(n), edges: n * n * (n - 1) / 2 }
        }
        EncodingKind::GiQudit => ResourceCount { qubits: n, edges: n * n * (n - 1) / 2 },
        EncodingKind::Lhz => {
            if n < 3 {
                return Err(CqaError::InvalidInstance(
                    "LHZ counts need n ≥ 3 (L = M − n is negative otherwise)".into(),
                ));
            }
            let m = n * (n - 1) / 2;
            ResourceCount { qubits: m, edges: m - n }
        }
    };
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::SectorBasis;
    use crate::spectral::ground_states;

    #[test]
    fn resource_formulas_match_reported_values() {
        let std8 = resource_counts(EncodingKind::GiStandard, 8).unwrap();
        assert_eq!(std8, ResourceCount { qubits: 64, edges: 448 });
        let partial8 = resource_counts(EncodingKind::GiPartial, 8).unwrap();
        assert_eq!(partial8.edges, 288);
        let log8 = resource_counts(EncodingKind::GiLogBinary, 8).unwrap();
        assert_eq!(log8.qubits, 24);
        let lhz4 = resource_counts(EncodingKind::Lhz, 4).unwrap();
        assert_eq!(lhz4, ResourceCount { qubits: 6, edges: 2 });
        assert!(resource_counts(EncodingKind::GiStandard, 1).is_err());
    }

    #[test]
    fn ceil_log2_is_exact() {
        for (n, want) in [(2u64, 1u64), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (16, 4), (17, 5)] {
            assert_eq!(ceil_log2(n), want, "n={n}");
        }
    }

    #[test]
    fn gi_grid_zero_for_matching_single_edge_graphs() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        let (h, constraints) = build_gi_grid(&g, &g).unwrap();
        assert_eq!(h.num_terms(), 0, "no mismatch terms at all");
        assert_eq!(constraints.len(), 4);
        for state in SectorBasis::permutations(2).unwrap().states() {
            assert!(h.diagonal_value(*state).norm() < 1e-14);
        }
    }

    #[test]
    fn gi_grid_matches_independent_mismatch_counter() {
        // every (graph pair, permutation) combination at n = 3 and 4
        let graphs3 =
            [Graph::path(3).unwrap(), Graph::complete(3).unwrap(), Graph::new(3, &[]).unwrap()];
        let graphs4 = [
            Graph::path(4).unwrap(),
            Graph::ring(4).unwrap(),
            Graph::new(4, &[(0, 1), (2, 3)]).unwrap(),
        ];
        let run = |graphs: &[Graph], n: usize| {
            for g1 in graphs {
                for g2 in graphs {
                    let (h, _) = build_gi_grid(g1, g2).unwrap();
                    for word in permutation_words(n) {
                        let image: Vec<usize> = word.iter().map(|&v| v as usize).collect();
                        let mut state = 0u64;
                        for (i, &j) in image.iter().enumerate() {
                            state |= 1 << (i * n + j);
                        }
                        let direct = mismatch_count(g1, g2, &image) as f64;
                        let via_h = h.diagonal_value(state).re;
                        assert!(
                            (direct - via_h).abs() < 1e-10,
                            "{image:?}: counter {direct} vs H_p {via_h}"
                        );
                    }
                }
            }
        };
        run(&graphs3, 3);
        run(&graphs4, 4);
    }

    #[test]
    fn gi_grid_separates_path_from_triangle() {
        let (h, _) = build_gi_grid(&Graph::path(3).unwrap(), &Graph::complete(3).unwrap()).unwrap();
        let min: f64 = SectorBasis::permutations(3)
            .unwrap()
            .states()
            .iter()
            .map(|&s| h.diagonal_value(s).re)
            .fold(f64::INFINITY, f64::min);
        assert!(min > 0.5, "non-isomorphic pair keeps positive sector energy, min {min}");
    }

    #[test]
    fn gi_grid_triangles_have_flat_zero_sector() {
        let g = Graph::complete(3).unwrap();
        let (h, _) = build_gi_grid(&g, &g).unwrap();
        for &s in SectorBasis::permutations(3).unwrap().states() {
            assert!(h.diagonal_value(s).norm() < 1e-14);
        }
    }

    #[test]
    fn gi_grid_rejects_size_mismatch() {
        let a = Graph::path(3).unwrap();
        let b = Graph::path(4).unwrap();
        assert!(matches!(build_gi_grid(&a, &b), Err(CqaError::VertexCountMismatch { .. })));
    }

    #[test]
    fn penalty_vanishes_exactly_on_permutations() {
        let n = 3;
        let pen = build_gi_penalty(n).unwrap();
        assert!(pen.is_diagonal());
        let perms = SectorBasis::permutations(n).unwrap();
        for state in 0..1u64 << (n * n) {
            let v = pen.diagonal_value(state).re;
            if perms.contains(state) {
                assert!(v.abs() < 1e-12, "permutation state has penalty {v}");
            } else {
                assert!(v > 0.5, "non-permutation state {state:09b} has penalty {v}");
            }
        }
        // all spins up: every line holds zero mapped vertices, (0−1)² each
        assert!((pen.diagonal_value(0).re - 2.0 * n as f64).abs() < 1e-12);
    }

    #[test]
    fn penalized_ground_space_equals_sector_ground_space() {
        // isomorphic paths with two isomorphisms
        let g1 = Graph::path(3).unwrap();
        let g2 = Graph::new(3, &[(0, 2), (1, 2)]).unwrap();
        let (hp, _) = build_gi_grid(&g1, &g2).unwrap();
        let alpha = 2.0 * hp.one_norm() + 1.0;
        let penalized = hp.add(&build_gi_penalty(3).unwrap().scaled(c(alpha))).unwrap();

        let perms = SectorBasis::permutations(3).unwrap();
        let sector_best: f64 =
            perms.states().iter().map(|&s| hp.diagonal_value(s).re).fold(f64::INFINITY, f64::min);
        let sector_ground: Vec<u64> = perms
            .states()
            .iter()
            .copied()
            .filter(|&s| hp.diagonal_value(s).re < sector_best + 1e-10)
            .collect();
        assert_eq!(sector_ground.len(), 2, "two isomorphisms");

        let eig = ground_states(&penalized, 4).unwrap();
        assert_eq!(eig.ground_multiplicity, sector_ground.len());
        for vec in eig.eigenvectors.iter().take(eig.ground_multiplicity) {
            let weight: f64 = sector_ground.iter().map(|&s| vec[s as usize].norm_sqr()).sum();
            assert!((weight - 1.0).abs() < 1e-10, "penalized ground leaks: {weight}");
        }
    }

    #[test]
    fn nae_problem_counts_only_free_clauses() {
        let c0 = Constraint::clause([0, 1, 2], [0b000, 0b111]).unwrap();
        let c1 = Constraint::clause([3, 4, 5], [0b001, 0b110]).unwrap();
        let all = build_nae_problem(6, &[c0.clone(), c1.clone()], &[0, 1]).unwrap();
        assert_eq!(all.num_terms(), 0, "all clauses constrained leaves the zero operator");

        let one_free = build_nae_problem(6, &[c0.clone(), c1.clone()], &[1]).unwrap();
        for state in 0..64u64 {
            let expect = c0.eval(state) as f64;
            assert!((one_free.diagonal_value(state).re - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn nae_problem_checks_constrained_overlap() {
        let c0 = Constraint::clause([0, 1, 2], [0b000, 0b111]).unwrap();
        let c1 = Constraint::clause([2, 3, 4], [0b001, 0b110]).unwrap();
        assert!(build_nae_problem(5, &[c0.clone(), c1.clone()], &[0, 1]).is_err());
        // overlap among unconstrained clauses is fine
        assert!(build_nae_problem(5, &[c0, c1], &[]).is_ok());
    }

    #[test]
    fn lhz_instance_arithmetic() {
        let inst = LhzInstance::with_triangle_cycles(4, vec![0.5, -1.2, 0.8, -0.3, 1.1, -0.7]).unwrap();
        assert_eq!(inst.num_spins(), 6);
        assert_eq!(inst.num_cycles(), 2);
        assert!(LhzInstance::new(4, vec![0.0; 5], vec![]).is_err(), "wrong field count");
        assert!(LhzInstance::new(4, vec![0.0; 6], vec![vec![0, 1, 3]]).is_err(), "wrong cycle count");
    }

    #[test]
    fn lhz_penalty_values() {
        let inst = LhzInstance::with_triangle_cycles(4, vec![0.5, -1.2, 0.8, -0.3, 1.1, -0.7]).unwrap();
        let alpha = 3.0;
        let pen = lhz_penalty(&inst, &[0, 1], &[alpha, alpha]).unwrap();
        let (_, constraints) = build_lhz(&inst, &[0, 1]).unwrap();
        for state in 0..1u64 << 6 {
            let violated =
                constraints.iter().filter(|c| !c.is_satisfied(state)).count() as f64;
            assert!((pen.diagonal_value(state).re - 2.0 * alpha * violated).abs() < 1e-12);
        }
    }

    #[test]
    fn lhz_sector_ground_matches_penalized_ground() {
        let inst = LhzInstance::with_triangle_cycles(4, vec![0.5, -1.2, 0.8, -0.3, 1.1, -0.7]).unwrap();
        let (hp, constraints) = build_lhz(&inst, &[0, 1]).unwrap();
        let alpha = 2.0 * hp.one_norm() + 1.0;
        let penalized = hp.add(&lhz_penalty(&inst, &[0, 1], &[alpha, alpha]).unwrap()).unwrap();

        let sector = SectorBasis::from_constraints(&constraints, 6).unwrap();
        let sector_e0: f64 =
            sector.states().iter().map(|&s| hp.diagonal_value(s).re).fold(f64::INFINITY, f64::min);
        let eig = ground_states(&penalized, 2).unwrap();
        assert!((eig.eigenvalues[0] - sector_e0).abs() < 1e-10);
        let ground_state: u64 = sector
            .states()
            .iter()
            .copied()
            .min_by(|&a, &b| {
                hp.diagonal_value(a).re.partial_cmp(&hp.diagonal_value(b).re).unwrap()
            })
            .unwrap();
        assert!((eig.eigenvectors[0][ground_state as usize].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qudit_cost_and_hops() {
        let g1 = Graph::path(3).unwrap();
        let g2 = Graph::new(3, &[(0, 2), (1, 2)]).unwrap();
        let model = build_gi_qudit(&g1, &g2).unwrap();
        // path 0-1-2 mapped by (0↦0, 1↦2, 2↦1): edges {0,1}↦{0,2} ok, {1,2}↦{2,1} ok
        assert_eq!(model.cost(&[0, 2, 1]), 0.0);
        assert!(model.cost(&[0, 1, 2]) > 0.0);

        let hop = HopGenerator { positions: (0, 1), values: (0, 1) };
        assert_eq!(hop.apply(&[0, 1, 2]), Some(vec![1, 0, 2]));
        assert_eq!(hop.apply(&[1, 0, 2]), Some(vec![0, 1, 2]), "both orientations swap");
        assert_eq!(hop.apply(&[2, 1, 0]), None);
    }

    #[test]
    fn qudit_hops_preserve_value_multisets() {
        let g = Graph::complete(3).unwrap();
        let model = build_gi_qudit(&g, &g).unwrap();
        for word in model.enumerate_words().unwrap() {
            let mut hist = [0usize; 3];
            for &v in &word {
                hist[v as usize] += 1;
            }
            for hop in &model.hops {
                if let Some(next) = hop.apply(&word) {
                    let mut hist2 = [0usize; 3];
                    for &v in &next {
                        hist2[v as usize] += 1;
                    }
                    assert_eq!(hist, hist2);
                }
            }
        }
    }

    #[test]
    fn qudit_cost_agrees_with_grid_hamiltonian_on_permutations() {
        let g1 = Graph::path(4).unwrap();
        let g2 = Graph::ring(4).unwrap();
        let model = build_gi_qudit(&g1, &g2).unwrap();
        let (h, _) = build_gi_grid(&g1, &g2).unwrap();
        for word in permutation_words(4) {
            let mut state = 0u64;
            for (i, &j) in word.iter().enumerate() {
                state |= 1 << (i * 4 + j as usize);
            }
            assert!((model.cost(&word) - h.diagonal_value(state).re).abs() < 1e-10);
        }
    }

    #[test]
    fn graph_json_round_trip() {
        let g = Graph::new(4, &[(0, 1), (2, 3), (1, 2)]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: Graph = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
        assert!(serde_json::from_str::<Graph>("{\"n\":2,\"edges\":[[0,0]]}").is_err());
    }
}
