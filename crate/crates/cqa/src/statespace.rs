//! Verification engine for the two driver requirements: closure (hops
//! never leave a charge sector) and completeness (every allowed
//! configuration is reachable from every other by a sequence of hops).
//!
//! Closure is checked over the full basis, state by state, so that it is
//! equivalent to commutation with every constraint; completeness is a
//! connectivity check of the hop graph on the designated sector.

use crate::constraints::{Constraint, SectorBasis};
use crate::encodings::ConfigModel;
use crate::error::{CqaError, Result};
use crate::pauli::Hamiltonian;
use serde::Serialize;
use std::collections::BTreeSet;

/// Transition amplitudes at or below this threshold (after merging terms
/// with a common x-mask) are structural zeros, not hops.
pub const AMP_TOL: f64 = 1e-12;

const MAX_WITNESSES: usize = 32;

/// Undirected graph of driver-induced hops between sector states.
#[derive(Clone, Debug)]
pub struct HopGraph {
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl HopGraph {
    fn from_edge_set(n_nodes: usize, set: BTreeSet<(usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n_nodes];
        for &(u, v) in &set {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Self { n_nodes, edges: set.into_iter().collect(), adjacency }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// True iff the graph has a single connected component.
    pub fn is_connected(&self) -> Result<bool> {
        if self.n_nodes == 0 {
            return Err(CqaError::EmptySector);
        }
        Ok(self.reachable_from(0) == self.n_nodes)
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.n_nodes];
        let mut count = 0;
        for start in 0..self.n_nodes {
            if !seen[start] {
                count += 1;
                self.mark_component(start, &mut seen);
            }
        }
        count
    }

    fn reachable_from(&self, start: usize) -> usize {
        let mut seen = vec![false; self.n_nodes];
        self.mark_component(start, &mut seen)
    }

    fn mark_component(&self, start: usize, seen: &mut [bool]) -> usize {
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0;
        while let Some(u) = stack.pop() {
            count += 1;
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        count
    }
}

/// Hop graph induced by a driver Hamiltonian on a sector basis: an edge
/// wherever the summed transition amplitude between two sector states
/// exceeds [`AMP_TOL`]. Transitions leaving the sector are not edges; use
/// [`check_closure`] to detect them.
pub fn hop_graph(driver: &Hamiltonian, sector: &SectorBasis) -> Result<HopGraph> {
    if driver.n_sites() != sector.n_sites() {
        return Err(CqaError::SiteCountMismatch { left: driver.n_sites(), right: sector.n_sites() });
    }
    if sector.is_empty() {
        return Err(CqaError::EmptySector);
    }
    let mut set = BTreeSet::new();
    for (iu, &u) in sector.states().iter().enumerate() {
        for (v, amp) in driver.transitions(u) {
            if v == u || amp.norm() <= AMP_TOL {
                continue;
            }
            if let Some(iv) = sector.index_of(v) {
                set.insert((iu.min(iv), iu.max(iv)));
            }
        }
    }
    Ok(HopGraph::from_edge_set(sector.len(), set))
}

/// Hop graph of a configuration model on an explicit word list.
pub fn hop_graph_config(model: &ConfigModel, words: &[Vec<u8>]) -> Result<HopGraph> {
    if words.is_empty() {
        return Err(CqaError::EmptySector);
    }
    let index: std::collections::BTreeMap<&[u8], usize> =
        words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let mut set = BTreeSet::new();
    for (iu, word) in words.iter().enumerate() {
        if word.len() != model.word_length {
            return Err(CqaError::LengthMismatch { expected: model.word_length, actual: word.len() });
        }
        for hop in &model.hops {
            if let Some(next) = hop.apply(word) {
                if let Some(&iv) = index.get(next.as_slice()) {
                    if iu != iv {
                        set.insert((iu.min(iv), iu.max(iv)));
                    }
                }
            }
        }
    }
    Ok(HopGraph::from_edge_set(words.len(), set))
}

/// One closure violation: a driver transition that changes a constraint
/// value.
#[derive(Clone, Debug, Serialize)]
pub struct ClosureWitness {
    pub state: u64,
    pub target: u64,
    pub constraint: usize,
    pub value_in: i64,
    pub value_out: i64,
}

/// Result of the exhaustive closure scan.
#[derive(Clone, Debug, Serialize)]
pub struct ClosureReport {
    pub pass: bool,
    /// Total number of violating (state, transition, constraint) triples.
    pub violations: u64,
    /// First few violations, for diagnostics.
    pub witnesses: Vec<ClosureWitness>,
    pub states_checked: u64,
}

/// Checks, for every basis state of the full space, that every driver
/// transition preserves every constraint value. This is the per-state form
/// of the commutation condition: it passes iff the driver commutes with
/// each constraint observable.
pub fn check_closure(driver: &Hamiltonian, constraints: &[Constraint]) -> Result<ClosureReport> {
    let n = driver.n_sites();
    if n > crate::constraints::MAX_ENUM_SITES {
        return Err(CqaError::DimensionLimit {
            dim: usize::MAX,
            limit: 1 << crate::constraints::MAX_ENUM_SITES,
        });
    }
    for cst in constraints {
        if cst.min_sites() > n {
            return Err(CqaError::SiteOutOfRange { site: cst.min_sites() - 1, n_sites: n });
        }
    }
    let mut report = ClosureReport { pass: true, violations: 0, witnesses: Vec::new(), states_checked: 0 };
    for u in 0..1u64 << n {
        report.states_checked += 1;
        for (v, amp) in driver.transitions(u) {
            if v == u || amp.norm() <= AMP_TOL {
                continue;
            }
            for (ci, cst) in constraints.iter().enumerate() {
                let value_in = cst.eval(u);
                let value_out = cst.eval(v);
                if value_in != value_out {
                    report.pass = false;
                    report.violations += 1;
                    if report.witnesses.len() < MAX_WITNESSES {
                        report.witnesses.push(ClosureWitness {
                            state: u,
                            target: v,
                            constraint: ci,
                            value_in,
                            value_out,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Combined verification artifact: closure over the full space plus
/// connectivity diagnostics on the sector selected by the constraint
/// targets. Minimality of the hopping set is not certified; the term count
/// and maximum support are reported as diagnostics only.
#[derive(Clone, Debug, Serialize)]
pub struct DriverReport {
    pub closure: ClosureReport,
    pub sector_size: usize,
    pub connected: bool,
    pub components: usize,
    pub max_term_support: usize,
    pub term_count: usize,
}

/// Runs [`check_closure`] and the hop-graph connectivity check on the
/// sector defined by the constraint targets.
pub fn analyze_driver(driver: &Hamiltonian, constraints: &[Constraint]) -> Result<DriverReport> {
    let closure = check_closure(driver, constraints)?;
    let sector = SectorBasis::from_constraints(constraints, driver.n_sites())?;
    let (connected, components) = if sector.is_empty() {
        (false, 0)
    } else {
        let graph = hop_graph(driver, &sector)?;
        (graph.is_connected()?, graph.components())
    };
    Ok(DriverReport {
        closure,
        sector_size: sector.len(),
        connected,
        components,
        max_term_support: driver.max_term_support(),
        term_count: driver.num_terms(),
    })
}
