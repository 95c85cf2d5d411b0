//! Diagonal constraint operators, sector enumeration, and the mod-2 linear
//! solver for parity-cycle systems.
//!
//! A constraint is a diagonal observable `C` with a target value `c`; a
//! basis state is allowed when every constraint evaluates to its target.
//! Values follow the global bit convention (bit 0 ↔ σ^z = +1).

use crate::error::{CqaError, Result};
use crate::pauli::{Axis, Hamiltonian, PauliTerm, transfer_string};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Enumeration guard: sectors are enumerated over at most 2^24 states.
pub const MAX_ENUM_SITES: usize = 24;

/// Diagonal constraint observable with its target value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Constraint {
    /// Σᵢ coeffs[i]·zᵢ = target, with zᵢ = ±1 in spin units.
    LinearZ { coeffs: Vec<i64>, target: i64 },
    /// Πᵢ zᵢ over the support = target (±1).
    ZParity { support: Vec<usize>, target: i64 },
    /// Indicator of a 3-site clause violation: 1 on the pair {j, j̄}
    /// (a configuration and its global negation), 0 elsewhere; target 0.
    ClauseIndicator { support: [usize; 3], violating_pair: [u8; 2] },
}

impl Constraint {
    pub fn linear_z(coeffs: Vec<i64>, target: i64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(CqaError::InvalidConstraint("linear_z needs at least one site".into()));
        }
        Ok(Constraint::LinearZ { coeffs, target })
    }

    /// All-ones linear constraint: the total magnetization Σᵢ zᵢ.
    pub fn total_magnetization(n: usize, target: i64) -> Result<Self> {
        Self::linear_z(vec![1; n], target)
    }

    pub fn z_parity(support: Vec<usize>, target: i64) -> Result<Self> {
        if support.is_empty() {
            return Err(CqaError::InvalidConstraint("z_parity needs a nonempty support".into()));
        }
        if target != 1 && target != -1 {
            return Err(CqaError::InvalidConstraint(format!("z_parity target must be ±1, got {target}")));
        }
        let mut sorted = support;
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(CqaError::InvalidConstraint("z_parity support has repeated sites".into()));
        }
        Ok(Constraint::ZParity { support: sorted, target })
    }

    pub fn clause(support: [usize; 3], violating_pair: [u8; 2]) -> Result<Self> {
        if support[0] == support[1] || support[0] == support[2] || support[1] == support[2] {
            return Err(CqaError::InvalidConstraint("clause support has repeated sites".into()));
        }
        let [j, jbar] = violating_pair;
        if j > 7 || jbar > 7 {
            return Err(CqaError::InvalidConstraint("clause configurations are 3-bit values".into()));
        }
        if jbar != j ^ 0b111 {
            return Err(CqaError::InvalidConstraint(
                "violating pair must be closed under global negation".into(),
            ));
        }
        Ok(Constraint::ClauseIndicator { support, violating_pair })
    }

    /// Smallest site count on which this constraint is well formed.
    pub fn min_sites(&self) -> usize {
        match self {
            Constraint::LinearZ { coeffs, .. } => coeffs.len(),
            Constraint::ZParity { support, .. } => support.iter().max().map_or(0, |m| m + 1),
            Constraint::ClauseIndicator { support, .. } => support.iter().max().unwrap() + 1,
        }
    }

    pub fn target(&self) -> i64 {
        match self {
            Constraint::LinearZ { target, .. } => *target,
            Constraint::ZParity { target, .. } => *target,
            Constraint::ClauseIndicator { .. } => 0,
        }
    }

    /// Diagonal evaluation on a basis state.
    pub fn eval(&self, state: u64) -> i64 {
        match self {
            Constraint::LinearZ { coeffs, .. } => coeffs
                .iter()
                .enumerate()
                .map(|(i, &a)| if state >> i & 1 == 1 { -a } else { a })
                .sum(),
            Constraint::ZParity { support, .. } => {
                let downs: u32 = support.iter().map(|&s| (state >> s & 1) as u32).sum();
                if downs % 2 == 1 {
                    -1
                } else {
                    1
                }
            }
            Constraint::ClauseIndicator { support, violating_pair } => {
                let mut local = 0u8;
                for (k, &s) in support.iter().enumerate() {
                    local |= ((state >> s & 1) as u8) << k;
                }
                if local == violating_pair[0] || local == violating_pair[1] {
                    1
                } else {
                    0
                }
            }
        }
    }

    pub fn is_satisfied(&self, state: u64) -> bool {
        self.eval(state) == self.target()
    }

    /// The constraint observable as a diagonal Pauli-sum Hamiltonian whose
    /// diagonal equals [`Constraint::eval`] pointwise.
    pub fn as_hamiltonian(&self, n_sites: usize) -> Result<Hamiltonian> {
        if self.min_sites() > n_sites {
            return Err(CqaError::SiteOutOfRange { site: self.min_sites() - 1, n_sites });
        }
        match self {
            Constraint::LinearZ { coeffs, .. } => {
                let mut terms = Vec::new();
                for (i, &a) in coeffs.iter().enumerate() {
                    if a != 0 {
                        terms.push(
                            PauliTerm::single(n_sites, i, Axis::Z)?.scaled(Complex64::new(a as f64, 0.0)),
                        );
                    }
                }
                Hamiltonian::from_terms(n_sites, terms)
            }
            Constraint::ZParity { support, .. } => {
                let mut mask = 0u64;
                for &s in support {
                    mask |= 1u64 << s;
                }
                Hamiltonian::from_terms(
                    n_sites,
                    [PauliTerm::string(n_sites, mask, Axis::Z, Complex64::new(1.0, 0.0))?],
                )
            }
            Constraint::ClauseIndicator { support, violating_pair } => {
                // |j⟩⟨j| + |j̄⟩⟨j̄| expanded into Z strings.
                let mut terms = Vec::new();
                for &v in violating_pair {
                    terms.extend(transfer_string(n_sites, support, v as u64, v as u64)?);
                }
                Hamiltonian::from_terms(n_sites, terms)
            }
        }
    }
}

/// Enumerated basis of the subspace satisfying a constraint set.
///
/// States are sorted ascending; lookups are by binary search, so the basis
/// is its own index map.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorBasis {
    n_sites: usize,
    states: Vec<u64>,
}

impl SectorBasis {
    /// Brute-force enumeration of all allowed states (n ≤ 24).
    pub fn from_constraints(constraints: &[Constraint], n_sites: usize) -> Result<Self> {
        if n_sites > MAX_ENUM_SITES {
            return Err(CqaError::DimensionLimit { dim: 1 << n_sites.min(63), limit: 1 << MAX_ENUM_SITES });
        }
        for c in constraints {
            if c.min_sites() > n_sites {
                return Err(CqaError::SiteOutOfRange { site: c.min_sites() - 1, n_sites });
            }
        }
        let states = (0..1u64 << n_sites)
            .filter(|&s| constraints.iter().all(|c| c.is_satisfied(s)))
            .collect();
        Ok(Self { n_sites, states })
    }

    /// Wraps an explicit state list (deduplicated and sorted).
    pub fn from_states(n_sites: usize, mut states: Vec<u64>) -> Result<Self> {
        if n_sites > MAX_ENUM_SITES {
            return Err(CqaError::DimensionLimit { dim: 1 << n_sites.min(63), limit: 1 << MAX_ENUM_SITES });
        }
        states.sort_unstable();
        states.dedup();
        if let Some(&max) = states.last() {
            if max >> n_sites != 0 {
                return Err(CqaError::SiteOutOfRange { site: n_sites, n_sites });
            }
        }
        Ok(Self { n_sites, states })
    }

    /// The n²-site permutation-matrix sector: exactly one down spin per row
    /// and per column of an n×n grid (site (i,j) ↦ bit i·n+j). Direct
    /// generation for sizes where 2^(n²) enumeration is out of reach.
    pub fn permutations(n: usize) -> Result<Self> {
        if n * n > MAX_ENUM_SITES {
            return Err(CqaError::DimensionLimit { dim: usize::MAX, limit: 1 << MAX_ENUM_SITES });
        }
        let mut states = Vec::new();
        let mut image = vec![usize::MAX; n];
        fn rec(row: usize, n: usize, used: &mut u64, image: &mut [usize], out: &mut Vec<u64>) {
            if row == n {
                let mut s = 0u64;
                for (i, &j) in image.iter().enumerate() {
                    s |= 1u64 << (i * n + j);
                }
                out.push(s);
                return;
            }
            for j in 0..n {
                if *used >> j & 1 == 0 {
                    *used |= 1 << j;
                    image[row] = j;
                    rec(row + 1, n, used, image, out);
                    *used &= !(1 << j);
                }
            }
        }
        let mut used = 0u64;
        rec(0, n, &mut used, &mut image, &mut states);
        states.sort_unstable();
        Ok(Self { n_sites: n * n, states })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn len(&self) -> usize {
        self.states.len()
    }
    /// Empty sectors are reported as a state, not an error: downstream
    /// resource comparisons may still run.
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
    pub fn states(&self) -> &[u64] {
        &self.states
    }
    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }
    pub fn contains(&self, state: u64) -> bool {
        self.index_of(state).is_some()
    }

    /// Embeds sector coordinates into the full 2^n space.
    pub fn embed(&self, coords: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if coords.len() != self.len() {
            return Err(CqaError::LengthMismatch { expected: self.len(), actual: coords.len() });
        }
        let mut full = DVector::from_element(1usize << self.n_sites, Complex64::new(0.0, 0.0));
        for (i, &s) in self.states.iter().enumerate() {
            full[s as usize] = coords[i];
        }
        Ok(full)
    }

    /// Restriction of a full-space vector to sector coordinates.
    pub fn project(&self, full: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if full.len() != 1usize << self.n_sites {
            return Err(CqaError::LengthMismatch { expected: 1 << self.n_sites, actual: full.len() });
        }
        Ok(DVector::from_fn(self.len(), |i, _| full[self.states[i] as usize]))
    }

    /// Probability weight of a full-space vector inside the sector.
    pub fn weight(&self, full: &DVector<Complex64>) -> Result<f64> {
        if full.len() != 1usize << self.n_sites {
            return Err(CqaError::LengthMismatch { expected: 1 << self.n_sites, actual: full.len() });
        }
        Ok(self.states.iter().map(|&s| full[s as usize].norm_sqr()).sum())
    }
}

/// Solved form of a mod-2 parity system: each dependent variable is the
/// parity of a set of independent variables (plus an optional negation for
/// inhomogeneous rows).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gf2Solution {
    pub n_vars: usize,
    /// Dependent variables, one per independent row, ascending.
    pub dependent: Vec<usize>,
    /// For each dependent variable, the independent variables whose parity
    /// determines it.
    pub exprs: Vec<Vec<usize>>,
    /// Negation bit per dependent variable (true for rows with target −1).
    pub negations: Vec<bool>,
    /// All remaining variables, ascending.
    pub independent: Vec<usize>,
}

impl Gf2Solution {
    /// Completes an assignment of the independent variables. `indep_bits`
    /// uses the positions of [`Gf2Solution::independent`] (bit k ↔
    /// `independent[k]`); returns the full n-variable state.
    pub fn full_assignment(&self, indep_bits: u64) -> u64 {
        let mut state = 0u64;
        for (k, &v) in self.independent.iter().enumerate() {
            if indep_bits >> k & 1 == 1 {
                state |= 1u64 << v;
            }
        }
        for ((d, expr), &neg) in self.dependent.iter().zip(&self.exprs).zip(&self.negations) {
            let mut bit = neg as u64;
            for &v in expr {
                bit ^= state >> v & 1;
            }
            state |= bit << d;
        }
        state
    }
}

/// Row-reduces the parity system over GF(2) and solves for one dependent
/// variable per independent row.
///
/// Every constraint must be a [`Constraint::ZParity`]; a target of −1 makes
/// the row inhomogeneous. The pivot of each reduced row — its
/// highest-index variable — becomes the dependent variable, matching the
/// solved form `s_l = Π s_{l_m}`. Contradictory systems are rejected.
pub fn gf2_solve(parities: &[Constraint], n_vars: usize) -> Result<Gf2Solution> {
    if n_vars == 0 || n_vars > 64 {
        return Err(CqaError::TooManySites { n: n_vars });
    }
    // (row mask, rhs, pivot)
    let mut reduced: Vec<(u64, bool, usize)> = Vec::new();
    for (row_idx, c) in parities.iter().enumerate() {
        let (support, target) = match c {
            Constraint::ZParity { support, target } => (support, *target),
            _ => {
                return Err(CqaError::InvalidConstraint(format!(
                    "constraint {row_idx} is not a z_parity"
                )))
            }
        };
        let mut mask = 0u64;
        for &s in support {
            if s >= n_vars {
                return Err(CqaError::SiteOutOfRange { site: s, n_sites: n_vars });
            }
            mask |= 1u64 << s;
        }
        let mut rhs = target == -1;
        for &(rmask, rrhs, pivot) in &reduced {
            if mask >> pivot & 1 == 1 {
                mask ^= rmask;
                rhs ^= rrhs;
            }
        }
        if mask == 0 {
            if rhs {
                return Err(CqaError::InfeasibleSystem { row: row_idx });
            }
            continue; // redundant row
        }
        let pivot = 63 - mask.leading_zeros() as usize;
        // Back-eliminate the new pivot from earlier rows to keep the system
        // in reduced echelon form.
        for (rmask, rrhs, _) in reduced.iter_mut() {
            if *rmask >> pivot & 1 == 1 {
                *rmask ^= mask;
                *rrhs ^= rhs;
            }
        }
        reduced.push((mask, rhs, pivot));
    }
    reduced.sort_unstable_by_key(|&(_, _, pivot)| pivot);

    let mut dependent = Vec::with_capacity(reduced.len());
    let mut exprs = Vec::with_capacity(reduced.len());
    let mut negations = Vec::with_capacity(reduced.len());
    let mut dep_mask = 0u64;
    for &(mask, rhs, pivot) in &reduced {
        dep_mask |= 1u64 << pivot;
        dependent.push(pivot);
        exprs.push((0..n_vars).filter(|&v| v != pivot && mask >> v & 1 == 1).collect());
        negations.push(rhs);
    }
    let independent = (0..n_vars).filter(|&v| dep_mask >> v & 1 == 0).collect();
    Ok(Gf2Solution { n_vars, dependent, exprs, negations, independent })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(support: &[usize], target: i64) -> Constraint {
        Constraint::z_parity(support.to_vec(), target).unwrap()
    }

    #[test]
    fn linear_z_eval() {
        let c = Constraint::total_magnetization(4, 0).unwrap();
        // |0011⟩: sites 0,1 down, sites 2,3 up.
        assert_eq!(c.eval(0b0011), 0);
        assert_eq!(c.eval(0b0000), 4);
        assert_eq!(c.eval(0b1111), -4);
        let weighted = Constraint::linear_z(vec![2, -1, 0], 0).unwrap();
        assert_eq!(weighted.eval(0b001), -2 - 1);
    }

    #[test]
    fn z_parity_eval() {
        let c = zp(&[0, 1, 2], 1);
        assert_eq!(c.eval(0b010), -1, "one down spin flips the product");
        assert_eq!(c.eval(0b011), 1);
        assert_eq!(c.eval(0b000), 1);
    }

    #[test]
    fn clause_indicator_eval() {
        let c = Constraint::clause([0, 1, 2], [0b000, 0b111]).unwrap();
        assert_eq!(c.eval(0b000), 1);
        assert_eq!(c.eval(0b111), 1);
        assert_eq!(c.eval(0b010), 0);
        assert!(c.is_satisfied(0b010));
        assert!(!c.is_satisfied(0b000));
    }

    #[test]
    fn clause_pair_must_be_complementary() {
        assert!(Constraint::clause([0, 1, 2], [0b000, 0b110]).is_err());
        assert!(Constraint::clause([0, 1, 1], [0b000, 0b111]).is_err());
    }

    #[test]
    fn sector_basis_magnetization() {
        let c = Constraint::total_magnetization(4, 0).unwrap();
        let sector = SectorBasis::from_constraints(&[c], 4).unwrap();
        assert_eq!(sector.len(), 6, "C(4,2) = 6");
        assert!(sector.states().windows(2).all(|w| w[0] < w[1]));
        for (i, &s) in sector.states().iter().enumerate() {
            assert_eq!(sector.index_of(s), Some(i));
        }
    }

    #[test]
    fn sector_basis_z_parity_pair() {
        let sector = SectorBasis::from_constraints(&[zp(&[0, 1], 1)], 2).unwrap();
        assert_eq!(sector.states(), &[0b00, 0b11]);
    }

    #[test]
    fn gi_grid_sector_is_permutations() {
        // 3 rows + 3 columns, each with exactly one down spin: Σz = n−2.
        let n = 3;
        let mut cs = Vec::new();
        for r in 0..n {
            let mut coeffs = vec![0i64; n * n];
            for j in 0..n {
                coeffs[r * n + j] = 1;
            }
            cs.push(Constraint::linear_z(coeffs, (n - 2) as i64).unwrap());
        }
        for col in 0..n {
            let mut coeffs = vec![0i64; n * n];
            for i in 0..n {
                coeffs[i * n + col] = 1;
            }
            cs.push(Constraint::linear_z(coeffs, (n - 2) as i64).unwrap());
        }
        let sector = SectorBasis::from_constraints(&cs, n * n).unwrap();
        let direct = SectorBasis::permutations(n).unwrap();
        assert_eq!(sector.len(), 6);
        assert_eq!(sector, direct, "brute force and direct generation agree");
    }

    #[test]
    fn empty_sector_is_flagged_not_an_error() {
        let c1 = Constraint::total_magnetization(2, 2).unwrap();
        let c2 = Constraint::total_magnetization(2, -2).unwrap();
        let sector = SectorBasis::from_constraints(&[c1, c2], 2).unwrap();
        assert!(sector.is_empty());
    }

    #[test]
    fn gf2_single_row() {
        let sol = gf2_solve(&[zp(&[0, 1, 2], 1)], 3).unwrap();
        assert_eq!(sol.dependent, vec![2]);
        assert_eq!(sol.exprs, vec![vec![0, 1]]);
        assert_eq!(sol.negations, vec![false]);
        assert_eq!(sol.independent, vec![0, 1]);
    }

    #[test]
    fn gf2_chain_substitutes() {
        let system = [zp(&[0, 1, 2], 1), zp(&[2, 3, 4], 1)];
        let sol = gf2_solve(&system, 5).unwrap();
        assert_eq!(sol.dependent, vec![2, 4]);
        assert_eq!(sol.exprs[0], vec![0, 1]);
        assert_eq!(sol.exprs[1], vec![0, 1, 3], "b4 = b0⊕b1⊕b3 after substitution");
        // Exhaustive: every completion satisfies every input parity.
        for bits in 0..1u64 << sol.independent.len() {
            let state = sol.full_assignment(bits);
            for c in &system {
                assert!(c.is_satisfied(state), "assignment {state:b} violates {c:?}");
            }
        }
    }

    #[test]
    fn gf2_contradiction_is_infeasible() {
        let system = [zp(&[0], -1), zp(&[0], 1)];
        match gf2_solve(&system, 1) {
            Err(CqaError::InfeasibleSystem { row }) => assert_eq!(row, 1),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn gf2_inhomogeneous_rows_negate() {
        let system = [zp(&[0, 1], -1)];
        let sol = gf2_solve(&system, 2).unwrap();
        assert_eq!(sol.dependent, vec![1]);
        assert_eq!(sol.negations, vec![true]);
        for bits in 0..2u64 {
            assert!(system[0].is_satisfied(sol.full_assignment(bits)));
        }
    }

    #[test]
    fn gf2_rejects_non_parity() {
        let c = Constraint::total_magnetization(3, 1).unwrap();
        assert!(gf2_solve(&[c], 3).is_err());
    }

    #[test]
    fn constraint_hamiltonians_match_eval() {
        let n = 5;
        let cases = [
            Constraint::total_magnetization(n, 1).unwrap(),
            Constraint::linear_z(vec![2, 0, -1, 0, 3], 0).unwrap(),
            zp(&[1, 3, 4], 1),
            Constraint::clause([0, 2, 4], [0b101, 0b010]).unwrap(),
        ];
        for c in &cases {
            let h = c.as_hamiltonian(n).unwrap();
            assert!(h.is_diagonal());
            for state in 0..1u64 << n {
                let d = h.diagonal_value(state);
                assert!(d.im.abs() < 1e-14);
                assert!(
                    (d.re - c.eval(state) as f64).abs() < 1e-12,
                    "{c:?} at {state:05b}: {} vs {}",
                    d.re,
                    c.eval(state)
                );
            }
        }
    }

    #[test]
    fn linear_z_hamiltonian_is_sum_of_z() {
        let c = Constraint::total_magnetization(2, 0).unwrap();
        let h = c.as_hamiltonian(2).unwrap();
        assert_eq!(h.num_terms(), 2);
        assert!(h.terms().iter().all(|t| t.x_mask() == 0 && t.z_mask().count_ones() == 1));
    }

    #[test]
    fn clause_hamiltonian_matrix_oracle() {
        // Diagonal with 1 exactly at rows 000 and 111.
        let c = Constraint::clause([0, 1, 2], [0b000, 0b111]).unwrap();
        let m = c.as_hamiltonian(3).unwrap().to_matrix().unwrap();
        for u in 0..8usize {
            for v in 0..8usize {
                let expect = if u == v && (u == 0 || u == 7) { 1.0 } else { 0.0 };
                assert!((m[(u, v)].re - expect).abs() < 1e-14);
                assert!(m[(u, v)].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn embed_project_round_trip() {
        let sector =
            SectorBasis::from_constraints(&[Constraint::total_magnetization(3, 1).unwrap()], 3).unwrap();
        assert_eq!(sector.len(), 3);
        let coords = DVector::from_fn(3, |i, _| Complex64::new(i as f64 + 1.0, -0.5));
        let full = sector.embed(&coords).unwrap();
        assert_eq!(sector.project(&full).unwrap(), coords);
        let w = sector.weight(&full).unwrap();
        assert!((w - coords.iter().map(|c| c.norm_sqr()).sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn constraint_json_round_trip() {
        let cases = [
            Constraint::total_magnetization(3, 1).unwrap(),
            zp(&[0, 2], -1),
            Constraint::clause([0, 1, 2], [0b001, 0b110]).unwrap(),
        ];
        for c in &cases {
            let s = serde_json::to_string(c).unwrap();
            let back: Constraint = serde_json::from_str(&s).unwrap();
            assert_eq!(*c, back);
        }
    }
}
