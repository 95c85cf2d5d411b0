//! Exact algebra of n-site Pauli strings and weighted Pauli sums.
//!
//! A term is stored in symplectic form as an `(x_mask, z_mask)` bit pair.
//! A site with both bits set carries a Y literal: the canonical string is
//! the Hermitian tensor product of I/X/Y/Z factors (`Y = iXZ`, with the
//! phase folded into the coefficient). Products, commutators and Frobenius
//! norms are evaluated with exact integer phase arithmetic; dense matrices
//! exist only as a desk-scale verification backend.
//!
//! Basis convention, fixed globally: bit 0 of a basis index at site `i`
//! means σ^z eigenvalue +1 (spin up), bit 1 means −1 (spin down). Site `i`
//! is bit `i` of the index.

use crate::error::{CqaError, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Mask width; sites are bits of a `u64`.
pub const MAX_SITES: usize = 64;

/// Default cap on dense matrix dimension (2^12).
pub const DEFAULT_MAX_DENSE_DIM: usize = 4096;

/// Coefficients below this magnitude are dropped when terms are merged.
pub const MERGE_TOL: f64 = 1e-14;

/// Version stamp carried by every JSON artifact.
pub const FORMAT_VERSION: u32 = 1;

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// Single-site Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// One weighted Pauli string on `n_sites` sites.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    n_sites: usize,
    x_mask: u64,
    z_mask: u64,
    coeff: Complex64,
}

fn check_sites(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return Err(CqaError::TooManySites { n });
    }
    Ok(())
}

fn site_bit(site: usize, n: usize) -> Result<u64> {
    if site >= n {
        return Err(CqaError::SiteOutOfRange { site, n_sites: n });
    }
    Ok(1u64 << site)
}

impl PauliTerm {
    /// Builds a term from symplectic masks; the coefficient multiplies the
    /// canonical Hermitian string (Y literals at overlapping bits).
    pub fn from_masks(n_sites: usize, x_mask: u64, z_mask: u64, coeff: Complex64) -> Result<Self> {
        check_sites(n_sites)?;
        let allowed = if n_sites == 64 { u64::MAX } else { (1u64 << n_sites) - 1 };
        if x_mask & !allowed != 0 || z_mask & !allowed != 0 {
            return Err(CqaError::SiteOutOfRange {
                site: (63 - (x_mask | z_mask).leading_zeros()) as usize,
                n_sites,
            });
        }
        Ok(Self { n_sites, x_mask, z_mask, coeff })
    }

    pub fn identity(n_sites: usize, coeff: Complex64) -> Self {
        Self::from_masks(n_sites, 0, 0, coeff).expect("identity")
    }

    /// Single-site X/Y/Z with coefficient 1.
    pub fn single(n_sites: usize, site: usize, axis: Axis) -> Result<Self> {
        let bit = site_bit(site, n_sites)?;
        let (x, z) = match axis {
            Axis::X => (bit, 0),
            Axis::Y => (bit, bit),
            Axis::Z => (0, bit),
        };
        Self::from_masks(n_sites, x, z, Complex64::new(1.0, 0.0))
    }

    /// Product of identical letters on the sites of `mask`.
    pub fn string(n_sites: usize, mask: u64, axis: Axis, coeff: Complex64) -> Result<Self> {
        let (x, z) = match axis {
            Axis::X => (mask, 0),
            Axis::Y => (mask, mask),
            Axis::Z => (0, mask),
        };
        Self::from_masks(n_sites, x, z, coeff)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }
    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }
    pub fn coeff(&self) -> Complex64 {
        self.coeff
    }
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { coeff: self.coeff * factor, ..*self }
    }

    /// Sites carrying a non-identity letter.
    pub fn support_mask(&self) -> u64 {
        self.x_mask | self.z_mask
    }
    pub fn weight(&self) -> usize {
        self.support_mask().count_ones() as usize
    }
    pub fn is_identity_string(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Operator product with exact phase tracking.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n_sites != other.n_sites {
            return Err(CqaError::SiteCountMismatch { left: self.n_sites, right: other.n_sites });
        }
        let x = self.x_mask ^ other.x_mask;
        let z = self.z_mask ^ other.z_mask;
        // i^{|x1∧z1|} · i^{|x2∧z2|} · (−1)^{|z1∧x2|} relative to i^{|x∧z|}.
        let k = (self.x_mask & self.z_mask).count_ones()
            + (other.x_mask & other.z_mask).count_ones()
            + 2 * (self.z_mask & other.x_mask).count_ones()
            + 3 * (x & z).count_ones();
        Ok(Self {
            n_sites: self.n_sites,
            x_mask: x,
            z_mask: z,
            coeff: self.coeff * other.coeff * I_POW[(k % 4) as usize],
        })
    }

    /// Symplectic criterion: ⟨a.x,b.z⟩ ⊕ ⟨a.z,b.x⟩ = 0 (mod 2).
    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        if self.n_sites != other.n_sites {
            return Err(CqaError::SiteCountMismatch { left: self.n_sites, right: other.n_sites });
        }
        let s = (self.x_mask & other.z_mask).count_ones()
            + (self.z_mask & other.x_mask).count_ones();
        Ok(s % 2 == 0)
    }

    /// Hermitian conjugate; canonical strings are self-adjoint, so only the
    /// coefficient conjugates.
    pub fn conjugated(&self) -> Self {
        Self { coeff: self.coeff.conj(), ..*self }
    }

    /// Image of the basis state `basis`: returns `(basis ^ x_mask, amplitude)`.
    pub fn apply_to_basis(&self, basis: u64) -> (u64, Complex64) {
        let phase = I_POW[((self.x_mask & self.z_mask).count_ones() % 4) as usize];
        let sign = if (self.z_mask & basis).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        (basis ^ self.x_mask, self.coeff * phase * sign)
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:+.6}{:+.6}i)", self.coeff.re, self.coeff.im)?;
        if self.is_identity_string() {
            return write!(f, "·I");
        }
        for site in 0..self.n_sites {
            let bit = 1u64 << site;
            let letter = match ((self.x_mask & bit) != 0, (self.z_mask & bit) != 0) {
                (true, false) => "X",
                (true, true) => "Y",
                (false, true) => "Z",
                (false, false) => continue,
            };
            write!(f, "·{letter}{site}")?;
        }
        Ok(())
    }
}

/// Expansion of ⊗ₖ |to_k⟩⟨from_k| on the listed sites into Pauli strings.
///
/// `to_bits`/`from_bits` give the local configurations (bit k ↔ `sites[k]`).
/// The result has `2^sites.len()` terms before merging.
pub fn transfer_string(n_sites: usize, sites: &[usize], to_bits: u64, from_bits: u64) -> Result<Vec<PauliTerm>> {
    check_sites(n_sites)?;
    let k = sites.len();
    let mut seen = 0u64;
    for &s in sites {
        let bit = site_bit(s, n_sites)?;
        if seen & bit != 0 {
            return Err(CqaError::OverlappingSupports(format!("site {s} repeated")));
        }
        seen |= bit;
    }
    let half = Complex64::new(0.5, 0.0);
    let i_half = Complex64::new(0.0, 0.5);
    let mut terms = Vec::with_capacity(1 << k);
    // Per site: |0⟩⟨0| = (I+Z)/2, |1⟩⟨1| = (I−Z)/2,
    //           |0⟩⟨1| = (X+iY)/2, |1⟩⟨0| = (X−iY)/2.
    for choice in 0u64..(1 << k) {
        let mut x = 0u64;
        let mut z = 0u64;
        let mut coeff = Complex64::new(1.0, 0.0);
        for (pos, &s) in sites.iter().enumerate() {
            let bit = 1u64 << s;
            let to = (to_bits >> pos) & 1;
            let from = (from_bits >> pos) & 1;
            let second = (choice >> pos) & 1 == 1;
            match (to, from) {
                (0, 0) => {
                    if second {
                        z |= bit;
                    }
                    coeff *= half;
                }
                (1, 1) => {
                    if second {
                        z |= bit;
                        coeff *= -half;
                    } else {
                        coeff *= half;
                    }
                }
                (0, 1) => {
                    x |= bit;
                    if second {
                        z |= bit;
                        coeff *= i_half;
                    } else {
                        coeff *= half;
                    }
                }
                (1, 0) => {
                    x |= bit;
                    if second {
                        z |= bit;
                        coeff *= -i_half;
                    } else {
                        coeff *= half;
                    }
                }
                _ => unreachable!(),
            }
        }
        terms.push(PauliTerm::from_masks(n_sites, x, z, coeff)?);
    }
    Ok(terms)
}

/// Weighted sum of Pauli strings, canonically merged.
///
/// Terms are kept sorted by `(x_mask, z_mask)` with no duplicates;
/// coefficients below [`MERGE_TOL`] are dropped. Immutable after
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    n_sites: usize,
    terms: Vec<PauliTerm>,
}

impl Hamiltonian {
    pub fn zero(n_sites: usize) -> Result<Self> {
        check_sites(n_sites)?;
        Ok(Self { n_sites, terms: Vec::new() })
    }

    /// Canonicalizes an arbitrary term list: merges equal strings, drops
    /// negligible coefficients, sorts.
    pub fn from_terms<I>(n_sites: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = PauliTerm>,
    {
        check_sites(n_sites)?;
        let mut map: BTreeMap<(u64, u64), Complex64> = BTreeMap::new();
        for t in terms {
            if t.n_sites != n_sites {
                return Err(CqaError::SiteCountMismatch { left: n_sites, right: t.n_sites });
            }
            *map.entry((t.x_mask, t.z_mask)).or_insert(Complex64::new(0.0, 0.0)) += t.coeff;
        }
        let terms = map
            .into_iter()
            .filter(|(_, c)| c.norm() >= MERGE_TOL)
            .map(|((x, z), c)| PauliTerm { n_sites, x_mask: x, z_mask: z, coeff: c })
            .collect();
        Ok(Self { n_sites, terms })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Hilbert-space dimension, when it fits a `usize`. Algebraic operations
    /// never need it; state-vector and matrix backends do.
    pub fn checked_dim(&self) -> Option<usize> {
        if self.n_sites < usize::BITS as usize {
            Some(1usize << self.n_sites)
        } else {
            None
        }
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n_sites != other.n_sites {
            return Err(CqaError::SiteCountMismatch { left: self.n_sites, right: other.n_sites });
        }
        Self::from_terms(self.n_sites, self.terms.iter().chain(other.terms.iter()).copied())
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::from_terms(self.n_sites, self.terms.iter().map(|t| t.scaled(factor)))
            .expect("scaling preserves validity")
    }

    /// s·a + (1−s)·b, the annealing interpolation.
    pub fn interpolate(a: &Self, b: &Self, s: f64) -> Result<Self> {
        a.scaled(Complex64::new(s, 0.0)).add(&b.scaled(Complex64::new(1.0 - s, 0.0)))
    }

    /// Operator product, expanded term by term with exact phases.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n_sites != other.n_sites {
            return Err(CqaError::SiteCountMismatch { left: self.n_sites, right: other.n_sites });
        }
        let mut products = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                products.push(a.multiply(b)?);
            }
        }
        Self::from_terms(self.n_sites, products)
    }

    /// AB − BA in the Pauli algebra. Commuting term pairs cancel exactly;
    /// anticommuting pairs contribute 2ab.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        if self.n_sites != other.n_sites {
            return Err(CqaError::SiteCountMismatch { left: self.n_sites, right: other.n_sites });
        }
        let two = Complex64::new(2.0, 0.0);
        let mut products = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                if !a.commutes_with(b)? {
                    products.push(a.multiply(b)?.scaled(two));
                }
            }
        }
        Self::from_terms(self.n_sites, products)
    }

    /// Frobenius norm, exact from coefficients: distinct canonical strings
    /// are trace-orthogonal with Tr(P†P) = 2^n.
    pub fn frobenius_norm(&self) -> f64 {
        let sum: f64 = self.terms.iter().map(|t| t.coeff.norm_sqr()).sum();
        ((self.n_sites as f64).exp2() * sum).sqrt()
    }

    /// ‖[A,B]‖_F, equal to the Frobenius norm of the dense commutator.
    pub fn commutator_norm(&self, other: &Self) -> Result<f64> {
        Ok(self.commutator(other)?.frobenius_norm())
    }

    /// ‖H − H†‖_F; zero iff every canonical coefficient is real.
    pub fn hermiticity_defect(&self) -> f64 {
        let sum: f64 = self.terms.iter().map(|t| (2.0 * t.coeff.im).powi(2)).sum();
        ((self.n_sites as f64).exp2() * sum).sqrt()
    }

    /// Sum of coefficient magnitudes; an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).sum()
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| t.x_mask == 0)
    }

    /// ⟨basis|H|basis⟩.
    pub fn diagonal_value(&self, basis: u64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.x_mask == 0)
            .map(|t| {
                let sign = if (t.z_mask & basis).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                t.coeff * sign
            })
            .sum()
    }

    pub fn max_term_support(&self) -> usize {
        self.terms.iter().map(PauliTerm::weight).max().unwrap_or(0)
    }

    /// All transitions from a basis state, merged over terms sharing an
    /// x-mask: pairs `(target_basis, ⟨target|H|basis⟩)` with the diagonal
    /// entry included when nonzero.
    pub fn transitions(&self, basis: u64) -> Vec<(u64, Complex64)> {
        let mut out: Vec<(u64, Complex64)> = Vec::new();
        let mut idx = 0;
        while idx < self.terms.len() {
            let x = self.terms[idx].x_mask;
            let mut amp = Complex64::new(0.0, 0.0);
            while idx < self.terms.len() && self.terms[idx].x_mask == x {
                amp += self.terms[idx].apply_to_basis(basis).1;
                idx += 1;
            }
            out.push((basis ^ x, amp));
        }
        out
    }

    /// Matrix-free application H·v on the full 2^n space.
    pub fn apply(&self, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let dim = self
            .checked_dim()
            .ok_or(CqaError::DimensionLimit { dim: usize::MAX, limit: usize::MAX })?;
        if v.len() != dim {
            return Err(CqaError::LengthMismatch { expected: dim, actual: v.len() });
        }
        let mut out = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        for t in &self.terms {
            let phase = I_POW[((t.x_mask & t.z_mask).count_ones() % 4) as usize];
            let base = t.coeff * phase;
            for u in 0..dim as u64 {
                let sign = if (t.z_mask & u).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                out[(u ^ t.x_mask) as usize] += base * sign * v[u as usize];
            }
        }
        Ok(out)
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.to_matrix_with_limit(DEFAULT_MAX_DENSE_DIM)
    }

    /// Dense matrix ⟨row|H|col⟩; guarded by an explicit dimension limit.
    pub fn to_matrix_with_limit(&self, limit: usize) -> Result<DMatrix<Complex64>> {
        let dim = match self.checked_dim() {
            Some(d) if d <= limit => d,
            _ => return Err(CqaError::DimensionLimit { dim: 1 << self.n_sites.min(63), limit }),
        };
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        for t in &self.terms {
            for u in 0..dim as u64 {
                let (v, amp) = t.apply_to_basis(u);
                m[(v as usize, u as usize)] += amp;
            }
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermJson {
    sites: Vec<usize>,
    paulis: String,
    coeff: [f64; 2],
}

/// Serialized form: `{"format_version":1,"n":…,"terms":[{"sites":[…],
/// "paulis":"XYZ…","coeff":[re,im]},…]}`.
#[derive(Serialize, Deserialize)]
pub struct HamiltonianJson {
    pub format_version: u32,
    pub n: usize,
    terms: Vec<TermJson>,
}

impl From<&Hamiltonian> for HamiltonianJson {
    fn from(h: &Hamiltonian) -> Self {
        let terms = h
            .terms
            .iter()
            .map(|t| {
                let mut sites = Vec::new();
                let mut paulis = String::new();
                for site in 0..t.n_sites {
                    let bit = 1u64 << site;
                    let letter = match ((t.x_mask & bit) != 0, (t.z_mask & bit) != 0) {
                        (true, false) => 'X',
                        (true, true) => 'Y',
                        (false, true) => 'Z',
                        (false, false) => continue,
                    };
                    sites.push(site);
                    paulis.push(letter);
                }
                TermJson { sites, paulis, coeff: [t.coeff.re, t.coeff.im] }
            })
            .collect();
        HamiltonianJson { format_version: FORMAT_VERSION, n: h.n_sites, terms }
    }
}

impl TryFrom<HamiltonianJson> for Hamiltonian {
    type Error = CqaError;

    fn try_from(j: HamiltonianJson) -> Result<Self> {
        if j.format_version != FORMAT_VERSION {
            return Err(CqaError::InvalidFormat(format!(
                "unsupported format_version {}",
                j.format_version
            )));
        }
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            if t.sites.len() != t.paulis.chars().count() {
                return Err(CqaError::InvalidFormat(format!(
                    "term has {} sites but {} letters",
                    t.sites.len(),
                    t.paulis.len()
                )));
            }
            let mut x = 0u64;
            let mut z = 0u64;
            for (&site, letter) in t.sites.iter().zip(t.paulis.chars()) {
                let bit = site_bit(site, j.n)?;
                if (x | z) & bit != 0 {
                    return Err(CqaError::InvalidFormat(format!("site {site} repeated in term")));
                }
                match letter {
                    'X' => x |= bit,
                    'Y' => {
                        x |= bit;
                        z |= bit;
                    }
                    'Z' => z |= bit,
                    other => {
                        return Err(CqaError::InvalidFormat(format!("unknown Pauli letter {other:?}")))
                    }
                }
            }
            terms.push(PauliTerm::from_masks(j.n, x, z, Complex64::new(t.coeff[0], t.coeff[1]))?);
        }
        Hamiltonian::from_terms(j.n, terms)
    }
}

impl Hamiltonian {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&HamiltonianJson::from(self)).expect("serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let j: HamiltonianJson =
            serde_json::from_str(s).map_err(|e| CqaError::InvalidFormat(e.to_string()))?;
        Self::try_from(j)
    }
}
