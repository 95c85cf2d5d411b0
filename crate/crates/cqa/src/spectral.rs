//! Exact eigenanalysis: dense Hermitian diagonalization at desk scale, a
//! certified matrix-free Lanczos solver above it, sector-restricted
//! spectra, the XY magnetization staircase, and minimum-gap sweeps over
//! the annealing schedule.

use crate::constraints::{Constraint, SectorBasis};
use crate::error::{CqaError, Result};
use crate::pauli::{Hamiltonian, DEFAULT_MAX_DENSE_DIM};
use crate::statespace::AMP_TOL;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Relative degeneracy tolerance: eigenvalues within
/// `1e-10 · max(1, |E₀|)` of the ground energy count as degenerate.
pub fn degeneracy_tol(e0: f64) -> f64 {
    1e-10 * e0.abs().max(1.0)
}

/// Sorted eigendecomposition of a Hermitian matrix. Falls back to the real
/// symmetric solver when every entry is exactly real.
fn hermitian_eigen(m: &DMatrix<Complex64>) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let dim = m.nrows();
    let all_real = m.iter().all(|e| e.im == 0.0);
    let (mut order, values, vectors_c);
    if all_real {
        let real = DMatrix::from_fn(dim, dim, |r, c| m[(r, c)].re);
        let eig = real.symmetric_eigen();
        values = eig.eigenvalues;
        vectors_c = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    } else {
        let eig = m.clone().symmetric_eigen();
        values = eig.eigenvalues;
        vectors_c = eig.eigenvectors;
    }
    order = (0..dim).collect::<Vec<_>>();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = order.iter().map(|&i| vectors_c.column(i).into_owned()).collect();
    (sorted_values, sorted_vectors)
}

/// Lowest eigenpairs of a Hermitian operator, with the degeneracy of the
/// ground level.
#[derive(Clone, Debug)]
pub struct EigenResult {
    /// Lowest k eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Matching eigenvectors (full-space or sector coordinates, depending
    /// on the entry point).
    pub eigenvectors: Vec<DVector<Complex64>>,
    /// Number of eigenvalues within the degeneracy tolerance of E₀,
    /// counted over the whole spectrum.
    pub ground_multiplicity: usize,
}

fn eigen_result(values: Vec<f64>, vectors: Vec<DVector<Complex64>>, k: usize) -> EigenResult {
    let tol = degeneracy_tol(values[0]);
    let ground_multiplicity = values.iter().take_while(|&&e| e <= values[0] + tol).count();
    let k = k.min(values.len());
    EigenResult {
        eigenvalues: values[..k].to_vec(),
        eigenvectors: vectors[..k].to_vec(),
        ground_multiplicity,
    }
}

/// Dense diagonalization of the full 2^n space; lowest `k` eigenpairs.
pub fn ground_states(h: &Hamiltonian, k: usize) -> Result<EigenResult> {
    ground_states_with_limit(h, k, DEFAULT_MAX_DENSE_DIM)
}

pub fn ground_states_with_limit(h: &Hamiltonian, k: usize, limit: usize) -> Result<EigenResult> {
    let m = h.to_matrix_with_limit(limit)?;
    let (values, vectors) = hermitian_eigen(&m);
    Ok(eigen_result(values, vectors, k))
}

/// Restriction of `h` to the span of a sector basis. Exact because the
/// operator is required to preserve the sector: any transition that leaves
/// it with amplitude above [`AMP_TOL`] is a closure failure.
pub fn restrict_to_sector(h: &Hamiltonian, sector: &SectorBasis) -> Result<DMatrix<Complex64>> {
    if h.n_sites() != sector.n_sites() {
        return Err(CqaError::SiteCountMismatch { left: h.n_sites(), right: sector.n_sites() });
    }
    if sector.is_empty() {
        return Err(CqaError::EmptySector);
    }
    let dim = sector.len();
    let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for (iu, &u) in sector.states().iter().enumerate() {
        for (v, amp) in h.transitions(u) {
            match sector.index_of(v) {
                Some(iv) => m[(iv, iu)] += amp,
                None if amp.norm() > AMP_TOL => {
                    return Err(CqaError::ClosureFailure(format!(
                        "state {u:b} maps to {v:b} outside the sector (amplitude {:.3e})",
                        amp.norm()
                    )));
                }
                None => {}
            }
        }
    }
    Ok(m)
}

/// Sector-restricted diagonalization; eigenvectors are in sector
/// coordinates.
pub fn sector_eigh(h: &Hamiltonian, sector: &SectorBasis, k: usize) -> Result<EigenResult> {
    sector_eigh_with_limit(h, sector, k, DEFAULT_MAX_DENSE_DIM)
}

pub fn sector_eigh_with_limit(
    h: &Hamiltonian,
    sector: &SectorBasis,
    k: usize,
    limit: usize,
) -> Result<EigenResult> {
    if sector.len() > limit {
        return Err(CqaError::DimensionLimit { dim: sector.len(), limit });
    }
    let m = restrict_to_sector(h, sector)?;
    let (values, vectors) = hermitian_eigen(&m);
    Ok(eigen_result(values, vectors, k))
}

/// Ground energy and state of `h` within a sector (sector coordinates).
pub fn sector_ground(h: &Hamiltonian, sector: &SectorBasis) -> Result<(f64, DVector<Complex64>)> {
    let eig = sector_eigh(h, sector, 1)?;
    Ok((eig.eigenvalues[0], eig.eigenvectors[0].clone()))
}

/// Options for the matrix-free Lanczos ground-state solver.
#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub max_iter: usize,
    /// Certified residual target ‖Hv − Ev‖.
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { max_iter: 400, tol: 1e-11 }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub eigenvalue: f64,
    pub eigenvector: DVector<Complex64>,
    /// ‖Hv − Ev‖ for the returned pair; certifies the eigenvalue to this
    /// accuracy.
    pub residual: f64,
    pub iterations: usize,
}

const LANCZOS_MAX_DIM: usize = 1 << 15;

/// Lowest eigenpair of a Hermitian Pauli sum by Lanczos iteration with
/// full reorthogonalization and a deterministic start vector. Fails unless
/// the final residual meets the requested tolerance.
pub fn lanczos_ground(h: &Hamiltonian, opts: LanczosOptions) -> Result<LanczosResult> {
    let dim = h
        .checked_dim()
        .filter(|&d| d <= LANCZOS_MAX_DIM)
        .ok_or(CqaError::DimensionLimit { dim: usize::MAX, limit: LANCZOS_MAX_DIM })?;
    // deterministic quasi-random start
    let mut q = DVector::from_fn(dim, |i, _| {
        Complex64::new((((i + 1) as f64) * 0.618033988749895).fract() - 0.5, 0.0)
    });
    q /= Complex64::new(q.norm(), 0.0);

    let mut basis: Vec<DVector<Complex64>> = vec![q.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut prev_theta = f64::INFINITY;

    let max_iter = opts.max_iter.min(dim);
    for j in 0..max_iter {
        let mut w = h.apply(&basis[j])?;
        let alpha = basis[j].dotc(&w).re;
        alphas.push(alpha);
        w -= &basis[j] * Complex64::new(alpha, 0.0);
        if j > 0 {
            w -= &basis[j - 1] * Complex64::new(betas[j - 1], 0.0);
        }
        // two-pass full reorthogonalization
        for _ in 0..2 {
            for qi in &basis {
                let overlap = qi.dotc(&w);
                w -= qi * overlap;
            }
        }
        let beta = w.norm();

        let breakdown = beta < 1e-13;
        let check = breakdown || j + 1 == max_iter || (j + 1) % 8 == 0;
        if check {
            let (theta, ritz) = tridiagonal_ground(&alphas, &betas);
            let converged = (theta - prev_theta).abs() < 0.1 * opts.tol;
            prev_theta = theta;
            if breakdown || converged || j + 1 == max_iter {
                let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
                for (coef, qi) in ritz.iter().zip(&basis) {
                    v += qi * Complex64::new(*coef, 0.0);
                }
                v /= Complex64::new(v.norm(), 0.0);
                let hv = h.apply(&v)?;
                let residual = (&hv - &v * Complex64::new(theta, 0.0)).norm();
                if residual <= opts.tol {
                    return Ok(LanczosResult { eigenvalue: theta, eigenvector: v, residual, iterations: j + 1 });
                }
                if breakdown || j + 1 == max_iter {
                    return Err(CqaError::NoConvergence { residual, iterations: j + 1 });
                }
            }
        }
        betas.push(beta);
        basis.push(w / Complex64::new(beta, 0.0));
    }
    unreachable!("loop returns or errors at max_iter");
}

/// Ground eigenpair of the Lanczos tridiagonal matrix.
fn tridiagonal_ground(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alphas[i];
        if i > 0 {
            t[(i, i - 1)] = betas[i - 1];
            t[(i - 1, i)] = betas[i - 1];
        }
    }
    let eig = t.symmetric_eigen();
    let mut best = 0;
    for i in 1..m {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    (eig.eigenvalues[best], eig.eigenvectors.column(best).iter().copied().collect())
}

/// Ground energy of the XY ring in every magnetization sector, as
/// `(M_z, E₀)` pairs ordered by descending down-spin count.
pub fn xy_sector_energies(n: usize, j: f64) -> Result<Vec<(i64, f64)>> {
    xy_sector_energies_with_limit(n, j, DEFAULT_MAX_DENSE_DIM)
}

pub fn xy_sector_energies_with_limit(n: usize, j: f64, limit: usize) -> Result<Vec<(i64, f64)>> {
    let xy = crate::drivers::xy_ring(n, j)?;
    let mut out = Vec::with_capacity(n + 1);
    for down in 0..=n {
        let m = n as i64 - 2 * down as i64;
        let sector =
            SectorBasis::from_constraints(&[Constraint::total_magnetization(n, m)?], n)?;
        if sector.len() == 1 {
            // fully polarized: XY annihilates the state
            out.push((m, 0.0));
            continue;
        }
        let eig = sector_eigh_with_limit(&xy, &sector, 1, limit)?;
        out.push((m, eig.eigenvalues[0]));
    }
    Ok(out)
}

/// The magnetization staircase: ground-sector magnetization and energy
/// density of XY − (B/J)·ΣZ per grid point.
#[derive(Clone, Debug)]
pub struct MagnetizationCurve {
    pub b_over_j: Vec<f64>,
    pub mz: Vec<i64>,
    /// E₀/(J·n) of the global ground state.
    pub e0_density: Vec<f64>,
}

/// Computes the staircase by sector-restricted diagonalization: the XY
/// block of each magnetization sector is diagonalized once, and the field
/// term adds the exact shift −B·M inside a sector. Ties between sectors
/// are reported as the smallest |M_z| (then smallest M_z).
pub fn magnetization_curve(n: usize, grid: &[f64]) -> Result<MagnetizationCurve> {
    magnetization_curve_with_limit(n, grid, DEFAULT_MAX_DENSE_DIM)
}

pub fn magnetization_curve_with_limit(
    n: usize,
    grid: &[f64],
    limit: usize,
) -> Result<MagnetizationCurve> {
    let mut energies = xy_sector_energies_with_limit(n, 1.0, limit)?;
    // tie-break order
    energies.sort_by_key(|&(m, _)| (m.abs(), m));
    let mut mz = Vec::with_capacity(grid.len());
    let mut e0_density = Vec::with_capacity(grid.len());
    for &b in grid {
        let mut best_m = energies[0].0;
        let mut best_e = energies[0].1 - b * energies[0].0 as f64;
        for &(m, e_xy) in &energies[1..] {
            let e = e_xy - b * m as f64;
            if e < best_e - 1e-12 * (1.0 + best_e.abs()) {
                best_e = e;
                best_m = m;
            }
        }
        mz.push(best_m);
        e0_density.push(best_e / n as f64);
    }
    Ok(MagnetizationCurve { b_over_j: grid.to_vec(), mz, e0_density })
}

/// Lowest-k spectrum of H(s) = s·H_p + (1−s)·H_d over a schedule grid,
/// with the minimum spectral gap and its location.
#[derive(Clone, Debug)]
pub struct SpectrumSweep {
    pub s_grid: Vec<f64>,
    /// Lowest k eigenvalues per grid point, ascending.
    pub energies: Vec<Vec<f64>>,
    pub min_gap: f64,
    pub s_at_min: f64,
}

pub fn spectrum_sweep(
    h_p: &Hamiltonian,
    h_d: &Hamiltonian,
    s_grid: &[f64],
    k: usize,
    sector: Option<&SectorBasis>,
) -> Result<SpectrumSweep> {
    spectrum_sweep_with_limit(h_p, h_d, s_grid, k, sector, DEFAULT_MAX_DENSE_DIM)
}

pub fn spectrum_sweep_with_limit(
    h_p: &Hamiltonian,
    h_d: &Hamiltonian,
    s_grid: &[f64],
    k: usize,
    sector: Option<&SectorBasis>,
    limit: usize,
) -> Result<SpectrumSweep> {
    if h_p.n_sites() != h_d.n_sites() {
        return Err(CqaError::SiteCountMismatch { left: h_p.n_sites(), right: h_d.n_sites() });
    }
    if s_grid.is_empty() {
        return Err(CqaError::InvalidSchedule("empty s grid".into()));
    }
    let (mp, md) = match sector {
        Some(sec) => {
            if sec.len() > limit {
                return Err(CqaError::DimensionLimit { dim: sec.len(), limit });
            }
            (restrict_to_sector(h_p, sec)?, restrict_to_sector(h_d, sec)?)
        }
        None => (h_p.to_matrix_with_limit(limit)?, h_d.to_matrix_with_limit(limit)?),
    };
    let dim = mp.nrows();
    if dim < 2 {
        return Err(CqaError::InvalidInstance("gap needs dimension ≥ 2".into()));
    }
    let k = k.max(2).min(dim);
    let mut energies = Vec::with_capacity(s_grid.len());
    let mut min_gap = f64::INFINITY;
    let mut s_at_min = s_grid[0];
    for &s in s_grid {
        let m = &mp * Complex64::new(s, 0.0) + &md * Complex64::new(1.0 - s, 0.0);
        let (values, _) = hermitian_eigen(&m);
        let gap = values[1] - values[0];
        if gap < min_gap {
            min_gap = gap;
            s_at_min = s;
        }
        energies.push(values[..k].to_vec());
    }
    Ok(SpectrumSweep { s_grid: s_grid.to_vec(), energies, min_gap, s_at_min })
}

/// Evenly spaced grid of `points` values covering [0, hi].
pub fn linear_grid(hi: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![0.0];
    }
    (0..points).map(|i| hi * i as f64 / (points - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivers::{build_lhz_twoflip, build_transverse, xy_ring};
    use crate::pauli::{Axis, PauliTerm};

    fn single_op(n: usize, site: usize, axis: Axis, coeff: f64) -> Hamiltonian {
        Hamiltonian::from_terms(
            n,
            [PauliTerm::single(n, site, axis).unwrap().scaled(Complex64::new(coeff, 0.0))],
        )
        .unwrap()
    }

    #[test]
    fn ground_of_minus_x_is_plus() {
        let h = single_op(1, 0, Axis::X, -1.0);
        let eig = ground_states(&h, 1).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-12);
        assert_eq!(eig.ground_multiplicity, 1);
        let v = &eig.eigenvectors[0];
        assert!((v[0].norm() - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
        assert!((v[0] - v[1]).norm() < 1e-12, "|+⟩ has equal components");
    }

    #[test]
    fn twoflip_ground_multiplicity_two() {
        let h = build_lhz_twoflip(4, &[0, 1, 2, 3]).unwrap();
        let eig = ground_states(&h, 4).unwrap();
        assert_eq!(eig.ground_multiplicity, 2);
    }

    #[test]
    fn sector_ground_matches_full_diagonalization() {
        let n = 4;
        let xy = xy_ring(n, 1.0).unwrap();
        let sector =
            SectorBasis::from_constraints(&[Constraint::total_magnetization(n, 0).unwrap()], n)
                .unwrap();
        let (e_sector, _) = sector_ground(&xy, &sector).unwrap();
        // oracle: filter the full spectrum by sector membership of eigenvectors
        let full = ground_states(&xy, 16).unwrap();
        let mut best = f64::INFINITY;
        for (e, v) in full.eigenvalues.iter().zip(&full.eigenvectors) {
            if sector.weight(v).unwrap() > 0.99 {
                best = best.min(*e);
            }
        }
        assert!((e_sector - best).abs() < 1e-10, "{e_sector} vs {best}");
    }

    #[test]
    fn sector_restriction_fails_for_non_closing_operators() {
        let h = build_transverse(4).unwrap();
        let sector =
            SectorBasis::from_constraints(&[Constraint::total_magnetization(4, 0).unwrap()], 4)
                .unwrap();
        assert!(matches!(sector_ground(&h, &sector), Err(CqaError::ClosureFailure(_))));
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        for n in [6usize, 8] {
            let h = xy_ring(n, 1.0)
                .unwrap()
                .add(&crate::drivers::build_aux(
                    n,
                    &[Constraint::total_magnetization(n, 0).unwrap()],
                    &[0.37],
                ).unwrap())
                .unwrap();
            let dense = ground_states(&h, 1).unwrap();
            let lz = lanczos_ground(&h, LanczosOptions::default()).unwrap();
            assert!(
                (dense.eigenvalues[0] - lz.eigenvalue).abs() < 1e-10,
                "n={n}: dense {} vs lanczos {} (residual {})",
                dense.eigenvalues[0],
                lz.eigenvalue,
                lz.residual
            );
        }
    }

    #[test]
    fn xy_sector_energies_analytic_n4() {
        let e = xy_sector_energies(4, 1.0).unwrap();
        let lookup = |m: i64| e.iter().find(|&&(mm, _)| mm == m).unwrap().1;
        assert!((lookup(0) + 4.0 * 2.0f64.sqrt()).abs() < 1e-10);
        assert!((lookup(2) + 4.0).abs() < 1e-10);
        assert!((lookup(-2) + 4.0).abs() < 1e-10);
        assert!(lookup(4).abs() < 1e-14);
        assert!(lookup(-4).abs() < 1e-14);
    }

    #[test]
    fn staircase_n4_steps_at_analytic_positions() {
        // steps at B = 2√2 − 2 ≈ 0.8284 and B = 2
        let grid = [0.0, 0.5, 0.8, 0.86, 1.5, 1.99, 2.01, 3.0];
        let curve = magnetization_curve(4, &grid).unwrap();
        assert_eq!(curve.mz, vec![0, 0, 0, 2, 2, 2, 4, 4]);
        assert!(curve.mz.windows(2).all(|w| w[0] <= w[1]), "staircase is monotone");
        assert!((curve.e0_density[0] + 2.0f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn staircase_matches_full_space_diagonalization() {
        let n = 6;
        let grid = linear_grid(3.0, 13);
        let curve = magnetization_curve(n, &grid).unwrap();
        for (i, &b) in grid.iter().enumerate() {
            let h = xy_ring(n, 1.0)
                .unwrap()
                .add(&crate::drivers::build_aux(
                    n,
                    &[Constraint::total_magnetization(n, 0).unwrap()],
                    &[b],
                ).unwrap())
                .unwrap();
            let full = ground_states(&h, 1).unwrap();
            assert!(
                (full.eigenvalues[0] / n as f64 - curve.e0_density[i]).abs() < 1e-10,
                "B={b}: full {} vs sector {}",
                full.eigenvalues[0] / n as f64,
                curve.e0_density[i]
            );
        }
    }

    #[test]
    fn two_level_sweep_has_analytic_gap() {
        let hp = single_op(1, 0, Axis::Z, 1.0);
        let hd = single_op(1, 0, Axis::X, -1.0);
        let grid: Vec<f64> = (0..65).map(|i| i as f64 / 64.0).collect();
        let sweep = spectrum_sweep(&hp, &hd, &grid, 2, None).unwrap();
        for (i, &s) in grid.iter().enumerate() {
            let expect = 2.0 * (s * s + (1.0 - s) * (1.0 - s)).sqrt();
            let gap = sweep.energies[i][1] - sweep.energies[i][0];
            assert!((gap - expect).abs() < 1e-12, "s={s}: {gap} vs {expect}");
        }
        assert!((sweep.min_gap - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((sweep.s_at_min - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sector_sweep_equals_filtered_full_sweep() {
        let n = 4;
        let hd = xy_ring(n, 1.0).unwrap();
        // diagonal problem Hamiltonian: a generic field pattern
        let hp = Hamiltonian::from_terms(
            n,
            (0..n).map(|i| {
                PauliTerm::single(n, i, Axis::Z)
                    .unwrap()
                    .scaled(Complex64::new(0.3 + 0.25 * i as f64, 0.0))
            }),
        )
        .unwrap();
        let sector =
            SectorBasis::from_constraints(&[Constraint::total_magnetization(n, 0).unwrap()], n)
                .unwrap();
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let restricted = spectrum_sweep(&hp, &hd, &grid, 2, Some(&sector)).unwrap();
        for (i, &s) in grid.iter().enumerate() {
            let h = Hamiltonian::interpolate(&hp, &hd, s).unwrap();
            let full = ground_states(&h, 16).unwrap();
            let filtered: Vec<f64> = full
                .eigenvalues
                .iter()
                .zip(&full.eigenvectors)
                .filter(|(_, v)| sector.weight(v).unwrap() > 0.99)
                .map(|(e, _)| *e)
                .collect();
            assert!(
                (restricted.energies[i][0] - filtered[0]).abs() < 1e-10,
                "s={s}: {} vs {}",
                restricted.energies[i][0],
                filtered[0]
            );
        }
    }
}
