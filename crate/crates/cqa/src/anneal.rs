//! Time-dependent evolution under H(s) = s·H_p + (1−s)·H_d with leakage
//! and success metrics.
//!
//! The integrator treats H as piecewise constant over uniform steps
//! (midpoint-sampled) and applies each step's exact exponential through a
//! sub-stepped Taylor expansion whose truncation tail is bounded below
//! 1e−16 per step, so unitarity holds to the same accuracy. The step count
//! is chosen so the per-step Hamiltonian drift ‖H(s_{k+1})−H(s_k)‖·Δt
//! stays under the schedule's drift tolerance.

use crate::constraints::{Constraint, SectorBasis};
use crate::drivers::build_aux;
use crate::error::{CqaError, Result};
use crate::pauli::{Hamiltonian, DEFAULT_MAX_DENSE_DIM};
use crate::spectral::{degeneracy_tol, ground_states_with_limit, restrict_to_sector, sector_eigh};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::sync::Arc;

type ScheduleShape = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Annealing schedule: total time, step control, and the monotone map
/// s(t) from [0,T] to [0,1] (linear unless a custom shape is set).
#[derive(Clone)]
pub struct Schedule {
    total_time: f64,
    steps: Option<usize>,
    checkpoints: usize,
    drift_tol: f64,
    shape: Option<ScheduleShape>,
}

impl Schedule {
    pub fn linear(total_time: f64) -> Result<Self> {
        if !total_time.is_finite() || total_time < 0.0 {
            return Err(CqaError::InvalidSchedule(format!("total time {total_time}")));
        }
        Ok(Self { total_time, steps: None, checkpoints: 64, drift_tol: 1e-3, shape: None })
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = Some(steps.max(1));
        self
    }

    pub fn with_checkpoints(mut self, checkpoints: usize) -> Self {
        self.checkpoints = checkpoints.max(1);
        self
    }

    pub fn with_drift_tol(mut self, tol: f64) -> Self {
        self.drift_tol = tol.max(1e-12);
        self
    }

    /// Custom monotone shape; validated on the step grid when used.
    pub fn with_shape(mut self, shape: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.shape = Some(Arc::new(shape));
        self
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    fn s_of_t(&self, t: f64) -> f64 {
        match &self.shape {
            Some(f) => f(t),
            None => {
                if self.total_time == 0.0 {
                    1.0
                } else {
                    (t / self.total_time).clamp(0.0, 1.0)
                }
            }
        }
    }
}

/// State snapshot along the evolution.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub s: f64,
    pub t: f64,
    /// ⟨ψ|H(s)|ψ⟩ at this point.
    pub energy: f64,
    pub norm: f64,
    pub state: DVector<Complex64>,
}

/// Final state plus per-checkpoint traces of one evolution.
#[derive(Clone, Debug)]
pub struct AnnealResult {
    /// Dimension of the evolved space (2^n or the sector size).
    pub dim: usize,
    /// True when the evolution ran in sector coordinates.
    pub restricted: bool,
    /// Probability weight of the final state on the ground eigenspace of
    /// H_p (full projector; within the sector when restricted).
    pub overlap: f64,
    pub final_state: DVector<Complex64>,
    pub checkpoints: Vec<Checkpoint>,
}

impl AnnealResult {
    /// Per-checkpoint probability weight outside the given charge sector.
    /// Identically zero for sector-restricted evolutions by construction.
    pub fn leakage_trace(&self, sector: &SectorBasis) -> Result<Vec<f64>> {
        if self.restricted {
            return Ok(vec![0.0; self.checkpoints.len()]);
        }
        self.checkpoints
            .iter()
            .map(|cp| Ok((cp.state.norm_squared() - sector.weight(&cp.state)?).max(0.0)))
            .collect()
    }

    /// Maximum leakage over all checkpoints.
    pub fn max_leakage(&self, sector: &SectorBasis) -> Result<f64> {
        Ok(self.leakage_trace(sector)?.into_iter().fold(0.0, f64::max))
    }
}

/// Maximum probability weight outside the initial charge sector over the
/// whole evolution; zero (up to integrator accuracy) whenever the driver
/// commutes with the sector's constraints.
pub fn leakage(result: &AnnealResult, sector: &SectorBasis) -> Result<f64> {
    result.max_leakage(sector)
}

enum EvolveOp<'a> {
    Full { h_p: &'a Hamiltonian, h_d: &'a Hamiltonian, p_norm: f64, d_norm: f64, diff_norm: f64 },
    Restricted { m_p: DMatrix<Complex64>, m_d: DMatrix<Complex64>, p_norm: f64, d_norm: f64, diff_norm: f64 },
}

fn matrix_inf_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl EvolveOp<'_> {
    fn dim(&self) -> usize {
        match self {
            EvolveOp::Full { h_p, .. } => h_p.checked_dim().expect("guarded by caller"),
            EvolveOp::Restricted { m_p, .. } => m_p.nrows(),
        }
    }

    fn apply_blend(&self, s: f64, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        let (cs, cd) = (Complex64::new(s, 0.0), Complex64::new(1.0 - s, 0.0));
        match self {
            EvolveOp::Full { h_p, h_d, .. } => {
                Ok(h_p.apply(v)? * cs + h_d.apply(v)? * cd)
            }
            EvolveOp::Restricted { m_p, m_d, .. } => Ok(m_p * v * cs + m_d * v * cd),
        }
    }

    /// Upper bound on ‖H(s)‖.
    fn norm_bound(&self, s: f64) -> f64 {
        let (p, d) = match self {
            EvolveOp::Full { p_norm, d_norm, .. } => (*p_norm, *d_norm),
            EvolveOp::Restricted { p_norm, d_norm, .. } => (*p_norm, *d_norm),
        };
        s * p + (1.0 - s) * d
    }

    /// Upper bound on ‖H_p − H_d‖, the drift scale of the interpolation.
    fn diff_bound(&self) -> f64 {
        match self {
            EvolveOp::Full { diff_norm, .. } => *diff_norm,
            EvolveOp::Restricted { diff_norm, .. } => *diff_norm,
        }
    }

    fn ground_weight(&self, psi: &DVector<Complex64>, limit: usize) -> Result<f64> {
        match self {
            EvolveOp::Full { h_p, .. } => ground_space_weight(h_p, psi, limit),
            EvolveOp::Restricted { m_p, .. } => {
                let (values, vectors) = dense_eigen_sorted(m_p);
                let tol = degeneracy_tol(values[0]);
                Ok(values
                    .iter()
                    .zip(&vectors)
                    .take_while(|(e, _)| **e <= values[0] + tol)
                    .map(|(_, v)| v.dotc(psi).norm_sqr())
                    .sum())
            }
        }
    }
}

fn dense_eigen_sorted(m: &DMatrix<Complex64>) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    (
        order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect(),
    )
}

/// Weight of `psi` on the ground eigenspace of `h_p` (full space).
fn ground_space_weight(h_p: &Hamiltonian, psi: &DVector<Complex64>, limit: usize) -> Result<f64> {
    if h_p.is_diagonal() {
        let dim = psi.len();
        let diag: Vec<f64> = (0..dim as u64).map(|u| h_p.diagonal_value(u).re).collect();
        let e0 = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let tol = degeneracy_tol(e0);
        Ok(diag
            .iter()
            .enumerate()
            .filter(|(_, &d)| d <= e0 + tol)
            .map(|(u, _)| psi[u].norm_sqr())
            .sum())
    } else {
        let eig = ground_states_with_limit(h_p, h_p.checked_dim().unwrap_or(usize::MAX), limit)?;
        Ok(eig
            .eigenvectors
            .iter()
            .take(eig.ground_multiplicity)
            .map(|v| v.dotc(psi).norm_sqr())
            .sum())
    }
}

/// exp(−i·H(s)·dt)·psi by sub-stepped Taylor expansion. Sub-steps keep
/// ‖H‖·τ ≤ 1, where 24 Taylor terms bound the tail below 1e−16.
fn exp_step(op: &EvolveOp, s: f64, dt: f64, psi: &mut DVector<Complex64>) -> Result<()> {
    let z = op.norm_bound(s) * dt;
    let n_sub = z.ceil().max(1.0) as usize;
    let tau = dt / n_sub as f64;
    for _ in 0..n_sub {
        let mut acc = psi.clone();
        let mut w = psi.clone();
        for j in 1..=24u32 {
            w = op.apply_blend(s, &w)? * (Complex64::new(0.0, -tau) / j as f64);
            acc += &w;
            if w.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        *psi = acc;
    }
    Ok(())
}

fn run_evolution(op: EvolveOp, psi0: &DVector<Complex64>, sched: &Schedule, limit: usize) -> Result<AnnealResult> {
    let dim = op.dim();
    if psi0.len() != dim {
        return Err(CqaError::LengthMismatch { expected: dim, actual: psi0.len() });
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(CqaError::NotNormalized { norm });
    }
    let total = sched.total_time;

    let n_steps = if total == 0.0 {
        0
    } else {
        let drift = sched
            .steps
            .unwrap_or(((total * op.diff_bound() / sched.drift_tol).sqrt().ceil() as usize).max(1));
        // align steps with the checkpoint cadence
        sched.checkpoints * drift.div_ceil(sched.checkpoints)
    };

    // validate the schedule map on the step grid
    if total > 0.0 {
        let s0 = sched.s_of_t(0.0);
        let s1 = sched.s_of_t(total);
        if s0.abs() > 1e-9 || (s1 - 1.0).abs() > 1e-9 {
            return Err(CqaError::InvalidSchedule(format!("s(0)={s0}, s(T)={s1}")));
        }
        let mut prev = 0.0;
        for k in 0..=n_steps {
            let s = sched.s_of_t(total * k as f64 / n_steps as f64);
            if s < prev - 1e-12 {
                return Err(CqaError::InvalidSchedule("s(t) is not monotone".into()));
            }
            prev = s;
        }
    }

    let mut psi = psi0.clone();
    let mut checkpoints = Vec::with_capacity(sched.checkpoints + 1);
    let mut record = |psi: &DVector<Complex64>, t: f64| -> Result<()> {
        let s = sched.s_of_t(t);
        let h_psi = op.apply_blend(s, psi)?;
        checkpoints.push(Checkpoint {
            s,
            t,
            energy: psi.dotc(&h_psi).re,
            norm: psi.norm(),
            state: psi.clone(),
        });
        Ok(())
    };
    record(&psi, 0.0)?;

    if n_steps > 0 {
        let dt = total / n_steps as f64;
        let cadence = n_steps / sched.checkpoints;
        for k in 0..n_steps {
            let s_mid = sched.s_of_t((k as f64 + 0.5) * dt);
            exp_step(&op, s_mid, dt, &mut psi)?;
            if (k + 1) % cadence == 0 {
                record(&psi, (k + 1) as f64 * dt)?;
            }
        }
    }

    let overlap = op.ground_weight(&psi, limit)?;
    Ok(AnnealResult {
        dim,
        restricted: matches!(op, EvolveOp::Restricted { .. }),
        overlap,
        final_state: psi,
        checkpoints,
    })
}

/// Full-space Schrödinger evolution of `psi0` under the interpolation from
/// `h_d` to `h_p`.
pub fn evolve(
    h_p: &Hamiltonian,
    h_d: &Hamiltonian,
    psi0: &DVector<Complex64>,
    sched: &Schedule,
) -> Result<AnnealResult> {
    evolve_with_limit(h_p, h_d, psi0, sched, DEFAULT_MAX_DENSE_DIM)
}

pub fn evolve_with_limit(
    h_p: &Hamiltonian,
    h_d: &Hamiltonian,
    psi0: &DVector<Complex64>,
    sched: &Schedule,
    limit: usize,
) -> Result<AnnealResult> {
    if h_p.n_sites() != h_d.n_sites() {
        return Err(CqaError::SiteCountMismatch { left: h_p.n_sites(), right: h_d.n_sites() });
    }
    let dim = h_p
        .checked_dim()
        .filter(|&d| d <= limit)
        .ok_or(CqaError::DimensionLimit { dim: usize::MAX, limit })?;
    debug_assert_eq!(dim, 1 << h_p.n_sites());
    let diff_norm = h_p.add(&h_d.scaled(Complex64::new(-1.0, 0.0)))?.one_norm();
    let op = EvolveOp::Full {
        h_p,
        h_d,
        p_norm: h_p.one_norm(),
        d_norm: h_d.one_norm(),
        diff_norm,
    };
    run_evolution(op, psi0, sched, limit)
}

/// Sector-restricted evolution: both Hamiltonians are restricted to the
/// sector (rejecting any closure failure) and `psi0` is given in sector
/// coordinates.
pub fn evolve_in_sector(
    h_p: &Hamiltonian,
    h_d: &Hamiltonian,
    sector: &SectorBasis,
    psi0: &DVector<Complex64>,
    sched: &Schedule,
) -> Result<AnnealResult> {
    let m_p = restrict_to_sector(h_p, sector)?;
    let m_d = restrict_to_sector(h_d, sector)?;
    let diff_norm = matrix_inf_norm(&(&m_p - &m_d));
    let op = EvolveOp::Restricted {
        p_norm: matrix_inf_norm(&m_p),
        d_norm: matrix_inf_norm(&m_d),
        m_p,
        m_d,
        diff_norm,
    };
    run_evolution(op, psi0, sched, DEFAULT_MAX_DENSE_DIM)
}

/// How the initial state is prepared from the driver.
pub enum InitialState<'a> {
    /// Global ground state of the driver; fails when degenerate.
    GlobalGround,
    /// Ground state of the driver restricted to the sector.
    SectorGround(&'a SectorBasis),
    /// Global ground state of H_d + H_aux with the given field strengths,
    /// checked to lie in the target sector.
    AuxAssisted { constraints: &'a [Constraint], fields: &'a [f64], target: &'a SectorBasis },
}

/// Prepares the initial full-space state for an annealing run.
pub fn prepare_initial(h_d: &Hamiltonian, mode: InitialState<'_>) -> Result<DVector<Complex64>> {
    match mode {
        InitialState::GlobalGround => {
            let eig = ground_states_with_limit(h_d, 1, DEFAULT_MAX_DENSE_DIM)?;
            if eig.ground_multiplicity > 1 {
                return Err(CqaError::DegenerateGround { multiplicity: eig.ground_multiplicity });
            }
            Ok(eig.eigenvectors[0].clone())
        }
        InitialState::SectorGround(sector) => {
            let eig = sector_eigh(h_d, sector, 1)?;
            if eig.ground_multiplicity > 1 {
                return Err(CqaError::DegenerateGround { multiplicity: eig.ground_multiplicity });
            }
            sector.embed(&eig.eigenvectors[0])
        }
        InitialState::AuxAssisted { constraints, fields, target } => {
            let steered = h_d.add(&build_aux(h_d.n_sites(), constraints, fields)?)?;
            let eig = ground_states_with_limit(&steered, 1, DEFAULT_MAX_DENSE_DIM)?;
            if eig.ground_multiplicity > 1 {
                return Err(CqaError::DegenerateGround { multiplicity: eig.ground_multiplicity });
            }
            let weight = target.weight(&eig.eigenvectors[0])?;
            if weight < 1.0 - 1e-10 {
                return Err(CqaError::WrongSector { weight });
            }
            Ok(eig.eigenvectors[0].clone())
        }
    }
}
