//! Adiabatic search in the two-dimensional invariant subspace spanned by the
//! marked superposition |e0⟩ and the unmarked one |e1⟩.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::evolution::loglog_slope;
use crate::integrators::Pair;
use crate::linalg::{Hermitian, Matrix, C64};
use crate::schedules::{grover_d_constant, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroverInstance {
    pub n: u64,
    pub m: u64,
}

impl GroverInstance {
    pub fn new(n: u64, m: u64) -> Result<Self> {
        if m == 0 || n < 2 * m {
            return input(format!("need 1 ≤ M and N ≥ 2M, got N = {n}, M = {m}"));
        }
        Ok(GroverInstance { n, m })
    }

    fn ratio(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// |u⟩ = (√(M/N), √((N−M)/N))
    pub fn initial_state(&self) -> [f64; 2] {
        let (n, m) = (self.n as f64, self.m as f64);
        [(m / n).sqrt(), ((n - m) / n).sqrt()]
    }
}

/// H0 = I − |u⟩⟨u| and H1 = diag(0, 1) in the basis (|e0⟩, |e1⟩).
pub fn effective_hamiltonians(inst: GroverInstance) -> Result<Pair> {
    let inst = GroverInstance::new(inst.n, inst.m)?;
    let r = inst.ratio();
    let (n, m) = (inst.n as f64, inst.m as f64);
    let off = -(m * (n - m)).sqrt() / n;
    let h0 = Hermitian::new(Matrix::from_real_rows(&[&[1.0 - r, off], &[off, r]])?)?;
    Pair::new(h0, Hermitian::from_real_diag(&[0.0, 1.0]))
}

/// Gap of H(f) and of the PF1 walk at h = 1.
pub fn gap_closed_forms(inst: GroverInstance, f: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&f) {
        return input(format!("f = {f} outside [0, 1]"));
    }
    let r = inst.ratio();
    let gap_h = (1.0 - 4.0 * (1.0 - r) * f * (1.0 - f)).sqrt();
    // 1 − ξ written as a sum of nonnegative terms to keep small gaps accurate.
    let a = 0.5 - f;
    let one_minus_xi = (1.0 - r) * 2.0 * (0.5 * a).sin().powi(2) + r * 2.0 * 0.25f64.sin().powi(2);
    let gap_w = 4.0 * (0.5 * one_minus_xi).sqrt().min(1.0).asin();
    Ok((gap_h, gap_w))
}

/// λ± = e^{−i/2}(ξ ± i√(1−ξ²)), ξ = (M/N)cos(1/2) + ((N−M)/N)cos(1/2 − f).
pub fn walk_eigenvalues(inst: GroverInstance, f: f64) -> (C64, C64) {
    let r = inst.ratio();
    let xi = r * 0.5f64.cos() + (1.0 - r) * (0.5 - f).cos();
    let root = (1.0 - xi * xi).max(0.0).sqrt();
    let rot = C64::from_polar(1.0, -0.5);
    (rot * C64::new(xi, root), rot * C64::new(xi, -root))
}

/// One PF1 step at h = 1: e^{−iγH1} e^{−iβH0}.
fn step(u: &[f64; 2], psi: &mut [C64; 2], beta: f64, gamma: f64) {
    // e^{−iβH0} = e^{−iβ} I + (1 − e^{−iβ})|u⟩⟨u|
    let e = C64::from_polar(1.0, -beta);
    let proj = psi[0] * u[0] + psi[1] * u[1];
    let k = (C64::new(1.0, 0.0) - e) * proj;
    psi[0] = e * psi[0] + k * u[0];
    psi[1] = e * psi[1] + k * u[1];
    psi[1] *= C64::from_polar(1.0, -gamma);
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchResult {
    pub final_state: [C64; 2],
    /// ‖|φ⟩⟨φ| − |e0⟩⟨e0|‖ = |⟨e1|φ⟩|
    pub error: f64,
    pub success_probability: f64,
    /// T below the 12·d_{N,p} threshold of the error analysis.
    pub below_threshold: bool,
}

fn finish(psi: [C64; 2], below_threshold: bool) -> SearchResult {
    SearchResult { error: psi[1].norm(), success_probability: psi[0].norm_sqr(), final_state: psi, below_threshold }
}

fn threshold(sched: &Schedule, t: u64) -> bool {
    match sched {
        Schedule::GroverPower(g) => (t as f64) < 12.0 * g.d,
        _ => false,
    }
}

/// Π_{j<T} e^{−i f(j/T) H1} e^{−i (1−f(j/T)) H0} |u⟩
pub fn run_search(inst: GroverInstance, sched: &Schedule, t: u64) -> Result<SearchResult> {
    let inst = GroverInstance::new(inst.n, inst.m)?;
    if t == 0 {
        return input("T must be at least 1");
    }
    let u = inst.initial_state();
    let mut psi = [C64::new(u[0], 0.0), C64::new(u[1], 0.0)];
    for j in 0..t {
        let gamma = sched.f(j as f64 / t as f64);
        step(&u, &mut psi, 1.0 - gamma, gamma);
    }
    Ok(finish(psi, threshold(sched, t)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QaoaAngleSet {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

/// γ_j = f(j/T), β_j = 1 − γ_j
pub fn qaoa_angles(sched: &Schedule, t: u64) -> Result<QaoaAngleSet> {
    if t == 0 {
        return input("T must be at least 1");
    }
    let gammas: Vec<f64> = (0..t).map(|j| sched.f(j as f64 / t as f64)).collect();
    Ok(QaoaAngleSet { betas: gammas.iter().map(|g| 1.0 - g).collect(), gammas })
}

/// Applies alternating angles to |u⟩.
pub fn replay_angles(inst: GroverInstance, angles: &QaoaAngleSet) -> Result<SearchResult> {
    let inst = GroverInstance::new(inst.n, inst.m)?;
    if angles.betas.len() != angles.gammas.len() || angles.betas.is_empty() {
        return input("beta and gamma arrays must be nonempty and of equal length");
    }
    let u = inst.initial_state();
    let mut psi = [C64::new(u[0], 0.0), C64::new(u[1], 0.0)];
    for (&b, &g) in angles.betas.iter().zip(&angles.gammas) {
        step(&u, &mut psi, b, g);
    }
    Ok(finish(psi, false))
}

/// Schedule families used in the scaling experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GroverScheduleKind {
    Power { p: f64 },
    Composite,
    Linear,
}

impl GroverScheduleKind {
    pub fn build(&self, n: u64) -> Result<Schedule> {
        match *self {
            GroverScheduleKind::Power { p } => Schedule::grover(n, p),
            GroverScheduleKind::Composite => Ok(Schedule::Composite),
            GroverScheduleKind::Linear => Ok(Schedule::Linear),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GroverScheduleKind::Power { p } => format!("power-{p}"),
            GroverScheduleKind::Composite => "composite".into(),
            GroverScheduleKind::Linear => "linear".into(),
        }
    }

    /// T/(√(N/M)·log N) for power schedules, T/(√(N/M)·log⁴(N/M)) for the composite one.
    pub fn normalized_ratio(&self, inst: GroverInstance, t: u64) -> f64 {
        let q = inst.n as f64 / inst.m as f64;
        match self {
            GroverScheduleKind::Composite => t as f64 / (q.sqrt() * q.ln().powi(4)),
            _ => t as f64 / (q.sqrt() * (inst.n as f64).ln()),
        }
    }
}

pub const MAX_STEPS: u64 = 100_000_000;

/// Smallest T with error ≤ target: doubling then bisection. None when T would exceed `MAX_STEPS`.
pub fn min_steps(inst: GroverInstance, sched: &Schedule, target: f64) -> Result<Option<u64>> {
    if !(target > 0.0 && target < 1.0) {
        return input(format!("target error {target} outside (0, 1)"));
    }
    let ok = |t: u64| run_search(inst, sched, t).map(|r| r.error <= target);
    if ok(1)? {
        return Ok(Some(1));
    }
    let mut hi = 2;
    while !ok(hi)? {
        if hi >= MAX_STEPS {
            return Ok(None);
        }
        hi = (hi * 2).min(MAX_STEPS);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingCell {
    pub n: u64,
    pub m: u64,
    pub schedule: String,
    pub target_error: f64,
    pub t_required: Option<u64>,
    pub normalized_ratio: Option<f64>,
}

/// Minimal step counts over an (N, M) grid; rows sorted by (N, M).
pub fn scaling_experiment(m_list: &[u64], n_list: &[u64], kind: GroverScheduleKind, target: f64) -> Result<Vec<ScalingCell>> {
    let mut cells = Vec::new();
    for &n in n_list {
        for &m in m_list {
            cells.push(GroverInstance::new(n, m)?);
        }
    }
    let mut rows = cells
        .into_par_iter()
        .map(|inst| {
            let sched = kind.build(inst.n)?;
            let t = min_steps(inst, &sched, target)?;
            Ok(ScalingCell {
                n: inst.n,
                m: inst.m,
                schedule: kind.label(),
                target_error: target,
                t_required: t,
                normalized_ratio: t.map(|t| kind.normalized_ratio(inst, t)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.n, r.m));
    Ok(rows)
}

/// Error at each T and the least-squares log-log slope.
pub fn error_curve(inst: GroverInstance, sched: &Schedule, t_list: &[u64]) -> Result<(Vec<f64>, f64)> {
    let errs = t_list.par_iter().map(|&t| run_search(inst, sched, t).map(|r| r.error)).collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = t_list.iter().map(|&t| t as f64).collect();
    let slope = loglog_slope(&x, &errs);
    Ok((errs, slope))
}

/// Θ-free sanity bound: T_min ≥ 12·d_{N,p} for the power schedule.
pub fn power_threshold(n: u64, p: f64) -> Result<f64> {
    Ok(12.0 * grover_d_constant(n, p)?)
}
