//! Discrete evolution, spectral projectors, the ideal adiabatic walk and the
//! Volterra series diagnostics.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::integrators::{apply_walk, IntegratorKind, Pair};
use crate::linalg::{hermitian_eig, inner, operator_norm, vec_norm, Hermitian, Matrix, C64};
use crate::schedules::Schedule;
use crate::spectral::{grid_point, track_eigenpaths, EigenpathTrack, PSelector, WalkFamily};

/// Orthogonal projector onto the σ_P eigenvectors at one step.
#[derive(Clone, Debug)]
pub struct SpectralProjector {
    pub matrix: Matrix,
    pub rank: usize,
}

impl SpectralProjector {
    pub fn complement(&self) -> Matrix {
        &Matrix::identity(self.matrix.dim()) - &self.matrix
    }
}

pub fn spectral_projector(track: &EigenpathTrack, step: usize) -> Result<SpectralProjector> {
    if step >= track.steps() {
        return input(format!("step {step} beyond the last tracked step {}", track.steps() - 1));
    }
    let v = &track.vectors[step];
    let n = v.dim();
    let cols: Vec<Vec<C64>> = track.p_group.iter().map(|&a| v.column(a)).collect();
    let matrix = Matrix::from_fn(n, |i, j| cols.iter().map(|c| c[i] * c[j].conj()).sum());
    Ok(SpectralProjector { matrix, rank: cols.len() })
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionResult {
    pub final_state: Vec<C64>,
    /// ‖(I − P(1))ψ(1)‖
    pub leakage: f64,
    /// |⟨e_a|ψ(1)⟩| for each tracked path a at the last step.
    pub fidelities: Vec<f64>,
    #[serde(skip)]
    pub trajectory: Option<Vec<Vec<C64>>>,
}

fn check_state(v: &[C64], n: usize) -> Result<()> {
    if v.len() != n {
        return input(format!("state has length {} but operators are {n}x{n}", v.len()));
    }
    let norm = vec_norm(v);
    if (norm - 1.0).abs() > 1e-10 {
        return input(format!("initial state has norm {norm}, expected 1"));
    }
    Ok(())
}

/// Norm of the component of `v` orthogonal to the given orthonormal columns.
pub fn orthogonal_residual(v: &[C64], basis: &[Vec<C64>]) -> f64 {
    let mut r = v.to_vec();
    for b in basis {
        let c = inner(b, v);
        for (x, y) in r.iter_mut().zip(b) {
            *x -= c * y;
        }
    }
    vec_norm(&r)
}

/// ψ(n) = W((n−1)/T_d) ⋯ W(0) ψ, scored against the last step of the track.
pub fn evolve(family: &WalkFamily, initial: &[C64], track: &EigenpathTrack, keep_trajectory: bool) -> Result<EvolutionResult> {
    check_state(initial, family.dim())?;
    if track.steps() != family.td + 1 {
        return input("track and family have different lengths");
    }
    let mut psi = initial.to_vec();
    let mut traj = keep_trajectory.then(|| vec![psi.clone()]);
    for j in 0..family.td {
        psi = family.walk(j).matrix().mul_vec(&psi);
        if let Some(t) = traj.as_mut() {
            t.push(psi.clone());
        }
    }
    let last = &track.vectors[family.td];
    let cols: Vec<Vec<C64>> = (0..last.dim()).map(|a| last.column(a)).collect();
    let p_cols: Vec<Vec<C64>> = track.p_group.iter().map(|&a| cols[a].clone()).collect();
    Ok(EvolutionResult {
        leakage: orthogonal_residual(&psi, &p_cols),
        fidelities: cols.iter().map(|c| inner(c, &psi).norm()).collect(),
        final_state: psi,
        trajectory: traj,
    })
}

/// Streams T_d walk applications without storing the family.
pub fn evolve_streaming(pair: &Pair, sched: &Schedule, kind: IntegratorKind, h: f64, td: usize, initial: &[C64]) -> Result<Vec<C64>> {
    check_state(initial, pair.dim())?;
    if !(h > 0.0) || td == 0 {
        return input("need h > 0 and T_d ≥ 1");
    }
    let ds = 1.0 / td as f64;
    let mut psi = initial.to_vec();
    for j in 0..td {
        apply_walk(pair, sched, kind, h, j as f64 * ds, ds, &mut psi);
    }
    Ok(psi)
}

/// S, v, V, W_A and U_A along a family, all expressed in the eigenbasis of P(0)
/// (P(0) range first) so that Q(0)XP(0) is the lower-left block.
#[derive(Clone, Debug)]
pub struct IdealAdiabaticFamily {
    pub td: usize,
    pub rank: usize,
    /// Change of basis: columns are the eigenvectors of W(0), σ_P first.
    pub basis: Matrix,
    pub projectors: Vec<Matrix>,
    pub s_ops: Vec<Matrix>,
    pub v_ops: Vec<Matrix>,
    /// I − V, kept separately since it is far smaller than V.
    pub i_minus_v: Vec<Matrix>,
    pub walks: Vec<Matrix>,
    pub u_a: Vec<Matrix>,
    pub max_intertwining_residual: f64,
}

impl IdealAdiabaticFamily {
    pub fn walk_a(&self, k: usize) -> Matrix {
        self.v_ops[k].matmul(&self.walks[k])
    }
}

fn to_basis(b: &Matrix, x: &Matrix) -> Matrix {
    b.adjoint_matmul(&x.matmul(b))
}

const SIGMA_FLOOR: f64 = 1e-8;

pub fn ideal_adiabatic_family(track: &EigenpathTrack, family: &WalkFamily) -> Result<IdealAdiabaticFamily> {
    let td = family.td;
    if track.steps() != td + 1 {
        return input("track and family have different lengths");
    }
    let n = family.dim();
    let rank = track.p_group.len();
    let mut order = track.p_group.clone();
    order.extend(track.q_group());
    let basis = Matrix::from_columns(&order.iter().map(|&a| track.vectors[0].column(a)).collect::<Vec<_>>());

    let projectors: Vec<Matrix> = (0..=td)
        .into_par_iter()
        .map(|j| spectral_projector(track, j).map(|p| to_basis(&basis, &p.matrix)))
        .collect::<Result<_>>()?;
    let walks: Vec<Matrix> = family.walks().par_iter().map(|w| to_basis(&basis, w.matrix())).collect();
    let id = Matrix::identity(n);

    let per_step: Vec<(Matrix, Matrix, Matrix)> = (0..td)
        .into_par_iter()
        .map(|k| {
            let (p, pn) = (&projectors[k], &projectors[k + 1]);
            let d = pn - p;
            let r = d.matmul(&(&id - &p.scale_re(2.0)));
            let s = &id - &r;
            let e = hermitian_eig(&Hermitian::symmetrized(&d.matmul(&d)))?;
            let x_max = e.values.last().copied().unwrap_or(0.0).clamp(0.0, 1.0);
            let sigma = (1.0 - x_max).sqrt();
            if sigma < SIGMA_FLOOR {
                return Err(Error::GapCollapse { step: k, sigma });
            }
            // v⁻¹ − I = (I − D²)^{−1/2} − I, evaluated without cancellation.
            let y = e.apply_fn(|x| C64::new((-0.5 * (-x.clamp(0.0, 1.0)).ln_1p()).exp_m1(), 0.0));
            let i_minus_v = &(&r - &y) + &y.matmul(&r);
            let v = &id - &i_minus_v;
            let unit = v.adjoint_matmul(&v).max_diff(&id);
            if unit > 1e-9 {
                return Err(Error::NotUnitary(unit));
            }
            Ok((s, v, i_minus_v))
        })
        .collect::<Result<_>>()?;
    let mut s_ops = Vec::with_capacity(td);
    let mut v_ops = Vec::with_capacity(td);
    let mut i_minus_v = Vec::with_capacity(td);
    for (s, v, imv) in per_step {
        s_ops.push(s);
        v_ops.push(v);
        i_minus_v.push(imv);
    }

    let mut u_a = Vec::with_capacity(td + 1);
    u_a.push(id.clone());
    let mut worst: f64 = 0.0;
    for k in 0..td {
        let next = v_ops[k].matmul(&walks[k].matmul(&u_a[k]));
        let lhs = next.matmul(&projectors[0]);
        let rhs = projectors[k + 1].matmul(&next);
        let res = operator_norm(&(&lhs - &rhs));
        worst = worst.max(res);
        if res > 1e-8 {
            return Err(Error::Intertwining { step: k + 1, residual: res });
        }
        u_a.push(next);
    }
    Ok(IdealAdiabaticFamily {
        td,
        rank,
        basis,
        projectors,
        s_ops,
        v_ops,
        i_minus_v,
        walks,
        u_a,
        max_intertwining_residual: worst,
    })
}

#[derive(Clone, Debug)]
pub struct VolterraDiagnostics {
    pub td: usize,
    pub j_max: usize,
    /// Θ(k/T_d) − I per step; K = −T_d(Θ − I).
    pub theta_minus_identity: Vec<Matrix>,
    /// off_diag[j][n] = ‖Q(0)Ω_j(n/T_d)P(0)‖ for j = 0..=j_max.
    pub off_diag: Vec<Vec<f64>>,
    /// ‖Q(0)Ω(n/T_d)P(0)‖
    pub omega_off_diag: Vec<f64>,
    pub omega_final: Matrix,
    pub omega_j_final: Vec<Matrix>,
    /// max_n ‖Ω(n) − U_A†(n)U(n)‖
    pub cross_check: f64,
}

impl VolterraDiagnostics {
    pub fn k_op(&self, k: usize) -> Matrix {
        self.theta_minus_identity[k].scale_re(-(self.td as f64))
    }

    /// ‖Ω(1) − Σ_{j≤j_max} Ω_j(1)‖
    pub fn series_residual(&self) -> f64 {
        let mut sum = Matrix::zeros(self.omega_final.dim());
        for m in &self.omega_j_final {
            sum = &sum + m;
        }
        operator_norm(&(&self.omega_final - &sum))
    }
}

fn lower_left(x: &Matrix, rank: usize) -> f64 {
    let n = x.dim();
    operator_norm(&x.block(rank..n, 0..rank))
}

pub fn volterra_diagnostics(ideal: &IdealAdiabaticFamily, j_max: usize) -> Result<VolterraDiagnostics> {
    if j_max == 0 {
        return input("j_max must be at least 1");
    }
    let td = ideal.td;
    let n = ideal.basis.dim();
    let id = Matrix::identity(n);
    let r = ideal.rank;

    // Θ_k − I = U_A†(k+1)(I − V_k)W_k U_A(k)
    let theta: Vec<Matrix> = (0..td)
        .into_par_iter()
        .map(|k| ideal.u_a[k + 1].adjoint_matmul(&ideal.i_minus_v[k].matmul(&ideal.walks[k].matmul(&ideal.u_a[k]))))
        .collect();

    let mut omega_j: Vec<Matrix> = (0..=j_max).map(|j| if j == 0 { id.clone() } else { Matrix::zeros(n) }).collect();
    let mut omega = id.clone();
    let mut u = id.clone();
    let mut off_diag = vec![vec![0.0; td + 1]; j_max + 1];
    let mut omega_off = vec![0.0; td + 1];
    let mut cross: f64 = 0.0;
    for k in 0..td {
        let t = &theta[k];
        for j in (1..=j_max).rev() {
            let inc = t.matmul(&omega_j[j - 1]);
            omega_j[j] = &omega_j[j] + &inc;
        }
        omega = &omega + &t.matmul(&omega);
        u = ideal.walks[k].matmul(&u);
        let direct = ideal.u_a[k + 1].adjoint_matmul(&u);
        cross = cross.max(operator_norm(&(&omega - &direct)));
        for j in 0..=j_max {
            off_diag[j][k + 1] = lower_left(&omega_j[j], r);
        }
        omega_off[k + 1] = lower_left(&omega, r);
    }
    if cross > 1e-8 {
        return Err(Error::VolterraMismatch(cross));
    }
    Ok(VolterraDiagnostics {
        td,
        j_max,
        theta_minus_identity: theta,
        off_diag,
        omega_off_diag: omega_off,
        omega_final: omega,
        omega_j_final: omega_j,
        cross_check: cross,
    })
}

/// One T_d row of the boundary/interior comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub td: usize,
    /// max_n ‖Q(0)Ω_1(n/T_d)P(0)‖
    pub interior_omega1: f64,
    /// ‖Q(0)Ω_1(1)P(0)‖
    pub boundary_omega1: f64,
    /// ‖Q(0)Ω(1)P(0)‖
    pub boundary_omega: f64,
    pub cross_check: f64,
    pub intertwining: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub interior_slope: f64,
    pub boundary_omega1_slope: f64,
    pub boundary_omega_slope: f64,
    /// Fits over the first and last three T_d values.
    pub boundary_omega1_half_slopes: (f64, f64),
    pub boundary_omega_half_slopes: (f64, f64),
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Volterra diagnostics of one model over a list of T_d values.
pub fn boundary_vs_interior_scaling(
    pair: &Pair,
    sched: &Schedule,
    kind: IntegratorKind,
    h: f64,
    selector: &PSelector,
    td_list: &[usize],
) -> Result<ScalingReport> {
    if td_list.len() < 4 || td_list.windows(2).any(|w| w[1] <= w[0]) {
        return input("T_d list must be strictly ascending with at least four values");
    }
    let rows = td_list
        .iter()
        .map(|&td| {
            let fam = WalkFamily::build(pair, sched, kind, h, td)?;
            let track = track_eigenpaths(&fam, selector)?;
            let ideal = ideal_adiabatic_family(&track, &fam)?;
            let vd = volterra_diagnostics(&ideal, 1)?;
            Ok(ScalingRow {
                td,
                interior_omega1: vd.off_diag[1].iter().copied().fold(0.0, f64::max),
                boundary_omega1: vd.off_diag[1][td],
                boundary_omega: vd.omega_off_diag[td],
                cross_check: vd.cross_check,
                intertwining: ideal.max_intertwining_residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.td as f64).collect();
    let col = |f: fn(&ScalingRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let (yi, yb1, yb) = (col(|r| r.interior_omega1), col(|r| r.boundary_omega1), col(|r| r.boundary_omega));
    let m = x.len();
    let halves = |y: &[f64]| (loglog_slope(&x[..3], &y[..3]), loglog_slope(&x[m - 3..], &y[m - 3..]));
    Ok(ScalingReport {
        interior_slope: loglog_slope(&x, &yi),
        boundary_omega1_slope: loglog_slope(&x, &yb1),
        boundary_omega_slope: loglog_slope(&x, &yb),
        boundary_omega1_half_slopes: halves(&yb1),
        boundary_omega_half_slopes: halves(&yb),
        rows,
    })
}

/// s-grid of a family, for CSV output.
pub fn family_grid(td: usize) -> Vec<f64> {
    (0..=td).map(|j| grid_point(j, td)).collect()
}
