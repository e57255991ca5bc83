//! Spectral gaps of walk families and interpolated Hamiltonians, eigenpath
//! tracking, finite differences and the discrete adiabatic error bound.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::integrators::{nested_commutator_sum, walk_matrix, IntegratorKind, Pair};
use crate::linalg::{hermitian_eig, inner, normal_eig, operator_norm, phase_distance, Hermitian, Matrix, Unitary, C64};
use crate::schedules::Schedule;

/// W(j/T_d) for j = 0..=T_d.
#[derive(Clone, Debug)]
pub struct WalkFamily {
    pub td: usize,
    pub h: f64,
    pub kind: Option<IntegratorKind>,
    walks: Vec<Unitary>,
}

impl WalkFamily {
    pub fn build(pair: &Pair, sched: &Schedule, kind: IntegratorKind, h: f64, td: usize) -> Result<Self> {
        if td == 0 {
            return input("T_d must be positive");
        }
        if !(h > 0.0) || !h.is_finite() {
            return input(format!("step size h = {h} must be positive"));
        }
        let ds = 1.0 / td as f64;
        let walks = (0..=td)
            .into_par_iter()
            .map(|j| Unitary::trusted(walk_matrix(pair, sched, kind, h, grid_point(j, td), ds)))
            .collect();
        Ok(WalkFamily { td, h, kind: Some(kind), walks })
    }

    /// Family from explicit operators; `walks.len()` must be T_d + 1.
    pub fn from_walks(walks: Vec<Unitary>, h: f64) -> Result<Self> {
        if walks.len() < 2 {
            return input("a walk family needs at least two operators");
        }
        let n = walks[0].dim();
        if walks.iter().any(|w| w.dim() != n) {
            return input("walk operators have inconsistent dimensions");
        }
        Ok(WalkFamily { td: walks.len() - 1, h, kind: None, walks })
    }

    pub fn walk(&self, j: usize) -> &Unitary {
        &self.walks[j]
    }

    pub fn walks(&self) -> &[Unitary] {
        &self.walks
    }

    pub fn dim(&self) -> usize {
        self.walks[0].dim()
    }
}

/// s = j / T_d, exact at both ends.
pub fn grid_point(j: usize, td: usize) -> f64 {
    if j >= td {
        1.0
    } else {
        j as f64 / td as f64
    }
}

/// Which paths form σ_P.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PSelector {
    /// The single path starting at the lowest eigenphase (or eigenvalue).
    GroundPhase,
    /// Indices into the ascending order at s = 0.
    ExplicitIndices(Vec<usize>),
}

impl PSelector {
    fn resolve(&self, dim: usize) -> Result<Vec<usize>> {
        match self {
            PSelector::GroundPhase => Ok(vec![0]),
            PSelector::ExplicitIndices(idx) => {
                let mut v = idx.clone();
                v.sort_unstable();
                v.dedup();
                if v.is_empty() || v.len() >= dim || v.iter().any(|&i| i >= dim) {
                    return input(format!("P group {idx:?} must be a nonempty proper subset of 0..{dim}"));
                }
                Ok(v)
            }
        }
    }
}

/// Continuously matched eigenpaths.
#[derive(Clone, Debug)]
pub struct EigenpathTrack {
    /// values[j][a]: eigenphase (walks) or eigenvalue (Hamiltonians) of path a at step j.
    pub values: Vec<Vec<f64>>,
    /// vectors[j] has the path-a eigenvector in column a.
    pub vectors: Vec<Matrix>,
    pub p_group: Vec<usize>,
    /// Values are phases on the circle rather than points on the line.
    pub circular: bool,
}

impl EigenpathTrack {
    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn q_group(&self) -> Vec<usize> {
        let n = self.values[0].len();
        (0..n).filter(|a| !self.p_group.contains(a)).collect()
    }

    /// Phases with 2π jumps removed along each path.
    pub fn unwrapped(&self) -> Vec<Vec<f64>> {
        let mut out = self.values.clone();
        if !self.circular {
            return out;
        }
        for j in 1..out.len() {
            for a in 0..out[j].len() {
                let prev = out[j - 1][a];
                let mut x = out[j][a];
                x += 2.0 * PI * ((prev - x) / (2.0 * PI)).round();
                out[j][a] = x;
            }
        }
        out
    }

    fn distance(&self, x: f64, y: f64) -> f64 {
        if self.circular {
            phase_distance(x, y)
        } else {
            (x - y).abs()
        }
    }
}

/// Tolerance below which eigenvalues are treated as one cluster during matching.
const TRACK_CLUSTER_TOL: f64 = 1e-7;
const OVERLAP_FLOOR: f64 = 0.5;

fn polar_factor(m: &Matrix) -> Option<Matrix> {
    let gram = Hermitian::symmetrized(&m.adjoint_matmul(m));
    let e = hermitian_eig(&gram).ok()?;
    if e.values[0] < 1e-20 {
        return None;
    }
    let inv_sqrt = e.apply_fn(|x| C64::new(1.0 / x.sqrt(), 0.0));
    Some(m.matmul(&inv_sqrt))
}

/// Matches the eigenpairs `(vals, vecs)` of one step to the previous step's paths.
fn match_step(
    step: usize,
    prev_vals: &[f64],
    prev_vecs: &Matrix,
    vals: &[f64],
    vecs: &Matrix,
    circular: bool,
) -> Result<(Vec<f64>, Matrix)> {
    let dist = |x: f64, y: f64| if circular { phase_distance(x, y) } else { (x - y).abs() };
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(c) if dist(vals[*c.last().unwrap()], vals[i]) < TRACK_CLUSTER_TOL => c.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    if clusters.len() > 1 {
        let (first, last) = (clusters[0][0], *clusters.last().unwrap().last().unwrap());
        if dist(vals[first], vals[last]) < TRACK_CLUSTER_TOL {
            let tail = clusters.pop().unwrap();
            clusters[0].splice(0..0, tail);
        }
    }

    let prev_cols: Vec<Vec<C64>> = (0..n).map(|a| prev_vecs.column(a)).collect();
    let new_cols: Vec<Vec<C64>> = (0..n).map(|b| vecs.column(b)).collect();
    let cluster_val = |c: &[usize]| vals[c[0]];

    let mut cands: Vec<(f64, f64, usize, usize)> = Vec::with_capacity(n * clusters.len());
    for a in 0..n {
        for (ci, c) in clusters.iter().enumerate() {
            let w: f64 = c.iter().map(|&b| inner(&new_cols[b], &prev_cols[a]).norm_sqr()).sum();
            cands.push((w, dist(prev_vals[a], cluster_val(c)), a, ci));
        }
    }
    cands.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.total_cmp(&y.1)));
    let mut path_cluster = vec![usize::MAX; n];
    let mut remaining: Vec<usize> = clusters.iter().map(Vec::len).collect();
    for &(w, _, a, ci) in &cands {
        if path_cluster[a] != usize::MAX || remaining[ci] == 0 {
            continue;
        }
        if w < OVERLAP_FLOOR {
            return Err(Error::TrackingAmbiguity { step, overlap: w });
        }
        path_cluster[a] = ci;
        remaining[ci] -= 1;
    }

    let mut out_vals = vec![0.0; n];
    let mut out = Matrix::zeros(n);
    for (ci, c) in clusters.iter().enumerate() {
        let paths: Vec<usize> = (0..n).filter(|&a| path_cluster[a] == ci).collect();
        let m = c.len();
        let aligned: Vec<Vec<C64>> = if m == 1 {
            vec![new_cols[c[0]].clone()]
        } else {
            // Rotate the cluster basis onto the incoming paths.
            let overlap = Matrix::from_fn(m, |i, k| inner(&new_cols[c[i]], &prev_cols[paths[k]]));
            let x = polar_factor(&overlap).ok_or(Error::TrackingAmbiguity { step, overlap: 0.0 })?;
            (0..m)
                .map(|k| {
                    let mut v = vec![C64::new(0.0, 0.0); n];
                    for i in 0..m {
                        let coef = x.get(i, k);
                        for (vr, nr) in v.iter_mut().zip(&new_cols[c[i]]) {
                            *vr += nr * coef;
                        }
                    }
                    v
                })
                .collect()
        };
        let mean = if m == 1 { vals[c[0]] } else { cluster_mean(c.iter().map(|&b| vals[b]), circular) };
        for (k, &a) in paths.iter().enumerate() {
            let mut v = aligned[k].clone();
            let ov = inner(&prev_cols[a], &v);
            if ov.norm() > 0.0 {
                let ph = ov.conj() / ov.norm();
                v.iter_mut().for_each(|z| *z *= ph);
            }
            out.set_column(a, &v);
            out_vals[a] = mean;
        }
    }
    Ok((out_vals, out))
}

fn cluster_mean(vals: impl Iterator<Item = f64>, circular: bool) -> f64 {
    let v: Vec<f64> = vals.collect();
    let base = v[0];
    // Offsets taken modulo 2π so circular clusters may straddle ±π.
    let wrap = |x: f64| if circular { (x + PI).rem_euclid(2.0 * PI) - PI } else { x };
    let off: f64 = v.iter().map(|&x| wrap(x - base)).sum();
    let m = base + off / v.len() as f64;
    if circular && m <= -PI {
        m + 2.0 * PI
    } else if circular && m > PI {
        m - 2.0 * PI
    } else {
        m
    }
}

fn track_generic(
    decomps: Vec<(Vec<f64>, Matrix)>,
    selector: &PSelector,
    circular: bool,
) -> Result<EigenpathTrack> {
    let dim = decomps[0].0.len();
    let p_group = selector.resolve(dim)?;
    let mut it = decomps.into_iter();
    let (v0, e0) = it.next().unwrap();
    let mut values = vec![v0];
    let mut vectors = vec![e0];
    for (j, (vals, vecs)) in it.enumerate() {
        let (pv, pe) = (values.last().unwrap(), vectors.last().unwrap());
        let (nv, ne) = match_step(j + 1, pv, pe, &vals, &vecs, circular)?;
        values.push(nv);
        vectors.push(ne);
    }
    Ok(EigenpathTrack { values, vectors, p_group, circular })
}

/// Eigenphase paths of a walk family.
pub fn track_eigenpaths(family: &WalkFamily, selector: &PSelector) -> Result<EigenpathTrack> {
    let decomps = family
        .walks
        .par_iter()
        .map(|w| normal_eig(w.matrix()).map(|e| (e.phases(), e.vectors)))
        .collect::<Result<Vec<_>>>()?;
    track_generic(decomps, selector, true)
}

/// Eigenvalue paths of H(s) on `grid` equispaced points.
pub fn track_hamiltonian(pair: &Pair, sched: &Schedule, grid: usize, selector: &PSelector) -> Result<EigenpathTrack> {
    if grid < 2 {
        return input("grid must have at least two points");
    }
    let decomps = (0..grid)
        .into_par_iter()
        .map(|i| {
            let f = sched.eval_unchecked(grid_point(i, grid - 1)).f;
            hermitian_eig(&pair.hamiltonian(f)).map(|e| (e.values, e.vectors))
        })
        .collect::<Result<Vec<_>>>()?;
    track_generic(decomps, selector, false)
}

/// Fixed-time gaps, and multistep gaps Δ_0..Δ_2 when available.
#[derive(Clone, Debug, PartialEq)]
pub struct GapProfile {
    pub s: Vec<f64>,
    pub fixed: Vec<f64>,
    pub multistep: Option<[Vec<f64>; 3]>,
}

impl GapProfile {
    pub fn min_fixed(&self) -> f64 {
        self.fixed.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_multistep(&self, k: usize) -> Option<f64> {
        self.multistep.as_ref().map(|m| m[k].iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// CSV body with columns s, fixed_gap, delta0, delta1, delta2 (empty when absent).
    pub fn csv_rows(&self) -> Vec<[String; 5]> {
        (0..self.s.len())
            .map(|j| {
                let ms = |k: usize| self.multistep.as_ref().map(|m| format!("{:.16e}", m[k][j])).unwrap_or_default();
                [format!("{:.16e}", self.s[j]), format!("{:.16e}", self.fixed[j]), ms(0), ms(1), ms(2)]
            })
            .collect()
    }
}

fn group_gap(track: &EigenpathTrack, steps: std::ops::RangeInclusive<usize>) -> f64 {
    let (p, q) = (&track.p_group, track.q_group());
    let mut g = f64::INFINITY;
    for j in steps.clone() {
        for &a in p {
            for k in steps.clone() {
                for &b in &q {
                    g = g.min(track.distance(track.values[j][a], track.values[k][b]));
                }
            }
        }
    }
    if g < 1e-14 {
        0.0
    } else {
        g
    }
}

/// Gaps between σ_P and σ_Q along a walk track.
pub fn walk_gap_profile(track: &EigenpathTrack) -> GapProfile {
    let last = track.steps() - 1;
    let td = last.max(1);
    let s = (0..=last).map(|j| grid_point(j, td)).collect();
    let fixed: Vec<f64> = (0..=last).map(|j| group_gap(track, j..=j)).collect();
    let window = |k: usize| (0..=last).map(|j| group_gap(track, j..=(j + k).min(last))).collect::<Vec<_>>();
    GapProfile { s, fixed: fixed.clone(), multistep: Some([fixed, window(1), window(2)]) }
}

/// Gap of H(s) between the selected eigenvalues and the rest, per grid point.
pub fn hamiltonian_gap_profile(pair: &Pair, sched: &Schedule, grid: usize, selector: &PSelector) -> Result<GapProfile> {
    if grid < 2 {
        return input("grid must have at least two points");
    }
    let p = selector.resolve(pair.dim())?;
    let gaps = (0..grid)
        .into_par_iter()
        .map(|i| {
            let f = sched.eval_unchecked(grid_point(i, grid - 1)).f;
            let e = hermitian_eig(&pair.hamiltonian(f))?;
            let mut g = f64::INFINITY;
            for &a in &p {
                for b in (0..e.values.len()).filter(|b| !p.contains(b)) {
                    g = g.min((e.values[a] - e.values[b]).abs());
                }
            }
            Ok(g)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapProfile { s: (0..grid).map(|i| grid_point(i, grid - 1)).collect(), fixed: gaps, multistep: None })
}

/// Angular distance between the two lowest eigenphases of `w`.
pub fn lowest_phase_gap(w: &Matrix) -> Result<f64> {
    let ph = normal_eig(w)?.phases();
    Ok(phase_distance(ph[0], ph[1]))
}

/// Operator norm of the k-th forward difference of W at step j.
pub fn finite_difference_norm(family: &WalkFamily, k: usize, j: usize) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return input(format!("finite difference order {k} outside 1..=3"));
    }
    if j + k > family.td {
        return input(format!("step {j} + order {k} exceeds T_d = {}", family.td));
    }
    let binom = [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [1.0, 2.0, 1.0, 0.0], [1.0, 3.0, 3.0, 1.0]];
    let n = family.dim();
    let mut acc = Matrix::zeros(n);
    for i in 0..=k {
        let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
        acc = &acc + &family.walks[j + i].matrix().scale_re(sign * binom[k][i]);
    }
    Ok(operator_norm(&acc))
}

/// c_k(j) = T_d^k ‖D^k W(j)‖, with the window shifted left near s = 1.
pub fn finite_difference_constants(family: &WalkFamily, k: usize) -> Result<Vec<f64>> {
    let td = family.td;
    (0..=td)
        .into_par_iter()
        .map(|j| finite_difference_norm(family, k, j.min(td - k)).map(|x| x * (td as f64).powi(k as i32)))
        .collect()
}

/// Interval hΔ_H ± (h³/95)(2‖[H1,[H1,H0]]‖ + ‖[H0,[H0,H1]]‖) for the walk gap at s.
pub fn gap_perturbation_bounds(pair: &Pair, sched: &Schedule, s: f64, h: f64) -> Result<(f64, f64)> {
    let alpha = pair.alpha();
    if !(h > 0.0) || h > (1.0 + 1e-12) / alpha {
        return input(format!("h = {h} outside (0, 1/alpha] with alpha = {alpha}"));
    }
    let f = sched.eval(s)?.f;
    let e = hermitian_eig(&pair.hamiltonian(f))?;
    let gap = e.values[1] - e.values[0];
    let w = h.powi(3) / 95.0 * pair.double_commutator_constant();
    Ok((h * gap - w, h * gap + w))
}

/// Predicted interval for the angular gap of W(s) at step size h.
///
/// Exact exponentials give hΔ_H itself; first- and second-order splittings use
/// the h³ interval above; order p ≥ 4 uses hΔ_H ± π h^{p+1} α̃_p with the
/// unspecified constant taken as 1.
pub fn gap_interval(pair: &Pair, sched: &Schedule, kind: IntegratorKind, s: f64, h: f64) -> Result<(f64, f64)> {
    match kind {
        IntegratorKind::Exp => {
            let f = sched.eval(s)?.f;
            let e = hermitian_eig(&pair.hamiltonian(f))?;
            let g = h * (e.values[1] - e.values[0]);
            Ok((g, g))
        }
        IntegratorKind::Spf(p) if p >= 4 => {
            let (lo, hi) = gap_perturbation_bounds(pair, sched, s, h)?;
            let centre = 0.5 * (lo + hi);
            let w = PI * h.powi(p as i32 + 1) * nested_commutator_sum(pair.h0(), pair.h1(), p)?;
            Ok((centre - w, centre + w))
        }
        _ => gap_perturbation_bounds(pair, sched, s, h),
    }
}

/// Angular gap between the two lowest eigenphases of W(s), at ds = 0.
pub fn measured_walk_gap(pair: &Pair, sched: &Schedule, kind: IntegratorKind, s: f64, h: f64) -> Result<f64> {
    lowest_phase_gap(&walk_matrix(pair, sched, kind, h, s, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticBound {
    /// Bracketed sum of the bound with its constant set to 1.
    pub relative_bound: f64,
    /// Whether T_d ≥ sup 4ĉ₁/Δ̌₂ held.
    pub precondition_met: bool,
}

fn neighbours(v: &[f64], j: usize, pick: fn(f64, f64) -> f64) -> f64 {
    let lo = j.saturating_sub(1);
    let hi = (j + 1).min(v.len() - 1);
    v[lo..=hi].iter().copied().reduce(pick).unwrap()
}

/// Discrete adiabatic bound on ‖U(n/T_d) − U_A(n/T_d)‖ at n = T_d, constant C = 1.
pub fn discrete_adiabatic_bound(gaps: &GapProfile, c1: &[f64], c2: &[f64], td: usize) -> Result<AdiabaticBound> {
    let d2 = gaps.multistep.as_ref().map(|m| &m[2]).ok_or_else(|| Error::Input("gap profile lacks multistep gaps".into()))?;
    if d2.len() != td + 1 || c1.len() != td + 1 || c2.len() != td + 1 {
        return input("gap and c_k arrays must have T_d + 1 entries");
    }
    let hat1 = |j| neighbours(c1, j, f64::max);
    let hat2 = |j| neighbours(c2, j, f64::max);
    let chk = |j| neighbours(d2, j, f64::min);
    let tdf = td as f64;
    let mut precondition_met = true;
    for j in 0..=td {
        if tdf < 4.0 * hat1(j) / chk(j) {
            precondition_met = false;
        }
    }
    let mut sum = hat1(0) / chk(0).powi(2) + hat1(td) / chk(td).powi(2);
    for j in 0..td {
        let d = chk(j);
        sum += hat1(j).powi(2) / (tdf * d.powi(3)) + hat2(j) / (tdf * d * d);
    }
    Ok(AdiabaticBound { relative_bound: sum / tdf, precondition_met })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Hermitian;

    fn constant_family(td: usize) -> WalkFamily {
        let w = Unitary::new(Matrix::diag(&[C64::from_polar(1.0, -0.3), C64::from_polar(1.0, 0.3)])).unwrap();
        WalkFamily::from_walks(vec![w; td + 1], 1.0).unwrap()
    }

    #[test]
    fn constant_family_tracks_trivially() {
        let fam = constant_family(20);
        let tr = track_eigenpaths(&fam, &PSelector::GroundPhase).unwrap();
        assert!(tr.values.iter().all(|v| (v[0] + 0.3).abs() < 1e-15 && (v[1] - 0.3).abs() < 1e-15));
        let prof = walk_gap_profile(&tr);
        assert!(prof.fixed.iter().all(|g| (g - 0.6).abs() < 1e-14));
        assert!(prof.multistep.unwrap()[2].iter().all(|g| (g - 0.6).abs() < 1e-14));
        assert_eq!(finite_difference_norm(&fam, 1, 3).unwrap(), 0.0);
        let c1 = finite_difference_constants(&fam, 1).unwrap();
        let c2 = finite_difference_constants(&fam, 2).unwrap();
        let prof = walk_gap_profile(&tr);
        assert_eq!(discrete_adiabatic_bound(&prof, &c1, &c2, 20).unwrap().relative_bound, 0.0);
    }

    #[test]
    fn selector_validation() {
        assert!(PSelector::ExplicitIndices(vec![]).resolve(4).is_err());
        assert!(PSelector::ExplicitIndices(vec![0, 1, 2, 3]).resolve(4).is_err());
        assert_eq!(PSelector::ExplicitIndices(vec![1, 0]).resolve(4).unwrap(), vec![0, 1]);
    }

    #[test]
    fn equal_endpoints_give_constant_profile() {
        let h = Hermitian::new(Matrix::from_real_rows(&[&[1.0, 0.5], &[0.5, -1.0]]).unwrap()).unwrap();
        let pair = Pair::new(h.clone(), h).unwrap();
        let prof = hamiltonian_gap_profile(&pair, &Schedule::Linear, 11, &PSelector::GroundPhase).unwrap();
        assert!(prof.fixed.iter().all(|g| (g - prof.fixed[0]).abs() < 1e-13));
        assert!(prof.multistep.is_none());
    }

    #[test]
    fn crossing_is_followed_through() {
        // H(s) = diag(s, 1 − s) crosses at s = 1/2; paths keep their identity.
        let pair = Pair::new(Hermitian::from_real_diag(&[0.0, 1.0]), Hermitian::from_real_diag(&[1.0, 0.0])).unwrap();
        let tr = track_hamiltonian(&pair, &Schedule::Linear, 21, &PSelector::GroundPhase).unwrap();
        assert!((tr.values[20][0] - 1.0).abs() < 1e-14);
        assert!((tr.values[20][1] - 0.0).abs() < 1e-14);
    }

    #[test]
    fn commuting_pair_bounds_are_degenerate() {
        let pair = Pair::new(Hermitian::from_real_diag(&[0.0, 0.4]), Hermitian::from_real_diag(&[0.2, -0.1])).unwrap();
        let (lo, hi) = gap_perturbation_bounds(&pair, &Schedule::Linear, 0.3, 1.0).unwrap();
        assert_eq!(lo, hi);
        assert!(gap_perturbation_bounds(&pair, &Schedule::Linear, 0.3, 10.0).is_err());
    }
}
