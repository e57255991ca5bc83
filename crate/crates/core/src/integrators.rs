//! Walk operators from an interpolating pair (H0, H1) and a schedule, and the
//! Hamiltonian constants that feed the step-size rules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::linalg::{commutator, hermitian_eig, operator_norm, Hermitian, HermitianEigen, Matrix, Unitary, C64};
use crate::schedules::Schedule;

/// The two endpoint Hamiltonians with cached eigendecompositions.
#[derive(Clone, Debug)]
pub struct Pair {
    h0: Hermitian,
    h1: Hermitian,
    eig0: HermitianEigen,
    eig1: HermitianEigen,
}

impl Pair {
    pub fn new(h0: Hermitian, h1: Hermitian) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return input(format!("H0 is {0}x{0} but H1 is {1}x{1}", h0.dim(), h1.dim()));
        }
        let eig0 = hermitian_eig(&h0)?;
        let eig1 = hermitian_eig(&h1)?;
        Ok(Pair { h0, h1, eig0, eig1 })
    }

    pub fn h0(&self) -> &Hermitian {
        &self.h0
    }

    pub fn h1(&self) -> &Hermitian {
        &self.h1
    }

    pub fn eig0(&self) -> &HermitianEigen {
        &self.eig0
    }

    pub fn eig1(&self) -> &HermitianEigen {
        &self.eig1
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    /// H = (1−f)H0 + fH1
    pub fn hamiltonian(&self, f: f64) -> Hermitian {
        Hermitian::interpolate(&self.h0, &self.h1, f)
    }

    /// e^{−itH0}
    pub fn exp0(&self, t: f64) -> Matrix {
        self.eig0.apply_fn(|x| C64::from_polar(1.0, -t * x))
    }

    /// e^{−itH1}
    pub fn exp1(&self, t: f64) -> Matrix {
        self.eig1.apply_fn(|x| C64::from_polar(1.0, -t * x))
    }

    /// α = ‖H0‖ + ‖H1‖
    pub fn alpha(&self) -> f64 {
        norm_from_eig(&self.eig0) + norm_from_eig(&self.eig1)
    }

    /// 2‖[H1,[H1,H0]]‖ + ‖[H0,[H0,H1]]‖, the constant of the second-order error bound.
    pub fn double_commutator_constant(&self) -> f64 {
        let (a, b) = (self.h0.matrix(), self.h1.matrix());
        let c = commutator(b, a);
        2.0 * operator_norm(&commutator(b, &c)) + operator_norm(&commutator(a, &commutator(a, b)))
    }
}

fn norm_from_eig(e: &HermitianEigen) -> f64 {
    e.values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Time discretization used to build W(s).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntegratorKind {
    Exp,
    Pf1,
    /// Strang splitting. The schedule is read at the midpoint of the step
    /// unless `simplified`, in which case it is read at the left endpoint.
    Pf2 { simplified: bool },
    /// Simplified Suzuki formula of the given order (1, 2, 4, 6 or 8).
    Spf(u32),
}

impl IntegratorKind {
    pub const ALL_TAGS: [&'static str; 9] = ["exp", "pf1", "pf2", "pf2-simplified", "spf1", "spf2", "spf4", "spf6", "spf8"];

    /// Order of the local splitting error in h (exact integrator counts as 1).
    pub fn order(&self) -> u32 {
        match self {
            IntegratorKind::Exp | IntegratorKind::Pf1 => 1,
            IntegratorKind::Pf2 { .. } => 2,
            IntegratorKind::Spf(p) => *p,
        }
    }
}

impl fmt::Display for IntegratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegratorKind::Exp => write!(f, "exp"),
            IntegratorKind::Pf1 => write!(f, "pf1"),
            IntegratorKind::Pf2 { simplified: false } => write!(f, "pf2"),
            IntegratorKind::Pf2 { simplified: true } => write!(f, "pf2-simplified"),
            IntegratorKind::Spf(p) => write!(f, "spf{p}"),
        }
    }
}

impl FromStr for IntegratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(IntegratorKind::Exp),
            "pf1" => Ok(IntegratorKind::Pf1),
            "pf2" => Ok(IntegratorKind::Pf2 { simplified: false }),
            "pf2-simplified" => Ok(IntegratorKind::Pf2 { simplified: true }),
            _ => match s.strip_prefix("spf").and_then(|p| p.parse::<u32>().ok()) {
                Some(p) if matches!(p, 1 | 2 | 4 | 6 | 8) => Ok(IntegratorKind::Spf(p)),
                _ => input(format!("unknown integrator '{s}', expected one of {}", Self::ALL_TAGS.join(", "))),
            },
        }
    }
}

impl Serialize for IntegratorKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IntegratorKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Stage weights (α_k, β_k): stage k applies e^{−ihα_k(1−f)H0} first, then e^{−ihβ_k f H1}.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingCoefficients {
    pub stages: Vec<(f64, f64)>,
}

impl SplittingCoefficients {
    pub fn sums(&self) -> (f64, f64) {
        self.stages.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Op {
    A,
    B,
}

fn strang(scale: f64, out: &mut Vec<(Op, f64)>) {
    out.push((Op::A, 0.5 * scale));
    out.push((Op::B, scale));
    out.push((Op::A, 0.5 * scale));
}

fn fractal(order: u32, scale: f64, out: &mut Vec<(Op, f64)>) {
    if order == 2 {
        strang(scale, out);
        return;
    }
    let k = order / 2;
    let u = suzuki_u(k);
    for c in [u, u, 1.0 - 4.0 * u, u, u] {
        fractal(order - 2, c * scale, out);
    }
}

/// u_k = 1/(4 − 4^{1/(2k−1)})
pub fn suzuki_u(k: u32) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * k as f64 - 1.0)))
}

/// Stages of the Suzuki fractal of the given order, merged and packed.
pub fn suzuki_coefficients(order: u32) -> Result<SplittingCoefficients> {
    let seq = match order {
        1 => vec![(Op::A, 1.0), (Op::B, 1.0)],
        2 | 4 | 6 | 8 => {
            let mut v = Vec::new();
            fractal(order, 1.0, &mut v);
            v
        }
        _ => return input(format!("unsupported splitting order {order}; expected 1, 2, 4, 6 or 8")),
    };
    let mut merged: Vec<(Op, f64)> = Vec::new();
    for (op, c) in seq {
        match merged.last_mut() {
            Some(last) if last.0 == op => last.1 += c,
            _ => merged.push((op, c)),
        }
    }
    let mut stages = Vec::new();
    let mut it = merged.into_iter().peekable();
    while let Some((op, c)) = it.next() {
        match op {
            Op::A => {
                let b = match it.peek() {
                    Some(&(Op::B, b)) => {
                        it.next();
                        b
                    }
                    _ => 0.0,
                };
                stages.push((c, b));
            }
            Op::B => stages.push((0.0, c)),
        }
    }
    Ok(SplittingCoefficients { stages })
}

/// Σ over γ ∈ {0,1}^{p+1} of ‖[H_{γ_p}, ⋯, [H_{γ_1}, H_{γ_0}]]‖.
pub fn nested_commutator_sum(h0: &Hermitian, h1: &Hermitian, p: u32) -> Result<f64> {
    if p == 0 || p > 8 {
        return input(format!("nested commutator order {p} outside 1..=8"));
    }
    let hs = [h0.matrix(), h1.matrix()];
    let mut level: Vec<Matrix> = vec![hs[0].clone(), hs[1].clone()];
    for _ in 0..p {
        let mut next = Vec::with_capacity(level.len() * 2);
        for m in &level {
            for h in hs {
                next.push(commutator(h, m));
            }
        }
        level = next;
    }
    Ok(level.iter().map(operator_norm).sum())
}

/// Inputs to the step-size rules.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// ‖H0‖ + ‖H1‖
    pub alpha: f64,
    /// Minimum Hamiltonian gap along the path.
    pub delta_star: f64,
    /// 2‖[H1,[H1,H0]]‖ + ‖[H0,[H0,H1]]‖
    pub double_commutator: f64,
    /// α̃_p for p = 1..=8, index p − 1.
    pub alpha_tilde: Vec<f64>,
}

impl ProblemConstants {
    pub fn compute(pair: &Pair, delta_star: f64) -> Result<Self> {
        let alpha_tilde = (1..=8).map(|p| nested_commutator_sum(pair.h0(), pair.h1(), p)).collect::<Result<Vec<_>>>()?;
        Ok(ProblemConstants {
            alpha: pair.alpha(),
            delta_star,
            double_commutator: pair.double_commutator_constant(),
            alpha_tilde,
        })
    }
}

/// Largest step size allowed by the step-size rule for `kind`, all
/// unspecified constants taken as 1.
pub fn recommended_step_size(c: &ProblemConstants, kind: IntegratorKind) -> Result<f64> {
    if !(c.alpha > 0.0) {
        return input(format!("alpha = {} must be positive", c.alpha));
    }
    if !(c.delta_star > 0.0) {
        return Err(Error::Gapless(c.delta_star));
    }
    let base = 1.0 / c.alpha;
    let h = match kind {
        IntegratorKind::Exp => base,
        IntegratorKind::Pf1 | IntegratorKind::Pf2 { .. } | IntegratorKind::Spf(1) | IntegratorKind::Spf(2) => {
            if c.double_commutator > 0.0 {
                base.min((95.0 / 2.0f64).sqrt() * (c.delta_star / c.double_commutator).sqrt())
            } else {
                base
            }
        }
        IntegratorKind::Spf(p) => {
            let at = c.alpha_tilde.get(p as usize - 1).copied().unwrap_or(0.0);
            if at > 0.0 {
                base.min((c.delta_star / at).powf(1.0 / p as f64))
            } else {
                base
            }
        }
    };
    Ok(h)
}

fn check_step(h: f64, s: f64, dim_ok: bool) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return input(format!("step size h = {h} must be positive"));
    }
    if !(0.0..=1.0).contains(&s) {
        return input(format!("s = {s} outside [0, 1]"));
    }
    if !dim_ok {
        return input("dimension mismatch");
    }
    Ok(())
}

/// W(s) for a walk on a grid of spacing `ds` (only PF2's midpoint rule reads `ds`).
pub fn walk_operator(pair: &Pair, sched: &Schedule, kind: IntegratorKind, h: f64, s: f64, ds: f64) -> Result<Unitary> {
    check_step(h, s, true)?;
    Ok(Unitary::trusted(walk_matrix(pair, sched, kind, h, s, ds)))
}

pub(crate) fn walk_matrix(pair: &Pair, sched: &Schedule, kind: IntegratorKind, h: f64, s: f64, ds: f64) -> Matrix {
    let f = sched.eval_unchecked(s).f;
    match kind {
        IntegratorKind::Exp => {
            let e = hermitian_eig(&pair.hamiltonian(f)).expect("Jacobi on a valid Hermitian interpolant");
            e.apply_fn(|x| C64::from_polar(1.0, -h * x))
        }
        IntegratorKind::Pf1 => pair.exp1(h * f).matmul(&pair.exp0(h * (1.0 - f))),
        IntegratorKind::Pf2 { simplified } => {
            let fm = if simplified { f } else { sched.eval_unchecked((s + 0.5 * ds).min(1.0)).f };
            let half = pair.exp0(0.5 * h * (1.0 - fm));
            half.matmul(&pair.exp1(h * fm)).matmul(&half)
        }
        IntegratorKind::Spf(p) => {
            let coeffs = suzuki_coefficients(p).expect("order validated at parse time");
            let mut w = Matrix::identity(pair.dim());
            for &(a, b) in &coeffs.stages {
                if a != 0.0 {
                    w = pair.exp0(h * a * (1.0 - f)).matmul(&w);
                }
                if b != 0.0 {
                    w = pair.exp1(h * b * f).matmul(&w);
                }
            }
            w
        }
    }
}

fn eig_apply(e: &HermitianEigen, t: f64, v: &mut [C64]) {
    if t == 0.0 {
        return;
    }
    let c = e.vectors.adjoint_mul_vec(v);
    let d: Vec<C64> = c.iter().zip(&e.values).map(|(z, &x)| z * C64::from_polar(1.0, -t * x)).collect();
    v.copy_from_slice(&e.vectors.mul_vec(&d));
}

/// v ← W(s) v without forming W(s) for the split integrators.
pub fn apply_walk(pair: &Pair, sched: &Schedule, kind: IntegratorKind, h: f64, s: f64, ds: f64, v: &mut [C64]) {
    let f = sched.eval_unchecked(s).f;
    match kind {
        IntegratorKind::Exp => {
            let w = walk_matrix(pair, sched, kind, h, s, ds);
            v.copy_from_slice(&w.mul_vec(v));
        }
        IntegratorKind::Pf1 => {
            eig_apply(&pair.eig0, h * (1.0 - f), v);
            eig_apply(&pair.eig1, h * f, v);
        }
        IntegratorKind::Pf2 { simplified } => {
            let fm = if simplified { f } else { sched.eval_unchecked((s + 0.5 * ds).min(1.0)).f };
            eig_apply(&pair.eig0, 0.5 * h * (1.0 - fm), v);
            eig_apply(&pair.eig1, h * fm, v);
            eig_apply(&pair.eig0, 0.5 * h * (1.0 - fm), v);
        }
        IntegratorKind::Spf(p) => {
            for &(a, b) in &suzuki_coefficients(p).expect("order validated at parse time").stages {
                eig_apply(&pair.eig0, h * a * (1.0 - f), v);
                eig_apply(&pair.eig1, h * b * f, v);
            }
        }
    }
}

/// Time-ordered propagator over one step [s, s + ds] of duration h.
///
/// Midpoint Strang substeps are symmetric, so their error expands in even
/// powers of the substep; the substep count is doubled and Romberg-extrapolated
/// until successive diagonal entries agree to `tol`.
pub fn exact_step(pair: &Pair, sched: &Schedule, h: f64, s: f64, ds: f64, tol: f64) -> Result<Unitary> {
    check_step(h, s, true)?;
    let kind = IntegratorKind::Pf2 { simplified: false };
    let run = |m: usize| -> Matrix {
        let (hs, dss) = (h / m as f64, ds / m as f64);
        let mut u = Matrix::identity(pair.dim());
        for i in 0..m {
            let si = (s + i as f64 * dss).min(1.0);
            u = walk_matrix(pair, sched, kind, hs, si, dss).matmul(&u);
        }
        u
    };
    let mut rows: Vec<Vec<Matrix>> = vec![vec![run(1)]];
    let mut diff = f64::INFINITY;
    for k in 1..=16 {
        let mut row = vec![run(1 << k)];
        for j in 1..=k {
            let prev = &rows[k - 1][j - 1];
            let cur = &row[j - 1];
            let factor = 1.0 / (4f64.powi(j as i32) - 1.0);
            row.push(cur + &(cur - prev).scale_re(factor));
        }
        diff = operator_norm(&(&row[k] - &rows[k - 1][k - 1]));
        let done = diff < tol;
        rows.push(row);
        if done {
            let best = rows.pop().unwrap().pop().unwrap();
            return Ok(Unitary::trusted(best));
        }
    }
    Err(Error::NoConvergence(diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::expm_i_hermitian;

    fn grover_pair(n: f64) -> Pair {
        let m = 1.0;
        let off = -(m * (n - m)).sqrt() / n;
        let h0 = Hermitian::new(Matrix::from_real_rows(&[&[1.0 - m / n, off], &[off, m / n]]).unwrap()).unwrap();
        let h1 = Hermitian::from_real_diag(&[0.0, 1.0]);
        Pair::new(h0, h1).unwrap()
    }

    #[test]
    fn tags_round_trip() {
        for t in IntegratorKind::ALL_TAGS {
            let k: IntegratorKind = t.parse().unwrap();
            assert_eq!(k.to_string(), t);
        }
        assert!("spf3".parse::<IntegratorKind>().is_err());
        assert!("rk4".parse::<IntegratorKind>().is_err());
    }

    #[test]
    fn strang_is_single_stage_pair() {
        let c = suzuki_coefficients(2).unwrap();
        assert_eq!(c.stages, vec![(0.5, 1.0), (0.5, 0.0)]);
    }

    #[test]
    fn coefficient_sums() {
        for p in [1, 2, 4, 6, 8] {
            let (a, b) = suzuki_coefficients(p).unwrap().sums();
            assert!((a - 1.0).abs() < 1e-13 && (b - 1.0).abs() < 1e-13, "order {p}: {a} {b}");
        }
        let u2 = suzuki_u(2);
        assert!((u2 - 1.0 / (4.0 - 4f64.cbrt())).abs() < 1e-16);
        assert!(suzuki_coefficients(3).is_err());
    }

    #[test]
    fn commuting_pair_is_exact() {
        let pair = Pair::new(Hermitian::from_real_diag(&[0.1, 0.7, -0.3]), Hermitian::from_real_diag(&[0.5, -0.2, 0.9])).unwrap();
        for s in [0.0, 0.3, 1.0] {
            let e = walk_operator(&pair, &Schedule::Linear, IntegratorKind::Exp, 0.7, s, 0.01).unwrap();
            for k in [IntegratorKind::Pf1, IntegratorKind::Pf2 { simplified: true }, IntegratorKind::Spf(4)] {
                let w = walk_operator(&pair, &Schedule::Linear, k, 0.7, s, 0.01).unwrap();
                assert!(w.matrix().max_diff(e.matrix()) < 1e-12);
            }
        }
        assert_eq!(nested_commutator_sum(pair.h0(), pair.h1(), 3).unwrap(), 0.0);
    }

    #[test]
    fn start_of_path_is_h0_exponential() {
        let pair = grover_pair(16.0);
        let e0 = expm_i_hermitian(pair.h0(), 0.4).unwrap();
        for k in ["exp", "pf1", "pf2-simplified", "spf2", "spf6"] {
            let w = walk_operator(&pair, &Schedule::Linear, k.parse().unwrap(), 0.4, 0.0, 0.0).unwrap();
            assert!(w.matrix().max_diff(e0.matrix()) < 1e-12, "{k}");
        }
    }

    #[test]
    fn grover_commutator_sum_p1() {
        let pair = grover_pair(4.0);
        let got = nested_commutator_sum(pair.h0(), pair.h1(), 1).unwrap();
        assert!((got - 2.0 * 3f64.sqrt() / 4.0).abs() < 1e-12);
    }

    #[test]
    fn exp_step_size_rule() {
        let c = ProblemConstants { alpha: 2.0, delta_star: 0.1, double_commutator: 0.0, alpha_tilde: vec![0.0; 8] };
        assert_eq!(recommended_step_size(&c, IntegratorKind::Exp).unwrap(), 0.5);
        assert_eq!(recommended_step_size(&c, IntegratorKind::Pf2 { simplified: false }).unwrap(), 0.5);
        let gapless = ProblemConstants { delta_star: 0.0, ..c };
        assert!(matches!(recommended_step_size(&gapless, IntegratorKind::Pf1), Err(Error::Gapless(_))));
    }

    #[test]
    fn vector_application_matches_matrix() {
        let pair = grover_pair(64.0);
        let v0 = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        for k in ["exp", "pf1", "pf2", "spf4"] {
            let kind: IntegratorKind = k.parse().unwrap();
            let mut v = v0.clone();
            apply_walk(&pair, &Schedule::Glue, kind, 0.9, 0.37, 0.01, &mut v);
            let w = walk_matrix(&pair, &Schedule::Glue, kind, 0.9, 0.37, 0.01).mul_vec(&v0);
            assert!(v.iter().zip(&w).all(|(a, b)| (a - b).norm() < 1e-14), "{k}");
        }
    }

    #[test]
    fn invalid_step_rejected() {
        let pair = grover_pair(4.0);
        assert!(walk_operator(&pair, &Schedule::Linear, IntegratorKind::Pf1, 0.0, 0.5, 0.0).is_err());
        assert!(walk_operator(&pair, &Schedule::Linear, IntegratorKind::Pf1, -1.0, 0.5, 0.0).is_err());
    }
}
