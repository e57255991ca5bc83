//! Scheduling functions f: [0, 1] → [0, 1] with first and second derivatives.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::quad::{adaptive, gauss10};

/// Value and derivatives of a schedule at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleSample {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
}

#[derive(Clone, Debug)]
pub enum Schedule {
    Linear,
    /// g(s) = c_e⁻¹ ∫₀^s exp(−1/(t(1−t))) dt
    Glue,
    /// Two glue functions joined at s = 1/2, flat at 0, 1/2 and 1.
    Composite,
    /// Gap-adapted Grover schedule f′ = d_{N,p} Δ_H(f)^p.
    GroverPower(Arc<GroverPower>),
    /// Monotone (s, f) table, linearly interpolated.
    Tabulated(Arc<Vec<(f64, f64)>>),
}

impl Schedule {
    pub fn eval(&self, s: f64) -> Result<ScheduleSample> {
        if !(0.0..=1.0).contains(&s) {
            return input(format!("schedule evaluated at s = {s} outside [0, 1]"));
        }
        Ok(self.eval_unchecked(s))
    }

    pub fn f(&self, s: f64) -> f64 {
        match self {
            Schedule::Linear => s,
            Schedule::Glue => glue().value(s),
            Schedule::Composite => composite_value(s),
            Schedule::GroverPower(g) => g.value(s),
            Schedule::Tabulated(t) => tabulated_value(t, s),
        }
    }

    pub(crate) fn eval_unchecked(&self, s: f64) -> ScheduleSample {
        let s = s.clamp(0.0, 1.0);
        match self {
            Schedule::Linear => ScheduleSample { f: s, df: 1.0, d2f: 0.0 },
            Schedule::Glue => {
                let g = glue();
                ScheduleSample { f: g.value(s), df: g.d1(s), d2f: g.d2(s) }
            }
            Schedule::Composite => {
                let g = glue();
                let t = if s <= 0.5 { 2.0 * s } else { 2.0 * s - 1.0 };
                ScheduleSample { f: composite_value(s), df: g.d1(t), d2f: 2.0 * g.d2(t) }
            }
            Schedule::GroverPower(g) => g.sample(s),
            Schedule::Tabulated(t) => {
                let d = 1e-5;
                let (a, b) = ((s - d).max(0.0), (s + d).min(1.0));
                let (fa, fm, fb) = (tabulated_value(t, a), tabulated_value(t, s), tabulated_value(t, b));
                let df = (fb - fa) / (b - a);
                let d2f = if a < s && s < b { (fb - 2.0 * fm + fa) / (d * d) } else { 0.0 };
                ScheduleSample { f: fm, df, d2f }
            }
        }
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return input("tabulation needs at least two points");
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 || w[1].1 < w[0].1 {
                return input("tabulation must be strictly increasing in s and nondecreasing in f");
            }
        }
        let (first, last) = (points[0], points[points.len() - 1]);
        if first.0 != 0.0 || last.0 != 1.0 || first.1.abs() > 1e-10 || (last.1 - 1.0).abs() > 1e-10 {
            return input("tabulation must run from (0, 0) to (1, 1)");
        }
        Ok(Schedule::Tabulated(Arc::new(points)))
    }

    pub fn grover(n: u64, p: f64) -> Result<Self> {
        Ok(Schedule::GroverPower(Arc::new(build_grover_schedule(n, p)?)))
    }

    pub fn to_spec(&self) -> ScheduleSpec {
        let (kind, parameters, tabulation) = match self {
            Schedule::Linear => ("linear", None, None),
            Schedule::Glue => ("glue", None, None),
            Schedule::Composite => ("composite", None, None),
            Schedule::GroverPower(g) => ("grover-power", Some(ScheduleParams { n: g.n, p: g.p }), None),
            Schedule::Tabulated(t) => ("tabulated", None, Some(t.as_ref().clone())),
        };
        ScheduleSpec { kind: kind.to_string(), parameters, tabulation }
    }

    pub fn from_spec(spec: &ScheduleSpec) -> Result<Self> {
        match spec.kind.as_str() {
            "linear" => Ok(Schedule::Linear),
            "glue" => Ok(Schedule::Glue),
            "composite" => Ok(Schedule::Composite),
            "grover-power" => {
                let p = spec.parameters.ok_or_else(|| Error::Input("grover-power needs parameters {n, p}".into()))?;
                Schedule::grover(p.n, p.p)
            }
            "tabulated" => Schedule::tabulated(
                spec.tabulation.clone().ok_or_else(|| Error::Input("tabulated schedule needs a tabulation".into()))?,
            ),
            other => input(format!("unknown schedule kind '{other}'")),
        }
    }
}

/// JSON form of a schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<ScheduleParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tabulation: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleParams {
    pub n: u64,
    pub p: f64,
}

fn tabulated_value(t: &[(f64, f64)], s: f64) -> f64 {
    let k = t.partition_point(|&(x, _)| x <= s);
    if k == 0 {
        return t[0].1;
    }
    if k == t.len() {
        return t[t.len() - 1].1;
    }
    let ((s0, f0), (s1, f1)) = (t[k - 1], t[k]);
    f0 + (f1 - f0) * (s - s0) / (s1 - s0)
}

fn bump(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        (-1.0 / (t * (1.0 - t))).exp()
    }
}

const GLUE_CELLS: usize = 4096;

struct Glue {
    ce: f64,
    /// ∫₀^{x_k} bump, x_k = k / GLUE_CELLS, for k ≤ GLUE_CELLS/2.
    cum: Vec<f64>,
}

impl Glue {
    fn build() -> Self {
        let half = GLUE_CELLS / 2;
        let mut cum = vec![0.0; half + 1];
        for k in 0..half {
            let (a, b) = (k as f64 / GLUE_CELLS as f64, (k + 1) as f64 / GLUE_CELLS as f64);
            cum[k + 1] = cum[k] + adaptive(&bump, a, b, 1e-14, 1e-21);
        }
        Glue { ce: 2.0 * cum[half], cum }
    }

    fn value(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        if s > 0.5 {
            return 1.0 - self.value(1.0 - s);
        }
        let k = ((s * GLUE_CELLS as f64).floor() as usize).min(GLUE_CELLS / 2);
        let x = k as f64 / GLUE_CELLS as f64;
        (self.cum[k] + gauss10(&bump, x, s)) / self.ce
    }

    fn d1(&self, s: f64) -> f64 {
        bump(s) / self.ce
    }

    fn d2(&self, s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let q = s * (1.0 - s);
        bump(s) * (1.0 - 2.0 * s) / (q * q) / self.ce
    }
}

fn glue() -> &'static Glue {
    static GLUE: OnceLock<Glue> = OnceLock::new();
    GLUE.get_or_init(Glue::build)
}

fn composite_value(s: f64) -> f64 {
    let g = glue();
    if s <= 0.5 {
        0.5 * g.value(2.0 * s)
    } else {
        0.5 + 0.5 * g.value(2.0 * s - 1.0)
    }
}

/// c_e = ∫₀¹ exp(−1/(s(1−s))) ds, cached.
pub fn glue_constant_ce() -> f64 {
    glue().ce
}

/// Δ_H(f; N, 1) = √((1−2f)² + 4f(1−f)/N)
pub fn grover_gap_m1(f: f64, n: f64) -> f64 {
    let a = 1.0 - 2.0 * f;
    (a * a + 4.0 * f * (1.0 - f) / n).sqrt()
}

fn check_power(n: u64, p: f64) -> Result<()> {
    if n < 2 {
        return input(format!("N = {n} must be at least 2"));
    }
    if !(1.0..2.0).contains(&p) {
        return input(format!("power p = {p} outside [1, 2)"));
    }
    Ok(())
}

/// d_{N,p} = ∫₀¹ Δ_H(f; N, 1)^{−p} df
pub fn grover_d_constant(n: u64, p: f64) -> Result<f64> {
    check_power(n, p)?;
    let nf = n as f64;
    if p == 1.0 {
        return Ok((nf / (nf - 1.0)).sqrt() * (nf.sqrt() + (nf - 1.0).sqrt()).ln());
    }
    let g = |f: f64| grover_gap_m1(f, nf).powf(-p);
    let w = 1.0 / nf.sqrt();
    let mut cuts = vec![0.0, 1.0];
    for k in [1.0, 4.0, 16.0, 64.0] {
        let c = k * w;
        if c < 0.5 {
            cuts.push(0.5 - c);
            cuts.push(0.5 + c);
        }
    }
    cuts.push(0.5);
    cuts.sort_by(f64::total_cmp);
    Ok(cuts.windows(2).map(|c| adaptive(&g, c[0], c[1], 1e-13, 1e-300)).sum())
}

/// Tabulated inverse of s(f) = d⁻¹ ∫₀^f Δ_H^{−p} for the Grover power schedule.
#[derive(Clone, Debug)]
pub struct GroverPower {
    pub n: u64,
    pub p: f64,
    /// Normalization, equal to the total integral over the grid.
    pub d: f64,
    fgrid: Vec<f64>,
    /// Cumulative integral at each f-grid node (unnormalized).
    cum: Vec<f64>,
}

/// Grid of 4096 cells in f, four times denser where |f − 1/2| < 2/√N.
fn power_grid(n: f64) -> Vec<f64> {
    let base = 4096usize;
    let width = 2.0 / n.sqrt();
    let mut half: Vec<f64> = Vec::new();
    for k in 0..=base / 2 {
        let a = k as f64 / base as f64;
        half.push(a);
        if k < base / 2 {
            let b = (k + 1) as f64 / base as f64;
            if b > 0.5 - width {
                for j in 1..4 {
                    half.push(a + (b - a) * j as f64 / 4.0);
                }
            }
        }
    }
    let mut grid = half.clone();
    for &x in half.iter().rev().skip(1) {
        grid.push(1.0 - x);
    }
    grid
}

pub fn build_grover_schedule(n: u64, p: f64) -> Result<GroverPower> {
    check_power(n, p)?;
    let nf = n as f64;
    let fgrid = power_grid(nf);
    let g = |f: f64| grover_gap_m1(f, nf).powf(-p);
    let mut cum = vec![0.0; fgrid.len()];
    let mid = fgrid.len() / 2;
    for k in 0..mid {
        cum[k + 1] = cum[k] + adaptive(&g, fgrid[k], fgrid[k + 1], 1e-14, 1e-300);
    }
    let d = 2.0 * cum[mid];
    for k in mid + 1..fgrid.len() {
        cum[k] = d - cum[fgrid.len() - 1 - k];
    }
    Ok(GroverPower { n, p, d, fgrid, cum })
}

impl GroverPower {
    fn integrand(&self, f: f64) -> f64 {
        grover_gap_m1(f, self.n as f64).powf(-self.p)
    }

    fn value(&self, s: f64) -> f64 {
        if self.p == 1.0 {
            self.value_p1(s)
        } else {
            self.value_tabulated(s)
        }
    }

    /// Exact inverse for p = 1: 1 − 2f = sinh((1 − 2s)A)/sinh(A), A = asinh(√(N−1)).
    fn value_p1(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        if s > 0.5 {
            return 1.0 - self.value_p1(1.0 - s);
        }
        let a = ((self.n - 1) as f64).sqrt().asinh();
        0.5 * (1.0 - ((1.0 - 2.0 * s) * a).sinh() / a.sinh())
    }

    pub(crate) fn value_tabulated(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        if s > 0.5 {
            return 1.0 - self.value_tabulated(1.0 - s);
        }
        let target = s * self.d;
        let k = self.cum.partition_point(|&c| c <= target).clamp(1, self.cum.len() - 1) - 1;
        let (mut lo, mut hi) = (self.fgrid[k], self.fgrid[k + 1]);
        let base = self.cum[k];
        let g = |f: f64| self.integrand(f);
        let mut f = lo + (hi - lo) * ((target - base) / (self.cum[k + 1] - base)).clamp(0.0, 1.0);
        for _ in 0..100 {
            let r = base + gauss10(&g, self.fgrid[k], f) - target;
            if r > 0.0 {
                hi = f;
            } else {
                lo = f;
            }
            let step = r / self.integrand(f);
            let mut next = f - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - f).abs() <= 1e-16 || hi - lo <= 1e-16 {
                f = next;
                break;
            }
            f = next;
        }
        f
    }

    fn sample(&self, s: f64) -> ScheduleSample {
        let f = self.value(s);
        let nf = self.n as f64;
        let gap = grover_gap_m1(f, nf);
        let dgap = -2.0 * (1.0 - 2.0 * f) * (1.0 - 1.0 / nf) / gap;
        ScheduleSample {
            f,
            df: self.d * gap.powf(self.p),
            d2f: self.p * self.d * self.d * gap.powf(2.0 * self.p - 1.0) * dgap,
        }
    }
}
