//! One function per experiment: resolved parameters in, table (and summary) out.

use adiawalk::evolution::boundary_vs_interior_scaling;
use adiawalk::grover::{effective_hamiltonians, qaoa_angles, replay_angles, scaling_experiment, GroverInstance};
use adiawalk::integrators::{recommended_step_size, IntegratorKind, Pair, ProblemConstants};
use adiawalk::linalg::Hermitian;
use adiawalk::schedules::Schedule;
use adiawalk::spectral::{
    gap_interval, grid_point, hamiltonian_gap_profile, measured_walk_gap, track_eigenpaths, track_hamiltonian, PSelector,
    WalkFamily,
};
use adiawalk::toymodels::{build_toy, fidelity_sweep, min_gaps, TableKind, ToyModelSpec, TABLE1_PUBLISHED, TABLE2_PUBLISHED, TABLE_EPSILONS};
use adiawalk::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::*;
use crate::output::{num, opt, Table};

pub struct Outcome {
    pub table: Table,
    pub summary: Option<serde_json::Value>,
}

fn table_only(table: Table) -> Result<Outcome> {
    Ok(Outcome { table, summary: None })
}

pub fn gap_table(p: &GapTableParams) -> Result<Outcome> {
    if p.grid < 2 {
        return Err(Error::Input("grid must have at least two points".into()));
    }
    let mut t = Table::new(["epsilon", "gap_h", "gap_w", "published_gap_h", "published_gap_w", "flagged"]);
    let mut eps = p.epsilons.clone();
    eps.sort_by(|a, b| b.total_cmp(a));
    for e in eps {
        let spec = match p.model {
            TableKind::Toy1 => ToyModelSpec::Toy1 { epsilon: e },
            TableKind::Toy2 => ToyModelSpec::Toy2 { epsilon: e },
        };
        let (gh, gw) = min_gaps(&build_toy(spec)?, p.grid)?;
        let published = TABLE_EPSILONS.iter().position(|&x| x == e).map(|i| match p.model {
            TableKind::Toy1 => TABLE1_PUBLISHED[i],
            TableKind::Toy2 => TABLE2_PUBLISHED[i],
        });
        let flagged = p.model == TableKind::Toy1 && e == 1e-2;
        t.push(vec![num(e), num(gh), num(gw), opt(published.map(|x| x.0)), opt(published.map(|x| x.1)), flagged.to_string()]);
    }
    table_only(t)
}

fn scan(pair: &Pair, sched: &Schedule, kind: IntegratorKind, h: f64, grid: usize) -> Result<Table> {
    if grid < 2 {
        return Err(Error::Input("grid must have at least two points".into()));
    }
    let th = track_hamiltonian(pair, sched, grid, &PSelector::GroundPhase)?;
    let fam = WalkFamily::build(pair, sched, kind, h, grid - 1)?;
    let tw = track_eigenpaths(&fam, &PSelector::GroundPhase)?.unwrapped();
    let d = pair.dim();
    let mut cols = vec!["s".to_string()];
    cols.extend((0..d).map(|k| format!("h_{k}")));
    cols.extend((0..d).map(|k| format!("w_{k}")));
    let mut t = Table::new(cols);
    for i in 0..grid {
        let mut row = vec![num(grid_point(i, grid - 1))];
        row.extend(th.values[i].iter().map(|&v| num(v)));
        row.extend(tw[i].iter().map(|&v| num(v)));
        t.push(row);
    }
    Ok(t)
}

pub fn spectrum_scan(p: &SpectrumParams) -> Result<Outcome> {
    let spec = match p.model {
        SpectrumModel::Toy1 => ToyModelSpec::Toy1 { epsilon: p.epsilon },
        SpectrumModel::Toy2 => ToyModelSpec::Toy2 { epsilon: p.epsilon },
        SpectrumModel::FourLevel => ToyModelSpec::FourLevel,
        SpectrumModel::Grover => {
            let inst = GroverInstance::new(p.n, p.m)?;
            let pair = effective_hamiltonians(inst)?;
            return table_only(scan(&pair, &Schedule::grover(p.n, 1.0)?, IntegratorKind::Pf1, 1.0, p.grid)?);
        }
    };
    let m = build_toy(spec)?;
    table_only(scan(&m.pair, &m.schedule, m.kind, m.h, p.grid)?)
}

pub fn fidelity(p: &FidelityParams) -> Result<Outcome> {
    let model = build_toy(ToyModelSpec::Toy2 { epsilon: p.epsilon })?;
    let mut rows = fidelity_sweep(&model, &p.t_list, &p.h)?;
    rows.sort_by(|a, b| a.t.total_cmp(&b.t).then(b.h.total_cmp(&a.h)));
    let d = model.pair.dim();
    let mut cols = vec!["T".to_string(), "h".into(), "Td".into()];
    cols.extend((0..d).map(|k| format!("fidelity_{k}")));
    let mut t = Table::new(cols);
    for r in rows {
        let mut row = vec![num(r.t), num(r.h), r.td.to_string()];
        row.extend(r.fidelities.iter().map(|&v| num(v)));
        t.push(row);
    }
    table_only(t)
}

pub fn volterra(p: &VolterraParams) -> Result<Outcome> {
    let mut model = build_toy(ToyModelSpec::FourLevel)?;
    if p.schedule == VolterraSchedule::Linear {
        model.schedule = Schedule::Linear;
    }
    let report = boundary_vs_interior_scaling(&model.pair, &model.schedule, model.kind, model.h, &PSelector::GroundPhase, &p.td)?;
    let mut t = Table::new(["Td", "interior_omega1", "boundary_omega1", "boundary_omega", "cross_check", "intertwining"]);
    for r in &report.rows {
        t.push(vec![
            r.td.to_string(),
            num(r.interior_omega1),
            num(r.boundary_omega1),
            num(r.boundary_omega),
            num(r.cross_check),
            num(r.intertwining),
        ]);
    }
    let summary = json!({
        "interior_slope": report.interior_slope,
        "boundary_omega1_slope": report.boundary_omega1_slope,
        "boundary_omega_slope": report.boundary_omega_slope,
        "boundary_omega1_half_slopes": report.boundary_omega1_half_slopes,
        "boundary_omega_half_slopes": report.boundary_omega_half_slopes,
    });
    Ok(Outcome { table: t, summary: Some(summary) })
}

pub fn grover_scaling(p: &GroverScalingParams) -> Result<Outcome> {
    let rows = scaling_experiment(&p.m, &p.n, p.schedule, p.target_error)?;
    let mut t = Table::new(["N", "M", "schedule", "target_error", "T_required", "normalized_ratio"]);
    for r in &rows {
        t.push(vec![
            r.n.to_string(),
            r.m.to_string(),
            r.schedule.clone(),
            num(r.target_error),
            r.t_required.map(|v| v.to_string()).unwrap_or_else(|| "unreached".into()),
            opt(r.normalized_ratio),
        ]);
    }
    // Growth of T_required between consecutive N at fixed M.
    let mut growth = Vec::new();
    for m in &p.m {
        let ts: Vec<_> = rows.iter().filter(|r| r.m == *m).collect();
        for w in ts.windows(2) {
            if let (Some(a), Some(b)) = (w[0].t_required, w[1].t_required) {
                growth.push(json!({"M": m, "N_from": w[0].n, "N_to": w[1].n, "ratio": b as f64 / a as f64}));
            }
        }
    }
    let summary = json!({ "schedule": p.schedule.label(), "target_error": p.target_error, "growth": growth });
    Ok(Outcome { table: t, summary: Some(summary) })
}

pub fn qaoa_export(p: &QaoaParams) -> Result<Outcome> {
    let inst = GroverInstance::new(p.n, p.m)?;
    let sched = p.schedule.build(p.n)?;
    let angles = qaoa_angles(&sched, p.t)?;
    let replay = replay_angles(inst, &angles)?;
    let mut t = Table::new(["j", "beta", "gamma"]);
    for (j, (b, g)) in angles.betas.iter().zip(&angles.gammas).enumerate() {
        t.push(vec![j.to_string(), num(*b), num(*g)]);
    }
    let summary = json!({ "error": replay.error, "success_probability": replay.success_probability });
    Ok(Outcome { table: t, summary: Some(summary) })
}

pub fn step_size_report(p: &StepSizeParams, seed: u64) -> Result<Outcome> {
    if p.s.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::Input("evaluation points s must lie in [0, 1]".into()));
    }
    let mut pairs: Vec<(String, Pair, Schedule)> = Vec::new();
    match &p.source {
        PairSource::Grover { n, m } => {
            let pair = effective_hamiltonians(GroverInstance::new(*n, *m)?)?;
            pairs.push((format!("grover-{n}-{m}"), pair, Schedule::Linear));
        }
        PairSource::Random { count, dim } => {
            if *dim < 2 {
                return Err(Error::Input("random pairs need dimension at least 2".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..*count {
                let h0 = Hermitian::random(&mut rng, *dim);
                let h1 = Hermitian::random(&mut rng, *dim);
                pairs.push((format!("random-{i}"), Pair::new(h0, h1)?, Schedule::Linear));
            }
        }
        PairSource::FourLevel => {
            let m = build_toy(ToyModelSpec::FourLevel)?;
            pairs.push(("four-level".into(), m.pair, m.schedule));
        }
        PairSource::Diagonal { h0, h1 } => {
            let pair = Pair::new(Hermitian::from_real_diag(h0), Hermitian::from_real_diag(h1))?;
            pairs.push(("diagonal".into(), pair, Schedule::Linear));
        }
    }
    let mut t = Table::new(["pair", "integrator", "h", "s", "gap_lower", "gap_upper", "gap_measured", "inside"]);
    for (label, pair, sched) in &pairs {
        let delta = hamiltonian_gap_profile(pair, sched, p.grid, &PSelector::GroundPhase)?.min_fixed();
        let c = ProblemConstants::compute(pair, delta)?;
        for &kind in &p.kinds {
            let h = recommended_step_size(&c, kind)?;
            for &s in &p.s {
                let (lo, hi) = gap_interval(pair, sched, kind, s, h)?;
                let g = measured_walk_gap(pair, sched, kind, s, h)?;
                let inside = g >= lo - 1e-12 && g <= hi + 1e-12;
                t.push(vec![label.clone(), kind.to_string(), num(h), num(s), num(lo), num(hi), num(g), inside.to_string()]);
            }
        }
    }
    table_only(t)
}
