//! Experiment configuration: JSON files and their command-line overrides.

use std::path::PathBuf;

use adiawalk::grover::GroverScheduleKind;
use adiawalk::integrators::IntegratorKind;
use adiawalk::toymodels::{TableKind, TABLE_EPSILONS};
use serde::{Deserialize, Serialize};

/// Experiment names with what each produces.
pub const EXPERIMENTS: [(&str, &str); 7] = [
    ("gap-table", "minimum gaps of H(s) and of the h = 1 first-order walk versus epsilon, for toy1 or toy2"),
    ("spectrum-scan", "tracked spectra of H(s) and of i log W(s) along the path (toy1, toy2, four-level, grover)"),
    ("fidelity-sweep", "final-state overlaps with the eigenstates of H1 for toy2 over total times T and step sizes h"),
    ("volterra", "boundary versus interior decay of the Volterra terms on the four-level glue-schedule model"),
    ("grover-scaling", "smallest step count reaching a target search error over (N, M) grids"),
    ("qaoa-export", "alternating-operator angles derived from a search schedule"),
    ("step-size-report", "recommended step sizes per integrator with predicted and measured walk gaps"),
];

/// Top-level JSON config.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub parameters: serde_json::Value,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, rename = "outputPath", alias = "output_path")]
    pub output_path: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GapTableParams {
    pub model: TableKind,
    pub epsilons: Vec<f64>,
    pub grid: usize,
}

impl Default for GapTableParams {
    fn default() -> Self {
        GapTableParams { model: TableKind::Toy1, epsilons: TABLE_EPSILONS.to_vec(), grid: adiawalk::toymodels::TABLE_GRID }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumModel {
    Toy1,
    Toy2,
    FourLevel,
    Grover,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumParams {
    pub model: SpectrumModel,
    pub epsilon: f64,
    pub grid: usize,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "M")]
    pub m: u64,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams { model: SpectrumModel::Toy1, epsilon: 0.05, grid: 1001, n: 16, m: 1 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelityParams {
    pub epsilon: f64,
    #[serde(rename = "T")]
    pub t_list: Vec<f64>,
    pub h: Vec<f64>,
}

impl Default for FidelityParams {
    fn default() -> Self {
        FidelityParams { epsilon: 0.0, t_list: vec![1e3, 1e4, 1e5], h: (0..6).map(|k| 0.5f64.powi(k)).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolterraSchedule {
    Glue,
    Linear,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct VolterraParams {
    #[serde(rename = "Td")]
    pub td: Vec<usize>,
    pub schedule: VolterraSchedule,
}

impl Default for VolterraParams {
    fn default() -> Self {
        VolterraParams { td: vec![100, 200, 400, 800, 1600], schedule: VolterraSchedule::Glue }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroverScalingParams {
    #[serde(rename = "N")]
    pub n: Vec<u64>,
    #[serde(rename = "M")]
    pub m: Vec<u64>,
    pub schedule: GroverScheduleKind,
    pub target_error: f64,
}

impl Default for GroverScalingParams {
    fn default() -> Self {
        GroverScalingParams {
            n: vec![1 << 8, 1 << 12, 1 << 16, 1 << 20],
            m: vec![1],
            schedule: GroverScheduleKind::Power { p: 1.0 },
            target_error: 0.1,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct QaoaParams {
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "T")]
    pub t: u64,
    pub schedule: GroverScheduleKind,
}

impl Default for QaoaParams {
    fn default() -> Self {
        QaoaParams { n: 1 << 10, m: 1, t: 256, schedule: GroverScheduleKind::Power { p: 1.0 } }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PairSource {
    Grover {
        #[serde(rename = "N")]
        n: u64,
        #[serde(rename = "M")]
        m: u64,
    },
    Random {
        count: usize,
        dim: usize,
    },
    FourLevel,
    /// Diagonal H0 and H1 given explicitly.
    Diagonal {
        h0: Vec<f64>,
        h1: Vec<f64>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepSizeParams {
    pub source: PairSource,
    pub kinds: Vec<IntegratorKind>,
    /// Points s at which gap intervals are evaluated.
    pub s: Vec<f64>,
    /// Grid used to locate the minimum Hamiltonian gap.
    pub grid: usize,
}

impl Default for StepSizeParams {
    fn default() -> Self {
        StepSizeParams {
            source: PairSource::Grover { n: 16, m: 1 },
            kinds: ["exp", "pf1", "pf2", "spf2", "spf4"].iter().map(|k| k.parse().expect("valid tag")).collect(),
            s: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            grid: 1001,
        }
    }
}
