//! Multi-seed, multi-mechanism experiments and parameter sweeps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanisms::MechanismEngine;
use crate::metrics::MetricSeries;
use crate::model::{Mechanism, RoundRecord, ScenarioConfig};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Child seed for a labelled run.
///
/// 64-bit FNV-1a over: the master seed as 8 little-endian bytes, then for each
/// label its UTF-8 length as 8 little-endian bytes followed by its bytes. The
/// hash is passed through the SplitMix64 finalizer.
pub fn derive_seed(master: u64, labels: &[&str]) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &master.to_le_bytes());
    for label in labels {
        h = fnv1a(h, &(label.len() as u64).to_le_bytes());
        h = fnv1a(h, label.as_bytes());
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// One parameter varied over a list of values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(parameter: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            parameter: parameter.into(),
            values,
        }
    }

    /// Canonical name of the swept parameter.
    pub fn canonical(&self) -> Result<&'static str> {
        ScenarioConfig::canonical_key(&self.parameter)
            .filter(|k| !matches!(*k, "mechanism" | "mpi_population" | "seed"))
            .ok_or_else(|| Error::config(format!("cannot sweep parameter `{}`", self.parameter)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub base: ScenarioConfig,
    pub mechanisms: Vec<Mechanism>,
    pub sweep: Option<SweepAxis>,
    pub num_runs: usize,
    pub master_seed: u64,
    /// Worker threads; 0 lets the pool pick.
    pub workers: usize,
}

impl ExperimentPlan {
    /// All three mechanisms over the base configuration's runs and seed.
    pub fn compare(base: ScenarioConfig) -> Self {
        Self {
            num_runs: base.num_runs,
            master_seed: base.seed,
            base,
            mechanisms: Mechanism::ALL.to_vec(),
            sweep: None,
            workers: 0,
        }
    }

    pub fn with_sweep(mut self, sweep: SweepAxis) -> Self {
        self.sweep = Some(sweep);
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn sweep_values(&self) -> Vec<Option<f64>> {
        match &self.sweep {
            Some(axis) => axis.values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }

    /// Fully resolved configuration of run `k` in one cell.
    pub fn run_config(&self, mechanism: Mechanism, sweep_value: Option<f64>, k: usize) -> Result<ScenarioConfig> {
        let mut cfg = self.base.clone();
        cfg.mechanism = mechanism;
        cfg.num_runs = self.num_runs;
        if let (Some(axis), Some(v)) = (&self.sweep, sweep_value) {
            cfg.set(axis.canonical()?, &format_sweep_value(v))?;
        }
        cfg.seed = derive_seed(
            self.master_seed,
            &[mechanism.name(), &sweep_label(sweep_value), &k.to_string()],
        );
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mechanisms.is_empty() {
            return Err(Error::config("experiment needs at least one mechanism"));
        }
        if self.num_runs == 0 {
            return Err(Error::config("num_runs must be positive"));
        }
        if let Some(axis) = &self.sweep {
            axis.canonical()?;
            if axis.values.is_empty() {
                return Err(Error::config("sweep needs at least one value"));
            }
            if axis.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::config("sweep values must be finite"));
            }
        }
        for &m in &self.mechanisms {
            for v in self.sweep_values() {
                self.run_config(m, v, 0)?;
            }
        }
        Ok(())
    }
}

/// Integer-valued parameters are rendered without a fractional part.
fn format_sweep_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn sweep_label(value: Option<f64>) -> String {
    value.map_or_else(|| "-".to_string(), |v| format!("{v}"))
}

pub fn run_single(config: ScenarioConfig) -> Result<Vec<RoundRecord>> {
    let mut engine = MechanismEngine::new(config)?;
    engine.run()?;
    Ok(engine.into_history())
}

/// Runs every (mechanism, sweep value, run index) job and aggregates per cell.
///
/// Output order is mechanisms as listed, then sweep values as listed,
/// independent of the worker count.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Vec<MetricSeries>> {
    plan.validate()?;
    let cells: Vec<(Mechanism, Option<f64>)> = plan
        .mechanisms
        .iter()
        .flat_map(|&m| plan.sweep_values().into_iter().map(move |v| (m, v)))
        .collect();
    let jobs: Vec<(usize, ScenarioConfig)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, &(m, v))| (0..plan.num_runs).map(move |k| (c, m, v, k)))
        .map(|(c, m, v, k)| Ok((c, plan.run_config(m, v, k)?)))
        .collect::<Result<_>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers)
        .build()
        .map_err(|e| Error::State(format!("thread pool: {e}")))?;
    let histories: Vec<(usize, Vec<RoundRecord>)> = pool.install(|| {
        jobs.into_par_iter()
            .map(|(c, cfg)| Ok((c, run_single(cfg)?)))
            .collect::<Result<_>>()
    })?;

    let mut per_cell: Vec<Vec<Vec<RoundRecord>>> = vec![Vec::new(); cells.len()];
    for (c, h) in histories {
        per_cell[c].push(h);
    }
    cells
        .iter()
        .zip(per_cell)
        .map(|(&(m, v), runs)| MetricSeries::aggregate(m, v, &runs))
        .collect()
}
