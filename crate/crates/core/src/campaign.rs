//! Seeded verification campaigns and decay-curve sweeps.
//!
//! Trial `i` of a campaign with seed `s` draws every input from
//! `rng_for(s, i)`, so trials are independent of each other and of the
//! order in which they run. Reports are always emitted sorted by trial index.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{apply_one_sided, make_filter, random_channel_from, KrausChannel, Side};
use crate::duality::{dual_check, eigen_proportionality};
use crate::entanglement::{
    choi_concurrence, concat_margin, concurrence, factorization_residual, mixed_bound_margin,
    two_sided_margin,
};
use crate::error::{Error, Result};
use crate::io::Family;
use crate::rng::{rng_for, TrialRng};
use crate::states::{pure_chi, random_mixed_from, random_pure_from, DensityMatrix, PureState};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    /// Output concurrence equals Choi concurrence times input concurrence.
    Factorization,
    /// Laboratory and dual pictures give the same state.
    Dual,
    /// Spin-flip spectra of output and Choi state are proportional.
    Eigen,
    /// One-sided bound for mixed initial states.
    MixedBound,
    /// Bound for independent channels on both sides.
    TwoSided,
    /// Choi concurrence of a concatenation is at most the product.
    Concat,
}

impl Law {
    pub const ALL: [Law; 6] = [
        Law::Factorization,
        Law::Dual,
        Law::Eigen,
        Law::MixedBound,
        Law::TwoSided,
        Law::Concat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::Factorization => "factorization",
            Law::Dual => "dual",
            Law::Eigen => "eigen",
            Law::MixedBound => "mixed-bound",
            Law::TwoSided => "two-sided",
            Law::Concat => "concat",
        }
    }

    /// Residual laws pass when `metric <= tol`; bound laws report a margin and
    /// pass when `metric >= -tol`.
    pub fn is_bound(self) -> bool {
        matches!(self, Law::MixedBound | Law::TwoSided | Law::Concat)
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Law::ALL
            .into_iter()
            .find(|l| l.name() == s.replace('_', "-"))
            .ok_or_else(|| Error::Parse(format!("unknown law '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::Parse(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub law: Law,
    pub trials: usize,
    pub seed: u64,
    /// Fixed `omega` values cycled through by trials that use a Schmidt-form
    /// state or a filter parameter; empty means draw them at random.
    pub omega_grid: Vec<f64>,
    pub tolerance: f64,
}

impl CampaignConfig {
    pub fn new(law: Law, trials: usize, seed: u64) -> Self {
        Self {
            law,
            trials,
            seed,
            omega_grid: Vec::new(),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parse("trials must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Parse("tolerance must be positive".into()));
        }
        if let Some(&w) = self.omega_grid.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(Error::OutOfRange {
                name: "omega",
                value: w,
                range: "[0, 1]".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial_index: usize,
    pub seed: u64,
    pub channel: String,
    pub state: String,
    pub omega: Option<f64>,
    pub metric: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub law: String,
    pub trials: usize,
    pub failures: usize,
    pub max_abs_metric: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl fmt::Display for CampaignSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "law={} trials={} failures={} max|metric|={:e} tolerance={:e} result={}",
            self.law,
            self.trials,
            self.failures,
            self.max_abs_metric,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Campaign {
    pub reports: Vec<TrialReport>,
    pub summary: CampaignSummary,
}

struct TrialInputs {
    channel: String,
    state: String,
    omega: Option<f64>,
}

fn pick_omega(rng: &mut TrialRng, grid: &[f64], index: usize, lo: f64, hi: f64) -> f64 {
    if grid.is_empty() {
        rng.gen_range(lo..=hi)
    } else {
        grid[index % grid.len()]
    }
}

/// Mostly random trace-preserving channels of rank 1..4; every fifth trial
/// uses a non-trace-preserving filter instead.
fn draw_channel(rng: &mut TrialRng, index: usize) -> Result<KrausChannel> {
    if index % 5 == 4 {
        make_filter(rng.gen_range(0.01..=0.99))
    } else {
        random_channel_from(rng, 1 + index % 4)
    }
}

fn run_trial(cfg: &CampaignConfig, index: usize) -> Result<TrialReport> {
    let mut rng = rng_for(cfg.seed, index as u64);
    let grid = &cfg.omega_grid;
    let (inputs, metric) = match cfg.law {
        Law::Factorization => {
            let ch = draw_channel(&mut rng, index)?;
            let (psi, state, omega): (PureState, String, Option<f64>) = if index % 3 == 2 {
                let w = pick_omega(&mut rng, grid, index / 3, 0.0, 1.0);
                (pure_chi(w)?, format!("chi({w})"), Some(w))
            } else {
                (random_pure_from(&mut rng, 2), "random_pure".into(), None)
            };
            let check = factorization_residual(&ch, &psi)?;
            (
                TrialInputs {
                    channel: ch.name,
                    state,
                    omega,
                },
                check.residual,
            )
        }
        Law::Dual | Law::Eigen => {
            let ch = draw_channel(&mut rng, index)?;
            let w = pick_omega(&mut rng, grid, index, 0.01, 0.99);
            let metric = if cfg.law == Law::Dual {
                dual_check(&ch, w)?.residual
            } else {
                eigen_proportionality(&ch, w)?.residual
            };
            (
                TrialInputs {
                    channel: ch.name,
                    state: format!("chi({w})"),
                    omega: Some(w),
                },
                metric,
            )
        }
        Law::MixedBound => {
            let ch = draw_channel(&mut rng, index)?;
            let rank = 2 + index % 3;
            let rho = random_mixed_from(&mut rng, rank)?;
            let report = mixed_bound_margin(&ch, &rho)?;
            (
                TrialInputs {
                    channel: ch.name,
                    state: format!("random_mixed(rank={rank})"),
                    omega: None,
                },
                report.margin,
            )
        }
        Law::TwoSided => {
            let left = random_channel_from(&mut rng, 1 + index % 4)?;
            let right = draw_channel(&mut rng, index / 4)?;
            let rank = 1 + (index / 4) % 4;
            let rho = random_mixed_from(&mut rng, rank)?;
            let report = two_sided_margin(&left, &right, &rho)?;
            (
                TrialInputs {
                    channel: format!("{}|{}", left.name, right.name),
                    state: format!("random_mixed(rank={rank})"),
                    omega: None,
                },
                report.margin,
            )
        }
        Law::Concat => {
            let first = draw_channel(&mut rng, index)?;
            let second = random_channel_from(&mut rng, 1 + (index / 4) % 4)?;
            let report = concat_margin(&second, &first)?;
            (
                TrialInputs {
                    channel: format!("{} after {}", second.name, first.name),
                    state: "phi_plus".into(),
                    omega: None,
                },
                report.margin,
            )
        }
    };
    let passed = if cfg.law.is_bound() {
        metric >= -cfg.tolerance
    } else {
        metric <= cfg.tolerance
    };
    Ok(TrialReport {
        trial_index: index,
        seed: cfg.seed,
        channel: inputs.channel,
        state: inputs.state,
        omega: inputs.omega,
        metric,
        passed,
    })
}

/// Runs all trials (in parallel) and summarizes them.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Campaign> {
    cfg.validate()?;
    let reports = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    let failures = reports.iter().filter(|r| !r.passed).count();
    // For bound laws the interesting magnitude is the worst violation.
    let max_abs_metric = reports
        .iter()
        .map(|r| {
            if cfg.law.is_bound() {
                (-r.metric).max(0.0)
            } else {
                r.metric.abs()
            }
        })
        .fold(0.0, f64::max);
    let summary = CampaignSummary {
        law: cfg.law.name().to_string(),
        trials: cfg.trials,
        failures,
        max_abs_metric,
        tolerance: cfg.tolerance,
        passed: failures == 0,
    };
    Ok(Campaign { reports, summary })
}

/// CSV (header plus one row per record) or pretty JSON.
pub fn render<T: Serialize>(records: &[T], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in records {
                w.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
        }
        OutputFormat::Json => serde_json::to_string_pretty(records)
            .map(|s| s + "\n")
            .map_err(|e| Error::Parse(e.to_string())),
    }
}

/// Report stream for a campaign. JSON output wraps the reports together with
/// the summary; CSV output carries the reports only.
pub fn render_campaign(campaign: &Campaign, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => render(&campaign.reports, format),
        OutputFormat::Json => serde_json::to_string_pretty(campaign)
            .map(|s| s + "\n")
            .map_err(|e| Error::Parse(e.to_string())),
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub family: Family,
    /// Decay rate `G` in the parameter map.
    pub rate: f64,
    pub t_max: f64,
    /// Number of grid points, including `t = 0` and `t = t_max`.
    pub steps: usize,
    pub initial: DensityMatrix,
}

/// One row of a decay curve: the channel parameter at time `t`, the Choi
/// concurrence, the factorized prediction `c_choi * C(rho0)` and the
/// concurrence of the directly evolved state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub param: f64,
    pub c_choi: f64,
    pub c_predicted: f64,
    pub c_direct: f64,
}

/// `gamma(t) = 1 - exp(-G t)` for amplitude damping, `p(t) = (1 - exp(-G t)) / 2`
/// for phase flip. Their Choi concurrences are `exp(-G t / 2)` and `exp(-G t)`.
pub fn parameter_at(family: Family, rate: f64, t: f64) -> Result<f64> {
    let decayed = -(-rate * t).exp_m1();
    match family {
        Family::AmplitudeDamping => Ok(decayed),
        Family::PhaseFlip => Ok(0.5 * decayed),
        Family::Depolarizing => Err(Error::UnknownFamily(format!(
            "{} has no time parametrization",
            family.name()
        ))),
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.steps == 0 || !(cfg.t_max >= 0.0) || !(cfg.rate >= 0.0) {
        return Err(Error::Parse(
            "sweep needs steps >= 1, t_max >= 0 and rate >= 0".into(),
        ));
    }
    let c0 = concurrence(&cfg.initial)?;
    (0..cfg.steps)
        .map(|k| {
            let t = if cfg.steps == 1 {
                0.0
            } else {
                cfg.t_max * k as f64 / (cfg.steps - 1) as f64
            };
            let param = parameter_at(cfg.family, cfg.rate, t)?;
            let ch = cfg.family.channel(param)?;
            let c_choi = choi_concurrence(&ch, Side::Right)?;
            let c_direct = concurrence(&apply_one_sided(&ch, &cfg.initial, Side::Right)?.state)?;
            Ok(SweepRow {
                t,
                param,
                c_choi,
                c_predicted: c_choi * c0,
                c_direct,
            })
        })
        .collect()
}
