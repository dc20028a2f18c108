//! The three subcommands, minus argument parsing.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use stochreach::monte_carlo::{binomial_slack, StepContainment};
use stochreach::systems::project_theta;
use stochreach::{
    empirical_containment, run_reachability, sample_trajectories, validate_decomposition,
    ContainmentReport, ReachProblem, ReachTube, ValidationReport,
};

use crate::config::{Scenario, ScenarioConfig, SystemKind};
use crate::error::CliError;
use crate::output::{read_tube_csv, write_json, write_trajectories_csv, write_tube_csv};

/// Quaternion components `(q₁, q₂)` in the attitude state.
const THETA_COMPONENTS: [usize; 2] = [1, 2];

pub fn compute_tube(cfg: &ScenarioConfig, s: &Scenario) -> Result<ReachTube, CliError> {
    Ok(run_reachability(&ReachProblem {
        system: &s.system,
        initial: &s.initial,
        disturbance: &s.disturbance,
        delta0: cfg.delta0,
        delta_w: cfg.delta_w,
        horizon: cfg.horizon,
        seed: cfg.seed,
    })?)
}

/// Line-of-sight range per step; only defined for the attitude system.
pub fn theta_ranges(
    kind: SystemKind,
    tube: &ReachTube,
) -> Result<Option<Vec<(f64, f64)>>, CliError> {
    if kind != SystemKind::Attitude7d {
        return Ok(None);
    }
    tube.steps
        .iter()
        .map(|s| Ok(project_theta(&s.bounds.select(&THETA_COMPONENTS)?)?))
        .collect::<Result<Vec<_>, CliError>>()
        .map(Some)
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloSummary {
    pub trajectories: usize,
    pub fractions: Vec<f64>,
    pub theoretical_lower_bounds: Vec<f64>,
    pub slack: f64,
    pub all_honored: bool,
}

impl MonteCarloSummary {
    fn from_report(r: &ContainmentReport, m: usize) -> Self {
        Self {
            trajectories: m,
            fractions: r.fractions(),
            theoretical_lower_bounds: r
                .per_step
                .iter()
                .map(|s| s.theoretical_lower_bound)
                .collect(),
            slack: binomial_slack(m),
            all_honored: r.all_honored(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub system: &'static str,
    pub seed: u64,
    pub delta0: f64,
    pub delta_w: f64,
    pub horizon: usize,
    pub sample_time: f64,
    pub deltas: Vec<f64>,
    pub probability_lower_bounds: Vec<f64>,
    pub box_widths: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_ranges: Option<Vec<[f64; 2]>>,
    pub monte_carlo: Option<MonteCarloSummary>,
    /// The only field that differs between repeated runs.
    pub wall_clock_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct ReachOutcome {
    pub tube: ReachTube,
    pub theta: Option<Vec<(f64, f64)>>,
    pub containment: Option<ContainmentReport>,
    pub summary: Summary,
}

/// Computes the tube, optionally checks it by simulation, and writes every
/// configured artifact.
pub fn reach(cfg: &ScenarioConfig) -> Result<ReachOutcome, CliError> {
    let started = Instant::now();
    let s = cfg.build()?;
    let tube = compute_tube(cfg, &s)?;
    let theta = theta_ranges(s.kind, &tube)?;

    let mut containment = None;
    if let Some(mc) = &cfg.monte_carlo {
        let e = sample_trajectories(
            &s.system,
            &s.initial,
            &s.disturbance,
            cfg.horizon,
            mc.trajectories,
            cfg.seed,
        )?;
        if let Some(path) = &cfg.outputs.trajectories_path {
            write_trajectories_csv(path, &e, s.system.sample_time)?;
        }
        containment = Some(empirical_containment(&e, &tube)?);
    }

    write_tube_csv(&cfg.outputs.tube_path, &tube, theta.as_deref())?;
    let summary = Summary {
        system: s.kind.name(),
        seed: cfg.seed,
        delta0: cfg.delta0,
        delta_w: cfg.delta_w,
        horizon: cfg.horizon,
        sample_time: s.system.sample_time,
        deltas: tube.deltas(),
        probability_lower_bounds: tube
            .steps
            .iter()
            .map(|s| s.probability_lower_bound())
            .collect(),
        box_widths: tube.steps.iter().map(|s| s.bounds.width()).collect(),
        theta_ranges: theta
            .as_ref()
            .map(|t| t.iter().map(|&(a, b)| [a, b]).collect()),
        monte_carlo: containment
            .as_ref()
            .zip(cfg.monte_carlo)
            .map(|(r, mc)| MonteCarloSummary::from_report(r, mc.trajectories)),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    write_json(&cfg.outputs.summary_path, &summary)?;
    Ok(ReachOutcome {
        tube,
        theta,
        containment,
        summary,
    })
}

/// Samples the decomposition conditions over the system's declared domain.
pub fn check_decomposition(
    cfg: &ScenarioConfig,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport, CliError> {
    if samples == 0 {
        return Err(CliError::Config("samples: must be positive".into()));
    }
    let s = cfg.build()?;
    Ok(validate_decomposition(
        &s.system,
        samples,
        seed,
        cfg.validation.tolerances(),
    )?)
}

#[derive(Debug, Clone, Serialize)]
pub struct McValidationReport {
    pub system: &'static str,
    pub seed: u64,
    pub trajectories: usize,
    pub slack: f64,
    pub per_step: Vec<StepContainment>,
    pub passed: bool,
}

/// Checks the tube (computed, or read from `tube_csv`) against sampled
/// trajectories.
pub fn mc_validate(
    cfg: &ScenarioConfig,
    tube_csv: Option<&Path>,
) -> Result<McValidationReport, CliError> {
    let mc = cfg
        .monte_carlo
        .ok_or_else(|| CliError::Config("monte_carlo: block required for mc-validate".into()))?;
    let s = cfg.build()?;
    let tube = match tube_csv {
        Some(p) => read_tube_csv(p)?,
        None => compute_tube(cfg, &s)?,
    };
    if tube.len() != cfg.horizon + 1 {
        return Err(CliError::Config(format!(
            "tube has {} steps, horizon {} needs {}",
            tube.len(),
            cfg.horizon,
            cfg.horizon + 1
        )));
    }
    if let Some(step) = tube
        .steps
        .iter()
        .find(|st| st.bounds.dim() != s.system.state_dim())
    {
        return Err(CliError::Config(format!(
            "tube box at k = {} has dimension {}, system has {}",
            step.k,
            step.bounds.dim(),
            s.system.state_dim()
        )));
    }
    let e = sample_trajectories(
        &s.system,
        &s.initial,
        &s.disturbance,
        cfg.horizon,
        mc.trajectories,
        cfg.seed,
    )?;
    let report = empirical_containment(&e, &tube)?;
    Ok(McValidationReport {
        system: s.kind.name(),
        seed: cfg.seed,
        trajectories: mc.trajectories,
        slack: binomial_slack(mc.trajectories),
        passed: report.all_honored(),
        per_step: report.per_step,
    })
}
