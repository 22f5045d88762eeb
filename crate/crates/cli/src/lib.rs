//! Experiment plumbing behind the `nlheat` binary: config documents, the
//! flag-over-config merge, and the four command payloads. Everything here is
//! deterministic given the config contents; the binary only adds argument
//! parsing, printing, and exit codes.

use std::fs;
use std::path::{Path, PathBuf};

use nlheat_core::criteria::{check_blowup_criterion, threshold_report, weighted_criterion_bound};
use nlheat_core::model::PExponent;
use nlheat_core::solver::{simulate, BoundaryRule, SimOptions};
use nlheat_core::{
    ArgmaxT, CriterionReport, Error, GridConfig, ModelParams, RadialProfile, Result, SimOutcome,
    ThresholdReport, Verdict,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Exponent text from the command line: a real ("3.2") or a ratio ("5/3").
pub fn parse_p(text: &str) -> std::result::Result<PExponent, String> {
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad ratio numerator in {text:?}"))?;
        let den: u64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad ratio denominator in {text:?}"))?;
        Ok(PExponent::Ratio { num, den })
    } else {
        text.trim()
            .parse::<f64>()
            .map(PExponent::Real)
            .map_err(|_| format!("expected a number or num/den ratio, got {text:?}"))
    }
}

/// One experiment, as stored in a config file. Every field is optional here;
/// each subcommand checks for the pieces it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: Option<u32>,
    pub p: Option<PExponent>,
    pub beta: Option<f64>,
    pub profile: Option<RadialProfile>,
    pub grid: Option<GridConfig>,
    pub t_max: Option<f64>,
    pub solver: SolverKnobs,
    pub sweep: Option<SweepSpec>,
    pub out: Option<PathBuf>,
}

/// Optional overrides applied on top of the solver defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverKnobs {
    pub blowup_sup_threshold: Option<f64>,
    pub dt_floor: Option<f64>,
    pub cfl_coeff: Option<f64>,
    pub reaction_safety: Option<f64>,
    pub record_dt: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub moment_t_ref: Option<f64>,
    pub inner_boundary: Option<BoundaryRule>,
    pub outer_boundary: Option<BoundaryRule>,
    pub track_barrier: Option<bool>,
    pub max_steps: Option<u64>,
}

impl SolverKnobs {
    pub fn apply(&self, t_max: f64) -> SimOptions {
        let mut opts = SimOptions::new(t_max);
        if let Some(v) = self.blowup_sup_threshold {
            opts.blowup_sup_threshold = v;
        }
        if let Some(v) = self.dt_floor {
            opts.dt_floor = v;
        }
        if let Some(v) = self.cfl_coeff {
            opts.cfl_coeff = v;
        }
        if let Some(v) = self.reaction_safety {
            opts.reaction_safety = v;
        }
        if let Some(v) = self.record_dt {
            opts.record_dt = Some(v);
        }
        if let Some(v) = &self.snapshot_times {
            opts.snapshot_times = v.clone();
        }
        if let Some(v) = self.moment_t_ref {
            opts.moment_t_ref = Some(v);
        }
        if let Some(v) = self.inner_boundary {
            opts.inner_boundary = v;
        }
        if let Some(v) = self.outer_boundary {
            opts.outer_boundary = v;
        }
        if let Some(v) = self.track_barrier {
            opts.track_barrier = v;
        }
        if let Some(v) = self.max_steps {
            opts.max_steps = v;
        }
        opts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Profile amplitude (the N in N·u_C and friends).
    Scale,
    /// Space dimension; values must be integers.
    D,
    /// Truncation height of a capped singular profile.
    Cap,
}

/// Command-line values that take precedence over the config document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub d: Option<u32>,
    pub p: Option<PExponent>,
    pub beta: Option<f64>,
    pub out: Option<PathBuf>,
}

/// The merged experiment a command actually runs.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub out: Option<PathBuf>,
}

pub fn load_experiment(config_path: Option<&Path>, ov: &Overrides) -> Result<Experiment> {
    let mut config = match config_path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text)
                .map_err(|e| Error::Parse(format!("bad config {}: {e}", path.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if ov.d.is_some() {
        config.d = ov.d;
    }
    if ov.p.is_some() {
        config.p = ov.p;
    }
    if ov.beta.is_some() {
        config.beta = ov.beta;
    }
    let out = ov.out.clone().or_else(|| config.out.clone());
    Ok(Experiment { config, out })
}

impl Experiment {
    pub fn params(&self) -> Result<ModelParams> {
        let d = self
            .config
            .d
            .ok_or_else(|| Error::domain("missing dimension: set --d or config d"))?;
        let p = self
            .config
            .p
            .ok_or_else(|| Error::domain("missing exponent: set --p or config p"))?;
        ModelParams::from_spec(d, p)
    }

    pub fn profile(&self) -> Result<&RadialProfile> {
        let profile = self
            .config
            .profile
            .as_ref()
            .ok_or_else(|| Error::domain("missing profile: set config profile"))?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn grid(&self) -> GridConfig {
        self.config.grid.unwrap_or_default()
    }

    pub fn t_max(&self) -> Result<f64> {
        self.config
            .t_max
            .ok_or_else(|| Error::domain("missing horizon: set config t_max"))
    }

    pub fn options(&self) -> Result<SimOptions> {
        Ok(self.config.solver.apply(self.t_max()?))
    }

    /// Output directory, created on demand.
    pub fn out_dir(&self) -> Result<Option<&Path>> {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| {
                    Error::domain(format!(
                        "cannot create output directory {}: {e}",
                        dir.display()
                    ))
                })?;
                Ok(Some(dir.as_path()))
            }
            None => Ok(None),
        }
    }
}

// ---------------------------------------------------------------- thresholds

pub fn thresholds_doc(exp: &Experiment) -> Result<ThresholdReport> {
    let params = exp.params()?;
    threshold_report(params.d, params.p)
}

pub fn thresholds_csv(r: &ThresholdReport) -> String {
    format!(
        "N_exact,N_asymptotic,M_bound,M_asymptotic,morrey_norm_uC\n{},{},{},{},{}\n",
        r.n_exact, r.n_asymptotic, r.m_bound, r.m_asymptotic, r.morrey_norm_uc
    )
}

// ----------------------------------------------------------------- criterion

/// `criterion` output: the criterion report, plus the weighted horizon bound
/// when a weight exponent β was given (it uses t_max as the horizon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionDoc {
    #[serde(flatten)]
    pub report: CriterionReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighted_bound: Option<f64>,
}

pub fn criterion_doc(exp: &Experiment) -> Result<CriterionDoc> {
    let params = exp.params()?;
    let report = check_blowup_criterion(exp.profile()?, &params)?;
    let weighted_bound = match exp.config.beta {
        Some(beta) => {
            let horizon = exp.config.t_max.ok_or_else(|| {
                Error::domain("weighted bound needs a horizon: set config t_max with --beta")
            })?;
            Some(weighted_criterion_bound(params.d, params.p, beta, horizon)?)
        }
        None => None,
    };
    Ok(CriterionDoc {
        report,
        weighted_bound,
    })
}

pub fn criterion_csv(doc: &CriterionDoc) -> String {
    let r = &doc.report;
    let argmax = match r.argmax_t {
        ArgmaxT::At(t) => t.to_string(),
        ArgmaxT::Divergent => "divergent".into(),
    };
    let verdict = match r.verdict {
        Verdict::BlowupPredicted => "blowup_predicted",
        Verdict::Inconclusive => "inconclusive",
    };
    let bound = r
        .blowup_time_bound
        .map(|t| t.to_string())
        .unwrap_or_else(|| "none".into());
    let weighted = doc
        .weighted_bound
        .map(|w| w.to_string())
        .unwrap_or_default();
    format!(
        "quantity,argmax_T,threshold,verdict,margin,blowup_time_bound,weighted_bound\n{},{argmax},{},{verdict},{},{bound},{weighted}\n",
        r.quantity, r.threshold, r.margin
    )
}

// ------------------------------------------------------------------ simulate

/// What `simulate` prints and stores as summary.json; the bulk series and
/// grid snapshots go to CSV files next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub d: u32,
    pub p: f64,
    pub t_max: f64,
    pub grid: GridConfig,
    #[serde(flatten)]
    pub outcome: SimOutcome,
    pub records: usize,
    /// Largest recorded max_r r^γ u, when barrier tracking was on.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier_peak: Option<f64>,
    pub snapshot_times: Vec<f64>,
    pub files: Vec<String>,
}

/// Everything `simulate` produces, ready to print or write.
#[derive(Debug, Clone)]
pub struct SimArtifacts {
    pub summary: SimSummary,
    pub series_csv: String,
    /// (file name, contents) per recorded snapshot.
    pub snapshots: Vec<(String, String)>,
}

pub fn simulate_doc(exp: &Experiment) -> Result<SimArtifacts> {
    let params = exp.params()?;
    let grid = exp.grid();
    let opts = exp.options()?;
    let result = simulate(exp.profile()?, &params, &grid, &opts)?;

    let mut files = vec!["summary.json".to_string(), "series.csv".to_string()];
    let mut snapshots = Vec::new();
    for (idx, snap) in result.snapshots.iter().enumerate() {
        let name = format!("snapshot_{idx:03}.csv");
        let mut csv = String::from("t,r,u\n");
        for (r, u) in result.grid_nodes.iter().zip(&snap.values) {
            csv.push_str(&format!("{},{r},{u}\n", snap.t));
        }
        files.push(name.clone());
        snapshots.push((name, csv));
    }
    let summary = SimSummary {
        d: params.d,
        p: params.p,
        t_max: opts.t_max,
        grid,
        outcome: result.outcome.clone(),
        records: result.series.entries.len(),
        barrier_peak: result
            .barrier_series
            .as_ref()
            .map(|samples| samples.iter().fold(0.0f64, |m, s| m.max(s.max_z))),
        snapshot_times: result.snapshots.iter().map(|s| s.t).collect(),
        files,
    };
    Ok(SimArtifacts {
        summary,
        series_csv: result.series.to_csv(),
        snapshots,
    })
}

// --------------------------------------------------------------------- sweep

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub verdict: String,
    pub t_blow_or_horizon: f64,
    pub criterion_margin: f64,
}

/// Instantiate one sweep cell by substituting `value` into the base setup.
pub fn sweep_cell(
    base_params: &ModelParams,
    base_profile: &RadialProfile,
    which: SweepParameter,
    value: f64,
) -> Result<(ModelParams, RadialProfile)> {
    let params = match which {
        SweepParameter::D => {
            if value.fract() != 0.0 || value < 1.0 {
                return Err(Error::domain(format!(
                    "swept dimension must be a positive integer, got {value}"
                )));
            }
            ModelParams::new(value as u32, base_params.p)?
        }
        _ => base_params.clone(),
    };
    let profile = match which {
        SweepParameter::D => base_profile.clone(),
        SweepParameter::Scale => match base_profile {
            RadialProfile::Singular { .. } => RadialProfile::Singular { scale: value },
            RadialProfile::TruncatedSingular { cap, .. } => RadialProfile::TruncatedSingular {
                scale: value,
                cap: *cap,
            },
            RadialProfile::Gaussian { width, .. } => RadialProfile::Gaussian {
                amplitude: value,
                width: *width,
            },
            RadialProfile::Indicator { radius, .. } => RadialProfile::Indicator {
                amplitude: value,
                radius: *radius,
            },
            RadialProfile::Constant { .. } => RadialProfile::Constant { level: value },
            other => {
                return Err(Error::domain(format!(
                    "scale sweep not supported for {other:?}"
                )))
            }
        },
        SweepParameter::Cap => match base_profile {
            RadialProfile::TruncatedSingular { scale, .. } => RadialProfile::TruncatedSingular {
                scale: *scale,
                cap: value,
            },
            other => {
                return Err(Error::domain(format!(
                    "cap sweep needs a truncated_singular profile, got {other:?}"
                )))
            }
        },
    };
    profile.validate()?;
    Ok((params, profile))
}

/// Run every sweep cell (criterion + solver), ordered by parameter value.
/// Cells run concurrently; the ordering comes from a final sort, not from
/// completion order.
pub fn sweep_rows(exp: &Experiment) -> Result<Vec<SweepRow>> {
    let spec = exp
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::domain("missing sweep: set config sweep {parameter, values}"))?;
    let base_params = exp.params()?;
    let base_profile = exp.profile()?;
    let grid = exp.grid();
    let opts = exp.options()?;

    let mut rows = spec
        .values
        .par_iter()
        .map(|&value| -> Result<SweepRow> {
            let (params, profile) = sweep_cell(&base_params, base_profile, spec.parameter, value)?;
            let report = check_blowup_criterion(&profile, &params)?;
            let result = simulate(&profile, &params, &grid, &opts)?;
            let (verdict, t) = match result.outcome {
                SimOutcome::BlewUp { t_blow, .. } => ("blew_up", t_blow),
                SimOutcome::Survived { horizon, .. } => ("survived", horizon),
                SimOutcome::StepFailure { t, .. } => ("step_failure", t),
            };
            Ok(SweepRow {
                parameter: value,
                verdict: verdict.to_string(),
                t_blow_or_horizon: t,
                criterion_margin: report.margin,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.parameter.total_cmp(&b.parameter));
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = String::from("parameter,verdict,t_blow_or_horizon,criterion_margin\n");
    for row in rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            row.parameter, row.verdict, row.t_blow_or_horizon, row.criterion_margin
        ));
    }
    csv
}
