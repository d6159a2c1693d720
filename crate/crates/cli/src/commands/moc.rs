use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::{Outputs, Status};
use crate::error::{CliError, CliResult};
use mocpde::moc::{
    canonical_grid, log_grid, search_parameters, validate_moc, verify_negativity, EstimateConstants, MocParameters,
    SearchBudget,
};

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Convection constant C₁.
    #[arg(long, default_value_t = 1.0)]
    pub c1: f64,
    /// Dissipation constant C₂ (both pieces).
    #[arg(long, default_value_t = 1.0)]
    pub c2: f64,
    /// Override C₂ for the near-field piece.
    #[arg(long)]
    pub c2_near: Option<f64>,
    /// Override C₂ for the far-field piece.
    #[arg(long)]
    pub c2_far: Option<f64>,
    /// Use the slope ω'(0) = 1 below δ instead of the exact slope.
    #[arg(long)]
    pub conservative_slope: bool,
}

impl ConstantsArgs {
    fn resolve(&self) -> CliResult<EstimateConstants> {
        let mut c = EstimateConstants::new(self.c1, self.c2)?;
        if let Some(v) = self.c2_near {
            c.c2_near = v;
        }
        if let Some(v) = self.c2_far {
            c.c2_far = v;
        }
        c.conservative_slope = self.conservative_slope;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Power of the small-scale piece; defaults to 1 + α/2.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Parameter file written by `moc-search`, instead of --r/--gamma/--delta.
    #[arg(long, conflicts_with_all = ["r", "gamma", "delta"])]
    pub params: Option<PathBuf>,
    #[command(flatten)]
    pub constants: ConstantsArgs,
    /// Log-spaced ξ grid instead of the canonical one.
    #[arg(long, requires_all = ["grid_max", "grid_points"])]
    pub grid_min: Option<f64>,
    #[arg(long, requires = "grid_min")]
    pub grid_max: Option<f64>,
    #[arg(long, requires = "grid_min")]
    pub grid_points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum XiGrid {
    /// 160 log-spaced points on [1e-8, 1e3] plus δ/2, δ, 2δ.
    Canonical,
    Log {
        min: f64,
        max: f64,
        points: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyJob {
    pub params: MocParameters,
    pub constants: EstimateConstants,
    pub grid: XiGrid,
}

fn recheck(p: &MocParameters) -> CliResult<MocParameters> {
    Ok(MocParameters::new(p.alpha(), p.r(), p.gamma(), p.delta())?)
}

impl VerifyArgs {
    pub fn resolve(&self) -> CliResult<VerifyJob> {
        let params = match &self.params {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                let p: MocParameters = serde_json::from_str(&text)
                    .map_err(|e| CliError::Input(format!("bad parameter file {}: {e}", path.display())))?;
                let p = recheck(&p)?;
                if p.alpha() != self.alpha {
                    return Err(CliError::Input(format!(
                        "--alpha {} does not match alpha {} in {}",
                        self.alpha,
                        p.alpha(),
                        path.display()
                    )));
                }
                p
            }
            None => {
                let (Some(gamma), Some(delta)) = (self.gamma, self.delta) else {
                    return Err(CliError::Input("need --gamma and --delta, or --params".into()));
                };
                let r = self.r.unwrap_or(1.0 + 0.5 * self.alpha);
                MocParameters::new(self.alpha, r, gamma, delta)?
            }
        };
        let grid = match (self.grid_min, self.grid_max, self.grid_points) {
            (Some(min), Some(max), Some(points)) => {
                if !(min > 0.0 && max > min && points >= 2) {
                    return Err(CliError::Input(format!(
                        "grid needs 0 < grid-min < grid-max and at least 2 points, got {min}, {max}, {points}"
                    )));
                }
                XiGrid::Log { min, max, points }
            }
            _ => XiGrid::Canonical,
        };
        Ok(VerifyJob { params, constants: self.constants.resolve()?, grid })
    }
}

pub fn verify(job: &VerifyJob, out: &mut Outputs) -> CliResult<Status> {
    let delta = job.params.delta();
    let grid = match job.grid {
        XiGrid::Canonical => canonical_grid(delta),
        XiGrid::Log { min, max, points } => {
            let mut g = log_grid(min, max, points);
            g.extend([0.5 * delta, delta, 2.0 * delta]);
            g.sort_by(f64::total_cmp);
            g.dedup();
            g
        }
    };
    let report = verify_negativity(&job.params, &job.constants, &grid)?;
    let validation = validate_moc(&job.params);
    out.json("negativity.json", &report)?;
    out.text("negativity.csv", &report.to_csv())?;
    out.json("validation.json", &validation)?;
    let msg = format!("worst margin {:e} at xi = {:e}", report.worst.margin, report.worst.xi);
    Ok(if report.pass { Status::Pass(msg) } else { Status::Failed(msg) })
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub constants: ConstantsArgs,
    /// Largest number of candidates to verify.
    #[arg(long, default_value_t = 64)]
    pub budget: usize,
    /// Smallest δ tried is 2^-max_log2_delta.
    #[arg(long, default_value_t = 30)]
    pub max_log2_delta: u32,
    /// γ = δ/4^k for k = 1..=gamma_steps.
    #[arg(long, default_value_t = 8)]
    pub gamma_steps: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchJob {
    pub alpha: f64,
    pub constants: EstimateConstants,
    pub budget: SearchBudget,
}

impl SearchArgs {
    pub fn resolve(&self) -> CliResult<SearchJob> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::Input(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.budget == 0 {
            return Err(CliError::Input("budget must be positive".into()));
        }
        let budget = SearchBudget {
            max_candidates: self.budget,
            max_log2_delta: self.max_log2_delta,
            gamma_steps: self.gamma_steps,
            ..SearchBudget::default()
        };
        Ok(SearchJob { alpha: self.alpha, constants: self.constants.resolve()?, budget })
    }
}

pub fn search(job: &SearchJob, out: &mut Outputs) -> CliResult<Status> {
    let report = search_parameters(job.alpha, &job.constants, &job.budget)?;
    out.json("search.json", &report)?;
    Ok(match report.found {
        Some(p) => {
            out.json("params.json", &p)?;
            Status::Pass(format!("found r = {}, gamma = {:e}, delta = {:e}", p.r(), p.gamma(), p.delta()))
        }
        None => Status::Failed(format!(
            "budget exhausted after {} candidates; best worst margin {:e}",
            report.trail.len(),
            report.best.as_ref().map_or(f64::NAN, |b| b.worst.margin)
        )),
    })
}
