use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::{Outputs, Status};
use crate::error::{CliError, CliResult};
use mocpde::littlewood_paley::{bernstein_check, DyadicPartition};
use mocpde::spectral::snapshot::read_snapshot;
use mocpde::spectral::ScalarField;

/// Relative size below which a block counts as empty.
const ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Args)]
pub struct BesovArgs {
    /// MOCF snapshot to analyse.
    #[arg(long)]
    pub field: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    /// Homogeneous blocks (mean removed) instead of the inhomogeneous ones.
    #[arg(long)]
    pub homogeneous: bool,
    /// Also check the Bernstein ratios of every block.
    #[arg(long)]
    pub bernstein: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovJob {
    pub field: PathBuf,
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub homogeneous: bool,
    pub bernstein: bool,
}

impl BesovArgs {
    pub fn resolve(&self) -> CliResult<BesovJob> {
        for (name, v) in [("p", self.p), ("r", self.r)] {
            if v.is_nan() || v < 1.0 {
                return Err(CliError::Input(format!("{name} must be at least 1 (or inf), got {v}")));
            }
        }
        if !self.s.is_finite() {
            return Err(CliError::Input(format!("s must be finite, got {}", self.s)));
        }
        Ok(BesovJob {
            field: self.field.clone(),
            s: self.s,
            p: self.p,
            r: self.r,
            homogeneous: self.homogeneous,
            bernstein: self.bernstein,
        })
    }
}

pub fn execute(job: &BesovJob, out: &mut Outputs) -> CliResult<Status> {
    let f = read_snapshot(&job.field)?;
    let partition = DyadicPartition::new(*f.grid())?;
    let profile = partition.profile(&f, job.s, job.p, job.r, job.homogeneous)?;
    out.text("profile.csv", &profile.to_csv())?;
    let bernstein = if job.bernstein {
        let (lo, hi) = partition.homogeneous_range();
        let floor = ROUNDOFF * f.lp_norm(2.0);
        let mut reports = Vec::new();
        for j in lo..=hi {
            let block = partition.block(&f, j, true)?;
            // Leakage at rounding level is an empty block, not a Bernstein failure.
            let block = if block.lp_norm(2.0) <= floor { ScalarField::zeros(*f.grid()) } else { block };
            reports.push(bernstein_check(&block, j)?);
        }
        reports
    } else {
        Vec::new()
    };
    let failed: Vec<i32> = bernstein.iter().filter(|b| !b.skipped && !b.pass).map(|b| b.j).collect();
    let summary = serde_json::json!({
        "field": job.field,
        "s": job.s,
        "p": job.p,
        "r": job.r,
        "homogeneous": job.homogeneous,
        "mean_removed": profile.mean_removed,
        "norm": profile.norm(),
        "blocks": profile.blocks.len(),
        "bernstein": bernstein,
    });
    out.json("summary.json", &summary)?;
    let top = profile.blocks.iter().map(|b| b.1).fold(0.0, f64::max);
    let nonzero: Vec<i32> = profile.blocks.iter().filter(|b| b.1 > ROUNDOFF * top).map(|b| b.0).collect();
    Ok(if failed.is_empty() {
        Status::Pass(format!("norm {:e}; nonzero blocks {nonzero:?}", profile.norm()))
    } else {
        Status::Failed(format!("Bernstein ratios out of range on blocks {failed:?}"))
    })
}
