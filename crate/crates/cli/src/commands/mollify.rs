use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::{Outputs, Status};
use crate::config::parse_list;
use crate::error::{CliError, CliResult};
use mocpde::dynamics::Model;
use mocpde::evolution::{initial_field, interpolant_sup, InitialData, Normalization, SimConfig};
use mocpde::littlewood_paley::bessel_norm;
use mocpde::mollifier::{contraction_runs, energy_inequality_check, RegularizedConfig};

#[derive(Debug, Args)]
pub struct StudyArgs {
    /// Mollifier widths, comma separated; at least 4, geometric.
    #[arg(long)]
    pub eps_list: String,
    #[arg(long, default_value = "qg2d")]
    pub model: Model,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    pub nu: f64,
    /// Points per axis; 32 in 2-D and 16 in 3-D by default.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long = "t-final", default_value_t = 1.0)]
    pub t_final: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 5)]
    pub stride: usize,
    #[arg(long, default_value_t = 3)]
    pub m: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4.0)]
    pub k_max: f64,
    /// H^m norm of the random initial field.
    #[arg(long, default_value_t = 1.0)]
    pub hm: f64,
    #[arg(long, conflicts_with = "zero")]
    pub init: Option<PathBuf>,
    #[arg(long)]
    pub zero: bool,
    /// Smallest acceptable fitted slope.
    #[arg(long, default_value_t = 0.9)]
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyJob {
    pub base: RegularizedConfig,
    pub eps: Vec<f64>,
    pub n: usize,
    pub initial: InitialData,
    pub threshold: f64,
}

impl StudyJob {
    pub fn seed(&self) -> Option<u64> {
        match self.initial {
            InitialData::Random { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match &self.initial {
            InitialData::File { path } => vec![path.clone()],
            _ => Vec::new(),
        }
    }

    fn sim_config(&self) -> SimConfig {
        let mut c = SimConfig::new(self.base.model, self.base.alpha, self.base.nu);
        c.n = self.n;
        c.m = self.base.m;
        c.initial = self.initial.clone();
        c
    }
}

impl StudyArgs {
    pub fn resolve(&self) -> CliResult<StudyJob> {
        let eps =
            parse_list(&self.eps_list).map_err(|_| CliError::Input(format!("bad --eps-list '{}'", self.eps_list)))?;
        if eps.len() < 4 {
            return Err(CliError::Input(format!("--eps-list needs at least 4 widths, got {}", eps.len())));
        }
        let mut sorted = eps.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::Input("--eps-list contains a duplicate width".into()));
        }
        let initial = if self.zero {
            InitialData::Zero
        } else if let Some(p) = &self.init {
            InitialData::File { path: p.clone() }
        } else {
            InitialData::Random {
                seed: self.seed,
                k_min: 1.0,
                k_max: self.k_max,
                normalization: Normalization::Hm { value: self.hm },
            }
        };
        let n = self.n.unwrap_or(if self.model == Model::Qg2d { 32 } else { 16 });
        let base = RegularizedConfig {
            model: self.model,
            alpha: self.alpha,
            nu: self.nu,
            eps: eps[0],
            dt: self.dt,
            t_final: self.t_final,
            stride: self.stride,
            m: self.m,
        };
        let job = StudyJob { base, eps, n, initial, threshold: self.threshold };
        job.sim_config().validate()?;
        Ok(job)
    }
}

pub fn execute(job: &StudyJob, out: &mut Outputs) -> CliResult<Status> {
    let theta0 = initial_field(&job.sim_config())?;
    let (report, runs) = match contraction_runs(&theta0, &job.eps, &job.base) {
        Ok(r) => r,
        Err(mocpde::Error::Diverged { time }) => {
            return Ok(Status::Aborted(format!("a regularized run diverged at t = {time}")));
        }
        Err(e) => return Err(e.into()),
    };
    for (i, traj) in runs.iter().enumerate() {
        let last = traj.final_state();
        let sample = traj.samples.last().expect("initial sample");
        out.field(&format!("runs/eps_{i}.mocf"), &last.inverse())?;
        let sidecar = serde_json::json!({
            "t": sample.t,
            "eps": traj.config.eps,
            "norms": { "L2": sample.l2, "Linf": interpolant_sup(last), "Hm": bessel_norm(last, job.base.m as f64) },
            "residuals": energy_inequality_check(traj),
        });
        out.json(&format!("runs/eps_{i}.json"), &sidecar)?;
    }
    out.json("contraction.json", &report)?;
    Ok(match report.slope {
        None => Status::Invalid("degenerate study: every trajectory difference is zero, no slope to fit".into()),
        Some(s) if s >= job.threshold => Status::Pass(format!("fitted slope {s:.4} >= {}", job.threshold)),
        Some(s) => Status::Failed(format!("fitted slope {s:.4} below threshold {}", job.threshold)),
    })
}
