use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use super::{Outputs, Status};
use crate::error::{CliError, CliResult};
use mocpde::dynamics::Model;
use mocpde::evolution::{initial_field, interpolant_sup, InitialData, Normalization, SimConfig};
use mocpde::spectral::{Grid, ScalarField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    /// Seeded band-limited field with spectrum |k|^-(m+1).
    Random,
    /// `amplitude · cos(k·x)` for the lattice mode given by --mode.
    Cosine,
    Zero,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value = "random")]
    pub kind: FieldKind,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
    pub dim: u8,
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    pub length: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub k_min: f64,
    #[arg(long, default_value_t = 8.0)]
    pub k_max: f64,
    #[arg(long, default_value_t = 3)]
    pub m: u32,
    #[arg(long, conflicts_with = "linf")]
    pub hm: Option<f64>,
    #[arg(long)]
    pub linf: Option<f64>,
    /// Integer lattice mode for --kind cosine, e.g. 8,0.
    #[arg(long, allow_negative_numbers = true)]
    pub mode: Option<String>,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub amplitude: f64,
    /// Output file name inside --out.
    #[arg(long, default_value = "field.mocf")]
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSource {
    Random { initial: InitialData, m: u32 },
    Cosine { mode: Vec<i64>, amplitude: f64 },
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenJob {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub source: FieldSource,
    pub name: String,
}

impl GenJob {
    pub fn seed(&self) -> Option<u64> {
        match &self.source {
            FieldSource::Random { initial: InitialData::Random { seed, .. }, .. } => Some(*seed),
            _ => None,
        }
    }
}

impl GenArgs {
    pub fn resolve(&self) -> CliResult<GenJob> {
        let dim = self.dim as usize;
        Grid::new(dim, self.n, self.length)?;
        if self.name.contains(['/', '\\']) || self.name.is_empty() {
            return Err(CliError::Input(format!("--name must be a plain file name, got '{}'", self.name)));
        }
        let source = match self.kind {
            FieldKind::Zero => FieldSource::Zero,
            FieldKind::Cosine => {
                let text = self.mode.as_deref().ok_or_else(|| CliError::Input("--kind cosine needs --mode".into()))?;
                let mode: Vec<i64> = text
                    .split(',')
                    .map(|p| p.trim().parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::Input(format!("bad --mode '{text}'")))?;
                if mode.len() != dim {
                    return Err(CliError::Input(format!("--mode needs {dim} components, got {}", mode.len())));
                }
                if mode.iter().any(|m| 2 * m.unsigned_abs() as usize >= self.n) {
                    return Err(CliError::Input(format!("mode {mode:?} is not resolved on n = {}", self.n)));
                }
                FieldSource::Cosine { mode, amplitude: self.amplitude }
            }
            FieldKind::Random => {
                let normalization = match (self.hm, self.linf) {
                    (_, Some(value)) => Normalization::Linf { value },
                    (Some(value), None) => Normalization::Hm { value },
                    (None, None) => Normalization::Hm { value: 1.0 },
                };
                if !(self.k_min >= 0.0 && self.k_max >= self.k_min) {
                    return Err(CliError::Input(format!(
                        "need 0 <= k-min <= k-max, got {}, {}",
                        self.k_min, self.k_max
                    )));
                }
                FieldSource::Random {
                    initial: InitialData::Random {
                        seed: self.seed,
                        k_min: self.k_min,
                        k_max: self.k_max,
                        normalization,
                    },
                    m: self.m,
                }
            }
        };
        Ok(GenJob { dim, n: self.n, length: self.length, source, name: self.name.clone() })
    }
}

pub fn build(job: &GenJob) -> CliResult<ScalarField> {
    let grid = Grid::new(job.dim, job.n, job.length)?;
    Ok(match &job.source {
        FieldSource::Zero => ScalarField::zeros(grid),
        FieldSource::Cosine { mode, amplitude } => {
            let k: Vec<f64> = mode.iter().map(|&m| m as f64 * grid.dk()).collect();
            ScalarField::from_fn(grid, |x| amplitude * (0..job.dim).map(|d| k[d] * x[d]).sum::<f64>().cos())?
        }
        FieldSource::Random { initial, m } => {
            let model = if job.dim == 2 { Model::Qg2d } else { Model::Mpm3d };
            let mut c = SimConfig::new(model, 0.5, 0.0);
            c.n = job.n;
            c.length = job.length;
            c.m = *m;
            c.initial = initial.clone();
            initial_field(&c)?
        }
    })
}

pub fn execute(job: &GenJob, out: &mut Outputs) -> CliResult<Status> {
    let field = build(job)?;
    out.field(&job.name, &field)?;
    let sup = interpolant_sup(&field.transform());
    Ok(Status::Pass(format!("wrote {} ({}-D, n = {}, interpolant sup {sup:.6})", job.name, job.dim, job.n)))
}
