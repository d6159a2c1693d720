use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::{Outputs, Status};
use crate::config::{parse_list, KvConfig};
use crate::error::{CliError, CliResult};
use mocpde::dynamics::Model;
use mocpde::evolution::{run, InitialData, LambdaChoice, MonitorSpec, Normalization, SimConfig, TimeStep};
use mocpde::moc::{search_parameters, EstimateConstants, MocParameters, ModulusOfContinuity, SearchBudget};

const KNOWN_KEYS: &[&str] = &[
    "run.model",
    "run.alpha",
    "run.nu",
    "run.n",
    "run.length",
    "run.t_final",
    "run.dt",
    "run.cfl",
    "run.stride",
    "run.snapshot_stride",
    "run.m",
    "run.gammas",
    "initial.kind",
    "initial.seed",
    "initial.k_min",
    "initial.k_max",
    "initial.hm",
    "initial.linf",
    "initial.path",
    "monitor.enabled",
    "monitor.r",
    "monitor.gamma",
    "monitor.delta",
    "monitor.lambda",
    "monitor.safety",
];

/// Flags override values from `--config`, which override the defaults.
#[derive(Debug, Default, Args)]
pub struct SimArgs {
    /// Key-value configuration file with [run], [initial] and [monitor] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// mpm3d or qg2d.
    #[arg(long)]
    pub model: Option<Model>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Points per axis.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
    /// Fixed step; otherwise the step follows from --cfl.
    #[arg(long, conflicts_with = "cfl")]
    pub dt: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long)]
    pub snapshot_stride: Option<usize>,
    /// Sobolev index of the diagnostics.
    #[arg(long)]
    pub m: Option<u32>,
    /// Smoothing exponents, comma separated.
    #[arg(long)]
    pub gammas: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub k_min: Option<f64>,
    #[arg(long)]
    pub k_max: Option<f64>,
    /// Normalize the random initial field to this H^m norm.
    #[arg(long, conflicts_with = "linf")]
    pub hm: Option<f64>,
    /// Normalize the random initial field to this supremum.
    #[arg(long)]
    pub linf: Option<f64>,
    /// Start from a MOCF snapshot.
    #[arg(long, conflicts_with_all = ["seed", "zero"])]
    pub init: Option<PathBuf>,
    /// Start from θ ≡ 0.
    #[arg(long)]
    pub zero: bool,
    /// Monitor the explicit modulus; parameters come from --monitor-params or
    /// a search at unit constants.
    #[arg(long)]
    pub monitor: bool,
    #[arg(long)]
    pub monitor_params: Option<PathBuf>,
    /// Fixed scale λ of the monitored ω(λ·).
    #[arg(long, conflicts_with = "monitor_safety")]
    pub monitor_lambda: Option<f64>,
    /// λ = safety × the smallest dominating scale.
    #[arg(long)]
    pub monitor_safety: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimJob {
    pub config: SimConfig,
}

impl SimJob {
    pub fn seed(&self) -> Option<u64> {
        match self.config.initial {
            InitialData::Random { seed, .. } => Some(seed),
            _ => None,
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match &self.config.initial {
            InitialData::File { path } => vec![path.clone()],
            _ => Vec::new(),
        }
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

impl SimArgs {
    pub fn resolve(&self) -> CliResult<SimJob> {
        let kv = match &self.config {
            Some(p) => KvConfig::load(p)?,
            None => KvConfig::default(),
        };
        kv.reject_unknown(KNOWN_KEYS)?;
        let model = pick(self.model, kv.get("run.model")?).unwrap_or(Model::Qg2d);
        let alpha = pick(self.alpha, kv.get("run.alpha")?).unwrap_or(0.5);
        let nu = pick(self.nu, kv.get("run.nu")?).unwrap_or(0.1);
        let mut c = SimConfig::new(model, alpha, nu);
        if let Some(n) = pick(self.n, kv.get("run.n")?) {
            c.n = n;
        }
        if let Some(l) = pick(self.length, kv.get("run.length")?) {
            c.length = l;
        }
        if let Some(t) = pick(self.t_final, kv.get("run.t_final")?) {
            c.t_final = t;
        }
        let file_dt: Option<f64> = kv.get("run.dt")?;
        let file_cfl: Option<f64> = kv.get("run.cfl")?;
        c.time_step = match (self.dt, self.cfl, file_dt, file_cfl) {
            (Some(dt), _, _, _) => TimeStep::Fixed { dt },
            (None, Some(cfl), _, _) => TimeStep::Cfl { cfl },
            (None, None, Some(_), Some(_)) => {
                return Err(CliError::Input("config sets both run.dt and run.cfl".into()));
            }
            (None, None, Some(dt), None) => TimeStep::Fixed { dt },
            (None, None, None, Some(cfl)) => TimeStep::Cfl { cfl },
            (None, None, None, None) => c.time_step,
        };
        if let Some(s) = pick(self.stride, kv.get("run.stride")?) {
            c.stride = s;
        }
        if let Some(s) = pick(self.snapshot_stride, kv.get("run.snapshot_stride")?) {
            c.snapshot_stride = s;
        }
        if let Some(m) = pick(self.m, kv.get("run.m")?) {
            c.m = m;
        }
        let flag_gammas = self
            .gammas
            .as_deref()
            .map(parse_list)
            .transpose()
            .map_err(|_| CliError::Input(format!("bad --gammas '{}'", self.gammas.as_deref().unwrap_or(""))))?;
        if let Some(g) = pick(flag_gammas, kv.get_list("run.gammas")?) {
            c.gammas = g;
        }
        c.initial = self.resolve_initial(&kv, &c)?;
        c.monitor = self.resolve_monitor(&kv, &c)?;
        c.validate()?;
        c.grid()?;
        Ok(SimJob { config: c })
    }

    fn resolve_initial(&self, kv: &KvConfig, c: &SimConfig) -> CliResult<InitialData> {
        if self.zero {
            return Ok(InitialData::Zero);
        }
        if let Some(p) = &self.init {
            return Ok(InitialData::File { path: p.clone() });
        }
        let kind = if self.seed.is_some() { None } else { kv.get::<String>("initial.kind")? };
        match kind.as_deref() {
            Some("zero") => return Ok(InitialData::Zero),
            Some("file") => {
                let path: String = kv
                    .get("initial.path")?
                    .ok_or_else(|| CliError::Input("initial.kind = file needs initial.path".into()))?;
                return Ok(InitialData::File { path: PathBuf::from(path) });
            }
            Some("random") | None => {}
            Some(other) => {
                return Err(CliError::Input(format!(
                    "bad value '{other}' for config key 'initial.kind' (expected random, file or zero)"
                )));
            }
        }
        let InitialData::Random { seed, k_min, k_max, normalization } = c.initial.clone() else {
            unreachable!("defaults are random");
        };
        let normalization = match (self.hm, self.linf, kv.get("initial.hm")?, kv.get("initial.linf")?) {
            (Some(value), _, _, _) => Normalization::Hm { value },
            (None, Some(value), _, _) => Normalization::Linf { value },
            (None, None, Some(_), Some(_)) => {
                return Err(CliError::Input("config sets both initial.hm and initial.linf".into()));
            }
            (None, None, Some(value), None) => Normalization::Hm { value },
            (None, None, None, Some(value)) => Normalization::Linf { value },
            (None, None, None, None) => normalization,
        };
        Ok(InitialData::Random {
            seed: pick(self.seed, kv.get("initial.seed")?).unwrap_or(seed),
            k_min: pick(self.k_min, kv.get("initial.k_min")?).unwrap_or(k_min),
            k_max: pick(self.k_max, kv.get("initial.k_max")?).unwrap_or(k_max),
            normalization,
        })
    }

    fn resolve_monitor(&self, kv: &KvConfig, c: &SimConfig) -> CliResult<Option<MonitorSpec>> {
        let enabled = self.monitor
            || self.monitor_params.is_some()
            || self.monitor_lambda.is_some()
            || self.monitor_safety.is_some()
            || kv.get::<bool>("monitor.enabled")?.unwrap_or(false);
        if !enabled {
            return Ok(None);
        }
        let params = match &self.monitor_params {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                let p: MocParameters = serde_json::from_str(&text)
                    .map_err(|e| CliError::Input(format!("bad parameter file {}: {e}", path.display())))?;
                MocParameters::new(p.alpha(), p.r(), p.gamma(), p.delta())?
            }
            None => match (kv.get("monitor.gamma")?, kv.get("monitor.delta")?) {
                (Some(gamma), Some(delta)) => {
                    let r = kv.get("monitor.r")?.unwrap_or(1.0 + 0.5 * c.alpha);
                    MocParameters::new(c.alpha, r, gamma, delta)?
                }
                _ => {
                    let report = search_parameters(c.alpha, &EstimateConstants::default(), &SearchBudget::default())?;
                    report
                        .found
                        .ok_or_else(|| CliError::CheckFailed("no certified modulus found for the monitor".into()))?
                }
            },
        };
        if params.alpha() != c.alpha {
            return Err(CliError::Input(format!(
                "monitored modulus has alpha {} but the run uses {}",
                params.alpha(),
                c.alpha
            )));
        }
        let lambda = match (pick(self.monitor_lambda, kv.get("monitor.lambda")?), self.monitor_safety) {
            (Some(lambda), None) => LambdaChoice::Fixed { lambda },
            (_, Some(safety)) => LambdaChoice::Auto { safety },
            (None, None) => LambdaChoice::Auto { safety: kv.get("monitor.safety")?.unwrap_or(1.1) },
        };
        Ok(Some(MonitorSpec { omega: ModulusOfContinuity::explicit(params), lambda }))
    }
}

pub fn execute(job: &SimJob, out: &mut Outputs) -> CliResult<Status> {
    let result = run(&job.config)?;
    out.text("series.csv", &result.series.to_csv())?;
    out.json("report.json", &result.report)?;
    let mut index = Vec::new();
    for (i, (t, field)) in result.snapshots.iter().enumerate() {
        let name = format!("snapshots/snap_{i:04}.mocf");
        out.field(&name, field)?;
        index.push(serde_json::json!({ "file": name, "t": t }));
    }
    out.json("snapshots/index.json", &index)?;
    let r = &result.report;
    Ok(match r.aborted_at {
        Some(t) => Status::Aborted(format!(
            "aborted at t = {t}: {}; partial series kept",
            r.abort_reason.as_deref().unwrap_or("non-finite state")
        )),
        None => Status::Pass(format!(
            "completed {} steps, dt = {:e}, max principle {}, V(T) = {:e}",
            r.steps_taken,
            r.dt,
            if r.max_principle { "held" } else { "VIOLATED" },
            r.blowup_integral
        )),
    })
}
