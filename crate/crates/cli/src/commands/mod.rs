pub mod besov;
pub mod gen_field;
pub mod moc;
pub mod mollify;
pub mod simulate;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliResult;

/// A fully resolved command: no defaults or files left to consult except
/// the input fields it names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Job {
    MocVerify(moc::VerifyJob),
    MocSearch(moc::SearchJob),
    Simulate(simulate::SimJob),
    MollifyStudy(mollify::StudyJob),
    Besov(besov::BesovJob),
    GenField(gen_field::GenJob),
}

impl Job {
    pub fn name(&self) -> &'static str {
        match self {
            Job::MocVerify(_) => "moc-verify",
            Job::MocSearch(_) => "moc-search",
            Job::Simulate(_) => "simulate",
            Job::MollifyStudy(_) => "mollify-study",
            Job::Besov(_) => "besov",
            Job::GenField(_) => "gen-field",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Simulate(j) => j.seed(),
            Job::MollifyStudy(j) => j.seed(),
            Job::GenField(j) => j.seed(),
            _ => None,
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            Job::Simulate(j) => j.inputs(),
            Job::MollifyStudy(j) => j.inputs(),
            Job::Besov(j) => vec![j.field.clone()],
            _ => Vec::new(),
        }
    }

    pub fn execute(&self, out: &Path) -> CliResult<Completed> {
        std::fs::create_dir_all(out)?;
        let mut sink = Outputs { dir: out.to_path_buf(), written: Vec::new() };
        let status = match self {
            Job::MocVerify(j) => moc::verify(j, &mut sink)?,
            Job::MocSearch(j) => moc::search(j, &mut sink)?,
            Job::Simulate(j) => simulate::execute(j, &mut sink)?,
            Job::MollifyStudy(j) => mollify::execute(j, &mut sink)?,
            Job::Besov(j) => besov::execute(j, &mut sink)?,
            Job::GenField(j) => gen_field::execute(j, &mut sink)?,
        };
        Ok(Completed { status, outputs: sink.written })
    }
}

/// How a command that ran to the end turned out.
#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Pass(String),
    Failed(String),
    Aborted(String),
    /// The inputs admit no meaningful result (e.g. a degenerate fit).
    Invalid(String),
}

impl Status {
    pub fn code(&self) -> u8 {
        match self {
            Status::Pass(_) => 0,
            Status::Invalid(_) => 2,
            Status::Failed(_) => 3,
            Status::Aborted(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Status::Pass(m) | Status::Failed(m) | Status::Aborted(m) | Status::Invalid(m) => m,
        }
    }
}

pub struct Completed {
    pub status: Status,
    pub outputs: Vec<PathBuf>,
}

/// Atomic writer rooted at the output directory that records what it wrote.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn text(&mut self, name: &str, content: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        mocpde::io::write_atomic(&path, content.as_bytes())?;
        self.written.push(PathBuf::from(name));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn field(&mut self, name: &str, field: &mocpde::spectral::ScalarField) -> CliResult<()> {
        mocpde::spectral::snapshot::write_snapshot(&self.dir.join(name), field)?;
        self.written.push(PathBuf::from(name));
        Ok(())
    }
}
