//! Scenario files: a world section, an injection list, a program
//! reference and the run configuration, in one TOML document.
//!
//! ```toml
//! [world]
//! target_room = "room"
//! [[world.doors]]
//! id = "frontDoor"
//!
//! [[injections]]
//! t = 4
//! effect = { kind = "lockDoor", door = "frontDoor" }
//!
//! [program]
//! file = "enter.bhv"   # or: source = "bt = doTask"
//! entry = "bt"
//!
//! [cfg]
//! seed = 0
//! max_ticks = 1000
//! test_poll_period = 1
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::behavior::{run, RunReport};
use crate::dsl::{self, Val};
use crate::exec::ExecConfig;
use crate::Ticks;

use super::world::{Injection, SimWorld, WorldConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    world: WorldConfig,
    #[serde(default)]
    injections: Vec<Injection>,
    program: ProgramRef,
    #[serde(default)]
    cfg: RunCfg,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProgramRef {
    #[serde(default)]
    file: Option<PathBuf>,
    #[serde(default)]
    source: Option<String>,
    #[serde(default = "default_entry")]
    entry: String,
}

fn default_entry() -> String {
    "bt".to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunCfg {
    seed: u64,
    max_ticks: Ticks,
    test_poll_period: Ticks,
}

impl Default for RunCfg {
    fn default() -> Self {
        RunCfg {
            seed: 0,
            max_ticks: 10_000,
            test_poll_period: 1,
        }
    }
}

/// A loaded scenario, ready to run (possibly after overrides).
#[derive(Debug, Clone)]
pub struct Scenario {
    pub world: WorldConfig,
    pub injections: Vec<Injection>,
    pub program_text: String,
    /// Name used for the program in diagnostics.
    pub program_name: String,
    pub entry: String,
    pub exec: ExecConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid scenario file: {0}")]
    Format(String),
    #[error("{0}")]
    World(#[from] super::world::SimConfigError),
    #[error("{}", diag.render(file))]
    Program { file: String, diag: dsl::Diag },
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let file: ScenarioFile =
            toml::from_str(&text).map_err(|e| ScenarioError::Format(e.to_string()))?;
        let (program_text, program_name) = match (&file.program.file, &file.program.source) {
            (Some(rel), None) => {
                let full = path.parent().unwrap_or(Path::new(".")).join(rel);
                let text = std::fs::read_to_string(&full).map_err(|source| ScenarioError::Io {
                    path: full.clone(),
                    source,
                })?;
                (text, full.display().to_string())
            }
            (None, Some(src)) => (src.clone(), "<inline>".to_string()),
            _ => {
                return Err(ScenarioError::Format(
                    "program needs exactly one of `file` or `source`".to_string(),
                ))
            }
        };
        Ok(Scenario {
            world: file.world,
            injections: file.injections,
            program_text,
            program_name,
            entry: file.program.entry,
            exec: ExecConfig {
                test_poll_period: file.cfg.test_poll_period,
                max_ticks: file.cfg.max_ticks,
                seed: file.cfg.seed,
            },
        })
    }

    /// Execute the scenario; also hands back the world for inspection.
    pub fn run(&self) -> Result<(RunReport<Val>, SimWorld), ScenarioError> {
        if self.exec.test_poll_period < 1 {
            return Err(ScenarioError::Format(
                "test_poll_period must be >= 1".to_string(),
            ));
        }
        if self.exec.max_ticks < 1 {
            return Err(ScenarioError::Format("max_ticks must be >= 1".to_string()));
        }
        let sim = SimWorld::new(self.world.clone(), self.exec.seed)?;
        let lib = dsl::sim_library(&sim);
        let behavior = dsl::compile(&self.program_text, &lib, &self.entry).map_err(|diag| {
            ScenarioError::Program {
                file: self.program_name.clone(),
                diag,
            }
        })?;
        let drivers = sim.drivers(self.injections.clone())?;
        let report = run(&behavior, self.exec.clone(), drivers);
        Ok((report, sim))
    }
}
