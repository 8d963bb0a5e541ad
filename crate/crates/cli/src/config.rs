//! Validated settings of a `generate` run.

use std::fs;
use std::path::PathBuf;

use symab::engine::{ExpansionPolicy, Schedule};
use symab::{standard_generators, Family, GeneratorSet, HypercubeWindow};

use crate::error::{CliError, Phase};
use crate::{DagFormat, GenerateArgs};

/// Largest `subsets x window points` product run without `--full-run`.
pub const DESK_WORK_LIMIT: u128 = 2_000_000_000;

const FULL_RUN: (usize, u32, i64) = (4, 12, 12);

#[derive(Debug)]
pub enum GeneratorSource {
    Standard { n: usize, tau: u32 },
    File(PathBuf),
}

#[derive(Debug)]
pub struct RunConfig {
    pub source: GeneratorSource,
    pub set: GeneratorSet,
    pub window: HypercubeWindow,
    pub tau: u32,
    pub policy: ExpansionPolicy,
    pub schedule: Schedule,
    pub scheduled: u64,
    pub strict: bool,
    pub out: PathBuf,
    pub format: DagFormat,
    pub full_run: bool,
    pub dry_run: bool,
    pub calibrate: bool,
}

impl RunConfig {
    /// Checks every flag against the module preconditions; loads the
    /// generator file if one is named.
    pub fn from_args(args: &GenerateArgs) -> Result<RunConfig, CliError> {
        let preset = args.full_run && args.generators.is_none() && args.n.is_none() && args.tau.is_none();
        let (n0, tau0, b0) = if preset { FULL_RUN } else { (2, 2, 2) };
        let tau = args.tau.unwrap_or(tau0);
        if tau == 0 {
            return Err(CliError::Usage("--tau must be at least 1".into()));
        }
        let (source, set) = match &args.generators {
            Some(path) => {
                if args.tau.is_some() {
                    return Err(CliError::Usage("--tau applies to the standard generators only".into()));
                }
                let text = fs::read_to_string(path).data(&path.display().to_string())?;
                let set = GeneratorSet::from_json(&text).data(&path.display().to_string())?;
                if let Some(n) = args.n {
                    if set.family() == Family::Affine && n != set.dim() {
                        return Err(CliError::Usage(format!("--n {n} but the generator file has dimension {}", set.dim())));
                    }
                }
                (GeneratorSource::File(path.clone()), set)
            }
            None => {
                let n = args.n.unwrap_or(n0);
                let set = standard_generators(n, tau).usage("standard generators")?;
                (GeneratorSource::Standard { n, tau }, set)
            }
        };
        let window = match set.table_size() {
            Some(size) => {
                if args.lo.is_some() || args.hi.is_some() {
                    return Err(CliError::Usage("table generators act on [0, size - 1]; drop --lo/--hi".into()));
                }
                HypercubeWindow::finite_set(size).usage("window")?
            }
            None if set.family() == Family::Table => {
                return Err(CliError::Usage("an empty table set has no window".into()));
            }
            None => {
                let default = if preset { b0 } else { tau as i64 };
                let lo = args.lo.unwrap_or(-default);
                let hi = args.hi.unwrap_or(default);
                HypercubeWindow::cube(set.dim(), lo, hi).usage("window")?
            }
        };
        let policy = ExpansionPolicy::new(args.delta_k, args.max_k);
        policy.validate(window.dim()).usage("expansion policy")?;
        let schedule = if args.no_prune { Schedule::All } else { Schedule::PeriodPruned };
        let scheduled = schedule.count(&set).usage("schedule")?;
        if args.calibrate && set.family() == Family::Table {
            return Err(CliError::Usage("--calibrate needs affine generators".into()));
        }
        Ok(RunConfig {
            source,
            set,
            window,
            tau,
            policy,
            schedule,
            scheduled,
            strict: args.strict,
            out: args.out.clone(),
            format: args.format,
            full_run: args.full_run,
            dry_run: args.dry_run,
            calibrate: args.calibrate,
        })
    }

    pub fn work(&self) -> u128 {
        self.scheduled as u128 * self.window.len() as u128
    }

    pub fn describe_source(&self) -> String {
        match &self.source {
            GeneratorSource::Standard { n, tau } => format!("standard (n={n}, tau={tau})"),
            GeneratorSource::File(p) => p.display().to_string(),
        }
    }
}
