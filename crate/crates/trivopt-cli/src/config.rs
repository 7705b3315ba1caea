//! Run configuration: command-line flags merged over an optional
//! `key = value` file, validated into a [`RunConfig`].
//!
//! Precedence is flags over file over built-in defaults. Unknown keys
//! are rejected, and every error names the offending key so scripted
//! callers get stable diagnostics.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::Parser;
use trivopt::curvature::step_size;
use trivopt::manifolds::ManifoldSpec;

/// Benchmarks and verification suites for trivialised manifold
/// optimisation.
///
/// The optional config file holds `key = value` lines with `#`
/// comments; keys are spelled like the long flags. Flags override the
/// file. Exit codes: 0 success, 1 check failure, 2 divergence, 64
/// config error.
#[derive(Parser, Debug, Default)]
#[command(name = "trivopt", version, disable_help_subcommand = true)]
pub struct RawArgs {
    /// What to run: bench, verify, or expm-bench.
    pub command: Option<String>,

    /// Objective for bench: procrustes, rayleigh, karcher, or copy.
    #[arg(long)]
    pub problem: Option<String>,

    /// Matrix dimension of the manifold (hidden size for copy).
    #[arg(long)]
    pub n: Option<usize>,

    /// Secondary size: the number of Karcher input points.
    #[arg(long)]
    pub k: Option<usize>,

    /// Optimiser: gd, momentum, or adam.
    #[arg(long)]
    pub opt: Option<String>,

    /// Momentum coefficient, only with `opt = momentum`.
    #[arg(long)]
    pub beta: Option<f64>,

    /// Adam first-moment decay, only with `opt = adam`.
    #[arg(long)]
    pub beta1: Option<f64>,

    /// Adam second-moment decay, only with `opt = adam`.
    #[arg(long)]
    pub beta2: Option<f64>,

    /// Learning rate: a positive number, or `curvature` to derive the
    /// guaranteed step size from the manifold's curvature profile.
    #[arg(long)]
    pub lr: Option<String>,

    /// Objective smoothness bound, only with `lr = curvature`.
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Trust radius R for the curvature step size, only with
    /// `lr = curvature`.
    #[arg(long)]
    pub radius: Option<f64>,

    /// Stopping rule: never, always, everyk, or gradratio.
    #[arg(long)]
    pub rule: Option<String>,

    /// Switching period k, only with `rule = everyk`.
    #[arg(long = "k-every")]
    pub k_every: Option<u64>,

    /// Lower gradient-ratio threshold, only with `rule = gradratio`.
    #[arg(long = "eps-low")]
    pub eps_low: Option<f64>,

    /// Upper gradient-ratio threshold, only with `rule = gradratio`.
    #[arg(long = "eps-high")]
    pub eps_high: Option<f64>,

    /// Iteration budget for bench, trials per size for expm-bench.
    #[arg(long)]
    pub iters: Option<u64>,

    /// Seed for every pseudorandom choice in the run.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output path for the CSV trace or the check report.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Config file of `key = value` lines; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Run only checks whose name contains this substring (verify).
    #[arg(long)]
    pub check: Option<String>,

    /// Replace the built-in check tolerances with this absolute value
    /// (verify). Negative values force deterministic failures.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
}

/// Validation failures; each message names the offending key.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file `{path}`: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed line {line} in `{path}`: expected `key = value`, got `{text}`")]
    Syntax {
        path: PathBuf,
        line: usize,
        text: String,
    },
    #[error("unknown key `{key}` in `{path}`")]
    UnknownKey { key: String, path: PathBuf },
    #[error("malformed value for `{key}`: `{value}` (expected {expected})")]
    Malformed {
        key: &'static str,
        value: String,
        expected: &'static str,
    },
    #[error("missing required key `{key}`: {why}")]
    Missing { key: &'static str, why: &'static str },
    #[error("key `{key}` is only meaningful {requires}")]
    Conditional {
        key: &'static str,
        requires: &'static str,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliCommand {
    Bench,
    Verify,
    ExpmBench,
}

impl fmt::Display for CliCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CliCommand::Bench => "bench",
            CliCommand::Verify => "verify",
            CliCommand::ExpmBench => "expm-bench",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemChoice {
    Procrustes,
    Rayleigh,
    Karcher,
    Copy,
}

impl fmt::Display for ProblemChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemChoice::Procrustes => "procrustes",
            ProblemChoice::Rayleigh => "rayleigh",
            ProblemChoice::Karcher => "karcher",
            ProblemChoice::Copy => "copy",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptChoice {
    Gd,
    Momentum { beta: f64 },
    Adam { beta1: f64, beta2: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LrChoice {
    Fixed(f64),
    Curvature { alpha: f64, radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RuleChoice {
    Never,
    Always,
    EveryK(u64),
    GradRatio { low: f64, high: f64 },
}

/// A fully validated run description. The `Display` form echoes the
/// effective settings as config-file lines, so a run's configuration
/// can be captured and replayed verbatim.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CliCommand,
    pub problem: Option<ProblemChoice>,
    pub n: usize,
    pub k: usize,
    pub opt: OptChoice,
    pub lr: LrChoice,
    /// The numeric rate after resolving `lr = curvature`.
    pub effective_lr: f64,
    pub rule: RuleChoice,
    pub iters: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub check: Option<String>,
    pub tol: Option<f64>,
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command = {}", self.command)?;
        if self.command == CliCommand::Bench {
            if let Some(problem) = self.problem {
                writeln!(f, "problem = {problem}")?;
            }
            writeln!(f, "n = {}", self.n)?;
            writeln!(f, "k = {}", self.k)?;
            match self.opt {
                OptChoice::Gd => writeln!(f, "opt = gd")?,
                OptChoice::Momentum { beta } => {
                    writeln!(f, "opt = momentum")?;
                    writeln!(f, "beta = {beta}")?;
                }
                OptChoice::Adam { beta1, beta2 } => {
                    writeln!(f, "opt = adam")?;
                    writeln!(f, "beta1 = {beta1}")?;
                    writeln!(f, "beta2 = {beta2}")?;
                }
            }
            match self.lr {
                LrChoice::Fixed(lr) => writeln!(f, "lr = {lr}")?,
                LrChoice::Curvature { alpha, radius } => {
                    writeln!(f, "lr = curvature")?;
                    writeln!(f, "alpha = {alpha}")?;
                    writeln!(f, "radius = {radius}")?;
                }
            }
            match self.rule {
                RuleChoice::Never => writeln!(f, "rule = never")?,
                RuleChoice::Always => writeln!(f, "rule = always")?,
                RuleChoice::EveryK(k) => {
                    writeln!(f, "rule = everyk")?;
                    writeln!(f, "k-every = {k}")?;
                }
                RuleChoice::GradRatio { low, high } => {
                    writeln!(f, "rule = gradratio")?;
                    writeln!(f, "eps-low = {low}")?;
                    writeln!(f, "eps-high = {high}")?;
                }
            }
        }
        if self.command != CliCommand::Verify {
            writeln!(f, "iters = {}", self.iters)?;
        }
        writeln!(f, "seed = {}", self.seed)?;
        if self.command == CliCommand::Verify {
            if let Some(check) = &self.check {
                writeln!(f, "check = {check}")?;
            }
            if let Some(tol) = self.tol {
                writeln!(f, "tol = {tol}")?;
            }
        }
        writeln!(f, "out = {}", self.out.display())
    }
}

/// The ambient manifold a bench problem runs on, used to resolve
/// `lr = curvature` before any work starts.
pub fn problem_spec(problem: ProblemChoice, n: usize) -> ManifoldSpec {
    match problem {
        ProblemChoice::Procrustes => ManifoldSpec::special_orthogonal(n),
        ProblemChoice::Rayleigh => ManifoldSpec::sphere(n),
        ProblemChoice::Karcher => ManifoldSpec::spd(n),
        ProblemChoice::Copy => {
            let channels = 9 + 2;
            ManifoldSpec::product(vec![
                ManifoldSpec::special_orthogonal(n),
                ManifoldSpec::euclidean(n, channels),
                ManifoldSpec::euclidean(channels, n),
            ])
        }
    }
}

/// Read `path` as `key = value` lines into a second [`RawArgs`] layer.
/// Later occurrences of a key override earlier ones.
fn parse_file(path: &Path) -> Result<RawArgs, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::File {
        path: path.to_path_buf(),
        source,
    })?;
    let mut file = RawArgs::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = || ConfigError::Syntax {
            path: path.to_path_buf(),
            line: idx + 1,
            text: raw_line.trim().to_string(),
        };
        let (key, value) = line.split_once('=').ok_or_else(syntax)?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(syntax());
        }
        set_file_key(&mut file, key, value, path)?;
    }
    Ok(file)
}

fn set_file_key(
    file: &mut RawArgs,
    key: &str,
    value: &str,
    path: &Path,
) -> Result<(), ConfigError> {
    fn num<T: std::str::FromStr>(
        key: &'static str,
        value: &str,
        expected: &'static str,
    ) -> Result<T, ConfigError> {
        value.parse().map_err(|_| ConfigError::Malformed {
            key,
            value: value.to_string(),
            expected,
        })
    }
    match key {
        "command" => file.command = Some(value.to_string()),
        "problem" => file.problem = Some(value.to_string()),
        "n" => file.n = Some(num("n", value, "a positive integer")?),
        "k" => file.k = Some(num("k", value, "a positive integer")?),
        "opt" => file.opt = Some(value.to_string()),
        "beta" => file.beta = Some(num("beta", value, "a number in [0, 1)")?),
        "beta1" => file.beta1 = Some(num("beta1", value, "a number in [0, 1)")?),
        "beta2" => file.beta2 = Some(num("beta2", value, "a number in [0, 1)")?),
        "lr" => file.lr = Some(value.to_string()),
        "alpha" => file.alpha = Some(num("alpha", value, "a positive number")?),
        "radius" => file.radius = Some(num("radius", value, "a positive number")?),
        "rule" => file.rule = Some(value.to_string()),
        "k-every" => file.k_every = Some(num("k-every", value, "a positive integer")?),
        "eps-low" => file.eps_low = Some(num("eps-low", value, "a number in (0, 1)")?),
        "eps-high" => file.eps_high = Some(num("eps-high", value, "a number above 1")?),
        "iters" => file.iters = Some(num("iters", value, "a positive integer")?),
        "seed" => file.seed = Some(num("seed", value, "an unsigned integer")?),
        "out" => file.out = Some(PathBuf::from(value)),
        "check" => file.check = Some(value.to_string()),
        "tol" => file.tol = Some(num("tol", value, "a number")?),
        _ => {
            return Err(ConfigError::UnknownKey {
                key: key.to_string(),
                path: path.to_path_buf(),
            })
        }
    }
    Ok(())
}

/// Merge flags over file values and validate into a [`RunConfig`].
pub fn resolve(flags: RawArgs) -> Result<RunConfig, ConfigError> {
    let file = match &flags.config {
        Some(path) => parse_file(path)?,
        None => RawArgs::default(),
    };
    let pick = |a: Option<String>, b: Option<String>| a.or(b);

    let command = match pick(flags.command, file.command) {
        None => {
            return Err(ConfigError::Missing {
                key: "command",
                why: "choose bench, verify, or expm-bench",
            })
        }
        Some(c) => match c.as_str() {
            "bench" => CliCommand::Bench,
            "verify" => CliCommand::Verify,
            "expm-bench" => CliCommand::ExpmBench,
            other => {
                return Err(ConfigError::Malformed {
                    key: "command",
                    value: other.to_string(),
                    expected: "bench, verify, or expm-bench",
                })
            }
        },
    };

    let problem = match pick(flags.problem, file.problem) {
        None => None,
        Some(p) => Some(match p.as_str() {
            "procrustes" => ProblemChoice::Procrustes,
            "rayleigh" => ProblemChoice::Rayleigh,
            "karcher" => ProblemChoice::Karcher,
            "copy" => ProblemChoice::Copy,
            other => {
                return Err(ConfigError::Malformed {
                    key: "problem",
                    value: other.to_string(),
                    expected: "procrustes, rayleigh, karcher, or copy",
                })
            }
        }),
    };
    if command == CliCommand::Bench && problem.is_none() {
        return Err(ConfigError::Missing {
            key: "problem",
            why: "bench needs an objective to run",
        });
    }
    if command != CliCommand::Bench && problem.is_some() {
        return Err(ConfigError::Conditional {
            key: "problem",
            requires: "with `command = bench`",
        });
    }

    let n = flags.n.or(file.n).unwrap_or(4);
    if n < 2 {
        return Err(ConfigError::Malformed {
            key: "n",
            value: n.to_string(),
            expected: "an integer of at least 2",
        });
    }
    let k = flags.k.or(file.k).unwrap_or(2);
    if k < 1 {
        return Err(ConfigError::Malformed {
            key: "k",
            value: k.to_string(),
            expected: "a positive integer",
        });
    }

    let beta = flags.beta.or(file.beta);
    let beta1 = flags.beta1.or(file.beta1);
    let beta2 = flags.beta2.or(file.beta2);
    let opt = match pick(flags.opt, file.opt).as_deref().unwrap_or("gd") {
        "gd" => {
            if beta.is_some() {
                return Err(ConfigError::Conditional {
                    key: "beta",
                    requires: "with `opt = momentum`",
                });
            }
            if beta1.is_some() || beta2.is_some() {
                return Err(ConfigError::Conditional {
                    key: "beta1",
                    requires: "with `opt = adam`",
                });
            }
            OptChoice::Gd
        }
        "momentum" => {
            if beta1.is_some() || beta2.is_some() {
                return Err(ConfigError::Conditional {
                    key: "beta1",
                    requires: "with `opt = adam`",
                });
            }
            let beta = beta.unwrap_or(0.9);
            if !(0.0..1.0).contains(&beta) {
                return Err(ConfigError::Malformed {
                    key: "beta",
                    value: beta.to_string(),
                    expected: "a number in [0, 1)",
                });
            }
            OptChoice::Momentum { beta }
        }
        "adam" => {
            if beta.is_some() {
                return Err(ConfigError::Conditional {
                    key: "beta",
                    requires: "with `opt = momentum`",
                });
            }
            let beta1 = beta1.unwrap_or(0.9);
            let beta2 = beta2.unwrap_or(0.999);
            for (key, b) in [("beta1", beta1), ("beta2", beta2)] {
                if !(0.0..1.0).contains(&b) {
                    return Err(ConfigError::Malformed {
                        key: if key == "beta1" { "beta1" } else { "beta2" },
                        value: b.to_string(),
                        expected: "a number in [0, 1)",
                    });
                }
            }
            OptChoice::Adam { beta1, beta2 }
        }
        other => {
            return Err(ConfigError::Malformed {
                key: "opt",
                value: other.to_string(),
                expected: "gd, momentum, or adam",
            })
        }
    };

    let alpha = flags.alpha.or(file.alpha);
    let radius = flags.radius.or(file.radius);
    let lr_raw = pick(flags.lr, file.lr).unwrap_or_else(|| "0.1".to_string());
    let lr = if lr_raw == "curvature" {
        if command != CliCommand::Bench {
            return Err(ConfigError::Conditional {
                key: "lr",
                requires: "as `curvature` with `command = bench`",
            });
        }
        let alpha = alpha.ok_or(ConfigError::Missing {
            key: "alpha",
            why: "`lr = curvature` needs the objective's smoothness bound",
        })?;
        let radius = radius.ok_or(ConfigError::Missing {
            key: "radius",
            why: "`lr = curvature` needs the trust radius R",
        })?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(ConfigError::Malformed {
                key: "alpha",
                value: alpha.to_string(),
                expected: "a positive number",
            });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(ConfigError::Malformed {
                key: "radius",
                value: radius.to_string(),
                expected: "a positive number",
            });
        }
        LrChoice::Curvature { alpha, radius }
    } else {
        if alpha.is_some() || radius.is_some() {
            return Err(ConfigError::Conditional {
                key: if alpha.is_some() { "alpha" } else { "radius" },
                requires: "with `lr = curvature`",
            });
        }
        let v: f64 = lr_raw.parse().map_err(|_| ConfigError::Malformed {
            key: "lr",
            value: lr_raw.clone(),
            expected: "a positive number or `curvature`",
        })?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(ConfigError::Malformed {
                key: "lr",
                value: lr_raw,
                expected: "a positive number or `curvature`",
            });
        }
        LrChoice::Fixed(v)
    };

    let effective_lr = match lr {
        LrChoice::Fixed(v) => v,
        LrChoice::Curvature { alpha, radius } => {
            let problem = problem.expect("curvature mode is bench-only");
            let profile =
                problem_spec(problem, n)
                    .curvature()
                    .ok_or(ConfigError::Malformed {
                        key: "lr",
                        value: "curvature".to_string(),
                        expected: "a problem whose manifold has a curvature profile",
                    })?;
            step_size(&profile, alpha, radius).map_err(|_| ConfigError::Malformed {
                key: "radius",
                value: radius.to_string(),
                expected: "a radius whose half stays inside the curvature bound domain",
            })?
        }
    };

    let k_every = flags.k_every.or(file.k_every);
    let eps_low = flags.eps_low.or(file.eps_low);
    let eps_high = flags.eps_high.or(file.eps_high);
    let rule = match pick(flags.rule, file.rule).as_deref().unwrap_or("never") {
        "everyk" => {
            if eps_low.is_some() || eps_high.is_some() {
                return Err(ConfigError::Conditional {
                    key: "eps-low",
                    requires: "with `rule = gradratio`",
                });
            }
            let k = k_every.ok_or(ConfigError::Missing {
                key: "k-every",
                why: "`rule = everyk` needs its switching period k",
            })?;
            if k == 0 {
                return Err(ConfigError::Malformed {
                    key: "k-every",
                    value: "0".to_string(),
                    expected: "a positive integer",
                });
            }
            RuleChoice::EveryK(k)
        }
        "gradratio" => {
            if k_every.is_some() {
                return Err(ConfigError::Conditional {
                    key: "k-every",
                    requires: "with `rule = everyk`",
                });
            }
            let low = eps_low.unwrap_or(0.1);
            let high = eps_high.unwrap_or(10.0);
            if !(low > 0.0 && low < 1.0) {
                return Err(ConfigError::Malformed {
                    key: "eps-low",
                    value: low.to_string(),
                    expected: "a number in (0, 1)",
                });
            }
            if !(high > 1.0 && high.is_finite()) {
                return Err(ConfigError::Malformed {
                    key: "eps-high",
                    value: high.to_string(),
                    expected: "a finite number above 1",
                });
            }
            RuleChoice::GradRatio { low, high }
        }
        plain @ ("never" | "always") => {
            if k_every.is_some() {
                return Err(ConfigError::Conditional {
                    key: "k-every",
                    requires: "with `rule = everyk`",
                });
            }
            if eps_low.is_some() || eps_high.is_some() {
                return Err(ConfigError::Conditional {
                    key: "eps-low",
                    requires: "with `rule = gradratio`",
                });
            }
            if plain == "never" {
                RuleChoice::Never
            } else {
                RuleChoice::Always
            }
        }
        other => {
            return Err(ConfigError::Malformed {
                key: "rule",
                value: other.to_string(),
                expected: "never, always, everyk, or gradratio",
            })
        }
    };

    let iters = flags.iters.or(file.iters).unwrap_or(100);
    if iters == 0 {
        return Err(ConfigError::Malformed {
            key: "iters",
            value: "0".to_string(),
            expected: "a positive integer",
        });
    }
    let seed = flags.seed.or(file.seed).unwrap_or(0);

    let check = pick(flags.check, file.check);
    let tol = flags.tol.or(file.tol);
    if command != CliCommand::Verify {
        if check.is_some() {
            return Err(ConfigError::Conditional {
                key: "check",
                requires: "with `command = verify`",
            });
        }
        if tol.is_some() {
            return Err(ConfigError::Conditional {
                key: "tol",
                requires: "with `command = verify`",
            });
        }
    }
    if let Some(t) = tol {
        if !t.is_finite() {
            return Err(ConfigError::Malformed {
                key: "tol",
                value: t.to_string(),
                expected: "a finite number",
            });
        }
    }

    let out = flags.out.or(file.out).unwrap_or_else(|| {
        PathBuf::from(match command {
            CliCommand::Bench => "trace.csv",
            CliCommand::Verify => "report.txt",
            CliCommand::ExpmBench => "expm.csv",
        })
    });

    Ok(RunConfig {
        command,
        problem,
        n,
        k,
        opt,
        lr,
        effective_lr,
        rule,
        iters,
        seed,
        out,
        check,
        tol,
    })
}
