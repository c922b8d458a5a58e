//! Plain-text `key = value` configuration. Units live in the key names.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Blockage,
    Se,
    Simulate,
    Allocate,
    Sweep,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Blockage => "blockage",
            Command::Se => "se",
            Command::Simulate => "simulate",
            Command::Allocate => "allocate",
            Command::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One invocation: what to run, where its settings come from and where
/// the table goes.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    /// `key=value` pairs applied after the config file, in order.
    pub overrides: Vec<String>,
    /// `None` writes to stdout.
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

const COMMON: &[(&str, &str)] = &[("seed", "1"), ("threads", "0")];

const NETWORK: &[(&str, &str)] = &[
    ("lambda_u_per_m2", "0.01"),
    ("lambda_m_per_m2", "1"),
    ("lambda_mu_per_m2", "1"),
    ("alpha_m", "2.5"),
    ("alpha_mu", "4"),
    ("theta_rad", "0.2617993877991494"),
    ("r_los_m", "10"),
    ("p_m_dl_w", "1"),
    ("p_m_ul_w", "0.2"),
    ("p_mu_dl_w", "1"),
    ("p_mu_ul_w", "0.2"),
];

const SE_GRID: &[(&str, &str)] = &[
    ("lambda_hat_min", "10"),
    ("lambda_hat_max", "1000"),
    ("lambda_hat_points", "3"),
    ("lambda_hat_list", ""),
];

const MONTE_CARLO: &[(&str, &str)] = &[
    ("replications", "200"),
    ("min_usable", "0"),
    ("max_replications", "200"),
    ("fading_draws", "20"),
    ("expected_users", "1000"),
    ("receivers", "typical"),
    ("decoupled", "false"),
];

const ALLOCATION: &[(&str, &str)] = &[
    ("lambda_u_per_m2", "0.0001"),
    ("lambda_hat_mu", "2"),
    ("lambda_hat_m_min", "1.05"),
    ("lambda_hat_m_max", "10000"),
    ("lambda_hat_m_points", "200"),
    ("lambda_hat_m_list", ""),
    ("alpha_m", "2.5"),
    ("alpha_mu", "4"),
    ("r_los_m", "49.61"),
    ("p_los", "density"),
    ("decoupled_los", "mmw"),
    ("a1_policy", "report"),
    ("w_m_hz", "500e6"),
    ("w_mu_hz", "20e6"),
    ("w_m_ul_hz", "100e6"),
    ("w_m_ul_source", "fixed"),
    ("f_s_hz", "244.14e3"),
    ("papr_threshold", "10"),
    ("papr_outage", "0.7"),
    ("zeta", "0.25"),
];

fn defaults(command: Command) -> Vec<(&'static str, &'static str)> {
    let mut out: Vec<(&str, &str)> = COMMON.to_vec();
    match command {
        Command::Blockage => out.push(("input_csv", "")),
        Command::Se => {
            out.extend_from_slice(NETWORK);
            out.extend_from_slice(SE_GRID);
            out.push(("tier", "both"));
            out.push(("direction", "both"));
            out.push(("mmw_bounds", "integral"));
        }
        Command::Simulate | Command::Sweep => {
            out.extend_from_slice(NETWORK);
            out.extend_from_slice(SE_GRID);
            out.extend_from_slice(MONTE_CARLO);
            let single = command == Command::Simulate;
            out.push(("tier", if single { "muw" } else { "both" }));
            out.push(("direction", if single { "dl" } else { "both" }));
            if single {
                // One point unless a grid or list is asked for.
                for (k, v) in out.iter_mut() {
                    if *k == "lambda_hat_list" {
                        *v = "100";
                    }
                }
            }
        }
        Command::Allocate => out.extend_from_slice(ALLOCATION),
    }
    out
}

/// Fully resolved settings for one command, in canonical key order.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub command: Command,
    entries: Vec<(&'static str, String)>,
}

impl Resolved {
    /// Defaults, then the config file, then the overrides.
    pub fn load(spec: &ExperimentSpec) -> Result<Self, CliError> {
        let mut r = Resolved {
            command: spec.command,
            entries: defaults(spec.command).into_iter().map(|(k, v)| (k, v.to_string())).collect(),
        };
        if let Some(path) = &spec.config_path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                r.apply(line)
                    .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            }
        }
        for o in &spec.overrides {
            r.apply(o).map_err(|e| CliError::Config(format!("override `{o}`: {e}")))?;
        }
        Ok(r)
    }

    fn apply(&mut self, assignment: &str) -> Result<(), String> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| "expected key=value".to_string())?;
        let key = key.trim();
        // Trailing comments are allowed after values.
        let value = value.split('#').next().unwrap_or("").trim();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => {
                slot.1 = value.to_string();
                Ok(())
            }
            None => Err(format!("unknown key `{key}` for command `{}`", self.command)),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &str)> {
        self.entries.iter().map(|(k, v)| (*k, v.as_str()))
    }

    pub fn raw(&self, key: &str) -> &str {
        self.entries
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("key `{key}` not registered for `{}`", self.command))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|e| CliError::Config(format!("key `{key}`: cannot parse `{raw}`: {e}")))
    }

    /// Comma-separated numbers; empty means `None`.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Ok(None);
        }
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::Config(format!("key `{key}`: cannot parse `{s}`: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(command: Command, overrides: &[&str]) -> ExperimentSpec {
        ExperimentSpec {
            command,
            config_path: None,
            overrides: overrides.iter().map(|s| s.to_string()).collect(),
            output_path: None,
            format: Format::Csv,
        }
    }

    #[test]
    fn overrides_apply_in_order() {
        let r = Resolved::load(&spec(Command::Se, &["alpha_mu=3", "alpha_mu = 3.5 # note"])).unwrap();
        assert_eq!(r.get::<f64>("alpha_mu").unwrap(), 3.5);
    }

    #[test]
    fn unknown_key_names_the_key() {
        let err = Resolved::load(&spec(Command::Allocate, &["w_m=5"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("`w_m`"), "{err}");
    }

    #[test]
    fn keys_are_scoped_to_commands() {
        assert!(Resolved::load(&spec(Command::Blockage, &["zeta=0.5"])).is_err());
        assert!(Resolved::load(&spec(Command::Allocate, &["zeta=0.5"])).is_ok());
    }

    #[test]
    fn list_parsing() {
        let r = Resolved::load(&spec(Command::Simulate, &["lambda_hat_list=10, 20"])).unwrap();
        assert_eq!(r.list("lambda_hat_list").unwrap(), Some(vec![10.0, 20.0]));
        let bad = Resolved::load(&spec(Command::Simulate, &["lambda_hat_list=10,x"])).unwrap();
        assert!(bad.list("lambda_hat_list").is_err());
    }

    #[test]
    fn missing_equals_is_config_error() {
        assert_eq!(Resolved::load(&spec(Command::Se, &["alpha_mu"])).unwrap_err().exit_code(), 2);
    }
}
