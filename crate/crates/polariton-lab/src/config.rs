//! Strict INI-style run configuration: flat `key = value` pairs under
//! `[system]`, `[run]`, and `[output]` sections. Unknown keys, unknown
//! sections, duplicates, and malformed values are all rejected with the
//! offending key and line number.

use std::collections::HashSet;

use crate::fluorescence::Backend;
use crate::params::SystemParams;
use crate::{Error, Result};

/// Output table format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Tsv,
}

impl OutputFormat {
    pub fn separator(&self) -> char {
        match self {
            OutputFormat::Csv => ',',
            OutputFormat::Tsv => '\t',
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Tsv => "tsv",
        }
    }
}

/// Subcommand-specific settings (`[run]` section). Every field has a
/// documented default; only the fields a subcommand reads matter to it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    /// Frequency grid for `spectrum` (default −8, 8, 4001 points).
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    /// Drive grid for `stark` (default 0 to 0.5, 101 points).
    pub ep_min: f64,
    pub ep_max: f64,
    pub ep_points: usize,
    /// Explicit drive list for multi-curve runs (default: the system drive).
    pub ep_list: Vec<f64>,
    /// Highest manifold for `manifolds`/`couplings` (default 3).
    pub n_max: usize,
    /// Keep cross-damping entries when assembling the polariton generator
    /// (default true).
    pub offdiagonal_damping: bool,
    /// Resolvent backend for `spectrum` (default `schur`).
    pub backend: Backend,
    /// Relative peak prominence threshold (default 1e-4).
    pub prominence: f64,
    /// Transition-assignment window (default 0.1).
    pub window: f64,
    /// Which canned dataset `figures` produces: `fig4`..`fig7` or `all`
    /// (default `all`).
    pub figure: String,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            omega_min: -8.0,
            omega_max: 8.0,
            omega_points: 4001,
            ep_min: 0.0,
            ep_max: 0.5,
            ep_points: 101,
            ep_list: Vec::new(),
            n_max: 3,
            offdiagonal_damping: true,
            backend: Backend::SchurResolvent,
            prominence: 1e-4,
            window: 0.1,
            figure: "all".into(),
        }
    }
}

/// `[output]` section.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    /// Output directory (default `out`); a `--out` flag overrides it.
    pub dir: String,
    /// Table format (default csv).
    pub format: OutputFormat,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            dir: "out".into(),
            format: OutputFormat::Csv,
        }
    }
}

/// A fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemParams,
    pub run: RunSettings,
    pub output: OutputSettings,
}

fn config_err(line_no: usize, msg: impl AsRef<str>) -> Error {
    Error::Config(format!("line {line_no}: {}", msg.as_ref()))
}

fn parse_f64(key: &str, value: &str, line_no: usize) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| config_err(line_no, format!("key `{key}`: `{value}` is not a number")))
}

fn parse_usize(key: &str, value: &str, line_no: usize) -> Result<usize> {
    value.parse::<usize>().map_err(|_| {
        config_err(
            line_no,
            format!("key `{key}`: `{value}` is not a nonnegative integer"),
        )
    })
}

fn parse_bool(key: &str, value: &str, line_no: usize) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(config_err(
            line_no,
            format!("key `{key}`: `{value}` is not `true`/`false`"),
        )),
    }
}

fn parse_f64_list(key: &str, value: &str, line_no: usize) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse_f64(key, s.trim(), line_no))
        .collect()
}

/// Parse and validate a configuration. The `[system]` section requires
/// `g1`, `g2`, `omega_c`, and `kappa`; detunings and decay rates default to
/// 0, `ep` to 0, `n_trunc` to 15. All `[run]` and `[output]` keys are
/// optional.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    #[derive(PartialEq, Clone, Copy)]
    enum Section {
        None,
        System,
        Run,
        Output,
    }

    let mut system = SystemParams {
        g1: f64::NAN,
        g2: f64::NAN,
        omega_c: f64::NAN,
        delta: 0.0,
        big_delta: 0.0,
        gamma1: 0.0,
        gamma2: 0.0,
        gamma3: 0.0,
        kappa: f64::NAN,
        ep: 0.0,
        n_trunc: 15,
    };
    let mut run = RunSettings::default();
    let mut output = OutputSettings::default();
    let mut section = Section::None;
    let mut seen: HashSet<(u8, String)> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if line.starts_with('[') {
            section = match line {
                "[system]" => Section::System,
                "[run]" => Section::Run,
                "[output]" => Section::Output,
                _ => return Err(config_err(line_no, format!("unknown section `{line}`"))),
            };
            continue;
        }
        let Some((key_raw, value_raw)) = line.split_once('=') else {
            return Err(config_err(line_no, format!("expected `key = value`, got `{line}`")));
        };
        let key = key_raw.trim();
        let value = value_raw.trim();
        let section_tag = match section {
            Section::None => {
                return Err(config_err(
                    line_no,
                    format!("key `{key}` appears before any section header"),
                ));
            }
            Section::System => 0u8,
            Section::Run => 1,
            Section::Output => 2,
        };
        if !seen.insert((section_tag, key.to_string())) {
            return Err(config_err(line_no, format!("duplicate key `{key}`")));
        }
        match section {
            Section::None => unreachable!("sectionless keys rejected above"),
            Section::System => match key {
                "g1" => system.g1 = parse_f64(key, value, line_no)?,
                "g2" => system.g2 = parse_f64(key, value, line_no)?,
                "omega_c" => system.omega_c = parse_f64(key, value, line_no)?,
                "delta" => system.delta = parse_f64(key, value, line_no)?,
                "big_delta" => system.big_delta = parse_f64(key, value, line_no)?,
                "gamma1" => system.gamma1 = parse_f64(key, value, line_no)?,
                "gamma2" => system.gamma2 = parse_f64(key, value, line_no)?,
                "gamma3" => system.gamma3 = parse_f64(key, value, line_no)?,
                "kappa" => system.kappa = parse_f64(key, value, line_no)?,
                "ep" => system.ep = parse_f64(key, value, line_no)?,
                "n_trunc" => system.n_trunc = parse_usize(key, value, line_no)?,
                _ => {
                    return Err(config_err(
                        line_no,
                        format!("unknown key `{key}` in [system]"),
                    ));
                }
            },
            Section::Run => match key {
                "omega_min" => run.omega_min = parse_f64(key, value, line_no)?,
                "omega_max" => run.omega_max = parse_f64(key, value, line_no)?,
                "omega_points" => run.omega_points = parse_usize(key, value, line_no)?,
                "ep_min" => run.ep_min = parse_f64(key, value, line_no)?,
                "ep_max" => run.ep_max = parse_f64(key, value, line_no)?,
                "ep_points" => run.ep_points = parse_usize(key, value, line_no)?,
                "ep_list" => run.ep_list = parse_f64_list(key, value, line_no)?,
                "n_max" => run.n_max = parse_usize(key, value, line_no)?,
                "offdiagonal_damping" => {
                    run.offdiagonal_damping = parse_bool(key, value, line_no)?
                }
                "backend" => {
                    run.backend = match value {
                        "schur" => Backend::SchurResolvent,
                        "lu" => Backend::DenseLu,
                        "eigen" => Backend::EigenResidues,
                        _ => {
                            return Err(config_err(
                                line_no,
                                format!("key `backend`: `{value}` is not schur/lu/eigen"),
                            ));
                        }
                    }
                }
                "prominence" => run.prominence = parse_f64(key, value, line_no)?,
                "window" => run.window = parse_f64(key, value, line_no)?,
                "figure" => {
                    if !matches!(value, "all" | "fig4" | "fig5" | "fig6" | "fig7") {
                        return Err(config_err(
                            line_no,
                            format!("key `figure`: `{value}` is not fig4..fig7/all"),
                        ));
                    }
                    run.figure = value.to_string();
                }
                _ => {
                    return Err(config_err(line_no, format!("unknown key `{key}` in [run]")));
                }
            },
            Section::Output => match key {
                "dir" => output.dir = value.to_string(),
                "format" => {
                    output.format = match value {
                        "csv" => OutputFormat::Csv,
                        "tsv" => OutputFormat::Tsv,
                        _ => {
                            return Err(config_err(
                                line_no,
                                format!("key `format`: `{value}` is not csv/tsv"),
                            ));
                        }
                    }
                }
                _ => {
                    return Err(config_err(
                        line_no,
                        format!("unknown key `{key}` in [output]"),
                    ));
                }
            },
        }
    }

    for (name, v) in [
        ("g1", system.g1),
        ("g2", system.g2),
        ("omega_c", system.omega_c),
        ("kappa", system.kappa),
    ] {
        if v.is_nan() {
            return Err(Error::Config(format!(
                "missing required key `{name}` in [system]"
            )));
        }
    }
    system
        .validate()
        .map_err(|e| Error::Config(format!("[system] invariant violated: {e}")))?;
    if run.omega_points < 2 {
        return Err(Error::Config("omega_points must be at least 2".into()));
    }
    if run.ep_points < 1 {
        return Err(Error::Config("ep_points must be at least 1".into()));
    }
    if !(run.omega_min < run.omega_max) {
        return Err(Error::Config("omega_min must be below omega_max".into()));
    }
    if !(run.prominence >= 0.0) || !(run.window > 0.0) {
        return Err(Error::Config(
            "prominence must be nonnegative and window positive".into(),
        ));
    }
    Ok(RunConfig {
        system,
        run,
        output,
    })
}

fn fmt_float(x: f64) -> String {
    // shortest representation that round-trips exactly
    format!("{x}")
}

/// Serialize a configuration back to the INI format accepted by
/// [`parse_config`]; parsing the result reproduces the configuration
/// exactly.
pub fn to_ini_string(cfg: &RunConfig) -> String {
    let mut s = String::new();
    s.push_str("[system]\n");
    for (k, v) in [
        ("g1", cfg.system.g1),
        ("g2", cfg.system.g2),
        ("omega_c", cfg.system.omega_c),
        ("delta", cfg.system.delta),
        ("big_delta", cfg.system.big_delta),
        ("gamma1", cfg.system.gamma1),
        ("gamma2", cfg.system.gamma2),
        ("gamma3", cfg.system.gamma3),
        ("kappa", cfg.system.kappa),
        ("ep", cfg.system.ep),
    ] {
        s.push_str(&format!("{k} = {}\n", fmt_float(v)));
    }
    s.push_str(&format!("n_trunc = {}\n", cfg.system.n_trunc));
    s.push_str("\n[run]\n");
    s.push_str(&format!("omega_min = {}\n", fmt_float(cfg.run.omega_min)));
    s.push_str(&format!("omega_max = {}\n", fmt_float(cfg.run.omega_max)));
    s.push_str(&format!("omega_points = {}\n", cfg.run.omega_points));
    s.push_str(&format!("ep_min = {}\n", fmt_float(cfg.run.ep_min)));
    s.push_str(&format!("ep_max = {}\n", fmt_float(cfg.run.ep_max)));
    s.push_str(&format!("ep_points = {}\n", cfg.run.ep_points));
    if !cfg.run.ep_list.is_empty() {
        let list: Vec<String> = cfg.run.ep_list.iter().map(|v| fmt_float(*v)).collect();
        s.push_str(&format!("ep_list = {}\n", list.join(", ")));
    }
    s.push_str(&format!("n_max = {}\n", cfg.run.n_max));
    s.push_str(&format!(
        "offdiagonal_damping = {}\n",
        cfg.run.offdiagonal_damping
    ));
    let backend = match cfg.run.backend {
        Backend::SchurResolvent => "schur",
        Backend::DenseLu => "lu",
        Backend::EigenResidues => "eigen",
    };
    s.push_str(&format!("backend = {backend}\n"));
    s.push_str(&format!("prominence = {}\n", fmt_float(cfg.run.prominence)));
    s.push_str(&format!("window = {}\n", fmt_float(cfg.run.window)));
    s.push_str(&format!("figure = {}\n", cfg.run.figure));
    s.push_str("\n[output]\n");
    s.push_str(&format!("dir = {}\n", cfg.output.dir));
    s.push_str(&format!("format = {}\n", cfg.output.format.extension()));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[system]\ng1 = 6.0\ng2 = 6.0\nomega_c = 2.0\nkappa = 1.0\n";

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.system.g1, 6.0);
        assert_eq!(cfg.system.n_trunc, 15);
        assert_eq!(cfg.system.ep, 0.0);
        assert_eq!(cfg.run.omega_points, 4001);
        assert_eq!(cfg.output.format, OutputFormat::Csv);
    }

    #[test]
    fn scientific_notation_is_accepted() {
        let text = format!("{MINIMAL}gamma1 = 1.0e-1\nep = 4.5E-1\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.system.gamma1, 0.1);
        assert_eq!(cfg.system.ep, 0.45);
    }

    #[test]
    fn unknown_key_is_rejected_with_the_line() {
        let text = format!("{MINIMAL}coupling = 3\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("coupling") && err.contains("line 6"), "{err}");
    }

    #[test]
    fn duplicate_and_sectionless_keys_are_rejected() {
        let text = format!("{MINIMAL}g1 = 7\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
        let err = parse_config("g1 = 6\n").unwrap_err().to_string();
        assert!(err.contains("before any section"), "{err}");
    }

    #[test]
    fn invariant_violations_are_rejected() {
        let text = format!("{MINIMAL}n_trunc = 2\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("invariant"), "{err}");
        let text = "[system]\ng1 = 6\ng2 = 6\nomega_c = 2\n";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("kappa"), "{err}");
    }

    #[test]
    fn bad_numbers_name_key_and_line() {
        let text = format!("{MINIMAL}ep = fast\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("ep") && err.contains("not a number"), "{err}");
    }

    #[test]
    fn round_trip_is_exact() {
        let text = format!(
            "{MINIMAL}delta = 0.30000000000000004\nep = 1e-3\n\n[run]\nbackend = lu\n\
             ep_list = 0.02, 0.06, 0.45\nomega_points = 11\n\n[output]\nformat = tsv\n"
        );
        let cfg = parse_config(&text).unwrap();
        let round = parse_config(&to_ini_string(&cfg)).unwrap();
        assert_eq!(cfg, round);
    }
}
