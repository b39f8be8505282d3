//! Experiment runners behind the CLI subcommands: deterministic CSV/TSV
//! emission, JSON peak sidecars, the aggregate validation run, and the
//! canned figure datasets.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray_linalg::{Eigh, UPLO};

use crate::basis::BareBasis;
use crate::config::{parse_config, OutputFormat, RunConfig};
use crate::dressed;
use crate::fluorescence::{self, Backend, SpectrumEngine, SpectrumTrace};
use crate::lindblad;
use crate::operators;
use crate::params::SystemParams;
use crate::peaks::{self, Peak};
use crate::polariton;
use crate::stark;
use crate::{Error, Result};

/// Bundled parameter sets behind the `figures` subcommand; also usable
/// directly as `--config` files.
pub const FIG4_PRESET: &str = include_str!("../presets/fig4.ini");
pub const FIG5_PRESET: &str = include_str!("../presets/fig5.ini");
pub const FIG6_PRESET: &str = include_str!("../presets/fig6.ini");
pub const FIG7_PRESET: &str = include_str!("../presets/fig7.ini");

const SUBCOMMANDS: [&str; 6] = [
    "manifolds",
    "couplings",
    "stark",
    "spectrum",
    "validate",
    "figures",
];

/// Run one subcommand, writing artifacts into `out_dir` (which overrides
/// the configured output directory when given). Returns the process exit
/// status: 0 for success, 2 when `validate` finds a tolerance violation.
pub fn run_subcommand(name: &str, config: &RunConfig, out_dir: Option<&Path>) -> Result<i32> {
    let dir: PathBuf = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&config.output.dir));
    fs::create_dir_all(&dir)?;
    match name {
        "manifolds" => run_manifolds(config, &dir).map(|_| 0),
        "couplings" => run_couplings(config, &dir).map(|_| 0),
        "stark" => run_stark(config, &dir).map(|_| 0),
        "spectrum" => run_spectrum(config, &dir).map(|_| 0),
        "validate" => run_validate(config, &dir),
        "figures" => run_figures(config, &dir).map(|_| 0),
        _ => Err(Error::InvalidArgument(format!(
            "unknown subcommand `{name}`; expected one of {}",
            SUBCOMMANDS.join(", ")
        ))),
    }
}

fn version_line() -> String {
    format!("# polariton-lab {}", env!("CARGO_PKG_VERSION"))
}

fn fnum(x: f64) -> String {
    format!("{x:.17e}")
}

/// Line-based table writer with a version comment and a header row.
struct Table {
    sep: String,
    lines: Vec<String>,
}

impl Table {
    fn new(format: OutputFormat, header: &[&str]) -> Table {
        let sep = format.separator().to_string();
        Table {
            lines: vec![version_line(), header.join(&sep)],
            sep,
        }
    }

    fn row(&mut self, cells: &[String]) {
        self.lines.push(cells.join(&self.sep));
    }

    fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.lines.join("\n") + "\n")?;
        Ok(())
    }
}

fn artifact_path(dir: &Path, stem: &str, format: OutputFormat) -> PathBuf {
    dir.join(format!("{stem}.{}", format.extension()))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

// ---------------------------------------------------------------- manifolds

fn run_manifolds(config: &RunConfig, dir: &Path) -> Result<()> {
    let mut table = Table::new(
        config.output.format,
        &[
            "n", "label", "epsilon", "alpha_re", "alpha_im", "beta_re", "beta_im", "mu_re",
            "mu_im", "nu_re", "nu_im", "path",
        ],
    );
    for n in 0..=config.run.n_max {
        let spectrum = dressed::manifold(&config.system, n)?;
        for state in &spectrum.states {
            let (a, b, m, v) = (state.alpha(), state.beta(), state.mu(), state.nu());
            table.row(&[
                n.to_string(),
                state.label.to_string(),
                fnum(state.epsilon),
                fnum(a.re),
                fnum(a.im),
                fnum(b.re),
                fnum(b.im),
                fnum(m.re),
                fnum(m.im),
                fnum(v.re),
                fnum(v.im),
                spectrum.path.as_str().to_string(),
            ]);
        }
    }
    table.write(&artifact_path(dir, "manifolds", config.output.format))
}

// ---------------------------------------------------------------- couplings

fn run_couplings(config: &RunConfig, dir: &Path) -> Result<()> {
    let mut rabi = Table::new(
        config.output.format,
        &["n_lower", "n_upper", "i", "j", "omega_re", "omega_im"],
    );
    let mut damping = Table::new(
        config.output.format,
        &["n", "j", "k", "gamma_re", "gamma_im"],
    );
    for n in 1..=config.run.n_max {
        let t = polariton::rabi_table(&config.system, n)?;
        for i in 0..t.omega.nrows() {
            for j in 0..t.omega.ncols() {
                rabi.row(&[
                    t.lower.to_string(),
                    t.upper.to_string(),
                    i.to_string(),
                    j.to_string(),
                    fnum(t.omega[(i, j)].re),
                    fnum(t.omega[(i, j)].im),
                ]);
            }
        }
        let d = polariton::damping_matrix(&config.system, n)?;
        for j in 0..d.gamma.nrows() {
            for k in 0..d.gamma.ncols() {
                damping.row(&[
                    n.to_string(),
                    j.to_string(),
                    k.to_string(),
                    fnum(d.gamma[(j, k)].re),
                    fnum(d.gamma[(j, k)].im),
                ]);
            }
        }
    }
    rabi.write(&artifact_path(dir, "couplings_rabi", config.output.format))?;
    damping.write(&artifact_path(dir, "couplings_damping", config.output.format))
}

// -------------------------------------------------------------------- stark

fn stark_table(
    params: &SystemParams,
    grid: &[f64],
    format: OutputFormat,
) -> Result<Table> {
    let trace = stark::stark_sweep(params, grid)?;
    let mut table = Table::new(
        format,
        &[
            "ep",
            "epsilon_plus",
            "epsilon_minus",
            "gamma_plus",
            "gamma_minus",
            "numeric_plus_re",
            "numeric_plus_im",
            "numeric_minus_re",
            "numeric_minus_im",
            "regime",
            "ambiguous",
        ],
    );
    for s in &trace.samples {
        table.row(&[
            fnum(s.ep),
            fnum(s.analytic.epsilon_plus),
            fnum(s.analytic.epsilon_minus),
            fnum(s.analytic.gamma_plus),
            fnum(s.analytic.gamma_minus),
            fnum(s.tracked[0].re),
            fnum(s.tracked[0].im),
            fnum(s.tracked[1].re),
            fnum(s.tracked[1].im),
            s.analytic.regime.as_str().to_string(),
            s.ambiguous.to_string(),
        ]);
    }
    Ok(table)
}

fn run_stark(config: &RunConfig, dir: &Path) -> Result<()> {
    let grid = linspace(config.run.ep_min, config.run.ep_max, config.run.ep_points);
    stark_table(&config.system, &grid, config.output.format)?
        .write(&artifact_path(dir, "stark", config.output.format))
}

// ----------------------------------------------------------------- spectrum

#[derive(serde::Serialize)]
struct PeakOut {
    center: f64,
    height: f64,
    fwhm: f64,
    /// Relative RMS misfit; absent when the Lorentzian fit did not converge.
    residual: Option<f64>,
    fitted: bool,
    assignment: Option<String>,
}

impl PeakOut {
    fn from_peak(p: &Peak) -> PeakOut {
        PeakOut {
            center: p.center,
            height: p.height,
            fwhm: p.fwhm,
            residual: if p.residual.is_finite() {
                Some(p.residual)
            } else {
                None
            },
            fitted: p.fitted,
            assignment: p.assignment.clone(),
        }
    }
}

#[derive(serde::Serialize)]
struct CurveReport {
    ep: f64,
    coherent_weight: f64,
    mean_field_re: f64,
    mean_field_im: f64,
    incoherent_photons: f64,
    skipped_indices: Vec<usize>,
    peaks: Vec<PeakOut>,
}

#[derive(serde::Serialize)]
struct SpectrumSidecar {
    version: String,
    curves: Vec<CurveReport>,
}

fn curve_report(params: &SystemParams, trace: &SpectrumTrace) -> CurveReport {
    CurveReport {
        ep: params.ep,
        coherent_weight: trace.coherent_weight,
        mean_field_re: trace.mean_field.re,
        mean_field_im: trace.mean_field.im,
        incoherent_photons: trace.incoherent_photons,
        skipped_indices: trace.skipped.clone(),
        peaks: trace.peaks.iter().map(PeakOut::from_peak).collect(),
    }
}

fn compute_trace(
    params: &SystemParams,
    grid: &[f64],
    backend: Backend,
    prominence: f64,
    window: f64,
) -> Result<SpectrumTrace> {
    let basis = BareBasis::new(params.n_trunc)?;
    let engine = SpectrumEngine::new(params, &basis)?;
    let mut trace = engine.spectrum(grid, backend)?;
    let found = peaks::find_peaks_with(&trace, prominence);
    trace.peaks = peaks::identify_transitions_with(params, &found, window)?;
    Ok(trace)
}

fn write_sidecar(path: &Path, sidecar: &SpectrumSidecar) -> Result<()> {
    let json = serde_json::to_string_pretty(sidecar)
        .map_err(|e| Error::Inconsistent(format!("sidecar serialization failed: {e}")))?;
    fs::write(path, json + "\n")?;
    Ok(())
}

fn run_spectrum(config: &RunConfig, dir: &Path) -> Result<()> {
    let grid = linspace(
        config.run.omega_min,
        config.run.omega_max,
        config.run.omega_points,
    );
    let trace = compute_trace(
        &config.system,
        &grid,
        config.run.backend,
        config.run.prominence,
        config.run.window,
    )?;
    let mut table = Table::new(config.output.format, &["omega", "s_incoherent"]);
    for (w, v) in trace.omega.iter().zip(&trace.values) {
        table.row(&[fnum(*w), fnum(*v)]);
    }
    table.write(&artifact_path(dir, "spectrum", config.output.format))?;
    write_sidecar(
        &dir.join("spectrum_peaks.json"),
        &SpectrumSidecar {
            version: version_line().trim_start_matches("# ").to_string(),
            curves: vec![curve_report(&config.system, &trace)],
        },
    )
}

// ----------------------------------------------------------------- validate

struct Check {
    name: &'static str,
    value: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.value.is_finite() && self.value <= self.tolerance
    }
}

/// Run every cross-check at the configured parameters and report the
/// maximum deviations against their pinned tolerances. Returns exit status
/// 2 when any check fails.
fn run_validate(config: &RunConfig, dir: &Path) -> Result<i32> {
    let params = &config.system;
    let basis = BareBasis::new(params.n_trunc)?;
    let mut checks: Vec<Check> = Vec::new();

    // dressed spectra: closed form vs direct diagonalization, sum rules
    let mut energy_dev: f64 = 0.0;
    let mut overlap_dev: f64 = 0.0;
    let mut sum_dev: f64 = 0.0;
    let mut unitarity_dev: f64 = 0.0;
    let top = config.run.n_max.max(3).min(basis.max_complete_manifold());
    for n in 1..=top {
        let closed = dressed::manifold(params, n)?;
        let numeric = dressed::numeric_manifold(params, n)?;
        for (c, q) in closed.states.iter().zip(&numeric.states) {
            energy_dev = energy_dev.max((c.epsilon - q.epsilon).abs());
            overlap_dev = overlap_dev.max(1.0 - dressed::overlap_modulus(&c.coeffs, &q.coeffs));
        }
        sum_dev = sum_dev.max(closed.sum_rule_defect());
        unitarity_dev =
            unitarity_dev.max(polariton::transformation_matrix(params, n)?.unitarity_defect());
    }
    checks.push(Check {
        name: "dressed_energy_closed_vs_numeric",
        value: energy_dev,
        tolerance: 1e-8,
    });
    checks.push(Check {
        name: "dressed_overlap_closed_vs_numeric",
        value: overlap_dev,
        tolerance: 1e-8,
    });
    checks.push(Check {
        name: "dressed_energy_sum_rule",
        value: sum_dev,
        tolerance: 1e-9,
    });
    checks.push(Check {
        name: "transformation_unitarity",
        value: unitarity_dev,
        tolerance: 1e-10,
    });

    // annihilation components must sum to the full operator exactly
    let a = operators::build_annihilation(&basis);
    let mut acc = ndarray::Array2::zeros((basis.dim(), basis.dim()));
    for n in 1..=basis.max_manifold() {
        acc = acc + polariton::annihilation_component(&basis, n)?;
    }
    checks.push(Check {
        name: "annihilation_component_sum",
        value: operators::max_abs(&(&acc - &a)),
        tolerance: 1e-14,
    });

    // coupling tables vs bare matrix elements
    let mut rabi_dev: f64 = 0.0;
    let mut damping_dev: f64 = 0.0;
    let mut cs_dev: f64 = 0.0;
    let mut psd_dev: f64 = 0.0;
    for n in 1..=top {
        rabi_dev = rabi_dev.max(polariton::rabi_consistency(params, n)?);
        damping_dev = damping_dev.max(polariton::damping_consistency(params, n)?);
        let dm = polariton::damping_matrix(params, n)?;
        cs_dev = cs_dev.max(dm.cauchy_schwarz_defect());
        let (w, _) = dm
            .gamma
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Linalg(format!("damping eigenvalues failed: {e}")))?;
        psd_dev = psd_dev.max(-w.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    checks.push(Check {
        name: "rabi_table_vs_drive_elements",
        value: rabi_dev,
        tolerance: 1e-10,
    });
    checks.push(Check {
        name: "damping_matrix_vs_residual_elements",
        value: damping_dev,
        tolerance: 1e-10,
    });
    checks.push(Check {
        name: "damping_cauchy_schwarz",
        value: cs_dev,
        tolerance: 1e-12,
    });
    checks.push(Check {
        name: "damping_negative_eigenvalue",
        value: psd_dev.max(0.0),
        tolerance: 1e-12,
    });

    // first-manifold closed forms
    let dm1 = polariton::damping_matrix(params, 1)?;
    let closed_rates = polariton::first_manifold_decay_rates(params);
    let rate_dev = match closed_rates {
        Ok(rates) => rates
            .iter()
            .enumerate()
            .map(|(k, r)| (dm1.gamma[(k, k)].re - r).abs())
            .fold(0.0, f64::max),
        Err(_) => 0.0, // closed form undefined at omega_c = 0
    };
    checks.push(Check {
        name: "first_manifold_decay_closed_form",
        value: rate_dev,
        tolerance: 1e-12,
    });

    // commutator identities away from the truncation boundary
    let commutators = polariton::commutator_check(params, &basis)?;
    checks.push(Check {
        name: "polariton_commutator_identities",
        value: commutators.max_defect(),
        tolerance: 1e-10,
    });
    checks.push(Check {
        name: "ground_commutator_expectation",
        value: (commutators.ground_expectation - 1.0).abs(),
        tolerance: 1e-12,
    });

    // generator reconstruction over all complete manifolds
    let n_max = basis.max_complete_manifold();
    let gen = polariton::assemble_polariton_generator(
        params,
        &basis,
        n_max,
        config.run.offdiagonal_damping,
    )?;
    let proj = polariton::manifold_sector_projector(&basis, n_max);
    let heff = operators::build_heff(params, &basis)?;
    let bare = proj.dot(&heff).dot(&proj);
    let recon_dev = if config.run.offdiagonal_damping {
        operators::max_abs(&(&gen.total() - &bare))
    } else {
        0.0 // diagonal approximation intentionally differs
    };
    checks.push(Check {
        name: "polariton_generator_reconstruction",
        value: recon_dev,
        tolerance: 1e-10,
    });

    // reduced two-level sector
    let hred = stark::reduced_hamiltonian(params)?;
    let ground = polariton::embed_state(&basis, &dressed::ground_state().states[0]);
    let zero = polariton::embed_state(&basis, &dressed::manifold(params, 1)?.states[1]);
    let total = gen.total();
    let mut sector_dev: f64 = 0.0;
    for (r, vr) in [&ground, &zero].iter().enumerate() {
        for (c, vc) in [&ground, &zero].iter().enumerate() {
            let mv = total.dot(*vc);
            let got: crate::C64 = vr.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum();
            sector_dev = sector_dev.max((got - hred[(r, c)]).norm());
        }
    }
    checks.push(Check {
        name: "reduced_model_sector",
        value: sector_dev,
        tolerance: 1e-12,
    });

    // master equation: trace preservation, steady state, truncation
    let liouville = lindblad::build_liouvillian(params, &basis)?;
    checks.push(Check {
        name: "liouvillian_trace_preservation",
        value: liouville.trace_preservation_defect(),
        tolerance: 1e-10,
    });
    let (steady, report) = lindblad::steady_state_with_report(&liouville)?;
    checks.push(Check {
        name: "steady_state_relative_residual",
        value: report.residual_inf / report.generator_norm_inf,
        tolerance: 1e-10,
    });
    checks.push(Check {
        name: "steady_state_kernel_uniqueness",
        value: 1.0 - report.kernel_alignment,
        tolerance: 1e-6,
    });
    checks.push(Check {
        name: "steady_state_hermiticity",
        value: steady.hermiticity_defect(),
        tolerance: 1e-10,
    });
    checks.push(Check {
        name: "steady_state_trace",
        value: (steady.trace() - crate::C64::new(1.0, 0.0)).norm(),
        tolerance: 1e-10,
    });
    checks.push(Check {
        name: "steady_state_negativity",
        value: (-steady.min_eigenvalue()?).max(0.0),
        tolerance: 1e-8,
    });
    let truncation = lindblad::truncation_check(params)?;
    checks.push(Check {
        name: "truncation_tail_population",
        value: truncation.tail_top,
        tolerance: 1e-8,
    });
    checks.push(Check {
        name: "truncation_doubling_drift",
        value: truncation.nbar_drift,
        tolerance: 1e-8,
    });

    // spectrum conventions: damped-cavity Lorentzian and backend agreement
    let lock_grid = linspace(-4.0 * params.kappa, 4.0 * params.kappa, 33);
    checks.push(Check {
        name: "spectrum_convention_lock",
        value: fluorescence::convention_lock_deviation(params.kappa, 3, &lock_grid)?,
        tolerance: 1e-10,
    });
    let small = params.with_n_trunc(3);
    let small_basis = BareBasis::new(3)?;
    let engine = SpectrumEngine::new(&small, &small_basis)?;
    let probe_grid = linspace(-7.0, 7.0, 29);
    let schur_trace = engine.spectrum(&probe_grid, Backend::SchurResolvent)?;
    let lu_trace = engine.spectrum(&probe_grid, Backend::DenseLu)?;
    let scale = schur_trace.max_value().max(f64::MIN_POSITIVE);
    let backend_dev = schur_trace
        .values
        .iter()
        .zip(&lu_trace.values)
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "spectrum_backend_agreement",
        value: backend_dev,
        tolerance: 1e-8,
    });

    // reduced-model sweep: truncation stability of the tracked pair
    let drift = stark::sweep_truncation_drift(params, &[0.0, 0.15, 0.3])?;
    checks.push(Check {
        name: "stark_sweep_truncation_drift",
        value: drift,
        tolerance: 1e-6,
    });

    // emit table and console summary
    let mut table = Table::new(
        config.output.format,
        &["check", "max_deviation", "tolerance", "status"],
    );
    let mut failures = 0usize;
    for c in &checks {
        let status = if c.passed() { "pass" } else { "FAIL" };
        if !c.passed() {
            failures += 1;
        }
        println!(
            "{:<40} {:>12.3e}  (tolerance {:>8.1e})  {}",
            c.name, c.value, c.tolerance, status
        );
        table.row(&[
            c.name.to_string(),
            fnum(c.value),
            fnum(c.tolerance),
            status.to_string(),
        ]);
    }
    table.write(&artifact_path(dir, "validate", config.output.format))?;
    if failures > 0 {
        println!("{failures} check(s) failed");
        Ok(2)
    } else {
        println!("all {} checks passed", checks.len());
        Ok(0)
    }
}

// ------------------------------------------------------------------ figures

fn run_figures(config: &RunConfig, dir: &Path) -> Result<()> {
    let selected = config.run.figure.as_str();
    let all = selected == "all";
    if all || selected == "fig4" {
        figure_stark(FIG4_PRESET, "fig4", config.output.format, dir)?;
    }
    if all || selected == "fig5" {
        figure_stark(FIG5_PRESET, "fig5", config.output.format, dir)?;
    }
    if all || selected == "fig6" {
        figure_spectra(FIG6_PRESET, "fig6", config.output.format, dir)?;
    }
    if all || selected == "fig7" {
        figure_spectra(FIG7_PRESET, "fig7", config.output.format, dir)?;
    }
    Ok(())
}

fn figure_stark(preset: &str, stem: &str, format: OutputFormat, dir: &Path) -> Result<()> {
    let cfg = parse_config(preset)?;
    let grid = linspace(cfg.run.ep_min, cfg.run.ep_max, cfg.run.ep_points);
    stark_table(&cfg.system, &grid, format)?.write(&artifact_path(dir, stem, format))
}

fn figure_spectra(preset: &str, stem: &str, format: OutputFormat, dir: &Path) -> Result<()> {
    let cfg = parse_config(preset)?;
    let grid = linspace(cfg.run.omega_min, cfg.run.omega_max, cfg.run.omega_points);
    let drives = if cfg.run.ep_list.is_empty() {
        vec![cfg.system.ep]
    } else {
        cfg.run.ep_list.clone()
    };
    let mut curves: Vec<(f64, SpectrumTrace)> = Vec::with_capacity(drives.len());
    for &ep in &drives {
        let p = cfg.system.with_ep(ep);
        let trace = compute_trace(&p, &grid, cfg.run.backend, cfg.run.prominence, cfg.run.window)?;
        curves.push((ep, trace));
    }
    let mut header: Vec<String> = vec!["omega".into()];
    for (ep, _) in &curves {
        header.push(format!("s_ep_{ep}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new(format, &header_refs);
    for (k, w) in grid.iter().enumerate() {
        let mut cells = vec![fnum(*w)];
        for (_, trace) in &curves {
            cells.push(fnum(trace.values[k]));
        }
        table.row(&cells);
    }
    table.write(&artifact_path(dir, stem, format))?;
    let sidecar = SpectrumSidecar {
        version: version_line().trim_start_matches("# ").to_string(),
        curves: curves
            .iter()
            .map(|(ep, trace)| curve_report(&cfg.system.with_ep(*ep), trace))
            .collect(),
    };
    write_sidecar(&dir.join(format!("{stem}_peaks.json")), &sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn small_config() -> RunConfig {
        let text = "\
[system]
g1 = 6.0
g2 = 6.0
omega_c = 2.0
delta = 0.0
big_delta = 0.1
gamma1 = 0.1
gamma2 = 0.1
gamma3 = 0.1
kappa = 0.25
ep = 0.45
n_trunc = 7

[run]
omega_min = -1.0
omega_max = 1.0
omega_points = 201
ep_min = 0.0
ep_max = 0.2
ep_points = 5
n_max = 3
";
        parse_config(text).unwrap()
    }

    fn tempdir(tag: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("polariton-lab-test-{tag}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn unknown_subcommand_is_rejected() {
        let cfg = small_config();
        let dir = tempdir("unknown");
        let err = run_subcommand("resonances", &cfg, Some(&dir)).unwrap_err();
        assert!(err.to_string().contains("unknown subcommand"));
    }

    #[test]
    fn manifolds_and_couplings_write_deterministic_tables() {
        let cfg = small_config();
        let dir = tempdir("tables");
        run_subcommand("manifolds", &cfg, Some(&dir)).unwrap();
        run_subcommand("couplings", &cfg, Some(&dir)).unwrap();
        let first = fs::read(dir.join("manifolds.csv")).unwrap();
        assert!(!first.is_empty());
        let header = String::from_utf8_lossy(&first);
        assert!(header.contains("n,label,epsilon"));
        assert!(header.contains("closed-form"));
        run_subcommand("manifolds", &cfg, Some(&dir)).unwrap();
        let second = fs::read(dir.join("manifolds.csv")).unwrap();
        assert_eq!(first, second, "re-running must reproduce identical bytes");
        let rabi = fs::read_to_string(dir.join("couplings_rabi.csv")).unwrap();
        // manifold pairs (0,1), (1,2), (2,3): 3 + 12 + 16 entries + 2 header lines
        assert_eq!(rabi.lines().count(), 2 + 3 + 12 + 16);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn stark_and_spectrum_write_artifacts() {
        let cfg = small_config();
        let dir = tempdir("artifacts");
        run_subcommand("stark", &cfg, Some(&dir)).unwrap();
        let stark_csv = fs::read_to_string(dir.join("stark.csv")).unwrap();
        assert_eq!(stark_csv.lines().count(), 2 + 5);
        assert!(stark_csv.contains("below") || stark_csv.contains("above"));
        run_subcommand("spectrum", &cfg, Some(&dir)).unwrap();
        let spec_csv = fs::read_to_string(dir.join("spectrum.csv")).unwrap();
        assert_eq!(spec_csv.lines().count(), 2 + 201);
        let sidecar = fs::read_to_string(dir.join("spectrum_peaks.json")).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&sidecar).unwrap();
        assert!(parsed["curves"][0]["coherent_weight"].as_f64().unwrap() > 0.0);
        assert!(parsed["curves"][0]["peaks"].as_array().is_some());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn validate_passes_on_a_small_system() {
        let cfg = small_config();
        let dir = tempdir("validate");
        let status = run_subcommand("validate", &cfg, Some(&dir)).unwrap();
        assert_eq!(status, 0, "validation checks must pass");
        let table = fs::read_to_string(dir.join("validate.csv")).unwrap();
        assert!(table.contains("spectrum_convention_lock"));
        assert!(!table.contains("FAIL"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn presets_parse_and_round_trip() {
        for preset in [FIG4_PRESET, FIG5_PRESET, FIG6_PRESET, FIG7_PRESET] {
            let cfg = parse_config(preset).unwrap();
            let round = parse_config(&crate::config::to_ini_string(&cfg)).unwrap();
            assert_eq!(cfg, round);
        }
        let fig6 = parse_config(FIG6_PRESET).unwrap();
        assert_eq!(fig6.run.ep_list, vec![0.02, 0.06, 0.45]);
        assert_eq!(fig6.system.kappa, 0.25);
        let fig7 = parse_config(FIG7_PRESET).unwrap();
        assert_eq!(fig7.run.omega_points, 4001);
        assert_eq!(fig7.system.ep, 0.45);
    }
}
