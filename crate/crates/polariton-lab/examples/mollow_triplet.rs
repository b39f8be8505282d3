//! Steady-state fluorescence spectrum of the driven system at a reduced
//! photon cutoff: build the Liouvillian, solve for the spectrum through the
//! Schur-reduced resolvent, locate the triplet, and compare the line
//! positions and widths against the reduced-model predictions.
//!
//! Run with `cargo run --example mollow_triplet`. Takes a few seconds; the
//! production cutoff (n_trunc = 15) is exercised by the `spectrum` and
//! `figures` subcommands of the CLI instead.

use polariton_lab::basis::BareBasis;
use polariton_lab::fluorescence::{Backend, SpectrumEngine};
use polariton_lab::params::narrow_cavity_spectrum;
use polariton_lab::peaks;
use polariton_lab::stark;

fn main() -> polariton_lab::Result<()> {
    let params = narrow_cavity_spectrum().with_n_trunc(8);
    let basis = BareBasis::new(params.n_trunc)?;

    let engine = SpectrumEngine::new(&params, &basis)?;
    let omega: Vec<f64> = (0..1601).map(|k| -1.0 + 2.0 * k as f64 / 1600.0).collect();
    let trace = engine.spectrum(&omega, Backend::SchurResolvent)?;
    println!(
        "mean field {:.4}{:+.4}i, coherent weight {:.3e}, incoherent photons {:.4e}",
        trace.mean_field.re,
        trace.mean_field.im,
        trace.coherent_weight,
        trace.incoherent_photons,
    );
    println!(
        "spectral sum rule: integral / (pi * incoherent photons) = {:.4}",
        trace.sum_rule_ratio()
    );

    let found = peaks::identify_transitions(&params, &peaks::find_peaks(&trace))?;
    println!("\ndetected lines:");
    for p in &found {
        println!(
            "  center {:+.4}  height {:.3e}  fwhm {:.4}  -> {}",
            p.center,
            p.height,
            p.fwhm,
            p.assignment.as_deref().unwrap_or("unassigned"),
        );
    }

    let predictions = stark::mollow_predictions(&params)?;
    println!(
        "\nreduced model: sidebands at ±{:.4}, central half-width {:.4}, \
         sideband half-width {:.4}",
        predictions.sideband_offset,
        predictions.central_linewidth,
        predictions.sideband_linewidth,
    );
    Ok(())
}
