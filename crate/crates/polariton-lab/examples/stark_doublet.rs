//! The drive-dependent splitting of the reduced two-level model: threshold
//! drive, overdamped and split regimes, and a sweep comparing the closed
//! forms against tracked eigenvalues of the full effective Hamiltonian.
//!
//! Run with `cargo run --example stark_doublet`.

use polariton_lab::params::{narrow_cavity_spectrum, strong_coupling_unit_kappa};
use polariton_lab::stark;

fn main() -> polariton_lab::Result<()> {
    for (name, params) in [
        ("unit kappa", strong_coupling_unit_kappa()),
        ("narrow cavity", narrow_cavity_spectrum()),
    ] {
        let threshold = stark::threshold_drive(&params)?;
        println!("{name}: threshold drive = {threshold:.6} (kappa = {})", params.kappa);
    }

    // sweep across the exceptional point at unit kappa
    let params = strong_coupling_unit_kappa();
    let threshold = stark::threshold_drive(&params)?;
    let eps: Vec<f64> = (0..11).map(|k| 0.05 * k as f64).collect();
    let trace = stark::stark_sweep(&params, &eps)?;

    println!("\n  ep      analytic +            analytic -            tracked +             tracked -        regime");
    for s in &trace.samples {
        println!(
            "  {:4.2}  {:+8.4} {:+8.4}i   {:+8.4} {:+8.4}i   {:+8.4} {:+8.4}i   {:+8.4} {:+8.4}i  {}{}",
            s.ep,
            s.analytic.eigenvalue_plus().re,
            s.analytic.eigenvalue_plus().im,
            s.analytic.eigenvalue_minus().re,
            s.analytic.eigenvalue_minus().im,
            s.tracked[0].re,
            s.tracked[0].im,
            s.tracked[1].re,
            s.tracked[1].im,
            s.analytic.regime.as_str(),
            if s.ambiguous { " (ambiguous)" } else { "" },
        );
    }
    println!("\nexceptional point sits at ep = {threshold:.6}: below it the pair is");
    println!("overdamped (two decay rates, no splitting), above it the lines split");
    println!("symmetrically and share one decay rate.");
    Ok(())
}
