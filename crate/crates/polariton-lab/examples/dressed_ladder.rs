//! Walk up the dressed-state ladder of the coupled atom–cavity system:
//! print each manifold's energies and mixing coefficients from the closed
//! forms, and confirm them against direct diagonalization of the manifold
//! blocks.
//!
//! Run with `cargo run --example dressed_ladder`.

use polariton_lab::dressed;
use polariton_lab::params::strong_coupling_unit_kappa;

fn main() -> polariton_lab::Result<()> {
    let params = strong_coupling_unit_kappa();
    println!(
        "g1 = {}, g2 = {}, omega_c = {}, delta = {}, big_delta = {}",
        params.g1, params.g2, params.omega_c, params.delta, params.big_delta
    );

    for n in 0..=5usize {
        let spec = dressed::manifold(&params, n)?;
        println!(
            "\nmanifold n = {n} ({} states, {} path, sum-rule defect {:.2e})",
            spec.states.len(),
            spec.path.as_str(),
            spec.sum_rule_defect(),
        );
        for state in &spec.states {
            println!(
                "  eps = {:+10.6}   alpha = {:+.4}{:+.4}i   beta = {:+.4}{:+.4}i   \
                 mu = {:+.4}{:+.4}i   nu = {:+.4}{:+.4}i",
                state.epsilon,
                state.alpha().re,
                state.alpha().im,
                state.beta().re,
                state.beta().im,
                state.mu().re,
                state.mu().im,
                state.nu().re,
                state.nu().im,
            );
        }

        // cross-check the closed forms against the numeric oracle
        if n >= 1 {
            let numeric = dressed::numeric_manifold(&params, n)?;
            let mut worst_e: f64 = 0.0;
            let mut worst_o: f64 = 0.0;
            for (a, b) in spec.states.iter().zip(&numeric.states) {
                worst_e = worst_e.max((a.epsilon - b.epsilon).abs());
                worst_o = worst_o.max(1.0 - dressed::overlap_modulus(&a.coeffs, &b.coeffs));
            }
            println!("  vs numeric: energy dev {worst_e:.2e}, overlap defect {worst_o:.2e}");
        }
    }
    Ok(())
}
