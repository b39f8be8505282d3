//! Effective drive and damping in the dressed basis: the Rabi couplings
//! connecting adjacent manifolds, the damping matrices within each
//! manifold, and the secular argument for dropping the cross-damping.
//!
//! Run with `cargo run --example coupling_tables`.

use polariton_lab::dressed;
use polariton_lab::params::strong_coupling_unit_kappa;
use polariton_lab::polariton;

fn main() -> polariton_lab::Result<()> {
    let params = strong_coupling_unit_kappa().with_ep(0.3);

    for n in 1..=3usize {
        let table = polariton::rabi_table(&params, n)?;
        println!("Rabi couplings, manifold {} -> {}:", table.upper, table.lower);
        for i in 0..table.omega.nrows() {
            let row: Vec<String> = (0..table.omega.ncols())
                .map(|j| {
                    let w = table.omega[(i, j)];
                    format!("{:+.4}{:+.4}i", w.re, w.im)
                })
                .collect();
            println!("  [{}]", row.join("  "));
        }

        let dm = polariton::damping_matrix(&params, n)?;
        println!("damping matrix, manifold {n}:");
        for j in 0..dm.gamma.nrows() {
            let row: Vec<String> = (0..dm.gamma.ncols())
                .map(|k| format!("{:+.4}{:+.4}i", dm.gamma[(j, k)].re, dm.gamma[(j, k)].im))
                .collect();
            println!("  [{}]", row.join("  "));
        }
        println!(
            "  Cauchy-Schwarz defect {:.2e}",
            dm.cauchy_schwarz_defect()
        );

        // the off-diagonal damping is discarded on secular grounds: every
        // cross rate is small against the energy splitting it would bridge
        let spec = dressed::manifold(&params, n)?;
        let e = spec.energies();
        let mut worst: f64 = 0.0;
        for j in 0..e.len() {
            for k in 0..e.len() {
                if j != k {
                    worst = worst.max(dm.gamma[(j, k)].norm() / (e[j] - e[k]).abs());
                }
            }
        }
        println!("  max |gamma_jk| / |eps_j - eps_k| = {worst:.4}\n");
    }

    // closed forms for the first manifold
    let rates = polariton::first_manifold_decay_rates(&params)?;
    println!(
        "first-manifold decay rates (-, 0, +): {:.6}, {:.6}, {:.6}",
        rates[0], rates[1], rates[2]
    );
    println!(
        "consistency vs bare matrix elements: rabi {:.2e}, damping {:.2e}",
        polariton::rabi_consistency(&params, 2)?,
        polariton::damping_consistency(&params, 2)?,
    );
    Ok(())
}
