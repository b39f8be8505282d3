//! Dense operator constructors over the truncated bare basis.

use ndarray::Array2;

use crate::basis::BareBasis;
use crate::params::SystemParams;
use crate::{C64, Error, Result};

/// Atomic operator `σ_ij = |i><j|` tensored with the photon-number identity.
pub fn build_sigma(basis: &BareBasis, i: usize, j: usize) -> Result<Array2<C64>> {
    if !(1..=4).contains(&i) || !(1..=4).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "atomic levels must lie in 1..=4, got ({i}, {j})"
        )));
    }
    let mut m = Array2::zeros((basis.dim(), basis.dim()));
    for n in 0..basis.n_trunc {
        m[(basis.flat(n, i), basis.flat(n, j))] = C64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Cavity annihilation operator `a` tensored with the atomic identity;
/// `<n-1|a|n> = sqrt(n)`, and the ladder is clipped at the photon cutoff
/// (`a†` annihilates the top Fock state).
pub fn build_annihilation(basis: &BareBasis) -> Array2<C64> {
    let mut m = Array2::zeros((basis.dim(), basis.dim()));
    for n in 1..basis.n_trunc {
        for l in 1..=4 {
            m[(basis.flat(n - 1, l), basis.flat(n, l))] = C64::new((n as f64).sqrt(), 0.0);
        }
    }
    m
}

/// Undriven Hamiltonian in the rotating frame:
/// `δ σ22 + Δ σ44 + i g1 (a†σ12 − σ21 a) + i Ω_c (σ23 − σ32)
///  + i g2 (a†σ34 − σ43 a)`.
pub fn build_h0(params: &SystemParams, basis: &BareBasis) -> Result<Array2<C64>> {
    params.validate()?;
    let a = build_annihilation(basis);
    let ad = adjoint(&a);
    let i = C64::new(0.0, 1.0);
    let s12 = build_sigma(basis, 1, 2)?;
    let s21 = build_sigma(basis, 2, 1)?;
    let s23 = build_sigma(basis, 2, 3)?;
    let s32 = build_sigma(basis, 3, 2)?;
    let s34 = build_sigma(basis, 3, 4)?;
    let s43 = build_sigma(basis, 4, 3)?;
    let s22 = build_sigma(basis, 2, 2)?;
    let s44 = build_sigma(basis, 4, 4)?;

    let mut h = s22.mapv(|v| v * params.delta) + s44.mapv(|v| v * params.big_delta);
    h = h + (ad.dot(&s12) - s21.dot(&a)).mapv(|v| v * (i * params.g1));
    h = h + (&s23 - &s32).mapv(|v| v * (i * params.omega_c));
    h = h + (ad.dot(&s34) - s43.dot(&a)).mapv(|v| v * (i * params.g2));
    Ok(h)
}

/// Coherent cavity drive `i E_p (a − a†)`.
pub fn build_hd(params: &SystemParams, basis: &BareBasis) -> Result<Array2<C64>> {
    params.validate()?;
    let a = build_annihilation(basis);
    let ad = adjoint(&a);
    Ok((a - ad).mapv(|v| v * C64::new(0.0, params.ep)))
}

/// The four collapse operators, in fixed order:
/// `[sqrt(γ1) σ12, sqrt(γ2) σ32, sqrt(γ3) σ34, sqrt(κ) a]`.
pub fn build_collapse_ops(params: &SystemParams, basis: &BareBasis) -> Result<Vec<Array2<C64>>> {
    params.validate()?;
    Ok(vec![
        build_sigma(basis, 1, 2)?.mapv(|v| v * params.gamma1.sqrt()),
        build_sigma(basis, 3, 2)?.mapv(|v| v * params.gamma2.sqrt()),
        build_sigma(basis, 3, 4)?.mapv(|v| v * params.gamma3.sqrt()),
        build_annihilation(basis).mapv(|v| v * params.kappa.sqrt()),
    ])
}

/// Anti-Hermitian damping part `−i Σ C†C
///  = −i [κ a†a + (γ1+γ2) σ22 + γ3 σ44]`,
/// the non-Hermitian Hamiltonian contribution of the dissipation.
pub fn residual_hamiltonian(params: &SystemParams, basis: &BareBasis) -> Result<Array2<C64>> {
    params.validate()?;
    let mut m: Array2<C64> = Array2::zeros((basis.dim(), basis.dim()));
    for n in 0..basis.n_trunc {
        let w_ph = params.kappa * n as f64;
        for l in 1..=4 {
            let w_at = match l {
                2 => params.gamma1 + params.gamma2,
                4 => params.gamma3,
                _ => 0.0,
            };
            let f = basis.flat(n, l);
            m[(f, f)] = C64::new(0.0, -(w_ph + w_at));
        }
    }
    Ok(m)
}

/// Effective non-Hermitian Hamiltonian `H0 + Hd − i Σ C†C`.
pub fn build_heff(params: &SystemParams, basis: &BareBasis) -> Result<Array2<C64>> {
    Ok(build_h0(params, basis)? + build_hd(params, basis)? + residual_hamiltonian(params, basis)?)
}

/// Conjugate transpose.
pub fn adjoint(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|v| v.conj())
}

/// Largest entrywise deviation from Hermiticity, `max |M − M†|`.
pub fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let ad = adjoint(m);
    (m - &ad)
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise modulus.
pub fn max_abs(m: &Array2<C64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Dump a matrix in the documented debug format: one `row col re im` line
/// per nonzero entry, row-major order.
pub fn dump_matrix(m: &Array2<C64>, out: &mut impl std::io::Write) -> std::io::Result<()> {
    for ((r, c), v) in m.indexed_iter() {
        if v.norm() > 0.0 {
            writeln!(out, "{r} {c} {:.17e} {:.17e}", v.re, v.im)?;
        }
    }
    Ok(())
}
