//! Reduced two-level model of the driven ground ↔ first-manifold
//! transition: dynamic Stark splitting, regime classification, symmetric
//! superposition states, Mollow-style linewidth predictions, and a numeric
//! sweep that tracks the corresponding pair of eigenvalues of the full
//! effective Hamiltonian.

use ndarray::{Array1, Array2};
use ndarray_linalg::Eig;

use crate::basis::BareBasis;
use crate::dressed;
use crate::operators;
use crate::params::SystemParams;
use crate::polariton::embed_state;
use crate::{C64, Error, Result};

/// Drive regime of the reduced two-level model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Regime {
    /// Overdamped: no splitting, two distinct decay rates.
    BelowThreshold,
    /// Exactly at the exceptional point: the two eigenvalues coalesce.
    Critical,
    /// Split: symmetric pair of shifted states with equal decay rates.
    AboveThreshold,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::BelowThreshold => "below",
            Regime::Critical => "critical",
            Regime::AboveThreshold => "above",
        }
    }
}

/// Closed-form eigenstructure of the reduced model. Depends only on the
/// drive amplitude, the cavity loss, and the ratio `g1/Ω_c`; the atomic
/// decay rates never enter.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct StarkResult {
    /// Effective drive strength `Ω_0 = E_p / sqrt(1 + (g1/Ω_c)²)`.
    pub omega0: f64,
    /// Effective decay rate `Γ_0 = κ / (1 + (g1/Ω_c)²)`.
    pub gamma0: f64,
    /// Drive amplitude at the exceptional point, `Γ_0 / 2` in drive units.
    pub threshold_ep: f64,
    pub regime: Regime,
    /// Stark shift of the upper branch (0 below threshold).
    pub epsilon_plus: f64,
    /// Stark shift of the lower branch (0 below threshold).
    pub epsilon_minus: f64,
    /// Decay rate of the upper branch.
    pub gamma_plus: f64,
    /// Decay rate of the lower branch.
    pub gamma_minus: f64,
}

impl StarkResult {
    /// Complex eigenvalue `ε̃_+ − i Γ̃_+` of the upper branch.
    pub fn eigenvalue_plus(&self) -> C64 {
        C64::new(self.epsilon_plus, -self.gamma_plus)
    }

    /// Complex eigenvalue `ε̃_− − i Γ̃_−` of the lower branch.
    pub fn eigenvalue_minus(&self) -> C64 {
        C64::new(self.epsilon_minus, -self.gamma_minus)
    }
}

fn mixing_ratio_squared(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    if params.omega_c == 0.0 {
        return Err(Error::InvalidArgument(
            "the reduced model needs omega_c > 0".into(),
        ));
    }
    Ok(1.0 + (params.g1 / params.omega_c).powi(2))
}

/// Effective drive strength of the ground ↔ resonant-polariton transition.
pub fn effective_drive(params: &SystemParams) -> Result<f64> {
    Ok(params.ep / mixing_ratio_squared(params)?.sqrt())
}

/// Effective decay rate of the resonant first-manifold polariton.
pub fn effective_decay(params: &SystemParams) -> Result<f64> {
    Ok(params.kappa / mixing_ratio_squared(params)?)
}

/// Drive amplitude at which the reduced model passes its exceptional
/// point, `(κ/2) / sqrt(1 + (g1/Ω_c)²)`.
pub fn threshold_drive(params: &SystemParams) -> Result<f64> {
    Ok((params.kappa / 2.0) / mixing_ratio_squared(params)?.sqrt())
}

/// The non-Hermitian 2×2 generator of the reduced model on the ordered
/// basis (ground state, resonant first-manifold polariton):
/// `[[0, iΩ_0], [−iΩ_0, −iΓ_0]]`.
pub fn reduced_hamiltonian(params: &SystemParams) -> Result<Array2<C64>> {
    let omega0 = effective_drive(params)?;
    let gamma0 = effective_decay(params)?;
    let mut h: Array2<C64> = Array2::zeros((2, 2));
    h[(0, 1)] = C64::new(0.0, omega0);
    h[(1, 0)] = C64::new(0.0, -omega0);
    h[(1, 1)] = C64::new(0.0, -gamma0);
    Ok(h)
}

/// Eigenvalues of the reduced model in closed form, split into shifts and
/// decay rates, with the regime classified against the threshold drive.
pub fn stark_eigenvalues(params: &SystemParams) -> Result<StarkResult> {
    let omega0 = effective_drive(params)?;
    let gamma0 = effective_decay(params)?;
    let threshold_ep = threshold_drive(params)?;
    let half = gamma0 / 2.0;
    let disc = omega0 * omega0 - half * half;
    // λ_± = −iΓ0/2 ± sqrt(Ω0² − (Γ0/2)²), principal branch
    let root = C64::new(disc, 0.0).sqrt();
    let lam_plus = C64::new(0.0, -half) + root;
    let lam_minus = C64::new(0.0, -half) - root;
    let regime = if params.ep == threshold_ep {
        Regime::Critical
    } else if disc > 0.0 {
        Regime::AboveThreshold
    } else {
        Regime::BelowThreshold
    };
    Ok(StarkResult {
        omega0,
        gamma0,
        threshold_ep,
        regime,
        epsilon_plus: lam_plus.re,
        epsilon_minus: lam_minus.re,
        gamma_plus: -lam_plus.im,
        gamma_minus: -lam_minus.im,
    })
}

/// The two reduced-model states expanded over the bare triple
/// `(|0,1>, |1,1>, |0,3>)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StarkStates {
    pub bare_labels: [&'static str; 3],
    pub psi_plus: [C64; 3],
    pub psi_minus: [C64; 3],
    /// True above threshold, where the states take the symmetric form
    /// `(|e_0^(0)> ± |e_0^(1)>) / sqrt(2)`; below threshold the fields hold
    /// the normalized right eigenvectors of the non-Hermitian reduced
    /// generator instead.
    pub symmetric: bool,
}

fn expand_pair(c0: C64, c1: C64, params: &SystemParams) -> [C64; 3] {
    // |e_0^(1)> = (|1,1> + (g1/Ω_c)|0,3>) / N_0
    let r = params.g1 / params.omega_c;
    let n0 = (1.0 + r * r).sqrt();
    [c0, c1 / n0, c1 * r / n0]
}

/// The split states of the reduced model. Above threshold these are the
/// equal-weight superpositions of the ground state and the resonant
/// polariton; at or below threshold the generator is non-normal and the
/// (non-orthogonal) right eigenvectors are returned with
/// `symmetric = false`.
pub fn stark_states(params: &SystemParams) -> Result<StarkStates> {
    let res = stark_eigenvalues(params)?;
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    if res.regime == Regime::AboveThreshold {
        return Ok(StarkStates {
            bare_labels: BARE_LABELS,
            psi_plus: expand_pair(inv_sqrt2, inv_sqrt2, params),
            psi_minus: expand_pair(inv_sqrt2, -inv_sqrt2, params),
            symmetric: true,
        });
    }
    // (H − λ) v = 0 with H = [[0, iΩ0], [−iΩ0, −iΓ0]] gives
    // v ∝ (1, −iλ/Ω0); at zero drive the basis states themselves remain
    // eigenvectors.
    let eig_pair = |lam: C64| -> [C64; 2] {
        if res.omega0 == 0.0 {
            if lam.norm() == 0.0 {
                return [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
            }
            return [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        }
        let c1 = lam / C64::new(0.0, res.omega0);
        let norm = (1.0 + c1.norm_sqr()).sqrt();
        [C64::new(1.0 / norm, 0.0), c1 / norm]
    };
    let vp = eig_pair(res.eigenvalue_plus());
    let vm = eig_pair(res.eigenvalue_minus());
    Ok(StarkStates {
        bare_labels: BARE_LABELS,
        psi_plus: expand_pair(vp[0], vp[1], params),
        psi_minus: expand_pair(vm[0], vm[1], params),
        symmetric: false,
    })
}

const BARE_LABELS: [&str; 3] = ["|0,1>", "|1,1>", "|0,3>"];

/// Linewidth and splitting predictions for the fluorescence triplet of the
/// driven reduced model.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MollowPredictions {
    /// Half-width of the central line, `Γ_0`.
    pub central_linewidth: f64,
    /// Half-width of each sideband, `3Γ_0/2`.
    pub sideband_linewidth: f64,
    /// Position of the sidebands relative to the drive,
    /// `2 sqrt(Ω_0² − (Γ_0/2)²)` above threshold and 0 below.
    pub sideband_offset: f64,
}

/// Predicted triplet structure: the central line decays at `Γ_0`, the
/// sidebands at `3Γ_0/2`, offset by twice the Stark shift.
pub fn mollow_predictions(params: &SystemParams) -> Result<MollowPredictions> {
    let res = stark_eigenvalues(params)?;
    let offset = if res.regime == Regime::AboveThreshold {
        res.epsilon_plus - res.epsilon_minus
    } else {
        0.0
    };
    Ok(MollowPredictions {
        central_linewidth: res.gamma0,
        sideband_linewidth: 1.5 * res.gamma0,
        sideband_offset: offset,
    })
}

/// One point of a drive sweep: the closed-form prediction next to the
/// tracked pair of eigenvalues of the full effective Hamiltonian.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepSample {
    pub ep: f64,
    pub analytic: StarkResult,
    /// Eigenvalues of the full effective Hamiltonian on the two-dimensional
    /// sector continuing the ground state and the resonant polariton;
    /// `tracked[0]` is paired with the `+` branch of the closed forms,
    /// `tracked[1]` with the `−` branch.
    pub tracked: [C64; 2],
    /// Smaller of the two chosen eigenvectors' projections onto the tracked
    /// subspace from the previous step; stays near one while the sector is
    /// well separated from the rest of the spectrum.
    pub min_overlap: f64,
    /// Set when the sector selection or the branch pairing was not
    /// clear-cut at this step (margins below `1e-3`), as happens right at
    /// the critical drive where the two branches coalesce.
    pub ambiguous: bool,
}

/// A tracked drive sweep over the full effective Hamiltonian.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepTrace {
    pub samples: Vec<SweepSample>,
}

/// Margin below which two candidate overlaps make the branch assignment
/// ambiguous.
const OVERLAP_MARGIN: f64 = 1e-3;

fn eig_full(params: &SystemParams, basis: &BareBasis) -> Result<(Array1<C64>, Array2<C64>)> {
    let heff = operators::build_heff(params, basis)?;
    heff.eig()
        .map_err(|e| Error::Linalg(format!("eigendecomposition failed: {e}")))
}

fn anchor_states(params: &SystemParams, basis: &BareBasis) -> Result<[Array1<C64>; 2]> {
    let ground = embed_state(basis, &dressed::ground_state().states[0]);
    let first = dressed::manifold(params, 1)?;
    let zero = embed_state(basis, &first.states[1]);
    Ok([ground, zero])
}

fn overlap(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    let dot: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let nb: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if nb == 0.0 { 0.0 } else { dot.norm() / nb }
}

/// Sweep the drive amplitude, tracking the two-dimensional reduced-model
/// sector of the full effective Hamiltonian. At each step the two
/// eigenvectors with the largest projection onto the previous step's sector
/// are selected (the span is continuous even across the critical drive,
/// where the individual eigenvectors hybridize), then paired with the `+`
/// and `−` closed-form branches by eigenvalue proximity. The sector is
/// seeded with the zero-drive states: the ground state and the resonant
/// first-manifold polariton.
pub fn stark_sweep(params: &SystemParams, ep_values: &[f64]) -> Result<SweepTrace> {
    params.validate()?;
    if ep_values.is_empty() {
        return Err(Error::InvalidArgument("empty drive grid".into()));
    }
    let basis = BareBasis::new(params.n_trunc)?;
    let mut prev = anchor_states(params, &basis)?;
    let mut samples = Vec::with_capacity(ep_values.len());
    for &ep in ep_values {
        if !ep.is_finite() || ep < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "drive amplitudes must be finite and nonnegative, got {ep}"
            )));
        }
        let p = params.with_ep(ep);
        let analytic = stark_eigenvalues(&p)?;
        let (eigs, vecs) = eig_full(&p, &basis)?;
        let mut ambiguous = false;

        // subspace capture of every eigenvector against span(prev)
        let mut scores: Vec<(f64, usize)> = (0..eigs.len())
            .map(|k| {
                let col = vecs.column(k).to_owned();
                let (o0, o1) = (overlap(&prev[0], &col), overlap(&prev[1], &col));
                (o0 * o0 + o1 * o1, k)
            })
            .collect();
        scores.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let (cap_a, k_a) = scores[0];
        let (cap_b, k_b) = scores[1];
        let third = scores.get(2).map(|t| t.0).unwrap_or(0.0);
        if cap_b - third < OVERLAP_MARGIN {
            ambiguous = true;
        }
        let min_overlap = cap_a.sqrt().min(cap_b.sqrt());

        // pair the selected eigenvalues with the closed-form branches
        let lam_plus = analytic.eigenvalue_plus();
        let lam_minus = analytic.eigenvalue_minus();
        let direct = (eigs[k_a] - lam_plus).norm() + (eigs[k_b] - lam_minus).norm();
        let swapped = (eigs[k_b] - lam_plus).norm() + (eigs[k_a] - lam_minus).norm();
        let (kp, km) = if direct <= swapped { (k_a, k_b) } else { (k_b, k_a) };
        if (direct - swapped).abs() < OVERLAP_MARGIN * (eigs[k_a] - eigs[k_b]).norm().max(1e-12)
            || (eigs[k_a] - eigs[k_b]).norm() < OVERLAP_MARGIN * analytic.gamma0.max(1e-12)
        {
            ambiguous = true;
        }
        let tracked = [eigs[kp], eigs[km]];
        for (slot, k) in [(0usize, kp), (1, km)] {
            let col = vecs.column(k).to_owned();
            let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            prev[slot] = col.mapv(|v| v / norm);
        }
        samples.push(SweepSample {
            ep,
            analytic,
            tracked,
            min_overlap,
            ambiguous,
        });
    }
    Ok(SweepTrace { samples })
}

/// Largest movement of the tracked eigenvalue pair when the photon cutoff
/// is doubled, over the given drive amplitudes.
pub fn sweep_truncation_drift(params: &SystemParams, ep_values: &[f64]) -> Result<f64> {
    let coarse = stark_sweep(params, ep_values)?;
    let doubled = params.with_n_trunc(2 * params.n_trunc);
    let fine = stark_sweep(&doubled, ep_values)?;
    let mut drift: f64 = 0.0;
    for (c, f) in coarse.samples.iter().zip(&fine.samples) {
        for b in 0..2 {
            drift = drift.max((c.tracked[b] - f.tracked[b]).norm());
        }
    }
    Ok(drift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{narrow_cavity_spectrum, strong_coupling_unit_kappa};
    use crate::polariton::assemble_polariton_generator;

    #[test]
    fn reduced_hamiltonian_matches_the_generator_sector() {
        let p = strong_coupling_unit_kappa().with_n_trunc(5).with_ep(0.3);
        let b = BareBasis::new(p.n_trunc).unwrap();
        let gen = assemble_polariton_generator(&p, &b, 2, true).unwrap();
        let total = gen.total();
        let anchors = anchor_states(&p, &b).unwrap();
        let h = reduced_hamiltonian(&p).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let mv = total.dot(&anchors[c]);
                let got: C64 = anchors[r]
                    .iter()
                    .zip(mv.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                assert!(
                    (got - h[(r, c)]).norm() < 1e-12,
                    "sector entry ({r},{c}): {got} vs {}",
                    h[(r, c)]
                );
            }
        }
    }

    #[test]
    fn narrow_cavity_closed_forms() {
        let p = narrow_cavity_spectrum();
        let res = stark_eigenvalues(&p).unwrap();
        assert!((res.omega0 - 0.14230249470757705).abs() < 1e-15);
        assert!((res.gamma0 - 0.025).abs() < 1e-15);
        assert_eq!(res.regime, Regime::AboveThreshold);
        assert!((res.epsilon_plus - 0.14175242502334837).abs() < 1e-15);
        assert!((res.epsilon_minus + 0.14175242502334837).abs() < 1e-15);
        assert!((res.gamma_plus - 0.0125).abs() < 1e-15);
        assert!((res.gamma_minus - 0.0125).abs() < 1e-15);
        let m = mollow_predictions(&p).unwrap();
        assert!((m.sideband_offset - 0.28350485004669673).abs() < 1e-15);
        assert!((m.central_linewidth - 0.025).abs() < 1e-15);
        assert!((m.sideband_linewidth - 0.0375).abs() < 1e-15);
    }

    #[test]
    fn threshold_values_and_critical_flag() {
        let unit = strong_coupling_unit_kappa();
        let t1 = threshold_drive(&unit).unwrap();
        assert_eq!(t1, 0.15811388300841897);
        assert_eq!(
            stark_eigenvalues(&unit.with_ep(t1)).unwrap().regime,
            Regime::Critical
        );
        let narrow = narrow_cavity_spectrum();
        let t2 = threshold_drive(&narrow).unwrap();
        assert_eq!(t2, 0.039528470752104746);
        assert_eq!(
            stark_eigenvalues(&narrow.with_ep(t2)).unwrap().regime,
            Regime::Critical
        );
        assert_eq!(
            stark_eigenvalues(&narrow.with_ep(t2 * 0.5)).unwrap().regime,
            Regime::BelowThreshold
        );
        assert_eq!(
            stark_eigenvalues(&narrow.with_ep(t2 * 2.0)).unwrap().regime,
            Regime::AboveThreshold
        );
    }

    #[test]
    fn below_threshold_rates_sum_to_gamma0() {
        let p = strong_coupling_unit_kappa().with_ep(0.05);
        let res = stark_eigenvalues(&p).unwrap();
        assert_eq!(res.regime, Regime::BelowThreshold);
        assert_eq!(res.epsilon_plus, 0.0);
        assert_eq!(res.epsilon_minus, 0.0);
        assert!((res.gamma_plus + res.gamma_minus - res.gamma0).abs() < 1e-15);
        assert!(res.gamma_plus < res.gamma_minus, "upper branch stays slow");
        // zero drive: rates are exactly 0 and Γ0
        let rest = stark_eigenvalues(&p.with_ep(0.0)).unwrap();
        assert_eq!(rest.gamma_plus, 0.0);
        assert!((rest.gamma_minus - rest.gamma0).abs() < 1e-15);
    }

    #[test]
    fn split_states_are_equal_weight_and_normalized() {
        let p = narrow_cavity_spectrum();
        let s = stark_states(&p).unwrap();
        assert!(s.symmetric);
        let norm = |v: &[C64; 3]| v.iter().map(|c| c.norm_sqr()).sum::<f64>();
        assert!((norm(&s.psi_plus) - 1.0).abs() < 1e-14);
        assert!((norm(&s.psi_minus) - 1.0).abs() < 1e-14);
        assert!((s.psi_plus[0].norm_sqr() - 0.5).abs() < 1e-14, "half weight on the ground state");
        // below threshold the states are flagged non-symmetric
        let weak = stark_states(&p.with_ep(0.01)).unwrap();
        assert!(!weak.symmetric);
        let n_plus = norm(&weak.psi_plus);
        assert!((n_plus - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gamma_never_enters_the_closed_forms() {
        let mut a = narrow_cavity_spectrum();
        let mut b = a;
        b.gamma1 = 0.7;
        b.gamma2 = 0.03;
        b.gamma3 = 1.9;
        let ra = stark_eigenvalues(&a).unwrap();
        let rb = stark_eigenvalues(&b).unwrap();
        assert_eq!(ra.omega0.to_bits(), rb.omega0.to_bits());
        assert_eq!(ra.epsilon_plus.to_bits(), rb.epsilon_plus.to_bits());
        assert_eq!(ra.gamma_plus.to_bits(), rb.gamma_plus.to_bits());
        assert_eq!(ra.threshold_ep.to_bits(), rb.threshold_ep.to_bits());
        a.ep = 0.01;
        b.ep = 0.01;
        let ra = stark_eigenvalues(&a).unwrap();
        let rb = stark_eigenvalues(&b).unwrap();
        assert_eq!(ra.gamma_minus.to_bits(), rb.gamma_minus.to_bits());
    }

    #[test]
    fn sweep_tracks_the_reduced_pair() {
        let p = narrow_cavity_spectrum().with_n_trunc(8);
        let grid: Vec<f64> = (0..=6).map(|k| 0.05 * k as f64).collect();
        let trace = stark_sweep(&p, &grid).unwrap();
        assert_eq!(trace.samples.len(), 7);
        for s in &trace.samples {
            assert!(
                s.min_overlap > 0.9,
                "branch continuity lost at ep = {}: overlap {}",
                s.ep,
                s.min_overlap
            );
            let got: Vec<f64> = {
                let mut v = vec![s.tracked[0].re, s.tracked[1].re];
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v
            };
            let want = [s.analytic.epsilon_minus, s.analytic.epsilon_plus];
            for (g, w) in got.iter().zip(&want) {
                assert!(
                    (g - w).abs() < 5e-3,
                    "tracked shift {g} vs predicted {w} at ep = {}",
                    s.ep
                );
            }
            assert!(s.tracked.iter().all(|t| t.im <= 1e-12), "branches decay");
        }
        // the zero-drive sample starts on the anchors, up to the small
        // damping-induced mixing of the resonant polariton with the split
        // pair
        let s0 = &trace.samples[0];
        assert!(s0.min_overlap > 1.0 - 1e-3, "anchor capture {}", s0.min_overlap);
        assert!(s0.tracked[0].norm() < 1e-12, "ground eigenvalue 0");
        assert!((s0.tracked[1] - C64::new(0.0, -s0.analytic.gamma0)).norm() < 5e-4);
    }

    #[test]
    fn doubling_the_cutoff_leaves_the_tracked_pair_fixed() {
        let p = narrow_cavity_spectrum().with_n_trunc(8);
        let drift = sweep_truncation_drift(&p, &[0.0, 0.15, 0.3]).unwrap();
        assert!(drift < 1e-6, "truncation drift {drift}");
    }
}
