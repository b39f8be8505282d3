//! Physical parameters of the four-level atom + driven cavity system.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// All rates, couplings, and detunings of the model, in a common frequency
/// unit, plus the Fock-space truncation.
///
/// The level scheme: the cavity couples transitions 1↔2 (rate `g1`) and
/// 3↔4 (rate `g2`); a classical field of Rabi frequency `omega_c` couples
/// 2↔3. `delta` is the one-photon detuning carried by level 2 and
/// `big_delta` the detuning carried by level 4. The atom decays at
/// `gamma1` (2→1), `gamma2` (2→3), `gamma3` (4→3); the cavity field decays
/// at `kappa`; the coherent drive amplitude is `ep`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub g1: f64,
    pub g2: f64,
    pub omega_c: f64,
    pub delta: f64,
    pub big_delta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub kappa: f64,
    pub ep: f64,
    /// Number of photon-number states kept: `n` runs over `0..n_trunc`.
    pub n_trunc: usize,
}

impl SystemParams {
    /// Validate field ranges: nonnegative finite rates, finite detunings,
    /// and a truncation large enough for at least one four-state manifold.
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("g1", self.g1),
            ("g2", self.g2),
            ("omega_c", self.omega_c),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("kappa", self.kappa),
            ("ep", self.ep),
        ];
        for (name, v) in rates {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [("delta", self.delta), ("big_delta", self.big_delta)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite, got {v}"
                )));
            }
        }
        if self.n_trunc < 3 {
            return Err(Error::InvalidParams(format!(
                "n_trunc must be >= 3, got {}",
                self.n_trunc
            )));
        }
        Ok(())
    }

    /// Replace the drive amplitude, keeping everything else.
    pub fn with_ep(mut self, ep: f64) -> Self {
        self.ep = ep;
        self
    }

    /// Replace the truncation, keeping everything else.
    pub fn with_n_trunc(mut self, n_trunc: usize) -> Self {
        self.n_trunc = n_trunc;
        self
    }
}

/// Drive amplitude obtained from laser power `power`, cavity decay rate
/// `kappa`, mirror transmission `transmission`, and the absolute cavity
/// frequency `omega_cav` in rad/s:
/// `sqrt(power * kappa * transmission^2 / (4 ħ omega_cav))`.
///
/// This is the single dimensional entry point of the crate: `power` is in
/// watts and `omega_cav` in rad/s, so the result is in rad/s and must be
/// rescaled by the caller's reference rate before building [`SystemParams`].
/// Note the amplitude scales as the square root of the power but linearly in
/// the transmission.
pub fn drive_amplitude_from_power(
    power: f64,
    kappa: f64,
    transmission: f64,
    omega_cav: f64,
) -> Result<f64> {
    const HBAR: f64 = 1.054_571_817e-34; // J s
    for (name, v) in [
        ("power", power),
        ("kappa", kappa),
        ("transmission", transmission),
        ("omega_cav", omega_cav),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{name} must be finite and >= 0, got {v}"
            )));
        }
    }
    if omega_cav == 0.0 {
        return Err(Error::InvalidArgument(
            "omega_cav must be positive".into(),
        ));
    }
    Ok((power * kappa * transmission * transmission / (4.0 * HBAR * omega_cav)).sqrt())
}

/// Parameters used throughout the test suite: strong coupling `g = 6`,
/// classical field `omega_c = 2`, unit cavity decay.
pub fn strong_coupling_unit_kappa() -> SystemParams {
    SystemParams {
        g1: 6.0,
        g2: 6.0,
        omega_c: 2.0,
        delta: 0.0,
        big_delta: 0.0,
        gamma1: 0.1,
        gamma2: 0.1,
        gamma3: 0.1,
        kappa: 1.0,
        ep: 0.0,
        n_trunc: 15,
    }
}

/// The narrow-cavity variant used for spectra: `kappa = 0.25`, detuning
/// `big_delta = 0.1`, drive `ep = 0.45`.
pub fn narrow_cavity_spectrum() -> SystemParams {
    SystemParams {
        g1: 6.0,
        g2: 6.0,
        omega_c: 2.0,
        delta: 0.0,
        big_delta: 0.1,
        gamma1: 0.1,
        gamma2: 0.1,
        gamma3: 0.1,
        kappa: 0.25,
        ep: 0.45,
        n_trunc: 15,
    }
}
