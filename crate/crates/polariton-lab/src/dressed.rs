//! Dressed states of the undriven atom-cavity Hamiltonian, manifold by
//! manifold: closed-form energies and coefficients, plus a small-block
//! numeric eigensolver used both as an oracle and as a fallback when the
//! closed forms are ill-conditioned.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::params::SystemParams;
use crate::{C64, Error, Result};

/// Relative smallness threshold on every closed-form denominator below which
/// the numeric path takes over.
const FALLBACK_TOL: f64 = 1e-7;
/// Largest imaginary residue tolerated on a closed-form root, relative to
/// `max(1, |Re ε|)`.
const IM_TOL: f64 = 1e-9;
/// Eigen-equation residual bound, relative to the block norm.
const RESIDUAL_TOL: f64 = 1e-8;

/// Which evaluation path produced a manifold spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumPath {
    ClosedForm,
    Numeric,
}

impl SpectrumPath {
    pub fn as_str(&self) -> &'static str {
        match self {
            SpectrumPath::ClosedForm => "closed-form",
            SpectrumPath::Numeric => "numeric",
        }
    }
}

/// Label of a dressed state within its manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateLabel {
    /// The unique ground state.
    Ground,
    /// First manifold, lower state.
    Minus,
    /// First manifold, resonant state.
    Zero,
    /// First manifold, upper state.
    Plus,
    /// Higher manifolds: 1-based index in ascending-energy order.
    Index(u8),
}

impl std::fmt::Display for StateLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateLabel::Ground => write!(f, "g"),
            StateLabel::Minus => write!(f, "m"),
            StateLabel::Zero => write!(f, "0"),
            StateLabel::Plus => write!(f, "p"),
            StateLabel::Index(k) => write!(f, "{k}"),
        }
    }
}

/// One dressed state: its manifold, label, real energy offset from the
/// rotating frame, and complex coefficients over the ordered bare states of
/// the manifold (`|n,1>, |n-1,2>, |n-1,3>, |n-2,4>`, keeping only the ones
/// that exist).
#[derive(Debug, Clone)]
pub struct DressedState {
    pub manifold: usize,
    pub label: StateLabel,
    pub epsilon: f64,
    pub coeffs: Vec<C64>,
}

impl DressedState {
    /// Coefficient on `|n,1>` (the photon-rich component).
    pub fn alpha(&self) -> C64 {
        self.coeffs[0]
    }

    /// Coefficient on `|n-1,2>`; zero for the ground state.
    pub fn beta(&self) -> C64 {
        if self.manifold == 0 { C64::new(0.0, 0.0) } else { self.coeffs[1] }
    }

    /// Coefficient on `|n-1,3>`; zero for the ground state.
    pub fn mu(&self) -> C64 {
        if self.manifold == 0 { C64::new(0.0, 0.0) } else { self.coeffs[2] }
    }

    /// Coefficient on `|n-2,4>`; zero below the second manifold.
    pub fn nu(&self) -> C64 {
        if self.manifold < 2 { C64::new(0.0, 0.0) } else { self.coeffs[3] }
    }

    /// Squared-norm defect from unit normalization.
    pub fn norm_defect(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() - 1.0).abs()
    }
}

/// All dressed states of one manifold, ascending in energy, plus the exact
/// trace of the block (`δ` for the first manifold, `Δ + δ` for n ≥ 2).
#[derive(Debug, Clone)]
pub struct ManifoldSpectrum {
    pub manifold: usize,
    pub states: Vec<DressedState>,
    pub sum_rule: f64,
    pub path: SpectrumPath,
}

impl ManifoldSpectrum {
    /// Deviation of the energy sum from the exact block trace.
    pub fn sum_rule_defect(&self) -> f64 {
        (self.states.iter().map(|s| s.epsilon).sum::<f64>() - self.sum_rule).abs()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.epsilon).collect()
    }
}

/// The ground state `|0,1>`: zero energy, trivially dressed.
pub fn ground_state() -> ManifoldSpectrum {
    ManifoldSpectrum {
        manifold: 0,
        states: vec![DressedState {
            manifold: 0,
            label: StateLabel::Ground,
            epsilon: 0.0,
            coeffs: vec![C64::new(1.0, 0.0)],
        }],
        sum_rule: 0.0,
        path: SpectrumPath::ClosedForm,
    }
}

/// The Hermitian block of the undriven Hamiltonian on manifold `n >= 1`, in
/// the manifold state order (3×3 for `n = 1`, 4×4 for `n >= 2`).
pub fn manifold_block(params: &SystemParams, n: usize) -> Result<Array2<C64>> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("manifold block needs n >= 1".into()));
    }
    let i = C64::new(0.0, 1.0);
    if n == 1 {
        let mut b: Array2<C64> = Array2::zeros((3, 3));
        b[(1, 1)] = C64::new(params.delta, 0.0);
        b[(0, 1)] = i * params.g1;
        b[(1, 0)] = -i * params.g1;
        b[(1, 2)] = i * params.omega_c;
        b[(2, 1)] = -i * params.omega_c;
        Ok(b)
    } else {
        let nf = n as f64;
        let mut b: Array2<C64> = Array2::zeros((4, 4));
        b[(1, 1)] = C64::new(params.delta, 0.0);
        b[(3, 3)] = C64::new(params.big_delta, 0.0);
        b[(0, 1)] = i * (params.g1 * nf.sqrt());
        b[(1, 0)] = -i * (params.g1 * nf.sqrt());
        b[(1, 2)] = i * params.omega_c;
        b[(2, 1)] = -i * params.omega_c;
        b[(2, 3)] = i * (params.g2 * (nf - 1.0).sqrt());
        b[(3, 2)] = -i * (params.g2 * (nf - 1.0).sqrt());
        Ok(b)
    }
}

/// Numeric diagonalization of the manifold block: eigenvalues ascending,
/// eigenvectors phase-fixed so the first non-negligible component is real
/// and positive.
pub fn numeric_manifold(params: &SystemParams, n: usize) -> Result<ManifoldSpectrum> {
    if n == 0 {
        return Ok(ground_state());
    }
    let block = manifold_block(params, n)?;
    let (w, v) = block
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Linalg(format!("manifold {n} eigensolve: {e}")))?;
    let size = w.len();
    let mut states = Vec::with_capacity(size);
    for k in 0..size {
        // the Hermitian solver hands back eigenvectors of the conjugated
        // block for this storage order; conjugate so `block v = eps v`
        // holds as written
        let mut col: Vec<C64> = (0..size).map(|r| v[(r, k)].conj()).collect();
        let scale = col.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if let Some(lead) = col.iter().find(|c| c.norm() > 1e-12 * scale) {
            let phase = lead / lead.norm();
            for c in col.iter_mut() {
                *c /= phase;
            }
        }
        states.push(DressedState {
            manifold: n,
            label: label_for(n, k, size),
            epsilon: w[k],
            coeffs: col,
        });
    }
    Ok(ManifoldSpectrum {
        manifold: n,
        states,
        sum_rule: sum_rule(params, n),
        path: SpectrumPath::Numeric,
    })
}

fn sum_rule(params: &SystemParams, n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => params.delta,
        _ => params.delta + params.big_delta,
    }
}

fn label_for(n: usize, k: usize, size: usize) -> StateLabel {
    if n == 0 {
        StateLabel::Ground
    } else if n == 1 {
        debug_assert_eq!(size, 3);
        [StateLabel::Minus, StateLabel::Zero, StateLabel::Plus][k]
    } else {
        StateLabel::Index(k as u8 + 1)
    }
}

/// Closed-form first-manifold spectrum: the resonant state at zero energy
/// and the pair `ε_± = δ/2 ± sqrt(δ²/4 + Ω_c² + g1²)`, with coefficient
/// vectors over `(|1,1>, |0,2>, |0,3>)`:
/// `e_0 ∝ (1, 0, g1/Ω_c)` and `e_± ∝ (−g1/Ω_c, i ε_±/Ω_c, 1)`.
///
/// Requires `Ω_c > 0`; the Ω_c = 0 case falls back to the numeric path
/// (documented behavior, not an error).
pub fn first_manifold(params: &SystemParams) -> Result<ManifoldSpectrum> {
    params.validate()?;
    if params.omega_c == 0.0 {
        return numeric_manifold(params, 1);
    }
    let r = params.g1 / params.omega_c;
    let half = params.delta / 2.0;
    let root = (half * half + params.omega_c * params.omega_c + params.g1 * params.g1).sqrt();
    let e_minus = half - root;
    let e_plus = half + root;
    let n0 = (1.0 + r * r).sqrt();

    let pm_state = |e: f64, label: StateLabel| {
        let npm = (1.0 + r * r + (e / params.omega_c).powi(2)).sqrt();
        DressedState {
            manifold: 1,
            label,
            epsilon: e,
            coeffs: vec![
                C64::new(-r / npm, 0.0),
                C64::new(0.0, e / params.omega_c / npm),
                C64::new(1.0 / npm, 0.0),
            ],
        }
    };
    let zero_state = DressedState {
        manifold: 1,
        label: StateLabel::Zero,
        epsilon: 0.0,
        coeffs: vec![
            C64::new(1.0 / n0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(r / n0, 0.0),
        ],
    };
    // ε_- < 0 = ε_0 < ε_+ holds whenever Ω_c > 0
    let states = vec![
        pm_state(e_minus, StateLabel::Minus),
        zero_state,
        pm_state(e_plus, StateLabel::Plus),
    ];
    Ok(ManifoldSpectrum {
        manifold: 1,
        states,
        sum_rule: sum_rule(params, 1),
        path: SpectrumPath::ClosedForm,
    })
}

/// The four constants of the manifold-`n` characteristic quartic
/// `ε⁴ − C ε³ + A ε² + B ε + G² = 0`.
pub fn quartic_constants(params: &SystemParams, n: usize) -> (f64, f64, f64, f64) {
    let nf = n as f64;
    let a = params.big_delta * params.delta
        - params.g1 * params.g1 * nf
        - params.g2 * params.g2 * (nf - 1.0)
        - params.omega_c * params.omega_c;
    let b = params.big_delta * (params.g1 * params.g1 * nf + params.omega_c * params.omega_c)
        + params.delta * params.g2 * params.g2 * (nf - 1.0);
    let c = params.big_delta + params.delta;
    let g2 = (params.g1 * params.g2).powi(2) * nf * (nf - 1.0);
    (a, b, c, g2)
}

/// Closed-form roots of `ε⁴ − C ε³ + A ε² + B ε + G² = 0`, ascending by real
/// part, via nested radicals evaluated in complex arithmetic (the inner
/// discriminant `X1² − 4 X2³` is generically negative for Hermitian blocks,
/// so the principal complex cube root is mandatory).
///
/// Returns the roots and a flag that is `true` when any denominator or
/// radical came out small enough (relative tolerance `1e-7`) to distrust the
/// evaluation, or when a root kept a notable imaginary residue.
pub fn quartic_roots(a: f64, b: f64, c: f64, g2: f64) -> ([C64; 4], bool) {
    let ac = C64::new(a, 0.0);
    let bc = C64::new(b, 0.0);
    let cc = C64::new(c, 0.0);
    let gc = C64::new(g2, 0.0);
    let mut shaky = false;

    let x1 = 2.0 * ac.powu(3) + 9.0 * ac * (bc * cc - 8.0 * gc) + 27.0 * (bc * bc + cc * cc * gc);
    let x2 = ac * ac + 3.0 * bc * cc + 12.0 * gc;
    let base = x1 + (x1 * x1 - 4.0 * x2.powu(3)).sqrt();
    // principal cube root
    let x = C64::from_polar(base.norm().cbrt(), base.arg() / 3.0);
    let x_scale = x1.norm().cbrt().max(x2.norm().sqrt()).max(1.0);
    if x.norm() < FALLBACK_TOL * x_scale {
        shaky = true;
    }
    let y = if x.norm() > 0.0 { x2 / x } else { C64::new(0.0, 0.0) };
    let d = (2f64.cbrt() * y + 2f64.powf(-1.0 / 3.0) * x) / 3.0;
    let s2 = cc * cc / 4.0 - 2.0 * ac / 3.0 + d;
    let s = s2.sqrt();
    let s_scale = (c * c / 4.0).abs().max((2.0 * a / 3.0).abs()).max(d.norm()).max(1.0);
    if s.norm() < FALLBACK_TOL * s_scale.sqrt() {
        shaky = true;
    }
    let q = if s.norm() > 0.0 {
        (2.0 * bc + ac * cc - cc.powu(3) / 4.0) / s
    } else {
        C64::new(0.0, 0.0)
    };
    let common = cc * cc / 2.0 - 4.0 * ac / 3.0 - d;
    let r12 = (common + q).sqrt();
    let r34 = (common - q).sqrt();
    let mut roots = [
        cc / 4.0 - s / 2.0 - r12 / 2.0,
        cc / 4.0 - s / 2.0 + r12 / 2.0,
        cc / 4.0 + s / 2.0 - r34 / 2.0,
        cc / 4.0 + s / 2.0 + r34 / 2.0,
    ];
    roots.sort_by(|p, q| p.re.partial_cmp(&q.re).unwrap());
    for r in &roots {
        if r.im.abs() > IM_TOL * r.re.abs().max(1.0) {
            shaky = true;
        }
    }
    (roots, shaky)
}

/// Closed-form spectrum of manifold `n >= 2`: quartic-root energies and
/// coefficient vectors over `(|n,1>, |n-1,2>, |n-1,3>, |n-2,4>)`:
///
/// with `F_k = 1 − ε_k(ε_k − Δ)/(g2²(n−1))` and `ν_k` the positive
/// normalizer,
/// `α_k = i g1 g2 sqrt(n(n−1)) F_k ν_k / (ε_k Ω_c)`,
/// `β_k = g2 sqrt(n−1) F_k ν_k / Ω_c`,
/// `μ_k = i (ε_k − Δ) ν_k / (g2 sqrt(n−1))`.
///
/// Any ill-conditioned denominator, imaginary root residue, or
/// eigen-equation residual beyond tolerance triggers a transparent fallback
/// to [`numeric_manifold`], flagged by [`SpectrumPath::Numeric`].
pub fn manifold_n(params: &SystemParams, n: usize) -> Result<ManifoldSpectrum> {
    params.validate()?;
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "manifold_n needs n >= 2, got {n}"
        )));
    }
    if params.omega_c == 0.0 || params.g2 == 0.0 {
        return numeric_manifold(params, n);
    }
    let (a, b, c, g2) = quartic_constants(params, n);
    let (roots, shaky) = quartic_roots(a, b, c, g2);
    if shaky {
        return numeric_manifold(params, n);
    }

    let nf = n as f64;
    let cd = params.g2 * (nf - 1.0).sqrt();
    let bd = params.omega_c;
    let root_scale = roots.iter().map(|r| r.re.abs()).fold(0.0, f64::max).max(1.0);
    let mut states = Vec::with_capacity(4);
    for (k, root) in roots.iter().enumerate() {
        let e = root.re;
        if e.abs() < FALLBACK_TOL * root_scale {
            return numeric_manifold(params, n);
        }
        let f = 1.0 - e * (e - params.big_delta) / (cd * cd);
        let nu2_inv = 1.0
            + ((e - params.big_delta) / cd).powi(2)
            + (cd / bd).powi(2) * (1.0 + nf * (params.g1 / e).powi(2)) * f * f;
        let nu = nu2_inv.sqrt().recip();
        let alpha = C64::new(0.0, params.g1 * params.g2 * (nf * (nf - 1.0)).sqrt() / (e * bd) * f * nu);
        let beta = C64::new(cd / bd * f * nu, 0.0);
        let mu = C64::new(0.0, (e - params.big_delta) / cd * nu);
        states.push(DressedState {
            manifold: n,
            label: label_for(n, k, 4),
            epsilon: e,
            coeffs: vec![alpha, beta, mu, C64::new(nu, 0.0)],
        });
    }

    let spectrum = ManifoldSpectrum {
        manifold: n,
        states,
        sum_rule: sum_rule(params, n),
        path: SpectrumPath::ClosedForm,
    };
    // final guard: each closed-form eigenpair must satisfy the block
    // eigen-equation; otherwise fall back
    let block = manifold_block(params, n)?;
    let scale = crate::operators::max_abs(&block);
    for s in &spectrum.states {
        if eigen_residual(&block, s) > RESIDUAL_TOL * scale {
            return numeric_manifold(params, n);
        }
    }
    Ok(spectrum)
}

/// Spectrum of any manifold through the preferred path: closed forms where
/// they exist, the numeric solver elsewhere.
pub fn manifold(params: &SystemParams, n: usize) -> Result<ManifoldSpectrum> {
    match n {
        0 => Ok(ground_state()),
        1 => first_manifold(params),
        _ => manifold_n(params, n),
    }
}

/// `‖B v − ε v‖₂` of a dressed state against its manifold block.
pub fn eigen_residual(block: &Array2<C64>, state: &DressedState) -> f64 {
    let v = Array1::from(state.coeffs.clone());
    let bv = block.dot(&v);
    let ev = v.mapv(|x| x * state.epsilon);
    (&bv - &ev).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Modulus of the overlap `|<u|v>|` between two coefficient vectors; equals
/// one exactly when the states agree up to a global phase.
pub fn overlap_modulus(u: &[C64], v: &[C64]) -> f64 {
    u.iter()
        .zip(v)
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        .norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::strong_coupling_unit_kappa;

    fn params() -> SystemParams {
        strong_coupling_unit_kappa()
    }

    #[test]
    fn first_manifold_matches_the_strong_coupling_numbers() {
        let p = params();
        let m = first_manifold(&p).unwrap();
        let e = m.energies();
        let want = (p.g1 * p.g1 + p.omega_c * p.omega_c).sqrt();
        assert!((e[0] + want).abs() < 1e-12, "lower state at -sqrt(40)");
        assert!(e[1].abs() < 1e-15, "resonant state at zero");
        assert!((e[2] - want).abs() < 1e-12, "upper state at +sqrt(40)");
        assert!((want - 40f64.sqrt()).abs() < 1e-15);
        for s in &m.states {
            assert!(s.norm_defect() < 1e-12, "closed-form normalization");
        }
        assert!(m.sum_rule_defect() < 1e-9, "energy sum must equal delta");
    }

    #[test]
    fn first_manifold_decoupled_limit() {
        let mut p = params();
        p.g1 = 0.0;
        let m = first_manifold(&p).unwrap();
        let zero = &m.states[1];
        assert!((zero.alpha() - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(zero.mu().norm() < 1e-15, "resonant state is pure |1,1> at g1 = 0");
    }

    #[test]
    fn numeric_first_manifold_decoupled_ladder() {
        let mut p = params();
        p.g1 = 0.0;
        p.delta = 0.0;
        let m = numeric_manifold(&p, 1).unwrap();
        let e = m.energies();
        assert!((e[0] + p.omega_c).abs() < 1e-12);
        assert!(e[1].abs() < 1e-12);
        assert!((e[2] - p.omega_c).abs() < 1e-12);
    }

    #[test]
    fn closed_form_first_manifold_agrees_with_numeric() {
        let p = params();
        let cf = first_manifold(&p).unwrap();
        let nm = numeric_manifold(&p, 1).unwrap();
        for (a, b) in cf.states.iter().zip(&nm.states) {
            assert!((a.epsilon - b.epsilon).abs() < 1e-10, "energy mismatch");
            let ov = overlap_modulus(&a.coeffs, &b.coeffs);
            assert!((ov - 1.0).abs() < 1e-10, "eigenvector mismatch, |<a|b>| = {ov}");
        }
    }

    #[test]
    fn quartic_sum_rule_and_symmetric_case() {
        let p = params();
        for n in 2..=5 {
            let m = manifold_n(&p, n).unwrap();
            assert_eq!(m.path, SpectrumPath::ClosedForm);
            assert!(m.sum_rule_defect() < 1e-9, "sum rule at n = {n}");
        }
        // δ = Δ = 0 makes the quartic even: roots in ± pairs
        let m = manifold_n(&p, 3).unwrap();
        let e = m.energies();
        assert!((e[0] + e[3]).abs() < 1e-9, "outer pair symmetric");
        assert!((e[1] + e[2]).abs() < 1e-9, "inner pair symmetric");
    }

    #[test]
    fn closed_form_manifolds_agree_with_numeric() {
        let mut p = params();
        p.big_delta = 0.1;
        for n in 2..=6 {
            let cf = manifold_n(&p, n).unwrap();
            let nm = numeric_manifold(&p, n).unwrap();
            let block = manifold_block(&p, n).unwrap();
            let scale = crate::operators::max_abs(&block);
            for (a, b) in cf.states.iter().zip(&nm.states) {
                assert!(
                    (a.epsilon - b.epsilon).abs() < 1e-8,
                    "energy mismatch at n = {n}: {} vs {}",
                    a.epsilon,
                    b.epsilon
                );
                let ov = overlap_modulus(&a.coeffs, &b.coeffs);
                assert!((ov - 1.0).abs() < 1e-8, "vector mismatch at n = {n}: {ov}");
                assert!(eigen_residual(&block, a) < 1e-8 * scale, "closed-form residual");
                assert!(eigen_residual(&block, b) < 1e-8 * scale, "numeric residual");
            }
        }
    }

    #[test]
    fn spectrum_manifold_blocks_match_full_hamiltonian() {
        use crate::basis::BareBasis;
        let p = params().with_n_trunc(7);
        let b = BareBasis::new(7).unwrap();
        let h = crate::operators::build_h0(&p, &b).unwrap();
        for n in 1..=b.max_complete_manifold() {
            let idx = b.manifold_states(n);
            let block = manifold_block(&p, n).unwrap();
            for (r, &fr) in idx.iter().enumerate() {
                for (c, &fc) in idx.iter().enumerate() {
                    assert!(
                        (h[(fr, fc)] - block[(r, c)]).norm() < 1e-15,
                        "manifold block must be the H0 submatrix (n = {n})"
                    );
                }
            }
        }
    }

    #[test]
    fn frozen_quartic_roots_for_spectrum_parameters() {
        // manifold 2 and 3 roots at the narrow-cavity spectrum parameters
        let p = crate::params::narrow_cavity_spectrum();
        let e2 = manifold_n(&p, 2).unwrap().energies();
        let e3 = manifold_n(&p, 3).unwrap().energies();
        let want2 = [
            -8.902891532337684,
            -5.670021149718621,
            5.762893625794165,
            8.91001905626214,
        ];
        let want3 = [
            -10.867521230291045,
            -8.065863980447682,
            8.153984957356364,
            10.879400253382364,
        ];
        for (got, want) in e2.iter().zip(&want2).chain(e3.iter().zip(&want3)) {
            assert!(
                (got - want).abs() < 1e-9,
                "quartic root drifted: {got} vs {want}"
            );
        }
    }

    #[test]
    fn orthonormality_within_each_manifold() {
        let mut p = params();
        p.delta = -0.4;
        p.big_delta = 0.7;
        for n in 1..=4 {
            let m = manifold(&p, n).unwrap();
            for (i, a) in m.states.iter().enumerate() {
                for (j, b) in m.states.iter().enumerate() {
                    let g: C64 = a
                        .coeffs
                        .iter()
                        .zip(&b.coeffs)
                        .map(|(x, y)| x.conj() * y)
                        .sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (g.norm() - want).abs() < 1e-10,
                        "Gram defect at n = {n}, ({i}, {j}): {g}"
                    );
                }
            }
        }
    }
}
