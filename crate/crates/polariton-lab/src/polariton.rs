//! Driving and damping in the polariton basis: transformation matrices,
//! per-manifold annihilation components, effective Rabi tables, damping
//! matrices, polariton ladder operators, and their commutator identities.

use ndarray::{Array1, Array2};

use crate::basis::BareBasis;
use crate::dressed::{self, DressedState, ManifoldSpectrum};
use crate::operators;
use crate::params::SystemParams;
use crate::{C64, Error, Result};

/// Equivalence tolerance between table entries and bare-operator matrix
/// elements.
const BRACKET_TOL: f64 = 1e-10;

/// Unitary change of basis on one manifold block: column `j` holds the bare
/// coefficients of the `j`-th dressed state, so bare = M · dressed.
#[derive(Debug, Clone)]
pub struct TransformationMatrix {
    pub manifold: usize,
    pub matrix: Array2<C64>,
    pub path: dressed::SpectrumPath,
}

impl TransformationMatrix {
    /// Largest entrywise deviation of `M†M` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let m = &self.matrix;
        let g = operators::adjoint(m).dot(m);
        let n = g.nrows();
        let mut d: f64 = 0.0;
        for r in 0..n {
            for c in 0..n {
                let want = if r == c { 1.0 } else { 0.0 };
                d = d.max((g[(r, c)] - C64::new(want, 0.0)).norm());
            }
        }
        d
    }
}

/// Build the basis-change matrix of manifold `n` from its dressed states.
pub fn transformation_matrix(params: &SystemParams, n: usize) -> Result<TransformationMatrix> {
    let spec = dressed::manifold(params, n)?;
    let size = spec.states.len();
    let mut m: Array2<C64> = Array2::zeros((size, size));
    for (j, s) in spec.states.iter().enumerate() {
        for (r, &c) in s.coeffs.iter().enumerate() {
            m[(r, j)] = c;
        }
    }
    Ok(TransformationMatrix {
        manifold: n,
        matrix: m,
        path: spec.path,
    })
}

/// The component of the cavity annihilation operator that de-excites
/// manifold `n` into manifold `n − 1`:
/// `a^(n) = sqrt(n) |n−1,1><n,1| + sqrt(n−1)(|n−2,2><n−1,2| +
/// |n−2,3><n−1,3|) + sqrt(n−2) |n−3,4><n−2,4|`,
/// with any term whose bare states fall outside the truncated space dropped.
/// Valid for `1 <= n <= n_trunc + 1` (the two highest values address the
/// clipped boundary manifolds); the components sum to the full annihilation
/// operator exactly.
pub fn annihilation_component(basis: &BareBasis, n: usize) -> Result<Array2<C64>> {
    if n == 0 || n > basis.max_manifold() {
        return Err(Error::InvalidArgument(format!(
            "manifold index {n} outside 1..={}",
            basis.max_manifold()
        )));
    }
    let mut m: Array2<C64> = Array2::zeros((basis.dim(), basis.dim()));
    let nt = basis.n_trunc;
    let nf = n as f64;
    // (level, source photons, amplitude)
    let terms = [
        (1usize, n, nf.sqrt()),
        (2, n.wrapping_sub(1), (nf - 1.0).sqrt()),
        (3, n.wrapping_sub(1), (nf - 1.0).sqrt()),
        (4, n.wrapping_sub(2), (nf - 2.0).sqrt()),
    ];
    for (level, src, amp) in terms {
        if amp <= 0.0 || !amp.is_finite() {
            continue;
        }
        if src >= 1 && src < nt {
            m[(basis.flat(src - 1, level), basis.flat(src, level))] = C64::new(amp, 0.0);
        }
    }
    Ok(m)
}

/// Effective Rabi frequencies driving transitions from the states of
/// manifold `n` down to the states of manifold `n − 1`; row `i` is the
/// destination state, column `j` the source state.
#[derive(Debug, Clone)]
pub struct CouplingTable {
    pub lower: usize,
    pub upper: usize,
    pub omega: Array2<C64>,
}

/// Photon number sitting in slot `s` of the manifold-`n` state order.
fn slot_photons(n: usize, s: usize) -> f64 {
    match s {
        0 => n as f64,
        1 | 2 => n as f64 - 1.0,
        3 => n as f64 - 2.0,
        _ => unreachable!(),
    }
}

fn table_entry(ep: f64, lo: &DressedState, hi: &DressedState, n: usize) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for s in 0..lo.coeffs.len().min(hi.coeffs.len()) {
        acc += lo.coeffs[s].conj() * hi.coeffs[s] * slot_photons(n, s).sqrt();
    }
    acc * ep
}

/// Build the Rabi table between manifolds `n − 1` and `n` from the dressed
/// coefficients and verify every entry against the bare matrix element
/// `<e_i^(n−1)| Hd |e_j^(n)> / i`; a deviation beyond `1e-10` (relative to
/// the drive amplitude) signals a phase-convention bug and is returned as an
/// internal-consistency error.
pub fn rabi_table(params: &SystemParams, n: usize) -> Result<CouplingTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("rabi_table needs n >= 1".into()));
    }
    let lower = dressed::manifold(params, n - 1)?;
    let upper = dressed::manifold(params, n)?;
    let mut omega: Array2<C64> = Array2::zeros((lower.states.len(), upper.states.len()));
    for (i, lo) in lower.states.iter().enumerate() {
        for (j, hi) in upper.states.iter().enumerate() {
            omega[(i, j)] = table_entry(params.ep, lo, hi, n);
        }
    }
    let table = CouplingTable {
        lower: n - 1,
        upper: n,
        omega,
    };
    let dev = rabi_bracket_defect(params, &table, &lower, &upper)?;
    if dev > BRACKET_TOL * params.ep.max(1.0) {
        return Err(Error::Inconsistent(format!(
            "Rabi table vs drive matrix elements differ by {dev:.3e} at manifold pair ({}, {n})",
            n - 1
        )));
    }
    Ok(table)
}

/// Max deviation of the manifold-`n` Rabi table from the drive matrix
/// elements, rebuilt from scratch (the equivalence the table construction
/// enforces, exposed for validation runs).
pub fn rabi_consistency(params: &SystemParams, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument("rabi_consistency needs n >= 1".into()));
    }
    let lower = dressed::manifold(params, n - 1)?;
    let upper = dressed::manifold(params, n)?;
    let mut omega: Array2<C64> = Array2::zeros((lower.states.len(), upper.states.len()));
    for (i, lo) in lower.states.iter().enumerate() {
        for (j, hi) in upper.states.iter().enumerate() {
            omega[(i, j)] = table_entry(params.ep, lo, hi, n);
        }
    }
    let table = CouplingTable {
        lower: n - 1,
        upper: n,
        omega,
    };
    rabi_bracket_defect(params, &table, &lower, &upper)
}

/// Max deviation of the manifold-`n` damping matrix from the residual
/// matrix elements, exposed for validation runs.
pub fn damping_consistency(params: &SystemParams, n: usize) -> Result<f64> {
    let dm = damping_matrix(params, n)?;
    let spec = dressed::manifold(params, n)?;
    damping_bracket_defect(params, &dm, &spec)
}

/// Max deviation between the table and `<e_i|Hd|e_j>/i` computed with bare
/// operators on a minimal truncated space.
fn rabi_bracket_defect(
    params: &SystemParams,
    table: &CouplingTable,
    lower: &ManifoldSpectrum,
    upper: &ManifoldSpectrum,
) -> Result<f64> {
    let nt = (table.upper + 2).max(3);
    let basis = BareBasis::new(nt)?;
    let p = params.with_n_trunc(nt);
    let hd = operators::build_hd(&p, &basis)?;
    let mut dev: f64 = 0.0;
    for (i, lo) in lower.states.iter().enumerate() {
        let vi = embed_state(&basis, lo);
        for (j, hi) in upper.states.iter().enumerate() {
            let vj = embed_state(&basis, hi);
            let bracket = sandwich(&vi, &hd, &vj) / C64::new(0.0, 1.0);
            dev = dev.max((bracket - table.omega[(i, j)]).norm());
        }
    }
    Ok(dev)
}

/// Hermitian matrix of damping rates within manifold `n`: diagonal entries
/// are the dressed-state decay rates, off-diagonal entries the
/// cross-damping.
#[derive(Debug, Clone)]
pub struct DampingMatrix {
    pub manifold: usize,
    pub gamma: Array2<C64>,
}

impl DampingMatrix {
    /// Largest violation of the Cauchy–Schwarz bound
    /// `|Γ_jk| <= sqrt(Γ_jj Γ_kk)`.
    pub fn cauchy_schwarz_defect(&self) -> f64 {
        let g = &self.gamma;
        let mut worst: f64 = 0.0;
        for j in 0..g.nrows() {
            for k in 0..g.ncols() {
                let bound = (g[(j, j)].re * g[(k, k)].re).max(0.0).sqrt();
                worst = worst.max(g[(j, k)].norm() - bound);
            }
        }
        worst
    }
}

/// Decay weight of slot `s` in manifold `n`: the photon decay scales with
/// the slot's photon number, level 2 adds `γ1 + γ2`, level 4 adds `γ3`.
fn slot_decay(params: &SystemParams, n: usize, s: usize) -> f64 {
    let ph = slot_photons(n, s).max(0.0);
    params.kappa * ph
        + match s {
            1 => params.gamma1 + params.gamma2,
            3 => params.gamma3,
            _ => 0.0,
        }
}

/// Build the damping matrix of manifold `n` and verify every entry against
/// the anti-Hermitian bare matrix element `<e_j| Hres |e_k> / (−i)`.
pub fn damping_matrix(params: &SystemParams, n: usize) -> Result<DampingMatrix> {
    let spec = dressed::manifold(params, n)?;
    let size = spec.states.len();
    let mut g: Array2<C64> = Array2::zeros((size, size));
    for (j, sj) in spec.states.iter().enumerate() {
        for (k, sk) in spec.states.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..size.min(sj.coeffs.len()) {
                acc += sj.coeffs[s].conj() * sk.coeffs[s] * slot_decay(params, n, s);
            }
            g[(j, k)] = acc;
        }
    }
    let dm = DampingMatrix {
        manifold: n,
        gamma: g,
    };
    let dev = damping_bracket_defect(params, &dm, &spec)?;
    let scale = params
        .kappa
        .max(params.gamma1 + params.gamma2)
        .max(params.gamma3)
        .max(1.0)
        * (n as f64).max(1.0);
    if dev > BRACKET_TOL * scale {
        return Err(Error::Inconsistent(format!(
            "damping matrix vs residual matrix elements differ by {dev:.3e} at manifold {n}"
        )));
    }
    Ok(dm)
}

fn damping_bracket_defect(
    params: &SystemParams,
    dm: &DampingMatrix,
    spec: &ManifoldSpectrum,
) -> Result<f64> {
    let nt = (dm.manifold + 2).max(3);
    let basis = BareBasis::new(nt)?;
    let p = params.with_n_trunc(nt);
    let hres = operators::residual_hamiltonian(&p, &basis)?;
    let mut dev: f64 = 0.0;
    for (j, sj) in spec.states.iter().enumerate() {
        let vj = embed_state(&basis, sj);
        for (k, sk) in spec.states.iter().enumerate() {
            let vk = embed_state(&basis, sk);
            let bracket = sandwich(&vj, &hres, &vk) / C64::new(0.0, -1.0);
            dev = dev.max((bracket - dm.gamma[(j, k)]).norm());
        }
    }
    Ok(dev)
}

/// First-manifold damping rates in closed form:
/// `Γ_0 = κ / (1 + (g1/Ω_c)²)` and
/// `Γ_± = (κ g1² + (γ1+γ2) ε_±²) / (g1² + Ω_c² + ε_±²)`,
/// returned in ascending-energy state order `(−, 0, +)`.
pub fn first_manifold_decay_rates(params: &SystemParams) -> Result<[f64; 3]> {
    params.validate()?;
    if params.omega_c == 0.0 {
        return Err(Error::InvalidArgument(
            "closed-form first-manifold rates need omega_c > 0".into(),
        ));
    }
    let r2 = (params.g1 / params.omega_c).powi(2);
    let g0 = params.kappa / (1.0 + r2);
    let denom_base = params.g1 * params.g1 + params.omega_c * params.omega_c;
    let half = params.delta / 2.0;
    let root = (half * half + denom_base).sqrt();
    let gpm = |e: f64| {
        (params.kappa * params.g1 * params.g1 + (params.gamma1 + params.gamma2) * e * e)
            / (denom_base + e * e)
    };
    Ok([gpm(half - root), g0, gpm(half + root)])
}

/// Rank-1 polariton ladder operator `p_ij^(n) = |e_i^(n−1)><e_j^(n)|`
/// represented on the full truncated bare space.
#[derive(Debug, Clone)]
pub struct PolaritonOperator {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub matrix: Array2<C64>,
}

/// Embed a dressed state of a complete manifold into the full bare space.
pub fn embed_state(basis: &BareBasis, state: &DressedState) -> Array1<C64> {
    let idx = basis.manifold_states(state.manifold);
    assert_eq!(
        idx.len(),
        state.coeffs.len(),
        "dressed state does not fit the truncated manifold"
    );
    let mut v: Array1<C64> = Array1::zeros(basis.dim());
    for (&f, &c) in idx.iter().zip(&state.coeffs) {
        v[f] = c;
    }
    v
}

fn sandwich(u: &Array1<C64>, m: &Array2<C64>, v: &Array1<C64>) -> C64 {
    let mv = m.dot(v);
    u.iter().zip(mv.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Build `p_ij^(n)` from the dressed states of manifolds `n − 1` and `n`.
pub fn polariton_operator(
    params: &SystemParams,
    basis: &BareBasis,
    n: usize,
    i: usize,
    j: usize,
) -> Result<PolaritonOperator> {
    if n == 0 || n > basis.max_complete_manifold() {
        return Err(Error::InvalidArgument(format!(
            "polariton operator needs 1 <= n <= {}, got {n}",
            basis.max_complete_manifold()
        )));
    }
    let lower = dressed::manifold(params, n - 1)?;
    let upper = dressed::manifold(params, n)?;
    let (Some(lo), Some(hi)) = (lower.states.get(i), upper.states.get(j)) else {
        return Err(Error::InvalidArgument(format!(
            "state indices ({i}, {j}) out of range for manifold pair ({}, {n})",
            n - 1
        )));
    };
    let vi = embed_state(basis, lo);
    let vj = embed_state(basis, hi);
    let mut m: Array2<C64> = Array2::zeros((basis.dim(), basis.dim()));
    for (r, a) in vi.iter().enumerate() {
        if a.norm() == 0.0 {
            continue;
        }
        for (c, b) in vj.iter().enumerate() {
            m[(r, c)] = a * b.conj();
        }
    }
    Ok(PolaritonOperator { n, i, j, matrix: m })
}

/// Closed-form mixing coefficients of the first-manifold polariton creation
/// operators over `(a†, σ21, σ31)`:
/// `p_0† = (a† + (g1/Ω_c) σ31) / N_0` and
/// `p_±† = (−(g1/Ω_c) a† + i (ε_±/Ω_c) σ21 + σ31) / N_±`.
#[derive(Debug, Clone, Copy)]
pub struct FirstManifoldMixing {
    /// Coefficient on `a†`.
    pub on_create: C64,
    /// Coefficient on `σ21`.
    pub on_sigma21: C64,
    /// Coefficient on `σ31`.
    pub on_sigma31: C64,
}

/// Mixing coefficients for the first-manifold polariton with the given
/// ascending-energy state index (0 = lower, 1 = resonant, 2 = upper).
pub fn first_manifold_mixing(params: &SystemParams, j: usize) -> Result<FirstManifoldMixing> {
    params.validate()?;
    if params.omega_c == 0.0 {
        return Err(Error::InvalidArgument(
            "closed-form mixing needs omega_c > 0".into(),
        ));
    }
    let r = params.g1 / params.omega_c;
    let half = params.delta / 2.0;
    let root = (half * half + params.omega_c * params.omega_c + params.g1 * params.g1).sqrt();
    match j {
        1 => {
            let n0 = (1.0 + r * r).sqrt();
            Ok(FirstManifoldMixing {
                on_create: C64::new(1.0 / n0, 0.0),
                on_sigma21: C64::new(0.0, 0.0),
                on_sigma31: C64::new(r / n0, 0.0),
            })
        }
        0 | 2 => {
            let e = if j == 0 { half - root } else { half + root };
            let npm = (1.0 + r * r + (e / params.omega_c).powi(2)).sqrt();
            Ok(FirstManifoldMixing {
                on_create: C64::new(-r / npm, 0.0),
                on_sigma21: C64::new(0.0, e / params.omega_c / npm),
                on_sigma31: C64::new(1.0 / npm, 0.0),
            })
        }
        _ => Err(Error::InvalidArgument(format!(
            "first-manifold state index must be 0..=2, got {j}"
        ))),
    }
}

/// Build the operator form `c_a a† + c_21 σ21 + c_31 σ31` of a
/// first-manifold polariton creation operator on the full truncated space.
pub fn first_manifold_creation_operator(
    params: &SystemParams,
    basis: &BareBasis,
    j: usize,
) -> Result<Array2<C64>> {
    let mix = first_manifold_mixing(params, j)?;
    let ad = operators::adjoint(&operators::build_annihilation(basis));
    let s21 = operators::build_sigma(basis, 2, 1)?;
    let s31 = operators::build_sigma(basis, 3, 1)?;
    Ok(ad.mapv(|v| v * mix.on_create)
        + s21.mapv(|v| v * mix.on_sigma21)
        + s31.mapv(|v| v * mix.on_sigma31))
}

/// Deviations of the polariton commutators from their closed forms, checked
/// as matrix identities on the subspace with photon number at most
/// `n_trunc − 2` (the truncation boundary breaks the ladder above it).
///
/// The identities, with `D21 = σ22 − σ11`, `D31 = σ33 − σ11`, and
/// `r = g1/Ω_c`:
///
/// `[p_0, p_0†] = (1 − r² D31) / N_0²`
///
/// `[p_±, p_±†] = (r² − (ε_±/Ω_c)² D21 − D31 + i (ε_±/Ω_c)(σ32 − σ23)) / N_±²`
#[derive(Debug, Clone, Copy)]
pub struct CommutatorReport {
    pub resonant_defect: f64,
    pub lower_defect: f64,
    pub upper_defect: f64,
    pub ground_expectation: f64,
}

impl CommutatorReport {
    pub fn max_defect(&self) -> f64 {
        self.resonant_defect.max(self.lower_defect).max(self.upper_defect)
    }
}

/// Verify the first-manifold commutation relations against their operator
/// closed forms away from the truncation boundary.
pub fn commutator_check(params: &SystemParams, basis: &BareBasis) -> Result<CommutatorReport> {
    params.validate()?;
    let r = params.g1 / params.omega_c;
    let half = params.delta / 2.0;
    let root = (half * half + params.omega_c * params.omega_c + params.g1 * params.g1).sqrt();

    let s11 = build(basis, 1, 1)?;
    let s22 = build(basis, 2, 2)?;
    let s33 = build(basis, 3, 3)?;
    let s23 = build(basis, 2, 3)?;
    let s32 = build(basis, 3, 2)?;
    let d21 = &s22 - &s11;
    let d31 = &s33 - &s11;
    let id: Array2<C64> = Array2::eye(basis.dim());

    // projector onto photon number <= n_trunc - 2
    let mut proj: Array2<C64> = Array2::zeros((basis.dim(), basis.dim()));
    for n in 0..basis.n_trunc - 1 {
        for l in 1..=4 {
            let f = basis.flat(n, l);
            proj[(f, f)] = C64::new(1.0, 0.0);
        }
    }
    let restrict = |m: &Array2<C64>| proj.dot(m).dot(&proj);
    let defect = |lhs: &Array2<C64>, rhs: &Array2<C64>| {
        operators::max_abs(&(&restrict(lhs) - &restrict(rhs)))
    };

    let commutator = |j: usize| -> Result<Array2<C64>> {
        let pdag = first_manifold_creation_operator(params, basis, j)?;
        let p = operators::adjoint(&pdag);
        Ok(p.dot(&pdag) - pdag.dot(&p))
    };

    let n0sq = 1.0 + r * r;
    let rhs0 = (&id - &d31.mapv(|v| v * (r * r))).mapv(|v| v / n0sq);
    let resonant_defect = defect(&commutator(1)?, &rhs0);

    let mut pm_defect = [0.0f64; 2];
    for (slot, j) in [(0usize, 0usize), (1, 2)] {
        let e = if j == 0 { half - root } else { half + root };
        let eo = e / params.omega_c;
        let npm_sq = 1.0 + r * r + eo * eo;
        let rhs = (id.mapv(|v| v * (r * r)) - d21.mapv(|v| v * (eo * eo)) - &d31
            + (&s32 - &s23).mapv(|v| v * C64::new(0.0, eo)))
        .mapv(|v| v / npm_sq);
        pm_defect[slot] = defect(&commutator(j)?, &rhs);
    }

    // ground-state expectation of [p_0, p_0†]: D31 expectation is −1 there
    let comm0 = commutator(1)?;
    let g = basis.flat(0, 1);
    let ground_expectation = comm0[(g, g)].re;

    Ok(CommutatorReport {
        resonant_defect,
        lower_defect: pm_defect[0],
        upper_defect: pm_defect[1],
        ground_expectation,
    })
}

fn build(basis: &BareBasis, i: usize, j: usize) -> Result<Array2<C64>> {
    operators::build_sigma(basis, i, j)
}

/// The three pieces of the effective generator, reconstructed in the
/// polariton basis over manifolds `0..=n_max`.
#[derive(Debug, Clone)]
pub struct PolaritonGenerator {
    /// `Σ_n Σ_j ε_j^(n) |e_j^(n)><e_j^(n)|`.
    pub h0: Array2<C64>,
    /// `Σ_n Σ_ij (i Ω_ij^(n,n−1) |e_i^(n−1)><e_j^(n)| + h.c.)`.
    pub hd: Array2<C64>,
    /// `Σ_n Σ_jk (−i Γ_jk^(n)) |e_j^(n)><e_k^(n)|`.
    pub hres: Array2<C64>,
}

impl PolaritonGenerator {
    pub fn total(&self) -> Array2<C64> {
        &(&self.h0 + &self.hd) + &self.hres
    }
}

/// Reconstruct the effective generator from the dressed spectra, Rabi
/// tables, and damping matrices of manifolds `0..=n_max`. With
/// `include_offdiagonal_damping = false` the cross-damping entries are
/// dropped from the damping sum (the diagonal approximation).
///
/// For `n_max = n_trunc − 1` the total equals the bare effective
/// Hamiltonian restricted to the covered manifolds (an exact change of
/// basis).
pub fn assemble_polariton_generator(
    params: &SystemParams,
    basis: &BareBasis,
    n_max: usize,
    include_offdiagonal_damping: bool,
) -> Result<PolaritonGenerator> {
    if n_max == 0 || n_max > basis.max_complete_manifold() {
        return Err(Error::InvalidArgument(format!(
            "n_max must lie in 1..={}, got {n_max}",
            basis.max_complete_manifold()
        )));
    }
    let dim = basis.dim();
    let mut h0: Array2<C64> = Array2::zeros((dim, dim));
    let mut hd: Array2<C64> = Array2::zeros((dim, dim));
    let mut hres: Array2<C64> = Array2::zeros((dim, dim));

    let mut embedded: Vec<Vec<Array1<C64>>> = Vec::with_capacity(n_max + 1);
    let mut spectra: Vec<ManifoldSpectrum> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let spec = dressed::manifold(params, n)?;
        embedded.push(spec.states.iter().map(|s| embed_state(basis, s)).collect());
        spectra.push(spec);
    }

    let i_unit = C64::new(0.0, 1.0);
    for n in 0..=n_max {
        for (j, s) in spectra[n].states.iter().enumerate() {
            rank1_acc(&mut h0, &embedded[n][j], &embedded[n][j], C64::new(s.epsilon, 0.0));
        }
        if n >= 1 {
            let table = rabi_table(params, n)?;
            for i in 0..spectra[n - 1].states.len() {
                for j in 0..spectra[n].states.len() {
                    let w = table.omega[(i, j)];
                    rank1_acc(&mut hd, &embedded[n - 1][i], &embedded[n][j], i_unit * w);
                    rank1_acc(&mut hd, &embedded[n][j], &embedded[n - 1][i], (i_unit * w).conj());
                }
            }
            let dm = damping_matrix(params, n)?;
            for j in 0..spectra[n].states.len() {
                for k in 0..spectra[n].states.len() {
                    if !include_offdiagonal_damping && j != k {
                        continue;
                    }
                    rank1_acc(&mut hres, &embedded[n][j], &embedded[n][k], -i_unit * dm.gamma[(j, k)]);
                }
            }
        }
    }
    Ok(PolaritonGenerator { h0, hd, hres })
}

fn rank1_acc(m: &mut Array2<C64>, ket: &Array1<C64>, bra: &Array1<C64>, w: C64) {
    if w.norm() == 0.0 {
        return;
    }
    for (r, a) in ket.iter().enumerate() {
        if a.norm() == 0.0 {
            continue;
        }
        for (c, b) in bra.iter().enumerate() {
            if b.norm() == 0.0 {
                continue;
            }
            m[(r, c)] += w * a * b.conj();
        }
    }
}

/// Projector onto the union of manifolds `0..=n_max`.
pub fn manifold_sector_projector(basis: &BareBasis, n_max: usize) -> Array2<C64> {
    let mut p: Array2<C64> = Array2::zeros((basis.dim(), basis.dim()));
    for m in 0..=n_max.min(basis.max_manifold()) {
        for f in basis.manifold_states(m) {
            p[(f, f)] = C64::new(1.0, 0.0);
        }
    }
    p
}
