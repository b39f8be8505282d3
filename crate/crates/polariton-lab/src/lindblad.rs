//! Lindblad master equation in superoperator form: Liouvillian assembly,
//! steady-state solution with uniqueness and residual checks, and photon
//! truncation diagnostics.

use ndarray::linalg::kron;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, FactorizeInto, Norm, Solve, UPLO};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::BareBasis;
use crate::operators;
use crate::params::SystemParams;
use crate::{C64, Error, Result};

/// Largest allowed superoperator dimension (`dim²`); beyond this the dense
/// Liouvillian would not fit comfortably in memory.
pub const MAX_SUPEROPERATOR_DIM: usize = 6400;

/// Stack a matrix column by column: `vec(ρ)[i + j·dim] = ρ[i, j]`.
pub fn vectorize(rho: &Array2<C64>) -> Array1<C64> {
    let dim = rho.nrows();
    Array1::from_shape_fn(dim * dim, |k| rho[(k % dim, k / dim)])
}

/// Undo [`vectorize`].
pub fn unvectorize(v: &Array1<C64>, dim: usize) -> Array2<C64> {
    Array2::from_shape_fn((dim, dim), |(i, j)| v[i + j * dim])
}

/// Dense superoperator for
/// `ρ̇ = −i(Heff ρ − ρ Heff†) + 2 Σ C ρ C†`
/// in the column-stacking convention, where
/// `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    /// Dimension of the underlying Hilbert space.
    pub hilbert_dim: usize,
    /// `dim² × dim²` generator matrix.
    pub matrix: Array2<C64>,
}

impl Liouvillian {
    pub fn superop_dim(&self) -> usize {
        self.hilbert_dim * self.hilbert_dim
    }

    /// Largest column sum of the trace functional applied to the generator;
    /// zero for a trace-preserving master equation.
    pub fn trace_preservation_defect(&self) -> f64 {
        let dim = self.hilbert_dim;
        let mut worst: f64 = 0.0;
        for j in 0..self.superop_dim() {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..dim {
                acc += self.matrix[(i + i * dim, j)];
            }
            worst = worst.max(acc.norm());
        }
        worst
    }

    /// Infinity norm (max absolute row sum) of the generator.
    pub fn opnorm_inf(&self) -> f64 {
        self.matrix
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|v| v.norm()).sum())
            .fold(0.0, f64::max)
    }
}

/// Assemble the dense Liouvillian from the effective Hamiltonian drift and
/// the recycling terms.
pub fn build_liouvillian(params: &SystemParams, basis: &BareBasis) -> Result<Liouvillian> {
    params.validate()?;
    let dim = basis.dim();
    if dim * dim > MAX_SUPEROPERATOR_DIM {
        return Err(Error::Resource(format!(
            "superoperator dimension {} exceeds the cap {MAX_SUPEROPERATOR_DIM} \
             (photon cutoff {} is too large for a dense Liouvillian)",
            dim * dim,
            basis.n_trunc
        )));
    }
    let heff = operators::build_heff(params, basis)?;
    let id: Array2<C64> = Array2::eye(dim);
    let minus_i = C64::new(0.0, -1.0);
    let mut l = kron(&id, &heff).mapv(|v| v * minus_i);
    l = l + kron(&heff.mapv(|v| v.conj()), &id).mapv(|v| v * (-minus_i));
    for c in operators::build_collapse_ops(params, basis)? {
        let cc = c.mapv(|v| v.conj());
        l = l + kron(&cc, &c).mapv(|v| v * 2.0);
    }
    Ok(Liouvillian {
        hilbert_dim: dim,
        matrix: l,
    })
}

/// Matrix-free action of the master equation on a density matrix.
pub fn apply_generator(
    heff: &Array2<C64>,
    collapse: &[Array2<C64>],
    rho: &Array2<C64>,
) -> Array2<C64> {
    let minus_i = C64::new(0.0, -1.0);
    let heff_dag = operators::adjoint(heff);
    let mut out = (heff.dot(rho) - rho.dot(&heff_dag)).mapv(|v| v * minus_i);
    for c in collapse {
        out = out + c.dot(rho).dot(&operators::adjoint(c)).mapv(|v| v * 2.0);
    }
    out
}

/// A physical state: Hermitian, unit-trace, positive within tolerance.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub rho: Array2<C64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|k| self.rho[(k, k)]).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        operators::hermiticity_defect(&self.rho)
    }

    /// Smallest eigenvalue of the Hermitized state; small negative values
    /// measure the numerical positivity defect.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = self
            .rho
            .iter()
            .zip(operators::adjoint(&self.rho).iter())
            .map(|(a, b)| (a + b) / 2.0)
            .collect::<Vec<_>>();
        let herm = Array2::from_shape_vec((self.dim(), self.dim()), herm)
            .expect("shape preserved");
        let (w, _) = herm
            .eigh(UPLO::Lower)
            .map_err(|e| Error::Linalg(format!("density-matrix eigenvalues failed: {e}")))?;
        Ok(w.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    /// Population of one bare basis state.
    pub fn population(&self, flat: usize) -> f64 {
        self.rho[(flat, flat)].re
    }

    /// Check the physical-state invariants (Hermiticity and trace to
    /// `1e-10`, eigenvalues above `−1e-8`).
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > 1e-10 {
            return Err(Error::Inconsistent(format!(
                "density matrix Hermiticity defect {h:.3e}"
            )));
        }
        let t = (self.trace() - C64::new(1.0, 0.0)).norm();
        if t > 1e-10 {
            return Err(Error::Inconsistent(format!(
                "density matrix trace defect {t:.3e}"
            )));
        }
        let min = self.min_eigenvalue()?;
        if min < -1e-8 {
            return Err(Error::Inconsistent(format!(
                "density matrix has eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }
}

/// Expectation value `Tr[op ρ]`.
pub fn expectation(op: &Array2<C64>, dm: &DensityMatrix) -> C64 {
    let prod = op.dot(&dm.rho);
    (0..prod.nrows()).map(|k| prod[(k, k)]).sum()
}

/// Diagnostics from the steady-state solve.
#[derive(Debug, Clone, Copy)]
pub struct SteadyStateReport {
    /// `‖L vec(ρ_ss)‖_∞` after Hermitization and normalization.
    pub residual_inf: f64,
    /// `‖L‖_∞`, the scale the residual is compared against.
    pub generator_norm_inf: f64,
    /// Overlap modulus between the kernel vectors reached from two
    /// independent random starts; 1 for a unique steady state.
    pub kernel_alignment: f64,
}

const KERNEL_ALIGNMENT_TOL: f64 = 1e-6;
const RESIDUAL_REL_TOL: f64 = 1e-10;

/// Solve `L[ρ] = 0` with unit trace. The kernel is required to be
/// one-dimensional (verified by inverse iteration from two random starts);
/// the result is Hermitized, normalized, and residual-checked against
/// `1e-10 · ‖L‖`.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    Ok(steady_state_with_report(l)?.0)
}

/// [`steady_state`] with the solver diagnostics attached.
pub fn steady_state_with_report(l: &Liouvillian) -> Result<(DensityMatrix, SteadyStateReport)> {
    let dim = l.hilbert_dim;
    let n = l.superop_dim();

    // a multi-dimensional kernel must be diagnosed before the trace-bordered
    // solve, whose matrix goes singular in exactly that case
    let kernel_alignment = kernel_alignment(l)?;
    if kernel_alignment < 1.0 - KERNEL_ALIGNMENT_TOL {
        return Err(Error::Degenerate(format!(
            "steady state is not unique: kernel vectors from independent starts \
             align to {kernel_alignment:.12} (decoupled sectors or zero drive?)"
        )));
    }

    // border the singular generator with the trace constraint: solving
    // (L + e0 tᵀ) x = e0 enforces L x = 0 together with tr(x) = 1
    let mut bordered = l.matrix.clone();
    for k in 0..dim {
        bordered[(0, k + k * dim)] += C64::new(1.0, 0.0);
    }
    let mut rhs: Array1<C64> = Array1::zeros(n);
    rhs[0] = C64::new(1.0, 0.0);
    let factor = bordered
        .factorize_into()
        .map_err(|e| Error::Linalg(format!("steady-state factorization failed: {e}")))?;
    let x = factor
        .solve_into(rhs)
        .map_err(|e| Error::Linalg(format!("steady-state solve failed: {e}")))?;

    // hermitize and normalize
    let raw = unvectorize(&x, dim);
    let mut rho = Array2::from_shape_fn((dim, dim), |(i, j)| {
        (raw[(i, j)] + raw[(j, i)].conj()) / 2.0
    });
    let trace: C64 = (0..dim).map(|k| rho[(k, k)]).sum();
    if trace.norm() < 1e-300 {
        return Err(Error::Linalg("steady-state solution has zero trace".into()));
    }
    rho.mapv_inplace(|v| v / trace);

    let residual_inf = l
        .matrix
        .dot(&vectorize(&rho))
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let generator_norm_inf = l.opnorm_inf();
    if residual_inf > RESIDUAL_REL_TOL * generator_norm_inf {
        return Err(Error::Linalg(format!(
            "steady-state residual {residual_inf:.3e} exceeds {RESIDUAL_REL_TOL:.0e} × ‖L‖ = {:.3e}",
            RESIDUAL_REL_TOL * generator_norm_inf
        )));
    }
    Ok((
        DensityMatrix { rho },
        SteadyStateReport {
            residual_inf,
            generator_norm_inf,
            kernel_alignment,
        },
    ))
}

/// Inverse-iterate `(L + σI)^{-1}` from two seeded random starts and return
/// the overlap modulus of the two limits; a value below 1 exposes a
/// multi-dimensional kernel.
fn kernel_alignment(l: &Liouvillian) -> Result<f64> {
    let n = l.superop_dim();
    let sigma = 1e-9 * l.opnorm_inf().max(1.0);
    let mut shifted = l.matrix.clone();
    for k in 0..n {
        shifted[(k, k)] += C64::new(sigma, 0.0);
    }
    let factor = shifted
        .factorize_into()
        .map_err(|e| Error::Linalg(format!("kernel-probe factorization failed: {e}")))?;
    let mut limits: Vec<Array1<C64>> = Vec::with_capacity(2);
    for seed in [0x5EED_0001u64, 0x5EED_0002u64] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Array1<C64> = Array1::from_shape_fn(n, |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        for _ in 0..3 {
            v = factor
                .solve_into(v)
                .map_err(|e| Error::Linalg(format!("kernel-probe solve failed: {e}")))?;
            let norm = v.norm_l2();
            if norm == 0.0 {
                return Err(Error::Linalg("kernel probe collapsed to zero".into()));
            }
            v.mapv_inplace(|x| x / norm);
        }
        limits.push(v);
    }
    let dot: C64 = limits[0]
        .iter()
        .zip(limits[1].iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(dot.norm())
}

/// Photon-truncation adequacy of the steady state: populations of the two
/// highest Fock levels at the requested cutoff, plus the drift of the mean
/// photon number when a reduced baseline cutoff is doubled (the baseline
/// keeps the doubled superoperator inside the memory cap).
#[derive(Debug, Clone, Copy)]
pub struct TruncationReport {
    pub n_trunc: usize,
    /// Mean photon number at the requested cutoff.
    pub photon_mean: f64,
    /// Total population of the highest Fock level.
    pub tail_top: f64,
    /// Total population of the second-highest Fock level.
    pub tail_next: f64,
    /// Baseline cutoff used for the doubling comparison.
    pub doubling_base: usize,
    /// Mean photon number at the baseline cutoff.
    pub nbar_base: f64,
    /// `|⟨a†a⟩(2·base) − ⟨a†a⟩(base)|`.
    pub nbar_drift: f64,
}

fn photon_observables(params: &SystemParams) -> Result<(f64, f64, f64)> {
    let basis = BareBasis::new(params.n_trunc)?;
    let l = build_liouvillian(params, &basis)?;
    let dm = steady_state(&l)?;
    let mut nbar = 0.0;
    let mut tail_top = 0.0;
    let mut tail_next = 0.0;
    for n in 0..params.n_trunc {
        for level in 1..=4 {
            let p = dm.population(basis.flat(n, level));
            nbar += n as f64 * p;
            if n == params.n_trunc - 1 {
                tail_top += p;
            } else if n == params.n_trunc - 2 {
                tail_next += p;
            }
        }
    }
    Ok((nbar, tail_top, tail_next))
}

/// Check that the photon cutoff is adequate for the steady state at the
/// given parameters.
pub fn truncation_check(params: &SystemParams) -> Result<TruncationReport> {
    params.validate()?;
    let (photon_mean, tail_top, tail_next) = photon_observables(params)?;
    let doubling_base = params.n_trunc.min(8);
    let (nbar_base, _, _) = photon_observables(&params.with_n_trunc(doubling_base))?;
    let (nbar_doubled, _, _) = photon_observables(&params.with_n_trunc(2 * doubling_base))?;
    Ok(TruncationReport {
        n_trunc: params.n_trunc,
        photon_mean,
        tail_top,
        tail_next,
        doubling_base,
        nbar_base,
        nbar_drift: (nbar_doubled - nbar_base).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::narrow_cavity_spectrum;

    fn small_params() -> SystemParams {
        narrow_cavity_spectrum().with_n_trunc(4)
    }

    #[test]
    fn vectorization_round_trips_and_matches_kron_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dim = 5;
        let mk = |rng: &mut ChaCha8Rng| {
            Array2::from_shape_fn((dim, dim), |_| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            })
        };
        let a = mk(&mut rng);
        let rho = mk(&mut rng);
        let b = mk(&mut rng);
        assert_eq!(unvectorize(&vectorize(&rho), dim), rho);
        let lhs = vectorize(&a.dot(&rho).dot(&b));
        let rhs = kron(&b.t().to_owned(), &a).dot(&vectorize(&rho));
        let dev = (&lhs - &rhs).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "column-stacking identity defect {dev}");
    }

    #[test]
    fn generator_matches_matrix_free_action() {
        let p = small_params();
        let b = BareBasis::new(p.n_trunc).unwrap();
        let l = build_liouvillian(&p, &b).unwrap();
        let heff = operators::build_heff(&p, &b).unwrap();
        let collapse = operators::build_collapse_ops(&p, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let raw = Array2::from_shape_fn((b.dim(), b.dim()), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let rho = raw.clone() + operators::adjoint(&raw);
        let dense = unvectorize(&l.matrix.dot(&vectorize(&rho)), b.dim());
        let free = apply_generator(&heff, &collapse, &rho);
        let dev = operators::max_abs(&(&dense - &free));
        assert!(dev < 1e-10, "dense vs matrix-free generator defect {dev}");
    }

    #[test]
    fn generator_is_trace_preserving() {
        let p = small_params();
        let b = BareBasis::new(p.n_trunc).unwrap();
        let l = build_liouvillian(&p, &b).unwrap();
        assert!(l.trace_preservation_defect() < 1e-10);
        // and on explicit random Hermitian states
        let heff = operators::build_heff(&p, &b).unwrap();
        let collapse = operators::build_collapse_ops(&p, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let raw = Array2::from_shape_fn((b.dim(), b.dim()), |_| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let rho = raw.clone() + operators::adjoint(&raw);
            let out = apply_generator(&heff, &collapse, &rho);
            let tr: C64 = (0..b.dim()).map(|k| out[(k, k)]).sum();
            assert!(tr.norm() < 1e-10, "trace of the generator action {tr}");
        }
    }

    #[test]
    fn undriven_ground_state_is_stationary() {
        let p = small_params().with_ep(0.0);
        let b = BareBasis::new(p.n_trunc).unwrap();
        let heff = operators::build_heff(&p, &b).unwrap();
        let collapse = operators::build_collapse_ops(&p, &b).unwrap();
        let mut rho: Array2<C64> = Array2::zeros((b.dim(), b.dim()));
        rho[(b.flat(0, 1), b.flat(0, 1))] = C64::new(1.0, 0.0);
        let out = apply_generator(&heff, &collapse, &rho);
        assert!(operators::max_abs(&out) < 1e-14, "ground state must be dark");
    }

    #[test]
    fn decoupled_cavity_sector_decays_at_kappa() {
        // with all couplings off and the atom parked in level 3, the mean
        // field obeys d<a>/dt = -kappa <a>
        let mut p = small_params().with_ep(0.0);
        p.g1 = 0.0;
        p.g2 = 0.0;
        p.omega_c = 0.0;
        let b = BareBasis::new(p.n_trunc).unwrap();
        let heff = operators::build_heff(&p, &b).unwrap();
        let collapse = operators::build_collapse_ops(&p, &b).unwrap();
        let a = operators::build_annihilation(&b);
        // atom in level 3, cavity in (|0> + |1>)/sqrt(2)
        let mut psi: Array1<C64> = Array1::zeros(b.dim());
        psi[b.flat(0, 3)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        psi[b.flat(1, 3)] = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let rho = Array2::from_shape_fn((b.dim(), b.dim()), |(i, j)| psi[i] * psi[j].conj());
        let before: C64 = {
            let prod = a.dot(&rho);
            (0..b.dim()).map(|k| prod[(k, k)]).sum()
        };
        let rhodot = apply_generator(&heff, &collapse, &rho);
        let after: C64 = {
            let prod = a.dot(&rhodot);
            (0..b.dim()).map(|k| prod[(k, k)]).sum()
        };
        assert!(
            (after + before * p.kappa).norm() < 1e-12,
            "mean-field decay rate: d<a>/dt = {after}, want {}",
            -p.kappa * before.re
        );
    }

    #[test]
    fn steady_state_solves_and_validates() {
        let p = small_params();
        let b = BareBasis::new(p.n_trunc).unwrap();
        let l = build_liouvillian(&p, &b).unwrap();
        let (dm, report) = steady_state_with_report(&l).unwrap();
        dm.validate().unwrap();
        assert!(report.kernel_alignment > 1.0 - 1e-9);
        assert!(report.residual_inf < 1e-10 * report.generator_norm_inf);
        // drive pushes photons into the cavity
        let a = operators::build_annihilation(&b);
        let n_op = operators::adjoint(&a).dot(&a);
        let nbar = expectation(&n_op, &dm).re;
        assert!(nbar > 1e-4, "driven cavity must hold photons, got {nbar}");
    }

    #[test]
    fn undriven_steady_state_is_the_ground_state() {
        let p = small_params().with_ep(0.0);
        let b = BareBasis::new(p.n_trunc).unwrap();
        let l = build_liouvillian(&p, &b).unwrap();
        let dm = steady_state(&l).unwrap();
        dm.validate().unwrap();
        let g = b.flat(0, 1);
        assert!(
            (dm.population(g) - 1.0).abs() < 1e-9,
            "undriven steady state must be the dark ground state"
        );
    }

    #[test]
    fn fully_decoupled_generator_reports_degeneracy() {
        let mut p = small_params().with_ep(0.0);
        p.g1 = 0.0;
        p.g2 = 0.0;
        p.omega_c = 0.0;
        let b = BareBasis::new(p.n_trunc).unwrap();
        let l = build_liouvillian(&p, &b).unwrap();
        match steady_state(&l) {
            Err(Error::Degenerate(_)) => {}
            other => panic!("expected a degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn cutoff_cap_is_enforced() {
        let p = narrow_cavity_spectrum().with_n_trunc(30);
        let b = BareBasis::new(p.n_trunc).unwrap();
        match build_liouvillian(&p, &b) {
            Err(Error::Resource(msg)) => assert!(msg.contains("cap")),
            other => panic!("expected a resource error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_doubling_is_stable_for_a_weak_drive() {
        let p = narrow_cavity_spectrum().with_n_trunc(5).with_ep(0.1);
        let report = truncation_check(&p).unwrap();
        assert_eq!(report.doubling_base, 5);
        assert!(report.nbar_drift < 1e-8, "nbar drift {}", report.nbar_drift);
        assert!(report.tail_top < 1e-8, "tail {}", report.tail_top);
    }
}
