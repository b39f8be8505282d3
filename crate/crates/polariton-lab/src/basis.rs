//! The truncated bare basis: photon number ⊗ atomic level, and its grading
//! into excitation-number manifolds.

use crate::{Error, Result};

/// Bare product basis over `n_trunc` photon-number states and the four
/// atomic levels, with the fixed flat ordering `flat = 4*n + (level - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BareBasis {
    pub n_trunc: usize,
}

impl BareBasis {
    pub fn new(n_trunc: usize) -> Result<Self> {
        if n_trunc < 3 {
            return Err(Error::InvalidArgument(format!(
                "n_trunc must be >= 3, got {n_trunc}"
            )));
        }
        Ok(Self { n_trunc })
    }

    /// Total Hilbert-space dimension `4 * n_trunc`.
    pub fn dim(&self) -> usize {
        4 * self.n_trunc
    }

    /// Flat index of the state with `photons` photons and atomic level
    /// `level` ∈ 1..=4.
    pub fn flat(&self, photons: usize, level: usize) -> usize {
        debug_assert!(level >= 1 && level <= 4, "atomic level out of range");
        debug_assert!(photons < self.n_trunc, "photon number out of range");
        4 * photons + (level - 1)
    }

    /// Inverse of [`BareBasis::flat`]: `(photons, level)` of a flat index.
    pub fn unflat(&self, flat: usize) -> (usize, usize) {
        debug_assert!(flat < self.dim(), "flat index out of range");
        (flat / 4, flat % 4 + 1)
    }

    /// Excitation-number manifold of the bare state `(photons, level)`:
    /// levels 2 and 3 carry one excitation, level 4 carries two.
    pub fn manifold_of(&self, photons: usize, level: usize) -> usize {
        photons
            + match level {
                1 => 0,
                2 | 3 => 1,
                4 => 2,
                _ => panic!("atomic level out of range"),
            }
    }

    /// Flat indices of manifold `m`, in the conventional order
    /// `|m,1>, |m-1,2>, |m-1,3>, |m-2,4>`, listing only states inside the
    /// truncated space.
    ///
    /// For `m <= n_trunc - 1` the manifold is complete (one state for
    /// `m = 0`, three for `m = 1`, four for `m >= 2`). The highest two
    /// manifolds are clipped by the photon cutoff: `m = n_trunc` keeps
    /// three states (`|m-1,2>, |m-1,3>, |m-2,4>`) and `m = n_trunc + 1`
    /// keeps one (`|m-2,4>`).
    pub fn manifold_states(&self, m: usize) -> Vec<usize> {
        let mut idx = Vec::with_capacity(4);
        if m < self.n_trunc {
            idx.push(self.flat(m, 1));
        }
        if m >= 1 && m - 1 < self.n_trunc {
            idx.push(self.flat(m - 1, 2));
            idx.push(self.flat(m - 1, 3));
        }
        if m >= 2 && m - 2 < self.n_trunc {
            idx.push(self.flat(m - 2, 4));
        }
        idx
    }

    /// Largest manifold index with any state in the truncated space.
    pub fn max_manifold(&self) -> usize {
        self.n_trunc + 1
    }

    /// Largest manifold index that is complete (not clipped by the photon
    /// cutoff).
    pub fn max_complete_manifold(&self) -> usize {
        self.n_trunc - 1
    }
}
