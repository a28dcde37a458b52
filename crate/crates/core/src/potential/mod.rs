//! Potentials `V : R^n -> R` and every constant derived from them.

mod analysis;
mod builtins;

use std::fmt;
use std::sync::Arc;

pub use analysis::{
    analyze, ball_sup, coercivity_constants, eigen_bounds, escape_distance, find_minima,
    firewall_rates, low_hull_coefficient, AnalysisReport, CoercivityConstants, MinimumReport,
    PotentialAnalysis,
};
pub use builtins::{
    builtin, builtin_potentials, BuiltinInfo, CoupledDoubleWell, FnPotential, ScalarPolynomial,
};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Evaluator bundle for a potential and its first two derivatives.
///
/// Implementations must be pure: the same input always yields the same output,
/// and calls from several threads at once are allowed.
pub trait Potential<T: Real>: Send + Sync {
    /// Dimension `n` of the state space.
    fn dim(&self) -> usize;
    fn name(&self) -> &str;
    fn value(&self, u: &[T]) -> T;
    /// Writes `grad V(u)` into `out` (length `n`).
    fn gradient(&self, u: &[T], out: &mut [T]);
    /// Writes the row-major `n x n` Hessian `D^2 V(u)` into `out`.
    fn hessian(&self, u: &[T], out: &mut [T]);

    fn gradient_vec(&self, u: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); self.dim()];
        self.gradient(u, &mut g);
        g
    }

    fn hessian_vec(&self, u: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut h = vec![T::zero(); n * n];
        self.hessian(u, &mut h);
        h
    }
}

/// Shared handle on a potential.
pub type PotentialSpec<T> = Arc<dyn Potential<T>>;

impl<T: Real> fmt::Debug for dyn Potential<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Potential({}, n = {})", self.name(), self.dim())
    }
}

/// Axis-aligned box in state space.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> SearchBox<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidArgument(
                "box bounds must be nonempty and of equal length".into(),
            ));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidArgument(
                "box is empty (need lo < hi on every axis)".into(),
            ));
        }
        Ok(Self { lo, hi })
    }

    /// Same interval on every axis.
    pub fn cube(n: usize, lo: T, hi: T) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, u: &[T]) -> bool {
        u.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&x, (&a, &b))| x >= a && x <= b)
    }

    pub fn half_diagonal(&self) -> T {
        crate::scalar::dist(&self.lo, &self.hi) / T::lit(2.0)
    }

    /// Tensor grid with `per_axis` nodes per axis (endpoints included).
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<T>> {
        let n = self.dim();
        let per_axis = per_axis.max(2);
        let total = per_axis.pow(n as u32);
        let mut out = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rem = flat;
            let mut u = Vec::with_capacity(n);
            for ax in 0..n {
                let k = rem % per_axis;
                rem /= per_axis;
                let s = T::of_usize(k) / T::of_usize(per_axis - 1);
                u.push(self.lo[ax] + (self.hi[ax] - self.lo[ax]) * s);
            }
            out.push(u);
        }
        out
    }

    /// Samples on the boundary faces, `per_axis` nodes along each free axis.
    pub fn boundary(&self, per_axis: usize) -> Vec<Vec<T>> {
        let n = self.dim();
        if n == 1 {
            return vec![vec![self.lo[0]], vec![self.hi[0]]];
        }
        let mut out = Vec::new();
        for u in self.grid(per_axis) {
            let on_face = (0..n).any(|ax| u[ax] == self.lo[ax] || u[ax] == self.hi[ax]);
            if on_face {
                out.push(u);
            }
        }
        out
    }
}

/// A nondegenerate local minimum of the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimumPoint<T> {
    pub location: Vec<T>,
    pub value: T,
    /// Hessian eigenvalues, ascending, all positive.
    pub hess_eigenvalues: Vec<T>,
}

impl<T: Real> MinimumPoint<T> {
    /// Builds a minimum point at `location`, computing value and spectrum.
    pub fn at(spec: &dyn Potential<T>, location: Vec<T>) -> Self {
        let n = spec.dim();
        let value = spec.value(&location);
        let hess_eigenvalues =
            crate::linalg::symmetric_eigenvalues(&spec.hessian_vec(&location), n);
        Self {
            location,
            value,
            hess_eigenvalues,
        }
    }

    pub fn smallest_eigenvalue(&self) -> T {
        self.hess_eigenvalues[0]
    }

    pub fn largest_eigenvalue(&self) -> T {
        *self.hess_eigenvalues.last().unwrap()
    }
}

/// Index of the minimum closest to `u`.
pub fn nearest_minimum<T: Real>(minima: &[MinimumPoint<T>], u: &[T]) -> Option<usize> {
    minima
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            crate::scalar::dist(&a.location, u)
                .partial_cmp(&crate::scalar::dist(&b.location, u))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(i, _)| i)
}
