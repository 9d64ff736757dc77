use std::fmt::Debug;

use rand::RngCore;

use crate::error::Result;
use crate::linalg;

/// A compact convex set accessed through its linear minimization oracle.
pub trait FeasibleSet: Send + Sync + Debug {
    fn dimension(&self) -> usize;

    /// A minimizer of `⟨w, ·⟩` over the set. Ties break to the lowest index.
    fn lmo(&self, w: &[f64]) -> Result<Vec<f64>>;

    /// `D² = max ‖x − y‖²` over the set.
    fn diameter_sq(&self) -> f64;

    fn contains(&self, x: &[f64], tol: f64) -> bool;

    /// A random point of the set. Used by verification code only.
    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64>;

    /// All vertices, when there are few enough to list.
    fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        None
    }

    fn describe(&self) -> String;
}

/// A convex regularizer `ψ` accessed through `argmin_v ⟨w, v⟩ + ψ(v)`.
pub trait Regularizer: Send + Sync + Debug {
    fn dimension(&self) -> usize;

    /// `ψ(x)`, `+∞` outside the domain.
    fn value(&self, x: &[f64]) -> f64;

    fn min_oracle(&self, w: &[f64]) -> Result<Vec<f64>>;

    /// `argmin_v ⟨w, v⟩ + s·ψ(v)` for `s > 0`.
    fn min_oracle_scaled(&self, w: &[f64], s: f64) -> Result<Vec<f64>> {
        self.min_oracle(&linalg::scale(w, 1.0 / s))
    }

    /// Some element of `∂ψ(x)`; only meaningful where `ψ(x)` is finite.
    fn subgradient_at(&self, x: &[f64]) -> Vec<f64>;

    /// True when `ψ` is exactly the indicator of its domain.
    fn is_indicator(&self) -> bool {
        false
    }

    /// The domain's set, for samplers and diameters.
    fn domain(&self) -> &dyn FeasibleSet;
}
