use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FeasibleSet, Objective};
use crate::error::{Error, Result};
use crate::linalg;

/// Outcome of [`verify_objective`].
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveReport {
    pub samples: usize,
    /// Worst `−(f(y) − f(x) − ⟨∇f(x), y−x⟩)` (convexity side), clamped at 0.
    pub convexity_violation: f64,
    /// Worst `f(y) − f(x) − ⟨∇f(x), y−x⟩ − (L/2)‖x−y‖²` (smoothness side), clamped at 0.
    pub smoothness_violation: f64,
    /// Worst relative error of a central difference along a random in-set direction.
    pub gradient_error: f64,
    pub threshold: f64,
    pub flagged: bool,
}

/// Checks the convexity/smoothness sandwich and the gradient on random pairs from `set`.
pub fn verify_objective(
    obj: &dyn Objective,
    set: &dyn FeasibleSet,
    samples: usize,
    seed: u64,
) -> Result<ObjectiveReport> {
    if samples < 2 {
        return Err(Error::Input("need at least 2 samples".into()));
    }
    if obj.dim() != set.dimension() {
        return Err(Error::Input(format!(
            "objective has dimension {} but the set has {}",
            obj.dim(),
            set.dimension()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = obj.smoothness();
    let mut convexity: f64 = 0.0;
    let mut smoothness: f64 = 0.0;
    let mut grad_err: f64 = 0.0;
    for _ in 0..samples {
        let x = set.sample(&mut rng);
        let y = set.sample(&mut rng);
        let fx = obj.value(&x);
        let fy = obj.value(&y);
        let gx = obj.gradient(&x);
        let d = linalg::sub(&y, &x);
        let gap = fy - fx - linalg::dot(&gx, &d);
        let scale = 1.0 + fx.abs() + fy.abs();
        convexity = convexity.max((-gap - 1e-12 * scale).max(0.0));
        smoothness =
            smoothness.max((gap - 0.5 * l * linalg::norm_sq(&d) - 1e-12 * scale).max(0.0));

        // Directional central difference at a point strictly inside the segment.
        let s: f64 = rng.random_range(0.25..0.75);
        let p = linalg::mix(&x, &y, s);
        let dn = linalg::norm(&d);
        if dn > 0.0 {
            let h = 1e-4;
            let u = linalg::scale(&d, 1.0 / dn);
            let plus: Vec<f64> = p.iter().zip(&u).map(|(a, b)| a + h * b).collect();
            let minus: Vec<f64> = p.iter().zip(&u).map(|(a, b)| a - h * b).collect();
            let fd = (obj.value(&plus) - obj.value(&minus)) / (2.0 * h);
            let exact = linalg::dot(&obj.gradient(&p), &u);
            let rel = (fd - exact).abs() / (1.0 + exact.abs());
            grad_err = grad_err.max(rel);
        }
    }
    let threshold = 1e-6 * (1.0 + l * set.diameter_sq());
    let flagged = convexity > threshold || smoothness > threshold || grad_err > 1e-5;
    Ok(ObjectiveReport {
        samples,
        convexity_violation: convexity,
        smoothness_violation: smoothness,
        gradient_error: grad_err,
        threshold,
        flagged,
    })
}
