//! Step-size rules for the FW family (`γ ∈ [0, 1]`) and for gradient descent (`a > 0`).

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Objective;

/// Absolute tolerance on the argument of every 1D search.
pub const SEARCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleTag {
    OpenLoop,
    Short,
    PdShort,
    PdLine,
    GdPdShort,
    GdPdLine,
    GdFixed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDecision {
    /// `γ` for FW-type rules, `a_t` for gradient descent rules.
    pub value: f64,
    pub rule: RuleTag,
    /// Predicted post-step gap bound; NaN when the rule has no model.
    pub model_value: f64,
    /// Zero direction (FW) or zero gradient (GD).
    pub stationary: bool,
    /// Positive gap but zero direction length.
    pub degenerate: bool,
}

impl StepDecision {
    fn plain(value: f64, rule: RuleTag, model_value: f64) -> Self {
        Self {
            value,
            rule,
            model_value,
            stationary: false,
            degenerate: false,
        }
    }
}

/// Minimizer over `[0, 1]` of `slope·γ + (L d²/2) γ²`.
fn quadratic_model_argmin(slope: f64, l: f64, dist_sq: f64) -> f64 {
    if slope >= 0.0 {
        return 0.0;
    }
    (-slope / (l * dist_sq)).min(1.0)
}

/// `γ = min{1, inner / (L d²)}` with `inner = ⟨∇f(x_t), x_t − v_t⟩ ≥ 0`.
pub fn short_step(inner: f64, dist_sq: f64, l: f64) -> StepDecision {
    if dist_sq <= 0.0 {
        let mut d = StepDecision::plain(0.0, RuleTag::Short, f64::NAN);
        d.stationary = true;
        return d;
    }
    let gamma = quadratic_model_argmin(-inner, l, dist_sq);
    StepDecision::plain(gamma, RuleTag::Short, f64::NAN)
}

/// The model `(1 − γ) G + γ² L d² / 2` of the next gap.
pub fn pd_short_model(gamma: f64, g_prev: f64, dist_sq: f64, l: f64) -> f64 {
    (1.0 - gamma) * g_prev + 0.5 * gamma * gamma * l * dist_sq
}

/// `γ = min{1, G_{t−1} / (L d²)}`, minimizing [`pd_short_model`].
pub fn pd_short_step(g_prev: f64, dist_sq: f64, l: f64) -> StepDecision {
    let g = g_prev.max(0.0);
    if dist_sq <= 0.0 {
        let mut d = if g > 0.0 {
            StepDecision::plain(1.0, RuleTag::PdShort, 0.0)
        } else {
            StepDecision::plain(0.0, RuleTag::PdShort, 0.0)
        };
        d.degenerate = g > 0.0;
        d.stationary = g == 0.0;
        return d;
    }
    if g.is_infinite() {
        return StepDecision::plain(1.0, RuleTag::PdShort, 0.5 * l * dist_sq);
    }
    let gamma = quadratic_model_argmin(-g, l, dist_sq);
    StepDecision::plain(gamma, RuleTag::PdShort, pd_short_model(gamma, g, dist_sq, l))
}

/// `h(γ) = (1 − γ) G − γ ⟨∇f(x), v − x⟩ + f((1 − γ) x + γ v) − f(x)`.
pub struct FwSegmentModel<'a> {
    pub objective: &'a dyn Objective,
    pub x: &'a [f64],
    pub v: &'a [f64],
    pub fx: f64,
    pub inner: f64,
    pub g_prev: f64,
}

impl FwSegmentModel<'_> {
    pub fn eval(&self, gamma: f64) -> Result<f64> {
        let p = linalg::mix(self.x, self.v, gamma);
        let fp = self.objective.value(&p);
        if !fp.is_finite() {
            return Err(Error::Input(format!(
                "objective is not finite along the segment at γ = {gamma}"
            )));
        }
        Ok((1.0 - gamma) * self.g_prev - gamma * self.inner + fp - self.fx)
    }
}

/// Golden-section search; returns `(argmin, min, evaluations)`. Both endpoints are also
/// compared so affine functions land exactly on an endpoint.
pub fn golden_section(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64, usize)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evals = 2;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        evals += 1;
    }
    let (mut best, mut fbest) = if fc <= fd { (c, fc) } else { (d, fd) };
    for e in [lo, hi] {
        let fe = f(e)?;
        evals += 1;
        if fe < fbest {
            best = e;
            fbest = fe;
        }
    }
    Ok((best, fbest, evals))
}

/// Line search of `h` over `[0, 1]`. The decision's model value is `h(γ*)`; the third
/// element is the number of objective evaluations.
pub fn pd_line_search_fw(model: &FwSegmentModel<'_>, tol: f64) -> Result<(StepDecision, usize)> {
    if !(tol > 0.0) {
        return Err(Error::Input("line-search tolerance must be positive".into()));
    }
    if model.g_prev.is_infinite() {
        // No previous bound: γ = 1 is forced by A_{−1} = 0.
        let h = model.eval(1.0).unwrap_or(f64::NAN);
        return Ok((StepDecision::plain(1.0, RuleTag::PdLine, h), 1));
    }
    let (gamma, h, evals) = golden_section(|g| model.eval(g), 0.0, 1.0, tol)?;
    Ok((StepDecision::plain(gamma, RuleTag::PdLine, h), evals))
}

/// `φ(a) = 𝒢/S + ‖g‖² (−a A/S + a² L/2 − a²/(2S))`, `S = A + a`.
pub fn gd_pd_model(a: f64, g_script: f64, grad_norm_sq: f64, a_prev: f64, l: f64) -> f64 {
    let s = a_prev + a;
    g_script / s + grad_norm_sq * (-a * a_prev / s + 0.5 * a * a * l - 0.5 * a * a / s)
}

fn gd_pd_model_deriv(a: f64, g_script: f64, grad_norm_sq: f64, a_prev: f64, l: f64) -> f64 {
    let s = a_prev + a;
    let s2 = s * s;
    -g_script / s2
        + grad_norm_sq * (-a_prev * a_prev / s2 + a * l - (a * a + 2.0 * a * a_prev) / (2.0 * s2))
}

/// Minimizer of [`gd_pd_model`] by bisection on its derivative.
///
/// The bracket starts at `[1/(2L), max(1/L, 2·a_prev_step)]` and the upper end doubles until
/// the derivative turns positive. A zero gradient returns a stationary decision.
pub fn gd_pd_short_step(
    g_script_prev: f64,
    grad_norm_sq: f64,
    a_prev: f64,
    l: f64,
    prev_step: Option<f64>,
) -> Result<StepDecision> {
    if !(l > 0.0) {
        return Err(Error::Input("smoothness constant must be positive".into()));
    }
    if grad_norm_sq == 0.0 {
        let mut d = StepDecision::plain(0.0, RuleTag::GdPdShort, g_script_prev.max(0.0));
        d.stationary = true;
        return Ok(d);
    }
    let g = g_script_prev.max(0.0);
    let deriv = |a: f64| gd_pd_model_deriv(a, g, grad_norm_sq, a_prev, l);
    let lo0 = 0.5 / l;
    if deriv(lo0) >= 0.0 {
        return Ok(StepDecision::plain(
            lo0,
            RuleTag::GdPdShort,
            gd_pd_model(lo0, g, grad_norm_sq, a_prev, l),
        ));
    }
    let mut hi = (1.0 / l).max(2.0 * prev_step.unwrap_or(0.0));
    let mut doublings = 0;
    while deriv(hi) <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::Degenerate("primal-dual step bracket diverged".into()));
        }
    }
    let mut lo = lo0;
    while hi - lo > SEARCH_TOL * (1.0 + lo) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if deriv(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    Ok(StepDecision::plain(
        a,
        RuleTag::GdPdShort,
        gd_pd_model(a, g, grad_norm_sq, a_prev, l),
    ))
}

/// `ψ(a) = 𝒢/S + a²‖g‖²/(2S) + f(x − a g) − f(x)`, `S = A + a`.
pub struct GdRayModel<'a> {
    pub objective: &'a dyn Objective,
    pub x: &'a [f64],
    pub grad: &'a [f64],
    pub fx: f64,
    pub g_script: f64,
    pub a_prev: f64,
    pub grad_norm_sq: f64,
}

impl GdRayModel<'_> {
    pub fn eval(&self, a: f64) -> Result<f64> {
        let p: Vec<f64> = self.x.iter().zip(self.grad).map(|(x, g)| x - a * g).collect();
        let fp = self.objective.value(&p);
        if !fp.is_finite() {
            return Err(Error::Input(format!("objective is not finite on the ray at a = {a}")));
        }
        let s = self.a_prev + a;
        Ok(self.g_script / s + 0.5 * a * a * self.grad_norm_sq / s + fp - self.fx)
    }
}

/// Ternary search of [`GdRayModel`] with bracket doubling. Returns the decision and the
/// number of objective evaluations.
///
/// The search starts at `1/(2L)`: for an `L`-smooth objective the derivative of `ψ` there is
/// nonpositive, so the convex minimizer lies to the right.
pub fn gd_pd_line_search(
    model: &GdRayModel<'_>,
    l: f64,
    prev_step: Option<f64>,
    tol: f64,
) -> Result<(StepDecision, usize)> {
    if !(tol > 0.0) {
        return Err(Error::Input("line-search tolerance must be positive".into()));
    }
    if model.grad_norm_sq == 0.0 {
        let mut d = StepDecision::plain(0.0, RuleTag::GdPdLine, model.g_script.max(0.0));
        d.stationary = true;
        return Ok((d, 0));
    }
    let lo = 0.5 / l;
    let mut hi = (1.0 / l).max(2.0 * prev_step.unwrap_or(0.0));
    let mut evals = 0;
    let mut f_hi = model.eval(hi)?;
    evals += 1;
    let mut doublings = 0;
    loop {
        let f_next = model.eval(2.0 * hi)?;
        evals += 1;
        if f_next >= f_hi {
            hi *= 2.0;
            break;
        }
        hi *= 2.0;
        f_hi = f_next;
        doublings += 1;
        if doublings > 2000 {
            return Err(Error::Degenerate("line-search bracket diverged".into()));
        }
    }
    let (a, val, e) = golden_section(|a| model.eval(a), lo, hi, tol)?;
    evals += e;
    Ok((StepDecision::plain(a, RuleTag::GdPdLine, val), evals))
}

/// `γ_t = ℓ / (t + ℓ)`.
pub fn open_loop_gamma(t: usize, ell: u32) -> f64 {
    ell as f64 / (t as f64 + ell as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::make_distance_objective;

    #[test]
    fn short_step_examples() {
        assert_eq!(short_step(4.0, 1.0, 2.0).value, 1.0);
        assert_eq!(short_step(1.0, 1.0, 2.0).value, 0.5);
        assert_eq!(short_step(0.0, 1.0, 2.0).value, 0.0);
        assert!(short_step(1.0, 0.0, 2.0).stationary);
    }

    #[test]
    fn pd_short_examples() {
        assert_eq!(pd_short_step(0.0, 1.0, 2.0).value, 0.0);
        let d = pd_short_step(2.0, 1.0, 2.0);
        assert_eq!((d.value, d.model_value), (1.0, 1.0));
        let d = pd_short_step(0.5, 1.0, 2.0);
        assert_eq!(d.value, 0.25);
        assert!((d.model_value - 0.4375).abs() < 1e-15);
        let d = pd_short_step(1.0, 0.0, 2.0);
        assert!(d.degenerate && d.value == 1.0);
    }

    #[test]
    fn pd_short_model_grid() {
        let (g, d2, l) = (0.5, 1.0, 2.0);
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=1_000_000 {
            let gm = i as f64 * 1e-6;
            let m = pd_short_model(gm, g, d2, l);
            if m < best.0 {
                best = (m, gm);
            }
        }
        assert!((best.1 - 0.25).abs() <= 1e-6);
        assert!((best.0 - 0.4375).abs() <= 1e-12);
    }

    #[test]
    fn open_loop_examples() {
        assert_eq!(open_loop_gamma(0, 2), 1.0);
        assert_eq!(open_loop_gamma(2, 2), 0.5);
        assert_eq!(open_loop_gamma(4, 4), 0.5);
    }

    #[test]
    fn line_search_on_parabola() {
        // f = ‖x − x0‖² on a segment gives h(γ) = (1−γ)G − γ inner + γ inner' + γ² d².
        let f = make_distance_objective(vec![0.3, 0.3, 0.4]).unwrap();
        let x = vec![1.0, 0.0, 0.0];
        let v = vec![0.0, 1.0, 0.0];
        let fx = f.value(&x);
        let grad = f.gradient(&x);
        let inner = linalg::dot(&grad, &linalg::sub(&v, &x));
        let g_prev = 0.2;
        let m = FwSegmentModel {
            objective: &f,
            x: &x,
            v: &v,
            fx,
            inner,
            g_prev,
        };
        let (d, _) = pd_line_search_fw(&m, SEARCH_TOL).unwrap();
        // h(γ) = (1−γ)G + γ² ‖v−x‖²  (the linear terms cancel for a quadratic).
        let d2 = linalg::dist_sq(&v, &x);
        let closed = (g_prev / (2.0 * d2)).min(1.0);
        // Value comparisons near a quadratic minimum resolve the argument to ~sqrt(eps).
        assert!((d.value - closed).abs() < 1e-6, "{} vs {closed}", d.value);
    }

    #[test]
    fn gd_short_above_half_inverse_l() {
        for &(g, n2, ap, l) in &[(0.5, 1.0, 0.0, 1.0), (3.0, 0.1, 2.0, 5.0), (0.0, 2.0, 7.0, 0.3)] {
            let d = gd_pd_short_step(g, n2, ap, l, None).unwrap();
            assert!(d.value >= 0.5 / l - 1e-12);
            let at_half = gd_pd_model(0.5 / l, g, n2, ap, l);
            assert!(d.model_value <= at_half + 1e-12);
        }
        assert!(gd_pd_short_step(1.0, 0.0, 1.0, 1.0, None).unwrap().stationary);
    }
}
