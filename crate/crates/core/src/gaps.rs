//! Computable lower bounds on `f(x*)` and the resulting primal-dual gaps.
//!
//! Cumulative bounds are stored normalized: instead of `Σ a_i q_i` we keep
//! `Σ (a_i / A_t) q_i`, updated by mixing with `γ_t = a_t / A_t`. A mix with `γ = 1` is a
//! reset, which is how every tracker starts.

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{FeasibleSet, Regularizer};

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Contract(format!("mixing weight γ = {gamma} outside [0, 1]")));
    }
    Ok(())
}

/// `(1 − γ) old + γ new`, treating `γ = 1` as a clean overwrite.
#[inline]
fn mix_scalar(old: f64, new: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        new
    } else if gamma == 0.0 {
        old
    } else {
        (1.0 - gamma) * old + gamma * new
    }
}

/// Both FW lower bounds after an update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwBounds {
    pub mix: f64,
    pub best: f64,
}

/// Separable FW bounds: the weighted mix of per-iterate bounds `f(x_i) − g(x_i)` and their
/// running maximum.
#[derive(Debug, Clone)]
pub struct FwGapTracker {
    lb_mix: f64,
    lb_best: f64,
}

impl Default for FwGapTracker {
    fn default() -> Self {
        Self::new()
    }
}

impl FwGapTracker {
    pub fn new() -> Self {
        Self {
            lb_mix: f64::NEG_INFINITY,
            lb_best: f64::NEG_INFINITY,
        }
    }

    /// Absorbs `f(x_t)` and `inner = ⟨∇f(x_t), v_t − x_t⟩` with mixing weight `γ`.
    pub fn fw_update(&mut self, gamma: f64, f_xt: f64, inner: f64) -> Result<FwBounds> {
        check_gamma(gamma)?;
        let cand = f_xt + inner;
        self.lb_mix = mix_scalar(self.lb_mix, cand, gamma);
        self.lb_best = self.lb_best.max(cand);
        Ok(self.bounds())
    }

    pub fn bounds(&self) -> FwBounds {
        FwBounds {
            mix: self.lb_mix,
            best: self.lb_best,
        }
    }
}

/// Heavy-ball bound: one LMO on the averaged gradient.
#[derive(Debug, Clone)]
pub struct HbGapTracker {
    fbar: f64,
    gbar: Vec<f64>,
    cbar: f64,
    absorbed: usize,
}

impl HbGapTracker {
    pub fn new(dim: usize) -> Self {
        Self {
            fbar: 0.0,
            gbar: vec![0.0; dim],
            cbar: 0.0,
            absorbed: 0,
        }
    }

    /// Mixes `f(x)`, `∇f(x)` and `⟨∇f(x), x⟩` into the averages with weight `γ`.
    pub fn absorb(&mut self, gamma: f64, fx: f64, grad: &[f64], x: &[f64]) -> Result<()> {
        check_gamma(gamma)?;
        if grad.len() != self.gbar.len() || x.len() != self.gbar.len() {
            return Err(Error::Input("gradient or point has the wrong dimension".into()));
        }
        if self.absorbed == 0 && gamma != 1.0 {
            return Err(Error::Contract(
                "the first absorbed gradient must carry the full weight".into(),
            ));
        }
        self.fbar = mix_scalar(self.fbar, fx, gamma);
        self.cbar = mix_scalar(self.cbar, linalg::dot(grad, x), gamma);
        if gamma == 1.0 {
            self.gbar.copy_from_slice(grad);
        } else if gamma != 0.0 {
            linalg::mix_into(&mut self.gbar, grad, gamma);
        }
        self.absorbed += 1;
        Ok(())
    }

    /// The normalized cumulative gradient `Σ (a_i/A_t) ∇f(x_i)`.
    pub fn gbar(&self) -> &[f64] {
        &self.gbar
    }

    pub fn is_empty(&self) -> bool {
        self.absorbed == 0
    }

    /// `L_t = fbar + ⟨gbar, v⟩ − cbar` for a given vertex `v`.
    pub fn bound_at(&self, v: &[f64]) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::State("heavy-ball tracker has no gradients yet".into()));
        }
        Ok(self.fbar + linalg::dot(&self.gbar, v) - self.cbar)
    }

    /// `(v_t, L_t)` with `v_t = lmo(gbar)`. Exactly one LMO call.
    pub fn hb_lower_bound(&self, set: &dyn FeasibleSet) -> Result<(Vec<f64>, f64)> {
        if self.is_empty() {
            return Err(Error::State("heavy-ball tracker has no gradients yet".into()));
        }
        let v = set.lmo(&self.gbar)?;
        let lb = self.bound_at(&v)?;
        Ok((v, lb))
    }

    /// Composite variant: `v = argmin ⟨gbar, v⟩ + ψ(v)` and `L = fbar + ⟨gbar, v⟩ − cbar + ψ(v)`.
    pub fn composite_lower_bound(&self, reg: &dyn Regularizer) -> Result<(Vec<f64>, f64)> {
        if self.is_empty() {
            return Err(Error::State("heavy-ball tracker has no gradients yet".into()));
        }
        let v = reg.min_oracle(&self.gbar)?;
        let lb = self.bound_at(&v)? + reg.value(&v);
        Ok((v, lb))
    }
}

/// Computable gap of the optimistic method.
///
/// With losses `a_i ∇f(x_i)` and hints `a_i g_i`, `g_i = ∇f(x_{i−1})`:
///
/// `A_t G_t = Σ_{i<t} a_i ⟨∇f(x_i) − g_i, v_i − v_{i+1}⟩ + a_t ‖∇f(x_t) − g_t‖ D − B_t`
///
/// where `B_t = Σ_{i≤t} A_{i−1} [f(x_{i−1}) − f(x_i) − ⟨∇f(x_i), y_{i−1} − x_i⟩]`
/// collects the nonnegative Bregman terms.
#[derive(Debug, Clone)]
pub struct OptimisticGapTracker {
    regret_bound_sum: f64,
    bregman_sum: f64,
    last_grad_diff_norm: f64,
    /// `a_t (∇f(x_t) − g_t)` and `v_t`, waiting for `v_{t+1}`.
    pending: Option<(Vec<f64>, Vec<f64>)>,
    last_a: f64,
    t: usize,
}

/// Everything the tracker needs from iteration `t ≥ 1`.
#[derive(Debug, Clone, Copy)]
pub struct OptimisticStep<'a> {
    pub a: f64,
    pub a_prev_cumulative: f64,
    pub v: &'a [f64],
    pub grad: &'a [f64],
    pub hint: &'a [f64],
    pub x: &'a [f64],
    pub fx: f64,
    pub x_prev: &'a [f64],
    pub fx_prev: f64,
    pub y_prev: &'a [f64],
}

impl Default for OptimisticGapTracker {
    fn default() -> Self {
        Self::new()
    }
}

impl OptimisticGapTracker {
    pub fn new() -> Self {
        Self {
            regret_bound_sum: 0.0,
            bregman_sum: 0.0,
            last_grad_diff_norm: 0.0,
            pending: None,
            last_a: 0.0,
            t: 0,
        }
    }

    pub fn update(&mut self, s: &OptimisticStep<'_>) {
        if let Some((diff, v_prev)) = self.pending.take() {
            self.regret_bound_sum += linalg::dot(&diff, &linalg::sub(&v_prev, s.v));
        }
        let raw = linalg::sub(s.grad, s.hint);
        self.last_grad_diff_norm = linalg::norm(&raw);
        let term = s.a_prev_cumulative
            * (s.fx_prev - s.fx - linalg::dot(s.grad, &linalg::sub(s.y_prev, s.x)));
        // Each term is a sum of nonnegative quantities; clip rounding noise.
        self.bregman_sum += term.max(0.0);
        self.pending = Some((linalg::scale(&raw, s.a), s.v.to_vec()));
        self.last_a = s.a;
        self.t += 1;
    }

    pub fn regret_bound_sum(&self) -> f64 {
        self.regret_bound_sum
    }

    pub fn bregman_sum(&self) -> f64 {
        self.bregman_sum
    }

    pub fn last_grad_diff_norm(&self) -> f64 {
        self.last_grad_diff_norm
    }

    /// The computable gap, no extra oracle call.
    pub fn optimistic_gap(&self, cumulative: f64, diameter: f64) -> Result<f64> {
        if self.t == 0 || !(cumulative > 0.0) {
            return Err(Error::State("optimistic gap needs at least one step".into()));
        }
        Ok((self.regret_bound_sum + self.last_a * self.last_grad_diff_norm * diameter
            - self.bregman_sum)
            / cumulative)
    }

    /// The tighter gap that closes the last pair with `ṽ_{t+1}`, the learner's next point
    /// under a zero hint. The caller supplies `ṽ_{t+1}` (one extra min-oracle call).
    pub fn optimistic_gap_extra_lmo(&self, cumulative: f64, v_tilde: &[f64]) -> Result<f64> {
        let (diff, v_prev) = self
            .pending
            .as_ref()
            .ok_or_else(|| Error::State("optimistic gap needs at least one step".into()))?;
        if !(cumulative > 0.0) {
            return Err(Error::State("cumulative weight must be positive".into()));
        }
        let last = linalg::dot(diff, &linalg::sub(v_prev, v_tilde));
        Ok((self.regret_bound_sum + last - self.bregman_sum) / cumulative)
    }
}

/// Lower bound for gradient descent from raw weighted sums.
#[derive(Debug, Clone)]
pub struct GdGapTracker {
    s_f: f64,
    s_gx: f64,
    s_g: Vec<f64>,
    d_bound: f64,
}

impl GdGapTracker {
    pub fn new(dim: usize, d_bound: f64) -> Result<Self> {
        if !(d_bound > 0.0 && d_bound.is_finite()) {
            return Err(Error::config("d_bound", "must be positive and finite"));
        }
        Ok(Self {
            s_f: 0.0,
            s_gx: 0.0,
            s_g: vec![0.0; dim],
            d_bound,
        })
    }

    pub fn d_bound(&self) -> f64 {
        self.d_bound
    }

    pub fn absorb(&mut self, a: f64, fx: f64, grad: &[f64], x: &[f64]) {
        self.s_f += a * fx;
        self.s_gx += a * linalg::dot(grad, x);
        for (s, g) in self.s_g.iter_mut().zip(grad) {
            *s += a * g;
        }
    }

    /// `A_t L_t = s_f + ⟨s_g, x_{t+1}⟩ − s_gx + ½‖x_{t+1} − x_1‖² − ½D²`.
    pub fn scaled_lower_bound(&self, x_next: &[f64], x1: &[f64]) -> f64 {
        self.s_f + linalg::dot(&self.s_g, x_next) - self.s_gx + 0.5 * linalg::dist_sq(x_next, x1)
            - 0.5 * self.d_bound * self.d_bound
    }

    /// `G_t = f(x_{t+1}) − L_t`.
    pub fn gd_gap(&self, x_next: &[f64], x1: &[f64], f_next: f64, cumulative: f64) -> Result<f64> {
        if !(cumulative > 0.0) {
            return Err(Error::State("cumulative weight must be positive".into()));
        }
        Ok(f_next - self.scaled_lower_bound(x_next, x1) / cumulative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::SimplexSet;

    #[test]
    fn fw_reset_and_freeze() {
        let mut t = FwGapTracker::new();
        let b = t.fw_update(1.0, 3.0, -1.0).unwrap();
        assert_eq!(b, FwBounds { mix: 2.0, best: 2.0 });
        let b = t.fw_update(0.0, 10.0, -1.0).unwrap();
        assert_eq!(b.mix, 2.0);
        assert_eq!(b.best, 9.0);
        assert!(matches!(t.fw_update(1.5, 0.0, 0.0), Err(Error::Contract(_))));
        assert!(matches!(t.fw_update(-0.1, 0.0, 0.0), Err(Error::Contract(_))));
    }

    #[test]
    fn fw_mix_matches_weighted_sum() {
        let terms = [(5.0, -2.0), (4.0, -1.5), (3.5, -0.25)];
        let mut t = FwGapTracker::new();
        let mut big_a = 0.0;
        let mut sum = 0.0;
        for (i, (f, inner)) in terms.iter().enumerate() {
            let a = 2.0 * i as f64 + 2.0;
            big_a += a;
            sum += a * (f + inner);
            let b = t.fw_update(a / big_a, *f, *inner).unwrap();
            assert!((b.mix - sum / big_a).abs() < 1e-14);
            assert!(b.mix <= b.best + 1e-9);
        }
    }

    #[test]
    fn hb_single_point_is_fw_bound() {
        let set = SimplexSet::new(3).unwrap();
        let x = [0.2, 0.3, 0.5];
        let g = [1.0, -2.0, 0.5];
        let mut hb = HbGapTracker::new(3);
        assert!(matches!(hb.hb_lower_bound(&set), Err(Error::State(_))));
        hb.absorb(1.0, 4.0, &g, &x).unwrap();
        let (v, lb) = hb.hb_lower_bound(&set).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 0.0]);
        let inner = linalg::dot(&g, &linalg::sub(&v, &x));
        assert!((lb - (4.0 + inner)).abs() < 1e-14);
    }

    #[test]
    fn hb_zero_gradient() {
        let set = SimplexSet::new(3).unwrap();
        let mut hb = HbGapTracker::new(3);
        hb.absorb(1.0, 2.0, &[0.0; 3], &[0.2, 0.3, 0.5]).unwrap();
        let (v, lb) = hb.hb_lower_bound(&set).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0]);
        assert_eq!(lb, 2.0);
    }

    #[test]
    fn hb_first_weight_must_be_one() {
        let mut hb = HbGapTracker::new(2);
        assert!(matches!(
            hb.absorb(0.5, 1.0, &[1.0, 1.0], &[0.5, 0.5]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn gd_gap_one_dim_by_hand() {
        // f(x) = x², x1 = 1, D = 1, a1 = 1/(2L) = 1/4, x2 = 1 − a·2 = 1/2.
        let mut t = GdGapTracker::new(1, 1.0).unwrap();
        let a = 0.25;
        t.absorb(a, 1.0, &[2.0], &[1.0]);
        let x2 = [0.5];
        let g = t.gd_gap(&x2, &[1.0], 0.25, a).unwrap();
        // A1 L1 = a·1 + a·2·(0.5 − 1) + ½·0.25 − ½ = 0.25 − 0.25 + 0.125 − 0.5 = −0.375
        assert!((g - (0.25 + 0.375 / 0.25)).abs() < 1e-14);
    }

    #[test]
    fn gd_gap_stationary_history() {
        let mut t = GdGapTracker::new(2, 3.0).unwrap();
        let xs = [1.0, -1.0];
        t.absorb(0.5, 0.0, &[0.0, 0.0], &xs);
        t.absorb(0.7, 0.0, &[0.0, 0.0], &xs);
        let g = t.gd_gap(&xs, &xs, 0.0, 1.2).unwrap();
        assert!((g - 4.5 / 1.2).abs() < 1e-14);
    }

    #[test]
    fn gd_rejects_nonpositive_bound() {
        assert!(GdGapTracker::new(1, 0.0).unwrap_err().is_config());
    }

    #[test]
    fn optimistic_identical_iterates_add_nothing() {
        let mut t = OptimisticGapTracker::new();
        let v = [1.0, 0.0];
        let g = [0.5, 0.5];
        let x = [0.7, 0.3];
        for k in 1..=3 {
            let a = 2.0 * k as f64;
            t.update(&OptimisticStep {
                a,
                a_prev_cumulative: ((k - 1) * k) as f64,
                v: &v,
                grad: &g,
                hint: &g,
                x: &x,
                fx: 1.0,
                x_prev: &x,
                fx_prev: 1.0,
                y_prev: &x,
            });
        }
        assert_eq!(t.optimistic_gap(12.0, 2f64.sqrt()).unwrap(), 0.0);
        assert_eq!(t.optimistic_gap_extra_lmo(12.0, &v).unwrap(), 0.0);
    }
}
