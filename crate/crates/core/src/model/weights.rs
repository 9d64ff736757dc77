//! Weight schedules `a_t`, `A_t = Σ a_i` and `γ_t = a_t / A_t`.

use crate::error::{Error, Result};

/// Upper clamp on `γ` used when reconstructing dynamic weights.
pub const GAMMA_CLAMP: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// `a_t = 2t + 2`, `A_t = (t+1)(t+2)`.
    FwClassic,
    /// `a_t = 2t`, `A_t = t(t+1)`, starting at `t = 1`.
    Optimistic,
    /// `a_t = a0·C(t+ℓ−1, t)`, `A_t = a0·C(t+ℓ, t)`, `γ_t = ℓ/(t+ℓ)`.
    OpenLoop { ell: u32, a0: f64 },
    /// `γ_t` chosen by a step rule each iteration.
    Dynamic,
}

impl ScheduleKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScheduleKind::OpenLoop { ell, a0 } => {
                if ell == 0 {
                    return Err(Error::config("ell", "must be at least 1"));
                }
                if !(a0 > 0.0 && a0.is_finite()) {
                    return Err(Error::config("a0", "must be positive and finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// First index with a positive weight.
    pub fn start(&self) -> usize {
        match self {
            ScheduleKind::Optimistic => 1,
            _ => 0,
        }
    }

    /// Closed-form `a(t)`; `None` for the dynamic schedule.
    pub fn a(&self, t: usize) -> Option<f64> {
        let tf = t as f64;
        match *self {
            ScheduleKind::FwClassic => Some(2.0 * tf + 2.0),
            ScheduleKind::Optimistic => Some(2.0 * tf),
            ScheduleKind::OpenLoop { ell, a0 } => {
                Some(a0 * binomial(t as u64 + ell as u64 - 1, t as u64))
            }
            ScheduleKind::Dynamic => None,
        }
    }

    /// Closed-form `A(t)`; `None` for the dynamic schedule.
    pub fn cumulative(&self, t: usize) -> Option<f64> {
        let tf = t as f64;
        match *self {
            ScheduleKind::FwClassic => Some((tf + 1.0) * (tf + 2.0)),
            ScheduleKind::Optimistic => Some(tf * (tf + 1.0)),
            ScheduleKind::OpenLoop { ell, a0 } => {
                Some(a0 * binomial(t as u64 + ell as u64, t as u64))
            }
            ScheduleKind::Dynamic => None,
        }
    }

    /// Closed-form `γ(t)`; `None` for the dynamic schedule.
    pub fn gamma(&self, t: usize) -> Option<f64> {
        let tf = t as f64;
        match *self {
            ScheduleKind::FwClassic => Some(2.0 / (tf + 2.0)),
            ScheduleKind::Optimistic if t == 0 => Some(0.0),
            ScheduleKind::Optimistic => Some(2.0 / (tf + 1.0)),
            ScheduleKind::OpenLoop { ell, .. } => Some(ell as f64 / (tf + ell as f64)),
            ScheduleKind::Dynamic => None,
        }
    }
}

/// `C(n, k)` computed multiplicatively in `u128`, falling back to floating point on overflow.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 1..=k as u128 {
        // acc·(n−k+j) is divisible by j because acc = C(n−k+j−1, j−1).
        match acc.checked_mul(n as u128 - k as u128 + j) {
            Some(p) => acc = p / j,
            None => return binomial_f64(n, k),
        }
    }
    acc as f64
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    let mut acc = 1.0f64;
    for j in 1..=k {
        acc = acc * (n - k + j) as f64 / j as f64;
    }
    acc
}

/// One step of a schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub t: usize,
    pub a: f64,
    pub cumulative: f64,
    pub gamma: f64,
}

/// Running weight recurrence with a closed-form cross-check.
#[derive(Debug, Clone)]
pub struct WeightSchedule {
    kind: ScheduleKind,
    next_t: usize,
    cumulative: f64,
}

impl WeightSchedule {
    pub fn new(kind: ScheduleKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self {
            kind,
            next_t: kind.start(),
            cumulative: 0.0,
        })
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// `A` after the last advance (0 before the first one).
    pub fn cumulative(&self) -> f64 {
        self.cumulative
    }

    pub fn next_index(&self) -> usize {
        self.next_t
    }

    /// Advances a closed-form schedule by one index.
    pub fn advance(&mut self) -> Result<Weights> {
        let t = self.next_t;
        let a = self
            .kind
            .a(t)
            .ok_or_else(|| Error::State("dynamic schedules advance through advance_with_gamma".into()))?;
        self.cumulative += a;
        let closed = self.kind.cumulative(t).expect("closed-form schedule");
        debug_assert!(
            (self.cumulative - closed).abs() <= 1e-9 * closed.abs().max(1.0),
            "weight recurrence drifted from closed form at t = {t}"
        );
        // The closed form is exact for the integer schedules; prefer it over the running sum.
        self.cumulative = closed;
        self.next_t += 1;
        Ok(Weights {
            t,
            a,
            cumulative: closed,
            gamma: self.kind.gamma(t).expect("closed-form schedule"),
        })
    }

    /// Advances a dynamic schedule with a step-rule `γ`.
    ///
    /// The first call pins `a_0 = A_0 = 1`. Afterwards `a = γ A_prev / (1 − γ)` with `γ`
    /// clamped to `1 − 1e-12`, so `γ = 1` yields a huge but finite weight. Trackers mix with
    /// the unclamped `γ`, which keeps them well defined.
    pub fn advance_with_gamma(&mut self, gamma: f64) -> Result<Weights> {
        if self.kind != ScheduleKind::Dynamic {
            return Err(Error::State(
                "only dynamic schedules accept an external step size".into(),
            ));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::Contract(format!("γ = {gamma} outside [0, 1]")));
        }
        let t = self.next_t;
        let a = if t == 0 {
            1.0
        } else {
            let g = gamma.min(GAMMA_CLAMP);
            g * self.cumulative / (1.0 - g)
        };
        self.cumulative += a;
        self.next_t += 1;
        Ok(Weights {
            t,
            a,
            cumulative: self.cumulative,
            gamma,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fw_classic_first_values() {
        let mut s = WeightSchedule::new(ScheduleKind::FwClassic).unwrap();
        let got: Vec<_> = (0..3)
            .map(|_| {
                let w = s.advance().unwrap();
                (w.a, w.cumulative)
            })
            .collect();
        assert_eq!(got, vec![(2.0, 2.0), (4.0, 6.0), (6.0, 12.0)]);
    }

    #[test]
    fn optimistic_first_values() {
        let mut s = WeightSchedule::new(ScheduleKind::Optimistic).unwrap();
        let got: Vec<_> = (0..3)
            .map(|_| {
                let w = s.advance().unwrap();
                (w.t, w.a, w.cumulative)
            })
            .collect();
        assert_eq!(got, vec![(1, 2.0, 2.0), (2, 4.0, 6.0), (3, 6.0, 12.0)]);
        assert_eq!(ScheduleKind::Optimistic.a(0), Some(0.0));
        assert_eq!(ScheduleKind::Optimistic.cumulative(0), Some(0.0));
    }

    #[test]
    fn open_loop_ratio_is_exact() {
        for ell in 1..=6u32 {
            let k = ScheduleKind::OpenLoop { ell, a0: 1.0 };
            for t in 0..200 {
                let ratio = k.cumulative(t).unwrap() / k.a(t).unwrap();
                assert_eq!(ratio, (t as f64 + ell as f64) / ell as f64, "ell={ell} t={t}");
            }
        }
    }

    #[test]
    fn open_loop_weight_identity() {
        for ell in 1..=5u32 {
            let k = ScheduleKind::OpenLoop { ell, a0: 0.7 };
            for t in 0..100 {
                let (a, big, g) = (k.a(t).unwrap(), k.cumulative(t).unwrap(), k.gamma(t).unwrap());
                assert!((a * a / big - g * a).abs() <= 1e-12 * a * a / big);
            }
        }
    }

    #[test]
    fn open_loop_two_factorial_gives_fw_classic_cumulative() {
        // a0 = 2! and ℓ = 2: A matches (t+1)(t+2), a is 2(t+1).
        let k = ScheduleKind::OpenLoop { ell: 2, a0: 2.0 };
        for t in 0..50 {
            assert_eq!(k.cumulative(t), ScheduleKind::FwClassic.cumulative(t));
            assert_eq!(k.a(t), Some(2.0 * (t as f64 + 1.0)));
        }
    }

    #[test]
    fn open_loop_running_sum_matches_closed_form() {
        let mut s = WeightSchedule::new(ScheduleKind::OpenLoop { ell: 3, a0: 1.5 }).unwrap();
        let mut sum = 0.0;
        for _ in 0..500 {
            let w = s.advance().unwrap();
            sum += w.a;
            assert!((sum - w.cumulative).abs() <= 1e-12 * w.cumulative);
        }
    }

    #[test]
    fn binomial_large_falls_back() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(5, 0), 1.0);
        let big = binomial(200, 100);
        assert!((big / 9.054_851_465_610_328e58 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dynamic_reconstructs_gamma() {
        let mut s = WeightSchedule::new(ScheduleKind::Dynamic).unwrap();
        let w0 = s.advance_with_gamma(0.3).unwrap();
        assert_eq!((w0.a, w0.cumulative), (1.0, 1.0));
        for g in [0.5, 0.25, 0.1, 0.9] {
            let w = s.advance_with_gamma(g).unwrap();
            assert!((w.a / w.cumulative - g).abs() < 1e-12);
        }
        let w = s.advance_with_gamma(1.0).unwrap();
        assert!(w.a.is_finite() && w.a > 0.0);
    }

    #[test]
    fn dynamic_rejects_out_of_range() {
        let mut s = WeightSchedule::new(ScheduleKind::Dynamic).unwrap();
        assert!(matches!(s.advance_with_gamma(1.5), Err(Error::Contract(_))));
        assert!(matches!(s.advance(), Err(Error::State(_))));
    }

    #[test]
    fn open_loop_validation() {
        assert!(WeightSchedule::new(ScheduleKind::OpenLoop { ell: 0, a0: 1.0 }).is_err());
        assert!(WeightSchedule::new(ScheduleKind::OpenLoop { ell: 2, a0: 0.0 }).is_err());
    }
}
