//! Optimistic FTRL and optimistic mirror descent with a (possibly non-smooth, not strongly
//! convex) regularizer accessed through its min-oracle.
//!
//! Notation: `G_t` is the realized weighted loss vector, `G̃_t` its hint. Both learners feed
//! the oracle a vector built from exact sums, so under the recursive subgradient policy
//! OFTRL and OMD hand the oracle bit-identical inputs.

mod exact;

use std::sync::Arc;

pub use exact::{ExactSum, ExactVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::Regularizer;

/// How OMD picks `φ_t ∈ ∂ψ(v_t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubgradientPolicy {
    /// `φ_t = φ_{t−1} − (G_{t−1} + G̃_t − G̃_{t−1})`, which reproduces OFTRL.
    #[default]
    Recursive,
    /// `φ_t = 0`, valid for indicator regularizers.
    Zero,
}

/// Prediction hint `G̃_t = a_t g̃_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hint {
    pub g_tilde: Vec<f64>,
    pub weight: f64,
}

impl Hint {
    pub fn new(g_tilde: Vec<f64>, weight: f64) -> Result<Self> {
        if !linalg::all_finite(&g_tilde) || !weight.is_finite() {
            return Err(Error::Input("hint is not finite".into()));
        }
        Ok(Self { g_tilde, weight })
    }

    /// `a_t g̃_t`
    pub fn weighted(&self) -> Vec<f64> {
        linalg::scale(&self.g_tilde, self.weight)
    }
}

/// Common interface of the two learners.
pub trait OptimisticLearner: Send {
    /// Plays `v_t` given the weighted hint `G̃_t`.
    fn step(&mut self, hint: &[f64]) -> Result<Vec<f64>>;

    /// Reveals the weighted loss `G_t` of the last played point.
    fn observe(&mut self, loss: &[f64]) -> Result<()>;

    /// The point the learner would play next under a zero hint. One min-oracle call.
    fn zero_hint_next(&mut self) -> Result<Vec<f64>>;

    /// The oracle input used by the last [`OptimisticLearner::step`].
    fn last_input(&self) -> &[f64];

    /// Current subgradient and point.
    fn bregman_state(&self) -> BregmanState;
}

/// `(v, φ)` with `φ ∈ ∂ψ(v)`, plus the accumulated linear term for FTRL.
#[derive(Debug, Clone, PartialEq)]
pub struct BregmanState {
    pub point: Vec<f64>,
    pub subgradient: Vec<f64>,
    pub accumulated_linear: Vec<f64>,
}

/// `D_ψ(x, y; φ) = ψ(x) − ψ(y) − ⟨φ, x − y⟩`.
pub fn bregman_divergence(reg: &dyn Regularizer, x: &[f64], y: &[f64], phi: &[f64]) -> f64 {
    reg.value(x) - reg.value(y) - linalg::dot(phi, &linalg::sub(x, y))
}

fn check_vec(v: &[f64], n: usize, what: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Input(format!("{what} has length {} instead of {n}", v.len())));
    }
    if !linalg::all_finite(v) {
        return Err(Error::Input(format!("{what} is not finite")));
    }
    Ok(())
}

/// Optimistic FTRL: `v_t ∈ argmin ⟨Σ_{i<t} G_i + G̃_t, v⟩ + ψ(v)`.
#[derive(Debug)]
pub struct Oftrl {
    reg: Arc<dyn Regularizer>,
    acc: ExactVector,
    last_input: Vec<f64>,
    last_point: Vec<f64>,
    awaiting_loss: bool,
}

impl Oftrl {
    pub fn new(reg: Arc<dyn Regularizer>) -> Self {
        let n = reg.dimension();
        Self {
            reg,
            acc: ExactVector::zeros(n),
            last_input: vec![0.0; n],
            last_point: Vec::new(),
            awaiting_loss: false,
        }
    }

    /// `Σ_{i<t} G_i`, rounded.
    pub fn accumulated(&self) -> Vec<f64> {
        self.acc.round()
    }
}

impl OptimisticLearner for Oftrl {
    fn step(&mut self, hint: &[f64]) -> Result<Vec<f64>> {
        check_vec(hint, self.acc.len(), "hint")?;
        if self.awaiting_loss {
            return Err(Error::State("observe the previous loss before stepping".into()));
        }
        self.acc.add(hint);
        self.last_input = self.acc.round();
        self.acc.sub(hint);
        let v = self.reg.min_oracle(&self.last_input)?;
        self.last_point = v.clone();
        self.awaiting_loss = true;
        Ok(v)
    }

    fn observe(&mut self, loss: &[f64]) -> Result<()> {
        check_vec(loss, self.acc.len(), "loss")?;
        if !self.awaiting_loss {
            return Err(Error::State("no point has been played".into()));
        }
        self.acc.add(loss);
        self.awaiting_loss = false;
        Ok(())
    }

    fn zero_hint_next(&mut self) -> Result<Vec<f64>> {
        if self.awaiting_loss {
            return Err(Error::State("observe the loss before asking for the next point".into()));
        }
        self.reg.min_oracle(&self.acc.round())
    }

    fn last_input(&self) -> &[f64] {
        &self.last_input
    }

    fn bregman_state(&self) -> BregmanState {
        BregmanState {
            point: self.last_point.clone(),
            subgradient: linalg::scale(&self.last_input, -1.0),
            accumulated_linear: self.acc.round(),
        }
    }
}

/// Optimistic mirror descent:
/// `v_t ∈ argmin ⟨G_{t−1} − G̃_{t−1} + G̃_t, v⟩ + D_ψ(v, v_{t−1}; φ_{t−1})`.
///
/// For the regularizers here the Bregman term contributes `ψ(v) − ⟨φ_{t−1}, v⟩`, so the
/// oracle input is `G_{t−1} − G̃_{t−1} + G̃_t − φ_{t−1}`. Subgradients are indexed by the
/// point they certify.
#[derive(Debug)]
pub struct Omd {
    reg: Arc<dyn Regularizer>,
    policy: SubgradientPolicy,
    /// `φ` for the recursive policy; unused (zero) otherwise.
    phi: ExactVector,
    prev_loss: Vec<f64>,
    prev_hint: Vec<f64>,
    last_input: Vec<f64>,
    last_point: Vec<f64>,
    awaiting_loss: bool,
}

impl Omd {
    /// Starts from `v_0 ∈ argmin ψ` with `φ_0 = 0` and `G_0 = G̃_0 = 0`.
    pub fn new(reg: Arc<dyn Regularizer>, policy: SubgradientPolicy) -> Self {
        let n = reg.dimension();
        Self {
            reg,
            policy,
            phi: ExactVector::zeros(n),
            prev_loss: vec![0.0; n],
            prev_hint: vec![0.0; n],
            last_input: vec![0.0; n],
            last_point: Vec::new(),
            awaiting_loss: false,
        }
    }

    pub fn policy(&self) -> SubgradientPolicy {
        self.policy
    }

    fn input_for(&mut self, hint: &[f64], commit: bool) -> Vec<f64> {
        match self.policy {
            SubgradientPolicy::Recursive => {
                self.phi.sub(&self.prev_loss);
                self.phi.add(&self.prev_hint);
                self.phi.sub(hint);
                let input = self.phi.round_negated();
                if !commit {
                    self.phi.add(hint);
                    self.phi.sub(&self.prev_hint);
                    self.phi.add(&self.prev_loss);
                }
                input
            }
            SubgradientPolicy::Zero => {
                let mut s = ExactVector::zeros(hint.len());
                s.add(&self.prev_loss);
                s.sub(&self.prev_hint);
                s.add(hint);
                s.round()
            }
        }
    }
}

impl OptimisticLearner for Omd {
    fn step(&mut self, hint: &[f64]) -> Result<Vec<f64>> {
        check_vec(hint, self.prev_loss.len(), "hint")?;
        if self.awaiting_loss {
            return Err(Error::State("observe the previous loss before stepping".into()));
        }
        self.last_input = self.input_for(hint, true);
        let v = self.reg.min_oracle(&self.last_input)?;
        self.prev_hint = hint.to_vec();
        self.last_point = v.clone();
        self.awaiting_loss = true;
        Ok(v)
    }

    fn observe(&mut self, loss: &[f64]) -> Result<()> {
        check_vec(loss, self.prev_loss.len(), "loss")?;
        if !self.awaiting_loss {
            return Err(Error::State("no point has been played".into()));
        }
        self.prev_loss = loss.to_vec();
        self.awaiting_loss = false;
        Ok(())
    }

    fn zero_hint_next(&mut self) -> Result<Vec<f64>> {
        if self.awaiting_loss || self.last_point.is_empty() {
            return Err(Error::State("observe the loss before asking for the next point".into()));
        }
        let zero = vec![0.0; self.prev_loss.len()];
        let input = self.input_for(&zero, false);
        self.reg.min_oracle(&input)
    }

    fn last_input(&self) -> &[f64] {
        &self.last_input
    }

    fn bregman_state(&self) -> BregmanState {
        let subgradient = match self.policy {
            SubgradientPolicy::Recursive => self.phi.round(),
            SubgradientPolicy::Zero => vec![0.0; self.prev_loss.len()],
        };
        BregmanState {
            point: self.last_point.clone(),
            subgradient,
            accumulated_linear: Vec::new(),
        }
    }
}

/// One round of a linear game: loss `g_t`, hint `g̃_t`, played point `v_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub loss: Vec<f64>,
    pub hint: Vec<f64>,
    pub point: Vec<f64>,
}

/// Σ ⟨g_t − g̃_t, v_t − v_{t+1}⟩ with per-round terms; `closing` is `v_{T+1}`.
pub fn regret_terms(history: &[Round], closing: &[f64]) -> Result<(f64, Vec<f64>)> {
    if history.is_empty() {
        return Err(Error::State("empty history".into()));
    }
    let n = closing.len();
    if history
        .iter()
        .any(|r| r.loss.len() != n || r.hint.len() != n || r.point.len() != n)
    {
        return Err(Error::State("history entries have inconsistent lengths".into()));
    }
    let mut terms = Vec::with_capacity(history.len());
    for (t, r) in history.iter().enumerate() {
        let next = history.get(t + 1).map_or(closing, |n| n.point.as_slice());
        let diff = linalg::sub(&r.loss, &r.hint);
        terms.push(linalg::dot(&diff, &linalg::sub(&r.point, next)));
    }
    Ok((terms.iter().sum(), terms))
}

/// Realized regret `Σ ⟨g_t, v_t − u⟩` of a linear game.
pub fn realized_regret(history: &[Round], u: &[f64]) -> f64 {
    history
        .iter()
        .map(|r| linalg::dot(&r.loss, &linalg::sub(&r.point, u)))
        .sum()
}
