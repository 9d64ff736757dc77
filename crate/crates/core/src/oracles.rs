//! Concrete feasible sets, their LMOs, regularizers and exact reference projections.

use std::cmp::Ordering;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{FeasibleSet, Regularizer};

fn check_finite(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::Input(format!(
            "direction has length {} but the set has dimension {n}",
            w.len()
        )));
    }
    if let Some(i) = w.iter().position(|x| !x.is_finite()) {
        return Err(Error::Input(format!("direction entry {i} is not finite")));
    }
    Ok(())
}

/// Basis vector `e_i` with `i` the smallest index attaining `min_j w_j`.
pub fn lmo_simplex(w: &[f64]) -> Result<Vec<f64>> {
    check_finite(w, w.len())?;
    if w.is_empty() {
        return Err(Error::Input("empty direction".into()));
    }
    let mut best = 0;
    for (i, &wi) in w.iter().enumerate().skip(1) {
        if wi < w[best] {
            best = i;
        }
    }
    let mut v = vec![0.0; w.len()];
    v[best] = 1.0;
    Ok(v)
}

/// 0/1 vector with ones at the `k` smallest entries of `w`, ties to the lowest index.
pub fn lmo_ksparse(w: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = w.len();
    if k == 0 || k > n {
        return Err(Error::Input(format!("k = {k} outside 1..={n}")));
    }
    check_finite(w, n)?;
    let mut idx: Vec<usize> = (0..n).collect();
    let key = |a: &usize, b: &usize| -> Ordering {
        w[*a].partial_cmp(&w[*b]).unwrap_or(Ordering::Equal).then(a.cmp(b))
    };
    if k < n {
        idx.select_nth_unstable_by(k - 1, key);
    }
    let mut v = vec![0.0; n];
    for &i in &idx[..k] {
        v[i] = 1.0;
    }
    Ok(v)
}

/// Probability simplex `{x ≥ 0, Σ x = 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSet {
    n: usize,
}

impl SimplexSet {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        Ok(Self { n })
    }
}

impl FeasibleSet for SimplexSet {
    fn dimension(&self) -> usize {
        self.n
    }

    fn lmo(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_finite(w, self.n)?;
        lmo_simplex(w)
    }

    fn diameter_sq(&self) -> f64 {
        if self.n == 1 {
            0.0
        } else {
            2.0
        }
    }

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.n
            && x.iter().all(|&v| v >= -tol && v.is_finite())
            && (x.iter().sum::<f64>() - 1.0).abs() <= tol
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut rng = rng;
        // A quarter of the samples are vertices, the rest Dirichlet(1) on a random support.
        if rng.random_bool(0.25) {
            let mut v = vec![0.0; self.n];
            v[rng.random_range(0..self.n)] = 1.0;
            return v;
        }
        let p_keep = rng.random_range(0.1..=1.0);
        let mut x: Vec<f64> = (0..self.n)
            .map(|_| {
                if rng.random_bool(p_keep) {
                    Exp1.sample(&mut rng)
                } else {
                    0.0
                }
            })
            .collect();
        let s: f64 = x.iter().sum();
        if s <= 0.0 {
            x[rng.random_range(0..self.n)] = 1.0;
            return x;
        }
        x.iter_mut().for_each(|v| *v /= s);
        x
    }

    fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        (self.n <= 64).then(|| {
            (0..self.n)
                .map(|i| {
                    let mut v = vec![0.0; self.n];
                    v[i] = 1.0;
                    v
                })
                .collect()
        })
    }

    fn describe(&self) -> String {
        format!("simplex(n={})", self.n)
    }
}

/// Convex hull of the 0/1 vectors with exactly `k` ones.
#[derive(Debug, Clone, PartialEq)]
pub struct KSparseSet {
    n: usize,
    k: usize,
}

impl KSparseSet {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        if k == 0 || k > n {
            return Err(Error::config("k", format!("must lie in 1..={n}")));
        }
        Ok(Self { n, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl FeasibleSet for KSparseSet {
    fn dimension(&self) -> usize {
        self.n
    }

    fn lmo(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_finite(w, self.n)?;
        lmo_ksparse(w, self.k)
    }

    fn diameter_sq(&self) -> f64 {
        2.0 * self.k.min(self.n - self.k) as f64
    }

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.n
            && x.iter().all(|&v| v >= -tol && v <= 1.0 + tol && v.is_finite())
            && (x.iter().sum::<f64>() - self.k as f64).abs() <= tol * (1.0 + self.k as f64)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut rng = rng;
        let m = rng.random_range(1..=4usize);
        let weights: Vec<f64> = (0..m).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = weights.iter().sum();
        let mut x = vec![0.0; self.n];
        for w in weights {
            let mut idx: Vec<usize> = (0..self.n).collect();
            // Partial Fisher-Yates picks a uniform k-subset.
            for i in 0..self.k {
                let j = rng.random_range(i..self.n);
                idx.swap(i, j);
            }
            for &i in &idx[..self.k] {
                x[i] += w / total;
            }
        }
        x
    }

    fn vertices(&self) -> Option<Vec<Vec<f64>>> {
        let count = crate::model::weights::binomial(self.n as u64, self.k as u64);
        if count > 200_000.0 {
            return None;
        }
        let mut out = Vec::with_capacity(count as usize);
        let mut comb: Vec<usize> = (0..self.k).collect();
        loop {
            let mut v = vec![0.0; self.n];
            comb.iter().for_each(|&i| v[i] = 1.0);
            out.push(v);
            // Next combination in lexicographic order.
            let mut i = self.k;
            while i > 0 && comb[i - 1] == i - 1 + self.n - self.k {
                i -= 1;
            }
            if i == 0 {
                return Some(out);
            }
            let i = i - 1;
            comb[i] += 1;
            for j in i + 1..self.k {
                comb[j] = comb[j - 1] + 1;
            }
        }
    }

    fn describe(&self) -> String {
        format!("ksparse(n={}, k={})", self.n, self.k)
    }
}

/// All of `R^n`, the domain of unconstrained problems. It has no LMO and an infinite
/// diameter; samples are standard normal scaled by `radius`.
#[derive(Debug, Clone)]
pub struct EuclideanSpace {
    n: usize,
    radius: f64,
}

impl EuclideanSpace {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Input("sampling radius must be positive".into()));
        }
        Ok(Self { n, radius })
    }
}

impl FeasibleSet for EuclideanSpace {
    fn dimension(&self) -> usize {
        self.n
    }

    fn lmo(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_finite(w, self.n)?;
        if w.iter().all(|&x| x == 0.0) {
            return Ok(vec![0.0; self.n]);
        }
        Err(Error::Degenerate(
            "linear minimization over the whole space is unbounded".into(),
        ))
    }

    fn diameter_sq(&self) -> f64 {
        f64::INFINITY
    }

    fn contains(&self, x: &[f64], _tol: f64) -> bool {
        x.len() == self.n && linalg::all_finite(x)
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let mut rng = rng;
        (0..self.n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                self.radius * z
            })
            .collect()
    }

    fn describe(&self) -> String {
        format!("unconstrained(n={})", self.n)
    }
}

/// `ψ = indicator of a set`.
#[derive(Debug, Clone)]
pub struct Indicator {
    set: Arc<dyn FeasibleSet>,
}

impl Indicator {
    pub fn new(set: Arc<dyn FeasibleSet>) -> Self {
        Self { set }
    }
}

impl Regularizer for Indicator {
    fn dimension(&self) -> usize {
        self.set.dimension()
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.set.contains(x, 1e-9) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    fn min_oracle(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.set.lmo(w)
    }

    fn min_oracle_scaled(&self, w: &[f64], _s: f64) -> Result<Vec<f64>> {
        self.set.lmo(w)
    }

    fn subgradient_at(&self, x: &[f64]) -> Vec<f64> {
        vec![0.0; x.len()]
    }

    fn is_indicator(&self) -> bool {
        true
    }

    fn domain(&self) -> &dyn FeasibleSet {
        self.set.as_ref()
    }
}

/// `ψ(x) = ⟨c, x⟩` on a set, `+∞` outside.
#[derive(Debug, Clone)]
pub struct IndicatorPlusLinear {
    set: Arc<dyn FeasibleSet>,
    c: Vec<f64>,
}

impl IndicatorPlusLinear {
    pub fn new(set: Arc<dyn FeasibleSet>, c: Vec<f64>) -> Result<Self> {
        check_finite(&c, set.dimension())?;
        Ok(Self { set, c })
    }

    pub fn linear_term(&self) -> &[f64] {
        &self.c
    }
}

impl Regularizer for IndicatorPlusLinear {
    fn dimension(&self) -> usize {
        self.set.dimension()
    }

    fn value(&self, x: &[f64]) -> f64 {
        if self.set.contains(x, 1e-9) {
            linalg::dot(&self.c, x)
        } else {
            f64::INFINITY
        }
    }

    fn min_oracle(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_finite(w, self.c.len())?;
        let shifted: Vec<f64> = w.iter().zip(&self.c).map(|(a, b)| a + b).collect();
        self.set.lmo(&shifted)
    }

    fn subgradient_at(&self, _x: &[f64]) -> Vec<f64> {
        self.c.clone()
    }

    fn domain(&self) -> &dyn FeasibleSet {
        self.set.as_ref()
    }
}

/// A member of `argmin_v ⟨w, v⟩ + ψ(v)`; non-finite results are reported as degenerate.
pub fn regularized_min_oracle(reg: &dyn Regularizer, w: &[f64]) -> Result<Vec<f64>> {
    let v = reg.min_oracle(w)?;
    if !linalg::all_finite(&v) {
        return Err(Error::Degenerate(
            "regularized objective is unbounded below".into(),
        ));
    }
    Ok(v)
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    if n == 0 {
        return Vec::new();
    }
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j as f64 + 1.0);
        if uj - t > 0.0 {
            tau = t;
        }
    }
    y.iter().map(|&v| (v - tau).max(0.0)).collect()
}

/// Largest dimension handled by face enumeration in [`reference_optimum_ksparse_distance`].
pub const KSPARSE_ENUM_MAX_DIM: usize = 12;

/// Exact minimizer of `‖x − x0‖²` over the k-sparse polytope.
///
/// Small instances enumerate every assignment of coordinates to {0, 1, free}; each fixes an
/// affine projection. Larger instances are only handled when the answer is known by
/// construction: `x0` is a vertex, or `k = n`.
pub fn reference_optimum_ksparse_distance(x0: &[f64], k: usize) -> Result<(Vec<f64>, f64)> {
    let n = x0.len();
    if k == 0 || k > n {
        return Err(Error::Input(format!("k = {k} outside 1..={n}")));
    }
    check_finite(x0, n)?;
    if k == n {
        return Ok((vec![1.0; n], linalg::dist_sq(&vec![1.0; n], x0)));
    }
    let ones = x0.iter().filter(|&&v| v == 1.0).count();
    if ones == k && x0.iter().all(|&v| v == 0.0 || v == 1.0) {
        return Ok((x0.to_vec(), 0.0));
    }
    if n > KSPARSE_ENUM_MAX_DIM {
        return Err(Error::Unsupported(format!(
            "exact k-sparse projection needs n ≤ {KSPARSE_ENUM_MAX_DIM} or a vertex anchor (n = {n})"
        )));
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    let total = 3usize.pow(n as u32);
    let mut state = vec![0u8; n];
    for code in 0..total {
        let mut c = code;
        for s in state.iter_mut() {
            *s = (c % 3) as u8;
            c /= 3;
        }
        let upper = state.iter().filter(|&&s| s == 1).count();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        if upper > k {
            continue;
        }
        let tau = if free.is_empty() {
            if upper != k {
                continue;
            }
            0.0
        } else {
            let s: f64 = free.iter().map(|&i| x0[i]).sum();
            (s + upper as f64 - k as f64) / free.len() as f64
        };
        let mut x = vec![0.0; n];
        let mut ok = true;
        for i in 0..n {
            x[i] = match state[i] {
                0 => 0.0,
                1 => 1.0,
                _ => {
                    let v = x0[i] - tau;
                    if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                        ok = false;
                        break;
                    }
                    v.clamp(0.0, 1.0)
                }
            };
        }
        if !ok {
            continue;
        }
        let d = linalg::dist_sq(&x, x0);
        if best.as_ref().is_none_or(|(_, b)| d < *b) {
            best = Some((x, d));
        }
    }
    best.ok_or_else(|| Error::Degenerate("face enumeration found no feasible point".into()))
}
