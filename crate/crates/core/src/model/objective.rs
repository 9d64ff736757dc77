use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

/// A convex, L-smooth function (w.r.t. the Euclidean norm) with first-order oracle.
pub trait Objective: Send + Sync + Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Lipschitz constant of the gradient.
    fn smoothness(&self) -> f64;
}

/// `f(x) = ‖x − x0‖²`
#[derive(Debug, Clone)]
pub struct DistanceObjective {
    x0: Vec<f64>,
}

pub fn make_distance_objective(x0: Vec<f64>) -> Result<DistanceObjective> {
    if !linalg::all_finite(&x0) {
        return Err(Error::Input("distance anchor has non-finite entries".into()));
    }
    Ok(DistanceObjective { x0 })
}

impl DistanceObjective {
    pub fn anchor(&self) -> &[f64] {
        &self.x0
    }
}

impl Objective for DistanceObjective {
    fn dim(&self) -> usize {
        self.x0.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        linalg::dist_sq(x, &self.x0)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.x0).map(|(a, b)| 2.0 * (a - b)).collect()
    }

    fn smoothness(&self) -> f64 {
        2.0
    }
}

/// `f(x) = ‖Ax − b‖²`
#[derive(Debug, Clone)]
pub struct LeastSquaresObjective {
    a: Matrix,
    b: Vec<f64>,
    smoothness: f64,
}

/// Builds the least-squares objective; `L = 2 λ_max(AᵀA)` by power iteration.
pub fn make_lsq_objective(a: Matrix, b: Vec<f64>) -> Result<LeastSquaresObjective> {
    if a.rows() != b.len() {
        return Err(Error::Input(format!(
            "A is {}x{} but b has length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    if a.cols() == 0 {
        return Err(Error::Input("A has no columns".into()));
    }
    if !linalg::all_finite(a.data()) || !linalg::all_finite(&b) {
        return Err(Error::Input("A or b has non-finite entries".into()));
    }
    if a.data().iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate(
            "A is the zero matrix, so the smoothness constant would be 0".into(),
        ));
    }
    let lambda = power_iteration(a.cols(), |v| a.tr_mul_vec(&a.mul_vec(v)));
    if !(lambda > 0.0) {
        return Err(Error::Degenerate("λ_max(AᵀA) is not positive".into()));
    }
    Ok(LeastSquaresObjective {
        a,
        b,
        smoothness: 2.0 * lambda,
    })
}

impl LeastSquaresObjective {
    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.a.mul_vec(x);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        r
    }
}

impl Objective for LeastSquaresObjective {
    fn dim(&self) -> usize {
        self.a.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        linalg::norm_sq(&self.residual(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = self.residual(x);
        linalg::scale(&self.a.tr_mul_vec(&r), 2.0)
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }
}

/// `f(x) = ½ (x − c)ᵀ Q (x − c) + offset` for symmetric positive semidefinite `Q`.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    q: Matrix,
    center: Vec<f64>,
    offset: f64,
    smoothness: f64,
}

pub fn make_quadratic_objective(
    q: Matrix,
    center: Vec<f64>,
    offset: f64,
) -> Result<QuadraticObjective> {
    let n = center.len();
    if q.rows() != n || q.cols() != n {
        return Err(Error::Input(format!(
            "Q is {}x{} but the center has length {n}",
            q.rows(),
            q.cols()
        )));
    }
    if !linalg::all_finite(q.data()) || !linalg::all_finite(&center) || !offset.is_finite() {
        return Err(Error::Input("quadratic data has non-finite entries".into()));
    }
    for i in 0..n {
        for j in 0..i {
            let (a, b) = (q.get(i, j), q.get(j, i));
            if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                return Err(Error::Input(format!("Q is not symmetric at ({i}, {j})")));
            }
        }
    }
    let lambda = power_iteration(n, |v| q.mul_vec(v));
    if !(lambda > 0.0) {
        return Err(Error::Degenerate("λ_max(Q) is not positive".into()));
    }
    Ok(QuadraticObjective {
        q,
        center,
        offset,
        smoothness: lambda,
    })
}

impl QuadraticObjective {
    /// Unconstrained minimizer.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let d = linalg::sub(x, &self.center);
        0.5 * linalg::dot(&d, &self.q.mul_vec(&d)) + self.offset
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.q.mul_vec(&linalg::sub(x, &self.center))
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }
}

/// Largest eigenvalue of a symmetric PSD operator.
///
/// Iterates until the Rayleigh quotient changes by less than 1e-13 relative, which is well
/// inside the 1e-6 accuracy the step rules need. The start vector is fixed so results are
/// reproducible.
pub fn power_iteration(n: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    const MAX_ITERS: usize = 20_000;
    // Deterministic start with no special alignment to coordinate axes.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
        .collect();
    let nv = linalg::norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut lambda = 0.0;
    for _ in 0..MAX_ITERS {
        let w = apply(&v);
        let next = linalg::dot(&v, &w);
        let nw = linalg::norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        v = w.into_iter().map(|x| x / nw).collect();
        if (next - lambda).abs() <= 1e-13 * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_at_unit_vector() {
        let f = make_distance_objective(vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(f.value(&[1.0, 0.0, 0.0]), 1.0);
        assert_eq!(f.gradient(&[1.0, 0.0, 0.0]), vec![2.0, 0.0, 0.0]);
        assert_eq!(f.smoothness(), 2.0);
    }

    #[test]
    fn distance_at_anchor_is_stationary() {
        let x0 = vec![0.3, -1.2, 4.0];
        let f = make_distance_objective(x0.clone()).unwrap();
        assert_eq!(f.value(&x0), 0.0);
        assert!(f.gradient(&x0).iter().all(|&g| g == 0.0));
    }

    #[test]
    fn distance_rejects_nan() {
        assert!(matches!(
            make_distance_objective(vec![f64::NAN]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn lsq_identity() {
        let f = make_lsq_objective(Matrix::identity(2), vec![0.0, 0.0]).unwrap();
        assert_eq!(f.value(&[1.0, 0.0]), 1.0);
        assert_eq!(f.gradient(&[1.0, 0.0]), vec![2.0, 0.0]);
        assert!((f.smoothness() - 2.0).abs() < 2e-6);
    }

    #[test]
    fn lsq_diag_smoothness() {
        // λ_max(diag(1,3)ᵀ diag(1,3)) = 9
        let f = make_lsq_objective(Matrix::diag(&[1.0, 3.0]), vec![0.0, 0.0]).unwrap();
        assert!((f.smoothness() - 18.0).abs() <= 18.0 * 1e-6);
    }

    #[test]
    fn lsq_exact_fit_has_zero_gradient() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0], vec![3.0, -1.0]]).unwrap();
        let x = [0.5, -2.0];
        let b = a.mul_vec(&x);
        let f = make_lsq_objective(a, b).unwrap();
        assert!(f.gradient(&x).iter().all(|g| g.abs() < 1e-12));
        assert_eq!(f.value(&x), 0.0);
    }

    #[test]
    fn lsq_zero_matrix_is_degenerate() {
        let a = Matrix::from_row_major(2, 2, vec![0.0; 4]).unwrap();
        assert!(matches!(
            make_lsq_objective(a, vec![1.0, 1.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn lsq_shape_mismatch() {
        assert!(matches!(
            make_lsq_objective(Matrix::identity(2), vec![1.0]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn quadratic_smoothness_matches_spectrum() {
        let f = make_quadratic_objective(Matrix::diag(&[1.0, 7.0, 3.0]), vec![1.0, 2.0, 3.0], 0.5)
            .unwrap();
        assert!((f.smoothness() - 7.0).abs() < 7e-9);
        assert_eq!(f.value(&[1.0, 2.0, 3.0]), 0.5);
    }
}
