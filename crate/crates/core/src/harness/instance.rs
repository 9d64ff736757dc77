//! Seeded random instances.
//!
//! Each random component draws from its own ChaCha8 stream of the config seed, so changing
//! one component (say the objective) leaves the others unchanged.
//!
//! * `dist`: `f(x) = ‖x − x0‖²`, `x0 = 2u/‖u‖₁` with `u` uniform on `[0,1]ⁿ`.
//! * `lsq`: `f(x) = ‖Ax − b‖²` with standard-normal `A ∈ R^{m×n}` and `b`.
//! * `quad`: `f(x) = ½(x − c)ᵀQ(x − c)`, `Q = U diag(cond^{i/(n−1)}) Uᵀ` with `U` an
//!   orthonormalized Gaussian matrix and `c` standard normal.
//! * `psi = linear`: adds `⟨c, x⟩` with `c` uniform on `[0,1]ⁿ`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{ExperimentConfig, ObjSpec, PsiSpec, SetSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::model::{
    make_distance_objective, make_lsq_objective, make_quadratic_objective, FeasibleSet,
    Objective, ProblemInstance, Reference, Regularizer,
};
use crate::oracles::{
    project_simplex, reference_optimum_ksparse_distance, EuclideanSpace, Indicator,
    IndicatorPlusLinear, KSparseSet, SimplexSet, KSPARSE_ENUM_MAX_DIM,
};

const STREAM_DIST: u64 = 1;
const STREAM_LSQ: u64 = 2;
const STREAM_QUAD: u64 = 3;
const STREAM_PSI: u64 = 4;

/// Sampling radius of the unconstrained domain, used by verification only.
const UNCONSTRAINED_RADIUS: f64 = 1.0;

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn normals(r: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| r.sample::<f64, _>(StandardNormal)).collect()
}

fn uniforms(r: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    (0..count).map(|_| r.random::<f64>()).collect()
}

/// Anchor of the `dist` objective: a positive vector of ℓ1 norm 2.
pub fn dist_anchor(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed, STREAM_DIST);
    let mut u = uniforms(&mut r, n);
    // An all-zero draw has probability zero; guard anyway.
    if u.iter().all(|&x| x == 0.0) {
        u[0] = 1.0;
    }
    let s: f64 = u.iter().sum();
    u.iter().map(|x| 2.0 * x / s).collect()
}

/// Orthonormal columns by modified Gram-Schmidt on a Gaussian matrix (row-major `n × n`).
fn random_orthogonal(n: usize, r: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = normals(r, n);
        for _ in 0..2 {
            for c in &cols {
                let p = linalg::dot(&v, c);
                v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
            }
        }
        let nv = linalg::norm(&v);
        if nv > 1e-8 {
            cols.push(v.into_iter().map(|x| x / nv).collect());
        }
    }
    cols
}

/// `Q = U diag(λ) Uᵀ` with `λ_i = cond^{i/(n−1)}`, so `λ_min = 1` and `λ_max = cond`.
pub fn random_spd(n: usize, cond: f64, seed: u64) -> Result<(Matrix, Vec<f64>)> {
    let mut r = rng(seed, STREAM_QUAD);
    let u = random_orthogonal(n, &mut r);
    let lambda: Vec<f64> = (0..n)
        .map(|i| {
            if n == 1 {
                1.0
            } else {
                cond.powf(i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let mut q = vec![0.0; n * n];
    for (k, col) in u.iter().enumerate() {
        let l = lambda[k];
        for i in 0..n {
            let li = l * col[i];
            let row = &mut q[i * n..(i + 1) * n];
            for j in 0..n {
                row[j] += li * col[j];
            }
        }
    }
    // Exact symmetry.
    for i in 0..n {
        for j in 0..i {
            let m = 0.5 * (q[i * n + j] + q[j * n + i]);
            q[i * n + j] = m;
            q[j * n + i] = m;
        }
    }
    let center = normals(&mut r, n);
    let q = Matrix::from_row_major(n, n, q).ok_or_else(|| Error::Input("bad Q shape".into()))?;
    Ok((q, center))
}

/// A generated instance plus a description for the metadata sidecar.
#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub instance: ProblemInstance,
    pub description: String,
}

/// Builds the instance a config describes. The reference optimum is attached whenever it can
/// be computed exactly.
pub fn build_instance(cfg: &ExperimentConfig) -> Result<GeneratedInstance> {
    let n = cfg.dim;
    let set: Arc<dyn FeasibleSet> = match cfg.set {
        SetSpec::Simplex => Arc::new(SimplexSet::new(n)?),
        SetSpec::KSparse => Arc::new(KSparseSet::new(n, cfg.k)?),
        SetSpec::Unconstrained => Arc::new(EuclideanSpace::new(n, UNCONSTRAINED_RADIUS)?),
    };
    let lin = match cfg.psi {
        PsiSpec::Indicator => None,
        PsiSpec::Linear => {
            if cfg.set == SetSpec::Unconstrained {
                return Err(Error::config("psi", "a linear term is unbounded without a set"));
            }
            Some(uniforms(&mut rng(cfg.seed, STREAM_PSI), n))
        }
    };
    let reg: Arc<dyn Regularizer> = match &lin {
        None => Arc::new(Indicator::new(set.clone())),
        Some(c) => Arc::new(IndicatorPlusLinear::new(set.clone(), c.clone())?),
    };
    let psi_at = |x: &[f64]| lin.as_ref().map_or(0.0, |c| linalg::dot(c, x));

    let (objective, reference, what): (Arc<dyn Objective>, Option<Reference>, String) =
        match cfg.obj {
            ObjSpec::Dist => {
                let x0 = dist_anchor(n, cfg.seed);
                // ‖x − x0‖² + ⟨c, x⟩ = ‖x − (x0 − c/2)‖² + const.
                let target: Vec<f64> = match &lin {
                    None => x0.clone(),
                    Some(c) => x0.iter().zip(c).map(|(a, b)| a - 0.5 * b).collect(),
                };
                let f = make_distance_objective(x0.clone())?;
                let point = match cfg.set {
                    SetSpec::Simplex => Some(project_simplex(&target)),
                    SetSpec::KSparse if n <= KSPARSE_ENUM_MAX_DIM => {
                        Some(reference_optimum_ksparse_distance(&target, cfg.k)?.0)
                    }
                    SetSpec::KSparse => None,
                    SetSpec::Unconstrained => Some(x0.clone()),
                };
                let reference = point.map(|p| Reference {
                    value: f.value(&p) + psi_at(&p),
                    point: Some(p),
                });
                (
                    Arc::new(f),
                    reference,
                    "dist: x0 = 2u/|u|_1, u ~ U(0,1)^n".to_string(),
                )
            }
            ObjSpec::Lsq => {
                let m = cfg.m.unwrap_or(n);
                let mut r = rng(cfg.seed, STREAM_LSQ);
                let a = normals(&mut r, m * n);
                let b = normals(&mut r, m);
                let a = Matrix::from_row_major(m, n, a)
                    .ok_or_else(|| Error::Input("bad A shape".into()))?;
                (
                    Arc::new(make_lsq_objective(a, b)?),
                    None,
                    format!("lsq: A ~ N(0,1)^({m}x{n}), b ~ N(0,1)^{m}"),
                )
            }
            ObjSpec::Quad => {
                let (q, center) = random_spd(n, cfg.cond, cfg.seed)?;
                let f = make_quadratic_objective(q, center.clone(), 0.0)?;
                let reference = (cfg.set == SetSpec::Unconstrained).then(|| Reference {
                    point: Some(center),
                    value: 0.0,
                });
                (
                    Arc::new(f),
                    reference,
                    format!(
                        "quad: Q = U diag(cond^(i/(n-1))) U^T, cond = {}, U orthonormalized N(0,1), c ~ N(0,1)^n",
                        cfg.cond
                    ),
                )
            }
        };
    let description = format!(
        "{}; {}; psi = {}; seed = {}",
        set.describe(),
        what,
        match &lin {
            None => "indicator".to_string(),
            Some(_) => "indicator + <c,x>, c ~ U(0,1)^n".to_string(),
        },
        cfg.seed
    );
    Ok(GeneratedInstance {
        instance: ProblemInstance::new(objective, reg, reference)?,
        description,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_is_outside_the_simplex() {
        let x0 = dist_anchor(50, 3);
        let s: f64 = x0.iter().sum();
        assert!((s - 2.0).abs() < 1e-12);
        assert!(x0.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn spd_has_requested_spectrum() {
        let (q, _) = random_spd(8, 100.0, 1).unwrap();
        let f = make_quadratic_objective(q.clone(), vec![0.0; 8], 0.0).unwrap();
        assert!((f.smoothness() - 100.0).abs() < 1e-6 * 100.0);
        // λ_min = 1: xᵀQx ≥ ‖x‖² on random vectors.
        let mut r = rng(9, 0);
        for _ in 0..20 {
            let x = normals(&mut r, 8);
            assert!(linalg::dot(&x, &q.mul_vec(&x)) >= linalg::norm_sq(&x) * (1.0 - 1e-9));
        }
    }

    #[test]
    fn same_seed_same_instance_and_streams_are_independent() {
        let mut a = ExperimentConfig {
            obj: ObjSpec::Lsq,
            dim: 5,
            ..Default::default()
        };
        let i1 = build_instance(&a).unwrap();
        let i2 = build_instance(&a).unwrap();
        let x = vec![0.2; 5];
        assert_eq!(i1.instance.objective.value(&x), i2.instance.objective.value(&x));
        a.psi = PsiSpec::Linear;
        let i3 = build_instance(&a).unwrap();
        assert_eq!(i1.instance.objective.value(&x), i3.instance.objective.value(&x));
    }

    #[test]
    fn composite_reference_is_optimal() {
        let cfg = ExperimentConfig {
            dim: 6,
            psi: PsiSpec::Linear,
            ..Default::default()
        };
        let g = build_instance(&cfg).unwrap();
        let inst = &g.instance;
        let fstar = inst.reference_value().unwrap();
        let mut r = rng(5, 0);
        for _ in 0..200 {
            let y = inst.set().sample(&mut r);
            let v = inst.objective.value(&y) + inst.regularizer.value(&y);
            assert!(v >= fstar - 1e-12);
        }
    }
}
