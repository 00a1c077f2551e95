use alloc::format;
use alloc::vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Conjugate gradient for a symmetric positive definite operator, starting
/// from the contents of `x`. Stops at `‖b − Ax‖ ≤ tol·‖b‖`.
pub fn conjugate_gradient<A>(apply: A, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<SolveStats>
where
    A: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 0..=max_iter {
        let rel = libm::sqrt(rr) / b_norm;
        if rel <= tol {
            return Ok(SolveStats { iterations: it, relative_residual: rel });
        }
        if it == max_iter || !rel.is_finite() {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolveFailure("operator is not positive definite".into()));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolveFailure(format!(
        "conjugate gradient stalled at relative residual {:e}",
        libm::sqrt(rr) / b_norm
    )))
}

/// BiCGSTAB for a general nonsingular operator, starting from `x`.
pub fn bicgstab<A>(apply: A, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<SolveStats>
where
    A: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(SolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut rel = norm(&r) / b_norm;
    for it in 0..max_iter {
        if rel <= tol {
            return Ok(SolveStats { iterations: it, relative_residual: rel });
        }
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 || !rho_new.is_finite() {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        apply(&p, &mut v);
        alpha = rho / dot(&r_hat, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) / b_norm <= tol {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            // Recompute the true residual rather than trusting the recurrence.
            apply(x, &mut t);
            let true_rel = libm::sqrt(t.iter().zip(b).map(|(a, c)| (c - a) * (c - a)).sum::<f64>()) / b_norm;
            return Ok(SolveStats { iterations: it + 1, relative_residual: true_rel });
        }
        apply(&s, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm(&r) / b_norm;
    }
    if rel <= tol {
        return Ok(SolveStats { iterations: max_iter, relative_residual: rel });
    }
    Err(Error::LinearSolveFailure(format!("BiCGSTAB stalled at relative residual {rel:e}")))
}
