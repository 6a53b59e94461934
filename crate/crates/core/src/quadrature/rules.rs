use std::num::NonZeroUsize;

use faer::{Mat, Side};
use gauss_quad::GaussLegendre;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n).expect("Gauss–Legendre order must be positive");
    let mut rule: Vec<(f64, f64)> = GaussLegendre::new(n).as_node_weight_pairs().to_vec();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Gauss rule for the weight `-ln x` on `[0, 1]`: exact for
/// `∫_0^1 -ln(x) p(x) dx` with `deg p ≤ 2n - 1`.
///
/// Recurrence coefficients come from the modified Chebyshev algorithm
/// seeded with the modified moments against monic shifted Legendre
/// polynomials, `m_k = (-1)^k (k!)² / (k (k+1) (2k)!)`; nodes and weights
/// follow from the Jacobi matrix (Golub–Welsch).
pub fn log_weighted_gauss(n: usize) -> Vec<(f64, f64)> {
    assert!((1..=40).contains(&n), "log-weighted Gauss order out of range");
    let m = 2 * n;
    let mut moments = vec![0.0; m];
    moments[0] = 1.0;
    // ratio m_k / m_{k-1} = -(k-1) k / ((k+1) 2 (2k-1)) for k ≥ 2
    if m > 1 {
        moments[1] = -0.25;
    }
    for k in 2..m {
        let kf = k as f64;
        moments[k] = -moments[k - 1] * (kf - 1.0) * kf / ((kf + 1.0) * 2.0 * (2.0 * kf - 1.0));
    }
    let a = |_l: usize| 0.5;
    let b = |l: usize| {
        if l == 0 {
            0.0
        } else {
            let lf = (l * l) as f64;
            lf / (4.0 * (4.0 * lf - 1.0))
        }
    };

    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut sigma_prev = vec![0.0; m + 1];
    let mut sigma = moments.clone();
    sigma.push(0.0);
    alpha[0] = a(0) + moments[1] / moments[0];
    beta[0] = moments[0];
    for k in 1..n {
        let mut next = vec![0.0; m + 1];
        for l in k..(m - k) {
            next[l] = sigma[l + 1] - (alpha[k - 1] - a(l)) * sigma[l] - beta[k - 1] * sigma_prev[l]
                + b(l) * sigma[l - 1];
        }
        alpha[k] = a(k) + next[k + 1] / next[k] - sigma[k] / sigma[k - 1];
        beta[k] = next[k] / sigma[k - 1];
        sigma_prev = sigma;
        sigma = next;
    }

    let jacobi = Mat::<f64>::from_fn(n, n, |i, j| {
        if i == j {
            alpha[i]
        } else if i.abs_diff(j) == 1 {
            beta[i.max(j)].sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi
        .self_adjoint_eigen(Side::Lower)
        .expect("symmetric tridiagonal eigenproblem");
    let nodes = eig.S();
    let vecs = eig.U();
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = vecs[(0, i)];
            (nodes[i], beta[0] * v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// Values of the Lagrange basis polynomials on `nodes` at `x`.
pub fn lagrange_basis(nodes: &[f64], x: f64) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &xk)| (x - xk) / (nodes[j] - xk))
                .product()
        })
        .collect()
}
