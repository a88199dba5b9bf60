//! Eigenvalue oracles independent of the Jacobi path: closed forms for
//! orders 2 and 3, Householder tridiagonalization plus Sturm-sequence
//! bisection on the characteristic polynomial otherwise.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

/// Eigenvalues of a dense symmetric matrix (row-major), ascending.
pub fn eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    match a.len() {
        1 => vec![a[0][0]],
        2 => closed_form_2(a),
        3 => closed_form_3(a),
        _ => bisection(a),
    }
}

pub fn closed_form_2(a: &[Vec<f64>]) -> Vec<f64> {
    let (p, q, r) = (a[0][0], a[1][1], a[0][1]);
    let mid = 0.5 * (p + q);
    let rad = (0.25 * (p - q) * (p - q) + r * r).sqrt();
    vec![mid - rad, mid + rad]
}

/// Trigonometric solution of the depressed characteristic cubic.
pub fn closed_form_3(a: &[Vec<f64>]) -> Vec<f64> {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    if p1 == 0.0 {
        let mut d = vec![a[0][0], a[1][1], a[2][2]];
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        return d;
    }
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = |i: usize, j: usize| (a[i][j] - if i == j { q } else { 0.0 }) / p;
    let det = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1)) - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let l2 = 3.0 * q - l1 - l3;
    let mut v = vec![l1, l2, l3];
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

/// Householder reduction to tridiagonal form: (diagonal, sub-diagonal).
pub fn tridiagonalize(a: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for k in 0..n.saturating_sub(2) {
        let x: Vec<f64> = (k + 1..n).map(|i| m[i][k]).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for t in &mut v {
            *t /= vnorm;
        }
        // M ← H M H with H = I − 2vvᵀ acting on indices k+1..n.
        let idx: Vec<usize> = (k + 1..n).collect();
        for col in 0..n {
            let dot: f64 = idx.iter().zip(&v).map(|(&i, vi)| vi * m[i][col]).sum();
            for (&i, vi) in idx.iter().zip(&v) {
                m[i][col] -= 2.0 * vi * dot;
            }
        }
        for row in m.iter_mut() {
            let dot: f64 = idx.iter().zip(&v).map(|(&i, vi)| vi * row[i]).sum();
            for (&i, vi) in idx.iter().zip(&v) {
                row[i] -= 2.0 * vi * dot;
            }
        }
    }
    let diag = (0..n).map(|i| m[i][i]).collect();
    let off = (1..n).map(|i| m[i][i - 1]).collect();
    (diag, off)
}

/// Number of eigenvalues of the tridiagonal matrix below `x` (Sturm count of
/// the leading principal minors of the characteristic polynomial).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

pub fn bisection(a: &[Vec<f64>]) -> Vec<f64> {
    let (diag, off) = tridiagonalize(a);
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = 1e-9 * (hi - lo).abs().max(1.0);
    (0..n)
        .map(|k| {
            let (mut a, mut b) = (lo - pad, hi + pad);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid == a || mid == b {
                    break;
                }
                if sturm_count(&diag, &off, mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}
