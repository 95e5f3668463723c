//! Thin singular value decomposition by one-sided (Hestenes) Jacobi
//! rotations. Deterministic for a given input and accurate to working
//! precision for small singular values, which matters for exact
//! reconstruction and rank detection.

/// `a = u · diag(sigma) · vᵀ` with singular values sorted non-increasing.
/// `u` holds `n` column vectors of length `m`, `v` holds `n` column vectors
/// of length `n`. Columns of `u` belonging to zero singular values are zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Vec<Vec<f64>>,
    pub sigma: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

const MAX_SWEEPS: usize = 100;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rotate(a: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = a.split_at_mut(q);
    let (ap, aq) = (&mut left[p], &mut right[0]);
    for (x, y) in ap.iter_mut().zip(aq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Decomposes the matrix given by its columns. Returns `None` when the
/// rotations fail to converge.
pub fn thin_svd(columns: &[Vec<f64>]) -> Option<Svd> {
    let n = columns.len();
    let mut a: Vec<Vec<f64>> = columns.to_vec();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            e
        })
        .collect();

    let tol = f64::EPSILON;
    // Columns below this squared norm are numerical noise; rotating them
    // against each other never settles.
    let frobenius_sq: f64 = a.iter().map(|c| dot(c, c)).sum();
    let negligible = frobenius_sq * f64::EPSILON * f64::EPSILON;
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma == 0.0
                    || alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }

    let norms: Vec<f64> = a.iter().map(|col| dot(col, col).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));

    let mut u = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    for &j in &order {
        let s = norms[j];
        let col = if s > 0.0 { a[j].iter().map(|x| x / s).collect() } else { vec![0.0; a[j].len()] };
        u.push(col);
        sigma.push(s);
        vs.push(v[j].clone());
    }
    Some(Svd { u, sigma, v: vs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(svd: &Svd, rows: usize) -> Vec<Vec<f64>> {
        let n = svd.v.len();
        (0..n)
            .map(|col| {
                (0..rows)
                    .map(|row| (0..svd.sigma.len()).map(|k| svd.u[k][row] * svd.sigma[k] * svd.v[k][col]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn diagonal() {
        let svd = thin_svd(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(svd.sigma, vec![3.0, 1.0]);
    }

    #[test]
    fn rank_one() {
        let svd = thin_svd(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!((svd.sigma[0] - 5.0).abs() < 1e-12);
        assert!(svd.sigma[1] <= 1e-10);
    }

    #[test]
    fn reconstructs_rectangular() {
        let cols = vec![vec![1.0, 0.0, 2.0, 0.5], vec![0.0, 3.0, 1.0, 0.0], vec![1.5, 1.0, 0.0, 2.0]];
        let svd = thin_svd(&cols).unwrap();
        let back = reconstruct(&svd, 4);
        for (c, col) in cols.iter().enumerate() {
            for (r, x) in col.iter().enumerate() {
                assert!((back[c][r] - x).abs() < 1e-12);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let d = dot(&svd.u[i], &svd.u[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((d - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wide_matrix_has_zero_trailing_values() {
        // 2 rows, 4 columns: at most two nonzero singular values
        let cols = vec![vec![1.0, 2.0], vec![0.0, 1.0], vec![3.0, 0.0], vec![1.0, 1.0]];
        let svd = thin_svd(&cols).unwrap();
        assert!(svd.sigma[2] < 1e-12 && svd.sigma[3] < 1e-12);
        let back = reconstruct(&svd, 2);
        for (c, col) in cols.iter().enumerate() {
            for (r, x) in col.iter().enumerate() {
                assert!((back[c][r] - x).abs() < 1e-12);
            }
        }
    }
}
