//! Small self-contained numerical kernels: cubic splines, Gauss–Legendre
//! panels, power-weighted product integration and a symmetric tridiagonal
//! eigensolver.

pub mod quad;
pub mod spline;
pub mod tridiag;

/// Solves a dense linear system in place by Gaussian elimination with
/// partial pivoting.  Sized for the small Jacobians of the Newton solves
/// (k <= 8); returns `None` when the matrix is numerically singular.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[row][j] -= f * a[col][j];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for j in row + 1..n {
            s -= a[row][j] * x[j];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

/// Surface area of the unit sphere `S^{n-1}`, `2 pi^{n/2} / Gamma(n/2)`,
/// computed from the exact integer/half-integer Gamma values.
pub fn sphere_area(n: u32) -> f64 {
    let half = f64::from(n) / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma_half_integer(n)
}

/// `Gamma(n/2)` for integer `n >= 1` via the factorial recurrences.
fn gamma_half_integer(n: u32) -> f64 {
    if n % 2 == 0 {
        // Gamma(k) = (k-1)!
        let k = n / 2;
        (1..k).fold(1.0, |acc, i| acc * f64::from(i))
    } else {
        // Gamma(k + 1/2) = (2k-1)!! sqrt(pi) / 2^k
        let k = (n - 1) / 2;
        let mut acc = std::f64::consts::PI.sqrt();
        for i in 0..k {
            acc *= f64::from(2 * i + 1) / 2.0;
        }
        acc
    }
}
