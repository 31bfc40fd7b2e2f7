//! Gauss–Legendre panel quadrature and product integration against the
//! power weights `s^w` that appear in the radial integral identity.

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 2);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by upward recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrates `f` over `[lo, hi]` with `panels` equal Gauss–Legendre panels.
pub fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    integrate_with_rule(&f, lo, hi, panels, &nodes, &weights)
}

/// Same as [`integrate`] with a precomputed rule, for hot loops.
pub fn integrate_with_rule(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    panels: usize,
    nodes: &[f64],
    weights: &[f64],
) -> f64 {
    assert!(hi > lo && panels > 0);
    let h = (hi - lo) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * h;
        let mid = a + 0.5 * h;
        let half = 0.5 * h;
        let mut panel = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            panel += w * f(mid + half * x);
        }
        acc += panel * half;
    }
    acc
}

/// Cumulative integrals `I_j = int_0^{x_j} s^w f(s) ds` on a grid starting
/// at `x_0 = 0`, treating `f` as piecewise linear and integrating the power
/// weight exactly on every panel.
///
/// The first panel uses the local model `f(s) = f(x_1) (s/x_1)^{rho}`,
/// which covers both the `rho = 0` case (inner integral: `f` is the
/// nonlinearity, finite at 0) and the vanishing-order case of the outer
/// integral where the weight alone is not integrable.  Requires
/// `w + rho + 1 > 0`.
pub fn power_weighted_cumulative(w: f64, rho: f64, x: &[f64], f: &[f64]) -> Vec<f64> {
    assert!(x.len() == f.len() && x.len() >= 2);
    assert!(x[0] == 0.0, "grid must start at 0");
    assert!(w + rho + 1.0 > 0.0, "non-integrable weight: w={w} rho={rho}");
    let mut out = vec![0.0; x.len()];
    // First panel: f ~ f(x_1) (s/x_1)^rho.
    out[1] = f[1] * x[1].powf(w + 1.0) / (w + rho + 1.0);
    for j in 1..x.len() - 1 {
        out[j + 1] = out[j] + panel_power_linear(w, x[j], x[j + 1], f[j], f[j + 1]);
    }
    out
}

/// Exact `int_{x0}^{x1} s^w L(s) ds` for the linear interpolant `L` through
/// `(x0, f0), (x1, f1)`; `x0 > 0`.
fn panel_power_linear(w: f64, x0: f64, x1: f64, f0: f64, f1: f64) -> f64 {
    debug_assert!(x0 > 0.0 && x1 > x0);
    let m0 = power_moment(w, x0, x1);
    let m1 = power_moment(w + 1.0, x0, x1);
    let dx = x1 - x0;
    // L(s) = f0 (x1 - s)/dx + f1 (s - x0)/dx
    (f0 * (x1 * m0 - m1) + f1 * (m1 - x0 * m0)) / dx
}

/// `int_{x0}^{x1} s^q ds` with the logarithmic special case.
fn power_moment(q: f64, x0: f64, x1: f64) -> f64 {
    let e = q + 1.0;
    if e.abs() < 1e-12 {
        (x1 / x0).ln()
    } else {
        (x1.powf(e) - x0.powf(e)) / e
    }
}
