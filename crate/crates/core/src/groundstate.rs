//! Ground-state characterization: the coupling function `f` and its
//! minimum on the simplex, sharp scalar and vector inequality constants,
//! and the ground-state energy.
//!
//! Convention for the sharp constant: `S` is the infimum of the Rayleigh
//! quotient
//!
//! ```text
//!   S = inf  int |x|^{-2a} |grad u|^2  /  ( int |x|^{-bp} |u|^p )^{2/p},
//! ```
//!
//! attained at the bubble, so `S = I^{(p-2)/p}` with
//! `I = omega_{n-1} int_R phi_U(t)^p dt` (by the Nehari identity the
//! weighted Dirichlet integral of the extremal equals `I`).  The sharp
//! vector constant is `S_bar = S * min f`, and every admissible pair
//! satisfies `quotient >= S_bar`.

use serde::Serialize;

use crate::bubble::Bubble;
use crate::error::Error;
use crate::numerics::quad::{gauss_legendre, integrate_with_rule};
use crate::numerics::sphere_area;
use crate::params::{CouplingSpec, ProblemParams};
use crate::sync::sync_residual_2;
use crate::Result;

/// Grid density of the 1-D simplex scan (two components).
const GRID_POINTS_2: usize = 10_000;
/// Nelder–Mead restarts for k in {3, 4}.
const NM_RESTARTS: usize = 50;

/// Coupling-regime cases for `min{alpha, beta}` and `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseLabel {
    /// `min{alpha, beta} < 2`: minimizers are interior.
    CaseI,
    /// `min >= 2` and `nu > (2^{p/2} - 2)/p`: minimizers are interior.
    CaseII,
    /// `min >= 2` and `nu <= (p-2)/(2p)`: minimizers sit on the boundary.
    CaseIII,
    /// `min >= 2` with `nu` in the gap between the two thresholds.
    Unclassified,
}

/// `f(x, y) = (x^2 + y^2) / (x^p + y^p + p nu x^alpha y^beta)^{2/p}`,
/// homogeneous of degree zero.
pub fn f_value(params: &ProblemParams, x: f64, y: f64) -> Result<f64> {
    if x < 0.0 || y < 0.0 {
        return Err(Error::DomainError(format!("f requires x, y >= 0, got ({x}, {y})")));
    }
    if x == 0.0 && y == 0.0 {
        return Err(Error::DomainError("f is undefined at the origin".into()));
    }
    let p = params.p;
    let num = x * x + y * y;
    let den = x.powf(p)
        + y.powf(p)
        + p * params.nu * x.powf(params.alpha) * y.powf(params.beta);
    Ok(num / den.powf(2.0 / p))
}

/// k-coupled generalization
/// `f(x) = sum x_i^2 / (sum_ij kappa_ij x_i^{alpha_ij} x_j^{beta_ij})^{2/p}`.
pub fn f_value_k(spec: &CouplingSpec, x: &[f64]) -> Result<f64> {
    if x.len() != spec.k {
        return Err(Error::DomainError(format!(
            "x has {} components, spec has {}",
            x.len(),
            spec.k
        )));
    }
    if x.iter().any(|v| *v < 0.0) {
        return Err(Error::DomainError("f requires nonnegative components".into()));
    }
    if x.iter().all(|v| *v == 0.0) {
        return Err(Error::DomainError("f is undefined at the origin".into()));
    }
    let num: f64 = x.iter().map(|v| v * v).sum();
    let mut den = 0.0;
    for i in 0..spec.k {
        for j in 0..spec.k {
            den += spec.kappa[i][j]
                * x[i].powf(spec.alpha_ij[i][j])
                * x[j].powf(spec.beta_ij[i][j]);
        }
    }
    Ok(num / den.powf(2.0 / spec.base.p))
}

/// Minimizer of `f` on the simplex plus the minimum value.
#[derive(Debug, Clone, Serialize)]
pub struct Minimized {
    /// Nonnegative, sums to 1.
    pub minimizer: Vec<f64>,
    pub f_min: f64,
}

/// Global minimum of `f(x, 1-x)` over `x in [0, 1]`: dense scan, golden
/// refinement and a Newton polish on the stationarity condition; the
/// boundary points are probed exactly.
pub fn minimize_f(params: &ProblemParams) -> Minimized {
    let g = |x: f64| f_value(params, x, 1.0 - x).unwrap();

    let mut best_x = 0.0;
    let mut best = g(0.0); // = 1 exactly
    for i in 0..=GRID_POINTS_2 {
        let x = i as f64 / GRID_POINTS_2 as f64;
        let v = g(x);
        if v < best {
            best = v;
            best_x = x;
        }
    }
    if best_x == 0.0 || best_x == 1.0 {
        let mut minimizer = vec![0.0, 0.0];
        minimizer[if best_x == 0.0 { 1 } else { 0 }] = 1.0;
        return Minimized { minimizer, f_min: best };
    }

    let step = 1.0 / GRID_POINTS_2 as f64;
    let mut x = golden_min(&g, (best_x - step).max(0.0), (best_x + step).min(1.0));

    // Newton polish on g'(x) = 0 with the analytic derivative
    for _ in 0..60 {
        let d = df_simplex(params, x);
        let h = 1e-6;
        let dd = (df_simplex(params, (x + h).min(1.0)) - df_simplex(params, (x - h).max(0.0)))
            / (2.0 * h);
        if !dd.is_finite() || dd == 0.0 {
            break;
        }
        let nx = (x - d / dd).clamp(1e-12, 1.0 - 1e-12);
        if (nx - x).abs() < 1e-16 {
            x = nx;
            break;
        }
        x = nx;
    }
    let fx = g(x);
    if fx <= best {
        Minimized { minimizer: vec![x, 1.0 - x], f_min: fx }
    } else {
        Minimized { minimizer: vec![best_x, 1.0 - best_x], f_min: best }
    }
}

/// d/dx f(x, 1-x), analytic.
fn df_simplex(params: &ProblemParams, x: f64) -> f64 {
    let (p, nu, al, be) = (params.p, params.nu, params.alpha, params.beta);
    let y = 1.0 - x;
    let num = x * x + y * y;
    let den = x.powf(p) + y.powf(p) + p * nu * x.powf(al) * y.powf(be);
    let dnum = 2.0 * x - 2.0 * y;
    let dden = p * x.powf(p - 1.0) - p * y.powf(p - 1.0)
        + p * nu * (al * x.powf(al - 1.0) * y.powf(be) - be * x.powf(al) * y.powf(be - 1.0));
    (dnum - 2.0 / p * num / den * dden) * den.powf(-2.0 / p)
}

fn golden_min(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let gr = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    for _ in 0..300 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = g(d);
        }
        if (b - a).abs() < 1e-14 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Minimum of the k-coupled `f` over the closed simplex: every face is
/// probed (single vertices exactly, pair faces by a dense 1-D scan, larger
/// faces by restarted Nelder–Mead in a softmax chart).
pub fn minimize_f_k(spec: &CouplingSpec, seed: u64) -> Result<Minimized> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let k = spec.k;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Minimized> = None;
    let consider = |x: Vec<f64>, v: f64, best: &mut Option<Minimized>| {
        if best.as_ref().map_or(true, |b| v < b.f_min) {
            *best = Some(Minimized { minimizer: x, f_min: v });
        }
    };

    for subset in 1u32..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|i| subset & (1 << i) != 0).collect();
        match members.len() {
            1 => {
                let mut x = vec![0.0; k];
                x[members[0]] = 1.0;
                let v = f_value_k(spec, &x)?;
                consider(x, v, &mut best);
            }
            2 => {
                let (i, j) = (members[0], members[1]);
                let g = |s: f64| {
                    let mut x = vec![0.0; k];
                    x[i] = s;
                    x[j] = 1.0 - s;
                    f_value_k(spec, &x).unwrap()
                };
                let m = 2000;
                let mut bs = 0.0;
                let mut bv = g(0.0);
                for q in 0..=m {
                    let s = q as f64 / m as f64;
                    let v = g(s);
                    if v < bv {
                        bv = v;
                        bs = s;
                    }
                }
                let s = if bs > 0.0 && bs < 1.0 {
                    golden_min(&g, (bs - 1.0 / m as f64).max(0.0), (bs + 1.0 / m as f64).min(1.0))
                } else {
                    bs
                };
                let mut x = vec![0.0; k];
                x[i] = s;
                x[j] = 1.0 - s;
                let v = f_value_k(spec, &x)?;
                consider(x, v, &mut best);
            }
            dim => {
                let restarts = NM_RESTARTS;
                for _ in 0..restarts {
                    let y0: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
                    let obj = |y: &[f64]| {
                        let x = softmax_on(&members, y, k);
                        f_value_k(spec, &x).unwrap()
                    };
                    let y = nelder_mead(&obj, &y0, 0.5, 2000, 1e-13);
                    let x = softmax_on(&members, &y, k);
                    let v = f_value_k(spec, &x)?;
                    consider(x, v, &mut best);
                }
            }
        }
    }
    Ok(best.expect("at least the vertices are probed"))
}

fn softmax_on(members: &[usize], y: &[f64], k: usize) -> Vec<f64> {
    let mx = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut x = vec![0.0; k];
    let mut sum = 0.0;
    for (slot, &i) in members.iter().enumerate() {
        let e = (y[slot] - mx).exp();
        x[i] = e;
        sum += e;
    }
    for v in x.iter_mut() {
        *v /= sum;
    }
    x
}

/// Plain Nelder–Mead for the small simplex charts.
fn nelder_mead(
    obj: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    scale: f64,
    max_iter: usize,
    tol: f64,
) -> Vec<f64> {
    let dim = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((start.to_vec(), obj(start)));
    for i in 0..dim {
        let mut pt = start.to_vec();
        pt[i] += scale;
        let v = obj(&pt);
        simplex.push((pt, v));
    }
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        if (simplex[dim].1 - simplex[0].1).abs() < tol {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|ent| ent.0[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let reflect: Vec<f64> =
            (0..dim).map(|j| centroid[j] + (centroid[j] - worst.0[j])).collect();
        let fr = obj(&reflect);
        if fr < simplex[0].1 {
            let expand: Vec<f64> =
                (0..dim).map(|j| centroid[j] + 2.0 * (centroid[j] - worst.0[j])).collect();
            let fe = obj(&expand);
            simplex[dim] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (reflect, fr);
        } else {
            let contract: Vec<f64> =
                (0..dim).map(|j| centroid[j] + 0.5 * (worst.0[j] - centroid[j])).collect();
            let fc = obj(&contract);
            if fc < worst.1 {
                simplex[dim] = (contract, fc);
            } else {
                let bestpt = simplex[0].0.clone();
                for ent in simplex.iter_mut().skip(1) {
                    for j in 0..dim {
                        ent.0[j] = bestpt[j] + 0.5 * (ent.0[j] - bestpt[j]);
                    }
                    ent.1 = obj(&ent.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex[0].0.clone()
}

/// Which of the coupling cases the parameters fall into.
pub fn regime_cases(params: &ProblemParams) -> CaseLabel {
    let m = params.alpha.min(params.beta);
    if m < 2.0 {
        return CaseLabel::CaseI;
    }
    let p = params.p;
    if params.nu > (2f64.powf(p / 2.0) - 2.0) / p {
        CaseLabel::CaseII
    } else if params.nu <= (p - 2.0) / (2.0 * p) {
        CaseLabel::CaseIII
    } else {
        CaseLabel::Unclassified
    }
}

/// `int phi_U^p dt` and `int (phi_U'^2 + gamma phi_U^2) dt` for the bubble,
/// by Gauss–Legendre panels with analytic exponential-tail completion.
/// By the Nehari identity the two agree for the extremal.
pub fn bubble_integrals(params: &ProblemParams, mu: f64) -> Result<(f64, f64)> {
    let bubble = Bubble::new(params.clone(), mu)?;
    let (lo, hi) = bubble.default_window();
    let lam = params.lambda;
    let panels =
        (((hi - lo) * lam.max(bubble.sigma()).max(1.0) * 4.0).ceil() as usize).clamp(64, 40_000);
    let (nodes, weights) = gauss_legendre(16);

    let fp = |t: f64| bubble.phi(t).powf(params.p);
    let nonlin = integrate_with_rule(&fp, lo, hi, panels, &nodes, &weights)
        + fp(hi) / (params.p * lam)
        + fp(lo) / (params.p * lam);

    let fd = |t: f64| {
        let d = bubble.dphi(t);
        let v = bubble.phi(t);
        d * d + params.gamma * v * v
    };
    let dir = integrate_with_rule(&fd, lo, hi, panels, &nodes, &weights)
        + params.gamma * bubble.phi(hi).powi(2) / lam
        + params.gamma * bubble.phi(lo).powi(2) / lam;
    Ok((nonlin, dir))
}

/// Sharp constant of the scalar weighted inequality,
/// `S = (omega_{n-1} int phi_U^p dt)^{(p-2)/p}`.
///
/// Refused in the symmetry-breaking regime (`a < 0`, `a < b < b_FS(a)`):
/// the extremal there is not radial and cannot be computed by this route.
pub fn sharp_ckn_constant(params: &ProblemParams) -> Result<f64> {
    params.require_radial_extremal()?;
    let (nonlin, _dir) = bubble_integrals(params, 1.0)?;
    let i_total = sphere_area(params.n) * nonlin;
    Ok(i_total.powf((params.p - 2.0) / params.p))
}

/// Sharp constant of the vector inequality, `S_bar = S * min f`.
pub fn vector_ckn_constant(params: &ProblemParams) -> Result<f64> {
    Ok(sharp_ckn_constant(params)? * minimize_f(params).f_min)
}

/// Rayleigh quotient of the vector inequality for the spanned pair
/// `(x1 U_{mu1}, x2 U_{mu2})`; always `>= S_bar`, with equality only for
/// equal dilations at the minimizer of `f`.
pub fn vector_rayleigh_quotient_spanned(
    params: &ProblemParams,
    x1: f64,
    x2: f64,
    mu1: f64,
    mu2: f64,
) -> Result<f64> {
    if !(x1 >= 0.0 && x2 >= 0.0 && x1 + x2 > 0.0) {
        return Err(Error::DomainError("coefficients must be nonnegative, not both 0".into()));
    }
    let b1 = Bubble::new(params.clone(), mu1)?;
    let b2 = Bubble::new(params.clone(), mu2)?;
    let (nonlin, _) = bubble_integrals(params, 1.0)?; // dilation-invariant
    let p = params.p;
    let lam = params.lambda;

    // coupling integral J = int phi_1^alpha phi_2^beta dt
    let (lo1, hi1) = b1.default_window();
    let (lo2, hi2) = b2.default_window();
    let (lo, hi) = (lo1.min(lo2), hi1.max(hi2));
    let panels =
        (((hi - lo) * lam.max(b1.sigma()).max(1.0) * 4.0).ceil() as usize).clamp(64, 40_000);
    let (nodes, weights) = gauss_legendre(16);
    let f = |t: f64| b1.phi(t).powf(params.alpha) * b2.phi(t).powf(params.beta);
    let coupling = integrate_with_rule(&f, lo, hi, panels, &nodes, &weights)
        + f(hi) / (p * lam)
        + f(lo) / (p * lam);

    let omega = sphere_area(params.n);
    let grads = omega * (x1 * x1 + x2 * x2) * nonlin; // Dirichlet = nonlin for the extremal
    let mass = omega
        * ((x1.powf(p) + x2.powf(p)) * nonlin
            + p * params.nu * x1.powf(params.alpha) * x2.powf(params.beta) * coupling);
    Ok(grads / mass.powf(2.0 / p))
}

/// Ground-state energy and the normalization factor `s`.
#[derive(Debug, Clone, Serialize)]
pub struct GroundEnergy {
    pub energy: f64,
    pub s_factor: f64,
}

/// `E = (1/2 - 1/p) (f_min S)^{p/(p-2)}` together with the `s` solving
/// `(s c_i)^{p-1} + ... = s c_i` by 1-D Newton.
pub fn ground_energy(params: &ProblemParams) -> Result<GroundEnergy> {
    let s_const = sharp_ckn_constant(params)?;
    let m = minimize_f(params);
    let p = params.p;
    let energy = (0.5 - 1.0 / p) * (m.f_min * s_const).powf(p / (p - 2.0));
    let (c1, c2) = (m.minimizer[0], m.minimizer[1]);
    let d1 = if c1 > 0.0 {
        c1.powf(p - 2.0) + params.nu * params.alpha * c1.powf(params.alpha - 2.0) * c2.powf(params.beta)
    } else {
        c2.powf(p - 2.0) + params.nu * params.beta * c1.powf(params.alpha) * c2.powf(params.beta - 2.0)
    };
    // Newton on h(s) = s^{p-2} d1 - 1
    let mut s = d1.powf(-1.0 / (p - 2.0));
    for _ in 0..50 {
        let h = s.powf(p - 2.0) * d1 - 1.0;
        let dh = (p - 2.0) * s.powf(p - 3.0) * d1;
        let ns = s - h / dh;
        if (ns - s).abs() < 1e-16 * s {
            s = ns;
            break;
        }
        s = ns;
    }
    Ok(GroundEnergy { energy, s_factor: s })
}

/// Full ground-state summary for one parameter set.
#[derive(Debug, Clone, Serialize)]
pub struct GroundStateReport {
    pub minimizer: Vec<f64>,
    pub f_min: f64,
    pub case_label: CaseLabel,
    pub s: f64,
    pub s_bar: f64,
    pub energy: f64,
    pub s_factor: f64,
}

pub fn ground_state_report(params: &ProblemParams) -> Result<GroundStateReport> {
    let s = sharp_ckn_constant(params)?;
    let m = minimize_f(params);
    let e = ground_energy(params)?;
    Ok(GroundStateReport {
        minimizer: m.minimizer,
        f_min: m.f_min,
        case_label: regime_cases(params),
        s,
        s_bar: s * m.f_min,
        energy: e.energy,
        s_factor: e.s_factor,
    })
}
