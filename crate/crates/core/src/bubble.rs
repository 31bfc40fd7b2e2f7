//! The explicit radial extremal family ("bubble") of the weighted critical
//! equation, its dilations, and the coordinate transforms built on it.
//!
//! Two independent algebraic routes to the same function are kept side by
//! side and cross-checked in tests:
//!
//! * the closed form `U(r) = K (1 + r^sigma)^{-m/(2h)}` with
//!   `h = 1+a-b`, `m = n - 2h = 2n/p`, `sigma = 2(n-2-2a)h/m` and
//!   `K = (n (n-2-2a)^2 / m)^{m/(4h)}`;
//! * the Emden–Fowler soliton `phi(t) = A sech^{2/(p-2)}(sigma t / 2)` with
//!   peak `A = (p gamma / 2)^{1/(p-2)}`, the unique even positive homoclinic
//!   of `-phi'' + gamma phi = phi^{p-1}`.
//!
//! Dilations are normalized so that `U_mu(x) = mu^{-lambda} U(x/mu)` with
//! `lambda = (n-2-2a)/2`; this is the exponent forced by dilation
//! covariance of the equation (`u -> tau^{lambda} u(tau x)` maps solutions
//! to solutions) and makes the Kelvin transform exchange `mu` with `1/mu`.
//! In Emden–Fowler coordinates a dilation is the pure translation
//! `phi_mu(t) = phi(t + ln mu)`.

use crate::error::Error;
use crate::params::ProblemParams;
use crate::profile::RadialProfile;
use crate::Result;

/// `K(p, a, b)`, the peak value of the bubble.
pub fn bubble_constant(params: &ProblemParams) -> f64 {
    let nf = f64::from(params.n);
    let big = nf - 2.0 - 2.0 * params.a; // n - 2 - 2a
    let h = 1.0 + params.a - params.b;
    let m = nf - 2.0 * h;
    (nf * big * big / m).powf(m / (4.0 * h))
}

/// A bubble with scaling factor `mu`.
#[derive(Debug, Clone)]
pub struct Bubble {
    pub params: ProblemParams,
    pub mu: f64,
    // cached derived quantities
    k_const: f64,
    sigma: f64,
    theta: f64,
    amp: f64,
    outer: f64, // m / (2h)
}

impl Bubble {
    pub fn new(params: ProblemParams, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::ConstraintViolation(format!("mu = {mu} must be positive")));
        }
        let k_const = bubble_constant(&params);
        let nf = f64::from(params.n);
        let h = 1.0 + params.a - params.b;
        let m = nf - 2.0 * h;
        let sigma = 2.0 * (nf - 2.0 - 2.0 * params.a) * h / m;
        let theta = 2.0 / (params.p - 2.0);
        let amp = (params.p * params.gamma / 2.0).powf(1.0 / (params.p - 2.0));
        Ok(Self { params, mu, k_const, sigma, theta, amp, outer: m / (2.0 * h) })
    }

    /// Peak value `U_mu(0) = mu^{-lambda} K`.
    pub fn value_at_origin(&self) -> f64 {
        self.mu.powf(-self.params.lambda) * self.k_const
    }

    /// `ln U(e^{lr})` for the unscaled bubble, stable for any `lr`.
    fn ln_value_unit(&self, ln_r: f64) -> f64 {
        // ln(1 + r^sigma) = softplus(sigma ln r)
        let x = self.sigma * ln_r;
        let softplus = if x > 30.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
        self.k_const.ln() - self.outer * softplus
    }

    /// `U_mu(r)`; errors for `r <= 0` (use [`Self::value_at_origin`] for the
    /// `r -> 0` limit).
    pub fn value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::DomainError(format!("bubble evaluated at r = {r} <= 0")));
        }
        let lam = self.params.lambda;
        Ok((-lam * self.mu.ln() + self.ln_value_unit(r.ln() - self.mu.ln())).exp())
    }

    /// Emden–Fowler profile `phi(t) = r^{lambda} U_mu(r)`, `r = e^{-t}`,
    /// evaluated through the soliton form (stable for all `t`).
    pub fn phi(&self, t: f64) -> f64 {
        let tau = t + self.mu.ln();
        let x = (0.5 * self.sigma * tau).abs();
        // ln cosh x, stable for large x
        let ln_cosh = x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2;
        self.amp * (-self.theta * ln_cosh).exp()
    }

    /// Same profile evaluated through the closed-form route
    /// `e^{-lambda t} U_mu(e^{-t})`; used for sampling and cross-checks.
    pub fn phi_closed_form(&self, t: f64) -> f64 {
        let lam = self.params.lambda;
        (-lam * t - lam * self.mu.ln() + self.ln_value_unit(-t - self.mu.ln())).exp()
    }

    /// `phi'(t)`.
    pub fn dphi(&self, t: f64) -> f64 {
        let tau = t + self.mu.ln();
        let s = 0.5 * self.sigma;
        -self.theta * s * self.phi(t) * (s * tau).tanh()
    }

    /// `phi''(t)`.
    pub fn d2phi(&self, t: f64) -> f64 {
        let tau = t + self.mu.ln();
        let s = 0.5 * self.sigma;
        let th = (s * tau).tanh();
        let sech2 = 1.0 - th * th;
        self.phi(t) * s * s * (self.theta * self.theta * th * th - self.theta * sech2)
    }

    /// Window `[-T + c, T + c]` centred on the profile peak, with `T` large
    /// enough that the tails drop below `1e-14` of the peak and the
    /// sub-leading correction (decay rate `sigma`) is resolved for fitting.
    pub fn default_window(&self) -> (f64, f64) {
        let lam = self.params.lambda;
        let t_half = (36.0 / lam).max(16.0 / self.sigma);
        let c = -self.mu.ln();
        (c - t_half, c + t_half)
    }

    /// Samples the closed form into a [`RadialProfile`].
    pub fn profile(&self, t_min: f64, t_max: f64, n_pts: usize) -> Result<RadialProfile> {
        if !(t_min < t_max) {
            return Err(Error::ConstraintViolation(format!(
                "t_min = {t_min} must be below t_max = {t_max}"
            )));
        }
        if n_pts < 16 {
            return Err(Error::ConstraintViolation(format!("n_pts = {n_pts} must be >= 16")));
        }
        let t: Vec<f64> = (0..n_pts)
            .map(|i| t_min + (t_max - t_min) * i as f64 / (n_pts - 1) as f64)
            .collect();
        let phi: Vec<f64> = t.iter().map(|&x| self.phi_closed_form(x)).collect();
        RadialProfile::new(t, phi, self.params.lambda)
    }

    /// Profile on the default window with automatic resolution.
    pub fn profile_auto(&self) -> RadialProfile {
        let (lo, hi) = self.default_window();
        let n = (((hi - lo) / 0.004).ceil() as usize).clamp(1 << 14, 1 << 19);
        self.profile(lo, hi, n).expect("auto window is valid")
    }

    /// Decay rate `sigma = lambda (p-2)` of the sub-leading correction.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// The unique even positive homoclinic of `-phi'' + gamma phi = phi^{p-1}`
/// in closed sech-power form.  Independent oracle for the sampled bubble
/// profile.
pub fn soliton_profile(params: &ProblemParams, t: f64) -> f64 {
    let theta = 2.0 / (params.p - 2.0);
    let amp = (params.p * params.gamma / 2.0).powf(1.0 / (params.p - 2.0));
    let s = params.gamma.sqrt() / theta; // = lambda (p-2) / 2
    let x = (s * t).abs();
    let ln_cosh = x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2;
    amp * (-theta * ln_cosh).exp()
}

/// Modified Kelvin transform acting on Emden–Fowler profiles: reflection
/// `t -> -t`.  In `r`-space this is `u(x) -> |x|^{2+2a-n} u(x/|x|^2)`.
pub fn kelvin_transform(profile: &RadialProfile) -> RadialProfile {
    profile.reflected()
}

/// Parameter map between the plain weighted system and its Hardy–Sobolev
/// form with Hardy coefficient `gamma_hs`.
///
/// Solving `abar = a + sqrt(lbar^2 + gamma_hs) - lbar` with
/// `lbar = (n-2-2abar)/2` gives the closed form
/// `lbar = sqrt(lambda^2 - gamma_hs)`, `delta = abar - a = lambda - lbar`,
/// and the function map `u -> |x|^{delta} u`.  Emden–Fowler samples are
/// invariant (`lbar + delta = lambda`), so only the attributed exponent
/// changes; the linear coefficient is preserved: `lbar^2 + gamma_hs =
/// lambda^2`.
#[derive(Debug, Clone)]
pub struct HardySobolevMap {
    pub original: ProblemParams,
    pub transformed: ProblemParams,
    pub gamma_hs: f64,
    /// Weight exponent of the function map `u -> |x|^{delta} u`.
    pub delta: f64,
    /// `(n - 2 - 2 abar)/2` of the transformed parameters.
    pub lambda_bar: f64,
}

/// Builds the Hardy–Sobolev map for `gamma_hs < lambda^2`.
pub fn hardy_sobolev_map(params: &ProblemParams, gamma_hs: f64) -> Result<HardySobolevMap> {
    let lam = params.lambda;
    if !(gamma_hs < lam * lam) {
        return Err(Error::DomainError(format!(
            "gamma_hs = {gamma_hs} must lie below lambda^2 = {}",
            lam * lam
        )));
    }
    let lambda_bar = (lam * lam - gamma_hs).sqrt();
    let delta = lam - lambda_bar;
    let transformed = ProblemParams::new(
        params.n,
        params.a + delta,
        params.b + delta,
        params.nu,
        params.alpha,
        params.beta,
    )?;
    Ok(HardySobolevMap { original: params.clone(), transformed, gamma_hs, delta, lambda_bar })
}

impl HardySobolevMap {
    /// Maps a profile of the original problem to the transformed one.
    pub fn forward(&self, profile: &RadialProfile) -> Result<RadialProfile> {
        if (profile.ef_lambda() - self.original.lambda).abs() > 1e-10 {
            return Err(Error::DomainError(
                "profile does not belong to the map's original parameters".into(),
            ));
        }
        Ok(profile.with_ef_lambda(self.lambda_bar))
    }

    /// Inverse map.
    pub fn inverse(&self, profile: &RadialProfile) -> Result<RadialProfile> {
        if (profile.ef_lambda() - self.lambda_bar).abs() > 1e-10 {
            return Err(Error::DomainError(
                "profile does not belong to the map's transformed parameters".into(),
            ));
        }
        Ok(profile.with_ef_lambda(self.original.lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: u32, a: f64, b: f64) -> ProblemParams {
        let p = 2.0 * f64::from(n) / (f64::from(n) - 2.0 + 2.0 * (b - a));
        ProblemParams::new(n, a, b, 1.0, p / 2.0, p / 2.0).unwrap()
    }

    #[test]
    fn bubble_constant_reference_values() {
        assert_relative_eq!(bubble_constant(&params(3, 0.0, 0.0)), 3f64.powf(0.25));
        assert_relative_eq!(bubble_constant(&params(4, 0.0, 0.0)), 8f64.sqrt());
        // h = 1/2, m = 2, exponent 1: K = 3 * 1 / 2
        assert_relative_eq!(bubble_constant(&params(3, 0.0, 0.5)), 1.5, max_relative = 1e-15);
    }

    #[test]
    fn bubble_constant_equals_soliton_form() {
        // K = (2 p gamma)^{1/(p-2)}
        for (n, a, b) in [(3, 0.0, 0.0), (3, 0.2, 0.6), (4, -0.3, 0.1), (5, 0.8, 1.3), (6, 0.0, 0.9)]
        {
            let p = params(n, a, b);
            let k = bubble_constant(&p);
            let dual = (2.0 * p.p * p.gamma).powf(1.0 / (p.p - 2.0));
            assert_relative_eq!(k, dual, max_relative = 1e-13);
        }
    }

    #[test]
    fn value_reference_points() {
        let b = Bubble::new(params(3, 0.0, 0.0), 1.0).unwrap();
        assert_relative_eq!(b.value(1e-12).unwrap(), 3f64.powf(0.25), max_relative = 1e-10);
        assert_relative_eq!(
            b.value(1.0).unwrap(),
            3f64.powf(0.25) / 2f64.sqrt(),
            max_relative = 1e-14
        );
        assert!(b.value(0.0).is_err());
        assert!(b.value(-1.0).is_err());
    }

    #[test]
    fn dilation_definition_and_covariance() {
        let p = params(4, 0.3, 0.7);
        let u1 = Bubble::new(p.clone(), 1.0).unwrap();
        let u2 = Bubble::new(p.clone(), 2.0).unwrap();
        for r in [0.05, 0.3, 1.0, 4.0, 20.0] {
            let expect = 2f64.powf(-p.lambda) * u1.value(r / 2.0).unwrap();
            assert_relative_eq!(u2.value(r).unwrap(), expect, max_relative = 1e-13);
        }
        // In t-coordinates the dilation is a pure translation by ln mu.
        for t in [-3.0, -0.5, 0.0, 1.2, 6.0] {
            assert_relative_eq!(u2.phi(t), u1.phi(t + 2f64.ln()), max_relative = 1e-13);
        }
    }

    #[test]
    fn soliton_and_closed_form_agree() {
        for (n, a, b) in [(3, 0.0, 0.0), (3, 0.1, 0.4), (4, -0.2, 0.3), (5, 1.0, 1.6)] {
            let p = params(n, a, b);
            let bubble = Bubble::new(p.clone(), 1.0).unwrap();
            let peak = soliton_profile(&p, 0.0);
            for i in 0..400 {
                let t = -20.0 + 40.0 * i as f64 / 399.0;
                let diff = (bubble.phi_closed_form(t) - soliton_profile(&p, t)).abs();
                assert!(diff <= 1e-12 * peak, "n={n} a={a} b={b} t={t} diff={diff:e}");
                let diff2 = (bubble.phi(t) - bubble.phi_closed_form(t)).abs();
                assert!(diff2 <= 1e-12 * peak);
            }
        }
    }

    #[test]
    fn soliton_peak_value_and_decay() {
        let p = params(3, 0.0, 0.0);
        assert_relative_eq!(
            soliton_profile(&p, 0.0),
            (p.p * p.gamma / 2.0).powf(1.0 / (p.p - 2.0)),
            max_relative = 1e-15
        );
        // log-slope at large |t| approaches -sqrt(gamma)
        let slope = (soliton_profile(&p, 31.0).ln() - soliton_profile(&p, 30.0).ln()) / 1.0;
        assert_relative_eq!(slope, -p.gamma.sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn soliton_residual_direct_substitution() {
        for (n, a, b) in [(3, 0.0, 0.0), (4, 0.5, 0.8), (5, -0.4, 0.0)] {
            let p = params(n, a, b);
            let bubble = Bubble::new(p.clone(), 1.0).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..2000 {
                let t = -25.0 + 50.0 * i as f64 / 1999.0;
                let phi = bubble.phi(t);
                let r = -bubble.d2phi(t) + p.gamma * phi - phi.powf(p.p - 1.0);
                worst = worst.max(r.abs());
            }
            assert!(worst < 1e-12, "residual {worst:e}");
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let p = params(4, 0.3, 0.9);
        let bubble = Bubble::new(p, 1.7).unwrap();
        let h = 1e-4;
        for t in [-4.0, -1.0, -0.1, 0.0, 0.6, 2.5] {
            let fd1 = (bubble.phi(t + h) - bubble.phi(t - h)) / (2.0 * h);
            assert_relative_eq!(bubble.dphi(t), fd1, max_relative = 1e-7, epsilon = 1e-10);
            let fd2 = (bubble.phi(t + h) - 2.0 * bubble.phi(t) + bubble.phi(t - h)) / (h * h);
            assert_relative_eq!(bubble.d2phi(t), fd2, max_relative = 1e-6, epsilon = 1e-8);
        }
    }

    #[test]
    fn profile_even_peaked_and_decreasing() {
        let p = params(3, 0.2, 0.5);
        let bubble = Bubble::new(p, 1.0).unwrap();
        let prof = bubble.profile(-30.0, 30.0, 4001).unwrap();
        let vals = prof.values();
        let n = vals.len();
        let peak = vals.iter().cloned().fold(0.0f64, f64::max);
        for i in 0..n {
            // evenness against the mirrored node
            assert!((vals[i] - vals[n - 1 - i]).abs() < 1e-12 * peak);
        }
        // peak at t = 0, strict decrease for t > 0
        let mid = n / 2;
        assert_relative_eq!(vals[mid], peak, max_relative = 1e-12);
        for i in mid..n - 1 {
            assert!(vals[i + 1] < vals[i]);
        }
        // fitted tail rate matches lambda
        assert_relative_eq!(prof.tail().rate_pos, bubble.params.lambda, max_relative = 1e-5);
    }

    #[test]
    fn profile_rejects_bad_windows() {
        let bubble = Bubble::new(params(3, 0.0, 0.0), 1.0).unwrap();
        assert!(bubble.profile(1.0, -1.0, 100).is_err());
        assert!(bubble.profile(-1.0, 1.0, 8).is_err());
        assert!(Bubble::new(params(3, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn kelvin_involution_and_mu_inversion() {
        let p = params(4, 0.3, 0.7);
        let b3 = Bubble::new(p.clone(), 3.0).unwrap();
        let grid: Vec<f64> = (0..3001).map(|i| -24.0 + 48.0 * i as f64 / 3000.0).collect();
        let prof = b3.profile(-24.0, 24.0, 3001).unwrap();

        let twice = kelvin_transform(&kelvin_transform(&prof));
        for (x, y) in prof.values().iter().zip(twice.values()) {
            assert!((x - y).abs() == 0.0);
        }

        let binv = Bubble::new(p, 1.0 / 3.0).unwrap();
        let reflected = kelvin_transform(&prof);
        for (&t, &v) in reflected.t_grid().iter().zip(reflected.values()) {
            let expect = binv.phi_closed_form(t);
            assert!((v - expect).abs() <= 1e-12 * binv.phi(0.0), "t={t}");
        }
        let _ = grid;
    }

    #[test]
    fn hardy_map_identity_and_round_trip() {
        let p = params(3, 0.1, 0.4);
        let id = hardy_sobolev_map(&p, 0.0).unwrap();
        assert_relative_eq!(id.delta, 0.0, epsilon = 1e-15);
        assert_relative_eq!(id.transformed.a, p.a);

        let map = hardy_sobolev_map(&p, 0.1).unwrap();
        // lbar^2 + gamma_hs = lambda^2: the Emden-Fowler linear coefficient
        // is preserved.
        assert_relative_eq!(
            map.lambda_bar * map.lambda_bar + map.gamma_hs,
            p.gamma,
            max_relative = 1e-14
        );
        let bubble = Bubble::new(p.clone(), 1.0).unwrap();
        let prof = bubble.profile(-20.0, 20.0, 2001).unwrap();
        let fwd = map.forward(&prof).unwrap();
        let back = map.inverse(&fwd).unwrap();
        for (x, y) in prof.values().iter().zip(back.values()) {
            assert!((x - y).abs() == 0.0);
        }
        assert_relative_eq!(back.ef_lambda(), prof.ef_lambda(), epsilon = 0.0);

        // r-space action: ubar(r) = r^{delta} u(r)
        for r in [0.2, 1.0, 3.0] {
            let u = prof.eval_r(r).unwrap();
            let ubar = fwd.eval_r(r).unwrap();
            assert_relative_eq!(ubar, r.powf(map.delta) * u, max_relative = 1e-13);
        }

        // gamma_hs >= lambda^2 is out of domain
        assert!(hardy_sobolev_map(&p, p.gamma).is_err());
        assert!(hardy_sobolev_map(&p, p.gamma + 1.0).is_err());
    }
}
