//! Sampled radial profiles in Emden–Fowler coordinates.
//!
//! A profile stores samples of `phi(t) = r^{lambda} u(r)` with `t = -ln r`
//! and `lambda = (n-2-2a)/2`.  Between nodes evaluation is cubic; outside
//! the grid the declared exponential tail models apply:
//!
//! ```text
//!   t -> +inf (r -> 0):    phi ~ coef_pos e^{-rate_pos t}   (coef_pos -> u(0))
//!   t -> -inf (r -> inf):  phi ~ coef_neg e^{+rate_neg t}   (coef_neg -> u_inf)
//! ```
//!
//! For actual solutions both fitted rates equal `lambda`, which encodes the
//! finite positive limits `u(0)` and `lim r^{n-2-2a} u(r)`.

use serde::Serialize;

use crate::error::Error;
use crate::numerics::spline::CubicSpline;
use crate::Result;

/// Fraction of the grid used for each tail fit.
const TAIL_FIT_FRACTION: f64 = 0.10;
/// Values below this (relative to the peak) are excluded from tail fits.
const TAIL_FLOOR_REL: f64 = 1e-280;

/// Fitted exponential tail model of a profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailFit {
    /// Decay rate towards `t -> +inf` (the `r -> 0` end).
    pub rate_pos: f64,
    /// Prefactor: `phi ~ coef_pos e^{-rate_pos t}`.
    pub coef_pos: f64,
    /// Decay rate towards `t -> -inf` (the `r -> inf` end).
    pub rate_neg: f64,
    /// Prefactor: `phi ~ coef_neg e^{rate_neg t}`.
    pub coef_neg: f64,
    /// Max relative deviation of the samples from the fit over both windows.
    pub residual: f64,
}

/// A nonnegative radial profile sampled on a strictly increasing `t`-grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    t: Vec<f64>,
    phi: Vec<f64>,
    ef_lambda: f64,
    tail: TailFit,
    spline: CubicSpline,
}

impl RadialProfile {
    /// Validates the samples, fits the tails and builds the interpolant.
    pub fn new(t: Vec<f64>, phi: Vec<f64>, ef_lambda: f64) -> Result<Self> {
        if t.len() < 16 || t.len() != phi.len() {
            return Err(Error::ConstraintViolation(format!(
                "profile needs >= 16 matched samples, got {} / {}",
                t.len(),
                phi.len()
            )));
        }
        if !t.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::ConstraintViolation(
                "profile t-grid must be strictly increasing".into(),
            ));
        }
        if phi.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::ConstraintViolation(
                "profile values must be finite and nonnegative".into(),
            ));
        }
        let tail = fit_tails(&t, &phi);
        let spline = CubicSpline::new(t.clone(), phi.clone());
        Ok(Self { t, phi, ef_lambda, tail, spline })
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// The Emden–Fowler exponent `lambda` this profile was built with.
    pub fn ef_lambda(&self) -> f64 {
        self.ef_lambda
    }

    pub fn tail(&self) -> &TailFit {
        &self.tail
    }

    pub fn t_min(&self) -> f64 {
        self.t[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.t.last().unwrap()
    }

    /// Evaluates `phi(t)`: cubic inside the grid, tail model outside.
    pub fn eval(&self, t: f64) -> f64 {
        if t > self.t_max() {
            self.tail.coef_pos * (-self.tail.rate_pos * t).exp()
        } else if t < self.t_min() {
            self.tail.coef_neg * (self.tail.rate_neg * t).exp()
        } else {
            self.spline.eval(t)
        }
    }

    /// The represented radial function `u(r) = e^{lambda t} phi(t)`,
    /// `t = -ln r`.
    pub fn eval_r(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::DomainError(format!("r = {r} must be positive")));
        }
        let t = -r.ln();
        Ok((self.ef_lambda * t).exp() * self.eval(t))
    }

    /// Reflection `t -> -t` (the modified Kelvin transform acting on
    /// Emden–Fowler profiles).
    pub fn reflected(&self) -> Self {
        let t: Vec<f64> = self.t.iter().rev().map(|&v| -v).collect();
        let phi: Vec<f64> = self.phi.iter().rev().copied().collect();
        Self::new(t, phi, self.ef_lambda).expect("reflection preserves validity")
    }

    /// Same samples re-attributed to a different Emden–Fowler exponent
    /// (used by the Hardy–Sobolev parameter map, which leaves `phi`
    /// untouched but changes the `r`-space representation).
    pub fn with_ef_lambda(&self, ef_lambda: f64) -> Self {
        let mut out = self.clone();
        out.ef_lambda = ef_lambda;
        out
    }

    /// Resamples onto a new strictly increasing grid via the interpolant.
    pub fn resample(&self, t: &[f64]) -> Result<Self> {
        let phi: Vec<f64> = t.iter().map(|&v| self.eval(v).max(0.0)).collect();
        Self::new(t.to_vec(), phi, self.ef_lambda)
    }

    /// CSV serialization: header row plus `(t, value)` records.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.t.len() * 48 + 16);
        out.push_str("t,value\r\n");
        for (t, v) in self.t.iter().zip(&self.phi) {
            out.push_str(&format!("{t},{v}\r\n"));
        }
        out
    }

    /// JSON header carried next to the CSV samples.
    pub fn header_json(&self, params: Option<&crate::params::ProblemParams>) -> serde_json::Value {
        serde_json::json!({
            "schema_version": 1,
            "lambda": self.ef_lambda,
            "tail_fit": self.tail,
            "params": params,
        })
    }
}

/// Least-squares line through `(t, ln phi)` over a window; returns
/// `(slope, intercept, max relative deviation)`.
fn log_line_fit(t: &[f64], phi: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in t.iter().zip(phi) {
        let ly = y.ln();
        st += x;
        sy += ly;
        stt += x * x;
        sty += x * ly;
    }
    let denom = n * stt - st * st;
    let slope = (n * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / n;
    let mut worst: f64 = 0.0;
    for (&x, &y) in t.iter().zip(phi) {
        let fit = (slope * x + intercept).exp();
        worst = worst.max(((y - fit) / fit).abs());
    }
    (slope, intercept, worst)
}

fn fit_tails(t: &[f64], phi: &[f64]) -> TailFit {
    let n = t.len();
    let peak = phi.iter().cloned().fold(0.0f64, f64::max);
    let floor = peak * TAIL_FLOOR_REL;
    let m = ((n as f64 * TAIL_FIT_FRACTION) as usize).clamp(4, n / 3);

    let take_window = |idx: Box<dyn Iterator<Item = usize>>| -> (Vec<f64>, Vec<f64>) {
        let mut ts = Vec::new();
        let mut ys = Vec::new();
        for i in idx {
            if phi[i] > floor && phi[i] > 0.0 {
                ts.push(t[i]);
                ys.push(phi[i]);
            }
            if ts.len() == m {
                break;
            }
        }
        (ts, ys)
    };

    // +inf end: walk inward from the last sample.
    let (tp, yp) = take_window(Box::new((0..n).rev()));
    // -inf end: walk inward from the first sample.
    let (tm, ym) = take_window(Box::new(0..n));

    let (mut rate_pos, mut coef_pos, mut res_pos) = (f64::NAN, f64::NAN, f64::INFINITY);
    if tp.len() >= 4 {
        let (slope, intercept, res) = log_line_fit(&tp, &yp);
        rate_pos = -slope;
        coef_pos = intercept.exp();
        res_pos = res;
    }
    let (mut rate_neg, mut coef_neg, mut res_neg) = (f64::NAN, f64::NAN, f64::INFINITY);
    if tm.len() >= 4 {
        let (slope, intercept, res) = log_line_fit(&tm, &ym);
        rate_neg = slope;
        coef_neg = intercept.exp();
        res_neg = res;
    }
    TailFit { rate_pos, coef_pos, rate_neg, coef_neg, residual: res_pos.max(res_neg) }
}
