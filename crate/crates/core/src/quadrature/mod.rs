//! The one-dimensional polar-angle integrals behind every equilibrium condition,
//!
//! ```text
//! I(η, q, p, d) = ∫_0^π (η - cos θ)^q sin^{d-1}θ cos^p θ dθ,
//! ```
//!
//! and their Gamma-function closed forms at `η = 1`.
//!
//! Numerically the integral is folded onto `θ ∈ [0, π/2]` (pairing `θ` with
//! `π - θ`), rewritten in the half-angle variable `u = sin²(θ/2) = (1 - cos θ)/2`
//! and then in `t = -ln u`. In `t` the endpoint singularity of `(1 - cos θ)^q` at
//! `θ = 0`, and the near-singularity at `u ~ (η - 1)/2` when `η` is barely above 1,
//! both turn into smooth exponentially decaying tails that adaptive Gauss–Kronrod
//! integrates without special cases. The far tail is added analytically from its
//! leading exponential rate.

mod kronrod;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Default relative tolerance of every internal quadrature.
pub const DEFAULT_REL_TOL: f64 = 1e-10;
/// Loosest tolerance the quadrature accepts.
pub const MAX_REL_TOL: f64 = 1e-6;
const MAX_PANELS: usize = 4000;

/// Natural log of `Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(ln_gamma(x))
    } else {
        Err(Error::InvalidParam(format!("log_gamma needs x > 0, got {x}")))
    }
}

fn ln_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Parameters of one `I(η, q, p, d)`.
///
/// `η` is stored as the excess `η - 1` so that branches approaching the
/// singular limit can be resolved below the spacing of doubles near 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaIntegralSpec {
    eta_excess: f64,
    q: f64,
    p: u8,
    d: u32,
}

impl ThetaIntegralSpec {
    pub fn new(eta: f64, q: f64, p: u8, d: u32) -> Result<Self> {
        if !(eta >= 1.0) {
            return Err(Error::InvalidParam(format!("eta must be >= 1, got {eta}")));
        }
        Self::from_excess(eta - 1.0, q, p, d)
    }

    /// Build from `η - 1` directly.
    pub fn from_excess(eta_excess: f64, q: f64, p: u8, d: u32) -> Result<Self> {
        if !(eta_excess >= 0.0) || eta_excess.is_infinite() {
            return Err(Error::InvalidParam(format!(
                "eta - 1 must be finite and >= 0, got {eta_excess}"
            )));
        }
        if p > 1 {
            return Err(Error::InvalidParam(format!("cos power must be 0 or 1, got {p}")));
        }
        if d < 1 {
            return Err(Error::InvalidParam(format!("dimension must be >= 1, got {d}")));
        }
        if !q.is_finite() {
            return Err(Error::InvalidParam(format!("exponent must be finite, got {q}")));
        }
        if eta_excess == 0.0 && 2.0 * q + f64::from(d) <= 0.0 {
            return Err(Error::NotIntegrable { q, d });
        }
        Ok(Self {
            eta_excess,
            q,
            p,
            d,
        })
    }

    pub fn eta(&self) -> f64 {
        1.0 + self.eta_excess
    }

    pub fn eta_excess(&self) -> f64 {
        self.eta_excess
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> u8 {
        self.p
    }

    pub fn d(&self) -> u32 {
        self.d
    }
}

/// A real number kept as `sign * exp(ln_abs)`; integrals near `η = 1` can
/// leave the range of `f64` long before their ratios do.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogValue {
    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    fn zero() -> Self {
        Self {
            sign: 0.0,
            ln_abs: f64::NEG_INFINITY,
        }
    }
}

/// `ln(x + y)` for `x, y >= 0` without forming a sum that loses the smaller term.
fn ln_sum(x: f64, y: f64) -> f64 {
    let (big, small) = if x >= y { (x, y) } else { (y, x) };
    big.ln() + (small / big).ln_1p()
}

struct Integrand {
    eps: f64,
    q: f64,
    moment: bool,
    gamma: f64,
    ln_prefactor: f64,
}

impl Integrand {
    fn new(spec: &ThetaIntegralSpec) -> Self {
        Self {
            eps: spec.eta_excess,
            q: spec.q,
            moment: spec.p == 1,
            gamma: 0.5 * (f64::from(spec.d) - 2.0),
            ln_prefactor: f64::from(spec.d - 1) * std::f64::consts::LN_2,
        }
    }

    /// `ln` of the common weight `2^{d-1} u^{γ+1} (1-u)^γ [cos θ]`, with `u = e^{-t}`.
    fn ln_weight(&self, t: f64) -> f64 {
        let u = (-t).exp();
        let mut w = self.ln_prefactor - (self.gamma + 1.0) * t + self.gamma * (-u).ln_1p();
        if self.moment {
            w += (1.0 - 2.0 * u).ln();
        }
        w
    }

    /// `ln(η - cos θ)` and `ln(η + cos θ)` at `u = e^{-t}`.
    fn ln_near_far(&self, t: f64) -> (f64, f64) {
        let u = (-t).exp();
        let near = if self.eps == 0.0 {
            std::f64::consts::LN_2 - t
        } else {
            ln_sum(self.eps, 2.0 * u)
        };
        let far = (self.eps + 2.0).ln() + (-2.0 * u / (self.eps + 2.0)).ln_1p();
        (near, far)
    }

    /// Log-magnitude of the dominant term; used only to pick a scale.
    fn ln_peak(&self, t: f64) -> f64 {
        let (near, far) = self.ln_near_far(t);
        let w = self.ln_weight(t.max(std::f64::consts::LN_2 + 1e-3));
        w + (self.q * near).max(self.q * far)
    }

    /// Folded integrand in `t`, divided by `exp(scale)`.
    fn eval(&self, t: f64, scale: f64) -> f64 {
        let w = self.ln_weight(t);
        if w == f64::NEG_INFINITY {
            return 0.0;
        }
        let (near, far) = self.ln_near_far(t);
        let t_far = (w + self.q * far - scale).exp();
        if !self.moment {
            return (w + self.q * near - scale).exp() + t_far;
        }
        if self.q == 0.0 {
            return 0.0;
        }
        // (η - c)^q - (η + c)^q with c = cos θ = 1 - 2u, evaluated without cancellation.
        let u = (-t).exp();
        let c = 1.0 - 2.0 * u;
        let ratio = 2.0 * c / (self.eps + 2.0 - 2.0 * u);
        if ratio < 0.5 {
            t_far * (self.q * (-ratio).ln_1p()).exp_m1()
        } else {
            (w + self.q * near - scale).exp() - t_far
        }
    }
}

/// Integrate `f` over `[breaks[0], breaks[last]]`, refining the given
/// sub-intervals adaptively until the error estimate is below `rel_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, breaks: &[f64], rel_tol: f64) -> Result<f64> {
    if !(rel_tol > 0.0 && rel_tol <= MAX_REL_TOL) {
        return Err(Error::InvalidParam(format!(
            "quadrature rel_tol must lie in (0, {MAX_REL_TOL:e}], got {rel_tol}"
        )));
    }
    if breaks.len() < 2 || breaks.iter().any(|b| !b.is_finite()) {
        return Err(Error::InvalidParam("need at least two finite breakpoints".into()));
    }
    kronrod::integrate(f, breaks, rel_tol, MAX_PANELS).map(|(v, _)| v)
}

/// `I(η, q, p, d)` in log form; the sign is negative only for `p = 1, q > 0`.
pub fn ln_theta_integral(spec: &ThetaIntegralSpec, rel_tol: f64) -> Result<LogValue> {
    if !(rel_tol > 0.0 && rel_tol <= MAX_REL_TOL) {
        return Err(Error::InvalidParam(format!(
            "quadrature rel_tol must lie in (0, {MAX_REL_TOL:e}], got {rel_tol}"
        )));
    }
    if spec.p == 1 && spec.q == 0.0 {
        return Ok(LogValue::zero());
    }
    let integrand = Integrand::new(spec);
    let start = std::f64::consts::LN_2;
    let knee = if spec.eta_excess > 0.0 {
        (-spec.eta_excess.ln()).max(0.0)
    } else {
        0.0
    };
    // Exponential decay rate of the integrand beyond the knee.
    let tail_rate = if spec.eta_excess > 0.0 {
        integrand.gamma + 1.0
    } else {
        integrand.gamma + 1.0 + spec.q
    };
    // Relative size of the first neglected correction in the analytic tail is
    // e^{-L} (or e^{-|q| L} for the far term at η = 1).
    let span = if spec.eta_excess == 0.0 && spec.q != 0.0 {
        40.0 / spec.q.abs().min(1.0)
    } else {
        40.0
    };
    let end = start + knee + span;

    let mut breaks = vec![start, start + 0.25, start + 1.0, start + 3.0];
    if knee > 0.0 {
        breaks.extend([knee - 2.0, knee, knee + 2.0, knee + 6.0]);
    }
    breaks.push(end);
    breaks.retain(|&b| (start..=end).contains(&b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let scale = (0..=32)
        .map(|i| start + (end - start) * f64::from(i) / 32.0)
        .chain([knee.max(start), end])
        .map(|t| integrand.ln_peak(t))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !scale.is_finite() {
        return Err(Error::InvalidParam(format!(
            "integrand overflows for {spec:?}"
        )));
    }

    let (body, _err) = kronrod::integrate(
        |t| integrand.eval(t, scale),
        &breaks,
        rel_tol,
        MAX_PANELS,
    )?;
    let tail = integrand.eval(end, scale) / tail_rate;
    let total = body + tail;
    if total == 0.0 {
        return Ok(LogValue::zero());
    }
    Ok(LogValue {
        sign: total.signum(),
        ln_abs: total.abs().ln() + scale,
    })
}

/// `∫_0^π (η - cos θ)^q sin^{d-1}θ cos^p θ dθ` to relative accuracy `rel_tol`.
pub fn theta_integral(spec: &ThetaIntegralSpec, rel_tol: f64) -> Result<f64> {
    ln_theta_integral(spec, rel_tol).map(LogValue::value)
}

/// Closed form of `I(1, q, p, d)` in log form.
///
/// With `u = (1 - cos θ)/2`: `I(1, q, 0, d) = 2^{q+d-1} B(q + d/2, d/2)` and,
/// writing `cos θ = 1 - 2u`, `I(1, q, 1, d) = I(1, q, 0, d) (d/2 - a)/(d/2 + a)`
/// with `a = q + d/2`.
pub fn ln_eta1_closed_form(q: f64, p: u8, d: u32) -> Result<LogValue> {
    if p > 1 {
        return Err(Error::InvalidParam(format!("cos power must be 0 or 1, got {p}")));
    }
    if d < 1 {
        return Err(Error::InvalidParam(format!("dimension must be >= 1, got {d}")));
    }
    let half_d = 0.5 * f64::from(d);
    let a = q + half_d;
    if !(a > 0.0) {
        return Err(Error::NotIntegrable { q, d });
    }
    let ln_mass = (q + f64::from(d) - 1.0) * std::f64::consts::LN_2 + ln_beta(a, half_d)?;
    if p == 0 {
        return Ok(LogValue {
            sign: 1.0,
            ln_abs: ln_mass,
        });
    }
    let factor = (half_d - a) / (half_d + a);
    if factor == 0.0 {
        return Ok(LogValue::zero());
    }
    Ok(LogValue {
        sign: factor.signum(),
        ln_abs: ln_mass + factor.abs().ln(),
    })
}

/// Exact `I(1, q, p, d)`.
pub fn eta1_closed_form(q: f64, p: u8, d: u32) -> Result<f64> {
    ln_eta1_closed_form(q, p, d).map(LogValue::value)
}
