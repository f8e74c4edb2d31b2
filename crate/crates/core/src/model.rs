//! Parameter validation, sphere geometry and the three diffusion-exponent regimes.
//!
//! The free energy is parametrised by the sphere dimension `d`, the fast-diffusion
//! exponent `0 < m < 1` and the interaction strength `kappa > 0`. Two thresholds in
//! `m` organise everything downstream:
//!
//! * `1 - 2/d`: below it the singular profile `(1 - cos θ)^{1/(m-1)}` is integrable
//!   and measure-valued equilibria exist;
//! * `1 - 2/(d-1)`: where the monotonicity of `H(η)` flips.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::quadrature::log_gamma;

/// Half-width of the band around each regime threshold that is refused.
pub const THRESHOLD_EXCLUSION: f64 = 1e-9;

/// Validated `(d, m, kappa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub d: u32,
    pub m: f64,
    pub kappa: f64,
}

impl ModelParams {
    pub fn new(d: u32, m: f64, kappa: f64) -> Result<Self> {
        classify_regime(d, m)?;
        check_kappa(kappa)?;
        Ok(Self { d, m, kappa })
    }
}

pub(crate) fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "kappa must be finite and positive, got {kappa}"
        )))
    }
}

/// Which of the three `m`-ranges applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegimeCase {
    /// `1 - 2/d < m < 1`: only the fully supported branch bifurcates.
    CaseI,
    /// `1 - 2/(d-1) < m < 1 - 2/d`: density branch hands off to the measure branch at kappa2 > kappa1.
    CaseII,
    /// `0 < m < 1 - 2/(d-1)`: fold at kappa3 < kappa2 < kappa1.
    CaseIII,
}

impl RegimeCase {
    pub fn as_str(self) -> &'static str {
        match self {
            RegimeCase::CaseI => "case_i",
            RegimeCase::CaseII => "case_ii",
            RegimeCase::CaseIII => "case_iii",
        }
    }

    /// Whether the singular profile is integrable, i.e. `m < 1 - 2/d`.
    pub fn admits_singular(self) -> bool {
        !matches!(self, RegimeCase::CaseI)
    }
}

impl fmt::Display for RegimeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub case: RegimeCase,
    /// `1 - 2/(d-1)`; `None` for `d = 1`.
    pub threshold_low: Option<f64>,
    /// `1 - 2/d`.
    pub threshold_high: f64,
}

/// `1 - 2/d` and `1 - 2/(d-1)` (the latter undefined for `d = 1`).
pub fn thresholds(d: u32) -> (Option<f64>, f64) {
    let high = 1.0 - 2.0 / f64::from(d);
    let low = (d > 1).then(|| 1.0 - 2.0 / f64::from(d - 1));
    (low, high)
}

pub fn classify_regime(d: u32, m: f64) -> Result<Regime> {
    if d < 1 {
        return Err(Error::InvalidParam(format!("dimension must be >= 1, got {d}")));
    }
    if !(m > 0.0 && m < 1.0) {
        return Err(Error::InvalidParam(format!(
            "diffusion exponent must lie in (0, 1), got {m}"
        )));
    }
    let (low, high) = thresholds(d);
    for threshold in low.into_iter().chain(std::iter::once(high)) {
        if (m - threshold).abs() < THRESHOLD_EXCLUSION {
            return Err(Error::ThresholdDegenerate {
                m,
                threshold,
                tol: THRESHOLD_EXCLUSION,
            });
        }
    }
    let case = if m > high {
        RegimeCase::CaseI
    } else if low.is_some_and(|low| m > low) {
        RegimeCase::CaseII
    } else {
        RegimeCase::CaseIII
    };
    Ok(Regime {
        case,
        threshold_low: low,
        threshold_high: high,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereGeometry {
    /// `|S^d|`.
    pub area_sd: f64,
    /// Volume `w_d` of the unit ball in `R^d`.
    pub ball_volume_wd: f64,
    /// `|S^{d-1}| = d w_d`.
    pub area_sdm1: f64,
}

pub fn sphere_geometry(d: u32) -> Result<SphereGeometry> {
    if d < 1 {
        return Err(Error::InvalidParam(format!("dimension must be >= 1, got {d}")));
    }
    let df = f64::from(d);
    let ln_pi = PI.ln();
    let area_sd = (2f64.ln() + 0.5 * (df + 1.0) * ln_pi - log_gamma(0.5 * (df + 1.0))?).exp();
    let ball_volume_wd = (0.5 * df * ln_pi - log_gamma(0.5 * df + 1.0)?).exp();
    Ok(SphereGeometry {
        area_sd,
        ball_volume_wd,
        area_sdm1: df * ball_volume_wd,
    })
}
