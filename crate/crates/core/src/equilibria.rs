//! Equilibrium families of the energy on `S^d`: the uniform state, the fully
//! supported branch `ρ_κ` and the measure-valued branch `μ_α = α δ + (1-α) ρ̄`,
//! together with the critical interaction strengths that organise them.
//!
//! Everything is parametrised through the exponent `q = 1/(m-1) < 0` and the
//! polar-angle integrals `I(η, q, p, d)` of [`crate::quadrature`]. The fully
//! supported branch is the level set `H(η) = 1/κ` with
//!
//! ```text
//! H(η) = (1-m)/m · (d w_d)^{m-1} · I(η, q, 1) · I(η, q, 0)^{m-2},
//! ```
//!
//! and `s(η) = I(η, q, 1) / I(η, q, 0)` is the centre-of-mass norm along it.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::model::{check_kappa, classify_regime, sphere_geometry, Regime, RegimeCase, SphereGeometry};
use crate::quadrature::{
    ln_eta1_closed_form, ln_theta_integral, log_gamma, LogValue, ThetaIntegralSpec,
    DEFAULT_REL_TOL, MAX_REL_TOL,
};
use crate::roots::{find_root, RootOptions};

/// Default residual tolerance of every root solve.
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Default bracket-width tolerance of every root solve.
pub const BRACKET_TOL: f64 = 1e-13;
/// Largest root tolerance accepted.
pub const MAX_ROOT_TOL: f64 = 1e-6;
/// Upper end of the `α` search interval; `g(α)` diverges at 1.
pub const ALPHA_CAP: f64 = 1.0 - 1e-12;
/// Two `α` roots closer than this are reported as one double root.
pub const DOUBLE_ROOT_SEPARATION: f64 = 1e-6;

// Search interval for ln(η - 1).
const LN_EXCESS_LO: f64 = -644.7; // ln 1e-280
const LN_EXCESS_HI: f64 = 20.72; // ln 1e9

/// Numerical tolerances shared by all solvers of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    /// Relative tolerance of the angle quadratures.
    pub rel_tol: f64,
    /// Residual tolerance of root solves.
    pub root_tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            rel_tol: DEFAULT_REL_TOL,
            root_tol: DEFAULT_ROOT_TOL,
        }
    }
}

impl Settings {
    pub fn new(rel_tol: f64, root_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol <= MAX_REL_TOL) {
            return Err(Error::InvalidParam(format!(
                "rel_tol must lie in (0, {MAX_REL_TOL:e}], got {rel_tol}"
            )));
        }
        if !(root_tol > 0.0 && root_tol <= MAX_ROOT_TOL) {
            return Err(Error::InvalidParam(format!(
                "root_tol must lie in (0, {MAX_ROOT_TOL:e}], got {root_tol}"
            )));
        }
        Ok(Self { rel_tol, root_tol })
    }

    fn root_options(&self) -> RootOptions {
        RootOptions {
            f_tol: self.root_tol,
            x_tol: BRACKET_TOL,
            max_iter: 400,
        }
    }
}

/// The uniform density `1/|S^d|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformState {
    pub density_value: f64,
    /// Lagrange multiplier `m/(m-1) |S^d|^{1-m}`.
    pub lambda_uni: f64,
}

/// A point `ρ_κ` on the fully supported branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullySupportedState {
    pub kappa: f64,
    pub eta: f64,
    /// `η - 1`, kept separately because it can fall far below `f64::EPSILON`
    /// close to `κ2`.
    pub eta_excess: f64,
    /// Centre-of-mass norm.
    pub s: f64,
    /// Lagrange multiplier `-κ s η`.
    pub lambda: f64,
}

/// A measure-valued equilibrium `α δ_{x0} + (1-α) ρ̄`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularState {
    pub kappa: f64,
    pub alpha: f64,
    pub s_bar: f64,
}

impl SingularState {
    /// Centre-of-mass norm `α + (1-α) s̄`.
    pub fn com_norm(&self) -> f64 {
        self.alpha + (1.0 - self.alpha) * self.s_bar
    }

    /// Lagrange multiplier `-κ (1-α)(α + (1-α) s̄)`.
    pub fn lambda(&self) -> f64 {
        -self.kappa * (1.0 - self.alpha) * self.com_norm()
    }
}

/// Critical interaction strengths; absent entries do not exist in the regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalSet {
    pub kappa1: f64,
    pub kappa2: Option<f64>,
    pub kappa3: Option<f64>,
    pub alpha_bar: Option<f64>,
    pub kappa_c: Option<f64>,
}

/// Roots of `f_κ(α) = g(α)` in `(0, 1)`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaRoots {
    pub roots: Vec<f64>,
    /// Set when the two roots merged into the fold point; `roots` then holds
    /// that point once.
    pub double: bool,
}

impl AlphaRoots {
    /// The larger root `α_κ`, present whenever any root exists.
    pub fn upper(&self) -> Option<f64> {
        self.roots.last().copied()
    }

    /// The smaller root `α̃_κ` of a distinct pair.
    pub fn lower(&self) -> Option<f64> {
        (self.roots.len() == 2).then(|| self.roots[0])
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Both sides of the `α` balance and their derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSides {
    /// `κ (s̄ + α (1 - s̄))`.
    pub f: f64,
    /// `(1-α)^{m-1} κ2 s̄`.
    pub g: f64,
    pub df: f64,
    pub dg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct SingularConstants {
    s_bar: f64,
    kappa2: f64,
    /// `ln(|S^{d-1}| I(1, q, 0))`, the normaliser of `ρ̄`.
    ln_norm: f64,
}

/// Model on `S^d` with diffusion exponent `m`, holding the κ-independent
/// constants and the numerical settings.
#[derive(Debug, Clone)]
pub struct SphereModel {
    d: u32,
    m: f64,
    q: f64,
    regime: Regime,
    geometry: SphereGeometry,
    settings: Settings,
    kappa1: f64,
    singular: Option<SingularConstants>,
    pub(crate) kappa_c: OnceLock<Result<f64>>,
}

impl SphereModel {
    pub fn new(d: u32, m: f64) -> Result<Self> {
        Self::with_settings(d, m, Settings::default())
    }

    pub fn with_settings(d: u32, m: f64, settings: Settings) -> Result<Self> {
        let settings = Settings::new(settings.rel_tol, settings.root_tol)?;
        let regime = classify_regime(d, m)?;
        let geometry = sphere_geometry(d)?;
        let q = 1.0 / (m - 1.0);
        let kappa1 = m * f64::from(d + 1) * geometry.area_sd.powf(1.0 - m);
        let singular = if regime.case.admits_singular() {
            let df = f64::from(d);
            let s_bar = 1.0 / ((1.0 - m) * df - 1.0);
            let kappa2 = kappa2_closed_form(d, m, geometry.area_sd)?;
            let ln_norm = geometry.area_sdm1.ln() + ln_eta1_closed_form(q, 0, d)?.ln_abs;
            Some(SingularConstants {
                s_bar,
                kappa2,
                ln_norm,
            })
        } else {
            None
        };
        Ok(Self {
            d,
            m,
            q,
            regime,
            geometry,
            settings,
            kappa1,
            singular,
            kappa_c: OnceLock::new(),
        })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `1/(m-1)`.
    pub fn exponent(&self) -> f64 {
        self.q
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn case(&self) -> RegimeCase {
        self.regime.case
    }

    pub fn geometry(&self) -> SphereGeometry {
        self.geometry
    }

    pub fn settings(&self) -> Settings {
        self.settings
    }

    /// Stability threshold of the uniform state, `m (d+1) / |S^d|^{m-1}`.
    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    fn singular(&self) -> Result<&SingularConstants> {
        self.singular.as_ref().ok_or(Error::NotIntegrable {
            q: self.q,
            d: self.d,
        })
    }

    /// Centre-of-mass norm of `ρ̄`, `1/((1-m) d - 1)`.
    pub fn s_bar(&self) -> Result<f64> {
        Ok(self.singular()?.s_bar)
    }

    /// `κ2 = 1/H(1)` from its Gamma-function closed form.
    pub fn kappa2(&self) -> Result<f64> {
        Ok(self.singular()?.kappa2)
    }

    /// `κ2` as the reciprocal of `H(1)` evaluated by quadrature.
    pub fn kappa2_quadrature(&self) -> Result<f64> {
        self.singular()?;
        Ok(1.0 / self.h_excess(0.0)?)
    }

    /// `s̄` as the ratio of the two `η = 1` integrals evaluated by quadrature.
    pub fn s_bar_quadrature(&self) -> Result<f64> {
        self.singular()?;
        self.s_excess(0.0)
    }

    /// Fold point `(κ3, ᾱ)` of the measure-valued branch.
    pub fn kappa3_and_alpha_bar(&self) -> Result<(f64, f64)> {
        if self.regime.case != RegimeCase::CaseIII {
            return Err(Error::WrongRegime {
                expected: RegimeCase::CaseIII.as_str(),
                actual: self.regime.case.as_str(),
            });
        }
        let c = self.singular()?;
        let (m, s) = (self.m, c.s_bar);
        let alpha_bar = (1.0 - 2.0 * s + m * s) / ((1.0 - s) * (2.0 - m));
        let kappa3 = c.kappa2 * (1.0 - m) * s / (1.0 - s) * (1.0 - alpha_bar).powf(m - 2.0);
        Ok((kappa3, alpha_bar))
    }

    /// Critical values except `κ_c`, which needs the energy comparison.
    pub fn critical_values(&self) -> Result<CriticalSet> {
        let fold = match self.regime.case {
            RegimeCase::CaseIII => Some(self.kappa3_and_alpha_bar()?),
            _ => None,
        };
        Ok(CriticalSet {
            kappa1: self.kappa1,
            kappa2: self.singular.map(|c| c.kappa2),
            kappa3: fold.map(|f| f.0),
            alpha_bar: fold.map(|f| f.1),
            kappa_c: None,
        })
    }

    pub fn uniform_state(&self) -> UniformState {
        let area = self.geometry.area_sd;
        UniformState {
            density_value: 1.0 / area,
            lambda_uni: self.m / (self.m - 1.0) * area.powf(1.0 - self.m),
        }
    }

    pub(crate) fn ln_integral(&self, eta_excess: f64, q: f64, p: u8) -> Result<LogValue> {
        let spec = ThetaIntegralSpec::from_excess(eta_excess, q, p, self.d)?;
        ln_theta_integral(&spec, self.settings.rel_tol)
    }

    fn check_excess(eta_excess: f64) -> Result<()> {
        if eta_excess >= 0.0 && eta_excess.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!(
                "eta must be finite and >= 1, got 1 + {eta_excess}"
            )))
        }
    }

    fn excess_of(eta: f64) -> Result<f64> {
        if eta >= 1.0 && eta.is_finite() {
            Ok(eta - 1.0)
        } else {
            Err(Error::InvalidParam(format!(
                "eta must be finite and >= 1, got {eta}"
            )))
        }
    }

    /// `ln H` at `η = 1 + eta_excess`.
    pub fn ln_h_excess(&self, eta_excess: f64) -> Result<f64> {
        Self::check_excess(eta_excess)?;
        let i0 = self.ln_integral(eta_excess, self.q, 0)?;
        let i1 = self.ln_integral(eta_excess, self.q, 1)?;
        if i1.sign <= 0.0 {
            return Err(Error::ToleranceNotMet {
                estimate: 1.0,
                requested: self.settings.rel_tol,
                panels: 0,
            });
        }
        let m = self.m;
        Ok(((1.0 - m) / m).ln()
            + (m - 1.0) * self.geometry.area_sdm1.ln()
            + i1.ln_abs
            + (m - 2.0) * i0.ln_abs)
    }

    /// `H(η)`; `η = 1` is allowed only when the singular profile is integrable.
    pub fn h(&self, eta: f64) -> Result<f64> {
        self.h_excess(Self::excess_of(eta)?)
    }

    pub fn h_excess(&self, eta_excess: f64) -> Result<f64> {
        self.ln_h_excess(eta_excess).map(f64::exp)
    }

    /// Centre-of-mass norm `s(η)` of the branch density with parameter `η`.
    pub fn s_of_eta(&self, eta: f64) -> Result<f64> {
        self.s_excess(Self::excess_of(eta)?)
    }

    pub fn s_excess(&self, eta_excess: f64) -> Result<f64> {
        Self::check_excess(eta_excess)?;
        let i0 = self.ln_integral(eta_excess, self.q, 0)?;
        let i1 = self.ln_integral(eta_excess, self.q, 1)?;
        Ok(i1.sign * (i1.ln_abs - i0.ln_abs).exp())
    }

    /// Open interval of `κ` on which the fully supported branch exists.
    pub fn fully_supported_window(&self) -> (f64, f64) {
        match (self.regime.case, self.singular) {
            (RegimeCase::CaseII, Some(c)) => (self.kappa1, c.kappa2),
            (RegimeCase::CaseIII, Some(c)) => (c.kappa2, self.kappa1),
            _ => (self.kappa1, f64::INFINITY),
        }
    }

    fn is_kappa2(&self, kappa: f64) -> bool {
        self.singular
            .is_some_and(|c| (kappa / c.kappa2 - 1.0).abs() <= self.settings.root_tol)
    }

    /// `η_κ - 1` for `κ` in the branch window; exactly 0 at `κ = κ2`.
    ///
    /// Solved in `ζ = ln(η - 1)`, on which `ln(κ H)` is monotone and close to
    /// linear at both ends, so the solve stays well conditioned when `η_κ` is
    /// far below `1 + ε_machine` or very large.
    pub fn solve_eta_excess(&self, kappa: f64) -> Result<f64> {
        check_kappa(kappa)?;
        if self.is_kappa2(kappa) {
            return Ok(0.0);
        }
        let (low, high) = self.fully_supported_window();
        if !(kappa > low && kappa < high) {
            return Err(Error::OutOfWindow { kappa, low, high });
        }
        let ln_kappa = kappa.ln();
        let residual = |zeta: f64| -> Result<f64> { Ok(ln_kappa + self.ln_h_excess(zeta.exp())?) };
        let (z_lo, z_hi) = (LN_EXCESS_LO, LN_EXCESS_HI);
        let (g_lo, g_hi) = (residual(z_lo)?, residual(z_hi)?);
        let tol = self.settings.root_tol;
        if g_lo.signum() == g_hi.signum() {
            // The root lies beyond one end of the representable bracket.
            let (z, g) = if g_lo.abs() < g_hi.abs() { (z_lo, g_lo) } else { (z_hi, g_hi) };
            if g.abs() <= tol {
                return Ok(z.exp());
            }
            return Err(Error::BracketFailure {
                low: z_lo.exp(),
                high: z_hi.exp(),
                f_low: g_lo,
                f_high: g_hi,
            });
        }
        let zeta = find_root(residual, z_lo, z_hi, g_lo, g_hi, &self.settings.root_options())?;
        Ok(zeta.exp())
    }

    /// `η_κ`, the unique solution of `H(η) = 1/κ` on the branch window.
    pub fn solve_eta(&self, kappa: f64) -> Result<f64> {
        self.solve_eta_excess(kappa).map(|e| 1.0 + e)
    }

    pub fn fully_supported_state(&self, kappa: f64) -> Result<FullySupportedState> {
        let eta_excess = self.solve_eta_excess(kappa)?;
        let eta = 1.0 + eta_excess;
        let s = self.s_excess(eta_excess)?;
        Ok(FullySupportedState {
            kappa,
            eta,
            eta_excess,
            s,
            lambda: -kappa * s * eta,
        })
    }

    /// `ρ_κ(θ) = (m/(1-m))^{1/(1-m)} (κ s (η - cos θ))^{1/(m-1)}`.
    pub fn rho_kappa_density(&self, state: &FullySupportedState, theta: f64) -> f64 {
        let m = self.m;
        let half = (0.5 * theta).sin();
        let gap = state.eta_excess + 2.0 * half * half;
        let ln_c = (m / (1.0 - m)).ln() / (1.0 - m);
        (ln_c + self.q * (state.kappa * state.s * gap).ln()).exp()
    }

    /// `ρ̄(θ) = (1 - cos θ)^{1/(m-1)} / (|S^{d-1}| I(1, q, 0))`; `+∞` at `θ = 0`.
    pub fn rho_bar_density(&self, theta: f64) -> Result<f64> {
        let c = self.singular()?;
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(Error::InvalidParam(format!(
                "theta must lie in [0, pi], got {theta}"
            )));
        }
        if theta == 0.0 {
            return Ok(f64::INFINITY);
        }
        let half = (0.5 * theta).sin();
        let gap = 2.0 * half * half;
        Ok((self.q * gap.ln() - c.ln_norm).exp())
    }

    /// Both sides of `κ (s̄ + α (1-s̄)) = (1-α)^{m-1} κ2 s̄` at `α`.
    pub fn alpha_sides(&self, kappa: f64, alpha: f64) -> Result<AlphaSides> {
        let c = self.singular()?;
        let m = self.m;
        let rest = 1.0 - alpha;
        Ok(AlphaSides {
            f: kappa * (c.s_bar + alpha * (1.0 - c.s_bar)),
            g: rest.powf(m - 1.0) * c.kappa2 * c.s_bar,
            df: kappa * (1.0 - c.s_bar),
            dg: (1.0 - m) * rest.powf(m - 2.0) * c.kappa2 * c.s_bar,
        })
    }

    /// All Dirac fractions `α ∈ (0, 1)` with a measure-valued equilibrium at `κ`.
    pub fn alpha_roots(&self, kappa: f64) -> Result<AlphaRoots> {
        check_kappa(kappa)?;
        let c = *self.singular()?;
        // Relative imbalance (f - g)/κ; concave in α.
        let phi = |alpha: f64| -> Result<f64> {
            let sides = self.alpha_sides(kappa, alpha)?;
            Ok((sides.f - sides.g) / kappa)
        };
        let opts = self.settings.root_options();
        let none = AlphaRoots {
            roots: Vec::new(),
            double: false,
        };
        let at_or_above_k2 = kappa >= c.kappa2;
        match self.regime.case {
            RegimeCase::CaseI => unreachable!("singular constants exist only in cases ii and iii"),
            RegimeCase::CaseII => {
                if !(kappa > c.kappa2) || self.is_kappa2(kappa) {
                    return Ok(none);
                }
                let root = self.bracket_alpha(&phi, 0.0, ALPHA_CAP, &opts)?;
                Ok(AlphaRoots {
                    roots: vec![root],
                    double: false,
                })
            }
            RegimeCase::CaseIII => {
                let (kappa3, alpha_bar) = self.kappa3_and_alpha_bar()?;
                let peak = phi(alpha_bar)?;
                if peak <= 0.0 {
                    let near_fold = (kappa / kappa3 - 1.0).abs() <= self.settings.root_tol;
                    return Ok(if near_fold {
                        AlphaRoots {
                            roots: vec![alpha_bar],
                            double: true,
                        }
                    } else {
                        none
                    });
                }
                let upper = self.bracket_alpha(&phi, alpha_bar, ALPHA_CAP, &opts)?;
                if at_or_above_k2 || self.is_kappa2(kappa) {
                    return Ok(AlphaRoots {
                        roots: vec![upper],
                        double: false,
                    });
                }
                let lower = self.bracket_alpha(&phi, 0.0, alpha_bar, &opts)?;
                if upper - lower < DOUBLE_ROOT_SEPARATION {
                    return Ok(AlphaRoots {
                        roots: vec![0.5 * (lower + upper)],
                        double: true,
                    });
                }
                Ok(AlphaRoots {
                    roots: vec![lower, upper],
                    double: false,
                })
            }
        }
    }

    fn bracket_alpha<F>(&self, phi: &F, lo: f64, hi: f64, opts: &RootOptions) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        find_root(phi, lo, hi, phi(lo)?, phi(hi)?, opts)
    }

    /// The measure-valued equilibria at `κ`, upper branch last.
    pub fn singular_states(&self, kappa: f64) -> Result<Vec<SingularState>> {
        let s_bar = self.s_bar()?;
        Ok(self
            .alpha_roots(kappa)?
            .roots
            .into_iter()
            .map(|alpha| SingularState {
                kappa,
                alpha,
                s_bar,
            })
            .collect())
    }

    /// Mass `∫ ρ dS` and first moment `∫ ρ cos θ dS` of a zonal density given
    /// as a function of the polar angle, by direct quadrature in `θ`.
    ///
    /// Breakpoints halve towards `θ = 0` down to `core / 100` (but not below
    /// `1e-60`), where `core` is the angular scale on which `ρ` varies fastest
    /// near the pole.
    pub fn radial_moments<F: Fn(f64) -> f64>(&self, rho: F, core: f64) -> Result<(f64, f64)> {
        use std::f64::consts::PI;
        let floor = (0.01 * core).max(1e-60);
        let mut breaks = vec![PI];
        let mut t = PI;
        while t > floor {
            t *= 0.5;
            breaks.push(t);
        }
        breaks.push(0.0);
        breaks.reverse();
        let dm1 = f64::from(self.d) - 1.0;
        let weight = |theta: f64| theta.sin().powf(dm1);
        let area = self.geometry.area_sdm1;
        let tol = self.settings.rel_tol;
        let mass = crate::quadrature::integrate(|t| rho(t) * weight(t), &breaks, tol)?;
        let lever = crate::quadrature::integrate(
            |t| {
                let h = (0.5 * t).sin();
                2.0 * h * h * rho(t) * weight(t)
            },
            &breaks,
            tol,
        )?;
        Ok((area * mass, area * (mass - lever)))
    }

    /// `∫ ρ̄^m dS`, from the `η = 1` closed forms.
    pub fn rho_bar_entropy_integral(&self) -> Result<f64> {
        let c = self.singular()?;
        let qm = self.m * self.q;
        let ln_top = self.geometry.area_sdm1.ln() + ln_eta1_closed_form(qm, 0, self.d)?.ln_abs;
        Ok((ln_top - self.m * c.ln_norm).exp())
    }
}

/// Gamma-function closed form of `1/H(1)`:
///
/// ```text
/// κ2 = m (q+d) / (2^{1+(d-1)(m-1)} |S^d|^{m-1})
///      · (Γ(1/2) Γ(q+d) / (Γ(q+d/2) Γ((d+1)/2)))^{m-1}
/// ```
fn kappa2_closed_form(d: u32, m: f64, area_sd: f64) -> Result<f64> {
    let df = f64::from(d);
    let q = 1.0 / (m - 1.0);
    let a = q + 0.5 * df;
    if !(a > 0.0) {
        return Err(Error::NotIntegrable { q, d });
    }
    let ln_ratio = log_gamma(0.5)? + log_gamma(q + df)? - log_gamma(a)? - log_gamma(0.5 * (df + 1.0))?;
    let ln_k2 = m.ln() + (q + df).ln()
        - (1.0 + (df - 1.0) * (m - 1.0)) * std::f64::consts::LN_2
        - (m - 1.0) * area_sd.ln()
        + (m - 1.0) * ln_ratio;
    Ok(ln_k2.exp())
}
