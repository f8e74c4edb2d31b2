//! Free energy of every equilibrium family, the uniform/measure-valued
//! crossing `κ_c`, and global-minimizer classification.
//!
//! Energies use the convention
//!
//! ```text
//! E[μ] = 1/(m-1) ∫ ρ^m dS - κ/2 |c_μ|² + κ/2,
//! ```
//!
//! so that a single Dirac mass has energy 0.

use std::fmt;

use crate::equilibria::{CriticalSet, FullySupportedState, SphereModel};
use crate::error::{Error, Result};
use crate::model::{check_kappa, RegimeCase};
use crate::quadrature::eta1_closed_form;
use crate::roots::{find_root, RootOptions};

/// Energies closer than this (relative to `max(1, |E|)`) are a tie.
pub const TIE_TOL: f64 = 1e-12;
/// Absolute tolerance on `κ_c`.
pub const KAPPA_C_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Uniform,
    FullySupported,
    SingularUpper,
    SingularLower,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Uniform => "uniform",
            Branch::FullySupported => "fully_supported",
            Branch::SingularUpper => "singular_upper",
            Branch::SingularLower => "singular_lower",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `g1(η) g2(η)`, the energy gain of `ρ_κ` over the uniform state up to the
/// κ-independent constant `|S^d|^{1-m}/(m-1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G1G2Value {
    pub eta: f64,
    pub eta_excess: f64,
    pub value: f64,
}

/// Energy of each branch present at `κ` and the global minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub kappa: f64,
    pub e_uniform: f64,
    pub e_fully_supported: Option<f64>,
    pub e_singular_upper: Option<f64>,
    pub e_singular_lower: Option<f64>,
    pub minimizer: Branch,
    /// `κ` sits on a transition or two energies tie.
    pub degenerate: bool,
    /// The other branch involved in a degenerate transition.
    pub competing: Option<Branch>,
}

impl EnergyReport {
    /// Populated `(branch, energy)` pairs in branch order.
    pub fn energies(&self) -> Vec<(Branch, f64)> {
        [
            (Branch::Uniform, Some(self.e_uniform)),
            (Branch::FullySupported, self.e_fully_supported),
            (Branch::SingularUpper, self.e_singular_upper),
            (Branch::SingularLower, self.e_singular_lower),
        ]
        .into_iter()
        .filter_map(|(b, e)| e.map(|e| (b, e)))
        .collect()
    }
}

/// Second variation of the energy around the uniform state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCheck {
    /// `κ1 - κ`; positive iff the uniform state is locally stable.
    pub gap: f64,
    /// `F[ψ]` for `ψ(x) = <x, e>` from the moment `∫ <x,e>² dS`.
    pub trial_quotient: f64,
    /// `(d + 1)/|S^d|`, the infimum of `F`.
    pub infimum: f64,
}

impl SphereModel {
    pub fn energy_uniform(&self, kappa: f64) -> f64 {
        let m = self.m();
        self.geometry().area_sd.powf(1.0 - m) / (m - 1.0) + 0.5 * kappa
    }

    /// `g1(η) g2(η)` with `g1 = m I(η,q,1) + 2 I(η,mq,0)` and
    /// `g2 = 1 / (2 (1-m) (d w_d)^{m-1} I(η,q,0)^m)`.
    pub fn g1g2(&self, eta: f64) -> Result<G1G2Value> {
        if !(eta >= 1.0 && eta.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "eta must be finite and >= 1, got {eta}"
            )));
        }
        self.g1g2_excess(eta - 1.0)
    }

    pub fn g1g2_excess(&self, eta_excess: f64) -> Result<G1G2Value> {
        let (m, q) = (self.m(), self.exponent());
        let i0 = self.ln_integral(eta_excess, q, 0)?;
        let i1 = self.ln_integral(eta_excess, q, 1)?;
        let i0m = self.ln_integral(eta_excess, m * q, 0)?;
        let ln_g2 = -(2.0 * (1.0 - m)).ln()
            - (m - 1.0) * self.geometry().area_sdm1.ln()
            - m * i0.ln_abs;
        let value = m * i1.sign * (i1.ln_abs + ln_g2).exp() + 2.0 * (i0m.ln_abs + ln_g2).exp();
        Ok(G1G2Value {
            eta: 1.0 + eta_excess,
            eta_excess,
            value,
        })
    }

    /// `∫ ρ_κ^m dS` by quadrature of `(η - cos θ)^{m/(m-1)}`.
    pub fn entropy_fully_supported(&self, state: &FullySupportedState) -> Result<f64> {
        let (m, q) = (self.m(), self.exponent());
        let ln_c = (m / (1.0 - m)).ln() / (1.0 - m);
        let i = self.ln_integral(state.eta_excess, m * q, 0)?;
        Ok((self.geometry().area_sdm1.ln()
            + m * ln_c
            + m * q * (state.kappa * state.s).ln()
            + i.ln_abs)
            .exp())
    }

    /// Energy of `ρ_κ` computed directly and through `κ/2 - g1 g2`.
    pub fn energy_fully_supported_both(&self, state: &FullySupportedState) -> Result<(f64, f64)> {
        let m = self.m();
        let direct = self.entropy_fully_supported(state)? / (m - 1.0)
            - 0.5 * state.kappa * state.s * state.s
            + 0.5 * state.kappa;
        let identity = 0.5 * state.kappa - self.g1g2_excess(state.eta_excess)?.value;
        Ok((direct, identity))
    }

    /// Energy of `ρ_κ` from direct quadrature of the entropy.
    pub fn energy_fully_supported(&self, state: &FullySupportedState) -> Result<f64> {
        self.energy_fully_supported_both(state).map(|(direct, _)| direct)
    }

    /// Energy of `α δ_{x0} + (1-α) ρ̄` at interaction strength `κ`.
    pub fn energy_singular(&self, alpha: f64, kappa: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParam(format!(
                "alpha must lie in [0, 1), got {alpha}"
            )));
        }
        let m = self.m();
        let s_bar = self.s_bar()?;
        let com = alpha + (1.0 - alpha) * s_bar;
        Ok((1.0 - alpha).powf(m) * self.rho_bar_entropy_integral()? / (m - 1.0)
            - 0.5 * kappa * com * com
            + 0.5 * kappa)
    }

    /// Energy of `(1-t) δ_{x0} + t/|S^d|`.
    pub fn delta_mixture_energy(&self, t: f64, kappa: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::InvalidParam(format!("t must lie in [0, 1), got {t}")));
        }
        let m = self.m();
        let area = self.geometry().area_sd;
        let rest = 1.0 - t;
        Ok(t.powf(m) / ((m - 1.0) * area.powf(m - 1.0)) - 0.5 * kappa * rest * rest
            + 0.5 * kappa)
    }

    pub fn second_variation_gap(&self, kappa: f64) -> Result<StabilityCheck> {
        check_kappa(kappa)?;
        let d = self.d();
        // ∫ cos²θ sin^{d-1}θ dθ = -∫ (1 - cos θ) cos θ sin^{d-1}θ dθ.
        let second_moment = -self.geometry().area_sdm1 * eta1_closed_form(1.0, 1, d)?;
        Ok(StabilityCheck {
            gap: self.kappa1() - kappa,
            trial_quotient: 1.0 / second_moment,
            infimum: f64::from(d + 1) / self.geometry().area_sd,
        })
    }

    /// Energy of the upper measure-valued branch, if it exists at `κ`.
    fn energy_singular_upper(&self, kappa: f64) -> Result<Option<f64>> {
        match self.alpha_roots(kappa)?.upper() {
            Some(alpha) => self.energy_singular(alpha, kappa).map(Some),
            None => Ok(None),
        }
    }

    /// The κ in `(κ3, κ1)` where the uniform state and the upper
    /// measure-valued branch have equal energy.
    pub fn kappa_c(&self) -> Result<f64> {
        self.kappa_c.get_or_init(|| self.compute_kappa_c()).clone()
    }

    fn compute_kappa_c(&self) -> Result<f64> {
        let (kappa3, _) = self.kappa3_and_alpha_bar()?;
        let kappa1 = self.kappa1();
        let gap = |kappa: f64| -> Result<f64> {
            let upper = self.energy_singular_upper(kappa)?.ok_or(Error::BracketFailure {
                low: kappa3,
                high: kappa1,
                f_low: f64::NAN,
                f_high: f64::NAN,
            })?;
            Ok(self.energy_uniform(kappa) - upper)
        };
        let opts = RootOptions {
            f_tol: 0.0,
            x_tol: KAPPA_C_TOL / kappa1,
            max_iter: 400,
        };
        let (g_lo, g_hi) = (gap(kappa3)?, gap(kappa1)?);
        if !(g_lo < 0.0 && g_hi > 0.0) {
            return Err(Error::BracketFailure {
                low: kappa3,
                high: kappa1,
                f_low: g_lo,
                f_high: g_hi,
            });
        }
        find_root(gap, kappa3, kappa1, g_lo, g_hi, &opts)
    }

    /// All critical values, including `κ_c` in case iii.
    pub fn critical_set(&self) -> Result<CriticalSet> {
        let mut set = self.critical_values()?;
        if self.case() == RegimeCase::CaseIII {
            set.kappa_c = Some(self.kappa_c()?);
        }
        Ok(set)
    }

    /// Energies of every branch present at `κ` and the smallest of them.
    pub fn classify_minimizer(&self, kappa: f64) -> Result<EnergyReport> {
        check_kappa(kappa)?;
        let near = |critical: f64| (kappa / critical - 1.0).abs() <= TIE_TOL;
        let case = self.case();
        let kappa2 = self.kappa2().ok();

        let (low, high) = self.fully_supported_window();
        let at_kappa2 = kappa2.is_some_and(near);
        let e_fully_supported = if (kappa > low && kappa < high) || at_kappa2 {
            let state = self.fully_supported_state(kappa)?;
            Some(self.energy_fully_supported(&state)?)
        } else {
            None
        };
        let (mut e_singular_upper, mut e_singular_lower) = (None, None);
        if case.admits_singular() {
            let roots = self.alpha_roots(kappa)?;
            if let Some(a) = roots.upper() {
                e_singular_upper = Some(self.energy_singular(a, kappa)?);
            }
            if let Some(a) = roots.lower() {
                e_singular_lower = Some(self.energy_singular(a, kappa)?);
            }
            if at_kappa2 && case == RegimeCase::CaseII && e_singular_upper.is_none() {
                e_singular_upper = Some(self.energy_singular(0.0, kappa)?);
            }
        }

        let mut report = EnergyReport {
            kappa,
            e_uniform: self.energy_uniform(kappa),
            e_fully_supported,
            e_singular_upper,
            e_singular_lower,
            minimizer: Branch::Uniform,
            degenerate: false,
            competing: None,
        };
        let energies = report.energies();
        let (minimizer, e_min) = energies
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("uniform energy always present");
        report.minimizer = minimizer;
        let tie_scale = TIE_TOL * e_min.abs().max(1.0);
        if let Some((other, _)) = energies
            .iter()
            .find(|(b, e)| *b != minimizer && (e - e_min).abs() <= tie_scale)
        {
            report.degenerate = true;
            report.competing = Some(*other);
        }

        let transition = match case {
            RegimeCase::CaseI => near(self.kappa1()).then_some((Branch::Uniform, Branch::FullySupported)),
            RegimeCase::CaseII => {
                if near(self.kappa1()) {
                    Some((Branch::Uniform, Branch::FullySupported))
                } else if at_kappa2 {
                    Some((Branch::FullySupported, Branch::SingularUpper))
                } else {
                    None
                }
            }
            RegimeCase::CaseIII => {
                let kappa_c = self.kappa_c()?;
                near(kappa_c).then_some((Branch::Uniform, Branch::SingularUpper))
            }
        };
        if let Some((a, b)) = transition {
            report.degenerate = true;
            report.competing = Some(if report.minimizer == a { b } else { a });
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(d: u32, m: f64) -> SphereModel {
        SphereModel::new(d, m).unwrap()
    }

    #[test]
    fn uniform_energy_reference() {
        let md = model(2, 0.5);
        let e0 = md.energy_uniform(0.0);
        assert_relative_eq!(e0, -2.0 * (4.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-14);
        assert!((e0 + 7.08981).abs() < 1e-5);
        assert_eq!(md.energy_uniform(3.0) - e0, 1.5);
    }

    #[test]
    fn delta_mixture() {
        let md = model(2, 0.5);
        assert_eq!(md.delta_mixture_energy(0.0, 7.0).unwrap(), 0.0);
        for kappa in [0.1, 1.0, 10.0, 100.0] {
            assert!(md.delta_mixture_energy(1e-6, kappa).unwrap() < 0.0);
        }
        let h = 1e-12;
        assert!(md.delta_mixture_energy(h, 5.0).unwrap() / h < -1e6);
        // t = 1 is the uniform state itself
        let almost = md.delta_mixture_energy(1.0 - 1e-12, 5.0).unwrap();
        assert!((almost - md.energy_uniform(5.0)).abs() < 1e-9);
    }

    #[test]
    fn second_variation() {
        let md = model(2, 0.5);
        let chk = md.second_variation_gap(5.0).unwrap();
        assert!(chk.gap > 0.0);
        assert_relative_eq!(chk.trial_quotient, chk.infimum, max_relative = 1e-13);
        assert!(md.second_variation_gap(6.0).unwrap().gap < 0.0);
    }

    #[test]
    fn fully_supported_two_ways() {
        for (d, m, kappa) in [(2, 0.5, 8.0), (3, 0.25, 11.0), (5, 0.3, 18.5)] {
            let md = model(d, m);
            let st = md.fully_supported_state(kappa).unwrap();
            let (direct, identity) = md.energy_fully_supported_both(&st).unwrap();
            assert!((direct - identity).abs() < 1e-8, "({d},{m}): {direct} vs {identity}");
        }
    }

    #[test]
    fn branch_birth_matches_uniform() {
        let md = model(2, 0.5);
        let kappa = md.kappa1() * (1.0 + 1e-6);
        let st = md.fully_supported_state(kappa).unwrap();
        assert!(st.s < 1e-2);
        let e = md.energy_fully_supported(&st).unwrap();
        assert!((e - md.energy_uniform(kappa)).abs() < 1e-4);
    }

    #[test]
    fn kappa_c_in_range() {
        let md = model(5, 0.3);
        let kc = md.kappa_c().unwrap();
        assert!(kc > 15.8088 && kc < 19.9199, "{kc}");
        let set = md.critical_set().unwrap();
        assert_eq!(set.kappa_c, Some(kc));
        assert!(matches!(model(3, 0.25).kappa_c(), Err(Error::WrongRegime { .. })));
    }

    #[test]
    fn minimizer_examples() {
        assert_eq!(model(2, 0.5).classify_minimizer(4.0).unwrap().minimizer, Branch::Uniform);
        let md = model(3, 0.25);
        let mid = 0.5 * (md.kappa1() + md.kappa2().unwrap());
        assert_eq!(md.classify_minimizer(mid).unwrap().minimizer, Branch::FullySupported);
        let md = model(5, 0.3);
        assert_eq!(
            md.classify_minimizer(md.kappa1()).unwrap().minimizer,
            Branch::SingularUpper
        );
        let md = model(2, 0.5);
        let at = md.classify_minimizer(md.kappa1()).unwrap();
        assert_eq!(at.minimizer, Branch::Uniform);
        assert!(at.degenerate);
        assert_eq!(at.competing, Some(Branch::FullySupported));
    }
}
