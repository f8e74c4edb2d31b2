use std::io::Write;

use clap::ValueEnum;
use fdsphere::{Error, Result, SphereModel};
use serde::Serialize;

use crate::format::fmt_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileBranch {
    /// The density `ρ_κ` of the fully supported branch.
    #[value(name = "fully_supported")]
    FullySupported,
    /// The κ-independent regular part `ρ̄` of the measure-valued branch.
    #[value(name = "rho_bar")]
    RhoBar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub theta: f64,
    pub density: f64,
}

/// Density at `points` equally spaced polar angles in `[0, π]`.
pub fn profile(
    model: &SphereModel,
    branch: ProfileBranch,
    kappa: Option<f64>,
    points: usize,
) -> Result<Vec<ProfilePoint>> {
    if points < 2 {
        return Err(Error::InvalidParam(format!("points must be >= 2, got {points}")));
    }
    let thetas = (0..points).map(|i| {
        if i == points - 1 {
            std::f64::consts::PI
        } else {
            std::f64::consts::PI * i as f64 / (points - 1) as f64
        }
    });
    match branch {
        ProfileBranch::FullySupported => {
            let kappa = kappa.ok_or_else(|| {
                Error::InvalidParam("the fully_supported profile needs --kappa".into())
            })?;
            let state = model.fully_supported_state(kappa)?;
            Ok(thetas
                .map(|theta| ProfilePoint {
                    theta,
                    density: model.rho_kappa_density(&state, theta),
                })
                .collect())
        }
        ProfileBranch::RhoBar => thetas
            .map(|theta| {
                Ok(ProfilePoint {
                    theta,
                    density: model.rho_bar_density(theta)?,
                })
            })
            .collect(),
    }
}

pub fn write_csv<W: Write>(mut out: W, points: &[ProfilePoint]) -> std::io::Result<()> {
    writeln!(out, "theta,density")?;
    for p in points {
        writeln!(out, "{},{}", fmt_float(p.theta), fmt_float(p.density))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concentrates_at_large_kappa() {
        let md = SphereModel::new(2, 0.5).unwrap();
        let p = profile(&md, ProfileBranch::FullySupported, Some(20.0), 11).unwrap();
        assert!(p[0].density / p[10].density > 10.0);
        assert_eq!(p[10].theta, std::f64::consts::PI);
    }

    #[test]
    fn rho_bar_starts_at_infinity() {
        let md = SphereModel::new(3, 0.25).unwrap();
        let p = profile(&md, ProfileBranch::RhoBar, None, 5).unwrap();
        assert_eq!(p[0].density, f64::INFINITY);
        assert!(p[1..].iter().all(|q| q.density.is_finite()));
    }

    #[test]
    fn rejects_bad_requests() {
        let md = SphereModel::new(2, 0.5).unwrap();
        assert!(profile(&md, ProfileBranch::FullySupported, None, 5).is_err());
        assert!(profile(&md, ProfileBranch::FullySupported, Some(8.0), 1).is_err());
        assert!(matches!(
            profile(&md, ProfileBranch::FullySupported, Some(3.0), 5),
            Err(Error::OutOfWindow { .. })
        ));
        assert!(matches!(
            profile(&md, ProfileBranch::RhoBar, None, 5),
            Err(Error::NotIntegrable { .. })
        ));
    }
}
