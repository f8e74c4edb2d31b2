//! Every equilibrium present at each κ of a grid: the data behind a
//! bifurcation diagram of centre-of-mass norm (or energy) against κ.

use std::io::Write;

use fdsphere::{Branch, Error, SphereModel};
use rayon::prelude::*;
use serde::Serialize;

use crate::format::{fmt_float, fmt_opt};

pub const CSV_HEADER: &str = "kappa,branch,alpha,eta,com_norm,energy";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSample {
    pub kappa: f64,
    #[serde(serialize_with = "branch_name")]
    pub branch: Branch,
    pub alpha: Option<f64>,
    pub eta: Option<f64>,
    pub com_norm: f64,
    pub energy: f64,
}

fn branch_name<S: serde::Serializer>(b: &Branch, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(b.as_str())
}

impl BranchSample {
    fn failed(kappa: f64, branch: Branch) -> Self {
        Self {
            kappa,
            branch,
            alpha: None,
            eta: Some(f64::NAN),
            com_norm: f64::NAN,
            energy: f64::NAN,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.energy.is_nan()
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            fmt_float(self.kappa),
            self.branch.as_str(),
            fmt_opt(self.alpha),
            fmt_opt(self.eta),
            fmt_float(self.com_norm),
            fmt_float(self.energy)
        )
    }
}

/// `steps` values from `kappa_min` to `kappa_max`, linear or geometric.
pub fn kappa_grid(
    kappa_min: f64,
    kappa_max: f64,
    steps: usize,
    log_grid: bool,
) -> fdsphere::Result<Vec<f64>> {
    if !(kappa_min > 0.0 && kappa_min.is_finite() && kappa_max.is_finite()) {
        return Err(Error::InvalidParam(format!(
            "kappa range must be positive and finite, got [{kappa_min}, {kappa_max}]"
        )));
    }
    if kappa_max < kappa_min {
        return Err(Error::InvalidParam(format!(
            "kappa-max {kappa_max} is below kappa-min {kappa_min}"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidParam("steps must be at least 1".into()));
    }
    if steps == 1 {
        return Ok(vec![kappa_min]);
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / last;
            if i == steps - 1 {
                kappa_max
            } else if log_grid {
                (kappa_min.ln() + t * (kappa_max / kappa_min).ln()).exp()
            } else {
                kappa_min + t * (kappa_max - kappa_min)
            }
        })
        .collect())
}

/// Rows for a single κ, in no particular order.
pub fn samples_at(model: &SphereModel, kappa: f64) -> Vec<BranchSample> {
    let mut rows = vec![BranchSample {
        kappa,
        branch: Branch::Uniform,
        alpha: None,
        eta: None,
        com_norm: 0.0,
        energy: model.energy_uniform(kappa),
    }];
    let (low, high) = model.fully_supported_window();
    if kappa > low && kappa < high {
        let row = model.fully_supported_state(kappa).and_then(|st| {
            Ok(BranchSample {
                kappa,
                branch: Branch::FullySupported,
                alpha: None,
                eta: Some(st.eta),
                com_norm: st.s,
                energy: model.energy_fully_supported(&st)?,
            })
        });
        rows.push(row.unwrap_or_else(|_| BranchSample::failed(kappa, Branch::FullySupported)));
    }
    if model.case().admits_singular() {
        let singular = model.singular_states(kappa).and_then(|states| {
            let upper_index = states.len().saturating_sub(1);
            states
                .iter()
                .enumerate()
                .map(|(i, st)| {
                    Ok(BranchSample {
                        kappa,
                        branch: if i == upper_index {
                            Branch::SingularUpper
                        } else {
                            Branch::SingularLower
                        },
                        alpha: Some(st.alpha),
                        eta: None,
                        com_norm: st.com_norm(),
                        energy: model.energy_singular(st.alpha, kappa)?,
                    })
                })
                .collect::<fdsphere::Result<Vec<_>>>()
        });
        match singular {
            Ok(mut r) => rows.append(&mut r),
            Err(_) => rows.push(BranchSample::failed(kappa, Branch::SingularUpper)),
        }
    }
    rows
}

/// All rows over the grid, sorted by κ and then branch name.
pub fn sweep(model: &SphereModel, grid: &[f64]) -> Vec<BranchSample> {
    let mut rows: Vec<BranchSample> = grid
        .par_iter()
        .map(|&kappa| samples_at(model, kappa))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        a.kappa
            .total_cmp(&b.kappa)
            .then_with(|| a.branch.as_str().cmp(b.branch.as_str()))
    });
    rows
}

pub fn write_csv<W: Write>(mut out: W, rows: &[BranchSample]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_row())?;
    }
    Ok(())
}
