use fdsphere::{Result, SphereModel};
use serde::Serialize;

/// Critical values of one `(d, m)`; fields a regime lacks serialise as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalReport {
    pub d: u32,
    pub m: f64,
    pub regime: &'static str,
    pub kappa1: f64,
    pub kappa2: Option<f64>,
    pub kappa3: Option<f64>,
    pub alpha_bar: Option<f64>,
    pub kappa_c: Option<f64>,
}

pub fn critical_report(model: &SphereModel) -> Result<CriticalReport> {
    let set = model.critical_set()?;
    Ok(CriticalReport {
        d: model.d(),
        m: model.m(),
        regime: model.case().as_str(),
        kappa1: set.kappa1,
        kappa2: set.kappa2,
        kappa3: set.kappa3,
        alpha_bar: set.alpha_bar,
        kappa_c: set.kappa_c,
    })
}
