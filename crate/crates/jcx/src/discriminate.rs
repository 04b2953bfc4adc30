//! Source discrimination `d(X,Y) = 1 − ln J / ln n`, optionally compared
//! with the kernel exponent of models fitted to each text.

use jcx_core::factorindex::{discriminant_from_count, joint_complexity};
use jcx_core::kernel::{solve_kernel, SchurKernel};
use jcx_core::textmodel::estimate_capped;
use serde::Serialize;

use crate::error::Result;
use crate::tokenize::{encode_with_shared_alphabet, intern};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelComparison {
    pub order: usize,
    pub regime: &'static str,
    /// Growth exponent of `C_{n,n}` for the fitted pair.
    pub kappa: f64,
    /// Limit of `d` implied by the exponent.
    pub one_minus_kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrimination {
    pub n: usize,
    pub m: usize,
    pub j: u64,
    pub d: f64,
    /// No common non-empty factor; `d` is 1 by convention.
    pub no_common: bool,
    /// `X = Y`: `J` grows like `n²/2`, far above any two-source law.
    pub identical: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub models: Option<ModelComparison>,
}

/// `fit` = `(order, smoothing, state_cap)` to also compare fitted models.
pub fn discriminate(x: &[String], y: &[String], fit: Option<(usize, f64, usize)>) -> Result<Discrimination> {
    let (_, enc) = intern(&[x, y]);
    let report = joint_complexity(&enc[0], &enc[1]);
    let dis = discriminant_from_count(report.j_excl, report.n.min(report.m))?;
    let models = match fit {
        None => None,
        Some((order, smoothing, cap)) => {
            let (alphabet, enc) = encode_with_shared_alphabet(&[x, y])?;
            let m1 = estimate_capped(&alphabet, &enc[0], order, smoothing, cap)?;
            let m2 = estimate_capped(&alphabet, &enc[1], order, smoothing, cap)?;
            let sol = solve_kernel(&SchurKernel::new(&m1, &m2)?)?;
            let kappa = sol.exponent();
            Some(ModelComparison { order, regime: sol.regime.as_str(), kappa, one_minus_kappa: 1.0 - kappa })
        }
    };
    Ok(Discrimination {
        n: report.n,
        m: report.m,
        j: report.j_excl,
        d: dis.d,
        no_common: dis.no_common,
        identical: x == y,
        models,
    })
}
