//! Convergence studies, the optimality sweep and the self-test suites.

mod convergence;
mod fields;
mod selftest;

use serde::Serialize;

use crate::interp::{optimality_check, OptimalityReport};
use crate::poly::SeminormOptions;
use crate::{Error, Result};

pub use convergence::{
    run_convergence, BoundReport, BoundRow, ConvergenceConfig, ElementFamily, CSV_COLUMNS, DEFAULT_ORDER_TOL,
    DEFAULT_STABILITY_TOL, SAMPLING_TOL,
};
pub use fields::{scalar_field, vector_field, SCALAR_FIELDS, VECTOR_FIELDS};
pub use selftest::{run_selftest, SelftestReport, SuiteResult, FAULT_ENV, SUITES};

pub fn default_s_list() -> Vec<f64> {
    (2..=10).map(|j| 0.5f64.powi(j)).collect()
}

pub fn default_eps_list() -> Vec<f64> {
    vec![1.25, 1.5, 1.75]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalitySweep {
    pub experiment: String,
    pub rows: Vec<OptimalityReport>,
    pub pass: bool,
}

/// Column order of [`OptimalitySweep::to_csv`].
pub const OPTIMALITY_COLUMNS: [&str; 6] = ["s", "eps", "I_T", "H_T", "I_T/H_T", "pass"];

impl OptimalitySweep {
    pub fn to_csv(&self) -> String {
        let mut out = OPTIMALITY_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{:e},{},{:e},{:e},{:e},{}\n", r.s, r.eps, r.i_t, r.big_h_t, r.ratio, r.pass));
        }
        out
    }
}

/// `optimality_check` over the grid `s_list × eps_list`.
pub fn optimality_sweep(s_list: &[f64], eps_list: &[f64], opts: &SeminormOptions) -> Result<OptimalitySweep> {
    if s_list.is_empty() || eps_list.is_empty() {
        return Err(Error::InvalidParameter("empty s or eps list".into()));
    }
    let mut rows = Vec::with_capacity(s_list.len() * eps_list.len());
    for &s in s_list {
        for &eps in eps_list {
            rows.push(optimality_check(s, eps, opts)?);
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(OptimalitySweep { experiment: "optimality".into(), rows, pass })
}
