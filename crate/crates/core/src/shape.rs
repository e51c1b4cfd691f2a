//! Shape parameters of simplices: `H_T`, `H_{T0}`, `H(h)`, the circumradius
//! and angle diagnostics.

use serde::Serialize;

use crate::geometry::{to_standard_position, Shear, Simplex, StandardPosition};
use crate::{Error, Result};

pub const DEFAULT_SLACK: f64 = 1e-9;

/// `lhs ≤ rhs + slack · max(1, |rhs|)`.
pub fn le_with_slack(lhs: f64, rhs: f64, slack: f64) -> bool {
    lhs <= rhs + slack * rhs.abs().max(1.0)
}

/// `H_T = (∏ α_i / |T|) h_T`.
pub fn param_h_t(sp: &StandardPosition) -> f64 {
    let s = sp.simplex();
    sp.alphas().iter().product::<f64>() / s.measure() * s.diameter()
}

/// `H_{T0} = h² / |T| · min |L_i|` for triangles and `h² / |T| · min_{i≠j} |L_i||L_j|`
/// for tetrahedra.
pub fn param_h_t0(s: &Simplex) -> f64 {
    let edges = s.edges();
    let h = s.diameter();
    let factor = match s.dim() {
        2 => edges[0].length,
        _ => edges[0].length * edges[1].length,
    };
    h * h / s.measure() * factor
}

/// `H(h) = max_T H_{T0}`.
pub fn mesh_h<'a>(cells: impl IntoIterator<Item = &'a Simplex>) -> Result<f64> {
    cells.into_iter().map(param_h_t0).reduce(f64::max).ok_or(Error::EmptyMesh)
}

/// `R₂ = |L₁||L₂||L₃| / (4|T|)`.
pub fn circumradius_2d(s: &Simplex) -> Result<f64> {
    if s.dim() != 2 {
        return Err(Error::InvalidParameter("circumradius is defined for triangles only".into()));
    }
    let prod: f64 = s.edges().iter().map(|e| e.length).product();
    Ok(prod / (4.0 * s.measure()))
}

/// Upper bounds on the angles of a tetrahedron: the largest base angle
/// `θ₃ ≤ θ̄` and `φ̄₁ ≤ φ_T ≤ φ̄₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngleBounds {
    pub theta_bar: f64,
    pub phi_min: f64,
    pub phi_max: f64,
}

impl AngleBounds {
    pub fn m1(&self) -> f64 {
        ((std::f64::consts::PI - self.theta_bar) / 2.0).sin().min(self.theta_bar.sin())
    }

    pub fn m2(&self) -> f64 {
        self.phi_min.sin().min(self.phi_max.sin())
    }

    /// `6 / (M₁ M₂)`.
    pub fn semiregularity_bound(&self) -> f64 {
        6.0 / (self.m1() * self.m2())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AngleDiagnostics {
    /// Largest angle of a triangle, located at `x₁`.
    pub theta_max: Option<f64>,
    pub theta_t: Option<f64>,
    /// Angle between the base `x₁x₂x₃` and the segment `x₁x₄`.
    pub phi_t: Option<f64>,
    pub bound: Option<f64>,
}

pub fn angle_diagnostics(sp: &StandardPosition, bounds: Option<AngleBounds>) -> AngleDiagnostics {
    match sp.shear() {
        Shear::Planar { s, t } => AngleDiagnostics { theta_max: Some(t.atan2(s)), theta_t: None, phi_t: None, bound: None },
        Shear::Spatial { s1, t1, t2, .. } => {
            let x4 = sp.simplex().vertex(3);
            let phi = (x4[2] / sp.alphas()[2]).clamp(-1.0, 1.0).asin();
            debug_assert!((phi.sin() - t2).abs() < 1e-12);
            AngleDiagnostics {
                theta_max: None,
                theta_t: Some(t1.atan2(s1)),
                phi_t: Some(phi),
                bound: bounds.map(|b| b.semiregularity_bound()),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShapeMetrics {
    pub h_t: f64,
    #[serde(rename = "H_T")]
    pub big_h_t: f64,
    #[serde(rename = "H_T0")]
    pub big_h_t0: f64,
    pub circumradius: Option<f64>,
    pub semiregularity: f64,
    pub theta_max: Option<f64>,
    pub theta_t: Option<f64>,
    pub phi_t: Option<f64>,
}

impl ShapeMetrics {
    pub fn compute(s: &Simplex) -> Result<Self> {
        Ok(Self::from_standard(s, &to_standard_position(s)?))
    }

    pub fn from_standard(s: &Simplex, sp: &StandardPosition) -> Self {
        let h_t = s.diameter();
        let big_h_t = param_h_t(sp);
        let angles = angle_diagnostics(sp, None);
        ShapeMetrics {
            h_t,
            big_h_t,
            big_h_t0: param_h_t0(s),
            circumradius: circumradius_2d(s).ok(),
            semiregularity: big_h_t / h_t,
            theta_max: angles.theta_max,
            theta_t: angles.theta_t,
            phi_t: angles.phi_t,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    #[serde(rename = "H_T")]
    pub big_h_t: f64,
    #[serde(rename = "H_T0")]
    pub big_h_t0: f64,
    pub ratio: f64,
    /// `½ H_{T0} ≤ H_T ≤ 2 H_{T0}` within the slack.
    pub pass: bool,
    /// `H_{T0} / R₂` for triangles.
    pub circumradius_ratio: Option<f64>,
    /// `2R₂ ≤ H_{T0} ≤ 8R₂` within the slack, for triangles.
    pub circumradius_pass: Option<bool>,
}

pub fn equivalence_check(s: &Simplex, slack: f64) -> Result<EquivalenceReport> {
    let sp = to_standard_position(s)?;
    let big_h_t = param_h_t(&sp);
    let big_h_t0 = param_h_t0(s);
    let pass = le_with_slack(0.5 * big_h_t0, big_h_t, slack) && le_with_slack(big_h_t, 2.0 * big_h_t0, slack);
    let r = circumradius_2d(s).ok();
    Ok(EquivalenceReport {
        big_h_t,
        big_h_t0,
        ratio: big_h_t / big_h_t0,
        pass,
        circumradius_ratio: r.map(|r| big_h_t0 / r),
        circumradius_pass: r.map(|r| le_with_slack(2.0 * r, big_h_t0, slack) && le_with_slack(big_h_t0, 8.0 * r, slack)),
    })
}
