//! Clifford coordinates on the 3-sphere.
//!
//! The chart `(theta, phi, t) -> S^3` covers the sphere minus the two
//! orthogonal great circles `z1 = 0` and `z2 = 0`. The level set `t = 0` is
//! the Clifford torus, and `t` is the signed round-metric distance to it.
//!
//! The torus is usually written `|z1|^2 = |z2|^2 = 1/sqrt(2)` in the
//! literature this toolkit follows; that is inconsistent with
//! `|z1|^2 + |z2|^2 = 1`. The chart itself gives `|z1|^2 = |z2|^2 = 1/2`, and
//! the chart is what everything here is built on.

use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use serde::Serialize;

use crate::error::{Error, Result};

/// Points with `|t| >= pi/4 - CHART_MARGIN` are rejected.
pub const CHART_MARGIN: f64 = 1e-12;

/// Period of the chart in both `theta` and `phi`.
pub const PERIOD: f64 = SQRT_2 * PI;

/// Signed-distance guard shared by every chart-level operation.
pub fn check_t(t: f64) -> Result<()> {
    if t.is_finite() && t.abs() < FRAC_PI_4 - CHART_MARGIN {
        Ok(())
    } else {
        Err(Error::ChartDomain {
            t,
            margin: CHART_MARGIN,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartPoint {
    pub theta: f64,
    pub phi: f64,
    pub t: f64,
}

impl ChartPoint {
    /// Builds a point with both angles reduced into `[0, PERIOD)`.
    pub fn new(theta: f64, phi: f64, t: f64) -> Result<Self> {
        check_t(t)?;
        Ok(Self {
            theta: theta.rem_euclid(PERIOD),
            phi: phi.rem_euclid(PERIOD),
            t,
        })
    }
}

/// Coefficients of the round metric `a2 dtheta^2 + b2 dphi^2 + c2 dt^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundMetricCoeffs {
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
}

impl RoundMetricCoeffs {
    pub fn as_array(&self) -> [f64; 3] {
        [self.a2, self.b2, self.c2]
    }
}

pub fn round_metric_coeffs(t: f64) -> Result<RoundMetricCoeffs> {
    check_t(t)?;
    let s = (2.0 * t).sin();
    Ok(RoundMetricCoeffs {
        a2: 1.0 + s,
        b2: 1.0 - s,
        c2: 1.0,
    })
}

/// Unchecked embedding; callers guarantee the chart domain.
pub(crate) fn embed_raw(theta: f64, phi: f64, t: f64) -> [f64; 4] {
    let (s, c) = (t + FRAC_PI_4).sin_cos();
    let (st, ct) = (SQRT_2 * theta).sin_cos();
    let (sp, cp) = (SQRT_2 * phi).sin_cos();
    [s * ct, s * st, c * cp, c * sp]
}

pub fn embed(p: ChartPoint) -> Result<[f64; 4]> {
    check_t(p.t)?;
    Ok(embed_raw(p.theta, p.phi, p.t))
}

/// Point of the Clifford torus; `|z1|^2 = |z2|^2 = 1/2`.
pub fn clifford_point(theta: f64, phi: f64) -> [f64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (st, ct) = (SQRT_2 * theta).sin_cos();
    let (sp, cp) = (SQRT_2 * phi).sin_cos();
    [h * ct, h * st, h * cp, h * sp]
}
