//! Parallel tori `t = const` in the round and the perturbed metric.
//!
//! Conventions: the unit normal is `+d/dt` and the second fundamental form is
//! `(1/2) d/dt` of the induced metric. This fixes `kappa = (+1, -1)` on the
//! Clifford torus and `H(t) = -tan 2t`; only `H^2`, `|sigma|^2` and
//! `kappa1 kappa2` are used downstream.
//!
//! Under `g_bar = e^{2w} g` the unit normal becomes `e^{-w} d/dt` and the
//! principal curvatures transform as `kappa_bar = e^{-w} (kappa + w')`. The
//! induced metric on each parallel torus stays flat (it is a constant
//! multiple of a flat metric), so `K_bar = 0` and the ambient sectional
//! curvature follows from the Gauss equation.

use serde::Serialize;

use crate::chart::check_t;
use crate::error::{Error, Result};
use crate::profile::ConformalProfile;
use crate::spectral::TorusGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricTag {
    Round,
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusGeometry {
    pub t: f64,
    pub metric: MetricTag,
    pub kappa1: f64,
    pub kappa2: f64,
    /// Mean curvature `(kappa1 + kappa2) / 2`.
    pub h: f64,
    /// `|sigma|^2 = kappa1^2 + kappa2^2`.
    pub sigma2: f64,
    /// Area element per unit `dtheta dphi`.
    pub area_density: f64,
    /// Intrinsic Gauss curvature.
    pub k: f64,
    /// Ambient sectional curvature of the tangent plane.
    pub ks: f64,
}

impl TorusGeometry {
    fn from_principal(t: f64, metric: MetricTag, kappa1: f64, kappa2: f64, area_density: f64, k: f64, ks: f64) -> Self {
        Self {
            t,
            metric,
            kappa1,
            kappa2,
            h: 0.5 * (kappa1 + kappa2),
            sigma2: kappa1 * kappa1 + kappa2 * kappa2,
            area_density,
            k,
            ks,
        }
    }

    /// `| |sigma|^2 - (4 H^2 + 2 Ks - 2 K) |`.
    pub fn gauss_residual(&self) -> f64 {
        (self.sigma2 - (4.0 * self.h * self.h + 2.0 * self.ks - 2.0 * self.k)).abs()
    }

    /// Willmore density `(H^2 + Ks) dA` per unit `dtheta dphi`.
    pub fn willmore_density(&self) -> f64 {
        (self.h * self.h + self.ks) * self.area_density
    }

    /// Conformally invariant density `(kappa1 - kappa2)^2 dA`.
    pub fn umbilic_density(&self) -> f64 {
        let d = self.kappa1 - self.kappa2;
        d * d * self.area_density
    }
}

pub fn parallel_torus_round(t: f64) -> Result<TorusGeometry> {
    check_t(t)?;
    let (s, c) = (2.0 * t).sin_cos();
    Ok(TorusGeometry::from_principal(
        t,
        MetricTag::Round,
        c / (1.0 + s),
        -c / (1.0 - s),
        c,
        0.0,
        1.0,
    ))
}

pub fn conformal_principal(p: &ConformalProfile, t: f64, base: &TorusGeometry) -> Result<TorusGeometry> {
    if base.metric != MetricTag::Round || base.t != t {
        return Err(Error::InvalidParameter {
            name: "base.t",
            value: base.t,
            reason: "base geometry must be the round torus at the same t",
        });
    }
    let (w, w1) = (p.w(t), p.w1(t));
    let scale = (-w).exp();
    let k1 = scale * (base.kappa1 + w1);
    let k2 = scale * (base.kappa2 + w1);
    Ok(TorusGeometry::from_principal(
        t,
        MetricTag::Perturbed,
        k1,
        k2,
        (2.0 * w).exp() * base.area_density,
        0.0,
        -k1 * k2,
    ))
}

/// Geometry of the parallel torus at `t`, perturbed when a profile is given.
pub fn torus_geometry(p: Option<&ConformalProfile>, t: f64) -> Result<TorusGeometry> {
    let base = parallel_torus_round(t)?;
    match p {
        Some(p) => conformal_principal(p, t, &base),
        None => Ok(base),
    }
}

/// `int (H^2 + Ks) dA` over the parallel torus by quadrature on `grid`.
pub fn willmore(p: Option<&ConformalProfile>, t: f64, grid: &TorusGrid) -> Result<f64> {
    let geo = torus_geometry(p, t)?;
    let density = geo.willmore_density();
    Ok(grid.integrate(|_, _| density))
}

/// Pointwise `|(kb1 - kb2)^2 dA_bar - (k1 - k2)^2 dA|` per unit `dtheta dphi`.
pub fn conformal_density_residual(p: &ConformalProfile, t: f64) -> Result<f64> {
    let base = parallel_torus_round(t)?;
    let bar = conformal_principal(p, t, &base)?;
    Ok((bar.umbilic_density() - base.umbilic_density()).abs())
}

/// Rows `t,kappa1,kappa2,H,sigma2,W` for each requested `t`.
pub fn write_geometry_csv<W: std::io::Write>(
    p: Option<&ConformalProfile>,
    ts: &[f64],
    grid: &TorusGrid,
    out: &mut W,
) -> Result<()> {
    let io = |e| Error::io("<csv>", e);
    writeln!(out, "t,kappa1,kappa2,H,sigma2,W").map_err(io)?;
    for &t in ts {
        let g = torus_geometry(p, t)?;
        let w = willmore(p, t, grid)?;
        writeln!(
            out,
            "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            t, g.kappa1, g.kappa2, g.h, g.sigma2, w
        )
        .map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::profile::{make_bump, profile, tail_constant};

    #[test]
    fn clifford_torus_round() {
        let g = parallel_torus_round(0.0).unwrap();
        assert_eq!((g.kappa1, g.kappa2, g.h, g.sigma2), (1.0, -1.0, 0.0, 2.0));
        let grid = TorusGrid::new(16).unwrap();
        assert!((grid.integrate(|_, _| g.area_density) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn round_parallel_tori() {
        for &t in &[-0.6, -0.1, 0.25, 0.7] {
            let g = parallel_torus_round(t).unwrap();
            assert!((g.h + (2.0 * t).tan()).abs() < 1e-12);
            assert!((g.kappa1 * g.kappa2 + 1.0).abs() < 1e-12);
            assert_eq!(g.k, 0.0);
            assert!(g.gauss_residual() < 1e-12);
        }
        assert!(parallel_torus_round(0.79).is_err());
    }

    #[test]
    fn perturbation_is_invisible_at_origin() {
        let p = profile(&make_bump(0.05).unwrap());
        let g = torus_geometry(Some(&p), 0.0).unwrap();
        assert_eq!((g.kappa1, g.kappa2, g.h, g.sigma2), (1.0, -1.0, 0.0, 2.0));
        assert_eq!(conformal_density_residual(&p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn zero_profile_is_identity() {
        let z = ConformalProfile::zero();
        for &t in &[-0.3, 0.0, 0.5] {
            let base = parallel_torus_round(t).unwrap();
            let bar = conformal_principal(&z, t, &base).unwrap();
            assert_eq!(
                (bar.kappa1, bar.kappa2, bar.area_density),
                (base.kappa1, base.kappa2, base.area_density)
            );
            assert_eq!(conformal_density_residual(&z, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn tail_uses_constant_scaling() {
        let p = profile(&make_bump(0.05).unwrap());
        let c = tail_constant(&p);
        for &t in &[0.1, 0.2, -0.3] {
            let base = parallel_torus_round(t).unwrap();
            let bar = conformal_principal(&p, t, &base).unwrap();
            assert!((bar.kappa1 - base.kappa1 / c.sqrt()).abs() < 1e-14);
            assert!((bar.kappa2 - base.kappa2 / c.sqrt()).abs() < 1e-14);
            assert!((bar.area_density - c * base.area_density).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_base_is_rejected() {
        let p = ConformalProfile::zero();
        let base = parallel_torus_round(0.1).unwrap();
        assert!(conformal_principal(&p, 0.2, &base).is_err());
        let bar = conformal_principal(&p, 0.1, &base).unwrap();
        assert!(conformal_principal(&p, 0.1, &bar).is_err());
    }

    #[test]
    fn geometry_csv() {
        let grid = TorusGrid::new(8).unwrap();
        let mut buf = Vec::new();
        write_geometry_csv(None, &[0.0, 0.1], &grid, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t,kappa1,kappa2,H,sigma2,W\n"));
        assert_eq!(s.lines().count(), 3);
    }
}
