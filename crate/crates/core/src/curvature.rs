//! Ricci curvature of the perturbed metric `e^{2w} g` in the Clifford chart.
//!
//! For `w = w(t)` the Hessian of `w` is diagonal in `(dt, dtheta, dphi)` and
//! the conformal Ricci law reduces, using `Ric = 2g` for the round metric, to
//!
//! ```text
//! Ric(dt, dt)         = 2 (1 - w'') + 2 tan(2t) w'
//! Ric(dtheta, dtheta) = (1 + sin 2t) X - w' cos 2t
//! Ric(dphi, dphi)     = (1 - sin 2t) X + w' cos 2t
//! X                   = 2 - w'' + 2 tan(2t) w' - w'^2
//! ```
//!
//! with all mixed components zero.

use std::f64::consts::FRAC_PI_8;

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::check_t;
use crate::error::{Error, Result};
use crate::profile::{make_bump, profile, tail_constant, ConformalProfile};

/// Slack below zero still accepted as nonnegative.
pub const NONNEG_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RicciDiagonal {
    pub t: f64,
    pub r_tt: f64,
    pub r_thth: f64,
    pub r_phph: f64,
    pub lam_t: f64,
    pub lam_th: f64,
    pub lam_ph: f64,
}

impl RicciDiagonal {
    pub fn min_eigenvalue(&self) -> f64 {
        self.lam_t.min(self.lam_th).min(self.lam_ph)
    }

    pub fn components(&self) -> [f64; 3] {
        [self.r_tt, self.r_thth, self.r_phph]
    }

    pub fn eigenvalues(&self) -> [f64; 3] {
        [self.lam_t, self.lam_th, self.lam_ph]
    }
}

/// `(Hess w)(dt,dt), (dtheta,dtheta), (dphi,dphi)` for the round metric.
pub fn hessian_diag(p: &ConformalProfile, t: f64) -> Result<(f64, f64, f64)> {
    check_t(t)?;
    let c = (2.0 * t).cos();
    let w1 = p.w1(t);
    Ok((p.w2(t), w1 * c, -w1 * c))
}

/// Round-metric Laplacian (trace of the Hessian) of `w`.
pub fn laplacian_w(p: &ConformalProfile, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(p.w2(t) - 2.0 * (2.0 * t).tan() * p.w1(t))
}

pub fn ricci_diag(p: &ConformalProfile, t: f64) -> Result<RicciDiagonal> {
    check_t(t)?;
    let (w, w1, w2) = (p.w(t), p.w1(t), p.w2(t));
    let (s, c) = (2.0 * t).sin_cos();
    let tan_term = if w1 == 0.0 { 0.0 } else { 2.0 * (s / c) * w1 };

    let r_tt = 2.0 * (1.0 - w2) + tan_term;
    let x = 2.0 - w2 + tan_term - w1 * w1;
    let r_thth = (1.0 + s) * x - w1 * c;
    let r_phph = (1.0 - s) * x + w1 * c;

    let e = (2.0 * w).exp();
    Ok(RicciDiagonal {
        t,
        r_tt,
        r_thth,
        r_phph,
        lam_t: r_tt / e,
        lam_th: r_thth / (e * (1.0 + s)),
        lam_ph: r_phph / (e * (1.0 - s)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonnegativityScan {
    pub resolution: usize,
    pub half_width: f64,
    pub min_eigenvalue: f64,
    pub argmin: f64,
    /// On the tail the metric is `C g`, so every normalized eigenvalue is `2/C`.
    pub tail_eigenvalue: f64,
    /// The tail piece of the profile is exactly flat.
    pub tail_exact: bool,
    pub feasible: bool,
}

/// Minimum normalized Ricci eigenvalue on a uniform grid of `[-2r, 2r]`.
///
/// Profiles without a bump scan `[-pi/8, pi/8]` instead.
pub fn scan_nonnegativity(p: &ConformalProfile, resolution: usize) -> Result<NonnegativityScan> {
    if resolution < 64 {
        return Err(Error::InvalidParameter {
            name: "resolution",
            value: resolution as f64,
            reason: "scan needs at least 64 grid points",
        });
    }
    let tail = p.tail_start();
    let half = if tail > 0.0 { tail } else { FRAC_PI_8 };
    let node = |i: usize| -half + 2.0 * half * i as f64 / (resolution - 1) as f64;

    let (min, idx) = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let v = ricci_diag(p, node(i)).map(|d| d.min_eigenvalue());
            (v.unwrap_or(f64::NAN), i)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| {
                // NaN sorts below everything so a broken evaluation is never hidden
                let key = |x: (f64, usize)| (if x.0.is_nan() { f64::NEG_INFINITY } else { x.0 }, x.1);
                let (ka, kb) = (key(a), key(b));
                if kb.0 < ka.0 || (kb.0 == ka.0 && kb.1 < ka.1) {
                    b
                } else {
                    a
                }
            },
        );

    let tail_exact = p.w1(tail) == 0.0 && p.w2(tail) == 0.0;
    let tail_eigenvalue = 2.0 / tail_constant(p);
    Ok(NonnegativityScan {
        resolution,
        half_width: half,
        min_eigenvalue: min,
        argmin: node(idx),
        tail_eigenvalue,
        tail_exact,
        feasible: min >= -NONNEG_SLACK && tail_exact && tail_eigenvalue > 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibleRadius {
    pub r_star: f64,
    /// `[feasible, infeasible or domain edge]`.
    pub bracket: (f64, f64),
    /// The upper end of the bracket is `pi/8` itself, not a detected sign change.
    pub upper_is_domain_edge: bool,
    pub min_at_r_star: f64,
    pub half_r_feasible: bool,
    pub min_at_half_r: f64,
}

/// Smallest radius tried before giving up.
pub const MIN_PROBE_R: f64 = 1e-4;
const DESCENT_STEPS: usize = 64;

fn scan_radius(r: f64, resolution: usize) -> Result<NonnegativityScan> {
    scan_nonnegativity(&profile(&make_bump(r)?), resolution)
}

/// Largest standard-bump radius with a nonnegative Ricci scan.
///
/// Descends from just below `pi/8` until the first feasible radius, then
/// bisects the last infeasible/feasible pair down to `tol`. Feasibility is
/// not assumed monotone in `r`; `r*/2` is re-checked and reported.
pub fn max_feasible_r(resolution: usize, tol: f64) -> Result<FeasibleRadius> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "bisection tolerance must be positive",
        });
    }
    let top = FRAC_PI_8 * (1.0 - 1e-9);
    let candidates = (0..DESCENT_STEPS)
        .map(|k| top * (1.0 - k as f64 / DESCENT_STEPS as f64))
        .chain(std::iter::once(MIN_PROBE_R));

    let mut above: Option<f64> = None;
    let mut found = None;
    for r in candidates {
        let scan = scan_radius(r, resolution)?;
        if scan.feasible {
            found = Some((r, scan.min_eigenvalue));
            break;
        }
        if r == MIN_PROBE_R {
            return Err(Error::EmptyFeasibleSet { r, min: scan.min_eigenvalue });
        }
        above = Some(r);
    }
    let (mut lo, mut min_lo) = found.expect("loop either finds a radius or returns");

    let (hi, edge) = match above {
        None => (FRAC_PI_8, true),
        Some(mut hi) => {
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let scan = scan_radius(mid, resolution)?;
                if scan.feasible {
                    lo = mid;
                    min_lo = scan.min_eigenvalue;
                } else {
                    hi = mid;
                }
            }
            (hi, false)
        }
    };

    let half = scan_radius(0.5 * lo, resolution)?;
    Ok(FeasibleRadius {
        r_star: lo,
        bracket: (lo, hi),
        upper_is_domain_edge: edge,
        min_at_r_star: min_lo,
        half_r_feasible: half.feasible,
        min_at_half_r: half.min_eigenvalue,
    })
}

/// Rows `t,lam_t,lam_th,lam_ph` over the scan interval.
pub fn write_scan_csv<W: std::io::Write>(
    p: &ConformalProfile,
    resolution: usize,
    out: &mut W,
) -> Result<()> {
    let tail = p.tail_start();
    let half = if tail > 0.0 { tail } else { FRAC_PI_8 };
    let io = |e| Error::io("<csv>", e);
    writeln!(out, "t,lam_t,lam_th,lam_ph").map_err(io)?;
    for i in 0..resolution.max(2) {
        let t = -half + 2.0 * half * i as f64 / (resolution.max(2) - 1) as f64;
        let d = ricci_diag(p, t)?;
        writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", t, d.lam_t, d.lam_th, d.lam_ph).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::BumpSpec;

    fn std_profile(r: f64) -> ConformalProfile {
        profile(&make_bump(r).unwrap())
    }

    #[test]
    fn hessian_and_laplacian_at_special_points() {
        let p = std_profile(0.05);
        assert_eq!(hessian_diag(&p, 0.0).unwrap(), (1.0, 0.0, 0.0));
        assert_eq!(hessian_diag(&p, 0.1).unwrap(), (0.0, 0.0, 0.0));
        assert_eq!(laplacian_w(&p, 0.0).unwrap(), 1.0);
        assert_eq!(laplacian_w(&p, 0.1).unwrap(), 0.0);
        assert_eq!(laplacian_w(&p, -0.3).unwrap(), 0.0);
        let z = ConformalProfile::zero();
        assert_eq!(hessian_diag(&z, 0.3).unwrap(), (0.0, 0.0, 0.0));
        assert_eq!(laplacian_w(&z, -0.3).unwrap(), 0.0);
        assert!(hessian_diag(&p, 0.8).is_err());
        assert!(laplacian_w(&p, -0.8).is_err());
        assert!(ricci_diag(&p, 0.79).is_err());
    }

    #[test]
    fn round_metric_is_einstein() {
        let z = ConformalProfile::zero();
        for &t in &[-0.7, -0.2, 0.0, 0.33, 0.75] {
            let d = ricci_diag(&z, t).unwrap();
            let s = (2.0 * t).sin();
            assert_eq!(d.components(), [2.0, 2.0 * (1.0 + s), 2.0 * (1.0 - s)]);
            for l in d.eigenvalues() {
                assert!((l - 2.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn standard_bump_at_origin() {
        let d = ricci_diag(&std_profile(0.05), 0.0).unwrap();
        assert_eq!(d.components(), [0.0, 1.0, 1.0]);
        assert_eq!(d.eigenvalues(), [0.0, 1.0, 1.0]);
    }

    #[test]
    fn displayed_components_match_general_law() {
        // Ric_bar = Ric - (Hess w - dw dw) - (Lap w + |dw|^2) g
        let p = std_profile(0.11);
        for i in 0..=200 {
            let t = -0.25 + 0.5 * i as f64 / 200.0;
            let (h_tt, h_th, h_ph) = hessian_diag(&p, t).unwrap();
            let lap = laplacian_w(&p, t).unwrap();
            let w1 = p.w1(t);
            let s = (2.0 * t).sin();
            let g = [1.0, 1.0 + s, 1.0 - s];
            let hess = [h_tt - w1 * w1, h_th, h_ph];
            let d = ricci_diag(&p, t).unwrap();
            for k in 0..3 {
                let law = 2.0 * g[k] - hess[k] - (lap + w1 * w1) * g[k];
                assert!((law - d.components()[k]).abs() < 1e-13, "t = {t}, k = {k}");
            }
        }
    }

    #[test]
    fn constant_shift_leaves_ricci_components_unchanged() {
        let z = ConformalProfile::zero();
        let c = ConformalProfile::constant(0.7);
        for &t in &[-0.6, 0.0, 0.4] {
            let (a, b) = (ricci_diag(&z, t).unwrap(), ricci_diag(&c, t).unwrap());
            assert_eq!(a.components(), b.components());
        }
    }

    #[test]
    fn sign_pattern_of_components_and_eigenvalues() {
        let p = std_profile(0.2);
        for i in 0..=100 {
            let t = -0.4 + 0.8 * i as f64 / 100.0;
            let d = ricci_diag(&p, t).unwrap();
            for (r, l) in d.components().iter().zip(d.eigenvalues()) {
                assert_eq!(r.signum(), l.signum());
            }
        }
    }

    #[test]
    fn scans() {
        let z = scan_nonnegativity(&ConformalProfile::zero(), 128).unwrap();
        assert!(z.feasible && (z.min_eigenvalue - 2.0).abs() < 1e-14);
        let s = scan_nonnegativity(&std_profile(0.05), 4096).unwrap();
        assert!(s.feasible, "{s:?}");
        assert!(s.min_eigenvalue >= -NONNEG_SLACK);
        assert!(s.tail_exact);
        assert!(scan_nonnegativity(&std_profile(0.05), 10).is_err());
    }

    #[test]
    fn scan_near_upper_radius_is_reported() {
        // Every term that could turn the components negative is dominated
        // for this bump family, so the scan stays nonnegative here as well.
        let s = scan_nonnegativity(&std_profile(0.39), 4096).unwrap();
        assert!(s.min_eigenvalue.is_finite());
        assert!(s.min_eigenvalue >= -NONNEG_SLACK, "{s:?}");
    }

    #[test]
    fn broken_amplitude_has_no_flat_tail() {
        let b = BumpSpec::with_amplitude(0.05, 0.4).unwrap();
        let s = scan_nonnegativity(&profile(&b), 256).unwrap();
        assert!(!s.tail_exact && !s.feasible);
    }

    #[test]
    fn scan_is_reproducible() {
        let p = std_profile(0.13);
        let a = scan_nonnegativity(&p, 4096).unwrap();
        let b = scan_nonnegativity(&p, 4096).unwrap();
        assert_eq!(a.min_eigenvalue.to_bits(), b.min_eigenvalue.to_bits());
        assert_eq!(a.argmin.to_bits(), b.argmin.to_bits());
    }

    #[test]
    fn feasible_radius_search() {
        let f = max_feasible_r(512, 1e-4).unwrap();
        assert!(f.r_star > 0.0 && f.r_star < FRAC_PI_8);
        assert!(f.min_at_r_star >= -NONNEG_SLACK);
        assert!(f.half_r_feasible);
        assert!(f.bracket.0 <= f.bracket.1);
        assert!(max_feasible_r(512, 0.0).is_err());
    }
}
