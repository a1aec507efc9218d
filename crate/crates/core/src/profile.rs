//! The radial bump `zeta` and the conformal profile `w` with `w'' = zeta`.
//!
//! `zeta` is even and piecewise polynomial in `|t|`:
//!
//! * on `[0, r]`: `1 - S(|t|/r)` with the smootherstep `S(s) = s^3 (10 - 15 s + 6 s^2)`;
//! * on `[r, 2r]`: `-A * 140 (u (1 - u))^3`, `u = (|t| - r)/r`;
//! * zero beyond `2r`.
//!
//! Both lobes meet their neighbours with vanishing first and second
//! derivatives, so `zeta` is C^2. The positive lobe has mean 1/2 and the
//! negative shape has unit mean, hence `A = 1/2` makes `int_0^{2r} zeta = 0`.
//!
//! The profile `w(t) = int_0^t int_0^s zeta` is carried as exact piecewise
//! antiderivatives, no quadrature involved. `w` is even, `w'` odd.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PositiveLobe {
    /// `1 - s^3 (10 - 15 s + 6 s^2)`.
    Smootherstep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NegativeLobe {
    /// `140 (u (1 - u))^3`, unit integral on `[0, 1]`.
    Beta3,
}

impl PositiveLobe {
    fn poly(self) -> Poly {
        match self {
            PositiveLobe::Smootherstep => Poly::new(vec![1.0, 0.0, 0.0, -10.0, 15.0, -6.0]),
        }
    }
}

impl NegativeLobe {
    fn poly(self) -> Poly {
        match self {
            NegativeLobe::Beta3 => Poly::new(vec![0.0, 0.0, 0.0, 140.0, -420.0, 420.0, -140.0]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpSpec {
    pub r: f64,
    pub positive: PositiveLobe,
    pub negative: NegativeLobe,
    /// Amplitude of the negative lobe.
    pub amplitude: f64,
}

fn check_r(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 && r < FRAC_PI_8 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "lobe half-width must lie in (0, pi/8)",
        })
    }
}

/// Standard bump of half-width `r`.
pub fn make_bump(r: f64) -> Result<BumpSpec> {
    check_r(r)?;
    Ok(BumpSpec {
        r,
        positive: PositiveLobe::Smootherstep,
        negative: NegativeLobe::Beta3,
        amplitude: 0.5,
    })
}

impl BumpSpec {
    /// Bump with an arbitrary negative amplitude. Nothing beyond the range
    /// of `r` is checked; this exists to exercise [`verify_conditions`].
    pub fn with_amplitude(r: f64, amplitude: f64) -> Result<Self> {
        let mut b = make_bump(r)?;
        b.amplitude = amplitude;
        Ok(b)
    }

    pub fn zeta(&self, t: f64) -> f64 {
        profile(self).w2(t)
    }

    /// Exact `int_0^{2r} zeta`.
    pub fn lobe_integral(&self) -> f64 {
        let pos = self.positive.poly().integrate(1.0, 0.0).eval(1.0);
        let neg = self.negative.poly().integrate(1.0, 0.0).eval(1.0);
        self.r * (pos - self.amplitude * neg)
    }
}

/// One polynomial piece in the local variable `u = (|t| - start) / width`.
///
/// `w'` and `w` are stored as dimensionless polynomials times a scale so the
/// lobe moments, which are exact binary fractions, cancel exactly.
#[derive(Debug, Clone, PartialEq)]
struct Piece {
    start: f64,
    width: f64,
    zeta: Poly,
    w1: Poly,
    w1_scale: f64,
    w: Poly,
    w_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalProfile {
    bump: Option<BumpSpec>,
    pieces: Vec<Piece>,
}

/// Builds the exact piecewise antiderivatives of `zeta`.
pub fn profile(b: &BumpSpec) -> ConformalProfile {
    let r = b.r;
    // dimensionless antiderivatives: w' = r P(u), w = r^2 R(u)
    let z0 = b.positive.poly();
    let p0 = z0.integrate(1.0, 0.0);
    let r0 = p0.integrate(1.0, 0.0);

    let z1 = b.negative.poly().scale(-b.amplitude);
    let p1 = z1.integrate(1.0, p0.eval(1.0));
    let r1 = p1.integrate(1.0, r0.eval(1.0));

    let slope = p1.eval(1.0);
    let tail_w = Poly::new(vec![r * r * r1.eval(1.0), r * slope]);

    ConformalProfile {
        bump: Some(*b),
        pieces: vec![
            Piece { start: 0.0, width: r, zeta: z0, w1: p0, w1_scale: r, w: r0, w_scale: r * r },
            Piece { start: r, width: r, zeta: z1, w1: p1, w1_scale: r, w: r1, w_scale: r * r },
            Piece {
                start: 2.0 * r,
                width: 1.0,
                zeta: Poly::zero(),
                w1: Poly::constant(slope),
                w1_scale: r,
                w: tail_w,
                w_scale: 1.0,
            },
        ],
    }
}

impl ConformalProfile {
    /// `w = 0`: the round metric.
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `w = c`: a constant rescaling of the round metric.
    pub fn constant(c: f64) -> Self {
        Self {
            bump: None,
            pieces: vec![Piece {
                start: 0.0,
                width: 1.0,
                zeta: Poly::zero(),
                w1: Poly::zero(),
                w1_scale: 1.0,
                w: Poly::constant(c),
                w_scale: 1.0,
            }],
        }
    }

    pub fn bump(&self) -> Option<&BumpSpec> {
        self.bump.as_ref()
    }

    /// Start of the region where `zeta` vanishes identically.
    pub fn tail_start(&self) -> f64 {
        self.pieces.last().map_or(0.0, |p| p.start)
    }

    fn locate(&self, t: f64) -> (&Piece, f64) {
        let a = t.abs();
        let piece = self
            .pieces
            .iter()
            .rev()
            .find(|p| a >= p.start)
            .unwrap_or(&self.pieces[0]);
        (piece, (a - piece.start) / piece.width)
    }

    pub fn w(&self, t: f64) -> f64 {
        let (p, u) = self.locate(t);
        p.w_scale * p.w.eval(u)
    }

    pub fn w1(&self, t: f64) -> f64 {
        let (p, u) = self.locate(t);
        let v = p.w1_scale * p.w1.eval(u);
        if t < 0.0 {
            -v
        } else {
            v
        }
    }

    pub fn w2(&self, t: f64) -> f64 {
        let (p, u) = self.locate(t);
        p.zeta.eval(u)
    }

    pub fn zeta(&self, t: f64) -> f64 {
        self.w2(t)
    }

    /// `zeta'(t)`, odd in `t`.
    pub fn zeta_prime(&self, t: f64) -> f64 {
        let (p, u) = self.locate(t);
        let v = p.zeta.derivative().eval(u) / p.width;
        if t < 0.0 {
            -v
        } else {
            v
        }
    }

    /// Writes `t,zeta,w,w1,w2` rows on a uniform grid of `[-half, half]`.
    pub fn write_csv<W: Write>(&self, out: &mut W, half: f64, n: usize) -> std::io::Result<()> {
        writeln!(out, "t,zeta,w,w1,w2")?;
        let n = n.max(2);
        for i in 0..n {
            let t = -half + 2.0 * half * i as f64 / (n - 1) as f64;
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                t,
                self.zeta(t),
                self.w(t),
                self.w1(t),
                self.w2(t)
            )?;
        }
        Ok(())
    }
}

/// `C = exp(2 w)` on the tail, where the perturbed metric is `C g`.
pub fn tail_constant(p: &ConformalProfile) -> f64 {
    (2.0 * p.w(p.tail_start())).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub passed: bool,
    pub residual: f64,
}

impl Check {
    fn within(residual: f64, tol: f64) -> Self {
        Self {
            passed: residual.abs() <= tol,
            residual,
        }
    }

    /// Passes iff `value < 0`.
    fn strictly_negative(value: f64) -> Self {
        Self {
            passed: value < 0.0,
            residual: value,
        }
    }
}

/// One entry per bump condition plus the derived profile bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionReport {
    pub tol: f64,
    /// `zeta(0) = 1`; residual `zeta(0) - 1`.
    pub unit_at_origin: Check,
    /// `zeta' < 0` on `(0, r)`; residual is the largest sampled `zeta'`.
    pub decreasing: Check,
    /// `zeta(r) = 0`.
    pub zero_at_r: Check,
    /// `zeta < 0` on `(r, 2r)`; residual is the largest sampled value.
    pub negative_lobe: Check,
    /// `zeta = 0` on `[2r, pi/4)`; residual is the largest sampled `|zeta|`.
    pub vanishing_tail: Check,
    /// `int_0^{2r} zeta = 0`; residual is the integral.
    pub zero_integral: Check,
    /// `max |zeta(t) - zeta(-t)|`.
    pub evenness: Check,
    /// `max zeta - 1`, must not exceed `tol`.
    pub bounded_by_one: Check,
    /// `w' >= 0` on `[0, pi/4)`; residual is `-min w'`.
    pub slope_sign: Check,
    /// `|w'| <= r`; residual is `max |w'| - r`.
    pub slope_bound: Check,
}

impl ConditionReport {
    pub fn all_passed(&self) -> bool {
        [
            self.unit_at_origin,
            self.decreasing,
            self.zero_at_r,
            self.negative_lobe,
            self.vanishing_tail,
            self.zero_integral,
            self.evenness,
            self.bounded_by_one,
            self.slope_sign,
            self.slope_bound,
        ]
        .iter()
        .all(|c| c.passed)
    }
}

const CHECK_SAMPLES: usize = 4096;

pub fn verify_conditions(b: &BumpSpec, tol: f64) -> ConditionReport {
    let p = profile(b);
    let r = b.r;
    let n = CHECK_SAMPLES;
    let interior = |a: f64, len: f64| (1..n).map(move |i| a + len * i as f64 / n as f64);

    let max_slope = interior(0.0, r)
        .map(|t| p.zeta_prime(t))
        .fold(f64::NEG_INFINITY, f64::max);
    let max_lobe = interior(r, r)
        .map(|t| p.zeta(t))
        .fold(f64::NEG_INFINITY, f64::max);

    let tail_len = FRAC_PI_4 - 2.0 * r;
    let tail_max = (0..n)
        .map(|i| 2.0 * r + tail_len * i as f64 / n as f64)
        .map(|t| p.zeta(t).abs())
        .fold(0.0, f64::max);
    // The tail piece is an exact zero polynomial for every valid bump.
    let tail_residual = if p.pieces[2].zeta.is_zero() { tail_max } else { f64::INFINITY };

    let span: Vec<f64> = (0..=4 * n)
        .map(|i| FRAC_PI_4 * 0.999 * i as f64 / (4 * n) as f64)
        .collect();
    let evenness = span
        .iter()
        .map(|&t| (p.zeta(t) - p.zeta(-t)).abs())
        .fold(0.0, f64::max);
    let zeta_max = span.iter().map(|&t| p.zeta(t)).fold(f64::NEG_INFINITY, f64::max);
    let slope_min = span.iter().map(|&t| p.w1(t)).fold(f64::INFINITY, f64::min);
    let slope_abs = span.iter().map(|&t| p.w1(t).abs()).fold(0.0, f64::max);

    ConditionReport {
        tol,
        unit_at_origin: Check::within(p.zeta(0.0) - 1.0, tol),
        decreasing: Check::strictly_negative(max_slope),
        zero_at_r: Check::within(p.zeta(r), tol),
        negative_lobe: Check::strictly_negative(max_lobe),
        vanishing_tail: Check::within(tail_residual, tol),
        zero_integral: Check::within(b.lobe_integral(), tol),
        evenness: Check::within(evenness, tol),
        bounded_by_one: Check { passed: zeta_max - 1.0 <= tol, residual: zeta_max - 1.0 },
        slope_sign: Check { passed: -slope_min <= tol, residual: -slope_min },
        slope_bound: Check { passed: slope_abs - r <= tol, residual: slope_abs - r },
    }
}
