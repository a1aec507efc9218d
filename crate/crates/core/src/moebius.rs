//! Conformal dilations of `S^n` and conformal balancing of sphere-valued maps.
//!
//! The dilation with parameter `a` (`|a| < 1`) fixes the poles `+-a/|a|`,
//! attracts toward `a/|a|` and repels from `-a/|a|`. In the stereographic
//! chart projected from `-a/|a|` it is the Euclidean scaling by
//! `(1 - |a|)/(1 + |a|)`. With this choice `T_{-a}` is the inverse of `T_a`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{neumaier_sum, FourierDiff, TorusGrid};

/// Largest admissible `|a|`.
pub const BALL_LIMIT: f64 = 1.0 - 1e-12;

type Vector<const D: usize> = [f64; D];

fn dot<const D: usize>(x: &Vector<D>, y: &Vector<D>) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn norm<const D: usize>(x: &Vector<D>) -> f64 {
    dot(x, x).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusParam<const D: usize> {
    #[serde(with = "array_serde")]
    pub a: Vector<D>,
}

mod array_serde {
    use serde::Serializer;

    pub fn serialize<S: Serializer, const D: usize>(a: &[f64; D], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(a.iter())
    }
}

impl<const D: usize> MobiusParam<D> {
    pub fn identity() -> Self {
        Self { a: [0.0; D] }
    }

    /// Rejects `|a| >= BALL_LIMIT`.
    pub fn new(a: Vector<D>) -> Result<Self> {
        let r = norm(&a);
        if r.is_nan() || r >= BALL_LIMIT {
            return Err(Error::InvalidParameter {
                name: "|a|",
                value: r,
                reason: "Moebius parameter must lie in the open unit ball",
            });
        }
        Ok(Self { a })
    }

    fn clamped(mut a: Vector<D>) -> (Self, bool) {
        let r = norm(&a);
        let hit = r > BALL_LIMIT;
        if hit {
            a.iter_mut().for_each(|x| *x *= BALL_LIMIT / r);
        }
        (Self { a }, hit)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.a)
    }

    /// Euclidean scale factor in the chart projected from `-a/|a|`.
    pub fn scale(&self) -> f64 {
        let r = self.norm();
        (1.0 - r) / (1.0 + r)
    }
}

/// Scaling by `scale` in the stereographic chart projected from `-pole`.
///
/// `pole` must be a unit vector; `-pole` and `pole` are fixed.
pub fn dilation<const D: usize>(pole: &Vector<D>, scale: f64, x: &Vector<D>) -> Vector<D> {
    let s = dot(x, pole);
    let m2 = scale * scale;
    let along = (1.0 + s) - m2 * (1.0 - s);
    let denom = (1.0 + s) + m2 * (1.0 - s);
    let mut out = [0.0; D];
    for k in 0..D {
        let perp = x[k] - s * pole[k];
        out[k] = (2.0 * scale * perp + along * pole[k]) / denom;
    }
    let r = norm(&out);
    out.iter_mut().for_each(|v| *v /= r);
    out
}

pub fn mobius_apply<const D: usize>(m: &MobiusParam<D>, x: &Vector<D>) -> Vector<D> {
    let r = m.norm();
    if r == 0.0 {
        return *x;
    }
    let mut pole = m.a;
    pole.iter_mut().for_each(|v| *v /= r);
    dilation(&pole, m.scale(), x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceProblem<const D: usize> {
    samples: Vec<Vector<D>>,
    weights: Vec<f64>,
}

impl<const D: usize> BalanceProblem<D> {
    pub fn new(samples: Vec<Vector<D>>, weights: Vec<f64>) -> Result<Self> {
        if samples.is_empty() || samples.len() != weights.len() {
            return Err(Error::Input(format!(
                "{} samples but {} weights",
                samples.len(),
                weights.len()
            )));
        }
        if let Some(x) = samples.iter().find(|x| (norm(x) - 1.0).abs() > 1e-12) {
            return Err(Error::Input(format!("sample {x:?} is not a unit vector")));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Input(format!("weight {w} is not positive")));
        }
        Ok(Self { samples, weights })
    }

    pub fn uniform(samples: Vec<Vector<D>>) -> Result<Self> {
        let w = vec![1.0; samples.len()];
        Self::new(samples, w)
    }

    pub fn samples(&self) -> &[Vector<D>] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn is_degenerate(&self) -> bool {
        let first = &self.samples[0];
        self.samples.iter().all(|x| {
            x.iter().zip(first).all(|(a, b)| (a - b).abs() <= 1e-12)
        })
    }
}

/// Weighted mean of `T o Psi`.
pub fn center_of_mass<const D: usize>(p: &BalanceProblem<D>, m: &MobiusParam<D>) -> Vector<D> {
    let total = neumaier_sum(p.weights.iter().copied());
    let moved: Vec<Vector<D>> = p.samples.iter().map(|x| mobius_apply(m, x)).collect();
    let mut out = [0.0; D];
    for (k, o) in out.iter_mut().enumerate() {
        *o = neumaier_sum(moved.iter().zip(&p.weights).map(|(y, w)| w * y[k])) / total;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceOutcome<const D: usize> {
    pub param: MobiusParam<D>,
    pub residual: f64,
    pub iterations: usize,
    /// `|G|` after every accepted step, starting from `a = 0`.
    pub history: Vec<f64>,
}

/// Upper bound for the gradient step length.
const MAX_STEP: f64 = 4.0;
const JACOBIAN_STEP: f64 = 1e-6;

fn solve<const D: usize>(mut m: [[f64; D]; D], mut b: Vector<D>) -> Option<Vector<D>> {
    for col in 0..D {
        let piv = (col..D).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-14 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..D {
            let f = m[row][col] / m[col][col];
            for k in col..D {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; D];
    for row in (0..D).rev() {
        let s: f64 = (row + 1..D).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    Some(x)
}

fn newton_step<const D: usize>(p: &BalanceProblem<D>, a: &Vector<D>, g: &Vector<D>) -> Option<Vector<D>> {
    let mut jac = [[0.0; D]; D];
    for k in 0..D {
        let (mut plus, mut minus) = (*a, *a);
        plus[k] += JACOBIAN_STEP;
        minus[k] -= JACOBIAN_STEP;
        let gp = center_of_mass(p, &MobiusParam::clamped(plus).0);
        let gm = center_of_mass(p, &MobiusParam::clamped(minus).0);
        for row in 0..D {
            jac[row][k] = (gp[row] - gm[row]) / (2.0 * JACOBIAN_STEP);
        }
    }
    let mut rhs = *g;
    rhs.iter_mut().for_each(|v| *v = -*v);
    let delta = solve(jac, rhs)?;
    let mut out = *a;
    out.iter_mut().zip(delta).for_each(|(o, d)| *o += d);
    Some(out)
}

/// Finds `a` with `|center_of_mass(p, a)| <= tol`, starting from `a = 0`.
///
/// Every accepted step strictly decreases the residual. A Newton step with a
/// finite-difference Jacobian is tried first; if it does not reduce the
/// residual the step is `a - eta G(a)` with `eta` halved until it does, and
/// doubled again (up to a cap) after each accepted step.
pub fn balance<const D: usize>(p: &BalanceProblem<D>, tol: f64, max_iter: usize) -> Result<BalanceOutcome<D>> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "tolerance must be positive",
        });
    }
    if p.is_degenerate() {
        return Err(Error::DegenerateMass);
    }
    let mut m = MobiusParam::identity();
    let mut g = center_of_mass(p, &m);
    let mut res = norm(&g);
    let mut history = vec![res];
    let mut eta = 1.0;
    let mut clamped = false;

    for iter in 0..max_iter {
        if res <= tol {
            return Ok(BalanceOutcome { param: m, residual: res, iterations: iter, history });
        }
        let mut next = None;
        if let Some(a) = newton_step(p, &m.a, &g) {
            let (trial, hit) = MobiusParam::clamped(a);
            let gt = center_of_mass(p, &trial);
            if norm(&gt) < res {
                next = Some((trial, gt, hit));
            }
        }
        while next.is_none() {
            let mut a = m.a;
            a.iter_mut().zip(&g).for_each(|(x, gk)| *x -= eta * gk);
            let (trial, hit) = MobiusParam::clamped(a);
            let gt = center_of_mass(p, &trial);
            if norm(&gt) < res {
                next = Some((trial, gt, hit));
            } else {
                eta *= 0.5;
                if eta < 1e-14 {
                    return Err(Error::NonConvergence { iterations: iter, residual: res, norm: m.norm() });
                }
            }
        }
        let (trial, gt, hit) = next.expect("set above");
        eta = (2.0 * eta).min(MAX_STEP);
        m = trial;
        g = gt;
        res = norm(&g);
        clamped = hit;
        history.push(res);
    }
    if res <= tol && !clamped {
        return Ok(BalanceOutcome { param: m, residual: res, iterations: max_iter, history });
    }
    Err(Error::NonConvergence { iterations: max_iter, residual: res, norm: m.norm() })
}

/// A map `Sigma -> S^3` sampled on the nodes of a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub grid: TorusGrid,
    pub values: Vec<Vector<4>>,
}

impl GridMap {
    /// The Clifford embedding.
    pub fn clifford(grid: TorusGrid) -> Self {
        let values = grid
            .nodes()
            .map(|(a, b)| crate::chart::clifford_point(a, b))
            .collect();
        Self { grid, values }
    }

    /// `T o self`.
    pub fn compose(&self, m: &MobiusParam<4>) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|x| mobius_apply(m, x)).collect(),
        }
    }

    /// Balancing problem with weights `rho * dA`.
    pub fn problem(&self, rho: Option<&[f64]>) -> Result<BalanceProblem<4>> {
        let w = self.grid.weight();
        let weights = match rho {
            Some(r) if r.len() != self.values.len() => {
                return Err(Error::Input(format!(
                    "rho has {} values, grid has {} nodes",
                    r.len(),
                    self.values.len()
                )))
            }
            Some(r) => r.iter().map(|x| x * w).collect(),
            None => vec![w; self.values.len()],
        };
        BalanceProblem::new(self.values.clone(), weights)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    /// `int |grad (T o Psi)|^2 dA`.
    pub dirichlet: f64,
    /// `2 area(Sigma, (T o Psi)^* g)`.
    pub twice_area: f64,
}

impl EnergyReport {
    pub fn residual(&self) -> f64 {
        (self.dirichlet - self.twice_area).abs()
    }
}

/// Dirichlet energy of `T o Psi` against twice its pulled-back area, both by
/// spectral differentiation on the flat Clifford torus.
pub fn conformal_energy(map: &GridMap, m: &MobiusParam<4>) -> Result<EnergyReport> {
    let moved = map.compose(m);
    let diff = FourierDiff::new(map.grid);
    let n = moved.values.len();
    let mut e = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut f = vec![0.0; n];
    for k in 0..4 {
        let comp: Vec<f64> = moved.values.iter().map(|v| v[k]).collect();
        let (dt, dp) = diff.gradient(&comp)?;
        for i in 0..n {
            e[i] += dt[i] * dt[i];
            g[i] += dp[i] * dp[i];
            f[i] += dt[i] * dp[i];
        }
    }
    let dirichlet: Vec<f64> = e.iter().zip(&g).map(|(a, b)| a + b).collect();
    let jac: Vec<f64> = (0..n).map(|i| (e[i] * g[i] - f[i] * f[i]).max(0.0).sqrt()).collect();
    Ok(EnergyReport {
        dirichlet: map.grid.integrate_values(&dirichlet),
        twice_area: 2.0 * map.grid.integrate_values(&jac),
    })
}
