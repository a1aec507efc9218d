//! Independent numerical oracles shared by the integration suites.
//!
//! Nothing here calls the closed-form curvature or profile code paths it is
//! used to check: curvature comes from finite differences of metrics pulled
//! back through the chart embedding, profile values from adaptive quadrature
//! of an independently written bump.

#![allow(dead_code)]

use stable_tori::chart::{embed, ChartPoint};

pub type Mat3 = [[f64; 3]; 3];

/// Adaptive Simpson quadrature.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 48)
}

/// The standard bump written out from its definition.
pub fn oracle_zeta(r: f64, t: f64) -> f64 {
    let a = t.abs();
    if a <= r {
        let s = a / r;
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    } else if a <= 2.0 * r {
        let u = (a - r) / r;
        -0.5 * 140.0 * (u * (1.0 - u)).powi(3)
    } else {
        0.0
    }
}

/// `w'(t) = int_0^t zeta` by quadrature, split at the piece boundaries.
pub fn oracle_w1(r: f64, t: f64) -> f64 {
    let f = |s: f64| oracle_zeta(r, s);
    let a = t.abs();
    let mut knots = vec![0.0];
    for k in [r, 2.0 * r] {
        if k < a {
            knots.push(k);
        }
    }
    knots.push(a);
    let v: f64 = knots
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], 1e-15))
        .sum();
    if t < 0.0 {
        -v
    } else {
        v
    }
}

/// `w(t) = int_0^t w'` by nested quadrature.
pub fn oracle_w(r: f64, t: f64) -> f64 {
    let f = |s: f64| oracle_w1(r, s);
    let a = t.abs();
    let mut knots = vec![0.0];
    for k in [r, 2.0 * r] {
        if k < a {
            knots.push(k);
        }
    }
    knots.push(a);
    knots
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], 1e-15))
        .sum()
}

fn embed_at(x: [f64; 3]) -> [f64; 4] {
    embed(ChartPoint { theta: x[0], phi: x[1], t: x[2] }).expect("inside the chart")
}

/// Chart tangent vectors `d embed / dx_k` by fourth-order central differences.
pub fn embed_jacobian(x: [f64; 3], h: f64) -> [[f64; 4]; 3] {
    let mut out = [[0.0; 4]; 3];
    for (k, col) in out.iter_mut().enumerate() {
        let shift = |s: f64| {
            let mut y = x;
            y[k] += s;
            embed_at(y)
        };
        let (p1, m1, p2, m2) = (shift(h), shift(-h), shift(2.0 * h), shift(-2.0 * h));
        for c in 0..4 {
            col[c] = (8.0 * (p1[c] - m1[c]) - (p2[c] - m2[c])) / (12.0 * h);
        }
    }
    out
}

/// Round metric pulled back through the embedding, in `(theta, phi, t)`.
pub fn pullback_metric(x: [f64; 3], h: f64) -> Mat3 {
    let j = embed_jacobian(x, h);
    let mut g = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            g[a][b] = (0..4).map(|c| j[a][c] * j[b][c]).sum();
        }
    }
    g
}

pub fn inverse3(m: &Mat3) -> Mat3 {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
        }
    }
    inv
}

/// Central-difference accuracy of [`fd_ricci`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    Second,
    Fourth,
}

impl Stencil {
    /// `(offset, weight)` pairs for `f'` and `f''` in units of `h`, `h^2`.
    fn weights(self) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        match self {
            Stencil::Second => (
                vec![(1.0, 0.5), (-1.0, -0.5)],
                vec![(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)],
            ),
            Stencil::Fourth => (
                vec![(1.0, 8.0 / 12.0), (-1.0, -8.0 / 12.0), (2.0, -1.0 / 12.0), (-2.0, 1.0 / 12.0)],
                vec![
                    (2.0, -1.0 / 12.0),
                    (1.0, 16.0 / 12.0),
                    (0.0, -30.0 / 12.0),
                    (-1.0, 16.0 / 12.0),
                    (-2.0, -1.0 / 12.0),
                ],
            ),
        }
    }
}

/// Ricci tensor of `metric` at `x` from central differences of step `h`.
///
/// `dg[k][i][j] = d_k g_ij`, `ddg[k][l][i][j] = d_k d_l g_ij`; Christoffel
/// symbols and their derivatives are assembled from these, then
/// `R_ij = d_k G^k_ij - d_j G^k_ki + G^k_kl G^l_ij - G^k_jl G^l_ki`.
pub fn fd_ricci(metric: &dyn Fn([f64; 3]) -> Mat3, x: [f64; 3], h: f64, stencil: Stencil) -> Mat3 {
    let at = |d: [f64; 3]| metric([x[0] + d[0], x[1] + d[1], x[2] + d[2]]);
    let (first_w, second_w) = stencil.weights();
    let g0 = at([0.0; 3]);
    let mut dg = [[[0.0; 3]; 3]; 3];
    let mut ddg = [[[[0.0; 3]; 3]; 3]; 3];
    let accumulate = |target: &mut Mat3, g: &Mat3, w: f64| {
        for i in 0..3 {
            for j in 0..3 {
                target[i][j] += w * g[i][j];
            }
        }
    };
    for k in 0..3 {
        let shift = |s: f64| {
            let mut d = [0.0; 3];
            d[k] = s * h;
            at(d)
        };
        for &(o, w) in &first_w {
            accumulate(&mut dg[k], &shift(o), w / h);
        }
        for &(o, w) in &second_w {
            accumulate(&mut ddg[k][k], &shift(o), w / (h * h));
        }
        for l in (k + 1)..3 {
            let mut mixed = [[0.0; 3]; 3];
            for &(ok, wk) in &first_w {
                for &(ol, wl) in &first_w {
                    let mut d = [0.0; 3];
                    d[k] = ok * h;
                    d[l] = ol * h;
                    accumulate(&mut mixed, &at(d), wk * wl / (h * h));
                }
            }
            ddg[k][l] = mixed;
            ddg[l][k] = mixed;
        }
    }

    let ginv = inverse3(&g0);
    // first-kind symbols [ij, l] and their derivatives
    let first = |i: usize, j: usize, l: usize| 0.5 * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
    let d_first = |m: usize, i: usize, j: usize, l: usize| {
        0.5 * (ddg[m][i][j][l] + ddg[m][j][i][l] - ddg[m][l][i][j])
    };
    // d_m g^{ab} = -g^{ac} d_m g_cd g^{db}
    let d_ginv = |m: usize, a: usize, b: usize| {
        let mut s = 0.0;
        for c in 0..3 {
            for d in 0..3 {
                s -= ginv[a][c] * dg[m][c][d] * ginv[d][b];
            }
        }
        s
    };
    let gamma = |k: usize, i: usize, j: usize| (0..3).map(|l| ginv[k][l] * first(i, j, l)).sum::<f64>();
    let d_gamma = |m: usize, k: usize, i: usize, j: usize| {
        (0..3)
            .map(|l| d_ginv(m, k, l) * first(i, j, l) + ginv[k][l] * d_first(m, i, j, l))
            .sum::<f64>()
    };

    let mut ric = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut s = 0.0;
            for k in 0..3 {
                s += d_gamma(k, k, i, j) - d_gamma(j, k, k, i);
                for l in 0..3 {
                    s += gamma(k, k, l) * gamma(l, i, j) - gamma(k, j, l) * gamma(l, k, i);
                }
            }
            ric[i][j] = s;
        }
    }
    ric
}

/// Gaussian curvature of a 2-D metric `E du^2 + 2F du dv + G dv^2` by the
/// Brioschi formula with central differences.
pub fn fd_gauss_curvature(metric: &dyn Fn(f64, f64) -> [f64; 3], u: f64, v: f64, h: f64) -> f64 {
    let m = |du: f64, dv: f64| metric(u + du, v + dv);
    let c = m(0.0, 0.0);
    let (e, f, g) = (c[0], c[1], c[2]);
    let d = |idx: usize, axis: usize| {
        let (p, q) = if axis == 0 { (m(h, 0.0), m(-h, 0.0)) } else { (m(0.0, h), m(0.0, -h)) };
        (p[idx] - q[idx]) / (2.0 * h)
    };
    let dd = |idx: usize, axis: usize| {
        let (p, q) = if axis == 0 { (m(h, 0.0), m(-h, 0.0)) } else { (m(0.0, h), m(0.0, -h)) };
        (p[idx] - 2.0 * c[idx] + q[idx]) / (h * h)
    };
    let duv = |idx: usize| {
        (m(h, h)[idx] - m(h, -h)[idx] - m(-h, h)[idx] + m(-h, -h)[idx]) / (4.0 * h * h)
    };
    let (eu, ev, fu, fv, gu, gv) = (d(0, 0), d(0, 1), d(1, 0), d(1, 1), d(2, 0), d(2, 1));
    let (evv, guu, fuv) = (dd(0, 1), dd(2, 0), duv(1));
    let a = [
        [-0.5 * evv + fuv - 0.5 * guu, 0.5 * eu, fu - 0.5 * ev],
        [fv - 0.5 * gu, e, f],
        [0.5 * gv, f, g],
    ];
    let b = [[0.0, 0.5 * ev, 0.5 * gu], [0.5 * ev, e, f], [0.5 * gu, f, g]];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    (det(a) - det(b)) / (e * g - f * f).powi(2)
}
