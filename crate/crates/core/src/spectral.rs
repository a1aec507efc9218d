//! Function spaces on the flat Clifford torus and Jacobi-operator spectra.
//!
//! The Clifford torus is the square flat torus of side `sqrt(2) pi`. Its
//! Laplacian has eigenvalues `2 (m^2 + n^2)`, so the first nonzero one is 2.
//! On this torus `|sigma|^2 + Ric(N)` is a constant `c` in both metrics
//! considered here, and the Jacobi operator is `L = Delta + c`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::chart::PERIOD;
use crate::error::{Error, Result};

/// Compensated summation.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Uniform periodic `n x n` lattice on `[0, sqrt(2) pi)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusGrid {
    pub n: usize,
    pub period: f64,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "n",
                value: n as f64,
                reason: "grid side must be even and at least 8",
            });
        }
        Ok(Self { n, period: PERIOD })
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of every node.
    pub fn weight(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    pub fn area(&self) -> f64 {
        neumaier_sum(std::iter::repeat_n(self.weight(), self.len()))
    }

    /// `(theta, phi)` of node `idx`; nodes are stored row-major in `theta`.
    pub fn node(&self, idx: usize) -> (f64, f64) {
        let h = self.spacing();
        ((idx / self.n) as f64 * h, (idx % self.n) as f64 * h)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.nodes().map(|(a, b)| f(a, b)).collect()
    }

    /// Trapezoidal rule, spectrally accurate for smooth periodic integrands.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.weight() * neumaier_sum(self.nodes().map(|(a, b)| f(a, b)))
    }

    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        self.weight() * neumaier_sum(values.iter().copied())
    }

    /// Signed integer wavenumber of FFT slot `i`; the Nyquist slot is `-n/2`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// `2 pi / period`.
    pub fn base_frequency(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Exact symbol of spectral differentiation.
    Fourier,
    /// Five-point periodic finite-difference stencil.
    Fd,
}

impl Backend {
    /// Threshold below which `|mu|` counts as zero.
    pub fn zero_tolerance(self) -> f64 {
        match self {
            Backend::Fourier => 1e-8,
            Backend::Fd => 1e-2,
        }
    }
}

/// `{2 (m^2 + n^2) : |m|, |n| <= mmax}` sorted, with multiplicity.
pub fn laplacian_eigs_analytic(mmax: usize) -> Vec<f64> {
    let m = mmax as i64;
    let mut out: Vec<f64> = (-m..=m)
        .flat_map(|a| (-m..=m).map(move |b| 2.0 * (a * a + b * b) as f64))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

pub fn laplacian_eigs_discrete(g: &TorusGrid, backend: Backend) -> Vec<f64> {
    let n = g.n;
    let one_d: Vec<f64> = match backend {
        Backend::Fourier => {
            let k0 = g.base_frequency();
            (0..n).map(|i| (k0 * g.wavenumber(i) as f64).powi(2)).collect()
        }
        Backend::Fd => {
            let h = g.spacing();
            (0..n)
                .map(|i| {
                    let s = (std::f64::consts::PI * i as f64 / n as f64).sin();
                    4.0 * s * s / (h * h)
                })
                .collect()
        }
    };
    let mut out: Vec<f64> = one_d
        .iter()
        .flat_map(|&a| one_d.iter().map(move |&b| a + b))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub backend: Backend,
    /// Constant potential `c = |sigma|^2 + Ric(N)`.
    pub c: f64,
    /// Lowest eigenvalues of `-L = -Delta - c`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Size of the full discrete spectrum that index and nullity count over.
    pub total_modes: usize,
    pub tol_zero: f64,
    pub index: usize,
    pub nullity: usize,
    pub cmc_stable: bool,
    pub minimal_index: usize,
    pub euler_characteristic: i32,
}

/// Spectrum of the Jacobi operator `Delta + c` on the Clifford torus.
///
/// CMC stability asks `Q(u, u) >= 0` for mean-zero `u`. With constant
/// potential the constants span the bottom eigenspace, so the condition is
/// that the second eigenvalue of `-L` is nonnegative.
pub fn jacobi_spectrum(c: f64, g: &TorusGrid, nmodes: usize, backend: Backend) -> Result<SpectrumReport> {
    if !c.is_finite() {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
            reason: "potential must be finite",
        });
    }
    if nmodes > g.len() {
        return Err(Error::ModeCapacity {
            requested: nmodes,
            capacity: g.len(),
        });
    }
    let tol = backend.zero_tolerance();
    let mu: Vec<f64> = laplacian_eigs_discrete(g, backend)
        .into_iter()
        .map(|l| l - c)
        .collect();
    let index = mu.iter().filter(|&&m| m < -tol).count();
    let nullity = mu.iter().filter(|&&m| m.abs() <= tol).count();
    let cmc_stable = mu.get(1).is_none_or(|&m| m >= -tol);
    Ok(SpectrumReport {
        backend,
        c,
        eigenvalues: mu[..nmodes].to_vec(),
        total_modes: mu.len(),
        tol_zero: tol,
        index,
        nullity,
        cmc_stable,
        minimal_index: index,
        euler_characteristic: 0,
    })
}

/// Spectral differentiation on a [`TorusGrid`].
pub struct FourierDiff {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FourierDiff {
    pub fn new(grid: TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid,
            forward: planner.plan_fft_forward(grid.n),
            inverse: planner.plan_fft_inverse(grid.n),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    fn fft2(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.n;
        for row in data.chunks_mut(n) {
            fft.process(row);
        }
        let mut col = vec![Complex64::default(); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            fft.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }

    /// 2-D DFT of a real field (unnormalized).
    pub fn transform(&self, u: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft2(&mut data, &self.forward);
        data
    }

    /// `(du/dtheta, du/dphi)`; the Nyquist line is differentiated to zero.
    pub fn gradient(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.grid.n;
        if u.len() != self.grid.len() {
            return Err(Error::Input(format!(
                "field has {} values, grid expects {}",
                u.len(),
                self.grid.len()
            )));
        }
        let hat = self.transform(u);
        let k0 = self.grid.base_frequency();
        let symbol = |i: usize| {
            let k = self.grid.wavenumber(i);
            if k == -(n as i64) / 2 {
                0.0
            } else {
                k0 * k as f64
            }
        };
        let norm = 1.0 / (n * n) as f64;
        let mut d_theta = hat.clone();
        let mut d_phi = hat;
        for i in 0..n {
            for j in 0..n {
                let idx = i * n + j;
                d_theta[idx] *= Complex64::new(0.0, symbol(i) * norm);
                d_phi[idx] *= Complex64::new(0.0, symbol(j) * norm);
            }
        }
        self.fft2(&mut d_theta, &self.inverse);
        self.fft2(&mut d_phi, &self.inverse);
        Ok((
            d_theta.into_iter().map(|z| z.re).collect(),
            d_phi.into_iter().map(|z| z.re).collect(),
        ))
    }
}

/// `Q(u, u) = int |grad u|^2 - c int u^2` on the flat Clifford torus.
pub fn q_form(u: &[f64], c: f64, g: &TorusGrid) -> Result<f64> {
    q_form_with(&FourierDiff::new(*g), u, c)
}

pub fn q_form_with(diff: &FourierDiff, u: &[f64], c: f64) -> Result<f64> {
    let (ut, up) = diff.gradient(u)?;
    let g = diff.grid();
    let grad = g.integrate_values(
        &ut.iter().zip(&up).map(|(a, b)| a * a + b * b).collect::<Vec<_>>(),
    );
    let mass = g.integrate_values(&u.iter().map(|x| x * x).collect::<Vec<_>>());
    Ok(grad - c * mass)
}
