//! End-to-end certificate for one perturbed metric and a replay of the
//! stability inequality chain on the Clifford torus.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::curvature::{ricci_diag, scan_nonnegativity, write_scan_csv, NonnegativityScan};
use crate::error::{Error, Result};
use crate::moebius::{balance, center_of_mass, conformal_energy, EnergyReport, GridMap, MobiusParam};
use crate::profile::{make_bump, profile, tail_constant, verify_conditions, ConditionReport, ConformalProfile};
use crate::spectral::{jacobi_spectrum, laplacian_eigs_discrete, Backend, SpectrumReport, TorusGrid};
use crate::surface::{
    conformal_density_residual, torus_geometry, willmore, write_geometry_csv, MetricTag, TorusGeometry,
};

/// Euler characteristic of every surface handled here.
pub const EULER_CHARACTERISTIC: i32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Exact geometric identities.
    pub geometric: f64,
    /// Closed-form curvature values.
    pub curvature: f64,
    /// Quadrature comparisons and balancing.
    pub quadrature: f64,
    /// Discretized (five-point) spectra.
    pub discrete_spectra: f64,
    /// Slack below zero accepted by the Ricci scan.
    pub nonneg_slack: f64,
    /// Resolution of the Ricci scan.
    pub scan_resolution: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            geometric: 1e-12,
            curvature: 1e-10,
            quadrature: 1e-8,
            discrete_spectra: 1e-2,
            nonneg_slack: crate::curvature::NONNEG_SLACK,
            scan_resolution: 4096,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: &'static str,
    pub passed: bool,
    /// Measured discrepancy; for sign conditions the signed value itself.
    pub residual: f64,
    pub tol: f64,
    /// Expected-negative controls pass when the failure is observed.
    pub control: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub checks: Vec<Verdict>,
    pub overall: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative means the inequality fails.
    pub slack: f64,
}

impl Inequality {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, slack: rhs - lhs }
    }
}

/// Both sides of every inequality in the chain, evaluated on the Clifford torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainValues {
    pub metric: MetricTag,
    /// `int (|sigma|^2 + Ric(N)) <= int |grad Psi|^2`.
    pub ineq1: Inequality,
    /// Same with `|sigma|^2` replaced through the Gauss equation.
    pub ineq2: Inequality,
    /// `int (2H^2 + Ric(N)) + 2 W - 4 pi chi <= 2 area(Psi^* g)`.
    pub ineq3: Inequality,
    /// `area(Psi^* g) <= W`.
    pub ineq4: Inequality,
    /// `int (2H^2 + Ric(N)) <= 4 pi chi`.
    pub ineq5: Inequality,
    /// `int (H^2 + Ks) dA`.
    pub willmore: f64,
    pub area: f64,
    pub energy: EnergyReport,
    pub balance_residual: f64,
    pub euler_characteristic: i32,
}

impl ChainValues {
    /// `ineq5.lhs + 2 W - 4 pi chi - 2 area(Psi^* g)`, an identity when
    /// `ineq3` is assembled from the other quantities.
    pub fn reconstruction_residual(&self) -> f64 {
        (self.ineq5.lhs + 2.0 * self.willmore - 4.0 * PI * self.euler_characteristic as f64
            - self.energy.twice_area)
            .abs()
            .max((self.ineq3.lhs - (self.ineq5.lhs + 2.0 * self.willmore)).abs())
    }
}

/// Balancing threshold for maps entering the chain.
pub const CHAIN_BALANCE_TOL: f64 = 1e-8;

/// Replays the chain for the Clifford torus `t = 0` and the map `map`.
///
/// `profile = None` selects the round metric.
pub fn inequality_chain(profile: Option<&ConformalProfile>, map: &GridMap) -> Result<ChainValues> {
    let com = center_of_mass(&map.problem(None)?, &MobiusParam::identity());
    let residual = com.iter().map(|x| x * x).sum::<f64>().sqrt();
    if residual > CHAIN_BALANCE_TOL {
        return Err(Error::Unbalanced { residual, tol: CHAIN_BALANCE_TOL });
    }
    let grid = &map.grid;
    let geo = torus_geometry(profile, 0.0)?;
    let ric_n = match profile {
        Some(p) => ricci_diag(p, 0.0)?.lam_t,
        None => 2.0,
    };
    let chi = EULER_CHARACTERISTIC as f64;
    let dens = geo.area_density;
    let area = grid.integrate(|_, _| dens);
    let sigma_ric = grid.integrate(|_, _| (geo.sigma2 + ric_n) * dens);
    let gauss_ric = grid.integrate(|_, _| (4.0 * geo.h * geo.h + 2.0 * geo.ks - 2.0 * geo.k + ric_n) * dens);
    let h2_ric = grid.integrate(|_, _| (2.0 * geo.h * geo.h + ric_n) * dens);
    let w = grid.integrate(|_, _| geo.willmore_density());
    let energy = conformal_energy(map, &MobiusParam::identity())?;
    let gauss_bonnet = grid.integrate(|_, _| geo.k * dens);
    debug_assert!(gauss_bonnet == 0.0);

    Ok(ChainValues {
        metric: geo.metric,
        ineq1: Inequality::new(sigma_ric, energy.dirichlet),
        ineq2: Inequality::new(gauss_ric, energy.dirichlet),
        ineq3: Inequality::new(h2_ric + 2.0 * w - 4.0 * PI * chi, energy.twice_area),
        ineq4: Inequality::new(0.5 * energy.twice_area, w),
        ineq5: Inequality::new(h2_ric, 4.0 * PI * chi),
        willmore: w,
        area,
        energy,
        balance_residual: residual,
        euler_characteristic: EULER_CHARACTERISTIC,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CliffordChecks {
    pub h_bar: f64,
    pub sigma2_bar: f64,
    pub ric_nn: f64,
    /// Normalized Ricci eigenvalues `(t, theta, phi)` at `t = 0`.
    pub ricci_eigenvalues: [f64; 3],
    pub tail_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WillmorePair {
    pub t: f64,
    pub round: f64,
    pub perturbed: f64,
    pub closed_form: f64,
    pub relative_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectra {
    pub perturbed: SpectrumReport,
    pub round: SpectrumReport,
    pub lambda1_fourier: f64,
    pub lambda1_fd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub r: f64,
    pub n: usize,
    pub backend: Backend,
    pub tolerances: Tolerances,
    pub bump_conditions: ConditionReport,
    pub ricci: NonnegativityScan,
    pub clifford: CliffordChecks,
    pub spectra: Spectra,
    pub willmore: Vec<WillmorePair>,
    pub max_density_residual: f64,
    pub max_gauss_residual: f64,
    pub chain_round: ChainValues,
    pub chain_perturbed: ChainValues,
    pub euler_characteristic: i32,
    pub verdicts: Verdicts,
}

/// `t` values where the Willmore pairs are compared.
pub fn willmore_samples(r: f64) -> Vec<f64> {
    vec![0.0, r, -r, 2.0 * r, -2.0 * r, 0.2, -0.2]
}

/// Dense sample of the chart used for pointwise identities.
pub fn pointwise_samples(r: f64) -> Vec<f64> {
    let mut ts: Vec<f64> = (0..=140).map(|i| -0.7 + 0.01 * i as f64).collect();
    ts.extend(willmore_samples(r));
    ts.extend([0.5 * r, -0.5 * r, 1.5 * r, -1.5 * r]);
    ts
}

const REPORTED_MODES: usize = 13;

fn check(name: &'static str, passed: bool, residual: f64, tol: f64) -> Verdict {
    Verdict { name, passed, residual, tol, control: false }
}

pub fn verify_example(r: f64, n: usize, backend: Backend, tol: &Tolerances) -> Result<VerificationReport> {
    let bump = make_bump(r)?;
    let grid = TorusGrid::new(n)?;
    let prof = profile(&bump);
    let conditions = verify_conditions(&bump, tol.geometric);
    let scan = scan_nonnegativity(&prof, tol.scan_resolution)?;

    let clifford_geo = torus_geometry(Some(&prof), 0.0)?;
    let ric0 = ricci_diag(&prof, 0.0)?;
    let clifford = CliffordChecks {
        h_bar: clifford_geo.h,
        sigma2_bar: clifford_geo.sigma2,
        ric_nn: ric0.lam_t,
        ricci_eigenvalues: ric0.eigenvalues(),
        tail_constant: tail_constant(&prof),
    };

    let c_perturbed = clifford_geo.sigma2 + ric0.lam_t;
    let c_round = torus_geometry(None, 0.0)?.sigma2 + 2.0;
    let spectra = Spectra {
        perturbed: jacobi_spectrum(c_perturbed, &grid, REPORTED_MODES, backend)?,
        round: jacobi_spectrum(c_round, &grid, REPORTED_MODES, backend)?,
        lambda1_fourier: laplacian_eigs_discrete(&grid, Backend::Fourier)[1],
        lambda1_fd: laplacian_eigs_discrete(&grid, Backend::Fd)[1],
    };

    let willmore_pairs = willmore_samples(r)
        .into_iter()
        .map(|t| {
            let round = willmore(None, t, &grid)?;
            let perturbed = willmore(Some(&prof), t, &grid)?;
            Ok(WillmorePair {
                t,
                round,
                perturbed,
                closed_form: 2.0 * PI * PI / (2.0 * t).cos(),
                relative_difference: (perturbed - round).abs() / round,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut max_density: f64 = 0.0;
    let mut max_gauss: f64 = 0.0;
    for t in pointwise_samples(r) {
        max_density = max_density.max(conformal_density_residual(&prof, t)?);
        let round: TorusGeometry = torus_geometry(None, t)?;
        let bar = torus_geometry(Some(&prof), t)?;
        max_gauss = max_gauss.max(round.gauss_residual()).max(bar.gauss_residual());
    }

    let map = GridMap::clifford(grid);
    let chain_round = inequality_chain(None, &map)?;
    let chain_perturbed = inequality_chain(Some(&prof), &map)?;
    let balanced = balance(&map.problem(None)?, tol.quadrature, 200);

    let mut checks = Vec::new();
    checks.push(check(
        "bump_conditions",
        conditions.all_passed(),
        conditions.zero_integral.residual,
        tol.geometric,
    ));
    checks.push(check(
        "ricci_nonnegative",
        scan.feasible,
        scan.min_eigenvalue,
        tol.nonneg_slack,
    ));
    checks.push(check("clifford_minimal", clifford.h_bar.abs() <= tol.geometric, clifford.h_bar, tol.geometric));
    checks.push(check(
        "clifford_sigma2",
        (clifford.sigma2_bar - 2.0).abs() <= tol.geometric,
        clifford.sigma2_bar - 2.0,
        tol.geometric,
    ));
    checks.push(check("clifford_ric_normal", clifford.ric_nn.abs() <= tol.curvature, clifford.ric_nn, tol.curvature));
    let other = ric0.lam_th.min(ric0.lam_ph);
    checks.push(check("ricci_single_null_direction", other > tol.curvature, other, tol.curvature));
    checks.push(check(
        "tail_constant",
        scan.tail_exact && clifford.tail_constant > 0.0,
        (scan.tail_eigenvalue - 2.0 / clifford.tail_constant).abs(),
        tol.geometric,
    ));
    let sp = &spectra.perturbed;
    checks.push(check(
        "perturbed_index_one_cmc_stable",
        sp.index == 1 && sp.nullity == 4 && sp.cmc_stable,
        sp.eigenvalues.get(1).copied().unwrap_or(f64::NAN),
        sp.tol_zero,
    ));
    let sr = &spectra.round;
    checks.push(Verdict {
        name: "round_cmc_unstable",
        passed: sr.index == 5 && !sr.cmc_stable,
        residual: sr.eigenvalues.get(1).copied().unwrap_or(f64::NAN),
        tol: sr.tol_zero,
        control: true,
    });
    checks.push(check(
        "lambda1_fourier",
        (spectra.lambda1_fourier - 2.0).abs() <= tol.geometric,
        spectra.lambda1_fourier - 2.0,
        tol.geometric,
    ));
    checks.push(check(
        "lambda1_fd",
        (spectra.lambda1_fd - 2.0).abs() <= tol.discrete_spectra,
        spectra.lambda1_fd - 2.0,
        tol.discrete_spectra,
    ));
    let w_rel = willmore_pairs.iter().map(|p| p.relative_difference).fold(0.0, f64::max);
    checks.push(check("willmore_invariance", w_rel <= tol.quadrature, w_rel, tol.quadrature));
    let w_closed = willmore_pairs.iter().map(|p| (p.round - p.closed_form).abs()).fold(0.0, f64::max);
    checks.push(check("willmore_closed_form", w_closed <= tol.curvature, w_closed, tol.curvature));
    checks.push(check("density_invariance", max_density <= tol.geometric, max_density, tol.geometric));
    checks.push(check("gauss_equation", max_gauss <= tol.geometric, max_gauss, tol.geometric));

    let eq1 = chain_perturbed.ineq1.slack.abs();
    checks.push(check("chain_ineq1_equality", eq1 <= tol.quadrature, eq1, tol.quadrature));
    let eq5 = chain_perturbed.ineq5.slack.abs();
    checks.push(check("chain_ineq5_equality", eq5 <= tol.quadrature, eq5, tol.quadrature));
    let rewrite = (chain_perturbed.ineq2.lhs - chain_perturbed.ineq1.lhs)
        .abs()
        .max((chain_round.ineq2.lhs - chain_round.ineq1.lhs).abs());
    checks.push(check("chain_gauss_rewrite", rewrite <= tol.curvature, rewrite, tol.curvature));
    let recon = chain_perturbed.reconstruction_residual();
    checks.push(check("chain_ineq3_reconstruction", recon <= tol.quadrature, recon, tol.quadrature));
    checks.push(Verdict {
        name: "round_chain_violation",
        passed: chain_round.ineq1.slack < -tol.quadrature,
        residual: chain_round.ineq1.slack,
        tol: tol.quadrature,
        control: true,
    });
    let e = chain_perturbed.energy;
    checks.push(check(
        "conformal_energy_identity",
        e.residual() <= tol.quadrature && (e.dirichlet - 4.0 * PI * PI).abs() <= tol.curvature,
        e.residual().max((e.dirichlet - 4.0 * PI * PI).abs()),
        tol.quadrature,
    ));
    let (bal_ok, bal_res) = match &balanced {
        Ok(out) => (out.residual <= tol.quadrature && out.param.norm() <= tol.curvature, out.residual),
        Err(_) => (false, f64::NAN),
    };
    checks.push(check("clifford_balanced", bal_ok, bal_res, tol.quadrature));

    let overall = checks.iter().all(|c| c.passed);
    Ok(VerificationReport {
        r,
        n,
        backend,
        tolerances: *tol,
        bump_conditions: conditions,
        ricci: scan,
        clifford,
        spectra,
        willmore: willmore_pairs,
        max_density_residual: max_density,
        max_gauss_residual: max_gauss,
        chain_round,
        chain_perturbed,
        euler_characteristic: EULER_CHARACTERISTIC,
        verdicts: Verdicts { checks, overall },
    })
}

pub fn report_json(rep: &VerificationReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(rep)?)
}

/// Writes `report.json` and the CSV side files into `dir`.
pub fn emit_report(rep: &VerificationReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = report_json(rep)?;
    let path = dir.join("report.json");
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;

    let prof = profile(&make_bump(rep.r)?);
    let grid = TorusGrid::new(rep.n)?;
    let mut buf = Vec::new();
    prof.write_csv(&mut buf, (2.5 * rep.r).min(0.78), 1001)
        .map_err(|e| Error::io("profile.csv", e))?;
    write_file(&dir.join("profile.csv"), &buf)?;

    let mut buf = Vec::new();
    write_scan_csv(&prof, rep.tolerances.scan_resolution, &mut buf)?;
    write_file(&dir.join("ricci.csv"), &buf)?;

    let ts: Vec<f64> = pointwise_samples(rep.r);
    for (name, p) in [("geometry_round.csv", None), ("geometry_perturbed.csv", Some(&prof))] {
        let mut buf = Vec::new();
        write_geometry_csv(p, &ts, &grid, &mut buf)?;
        write_file(&dir.join(name), &buf)?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
