//! Systems `Gamma(z_i) = A_i(z_1, ..., z_n)` on a polydisk at infinity.
//!
//! A starting tuple `xi` is chosen so that every `|Gamma(xi_i)|` equals
//! `|A_j(xi)| / 4` for the slowest-growing `A_j`. Each coordinate then gets
//! its own contour `K(beta_i, R_i)`, and the product of the enclosed regions
//! is checked for the Rouché inequality on sampled boundary points. Boundary
//! sampling makes this a numerical certificate, reported as `"sampled"`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebraic::{
    estimate_asymptotics, perturbation_radius, sampled_perturbation_ratio, AlgebraicFunction, AsymptoticData,
    PolydiskDomain,
};
use crate::contour::{build_k, Contour, KCurve};
use crate::error::{Error, Result};
use crate::gamma::{digamma, gamma, gamma_weierstrass_oracle, ln_gamma, ln_gamma_psi, principal_arg};
use crate::level_curves::Tracer;
use crate::numeric::{bisect, halton2};

pub const CERTIFICATION_LEVEL: &str = "sampled";
pub const ORACLE_TOL: f64 = 1e-4;
const GROWTH_PROBES: [f64; 3] = [1e3, 1e4, 1e5];

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub functions: Vec<AlgebraicFunction>,
    pub domain: PolydiskDomain,
    pub asym: Vec<AsymptoticData>,
    /// Per coordinate, how many full turns of `arg Gamma` to advance `xi_i`
    /// along its level curve; distinct offsets give disjoint factors.
    pub cycle_offsets: Vec<usize>,
}

impl SystemSpec {
    pub fn new(functions: Vec<AlgebraicFunction>, domain: PolydiskDomain, seed: u64) -> Result<Self> {
        let n = domain.n();
        if functions.len() != n {
            return Err(Error::Invalid(format!("{} functions for {n} coordinates", functions.len())));
        }
        let asym = functions
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if f.arity() != n {
                    return Err(Error::Invalid(format!("A_{} has arity {} instead of {n}", i + 1, f.arity())));
                }
                estimate_asymptotics(f, &domain, seed.wrapping_add(i as u64))
            })
            .collect::<Result<_>>()?;
        Ok(SystemSpec {
            functions,
            domain,
            asym,
            cycle_offsets: vec![0; n],
        })
    }

    pub fn parse(sources: &[&str], domain: PolydiskDomain, seed: u64) -> Result<Self> {
        let n = domain.n();
        let functions = sources
            .iter()
            .map(|s| AlgebraicFunction::parse(s, n))
            .collect::<Result<_>>()?;
        Self::new(functions, domain, seed)
    }

    pub fn with_cycle_offsets(mut self, offsets: Vec<usize>) -> Result<Self> {
        if offsets.len() != self.n() {
            return Err(Error::Invalid("one cycle offset per coordinate is needed".into()));
        }
        self.cycle_offsets = offsets;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.domain.n()
    }

    pub fn eval(&self, i: usize, z: &[Complex64]) -> Result<Complex64> {
        self.functions[i].evaluate(z)
    }

    /// Index of the function of least growth, from `|A_i|` on the central
    /// ray at `|z_n| = 1e3, 1e4, 1e5`; ties go to the smaller index.
    pub fn min_growth_index(&self) -> Result<usize> {
        let n = self.n();
        let mut table = vec![[0.0f64; 3]; n];
        for (p, &t) in GROWTH_PROBES.iter().enumerate() {
            let z = self.domain.ray_point(t);
            for (i, row) in table.iter_mut().enumerate() {
                row[p] = self.eval(i, &z)?.norm();
            }
        }
        let dominated = |j: usize| (0..n).all(|i| (0..3).all(|p| table[j][p] <= table[i][p]));
        if let Some(j) = (0..n).find(|&j| dominated(j)) {
            return Ok(j);
        }
        let last = GROWTH_PROBES.len() - 1;
        let mut j = 0;
        for i in 1..n {
            if table[i][last] < table[j][last] {
                j = i;
            }
        }
        Ok(j)
    }

    fn shift(&self, i: usize, j: usize) -> i32 {
        self.asym[i].d - self.asym[j].d
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// `min_i |xi_i| / (5 b_i / (a_j (c_i - eps)^(d_i - d_j + 1)))`
    pub size_ratio: f64,
    /// Largest sampled `|A_i(xi + w) - A_i(xi)| / |A_i(xi)|`.
    pub perturbation_ratio: f64,
    /// Largest `| |Gamma(xi_i)| / (|A_j(xi)|/4) - 1 |`.
    pub level_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiSelection {
    pub xi: Vec<Complex64>,
    pub j: usize,
    /// `|A_j(xi)| / 4`
    pub tau: f64,
    pub conditions: ConditionReport,
}

fn selection_failure(condition: &str, detail: String) -> Error {
    Error::SelectionFailure {
        condition: condition.into(),
        detail,
    }
}

/// `log|Gamma(z)| - log(tau)`
fn level_gap(z: Complex64, ln_tau: f64) -> f64 {
    ln_gamma(z).map(|l| l.re - ln_tau).unwrap_or(f64::NAN)
}

/// Point `x + iy` with `|Gamma| = tau`, by bisection in `y`.
fn vertical_crossing(x: f64, ln_tau: f64) -> Result<Complex64> {
    let f = |y: f64| level_gap(Complex64::new(x, y), ln_tau);
    if !(f(1e-3) > 0.0) {
        return Err(selection_failure("(iii)", format!("|Gamma| stays below the level on Re z = {x}")));
    }
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e7 {
            return Err(selection_failure("(iii)", format!("no crossing above Re z = {x}")));
        }
    }
    let y = bisect(f, 1e-3, hi, 1e-15 * hi).ok_or_else(|| selection_failure("(iii)", "bisection failed".into()))?;
    Ok(Complex64::new(x, y))
}

/// Point `base + s` with `|Gamma| = tau` and `|s| <= reach`.
fn horizontal_crossing(base: Complex64, reach: f64, ln_tau: f64) -> Option<Complex64> {
    let f = |s: f64| level_gap(base + s, ln_tau);
    let s = bisect(f, -reach, reach, 1e-15 * base.norm())?;
    Some(base + s)
}

/// Lower bound on `Re z_n` at which the selection starts.
pub fn selection_start(spec: &SystemSpec, seed: u64) -> Result<f64> {
    let j = spec.min_growth_index()?;
    let mut x: f64 = 16.0f64.max(1.0 / spec.domain.epsilon);
    let mut reach: f64 = 0.0;
    for i in 0..spec.n() {
        let s = spec.shift(i, j);
        x = x.max(16.0f64.max(s as f64 + 3.0));
        x = x.max(spec.asym[i].validity_radius);
        reach = reach.max(s as f64 + 3.0);
    }
    for (i, f) in spec.functions.iter().enumerate() {
        x = x.max(perturbation_radius(f, reach.max(1.0), &spec.domain, seed.wrapping_add(i as u64))?);
    }
    Ok(x)
}

/// Chooses `xi` with `Re xi_n = x` satisfying the three selection
/// conditions: a size bound, a perturbation bound, and
/// `|Gamma(xi_i)| = |A_j(xi)| / 4` for every `i`.
pub fn select_xi(spec: &SystemSpec, x: f64, seed: u64) -> Result<XiSelection> {
    let n = spec.n();
    let j = spec.min_growth_index()?;
    let eps = spec.domain.epsilon;
    let tracer = Tracer::default();
    let mut xi: Vec<Complex64> = spec.domain.c.iter().map(|&c| Complex64::new(c * x, c * x)).collect();
    let mut ln_tau = (spec.eval(j, &xi)?.norm() / 4.0).ln();
    for _ in 0..200 {
        let zn = vertical_crossing(x, ln_tau)?;
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        next[n - 1] = zn;
        for k in 0..n - 1 {
            let base = zn * spec.domain.c[k];
            next[k] = horizontal_crossing(base, 0.9 * eps * zn.norm(), ln_tau).ok_or_else(|| {
                selection_failure("(iii)", format!("coordinate {} has no level crossing in its ball", k + 1))
            })?;
        }
        for k in 0..n {
            let turns = spec.cycle_offsets[k];
            if turns > 0 {
                next[k] = tracer.modulus_arc(next[k], 2.0 * PI * turns as f64)?.last().0;
            }
        }
        let tau_next = (spec.eval(j, &next)?.norm() / 4.0).ln();
        xi = next;
        let moved = (tau_next - ln_tau).abs();
        ln_tau = tau_next;
        if moved <= 1e-15 * ln_tau.abs().max(1.0) {
            break;
        }
    }

    let tau = ln_tau.exp();
    let level_residual = xi
        .iter()
        .map(|z| (ln_gamma(*z).map(|l| l.re).unwrap_or(f64::NAN) - ln_tau).exp_m1().abs())
        .fold(0.0, f64::max);
    if !(level_residual < 1e-8) {
        return Err(selection_failure("(iii)", format!("level residual {level_residual:.3e}")));
    }
    for (i, z) in xi.iter().enumerate() {
        let r = 16.0f64.max(spec.shift(i, j) as f64 + 3.0);
        if !(z.re >= r && z.im >= r) {
            return Err(selection_failure("(iii)", format!("xi_{} = {z} is outside the quadrant Re, Im >= {r}", i + 1)));
        }
    }
    if !spec.domain.contains(&xi) {
        return Err(selection_failure("domain", format!("xi = {xi:?} is outside the polydisk")));
    }
    let aj = spec.asym[j].a;
    let mut size_ratio = f64::INFINITY;
    for (i, z) in xi.iter().enumerate() {
        let c = spec.domain.c[i];
        let bound = 5.0 * spec.asym[i].b / (aj * (c - eps).powi(spec.shift(i, j) + 1));
        size_ratio = size_ratio.min(z.norm() / bound);
    }
    if !(size_ratio >= 1.0) {
        return Err(selection_failure("(i)", format!("|xi| falls short of the size bound (ratio {size_ratio:.3})")));
    }
    let reach = (0..n).map(|i| spec.shift(i, j) as f64 + 3.0).fold(1.0, f64::max);
    let perturbation_ratio = perturbation_at(spec, &xi, reach, seed)?;
    if !(perturbation_ratio < 0.25) {
        return Err(selection_failure(
            "(ii)",
            format!("A moves by {perturbation_ratio:.3} of its size within distance {reach}"),
        ));
    }
    Ok(XiSelection {
        xi,
        j,
        tau,
        conditions: ConditionReport {
            size_ratio,
            perturbation_ratio,
            level_residual,
        },
    })
}

fn perturbation_at(spec: &SystemSpec, xi: &[Complex64], reach: f64, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut worst: f64 = 0.0;
    for (i, f) in spec.functions.iter().enumerate() {
        let base = f.evaluate(xi)?;
        for _ in 0..64 {
            let z: Vec<Complex64> = xi
                .iter()
                .map(|x| x + Complex64::from_polar(reach * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI)))
                .collect();
            worst = worst.max((f.evaluate(&z)? - base).norm() / base.norm());
        }
        let _ = i;
    }
    Ok(worst)
}

/// One factor `K(beta_i, R_i)` of the product region.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub k: KCurve,
    pub log_beta: Complex64,
    /// `A_i(xi)`
    pub target: Complex64,
    pub chi: Complex64,
    pub log_chi: Complex64,
}

impl Factor {
    pub fn contour(&self) -> &Contour {
        &self.k.contour
    }

    pub fn inner_radius(&self) -> f64 {
        self.k.r
    }

    pub fn outer_radius(&self) -> f64 {
        self.k.big_r
    }

    /// Point whose log Gamma is `(log r + s (log R - log r), v_beta + 2 pi t)`.
    pub fn log_point(&self, s: f64, t: f64) -> Result<Complex64> {
        let tracer = Tracer::default();
        let rise = s * (self.k.big_r.ln() - self.log_beta.re);
        let up = tracer.walk_length(self.k.beta, self.log_beta, Complex64::new(1.0, 0.0), rise)?;
        let (p, lp) = up.last();
        Ok(tracer.walk_length(p, lp, Complex64::i(), 2.0 * PI * t)?.last().0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductRegion {
    pub factors: Vec<Factor>,
    pub xi: Vec<Complex64>,
    pub j: usize,
}

pub fn build_product_region(spec: &SystemSpec, sel: &XiSelection) -> Result<ProductRegion> {
    build_product_region_with(spec, sel, None)
}

/// As [`build_product_region`], with explicit outer radii `R_i` instead of
/// `|Gamma(beta_i + d_i - d_j + 2)|`.
pub fn build_product_region_with(spec: &SystemSpec, sel: &XiSelection, radii: Option<&[f64]>) -> Result<ProductRegion> {
    let n = spec.n();
    let tracer = Tracer::default();
    let mut factors = Vec::with_capacity(n);
    for i in 0..n {
        let target = spec.eval(i, &sel.xi)?;
        let beta = tracer.point_on_modulus_arc(sel.xi[i], principal_arg((-target).arg()))?;
        let log_beta = ln_gamma(beta)?;
        let big_r = match radii {
            Some(r) => r[i],
            None => {
                let steps = spec.shift(i, sel.j) + 2;
                if steps < 0 {
                    return Err(Error::Invalid(format!("A_{} grows slower than A_j", i + 1)));
                }
                // |Gamma(beta + m)| = |Gamma(beta)| prod_{k<m} |beta + k|
                let log_r = (0..steps).map(|m| (beta + m as f64).norm().ln()).sum::<f64>() + log_beta.re;
                log_r.exp()
            }
        };
        let k = build_k(beta, big_r)?;
        let log_chi = Complex64::new(target.norm().ln(), log_beta.im + PI);
        let chi = if target.norm() > k.r && target.norm() < big_r {
            let up = tracer.walk_length(beta, log_beta, Complex64::new(1.0, 0.0), log_chi.re - log_beta.re)?;
            let (p, lp) = up.last();
            tracer.walk_length(p, Complex64::new(log_chi.re, lp.im), Complex64::i(), PI)?.last().0
        } else {
            beta
        };
        factors.push(Factor {
            k,
            log_beta,
            target,
            chi,
            log_chi,
        });
    }
    Ok(ProductRegion {
        factors,
        xi: sel.xi.clone(),
        j: sel.j,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoucheReport {
    pub passed: bool,
    /// Smallest `(|Gamma(z_k) - A_k(xi)| - |A_k(z) - A_k(xi)|) / |A_k(xi)|`.
    pub worst_margin: f64,
    pub worst_factor: usize,
    pub worst_point: Vec<Complex64>,
    pub samples: usize,
    /// Whether `r_k < |A_k(xi)| < R_k` for each factor.
    pub annulus: Vec<bool>,
    pub slack: f64,
}

/// Closure samples of a factor: its four corners and `count` Halton points of
/// the interior.
fn factor_samples(f: &Factor, count: usize) -> Result<Vec<Complex64>> {
    let mut out = vec![f.k.beta, f.k.beta_star, f.k.rho, f.k.rho_star];
    for idx in 1..=count as u64 {
        let (s, t) = halton2(idx);
        out.push(f.log_point(s, t)?);
    }
    Ok(out)
}

pub fn verify_rouche_boundary(spec: &SystemSpec, region: &ProductRegion, samples_per_factor: usize) -> Result<RoucheReport> {
    verify_rouche_boundary_with(spec, region, samples_per_factor, 0.05)
}

/// Checks `|A_k(z) - A_k(xi)| < (1 - slack) |Gamma(z_k) - A_k(xi)|` with
/// `z_k` on the contour of factor `k` and the other coordinates on a sample
/// grid of their factors.
pub fn verify_rouche_boundary_with(
    spec: &SystemSpec,
    region: &ProductRegion,
    samples_per_factor: usize,
    slack: f64,
) -> Result<RoucheReport> {
    let n = spec.n();
    let inner: Vec<Vec<Complex64>> = region
        .factors
        .iter()
        .map(|f| factor_samples(f, samples_per_factor))
        .collect::<Result<_>>()?;
    let annulus: Vec<bool> = region
        .factors
        .iter()
        .map(|f| f.target.norm() > f.inner_radius() && f.target.norm() < f.outer_radius())
        .collect();
    let mut report = RoucheReport {
        passed: annulus.iter().all(|&a| a),
        worst_margin: f64::INFINITY,
        worst_factor: 0,
        worst_point: region.xi.clone(),
        samples: 0,
        annulus,
        slack,
    };
    for k in 0..n {
        let f = &region.factors[k];
        let target = f.target;
        let scale = target.norm();
        let others: Vec<usize> = (0..n).filter(|&m| m != k).collect();
        let combos: usize = others.iter().map(|&m| inner[m].len()).product();
        let boundary = f.contour().vertices();
        let rows: Vec<(f64, bool, Vec<Complex64>)> = boundary
            .par_iter()
            .map(|&zk| {
                let dist = (gamma(zk)?.value - target).norm();
                let mut worst = (f64::INFINITY, true, Vec::new());
                let mut z = region.xi.clone();
                z[k] = zk;
                for mut c in 0..combos {
                    for &m in &others {
                        let len = inner[m].len();
                        z[m] = inner[m][c % len];
                        c /= len;
                    }
                    let pert = (spec.eval(k, &z)? - target).norm();
                    let margin = (dist - pert) / scale;
                    let ok = pert < (1.0 - slack) * dist;
                    if margin < worst.0 || (!ok && worst.1) {
                        worst = (margin, ok && worst.1, z.clone());
                    } else if !ok {
                        worst.1 = false;
                    }
                }
                Ok(worst)
            })
            .collect::<Result<_>>()?;
        report.samples += boundary.len() * combos;
        for (margin, ok, z) in rows {
            if !ok {
                report.passed = false;
            }
            if margin < report.worst_margin {
                report.worst_margin = margin;
                report.worst_factor = k;
                report.worst_point = z;
            }
        }
    }
    if !(report.worst_margin > 0.0) {
        report.passed = false;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemOptions {
    pub count: usize,
    pub max_modulus: f64,
    pub seed: u64,
    pub samples_per_factor: usize,
    pub root_tol: f64,
    pub slack: f64,
    /// Increment of `Re xi_n` between successive regions.
    pub x_step: f64,
    pub max_attempts: usize,
}

impl Default for SystemOptions {
    fn default() -> Self {
        SystemOptions {
            count: 3,
            max_modulus: 1e4,
            seed: 0x5eed,
            samples_per_factor: 8,
            root_tol: 1e-8,
            slack: 0.05,
            x_step: 3.0,
            max_attempts: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSolution {
    pub z: Vec<Complex64>,
    /// `max_k |Gamma(z_k) - A_k(z)| / |A_k(z)|`
    pub residual: f64,
    /// The same quantity with Gamma from a truncated Weierstrass product.
    pub oracle_residual: f64,
    pub xi: Vec<Complex64>,
    pub margin: f64,
    pub in_domain: bool,
    pub inside_factors: bool,
    pub factor_bboxes: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSolutions {
    pub solutions: Vec<SystemSolution>,
    pub certification_level: &'static str,
    /// Regions skipped because their boundary check failed.
    pub rejected_regions: usize,
}

fn log_residuals(spec: &SystemSpec, region: &ProductRegion, z: &[Complex64]) -> Result<(DVector<Complex64>, DMatrix<Complex64>)> {
    let n = spec.n();
    let mut h = DVector::zeros(n);
    let mut jac = DMatrix::zeros(n, n);
    for k in 0..n {
        let f = &region.factors[k];
        let (lg, psi) = ln_gamma_psi(z[k])?;
        let ak = spec.eval(k, z)?;
        h[k] = lg - f.log_chi - (ak / f.target).ln();
        for m in 0..n {
            let d = spec.functions[k].partial(z, m)? / ak;
            jac[(k, m)] = if m == k { psi - d } else { -d };
        }
    }
    Ok((h, jac))
}

fn inside_all(region: &ProductRegion, z: &[Complex64]) -> bool {
    region.factors.iter().zip(z).all(|(f, zk)| f.contour().contains(*zk))
}

/// Damped Newton on `log Gamma(z_k) - log Gamma(chi_k) - Log(A_k(z) / A_k(xi))`,
/// kept inside the product region.
fn newton(spec: &SystemSpec, region: &ProductRegion, seed: Vec<Complex64>) -> Result<Vec<Complex64>> {
    let mut z = seed;
    let (mut h, mut jac) = log_residuals(spec, region, &z)?;
    for _ in 0..80 {
        let size = h.camax();
        if size <= 1e-15 {
            return Ok(z);
        }
        let step = jac
            .clone()
            .lu()
            .solve(&h)
            .ok_or_else(|| Error::NewtonDivergence("singular Jacobian".into()))?;
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let trial: Vec<Complex64> = z.iter().zip(step.iter()).map(|(a, s)| a - s * lambda).collect();
            if inside_all(region, &trial) {
                if let Ok((ht, jt)) = log_residuals(spec, region, &trial) {
                    if ht.camax() < size {
                        z = trial;
                        h = ht;
                        jac = jt;
                        moved = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !moved {
            break;
        }
        let tiny = step.iter().zip(&z).all(|(s, zk)| (s * lambda).norm() <= 1e-16 * zk.norm());
        if tiny {
            break;
        }
    }
    Ok(z)
}

pub fn relative_residual(spec: &SystemSpec, z: &[Complex64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..spec.n() {
        let ak = spec.eval(k, z)?;
        let q = (ln_gamma(z[k])? - ak.ln()).exp();
        worst = worst.max((q - 1.0).norm());
    }
    Ok(worst)
}

/// Number of Weierstrass factors giving relative truncation error near
/// `ORACLE_TOL / 2` at `z`.
pub fn oracle_terms(z: Complex64) -> u64 {
    ((z.norm_sqr() * 2.0 / ORACLE_TOL).ceil() as u64).max(1_000_000)
}

pub fn oracle_residual(spec: &SystemSpec, z: &[Complex64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..spec.n() {
        let ak = spec.eval(k, z)?;
        let g = gamma_weierstrass_oracle(z[k], oracle_terms(z[k]))?;
        worst = worst.max((g - ak).norm() / ak.norm());
    }
    Ok(worst)
}

/// Solves the system in one verified region.
pub fn solve_in_region(spec: &SystemSpec, region: &ProductRegion, report: &RoucheReport, opts: &SystemOptions) -> Result<SystemSolution> {
    if !report.passed {
        return Err(Error::SeparationFailure {
            check: "multivariate Rouché boundary".into(),
            segment: format!("factor {}", report.worst_factor + 1),
            at: report.worst_point[report.worst_factor],
            ratio: report.worst_margin,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let tracer = Tracer::default();
    let mut last = String::new();
    for attempt in 0..6 {
        let seed: Vec<Complex64> = if attempt == 0 {
            region.factors.iter().map(|f| f.chi).collect()
        } else {
            region
                .factors
                .iter()
                .map(|f| {
                    let t = 0.5 + rng.gen_range(-0.3..0.3);
                    let span = f.outer_radius().ln() - f.log_beta.re;
                    let s = (f.log_chi.re - f.log_beta.re) / span + rng.gen_range(-0.2..0.2);
                    let _ = &tracer;
                    f.log_point(s.clamp(0.05, 0.95), t).unwrap_or(f.chi)
                })
                .collect()
        };
        let z = newton(spec, region, seed)?;
        let residual = relative_residual(spec, &z)?;
        if residual < opts.root_tol && inside_all(region, &z) {
            return Ok(SystemSolution {
                residual,
                oracle_residual: oracle_residual(spec, &z)?,
                in_domain: spec.domain.contains(&z),
                inside_factors: true,
                xi: region.xi.clone(),
                margin: report.worst_margin,
                factor_bboxes: region.factors.iter().map(|f| f.contour().bbox()).collect(),
                z,
            });
        }
        last = format!("attempt {attempt} ended at {z:?} with residual {residual:.3e}");
    }
    Err(Error::NewtonDivergence(last))
}

/// Certified solutions from successive regions moving outward along
/// `Re xi_n`, until `opts.count` distinct solutions are found.
pub fn solve_system(spec: &SystemSpec, opts: &SystemOptions) -> Result<SystemSolutions> {
    let mut x = selection_start(spec, opts.seed)?;
    let mut out = SystemSolutions {
        solutions: Vec::new(),
        certification_level: CERTIFICATION_LEVEL,
        rejected_regions: 0,
    };
    let mut last_err = None;
    for _ in 0..opts.max_attempts {
        if out.solutions.len() >= opts.count {
            break;
        }
        let sel = match select_xi(spec, x, opts.seed) {
            Ok(s) => s,
            Err(e) => {
                last_err = Some(e);
                x += opts.x_step;
                continue;
            }
        };
        if sel.xi[spec.n() - 1].norm() > opts.max_modulus {
            break;
        }
        let found = build_product_region(spec, &sel).and_then(|region| {
            let report = verify_rouche_boundary_with(spec, &region, opts.samples_per_factor, opts.slack)?;
            solve_in_region(spec, &region, &report, opts)
        });
        match found {
            Ok(sol) => {
                let fresh = out
                    .solutions
                    .iter()
                    .all(|s| s.z.iter().zip(&sol.z).any(|(a, b)| (a - b).norm() > 1e-6));
                if fresh {
                    out.solutions.push(sol);
                }
            }
            Err(e) => {
                if matches!(e, Error::SeparationFailure { .. }) {
                    out.rejected_regions += 1;
                }
                last_err = Some(e);
            }
        }
        x += opts.x_step;
    }
    if out.solutions.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::NonConvergence("no region was attempted".into())));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicPoint {
    /// `z_1, ..., z_n` with `Gamma(z_i) = z_(i+1)` and `Gamma(z_n) = z_1`.
    pub orbit: Vec<Complex64>,
    /// `|Gamma^n(z_1) - z_1|`
    pub residual: f64,
    /// `min_{m < n} |Gamma^m(z_1) - z_1|`
    pub minimality: f64,
    pub system_residual: f64,
    pub margin: f64,
}

pub fn iterate_gamma(z: Complex64, times: usize) -> Result<Complex64> {
    let mut w = z;
    for _ in 0..times {
        w = gamma(w)?.value;
    }
    Ok(w)
}

/// The cyclic system `Gamma(z_i) = z_(i+1 mod n)`, with factors advanced by
/// distinct numbers of turns so that orbit points lie in disjoint regions.
pub fn cyclic_spec(period: usize, seed: u64) -> Result<SystemSpec> {
    if period == 0 {
        return Err(Error::Invalid("period must be at least 1".into()));
    }
    let sources: Vec<String> = (0..period).map(|i| format!("z{}", (i + 1) % period + 1)).collect();
    let refs: Vec<&str> = sources.iter().map(String::as_str).collect();
    SystemSpec::parse(&refs, PolydiskDomain::quadrant(period), seed)?.with_cycle_offsets((0..period).collect())
}

/// Points of exact period `period`, at most `count` of them.
pub fn periodic_points(period: usize, count: usize) -> Result<Vec<PeriodicPoint>> {
    periodic_points_with(period, &SystemOptions { count, ..SystemOptions::default() })
}

pub fn periodic_points_with(period: usize, opts: &SystemOptions) -> Result<Vec<PeriodicPoint>> {
    let spec = cyclic_spec(period, opts.seed)?;
    let sols = solve_system(&spec, opts)?;
    let mut out = Vec::new();
    for s in sols.solutions {
        let z = s.z[0];
        let residual = (iterate_gamma(z, period)? - z).norm();
        let mut minimality = f64::INFINITY;
        for m in 1..period {
            minimality = minimality.min((iterate_gamma(z, m)? - z).norm());
        }
        if minimality > 1e-4 {
            out.push(PeriodicPoint {
                orbit: s.z,
                residual,
                minimality,
                system_residual: s.residual,
                margin: s.margin,
            });
        }
    }
    Ok(out)
}

/// The fixed point of Gamma on `(3, 4)`, by Newton on `log Gamma(x) - log x`.
pub fn real_fixed_point() -> Result<f64> {
    let mut x: f64 = 3.5;
    for _ in 0..50 {
        let z = Complex64::new(x, 0.0);
        let f = ln_gamma(z)?.re - x.ln();
        let df = digamma(z)?.re - 1.0 / x;
        let step = f / df;
        x -= step;
        if step.abs() <= 1e-16 * x {
            break;
        }
    }
    if !(3.0..4.0).contains(&x) {
        return Err(Error::NewtonDivergence(format!("fixed point iteration left (3, 4) at {x}")));
    }
    Ok(x)
}

/// Samples of `Gamma(z_n) = A(z)` on the polydisk that a caller may use to
/// re-check a perturbation radius on fresh data.
pub fn perturbation_recheck(spec: &SystemSpec, reach: f64, t: f64, seed: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in &spec.functions {
        worst = worst.max(sampled_perturbation_ratio(f, reach, &spec.domain, t, seed, 64)?);
    }
    Ok(worst)
}
