//! Certified zeros of `Gamma(z) - A(z)` for a one-variable algebraic `A`.
//!
//! Each zero is trapped inside a contour `K(beta, R)` on which `Gamma - A(xi)`
//! dominates `A - A(xi)`, so the winding number of `Gamma - A` on `K` counts
//! it; Newton then locates it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebraic::{perturbation_radius, AlgebraicFunction, BivariatePolynomial, ImplicitBranch, PolydiskDomain};
use crate::contour::{build_k_with, winding_number, Contour, KCurve, Segment, SegmentLabel};
use crate::error::{Error, Result};
use crate::gamma::{gamma, ln_gamma, ln_gamma_psi, principal_arg, QuadrantRegion};
use crate::level_curves::Tracer;
use crate::numeric::{bisect, bisect_observed, root_radius_bound};

/// Left edge of the search region.
pub const MIN_SEARCH_RE: f64 = 16.0;
pub const MAX_RAY_LENGTH: f64 = 1e4;
/// Perturbation size used to place the search region: `A` may move by less
/// than a quarter of its size over this distance.
pub const PERTURBATION_REACH: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub seed: u64,
    /// Relative residual `|Gamma - A| / |A|` a root must reach.
    pub root_tol: f64,
    pub trace_tol: f64,
    /// Relative slack on the boundary separation inequalities.
    pub slack: f64,
    pub max_restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            seed: 0x5eed,
            root_tol: 1e-9,
            trace_tol: 1e-9,
            slack: 0.05,
            max_restarts: 3,
        }
    }
}

/// Smallest ratios `lhs / rhs` of the boundary inequalities over all contour
/// samples; `rouche` is the largest `|A(z) - A(xi)| / |Gamma(z) - A(xi)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationMargins {
    pub s_bottom: f64,
    pub t_sides: f64,
    pub s_top: f64,
    pub rouche: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertifiedZero {
    pub region: Contour,
    pub winding: i64,
    /// Winding on the contour re-traced at half the step.
    pub winding_dense: i64,
    pub root: Complex64,
    pub residual: f64,
    pub xi: Complex64,
    pub beta: Complex64,
    pub beta_star: Complex64,
    pub big_r: f64,
    pub margins: SeparationMargins,
    pub mirrored: bool,
}

impl CertifiedZero {
    /// The conjugate zero of `Gamma - A` for `A` commuting with conjugation.
    pub fn mirror(&self, a: &AlgebraicFunction) -> Result<CertifiedZero> {
        let segments = self
            .region
            .segments
            .iter()
            .rev()
            .map(|s| Segment {
                label: s.label,
                reversed: !s.reversed,
                points: s.points.iter().rev().map(|z| z.conj()).collect(),
            })
            .collect();
        let root = self.root.conj();
        Ok(CertifiedZero {
            region: Contour::new(segments)?,
            winding: self.winding,
            winding_dense: self.winding_dense,
            root,
            residual: relative_residual(a, root)?,
            xi: self.xi.conj(),
            beta: self.beta.conj(),
            beta_star: self.beta_star.conj(),
            big_r: self.big_r,
            margins: self.margins,
            mirrored: true,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub xi: Complex64,
    pub beta: Complex64,
    pub big_r: f64,
    pub exclusion: Vec<Contour>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroFamily {
    /// Zeros found in the upper quadrant followed by their mirror images.
    pub zeros: Vec<CertifiedZero>,
    /// First point of the search chain.
    pub b: Complex64,
    pub epsilon: f64,
    /// `|xi' - xi|` for consecutive search points.
    pub spacings: Vec<(Complex64, f64)>,
    pub mirrored: bool,
}

impl ZeroFamily {
    pub fn count_in_ball(&self, radius: f64) -> usize {
        self.zeros.iter().filter(|z| z.root.norm() <= radius).count()
    }

    /// `2|b| / (1 + 2 pi / (log floor(Re b) - 1)^2)`.
    pub fn offset(&self) -> f64 {
        distribution_offset(self.b)
    }

    /// Consecutive search points farther apart than `1 + 2 epsilon` in the
    /// range `Re >= exp(sqrt(2 pi / epsilon) + 1)` where the bound applies.
    pub fn spacing_violations(&self) -> usize {
        let from = ((2.0 * PI / self.epsilon).sqrt() + 1.0).exp();
        self.spacings
            .iter()
            .filter(|(xi, d)| xi.re >= from && *d >= 1.0 + 2.0 * self.epsilon)
            .count()
    }
}

pub fn distribution_offset(b: Complex64) -> f64 {
    let l = b.re.floor().ln() - 1.0;
    2.0 * b.norm() / (1.0 + 2.0 * PI / (l * l))
}

pub fn relative_residual(a: &AlgebraicFunction, z: Complex64) -> Result<f64> {
    let az = a.evaluate1(z)?;
    let lg = ln_gamma(z)?;
    // |Gamma/A - 1| without forming Gamma.
    let q = (lg - az.ln()).exp();
    Ok((q - 1.0).norm())
}

fn check_arity(a: &AlgebraicFunction) -> Result<()> {
    if a.arity() != 1 {
        return Err(Error::Invalid(format!("expected a function of one variable, got arity {}", a.arity())));
    }
    Ok(())
}

/// `log|Gamma(z)| - log(|A(z)| / 4)`.
fn xi_gap(a: &AlgebraicFunction, z: Complex64) -> f64 {
    match (ln_gamma(z), a.evaluate1(z)) {
        (Ok(lg), Ok(v)) if v.norm() > 0.0 => lg.re - (v.norm() / 4.0).ln(),
        _ => f64::NAN,
    }
}

/// Point on the horizontal (gap negative) or vertical (gap positive) ray from
/// `start` where `|Gamma| = |A| / 4`.
pub fn find_xi(a: &AlgebraicFunction, start: Complex64) -> Result<Complex64> {
    find_xi_observed(a, start, |_, _, _, _| {})
}

pub fn find_xi_observed<O>(a: &AlgebraicFunction, start: Complex64, observe: O) -> Result<Complex64>
where
    O: FnMut(f64, f64, f64, f64),
{
    check_arity(a)?;
    if !QuadrantRegion::default().contains(start) {
        return Err(Error::Domain(format!("start {start} is outside Q(alpha, 0)")));
    }
    let g0 = xi_gap(a, start);
    if !g0.is_finite() {
        return Err(Error::Domain(format!("cannot evaluate Gamma or A at {start}")));
    }
    if g0 == 0.0 {
        return Ok(start);
    }
    let dir = if g0 < 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::i() };
    let f = |t: f64| xi_gap(a, start + dir * t);
    let mut lo = 0.0;
    let mut hi = 1.0;
    loop {
        let g = f(hi);
        if g.is_finite() && g.signum() != g0.signum() {
            break;
        }
        if hi >= MAX_RAY_LENGTH {
            return Err(Error::NoCrossing(start));
        }
        lo = hi;
        hi = (2.0 * hi).min(MAX_RAY_LENGTH);
    }
    let tol = 1e-15 * (start.norm() + hi);
    let t = bisect_observed(f, lo, hi, tol, observe).ok_or(Error::NoCrossing(start))?;
    Ok(start + dir * t)
}

fn separation_error(check: &str, label: SegmentLabel, at: Complex64, ratio: f64) -> Error {
    Error::SeparationFailure {
        check: check.into(),
        segment: format!("{label:?}"),
        at,
        ratio,
    }
}

/// Checks the boundary inequalities of `K` at every sample: `|Gamma - A(xi)|`
/// is at least `3/4 |A(xi)|` on `S(beta, beta*)` and at least `|A(xi)|` on the
/// argument arcs, `|Gamma| >= 5/4 |A(xi)|` on the outer arc, and everywhere
/// `|A(z) - A(xi)| < |Gamma(z) - A(xi)|`.
pub fn check_separation(a: &AlgebraicFunction, a_xi: Complex64, k: &KCurve, slack: f64) -> Result<SeparationMargins> {
    let m = a_xi.norm();
    let samples: Vec<(SegmentLabel, Complex64)> = k
        .contour
        .segments
        .iter()
        .flat_map(|s| s.points.iter().map(move |z| (s.label, *z)))
        .collect();
    let rows: Vec<(SegmentLabel, Complex64, f64, f64)> = samples
        .par_iter()
        .map(|&(label, z)| {
            let g = gamma(z)?.value;
            let az = a.evaluate1(z)?;
            let dist = (g - a_xi).norm();
            let own = match label {
                SegmentLabel::SBottom => dist / (0.75 * m),
                SegmentLabel::TLeft | SegmentLabel::TRight => dist / m,
                SegmentLabel::STop => g.norm() / (1.25 * m),
                _ => f64::INFINITY,
            };
            Ok((label, z, own, (az - a_xi).norm() / dist))
        })
        .collect::<Result<_>>()?;
    let mut margins = SeparationMargins {
        s_bottom: f64::INFINITY,
        t_sides: f64::INFINITY,
        s_top: f64::INFINITY,
        rouche: 0.0,
    };
    for &(label, z, own, rouche) in &rows {
        let (slot, name) = match label {
            SegmentLabel::SBottom => (&mut margins.s_bottom, "|Gamma - A(xi)| >= 3/4 |A(xi)|"),
            SegmentLabel::TLeft | SegmentLabel::TRight => (&mut margins.t_sides, "|Gamma - A(xi)| >= |A(xi)|"),
            _ => (&mut margins.s_top, "|Gamma| >= 5/4 |A(xi)|"),
        };
        *slot = slot.min(own);
        if own < 1.0 - slack {
            return Err(separation_error(name, label, z, own));
        }
        margins.rouche = margins.rouche.max(rouche);
        if !(rouche < 1.0 - slack) {
            return Err(separation_error("|A - A(xi)| < |Gamma - A(xi)|", label, z, rouche));
        }
    }
    Ok(margins)
}

/// Damped Newton on `log Gamma(z) - log Gamma(chi) - Log(A(z) / A(xi))`
/// where `Gamma(chi) = A(xi)`, kept inside `region`.
fn refine_root(
    a: &AlgebraicFunction,
    a_xi: Complex64,
    chi: Complex64,
    l_chi: Complex64,
    region: &Contour,
) -> Result<Complex64> {
    let h = |z: Complex64| -> Result<(Complex64, Complex64)> {
        let (lg, psi) = ln_gamma_psi(z)?;
        let az = a.evaluate1(z)?;
        let val = lg - l_chi - (az / a_xi).ln();
        let da = a.partial(&[z], 0)?;
        Ok((val, psi - da / az))
    };
    let mut z = chi;
    let (mut hz, mut dh) = h(z)?;
    for _ in 0..60 {
        if hz.norm() <= 1e-15 {
            return Ok(z);
        }
        let step = hz / dh;
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let zn = z - step * lambda;
            if region.contains(zn) {
                if let Ok((hn, dn)) = h(zn) {
                    if hn.norm() < hz.norm() {
                        z = zn;
                        hz = hn;
                        dh = dn;
                        moved = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !moved || (step * lambda).norm() <= 1e-16 * z.norm() {
            return Ok(z);
        }
    }
    Ok(z)
}

pub fn certify_one_zero(a: &AlgebraicFunction, xi: Complex64) -> Result<CertifiedZero> {
    certify_one_zero_with(a, xi, &SolverOptions::default())
}

pub fn certify_one_zero_with(a: &AlgebraicFunction, xi: Complex64, opts: &SolverOptions) -> Result<CertifiedZero> {
    check_arity(a)?;
    if xi.re < MIN_SEARCH_RE || !QuadrantRegion::default().contains(xi) {
        return Err(Error::Domain(format!("xi = {xi} needs Re >= {MIN_SEARCH_RE} in the upper quadrant")));
    }
    let a_xi = a.evaluate1(xi)?;
    let l_xi = ln_gamma(xi)?;
    let gap = l_xi.re - (a_xi.norm() / 4.0).ln();
    if gap.abs() > 1e-8 {
        return Err(Error::Invalid(format!("|Gamma(xi)| differs from |A(xi)|/4 by log ratio {gap:.3e}")));
    }
    let tracer = Tracer::with_tol(opts.trace_tol);
    let target = principal_arg((-a_xi).arg());
    let beta = tracer.point_on_modulus_arc(xi, target)?;
    let big_r = (l_xi.re + xi.norm().ln()).exp();
    let k = build_k_with(beta, big_r, 1.0)?;
    let margins = check_separation(a, a_xi, &k, opts.slack)?;

    let f = |z: Complex64| -> Result<Complex64> { Ok(gamma(z)?.value - a.evaluate1(z)?) };
    let wind = winding_number(f, &k.contour)?;
    if wind.winding < 1 {
        return Err(Error::SeparationFailure {
            check: "winding of Gamma - A on K".into(),
            segment: "K".into(),
            at: beta,
            ratio: wind.winding as f64,
        });
    }
    let dense = build_k_with(beta, big_r, 0.5)?;
    let wind_dense = winding_number(f, &dense.contour)?;
    if wind_dense.winding != wind.winding {
        return Err(Error::NonConvergence(format!(
            "winding {} changes to {} under refinement",
            wind.winding, wind_dense.winding
        )));
    }

    // Newton seed: Gamma(chi) = A(xi), which lies inside K.
    let l_beta = ln_gamma(beta)?;
    let up = tracer.walk_length(beta, l_beta, Complex64::new(1.0, 0.0), a_xi.norm().ln() - l_beta.re)?;
    let (p, lp) = up.last();
    let l_chi = Complex64::new(a_xi.norm().ln(), l_beta.im + PI);
    let chi = tracer.walk_length(p, Complex64::new(l_chi.re, lp.im), Complex64::i(), PI)?.last().0;
    let root = refine_root(a, a_xi, chi, l_chi, &k.contour)?;
    let residual = relative_residual(a, root)?;
    if !(residual < opts.root_tol) || !k.contour.contains(root) {
        return Err(Error::NewtonDivergence(format!(
            "stalled at {root} with relative residual {residual:.3e} (winding {} certified)",
            wind.winding
        )));
    }
    Ok(CertifiedZero {
        region: k.contour,
        winding: wind.winding,
        winding_dense: wind_dense.winding,
        root,
        residual,
        xi,
        beta,
        beta_star: k.beta_star,
        big_r,
        margins,
        mirrored: false,
    })
}

/// Left edge of the search region for `A`: at least 16, outside the disc
/// holding the singularities of `A`, and past the radius where `A` varies by
/// less than a quarter of its size over distance [`PERTURBATION_REACH`].
pub fn search_start(a: &AlgebraicFunction, seed: u64) -> Result<f64> {
    check_arity(a)?;
    let n = perturbation_radius(a, PERTURBATION_REACH, &PolydiskDomain::quadrant(1), seed)?;
    let disc = a.singular_disc_radius().unwrap_or(0.0);
    Ok(MIN_SEARCH_RE.max(n).max(disc))
}

/// Next search point: the crossing of `|Gamma| = |A| / 4` on the argument
/// curve through `beta*`, within distance 1 of `beta*`.
pub fn successor(a: &AlgebraicFunction, beta_star: Complex64) -> Result<Complex64> {
    let tracer = Tracer::default();
    let l_star = ln_gamma(beta_star)?;
    let point = |delta: f64| -> Result<Complex64> {
        let dir = Complex64::new(delta.signum(), 0.0);
        Ok(tracer.walk_length(beta_star, l_star, dir, delta.abs())?.last().0)
    };
    let gap = |delta: f64| point(delta).map(|z| xi_gap(a, z)).unwrap_or(f64::NAN);
    let g0 = gap(0.0);
    if !g0.is_finite() {
        return Err(Error::NoCrossing(beta_star));
    }
    if g0 == 0.0 {
        return Ok(beta_star);
    }
    let sign = if g0 < 0.0 { 1.0 } else { -1.0 };
    let mut lo = 0.0;
    let mut hi = 0.05;
    loop {
        let z = point(sign * hi)?;
        let g = xi_gap(a, z);
        if g.is_finite() && g.signum() != g0.signum() {
            break;
        }
        if (z - beta_star).norm() > 1.0 {
            return Err(Error::NoCrossing(beta_star));
        }
        lo = hi;
        hi *= 2.0;
    }
    let t = bisect(|t| gap(sign * t), lo, hi, 1e-15 * (1.0 + l_star.norm())).ok_or(Error::NoCrossing(beta_star))?;
    point(sign * t)
}

/// Certifies a zero from `xi`, restarting with doubled real part when the
/// boundary inequalities fail.
pub fn certify_with_restarts(a: &AlgebraicFunction, xi: Complex64, opts: &SolverOptions) -> Result<CertifiedZero> {
    let mut xi = xi;
    let mut attempt = 0;
    loop {
        match certify_one_zero_with(a, xi, opts) {
            Err(e @ Error::SeparationFailure { .. }) => {
                attempt += 1;
                if attempt > opts.max_restarts {
                    return Err(e);
                }
                xi = find_xi(a, Complex64::new(2.0 * xi.re, xi.im))?;
            }
            other => return other,
        }
    }
}

pub fn enumerate_zeros(a: &AlgebraicFunction, r_ball: f64, epsilon: f64) -> Result<ZeroFamily> {
    enumerate_zeros_with(a, r_ball, epsilon, &SolverOptions::default())
}

/// Follows the chain `xi -> beta* -> xi'` from the least-modulus crossing `b`
/// on `Re z = start` until `|xi| > r_ball`.
pub fn enumerate_zeros_with(a: &AlgebraicFunction, r_ball: f64, epsilon: f64, opts: &SolverOptions) -> Result<ZeroFamily> {
    check_arity(a)?;
    if !(epsilon > 0.0) {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    let x0 = search_start(a, opts.seed)?;
    let b = find_xi(a, Complex64::new(x0, 1.0))?;
    let mut state = SearchState {
        xi: b,
        beta: b,
        big_r: 0.0,
        exclusion: Vec::new(),
    };
    let mut zeros: Vec<CertifiedZero> = Vec::new();
    let mut spacings = Vec::new();
    while state.xi.norm() <= r_ball {
        let zero = certify_with_restarts(a, state.xi, opts)?;
        if zeros.iter().any(|z| (z.root - zero.root).norm() <= 1e-6) {
            return Err(Error::Geometry(format!("root {} was certified twice", zero.root)));
        }
        if state.exclusion.iter().any(|k| k.contains(zero.root)) {
            return Err(Error::Geometry(format!("root {} lies in an earlier region", zero.root)));
        }
        let next = successor(a, zero.beta_star)?;
        spacings.push((zero.xi, (next - zero.xi).norm()));
        state.exclusion.push(zero.region.clone());
        state.beta = zero.beta;
        state.big_r = zero.big_r;
        state.xi = next;
        zeros.push(zero);
    }
    let mirrored = a.commutes_with_conjugation(x0, opts.seed);
    if mirrored {
        let images = zeros.iter().map(|z| z.mirror(a)).collect::<Result<Vec<_>>>()?;
        zeros.extend(images);
    }
    Ok(ZeroFamily {
        zeros,
        b,
        epsilon,
        spacings,
        mirrored,
    })
}

/// Zeros of `p(z, Gamma(z))` from every branch `Y = A(X)` of `p = 0` over the
/// search region.
pub fn solve_plane_curve(p: &BivariatePolynomial, r_ball: f64, epsilon: f64) -> Result<Vec<CertifiedZero>> {
    solve_plane_curve_with(p, r_ball, epsilon, &SolverOptions::default())
}

pub fn solve_plane_curve_with(
    p: &BivariatePolynomial,
    r_ball: f64,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<Vec<CertifiedZero>> {
    if p.degree_y() == 0 {
        return Err(Error::Invalid("polynomial does not depend on Y".into()));
    }
    if p.is_monomial_in_y() {
        return Err(Error::Invalid("polynomial is a constant multiple of a power of Y".into()));
    }
    let lead = root_radius_bound(&p.x_coefficients(p.degree_y()));
    let tail = root_radius_bound(&p.x_coefficients(0));
    let mut base_re = MIN_SEARCH_RE.max(2.0 * lead.max(tail));
    let mut last_err = None;
    for _ in 0..=3 {
        match solve_branches(p, Complex64::new(base_re, base_re), r_ball, epsilon, opts) {
            Err(e @ Error::BranchPoint(_)) => {
                last_err = Some(e);
                base_re *= 2.0;
            }
            other => return other,
        }
    }
    Err(last_err.unwrap())
}

fn solve_branches(
    p: &BivariatePolynomial,
    base: Complex64,
    r_ball: f64,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<Vec<CertifiedZero>> {
    let mut out = Vec::new();
    for y in p.y_roots(base) {
        let branch = ImplicitBranch::new(p.clone(), 0, base, y)?;
        let a = AlgebraicFunction::implicit(branch, 1)?;
        let family = enumerate_zeros_with(&a, r_ball, epsilon, opts)?;
        out.extend(family.zeros);
    }
    Ok(out)
}
