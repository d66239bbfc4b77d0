//! Certified solutions of `exp(z) = A(z)` from `2 x 2 pi` rectangles.
//!
//! With `exp(x1) = |A(xi)| / 4` and `beta = x1 + i y2`,
//! `arg exp(beta) = arg(-A(xi))`, the rectangle with lower-left corner `beta`
//! is mapped by `exp` onto the annulus `|A(xi)|/4 <= |w| <= e^2 |A(xi)|/4`
//! cut along the ray through `-A(xi)`, so `exp - A(xi)` has one zero inside and
//! Rouché transfers it to `exp - A`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebraic::{perturbation_radius, AlgebraicFunction, PolydiskDomain};
use crate::contour::{build_rectangle, winding_number, Contour, SegmentLabel};
use crate::error::{Error, Result};
use crate::numeric::bisect;

/// Every point of a rectangle lies within `sqrt(16 pi^2 + 4) < 13` of `xi`.
pub const PERTURBATION_REACH: f64 = 13.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpSearchState {
    pub xi: Complex64,
    pub beta: Complex64,
}

/// Smallest ratios of the edge inequalities over the samples:
/// `a` = left edge `|exp - A(xi)| / (3/4 |A(xi)|)`, `b`/`c` = bottom/top edge
/// `|exp - A(xi)| / |A(xi)|`, `d` = right edge `|exp| / |A(xi)|`; `rouche` is
/// the largest `|A(z) - A(xi)| / |exp(z) - A(xi)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RectangleChecks {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub rouche: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpZero {
    pub region: Contour,
    /// Winding of `exp - A` on the rectangle.
    pub winding: i64,
    /// Winding of `exp - A(xi)`.
    pub winding_frozen: i64,
    pub root: Complex64,
    /// `|exp(root) - A(root)| / |A(root)|`
    pub residual: f64,
    pub state: ExpSearchState,
    pub checks: RectangleChecks,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpOptions {
    pub seed: u64,
    pub root_tol: f64,
    pub slack: f64,
}

impl Default for ExpOptions {
    fn default() -> Self {
        ExpOptions {
            seed: 0x5eed,
            root_tol: 1e-10,
            slack: 0.05,
        }
    }
}

fn check_arity(a: &AlgebraicFunction) -> Result<()> {
    if a.arity() != 1 {
        return Err(Error::Invalid(format!("expected a function of one variable, got arity {}", a.arity())));
    }
    Ok(())
}

/// `xi = x1 + i y1` with `exp(x1) = |A(xi)| / 4`, by bisection in `x1`.
pub fn solve_xi(a: &AlgebraicFunction, y1: f64) -> Result<Complex64> {
    let f = |x: f64| match a.evaluate1(Complex64::new(x, y1)) {
        Ok(v) if v.norm() > 0.0 => x - (v.norm() / 4.0).ln(),
        _ => f64::NAN,
    };
    let mut lo = -1.0;
    let mut hi = 1.0;
    for _ in 0..60 {
        if f(lo) < 0.0 {
            break;
        }
        lo = 2.0 * lo - 1.0;
    }
    for _ in 0..60 {
        if f(hi) > 0.0 {
            break;
        }
        hi = 2.0 * hi + 1.0;
    }
    let x = bisect(f, lo, hi, 1e-15 * (1.0 + hi.abs().max(lo.abs()))).ok_or(Error::NoCrossing(Complex64::new(0.0, y1)))?;
    Ok(Complex64::new(x, y1))
}

/// `beta = x1 + i y2` with `y2` in `(y1 - 2 pi, y1]` and
/// `y2 = arg(-A(xi)) mod 2 pi`.
pub fn choose_beta(xi: Complex64, a_xi: Complex64) -> Complex64 {
    let phase = (-a_xi).arg();
    let two_pi = 2.0 * PI;
    let k = ((xi.im - phase) / two_pi).floor();
    Complex64::new(xi.re, phase + two_pi * k)
}

pub fn check_rectangle(a: &AlgebraicFunction, a_xi: Complex64, rect: &Contour, slack: f64) -> Result<RectangleChecks> {
    let m = a_xi.norm();
    let mut out = RectangleChecks {
        a: f64::INFINITY,
        b: f64::INFINITY,
        c: f64::INFINITY,
        d: f64::INFINITY,
        rouche: 0.0,
        passed: true,
    };
    // Exact inequalities up to rounding of the edge samples.
    let floor = 1.0 - 1e-9;
    for seg in &rect.segments {
        for &z in &seg.points {
            let e = z.exp();
            let dist = (e - a_xi).norm();
            match seg.label {
                SegmentLabel::RectLeft => out.a = out.a.min(dist / (0.75 * m)),
                SegmentLabel::RectBottom => out.b = out.b.min(dist / m),
                SegmentLabel::RectTop => out.c = out.c.min(dist / m),
                SegmentLabel::RectRight => out.d = out.d.min(e.norm() / m),
                _ => {}
            }
            out.rouche = out.rouche.max((a.evaluate1(z)? - a_xi).norm() / dist);
        }
    }
    out.passed = out.a >= floor && out.b >= floor && out.c >= floor && out.d > 1.0 && out.rouche < 1.0 - slack;
    Ok(out)
}

/// Damped Newton on `z - w0 - Log(A(z) / A(xi))` where `exp(w0) = A(xi)`.
fn refine(a: &AlgebraicFunction, a_xi: Complex64, w0: Complex64, rect: &Contour) -> Result<Complex64> {
    let h = |z: Complex64| -> Result<(Complex64, Complex64)> {
        let az = a.evaluate1(z)?;
        let da = a.partial(&[z], 0)?;
        Ok((z - w0 - (az / a_xi).ln(), 1.0 - da / az))
    };
    let mut z = w0;
    let (mut hz, mut dh) = h(z)?;
    for _ in 0..60 {
        if hz.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
        let step = hz / dh;
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..30 {
            let zn = z - step * lambda;
            if rect.contains(zn) {
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
        if !moved {
            break;
        }
    }
    Ok(z)
}

pub fn relative_residual(a: &AlgebraicFunction, z: Complex64) -> Result<f64> {
    let az = a.evaluate1(z)?;
    Ok(((z - az.ln()).exp() - 1.0).norm())
}

/// Certifies the zero of `exp - A` in the rectangle built from `xi`. With
/// `strict`, failing edge inequalities are an error; otherwise they are only
/// reported and the winding number alone certifies the zero.
pub fn certify_exp_zero(a: &AlgebraicFunction, xi: Complex64, strict: bool, opts: &ExpOptions) -> Result<ExpZero> {
    check_arity(a)?;
    let a_xi = a.evaluate1(xi)?;
    if (xi.re - (a_xi.norm() / 4.0).ln()).abs() > 1e-8 {
        return Err(Error::Invalid(format!("exp(Re xi) differs from |A(xi)|/4 at {xi}")));
    }
    let beta = choose_beta(xi, a_xi);
    let rect = build_rectangle(beta);
    let checks = check_rectangle(a, a_xi, &rect, opts.slack)?;
    if strict && !checks.passed {
        return Err(Error::SeparationFailure {
            check: "rectangle inequalities (a)-(d) with Rouché comparison".into(),
            segment: "R(beta)".into(),
            at: beta,
            ratio: checks.rouche,
        });
    }
    let frozen = winding_number(|z| Ok(z.exp() - a_xi), &rect)?;
    let wind = winding_number(|z| Ok(z.exp() - a.evaluate1(z)?), &rect)?;
    if wind.winding != 1 {
        return Err(Error::SeparationFailure {
            check: "winding of exp - A on the rectangle".into(),
            segment: "R(beta)".into(),
            at: beta,
            ratio: wind.winding as f64,
        });
    }
    let w0 = Complex64::new(a_xi.norm().ln(), beta.im + PI);
    let root = refine(a, a_xi, w0, &rect)?;
    let residual = relative_residual(a, root)?;
    if !(residual < opts.root_tol) || !rect.contains(root) {
        return Err(Error::NewtonDivergence(format!("stalled at {root} with relative residual {residual:.3e}")));
    }
    Ok(ExpZero {
        region: rect,
        winding: wind.winding,
        winding_frozen: frozen.winding,
        root,
        residual,
        state: ExpSearchState { xi, beta },
        checks,
    })
}

/// Height from which `A` varies by less than a quarter of its size within
/// distance 13, and which clears the singular disc of `A`.
pub fn search_height(a: &AlgebraicFunction, seed: u64) -> Result<f64> {
    check_arity(a)?;
    let n = perturbation_radius(a, PERTURBATION_REACH, &PolydiskDomain::quadrant(1), seed)?;
    Ok(n.max(a.singular_disc_radius().unwrap_or(0.0)))
}

pub fn solve_exp_equation(a: &AlgebraicFunction, count: usize) -> Result<Vec<ExpZero>> {
    solve_exp_equation_with(a, count, &ExpOptions::default())
}

/// `count` certified zeros, moving `Im xi` up by `2 pi` per step.
pub fn solve_exp_equation_with(a: &AlgebraicFunction, count: usize, opts: &ExpOptions) -> Result<Vec<ExpZero>> {
    let mut y = search_height(a, opts.seed)?;
    let mut out: Vec<ExpZero> = Vec::new();
    let mut skipped = 0;
    while out.len() < count {
        let xi = solve_xi(a, y)?;
        let zero = certify_exp_zero(a, xi, true, opts)?;
        if out.iter().any(|z| (z.root - zero.root).norm() <= 1e-6) {
            skipped += 1;
            if skipped > count {
                return Err(Error::Geometry("successive rectangles keep returning the same zero".into()));
            }
        } else {
            out.push(zero);
        }
        y += 2.0 * PI;
    }
    Ok(out)
}
