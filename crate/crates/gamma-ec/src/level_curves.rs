//! Level curves of `|Gamma|` and `arg Gamma` in the quadrant `Re z > alpha,
//! Im z > 0`.
//!
//! Both families are straight lines in the coordinates `(u, v) = log Gamma`,
//! so a trace walks a line in log space: an Euler predictor
//! `z + dir * ds / psi(z)` followed by complex Newton on
//! `log Gamma(z) = target`, which restores the level exactly and keeps the
//! unwrapped argument as the imaginary part of the target.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::{alpha, digamma, ln_gamma, ln_gamma_psi, principal_arg, QuadrantRegion};
use crate::numeric::bisect;

pub const DEFAULT_TRACE_TOL: f64 = 1e-9;
pub const MIN_STEP: f64 = 1e-6;
pub const MAX_STEP: f64 = 0.1;
/// Left traces stop this far to the right of `x = alpha`.
pub const ALPHA_MARGIN: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveKind {
    ConstantModulus { r: f64 },
    ConstantArgument { theta: f64 },
}

/// Where the left end of a traced curve sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminus {
    RealAxis,
    AlphaLine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurve {
    pub kind: CurveKind,
    pub points: Vec<Complex64>,
    /// Analytic `log Gamma` at each point; the imaginary part is the
    /// unwrapped argument.
    pub log_values: Vec<Complex64>,
    pub tol: f64,
    pub terminus: Terminus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompanionPoint {
    pub origin: Complex64,
    pub star: Complex64,
}

/// Polyline traced along a straight line of log space.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub points: Vec<Complex64>,
    pub log_values: Vec<Complex64>,
}

impl Trace {
    pub fn last(&self) -> (Complex64, Complex64) {
        (*self.points.last().unwrap(), *self.log_values.last().unwrap())
    }
}

/// Predictor-corrector walker in log-Gamma coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tracer {
    pub tol: f64,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for Tracer {
    fn default() -> Self {
        Tracer {
            tol: DEFAULT_TRACE_TOL,
            min_step: MIN_STEP,
            max_step: MAX_STEP,
        }
    }
}

enum Stop {
    /// Walk exactly `s_end` along the line.
    Length(f64),
    /// Walk until `g(z)` turns non-negative, landing on `g = 0`.
    Boundary(Box<dyn Fn(Complex64) -> f64>),
}

impl Tracer {
    pub fn with_tol(tol: f64) -> Self {
        Tracer {
            tol,
            ..Tracer::default()
        }
    }

    pub fn with_max_step(self, max_step: f64) -> Self {
        Tracer { max_step, ..self }
    }

    /// Newton on `log Gamma(z) = target` from `guess`.
    pub fn correct(&self, guess: Complex64, target: Complex64) -> Option<(Complex64, Complex64)> {
        let floor = (8.0 * f64::EPSILON * target.norm()).max(1e-14);
        let mut z = guess;
        let mut last = f64::INFINITY;
        let mut best: Option<(Complex64, Complex64, f64)> = None;
        for _ in 0..12 {
            let (lg, psi) = ln_gamma_psi(z).ok()?;
            let res = (lg - target).norm();
            if res <= floor {
                return Some((z, lg));
            }
            if best.map_or(true, |b| res < b.2) {
                best = Some((z, lg, res));
            }
            let step = (lg - target) / psi;
            let s = step.norm();
            if !s.is_finite() || (last.is_finite() && s > 0.5 * last) {
                break;
            }
            z -= step;
            last = s;
        }
        // Round-off can stall the last iterations just above the floor.
        best.filter(|b| b.2 <= 64.0 * floor).map(|b| (b.0, b.1))
    }

    fn walk(&self, z0: Complex64, target0: Complex64, dir: Complex64, stop: Stop) -> Result<Trace> {
        let mut trace = Trace {
            points: vec![z0],
            log_values: vec![target0],
        };
        let mut z = z0;
        let mut s = 0.0f64;
        let mut step = 0.25 * self.max_step;
        let mut budget = 10_000_000usize;
        loop {
            budget -= 1;
            if budget == 0 {
                return Err(Error::TraceDivergence {
                    at: z,
                    reason: "step budget exhausted".into(),
                });
            }
            let psi = digamma(z).map_err(|e| Error::TraceDivergence {
                at: z,
                reason: e.to_string(),
            })?;
            let mut ds = step * psi.norm();
            let mut final_step = false;
            if let Stop::Length(end) = stop {
                if s + ds >= end {
                    ds = end - s;
                    final_step = true;
                }
            }
            let guess = z + dir * ds / psi;
            let target = target0 + dir * (s + ds);
            match self.correct(guess, target) {
                Some((zn, lg)) if (zn - guess).norm() <= 0.2 * (zn - z).norm() + 1e-13 => {
                    if let Stop::Boundary(g) = &stop {
                        if g(zn) >= 0.0 {
                            let (zb, lb) = self.land(z, s, zn, s + ds, target0, dir, g.as_ref())?;
                            trace.points.push(zb);
                            trace.log_values.push(lb);
                            return Ok(trace);
                        }
                    }
                    trace.points.push(zn);
                    trace.log_values.push(lg);
                    if final_step {
                        return Ok(trace);
                    }
                    z = zn;
                    s += ds;
                    step = (step * 1.5).min(self.max_step);
                }
                _ => {
                    step *= 0.5;
                    if step < self.min_step {
                        return Err(Error::TraceDivergence {
                            at: z,
                            reason: "corrector failed below minimum step".into(),
                        });
                    }
                }
            }
        }
    }

    /// Bisects the line parameter between two corrected points to land on
    /// `g(z) = 0`.
    #[allow(clippy::too_many_arguments)]
    fn land(
        &self,
        za: Complex64,
        sa: f64,
        zb: Complex64,
        sb: f64,
        target0: Complex64,
        dir: Complex64,
        g: &dyn Fn(Complex64) -> f64,
    ) -> Result<(Complex64, Complex64)> {
        let (mut lo, mut hi) = (sa, sb);
        let (mut zlo, mut zhi) = (za, zb);
        for _ in 0..80 {
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            let w = (mid - lo) / (hi - lo);
            let guess = zlo + (zhi - zlo) * w;
            let (zm, _) = self.correct(guess, target0 + dir * mid).ok_or(Error::TraceDivergence {
                at: guess,
                reason: "corrector failed while landing on boundary".into(),
            })?;
            if g(zm) >= 0.0 {
                hi = mid;
                zhi = zm;
            } else {
                lo = mid;
                zlo = zm;
            }
        }
        let lg = ln_gamma(zhi).map_err(|e| Error::TraceDivergence {
            at: zhi,
            reason: e.to_string(),
        })?;
        Ok((zhi, lg))
    }

    /// Walks `length` along direction `dir` of log space starting from `z0`
    /// whose analytic log Gamma is `l0`.
    pub fn walk_length(&self, z0: Complex64, l0: Complex64, dir: Complex64, length: f64) -> Result<Trace> {
        if length <= 0.0 {
            return Ok(Trace {
                points: vec![z0],
                log_values: vec![l0],
            });
        }
        self.walk(z0, l0, dir, Stop::Length(length))
    }

    /// Walks until `Re z` reaches `x_end` (rightward) or `x_end` from above.
    pub fn walk_to_re(&self, z0: Complex64, l0: Complex64, dir: Complex64, x_end: f64, rightward: bool) -> Result<Trace> {
        let g: Box<dyn Fn(Complex64) -> f64> = if rightward {
            Box::new(move |z: Complex64| z.re - x_end)
        } else {
            Box::new(move |z: Complex64| x_end - z.re)
        };
        if g(z0) >= 0.0 {
            return Ok(Trace {
                points: vec![z0],
                log_values: vec![l0],
            });
        }
        self.walk(z0, l0, dir, Stop::Boundary(g))
    }

    /// The constant-modulus curve `|Gamma| = r` from its left terminus to
    /// `Re z = x_end`.
    pub fn trace_modulus_curve(&self, r: f64, x_end: f64) -> Result<LevelCurve> {
        let a = alpha();
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("modulus level must be positive, got {r}")));
        }
        if x_end <= a {
            return Err(Error::Domain(format!("x_end {x_end} must exceed alpha")));
        }
        let (z0, l0, terminus) = modulus_curve_start(r)?;
        if z0.re >= x_end {
            return Err(Error::Domain(format!(
                "curve |Gamma| = {r} starts at Re {} beyond x_end {x_end}",
                z0.re
            )));
        }
        let trace = self.walk_to_re(z0, l0, Complex64::i(), x_end, true)?;
        Ok(LevelCurve {
            kind: CurveKind::ConstantModulus { r },
            points: trace.points,
            log_values: trace.log_values,
            tol: self.tol,
            terminus,
        })
    }

    /// The component of `arg Gamma = theta` through `seed`, from
    /// `x = alpha+` to `Re z = x_end`.
    pub fn trace_argument_curve(&self, theta: f64, seed: Complex64, x_end: f64) -> Result<LevelCurve> {
        let a = alpha();
        let x_left = a + ALPHA_MARGIN;
        if seed.im == 0.0 && seed.re > a {
            if theta != 0.0 {
                return Err(Error::Domain("real seeds lie on the curve arg Gamma = 0".into()));
            }
            return real_axis_curve(x_left, seed.re.max(x_end), self.tol);
        }
        if !QuadrantRegion::default().contains(seed) {
            return Err(Error::Domain(format!("seed {seed} is outside Q(alpha, 0)")));
        }
        let l0 = ln_gamma(seed)?;
        if (l0.im - theta).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "seed has unwrapped argument {} but theta is {theta}",
                l0.im
            )));
        }
        let start = Complex64::new(l0.re, theta);
        let left = self.walk_to_re(seed, start, Complex64::new(-1.0, 0.0), x_left, false)?;
        let right = self.walk_to_re(seed, start, Complex64::new(1.0, 0.0), x_end, true)?;
        let mut points: Vec<Complex64> = left.points.iter().rev().copied().collect();
        let mut log_values: Vec<Complex64> = left.log_values.iter().rev().copied().collect();
        points.extend_from_slice(&right.points[1..]);
        log_values.extend_from_slice(&right.log_values[1..]);
        Ok(LevelCurve {
            kind: CurveKind::ConstantArgument { theta },
            points,
            log_values,
            tol: self.tol,
            terminus: Terminus::AlphaLine,
        })
    }

    /// Arc of `C_{|Gamma(z)|}` from `z` on which the unwrapped argument grows
    /// by `span`.
    pub fn modulus_arc(&self, z: Complex64, span: f64) -> Result<Trace> {
        let l0 = ln_gamma(z)?;
        self.walk_length(z, l0, Complex64::i(), span)
    }

    pub fn z_star(&self, z: Complex64) -> Result<CompanionPoint> {
        check_z_star_domain(z)?;
        let arc = self.modulus_arc(z, 2.0 * PI)?;
        Ok(CompanionPoint {
            origin: z,
            star: arc.last().0,
        })
    }

    /// Point of the arc `S(z, z*)` whose argument is `target_arg` modulo
    /// `2 pi`. A target exactly `2 pi k` (k >= 1) above `arg Gamma(z)` selects
    /// the right end `z*`.
    pub fn point_on_modulus_arc(&self, z: Complex64, target_arg: f64) -> Result<Complex64> {
        check_z_star_domain(z)?;
        let l0 = ln_gamma(z)?;
        let offset = arc_offset(principal_arg(l0.im), target_arg);
        Ok(self.walk_length(z, l0, Complex64::i(), offset)?.last().0)
    }

    /// Point on the constant-argument curve through `beta` where `|Gamma| = big_r`.
    pub fn rho(&self, beta: Complex64, big_r: f64) -> Result<Complex64> {
        let l0 = ln_gamma(beta)?;
        Ok(self.rho_trace(beta, l0, big_r)?.last().0)
    }

    pub fn rho_trace(&self, beta: Complex64, l0: Complex64, big_r: f64) -> Result<Trace> {
        if !QuadrantRegion::default().contains(beta) {
            return Err(Error::Domain(format!("{beta} is outside Q(alpha, 0)")));
        }
        let rise = big_r.ln() - l0.re;
        if !(rise > 0.0) {
            return Err(Error::Domain(format!(
                "R = {big_r} does not exceed |Gamma(beta)| = {}",
                l0.re.exp()
            )));
        }
        self.walk_length(beta, l0, Complex64::new(1.0, 0.0), rise)
    }
}

/// Offset in `[0, 2 pi]` from `current` to the next angle congruent to
/// `target`; exact multiples of `2 pi` above `current` map to `2 pi`.
fn arc_offset(current: f64, target: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let delta = target - current;
    let reduced = delta - two_pi * (delta / two_pi).floor();
    if delta > 1e-12 && (reduced < 1e-12 || two_pi - reduced < 1e-12) {
        two_pi
    } else if reduced < 1e-12 || two_pi - reduced < 1e-12 {
        0.0
    } else {
        reduced
    }
}

fn check_z_star_domain(z: Complex64) -> Result<()> {
    if !QuadrantRegion::default().contains(z) || z.re < 4.0 {
        return Err(Error::Domain(format!("{z} needs Re >= 4 inside Q(alpha, 0)")));
    }
    Ok(())
}

fn real_axis_curve(x_left: f64, x_end: f64, tol: f64) -> Result<LevelCurve> {
    let count = (((x_end - x_left) / MAX_STEP).ceil() as usize).max(1);
    let mut points = Vec::with_capacity(count + 1);
    let mut log_values = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let x = x_left + (x_end - x_left) * k as f64 / count as f64;
        let z = Complex64::new(x, 0.0);
        points.push(z);
        log_values.push(Complex64::new(ln_gamma(z)?.re, 0.0));
    }
    Ok(LevelCurve {
        kind: CurveKind::ConstantArgument { theta: 0.0 },
        points,
        log_values,
        tol,
        terminus: Terminus::AlphaLine,
    })
}

/// Left end of `C_r`: on the real axis when `r >= Gamma(alpha)`, otherwise on
/// the line `x = alpha`.
fn modulus_curve_start(r: f64) -> Result<(Complex64, Complex64, Terminus)> {
    let a = alpha();
    let lr = r.ln();
    let lg_real = |x: f64| ln_gamma(Complex64::new(x, 0.0)).map(|l| l.re).unwrap_or(f64::NAN);
    if lr >= lg_real(a) {
        let mut hi = a + 1.0;
        while lg_real(hi) < lr {
            hi = a + 2.0 * (hi - a);
            if hi > 1e6 {
                return Err(Error::Domain(format!("level {r} too large to bracket")));
            }
        }
        let mut x = bisect(|x| lg_real(x) - lr, a, hi, 1e-15 * hi).ok_or(Error::TraceDivergence {
            at: Complex64::new(a, 0.0),
            reason: "no real start for modulus curve".into(),
        })?;
        for _ in 0..3 {
            let psi = digamma(Complex64::new(x, 0.0))?.re;
            if psi.abs() > 1e-8 {
                x -= (lg_real(x) - lr) / psi;
            }
        }
        let z = Complex64::new(x, 0.0);
        Ok((z, Complex64::new(lr, 0.0), Terminus::RealAxis))
    } else {
        let lg_alpha = |y: f64| ln_gamma(Complex64::new(a, y)).map(|l| l.re).unwrap_or(f64::NAN);
        let mut hi = 1.0;
        while lg_alpha(hi) > lr {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::Domain(format!("level {r} too small to bracket")));
            }
        }
        let mut y = bisect(|y| lg_alpha(y) - lr, 0.0, hi, 1e-15 * hi).ok_or(Error::TraceDivergence {
            at: Complex64::new(a, 0.0),
            reason: "no start on x = alpha".into(),
        })?;
        for _ in 0..3 {
            let slope = -digamma(Complex64::new(a, y))?.im;
            y -= (lg_alpha(y) - lr) / slope;
        }
        let z = Complex64::new(a, y);
        let l = ln_gamma(z)?;
        Ok((z, Complex64::new(lr, l.im), Terminus::AlphaLine))
    }
}

pub fn trace_modulus_curve(r: f64, x_end: f64) -> Result<LevelCurve> {
    Tracer::default().trace_modulus_curve(r, x_end)
}

pub fn trace_argument_curve(theta: f64, seed: Complex64, x_end: f64) -> Result<LevelCurve> {
    Tracer::default().trace_argument_curve(theta, seed, x_end)
}

pub fn z_star(z: Complex64) -> Result<CompanionPoint> {
    Tracer::default().z_star(z)
}

pub fn point_on_modulus_arc(z: Complex64, target_arg: f64) -> Result<Complex64> {
    Tracer::default().point_on_modulus_arc(z, target_arg)
}

fn quadrant_psi(z: Complex64) -> Result<Complex64> {
    if !QuadrantRegion::default().contains(z) {
        return Err(Error::Domain(format!("{z} is outside Q(alpha, 0)")));
    }
    digamma(z)
}

/// Slope `dy/dx` of the constant-modulus curve through `z`.
pub fn modulus_slope(z: Complex64) -> Result<f64> {
    let psi = quadrant_psi(z)?;
    Ok(psi.re / psi.im)
}

/// Slope `dy/dx` of the constant-argument curve through `z`.
pub fn argument_slope(z: Complex64) -> Result<f64> {
    let psi = quadrant_psi(z)?;
    Ok(-psi.im / psi.re)
}

/// `d(arg Gamma)/dx` along the constant-modulus curve through `z`.
pub fn arg_rate(z: Complex64) -> Result<f64> {
    let psi = quadrant_psi(z)?;
    Ok(psi.norm_sqr() / psi.im)
}

/// Mirror image of a curve in the lower quadrant.
pub fn reflect(curve: &LevelCurve) -> LevelCurve {
    LevelCurve {
        kind: match curve.kind {
            CurveKind::ConstantArgument { theta } => CurveKind::ConstantArgument { theta: -theta },
            k => k,
        },
        points: curve.points.iter().map(|z| z.conj()).collect(),
        log_values: curve.log_values.iter().map(|l| l.conj()).collect(),
        tol: curve.tol,
        terminus: curve.terminus,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::gamma;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn check_modulus_curve(curve: &LevelCurve, r: f64) {
        for w in curve.points.windows(2) {
            assert!(w[1].re > w[0].re && w[1].im > w[0].im, "{} -> {}", w[0], w[1]);
        }
        for z in &curve.points {
            let m = ln_gamma(*z).unwrap().re;
            assert!((m - r.ln()).abs() < curve.tol, "{z}: {}", (m - r.ln()).abs());
        }
    }

    #[test]
    fn curve_through_seed_point() {
        let seed = c(4.0, 3.0);
        let r = gamma(seed).unwrap().modulus();
        let curve = trace_modulus_curve(r, 10.0).unwrap();
        check_modulus_curve(&curve, r);
        let on = Tracer::default().trace_modulus_curve(r, 4.0).unwrap();
        assert!((on.points.last().unwrap() - seed).norm() < 1e-6);
        assert_eq!(curve.terminus, Terminus::RealAxis);
        assert!(curve.points.last().unwrap().re - 10.0 < 1e-12);
    }

    #[test]
    fn curve_starts_on_real_axis_at_factorial() {
        let curve = trace_modulus_curve(24.0, 12.0).unwrap();
        assert_eq!(curve.terminus, Terminus::RealAxis);
        assert!((curve.points[0] - 5.0).norm() < 1e-12);
        check_modulus_curve(&curve, 24.0);
    }

    #[test]
    fn small_levels_start_on_alpha_line() {
        let curve = trace_modulus_curve(0.1, 8.0).unwrap();
        assert_eq!(curve.terminus, Terminus::AlphaLine);
        assert!((curve.points[0].re - alpha()).abs() < 1e-15);
        check_modulus_curve(&curve, 0.1);
    }

    #[test]
    fn real_seed_argument_curve_is_the_axis() {
        let curve = trace_argument_curve(0.0, c(3.0, 0.0), 12.0).unwrap();
        assert!(curve.points.iter().all(|z| z.im == 0.0));
        assert!((curve.points[0].re - alpha()).abs() < 1e-6);
    }

    #[test]
    fn argument_curve_monotone() {
        let seed = c(6.0, 4.0);
        let theta = ln_gamma(seed).unwrap().im;
        let curve = trace_argument_curve(theta, seed, 30.0).unwrap();
        for w in curve.points.windows(2) {
            assert!(w[1].re > w[0].re && w[1].im < w[0].im);
        }
        for (w, l) in curve.points.windows(2).zip(curve.log_values.windows(2)) {
            assert!(l[1].re > l[0].re);
            assert!((ln_gamma(w[1]).unwrap().im - theta).abs() < 1e-9);
        }
        assert!((curve.points[0].re - alpha()).abs() < 1e-6);
    }

    #[test]
    fn z_star_properties() {
        let z = c(16.0, 5.0);
        let cp = z_star(z).unwrap();
        let g0 = gamma(z).unwrap().value;
        let g1 = gamma(cp.star).unwrap().value;
        assert!((g1 - g0).norm() / g0.norm() < 1e-8);
        assert!(cp.star.norm() > z.norm());
        // |z* - z| is close to 2 pi / |psi(z)|
        let est = 2.0 * PI / digamma(z).unwrap().norm();
        assert!(((cp.star - z).norm() - est).abs() < 0.1 * est);
        assert!(z_star(c(3.0, 1.0)).is_err());
    }

    #[test]
    fn arc_point_endpoints() {
        let z = c(8.0, 3.0);
        let arg = gamma(z).unwrap().arg;
        assert!((point_on_modulus_arc(z, arg).unwrap() - z).norm() < 1e-12);
        let star = z_star(z).unwrap().star;
        assert!((point_on_modulus_arc(z, arg + 2.0 * PI).unwrap() - star).norm() < 1e-9);
        let beta = point_on_modulus_arc(z, 1.0).unwrap();
        let gz = gamma(z).unwrap();
        let gb = gamma(beta).unwrap();
        assert!((gb.log_modulus - gz.log_modulus).abs() < 1e-8);
        assert!((principal_arg(gb.arg - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn slopes_against_traces() {
        let z = c(5.0, 3.0);
        let r = gamma(z).unwrap().modulus();
        let tr = Tracer::default();
        let a = tr.trace_modulus_curve(r, 5.0 - 1e-4).unwrap();
        let b = tr.trace_modulus_curve(r, 5.0 + 1e-4).unwrap();
        let secant = (b.points.last().unwrap().im - a.points.last().unwrap().im) / 2e-4;
        assert!((secant - modulus_slope(z).unwrap()).abs() / secant < 1e-4);

        let z = c(8.0, 4.0);
        let r = gamma(z).unwrap().modulus();
        let a = tr.trace_modulus_curve(r, 8.0 - 1e-4).unwrap();
        let b = tr.trace_modulus_curve(r, 8.0 + 1e-4).unwrap();
        let fd = (b.log_values.last().unwrap().im - a.log_values.last().unwrap().im) / 2e-4;
        assert!((fd - arg_rate(z).unwrap()).abs() / fd < 1e-3);
    }

    #[test]
    fn orthogonality() {
        for z in [c(2.0, 0.5), c(10.0, 30.0), c(100.0, 3.0)] {
            let p = modulus_slope(z).unwrap() * argument_slope(z).unwrap();
            assert!((p + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_properties() {
        let beta = c(7.0, 2.0);
        let gb = gamma(beta).unwrap();
        let big_r = gb.modulus() * 50.0;
        let rho = Tracer::default().rho(beta, big_r).unwrap();
        let gr = gamma(rho).unwrap();
        assert!((gr.modulus() - big_r).abs() / big_r < 1e-8);
        assert!(principal_arg(gr.arg - gb.arg).abs() < 1e-8);
        let near = Tracer::default().rho(beta, gb.modulus() * (1.0 + 1e-9)).unwrap();
        assert!((near - beta).norm() < 1e-8);
        assert!(Tracer::default().rho(beta, gb.modulus() * 0.5).is_err());
    }

    #[test]
    fn traces_from_different_seeds_agree() {
        let r = 1e3;
        let full = trace_modulus_curve(r, 20.0).unwrap();
        let mid = full.points[full.points.len() / 2];
        let l = ln_gamma(mid).unwrap();
        let tail = Tracer::default()
            .with_max_step(0.037)
            .walk_to_re(mid, Complex64::new(r.ln(), l.im), Complex64::i(), 20.0, true)
            .unwrap();
        assert!((tail.last().0 - full.points.last().unwrap()).norm() < 1e-6);
    }

    #[test]
    fn arc_offset_cases() {
        assert_eq!(arc_offset(1.0, 1.0), 0.0);
        assert!((arc_offset(1.0, 1.0 + 2.0 * PI) - 2.0 * PI).abs() < 1e-15);
        assert!((arc_offset(1.0, 0.5) - (2.0 * PI - 0.5)).abs() < 1e-12);
        assert!((arc_offset(-3.0, 3.0) - 6.0).abs() < 1e-12);
    }
}
