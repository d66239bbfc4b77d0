//! Closed certification contours and winding numbers of their images.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamma::{digamma, ln_gamma, QuadrantRegion};
use crate::level_curves::{Trace, Tracer};

pub const CLOSURE_TOL: f64 = 1e-7;
pub const MAX_WINDING_SAMPLES: usize = 1_000_000;
pub const ZERO_THRESHOLD: f64 = 1e-12;
/// Samples per edge of the exp rectangle.
pub const RECT_EDGE_SAMPLES: usize = 256;
/// Minimum number of trace steps per side of `K(beta, R)`.
pub const K_SIDE_SAMPLES: f64 = 96.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentLabel {
    /// `S(beta, beta*)` on `C_{|Gamma(beta)|}`.
    SBottom,
    /// `T(beta, R)` on the argument curve through `beta`.
    TLeft,
    /// `S(rho(beta, R), rho(beta*, R))` on `C_R`.
    STop,
    /// `T(beta*, R)`.
    TRight,
    RectBottom,
    RectRight,
    RectTop,
    RectLeft,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Segment {
    pub label: SegmentLabel,
    /// Whether the samples run against the segment's natural direction.
    pub reversed: bool,
    pub points: Vec<Complex64>,
}

/// Positively oriented closed polyline made of labeled segments. The last
/// point of each segment coincides with the first point of the next one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    pub segments: Vec<Segment>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingResult {
    pub winding: i64,
    pub min_image_modulus: f64,
    pub samples_used: usize,
}

/// The contour `K(beta, R)` with the points that define it.
#[derive(Debug, Clone, PartialEq)]
pub struct KCurve {
    pub beta: Complex64,
    pub beta_star: Complex64,
    pub rho: Complex64,
    pub rho_star: Complex64,
    /// `|Gamma(beta)|`
    pub r: f64,
    pub big_r: f64,
    pub contour: Contour,
    /// Analytic log Gamma at the samples of each segment, in natural order.
    pub logs: Vec<Vec<Complex64>>,
}

impl Contour {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() || segments.iter().any(|s| s.points.len() < 2) {
            return Err(Error::Geometry("every segment needs at least two samples".into()));
        }
        let mut segments = segments;
        let count = segments.len();
        for k in 0..count {
            let end = *segments[k].points.last().unwrap();
            let next = segments[(k + 1) % count].points[0];
            let gap = (end - next).norm();
            if gap > CLOSURE_TOL * next.norm().max(1.0) {
                return Err(Error::Geometry(format!(
                    "segment {:?} ends {gap:.3e} away from the start of the next one",
                    segments[k].label
                )));
            }
            // Stitch the tiny gap.
            *segments[k].points.last_mut().unwrap() = next;
        }
        Ok(Contour { segments })
    }

    /// Closed vertex list, first point not repeated at the end.
    pub fn vertices(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for s in &self.segments {
            out.extend_from_slice(&s.points[..s.points.len() - 1]);
        }
        out
    }

    pub fn segment(&self, label: SegmentLabel) -> Option<&Segment> {
        self.segments.iter().find(|s| s.label == label)
    }

    pub fn signed_area(&self) -> f64 {
        let v = self.vertices();
        let n = v.len();
        (0..n).map(|i| v[i].re * v[(i + 1) % n].im - v[(i + 1) % n].re * v[i].im).sum::<f64>() / 2.0
    }

    pub fn centroid(&self) -> Complex64 {
        let v = self.vertices();
        let n = v.len();
        let mut a = 0.0;
        let mut c = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let (p, q) = (v[i], v[(i + 1) % n]);
            let cross = p.re * q.im - q.re * p.im;
            a += cross;
            c += (p + q) * cross;
        }
        c / (3.0 * a)
    }

    /// Winding number of the polygon around `z`; zero outside.
    pub fn contains(&self, z: Complex64) -> bool {
        let v = self.vertices();
        let n = v.len();
        let mut wn = 0i64;
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let cross = (b.re - a.re) * (z.im - a.im) - (z.re - a.re) * (b.im - a.im);
            if a.im <= z.im {
                if b.im > z.im && cross > 0.0 {
                    wn += 1;
                }
            } else if b.im <= z.im && cross < 0.0 {
                wn -= 1;
            }
        }
        wn != 0
    }

    pub fn bbox(&self) -> [f64; 4] {
        let v = self.vertices();
        let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
        for z in v {
            b[0] = b[0].min(z.re);
            b[1] = b[1].min(z.im);
            b[2] = b[2].max(z.re);
            b[3] = b[3].max(z.im);
        }
        b
    }

    pub fn diameter(&self) -> f64 {
        let v = self.vertices();
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[i] - v[j]).norm());
            }
        }
        d
    }

    /// True when no two non-adjacent edges of the polyline intersect.
    pub fn is_simple(&self) -> bool {
        let v = self.vertices();
        let n = v.len();
        if n < 3 {
            return false;
        }
        let boxes: Vec<[f64; 4]> = (0..n)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % n]);
                [a.re.min(b.re), a.im.min(b.im), a.re.max(b.re), a.im.max(b.im)]
            })
            .collect();
        (0..n).into_par_iter().all(|i| {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (p, q) = (&boxes[i], &boxes[j]);
                if p[2] < q[0] || q[2] < p[0] || p[3] < q[1] || q[3] < p[1] {
                    continue;
                }
                if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                    return false;
                }
            }
            true
        })
    }

    /// Inserts the chord midpoint between every pair of samples.
    pub fn densified(&self) -> Contour {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                let mut points = Vec::with_capacity(2 * s.points.len());
                for w in s.points.windows(2) {
                    points.push(w[0]);
                    points.push((w[0] + w[1]) * 0.5);
                }
                points.push(*s.points.last().unwrap());
                Segment {
                    label: s.label,
                    reversed: s.reversed,
                    points,
                }
            })
            .collect();
        Contour { segments }
    }

    pub fn sample_count(&self) -> usize {
        self.vertices().len()
    }
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    (b.re - a.re) * (c.im - a.im) - (b.im - a.im) * (c.re - a.re)
}

fn segments_intersect(p1: Complex64, p2: Complex64, q1: Complex64, q2: Complex64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn reversed(trace: &Trace) -> Vec<Complex64> {
    trace.points.iter().rev().copied().collect()
}

/// Builds `K(beta, R)`. In log-Gamma coordinates it is the rectangle
/// `[log|Gamma(beta)|, log R] x [v, v + 2 pi]`, traversed counterclockwise:
/// `T(beta, R)`, `S(rho, rho*)`, `T(beta*, R)` backwards, `S(beta, beta*)`
/// backwards.
pub fn build_k(beta: Complex64, big_r: f64) -> Result<KCurve> {
    build_k_with(beta, big_r, 1.0)
}

/// As [`build_k`] with the sampling step scaled by `density_scale`.
pub fn build_k_with(beta: Complex64, big_r: f64, density_scale: f64) -> Result<KCurve> {
    if !QuadrantRegion::default().contains(beta) || beta.re < 4.0 {
        return Err(Error::Domain(format!("{beta} needs Re >= 4 inside Q(alpha, 0)")));
    }
    let l0 = ln_gamma(beta)?;
    let rise = big_r.ln() - l0.re;
    if !(rise > 0.0) {
        return Err(Error::Domain(format!(
            "R = {big_r} must exceed |Gamma(beta)| = {}",
            l0.re.exp()
        )));
    }
    let psi = digamma(beta)?.norm();
    let side = (2.0 * PI).min(rise) / psi;
    let step = (side / K_SIDE_SAMPLES).min(0.1) * density_scale;
    let tracer = Tracer::default().with_max_step(step);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::i();

    let s_bottom = tracer.walk_length(beta, l0, i, 2.0 * PI)?;
    let (beta_star, l_star) = s_bottom.last();
    let t_left = tracer.walk_length(beta, l0, one, rise)?;
    let (rho, l_rho) = t_left.last();
    let l_rho = Complex64::new(big_r.ln(), l_rho.im);
    let s_top = tracer.walk_length(rho, l_rho, i, 2.0 * PI)?;
    let t_right = tracer.walk_length(beta_star, l_star, one, big_r.ln() - l_star.re)?;
    let rho_star = t_right.last().0;

    let contour = Contour::new(vec![
        Segment {
            label: SegmentLabel::TLeft,
            reversed: false,
            points: t_left.points.clone(),
        },
        Segment {
            label: SegmentLabel::STop,
            reversed: false,
            points: s_top.points.clone(),
        },
        Segment {
            label: SegmentLabel::TRight,
            reversed: true,
            points: reversed(&t_right),
        },
        Segment {
            label: SegmentLabel::SBottom,
            reversed: true,
            points: reversed(&s_bottom),
        },
    ])?;
    Ok(KCurve {
        beta,
        beta_star,
        rho,
        rho_star,
        r: l0.re.exp(),
        big_r,
        contour,
        logs: vec![t_left.log_values, s_top.log_values, t_right.log_values, s_bottom.log_values],
    })
}

/// Rectangle with corners `x+iy`, `x+2+iy`, `x+2+i(y+2 pi)`, `x+i(y+2 pi)`
/// for `beta = x+iy`, counterclockwise.
pub fn build_rectangle(beta: Complex64) -> Contour {
    build_box(beta, beta + Complex64::new(2.0, 2.0 * PI)).expect("non-degenerate rectangle")
}

/// Axis-parallel box from its lower-left and upper-right corners,
/// counterclockwise, `RECT_EDGE_SAMPLES` intervals per edge.
pub fn build_box(lower_left: Complex64, upper_right: Complex64) -> Result<Contour> {
    if !(upper_right.re > lower_left.re && upper_right.im > lower_left.im) {
        return Err(Error::Geometry(format!("empty box from {lower_left} to {upper_right}")));
    }
    let corners = [
        lower_left,
        Complex64::new(upper_right.re, lower_left.im),
        upper_right,
        Complex64::new(lower_left.re, upper_right.im),
    ];
    let labels = [
        SegmentLabel::RectBottom,
        SegmentLabel::RectRight,
        SegmentLabel::RectTop,
        SegmentLabel::RectLeft,
    ];
    let segments = (0..4)
        .map(|k| {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            let mut points: Vec<Complex64> = (0..=RECT_EDGE_SAMPLES)
                .map(|m| a + (b - a) * (m as f64 / RECT_EDGE_SAMPLES as f64))
                .collect();
            points[0] = a;
            points[RECT_EDGE_SAMPLES] = b;
            Segment {
                label: labels[k],
                reversed: k >= 2,
                points,
            }
        })
        .collect();
    Contour::new(segments)
}

struct EdgeSum {
    turn: f64,
    min_modulus: f64,
    samples: usize,
}

fn edge_turn<F>(f: &F, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, budget: usize) -> Result<EdgeSum>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut stack = vec![(a, fa, b, fb)];
    let mut out = EdgeSum {
        turn: 0.0,
        min_modulus: fa.norm().min(fb.norm()),
        samples: 0,
    };
    while let Some((p, fp, q, fq)) = stack.pop() {
        let d = (fq / fp).arg();
        if d.abs() <= PI / 2.0 {
            out.turn += d;
            continue;
        }
        if out.samples >= budget {
            return Err(Error::NonConvergence(format!(
                "more than {MAX_WINDING_SAMPLES} samples needed near {p}"
            )));
        }
        let m = (p + q) * 0.5;
        if m == p || m == q {
            return Err(Error::ZeroOnContour(m));
        }
        let fm = f(m)?;
        out.samples += 1;
        let scale = fp.norm().max(fq.norm());
        if !fm.is_finite() || fm.norm() < ZERO_THRESHOLD * scale {
            return Err(Error::ZeroOnContour(m));
        }
        out.min_modulus = out.min_modulus.min(fm.norm());
        stack.push((m, fm, q, fq));
        stack.push((p, fp, m, fm));
    }
    Ok(out)
}

/// Winding number of `f(K)` around 0 from the summed argument increments of
/// `f` along the polyline, bisecting any edge whose increment exceeds
/// `pi / 2`.
pub fn winding_number<F>(f: F, contour: &Contour) -> Result<WindingResult>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let v = contour.vertices();
    let n = v.len();
    let values: Vec<Complex64> = v.par_iter().map(|z| f(*z)).collect::<Result<_>>()?;
    for k in 0..n {
        let scale = values[(k + n - 1) % n].norm().max(values[(k + 1) % n].norm());
        if !values[k].is_finite() || values[k].norm() < ZERO_THRESHOLD * scale || values[k].norm() == 0.0 {
            return Err(Error::ZeroOnContour(v[k]));
        }
    }
    if n >= MAX_WINDING_SAMPLES {
        return Err(Error::NonConvergence("contour has too many samples".into()));
    }
    let budget = MAX_WINDING_SAMPLES - n;
    let edges: Vec<EdgeSum> = (0..n)
        .into_par_iter()
        .map(|k| edge_turn(&f, v[k], values[k], v[(k + 1) % n], values[(k + 1) % n], budget))
        .collect::<Result<_>>()?;
    let samples = n + edges.iter().map(|e| e.samples).sum::<usize>();
    if samples > MAX_WINDING_SAMPLES {
        return Err(Error::NonConvergence(format!("{samples} samples exceed the cap")));
    }
    let total: f64 = edges.iter().map(|e| e.turn).sum();
    let turns = total / (2.0 * PI);
    let winding = turns.round();
    if (turns - winding).abs() >= 0.01 {
        return Err(Error::NonConvergence(format!(
            "argument sum {turns} is not close to an integer"
        )));
    }
    Ok(WindingResult {
        winding: winding as i64,
        min_image_modulus: edges.iter().map(|e| e.min_modulus).fold(f64::INFINITY, f64::min),
        samples_used: samples,
    })
}

pub fn rho(beta: Complex64, big_r: f64) -> Result<Complex64> {
    Tracer::default().rho(beta, big_r)
}
