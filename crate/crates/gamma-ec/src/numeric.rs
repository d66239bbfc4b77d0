//! Small numerical building blocks shared by the solvers.

use num_complex::Complex64;

/// Bisection of a sign change of `f` on `[lo, hi]`, stopping when the bracket
/// width drops below `tol`. `observe` sees every bracket with its endpoint
/// values before it is split.
pub fn bisect_observed<F, O>(mut f: F, mut lo: f64, mut hi: f64, tol: f64, mut observe: O) -> Option<f64>
where
    F: FnMut(f64) -> f64,
    O: FnMut(f64, f64, f64, f64),
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if !(flo.signum() != fhi.signum()) || !flo.is_finite() || !fhi.is_finite() {
        return None;
    }
    let mut fhi = fhi;
    for _ in 0..200 {
        observe(lo, hi, flo, fhi);
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    Some(0.5 * (lo + hi))
}

pub fn bisect<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Option<f64> {
    bisect_observed(f, lo, hi, tol, |_, _, _, _| {})
}

/// All roots of `sum coeffs[k] x^k` by Durand-Kerner iteration followed by a
/// Newton polish. Leading zero coefficients are dropped.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1].norm() == 0.0 {
        deg -= 1;
    }
    if deg <= 1 {
        return Vec::new();
    }
    let lead = coeffs[deg - 1];
    let monic: Vec<Complex64> = coeffs[..deg].iter().map(|c| c / lead).collect();
    let n = deg - 1;
    let eval = |x: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c);
    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| radius * seed.powu(k as u32) / seed.norm().powi(k as i32))
        .collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = moved.max(step.norm() / (1.0 + roots[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    let deriv: Vec<Complex64> = (1..=n).map(|k| monic[k] * k as f64).collect();
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let p = eval(*r);
            let dp = deriv.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * *r + c);
            if dp.norm() == 0.0 {
                break;
            }
            *r -= p / dp;
        }
    }
    roots
}

/// Fujiwara's bound on the moduli of the roots of `sum coeffs[k] x^k`.
pub fn root_radius_bound(coeffs: &[Complex64]) -> f64 {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1].norm() == 0.0 {
        deg -= 1;
    }
    if deg <= 1 {
        return 0.0;
    }
    let n = deg - 1;
    let lead = coeffs[n].norm();
    let mut bound: f64 = 0.0;
    for k in 1..=n {
        let c = coeffs[n - k].norm() / lead;
        let c = if k == n { c / 2.0 } else { c };
        bound = bound.max(c.powf(1.0 / k as f64));
    }
    2.0 * bound
}

/// Element `index` of the van der Corput sequence in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * inv;
        index /= base;
        inv /= base as f64;
    }
    out
}

/// Two-dimensional Halton point with bases 2 and 3.
pub fn halton2(index: u64) -> (f64, f64) {
    (radical_inverse(index, 2), radical_inverse(index, 3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_keeps_opposite_signs() {
        let mut steps = 0;
        let root = bisect_observed(
            |x| x * x - 2.0,
            0.0,
            2.0,
            1e-14,
            |_, _, flo, fhi| {
                steps += 1;
                assert!(flo.signum() != fhi.signum());
            },
        )
        .unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-13);
        assert!(steps > 40);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn cubic_roots() {
        // (x - 1)(x + 2)(x - 3i) = x^3 + (1 - 3i) x^2 + (-2 - 3i) x + 6i
        let coeffs = [
            Complex64::new(0.0, 6.0),
            Complex64::new(-2.0, -3.0),
            Complex64::new(1.0, -3.0),
            Complex64::new(1.0, 0.0),
        ];
        let roots = polynomial_roots(&coeffs);
        for want in [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0), Complex64::new(0.0, 3.0)] {
            assert!(roots.iter().any(|r| (r - want).norm() < 1e-12), "{roots:?}");
        }
        assert!(root_radius_bound(&coeffs) >= 3.0);
    }

    #[test]
    fn halton_points_fill_the_square() {
        let pts: Vec<_> = (1..=64).map(halton2).collect();
        for (a, b) in &pts {
            assert!((0.0..1.0).contains(a) && (0.0..1.0).contains(b));
        }
        let low = pts.iter().filter(|p| p.0 < 0.5 && p.1 < 0.5).count();
        assert!((12..=20).contains(&low));
    }
}
