use std::f64::consts::{FRAC_PI_2, PI};

const QUAD_TOL: f64 = 1e-10;
const MAX_DEPTH: u32 = 48;

/// Normalized measure of the set of points at geodesic distance more than
/// `pi/2 + eps` from a pole of `S^dim`; by Lévy's isoperimetric inequality
/// this is the concentration function of the sphere.
///
/// Both integrals of `sin^(dim-1)` are evaluated by adaptive Simpson
/// quadrature to a relative tolerance of `1e-10`.
pub fn sphere_cap_alpha(dim: usize, eps: f64) -> f64 {
    assert!(dim >= 1, "sphere dimension must be at least 1");
    if !(eps > 0.0) {
        return 0.5;
    }
    if eps >= FRAC_PI_2 {
        return 0.0;
    }
    let power = (dim - 1) as i32;
    let density = |t: f64| t.sin().powi(power);
    let total = integrate(&density, 0.0, PI);
    let tail = integrate(&density, FRAC_PI_2 + eps, PI);
    (tail / total).clamp(0.0, 0.5)
}

fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    // coarse panels first so peaked integrands are resolved
    const PANELS: usize = 32;
    let h = (b - a) / PANELS as f64;
    let mut total = 0.0;
    let scale = (0..=PANELS)
        .map(|k| f(a + k as f64 * h).abs())
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE)
        * (b - a);
    for k in 0..PANELS {
        let lo = a + k as f64 * h;
        let hi = if k + 1 == PANELS { b } else { lo + h };
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        total += simpson(f, lo, hi, flo, fmid, fhi, whole, QUAD_TOL * scale / PANELS as f64, MAX_DEPTH);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        // S^2: cap area (1 - sin eps) / 2
        for eps in [0.05, 0.1, 0.3, 1.0, 1.5] {
            assert!((sphere_cap_alpha(2, eps) - (1.0 - eps.sin()) / 2.0).abs() < 1e-9);
        }
        // S^1: arc length
        assert!((sphere_cap_alpha(1, 0.5) - (FRAC_PI_2 - 0.5) / PI).abs() < 1e-9);
        assert!((sphere_cap_alpha(1, 0.5) - 0.340845).abs() < 1e-6);
        assert!((sphere_cap_alpha(2, 0.1) - 0.450083).abs() < 1e-6);
        // S^3: antiderivative of sin^2 is t/2 - sin(2t)/4
        let anti = |t: f64| t / 2.0 - (2.0 * t).sin() / 4.0;
        let eps = 0.4;
        let exact = (anti(PI) - anti(FRAC_PI_2 + eps)) / (anti(PI) - anti(0.0));
        assert!((sphere_cap_alpha(3, eps) - exact).abs() < 1e-9);
    }

    #[test]
    fn boundary_values() {
        for dim in [1, 2, 5, 50] {
            assert_eq!(sphere_cap_alpha(dim, FRAC_PI_2), 0.0);
            assert_eq!(sphere_cap_alpha(dim, 2.0), 0.0);
            assert_eq!(sphere_cap_alpha(dim, 0.0), 0.5);
        }
    }

    #[test]
    fn decreasing_in_eps_and_dimension() {
        for dim in [1, 2, 3, 10, 100] {
            let values: Vec<f64> = (1..150).map(|k| sphere_cap_alpha(dim, k as f64 * 0.01)).collect();
            assert!(values.windows(2).all(|w| w[1] < w[0]), "dim {dim}");
        }
        for k in 1..10 {
            let eps = k as f64 * 0.1;
            let by_dim: Vec<f64> = (1..40).map(|d| sphere_cap_alpha(d, eps)).collect();
            assert!(by_dim.windows(2).all(|w| w[1] < w[0]), "eps {eps}");
        }
    }
}
