//! The planar norm whose unit ball is `C = {ψ(x) + ψ(y) ≤ 1}`, with `ψ` the
//! Huber function of parameter 1/2, and its polar norm.

/// `t²/2` for `|t| ≤ 1/2`, `(|t| − 1/4)/2` otherwise.
pub fn huber(t: f64) -> f64 {
    let a = t.abs();
    if a <= 0.5 {
        0.5 * a * a
    } else {
        0.5 * (a - 0.25)
    }
}

/// Nonnegative inverse of [`huber`] on `[0, ∞)`.
pub fn huber_inverse(y: f64) -> f64 {
    if y <= 0.125 {
        (2.0 * y.max(0.0)).sqrt()
    } else {
        2.0 * y + 0.25
    }
}

/// Half-width of `C` along an axis: the root of `ψ(t) = 1`.
pub const AXIS_EXTENT: f64 = 2.25;

/// Minkowski gauge `inf{λ > 0 : (x, y)/λ ∈ C}`.
///
/// `λ ↦ ψ(x/λ) + ψ(y/λ)` is decreasing, and the root is bracketed by
/// `max(|x|,|y|)/(9/4)` and the Euclidean norm since `ψ(t) ≤ t²/2`.
pub fn huber_gauge_norm(x: f64, y: f64) -> f64 {
    let m = x.abs().max(y.abs());
    if m == 0.0 {
        return 0.0;
    }
    let mut lo = m / AXIS_EXTENT;
    let mut hi = x.hypot(y);
    let level = |l: f64| huber(x / l) + huber(y / l) - 1.0;
    if level(lo) <= 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if level(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Support function `sup_{(u,v) ∈ C} (a u + b v)`, the polar norm.
///
/// By symmetry only the upper boundary `v = ψ⁻¹(1 − ψ(u))` matters, and
/// `u ↦ |a| u + |b| ψ⁻¹(1 − ψ(u))` is concave on `[−9/4, 9/4]`, so a golden-section
/// search finds its maximum.
pub fn huber_polar_norm(a: f64, b: f64) -> f64 {
    let (a, b) = (a.abs(), b.abs());
    if a == 0.0 && b == 0.0 {
        return 0.0;
    }
    let f = |u: f64| a * u + b * huber_inverse(1.0 - huber(u));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (-AXIS_EXTENT, AXIS_EXTENT);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2).max(f(AXIS_EXTENT)).max(f(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn huber_pieces() {
        assert_eq!(huber(0.0), 0.0);
        assert_eq!(huber(0.5), 0.125);
        assert_eq!(huber(-2.25), 1.0);
        for y in [0.0, 0.01, 0.125, 0.5, 1.0] {
            assert!((huber(huber_inverse(y)) - y).abs() < 1e-15);
        }
    }

    #[test]
    fn gauge_and_polar_on_axes() {
        assert_eq!(huber_gauge_norm(0.0, 0.0), 0.0);
        assert!((huber_gauge_norm(1.0, 0.0) - 4.0 / 9.0).abs() < 1e-14);
        assert!((huber_gauge_norm(0.0, -1.0) - 4.0 / 9.0).abs() < 1e-14);
        assert!((huber_polar_norm(1.0, 0.0) - 2.25).abs() < 1e-12);
        assert_eq!(huber_polar_norm(0.0, 0.0), 0.0);
    }

    #[test]
    fn gauge_is_homogeneous_and_boundary_is_unit() {
        for k in 0..64 {
            let th = 2.0 * PI * k as f64 / 64.0;
            let (x, y) = (th.cos(), th.sin());
            let n = huber_gauge_norm(x, y);
            assert!((huber(x / n) + huber(y / n) - 1.0).abs() < 1e-12);
            for lam in [0.1, 3.0, 17.0] {
                assert!((huber_gauge_norm(lam * x, lam * y) - lam * n).abs() < 1e-12 * lam);
            }
        }
    }

    #[test]
    fn polar_is_support_function() {
        // Brute force over boundary points of C.
        let pts: Vec<(f64, f64)> = (0..20000)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 20000.0;
                let n = huber_gauge_norm(th.cos(), th.sin());
                (th.cos() / n, th.sin() / n)
            })
            .collect();
        for k in 0..37 {
            let th = 0.17 * k as f64;
            let (a, b) = (th.cos(), th.sin());
            let brute = pts.iter().map(|(u, v)| a * u + b * v).fold(f64::NEG_INFINITY, f64::max);
            let p = huber_polar_norm(a, b);
            assert!(p >= brute - 1e-12 && p - brute < 1e-5, "{p} vs {brute}");
        }
    }

    #[test]
    fn polar_duality_pairing() {
        // |⟨z, x⟩| ≤ ‖z‖_C° ‖x‖_C.
        for i in 0..30 {
            for j in 0..30 {
                let (t1, t2) = (0.21 * i as f64, 0.37 * j as f64 + 0.1);
                let (x, y) = (t1.cos() * 1.3, t1.sin() * 0.7);
                let (a, b) = (t2.cos(), t2.sin() * 2.0);
                assert!((a * x + b * y).abs() <= huber_polar_norm(a, b) * huber_gauge_norm(x, y) + 1e-12);
            }
        }
    }

    #[test]
    fn polar_unit_sphere_is_strictly_convex() {
        let on_sphere = |th: f64| {
            let n = huber_polar_norm(th.cos(), th.sin());
            (th.cos() / n, th.sin() / n)
        };
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let t1 = 2.0 * PI * i as f64 / 100.0;
            for k in 1..40 {
                let t2 = t1 + 0.05 + 3.0 * k as f64 / 40.0;
                let (p, q) = (on_sphere(t1), on_sphere(t2));
                let mid = huber_polar_norm(0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1));
                assert!(mid < 1.0 - 1e-6, "midpoint norm {mid} at {t1}, {t2}");
                worst = worst.max(mid);
            }
        }
        assert!(worst > 0.9);
    }
}
