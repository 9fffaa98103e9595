//! Closed-form and quadrature reference values: curvatures of balls and annuli,
//! ROF solutions for one or two far-apart balls, the radial λ-sweep and
//! Riesz-potential quantities.

mod radial;
mod riesz;

pub use radial::{lambda_sweep_radial, RadialKind, RadialSet, RadialSweep, SweepOptions};
pub use riesz::{
    fit_decay_exponent, radon_counterexample_margin, riesz_potential_at, riesz_potential_radial, RadialStep,
    RadonMargin, RieszQuadrature, RieszValue,
};

use crate::error::{Error, Result};

fn positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be positive, got {x}")))
    }
}

/// Variational curvature of `B(0, R)` in `R^d` at distance `x_radius` from the center.
///
/// `d/R` inside, `-(d-1)/|x|` outside.
pub fn ball_curvature(d: usize, r: f64, x_radius: f64) -> Result<f64> {
    positive(r, "ball radius")?;
    if d < 1 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    if !(x_radius >= 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be nonnegative, got {x_radius}")));
    }
    if x_radius < r {
        Ok(d as f64 / r)
    } else {
        Ok(-(d as f64 - 1.0) / x_radius)
    }
}

/// Constant curvature `2(r1 + r2)/(r2² − r1²) = 2/(r2 − r1)` of a planar annulus.
pub fn annulus_curvature(r1: f64, r2: f64) -> Result<f64> {
    positive(r1, "inner radius")?;
    if !(r2 > r1 && r2.is_finite()) {
        return Err(Error::InvalidArgument(format!("annulus needs r1 < r2, got ({r1}, {r2})")));
    }
    Ok(2.0 * (r1 + r2) / (r2 * r2 - r1 * r1))
}

/// Which closed form to use for ROF heights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeightConvention {
    /// `(c − α d/R)^+`, from the optimality condition `u = f − α v` with `v = (d/R) 1_B`.
    FirstOrder,
    /// `(c − α d/(2R))^+`, the constant printed in the original three-dimensional example.
    AsPrinted,
}

/// Height `b` of the ROF solution `b 1_B` for data `c 1_{B(0,R)}` and fidelity `½‖u − f‖²`.
pub fn rof_ball_solution(d: usize, r: f64, c: f64, alpha: f64, convention: HeightConvention) -> Result<f64> {
    positive(r, "ball radius")?;
    positive(c, "height")?;
    positive(alpha, "alpha")?;
    if d < 1 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let kappa = d as f64 / r;
    let shrink = match convention {
        HeightConvention::FirstOrder => alpha * kappa,
        HeightConvention::AsPrinted => 0.5 * alpha * kappa,
    };
    Ok((c - shrink).max(0.0))
}

/// Minimal center distance beyond which two balls can be treated independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationBound {
    /// `3 max(r1, r2)`.
    Nitsche,
    /// `2 max(r1, r2)`.
    Ros,
}

impl SeparationBound {
    pub fn value(self, r1: f64, r2: f64) -> f64 {
        let m = r1.max(r2);
        match self {
            SeparationBound::Nitsche => 3.0 * m,
            SeparationBound::Ros => 2.0 * m,
        }
    }
}

impl std::str::FromStr for SeparationBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nitsche" => Ok(SeparationBound::Nitsche),
            "ros" => Ok(SeparationBound::Ros),
            _ => Err(Error::Parse(format!("unknown separation bound {s:?}"))),
        }
    }
}

impl std::fmt::Display for SeparationBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SeparationBound::Nitsche => "nitsche",
            SeparationBound::Ros => "ros",
        })
    }
}

/// Data `c1 1_{B(0,r1)} + c2 1_{B(x0,r2)}` in three dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBallConfig {
    pub r1: f64,
    pub r2: f64,
    pub separation: f64,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub bound: SeparationBound,
}

impl TwoBallConfig {
    pub fn validate(&self) -> Result<()> {
        positive(self.r1, "r1")?;
        positive(self.r2, "r2")?;
        positive(self.c1, "c1")?;
        positive(self.c2, "c2")?;
        positive(self.alpha, "alpha")?;
        if !(self.separation > self.r1 + self.r2) {
            return Err(Error::InvalidArgument(format!(
                "balls overlap: separation {} <= r1 + r2 = {}",
                self.separation,
                self.r1 + self.r2
            )));
        }
        Ok(())
    }

    pub fn separation_bound(&self) -> f64 {
        self.bound.value(self.r1, self.r2)
    }

    pub fn is_far_apart(&self) -> bool {
        self.separation > self.separation_bound()
    }
}

/// Heights `(b, s)` of `u = b 1_{B(0,r1)} + s 1_{B(x0,r2)}`.
pub fn rof_two_balls_solution(cfg: &TwoBallConfig, convention: HeightConvention) -> Result<(f64, f64)> {
    cfg.validate()?;
    if !cfg.is_far_apart() {
        return Err(Error::NotFarApart { separation: cfg.separation, bound: cfg.separation_bound() });
    }
    Ok((
        rof_ball_solution(3, cfg.r1, cfg.c1, cfg.alpha, convention)?,
        rof_ball_solution(3, cfg.r2, cfg.c2, cfg.alpha, convention)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{isoperimetric_constant, unit_ball_volume};

    #[test]
    fn ball_curvature_values() {
        assert_eq!(ball_curvature(3, 1.0, 0.5).unwrap(), 3.0);
        assert_eq!(ball_curvature(2, 2.0, 0.0).unwrap(), 1.0);
        assert_eq!(ball_curvature(3, 1.0, 2.0).unwrap(), -1.0);
        assert!(ball_curvature(3, 0.0, 1.0).is_err());
    }

    #[test]
    fn ball_curvature_integrates_to_perimeter() {
        for d in [2usize, 3, 4] {
            let r: f64 = 1.7;
            let vol = unit_ball_volume(d) * r.powi(d as i32);
            let per = d as f64 * unit_ball_volume(d) * r.powi(d as i32 - 1);
            assert!((ball_curvature(d, r, 0.0).unwrap() * vol - per).abs() < 1e-12);
            // Same perimeter through the isoperimetric constant.
            let theta = isoperimetric_constant(d).unwrap();
            assert!((theta * vol.powf((d as f64 - 1.0) / d as f64) - per).abs() < 1e-12);
        }
    }

    #[test]
    fn annulus_values() {
        assert_eq!(annulus_curvature(1.0, 2.0).unwrap(), 2.0);
        for n in [1.0, 3.0, 10.0] {
            assert!((annulus_curvature(n, 2.0 * n).unwrap() - 2.0 / n).abs() < 1e-15);
        }
        let mut prev = f64::INFINITY;
        for k in 1..50 {
            let v = annulus_curvature(1.0, 1.0 + k as f64).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 0.05);
        assert!(annulus_curvature(2.0, 1.0).is_err());
    }

    #[test]
    fn rof_heights() {
        let fo = HeightConvention::FirstOrder;
        assert!((rof_ball_solution(2, 1.0, 1.0, 0.1, fo).unwrap() - 0.8).abs() < 1e-15);
        assert_eq!(rof_ball_solution(2, 1.0, 1.0, 0.6, fo).unwrap(), 0.0);
        assert_eq!(rof_ball_solution(3, 1.0, 1.0, 1.0 / 3.0, fo).unwrap(), 0.0);
        assert_eq!(rof_ball_solution(3, 1.0, 1.0, 1.0 / 3.0, HeightConvention::AsPrinted).unwrap(), 0.5);
    }

    #[test]
    fn two_ball_schedule_heights() {
        let f = |t: f64| t;
        for n in 1..6 {
            let nf = n as f64;
            let rn = f(1.0 / nf).powi(2);
            let cfg = TwoBallConfig {
                r1: 1.0,
                r2: rn,
                separation: 3.0,
                c1: 1.0,
                c2: 1.0 / (nf * rn) + 1.0,
                alpha: 1.0 / (3.0 * nf),
                bound: SeparationBound::Ros,
            };
            let (b, s) = rof_two_balls_solution(&cfg, HeightConvention::FirstOrder).unwrap();
            assert!((b - (1.0 - 1.0 / nf)).abs() < 1e-12);
            assert!((s - 1.0).abs() < 1e-12);
            let strict = TwoBallConfig { bound: SeparationBound::Nitsche, ..cfg };
            assert!(matches!(
                rof_two_balls_solution(&strict, HeightConvention::FirstOrder),
                Err(Error::NotFarApart { .. })
            ));
        }
    }

    #[test]
    fn small_perturbation_removed() {
        let cfg = TwoBallConfig {
            r1: 1.0,
            r2: 0.5,
            separation: 10.0,
            c1: 2.0,
            c2: 0.1,
            alpha: 0.5,
            bound: SeparationBound::Nitsche,
        };
        let (b, s) = rof_two_balls_solution(&cfg, HeightConvention::FirstOrder).unwrap();
        assert_eq!(s, 0.0);
        assert!((b - 0.5).abs() < 1e-15);
    }
}
