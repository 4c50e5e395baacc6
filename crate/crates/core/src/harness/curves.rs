use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::expfam::{logit, BetaCoupling};

pub const CURVES_HEADER: &str = "gamma,axis_space,x,beta_density,normal_density";
pub const DEFAULT_THETA_MEAN: f64 = 0.2;
pub const DEFAULT_GAMMAS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];
pub const DEFAULT_GRID: usize = 2001;
/// Half width of the natural-axis grid around the prior mode.
pub const NATURAL_HALF_WIDTH: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisSpace {
    /// Over θ̃.
    Natural,
    /// Over `v = σ(θ̃)`.
    Mean,
}

impl AxisSpace {
    pub fn name(&self) -> &'static str {
        match self {
            AxisSpace::Natural => "natural",
            AxisSpace::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub gamma: f64,
    pub axis: AxisSpace,
    pub x: f64,
    pub beta_density: f64,
    /// The Normal over θ̃ with the Beta prior's mode and variance (on the
    /// mean axis, the matching logistic-Normal).
    pub normal_density: f64,
}

fn gaussian_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// Beta coupling prior around `w = logit(theta_mean)` next to its matched
/// Normal, for each γ and both axes, `grid` points per curve.
pub fn prior_curves(theta_mean: f64, gammas: &[f64], grid: usize) -> Result<Vec<CurvePoint>> {
    if !(theta_mean > 0.0 && theta_mean < 1.0) {
        return Err(Error::Config(format!(
            "theta_mean must lie in (0, 1), got {theta_mean}"
        )));
    }
    if grid < 2 {
        return Err(Error::Config(format!("grid must be >= 2, got {grid}")));
    }
    if gammas.is_empty() {
        return Err(Error::Config("no gamma values given".into()));
    }
    let w = logit(theta_mean);
    let mut out = Vec::with_capacity(2 * grid * gammas.len());
    for &gamma in gammas {
        let prior = BetaCoupling::new(gamma).map_err(|e| Error::Config(e.to_string()))?;
        let mode = prior.mode(w);
        let var = prior.moments(w)?.variance;
        let step = 1.0 / (grid - 1) as f64;
        for i in 0..grid {
            let v = i as f64 * step;
            let normal = if v <= 0.0 || v >= 1.0 {
                0.0
            } else {
                gaussian_pdf(logit(v), mode, var) / (v * (1.0 - v))
            };
            out.push(CurvePoint {
                gamma,
                axis: AxisSpace::Mean,
                x: v,
                beta_density: prior.mean_density(v, w),
                normal_density: normal,
            });
        }
        let (lo, width) = (mode - NATURAL_HALF_WIDTH, 2.0 * NATURAL_HALF_WIDTH);
        for i in 0..grid {
            let t = lo + width * i as f64 / (grid - 1) as f64;
            out.push(CurvePoint {
                gamma,
                axis: AxisSpace::Natural,
                x: t,
                beta_density: prior.natural_density(t, w),
                normal_density: gaussian_pdf(t, mode, var),
            });
        }
    }
    Ok(out)
}

pub fn curves_csv(points: &[CurvePoint]) -> String {
    let mut out = format!("{CURVES_HEADER}\n");
    for p in points {
        writeln!(
            out,
            "{},{},{:.9e},{:.9e},{:.9e}",
            p.gamma,
            p.axis.name(),
            p.x,
            p.beta_density,
            p.normal_density
        )
        .unwrap();
    }
    out
}

pub fn export_prior_curves(
    theta_mean: f64,
    gammas: &[f64],
    grid: usize,
    out_path: &Path,
) -> Result<()> {
    let points = prior_curves(theta_mean, gammas, grid)?;
    std::fs::write(out_path, curves_csv(&points)).map_err(|e| Error::io(out_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_validation() {
        let pts = prior_curves(0.2, &[1.0, 10.0], 11).unwrap();
        assert_eq!(pts.len(), 44);
        assert_eq!(pts[0].x, 0.0);
        assert_eq!(pts[10].x, 1.0);
        assert!(prior_curves(0.2, &[1.0], 1).is_err());
        assert!(prior_curves(1.0, &[1.0], 10).is_err());
        assert!(prior_curves(0.2, &[-1.0], 10).is_err());
    }

    #[test]
    fn csv_layout() {
        let text = curves_csv(&prior_curves(0.5, &[2.0], 3).unwrap());
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], CURVES_HEADER);
        assert!(lines[1].starts_with("2,mean,0.000000000e0,"));
        assert!(lines[4].starts_with("2,natural,-4.000000000e1,"));
    }
}
