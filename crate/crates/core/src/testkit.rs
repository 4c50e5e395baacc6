//! Reference computations for checking the trainer: central finite
//! differences, golden-section search and brute-force enumeration. Nothing
//! here calls into the trainer or the objective code.

use crate::error::{Error, Result};
use crate::model::{GenerativeParams, SparseBinaryVector};

pub const FD_STEP: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-4;
pub const FD_ABS_FLOOR: f64 = 1e-8;
pub const GOLDEN_WIDTH: f64 = 1e-8;
/// Largest feature count [`enumerate_joint`] accepts.
pub const ENUM_MAX_FEATURES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDiffSpec {
    pub h: f64,
    pub rel_tol: f64,
    pub abs_floor: f64,
}

impl Default for FiniteDiffSpec {
    fn default() -> Self {
        FiniteDiffSpec {
            h: FD_STEP,
            rel_tol: FD_REL_TOL,
            abs_floor: FD_ABS_FLOOR,
        }
    }
}

impl FiniteDiffSpec {
    pub fn agrees(&self, analytic: f64, numeric: f64) -> bool {
        (analytic - numeric).abs()
            <= (self.rel_tol * analytic.abs().max(numeric.abs())).max(self.abs_floor)
    }

    /// First coordinate where the two gradients disagree.
    pub fn first_mismatch(&self, analytic: &[f64], numeric: &[f64]) -> Option<(usize, f64, f64)> {
        analytic
            .iter()
            .zip(numeric)
            .enumerate()
            .find(|(_, (a, n))| !self.agrees(**a, **n))
            .map(|(i, (a, n))| (i, *a, *n))
    }
}

/// Central-difference gradient of `f` at `point`.
pub fn fd_gradient(
    mut f: impl FnMut(&[f64]) -> f64,
    point: &[f64],
    spec: &FiniteDiffSpec,
) -> Result<Vec<f64>> {
    if !(spec.h > 0.0) {
        return Err(Error::Oracle(format!(
            "finite-difference step must be > 0, got {}",
            spec.h
        )));
    }
    let mut p = point.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + spec.h;
            let up = f(&p);
            p[i] = orig - spec.h;
            let down = f(&p);
            p[i] = orig;
            let g = (up - down) / (2.0 * spec.h);
            if g.is_nan() {
                return Err(Error::Oracle(format!(
                    "objective is NaN near coordinate {i} (f+={up}, f-={down})"
                )));
            }
            Ok(g)
        })
        .collect()
}

/// Maximizer of a unimodal `f` on `[lo, hi]` by golden-section search down
/// to a bracket of width `width`. Fails when the maximizer sits on an
/// endpoint.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, width: f64) -> Result<f64> {
    if !(lo < hi) || !(width > 0.0) {
        return Err(Error::Oracle(format!(
            "bad bracket [{lo}, {hi}] or width {width}"
        )));
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > width {
        if fc.is_nan() || fd.is_nan() {
            return Err(Error::Oracle(format!("objective is NaN inside [{a}, {b}]")));
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if a == c || d == b {
            break;
        }
    }
    let x = 0.5 * (a + b);
    let margin = 4.0 * width;
    if x - lo < margin || hi - x < margin {
        return Err(Error::Oracle(format!(
            "maximizer {x} lies on the edge of [{lo}, {hi}]"
        )));
    }
    Ok(x)
}

/// Coordinate-wise argmax of `surrogate(i, t)` for `i in 0..n`, each over
/// `bracket`.
pub fn brute_force_theta_tilde(
    surrogate: impl Fn(usize, f64) -> f64,
    n: usize,
    bracket: (f64, f64),
) -> Result<Vec<f64>> {
    (0..n)
        .map(|i| {
            golden_section_max(|t| surrogate(i, t), bracket.0, bracket.1, GOLDEN_WIDTH)
                .map_err(|e| Error::Oracle(format!("coordinate {i}: {e}")))
        })
        .collect()
}

/// `f(x+h) − 2f(x) + f(x−h)`; non-positive wherever `f` is concave.
pub fn second_difference(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    f(x + h) - 2.0 * f(x) + f(x - h)
}

fn bernoulli_mean(theta_tilde: f64) -> f64 {
    1.0 / (1.0 + (-theta_tilde).exp())
}

fn joint_probability(pi: &[f64], theta_tilde: &[f64], present: &[bool], y: usize) -> f64 {
    let m = present.len();
    let row = &theta_tilde[y * m..(y + 1) * m];
    present.iter().zip(row).fold(pi[y], |acc, (&on, &t)| {
        let v = bernoulli_mean(t);
        acc * if on { v } else { 1.0 - v }
    })
}

fn guard(m: usize) -> Result<()> {
    if m > ENUM_MAX_FEATURES {
        return Err(Error::Oracle(format!(
            "enumeration refused: M={m} exceeds {ENUM_MAX_FEATURES}"
        )));
    }
    Ok(())
}

/// `Σ_y Σ_{x ∈ {0,1}^M} p(x, y)` summed term by term.
pub fn enumerate_joint(gen: &GenerativeParams) -> Result<f64> {
    enumerate_joint_raw(gen.pi(), gen.theta_tilde(), gen.num_features())
}

/// [`enumerate_joint`] on unchecked arrays, so corrupted parameters can be
/// fed in.
pub fn enumerate_joint_raw(pi: &[f64], theta_tilde: &[f64], m: usize) -> Result<f64> {
    guard(m)?;
    if theta_tilde.len() != pi.len() * m {
        return Err(Error::Oracle(format!(
            "theta_tilde has {} entries, expected {}",
            theta_tilde.len(),
            pi.len() * m
        )));
    }
    let mut total = 0.0;
    let mut present = vec![false; m];
    for mask in 0u32..(1 << m) {
        for (d, p) in present.iter_mut().enumerate() {
            *p = mask >> d & 1 == 1;
        }
        for y in 0..pi.len() {
            total += joint_probability(pi, theta_tilde, &present, y);
        }
    }
    Ok(total)
}

/// `p(y | x)` by normalizing the enumerated joint over classes.
pub fn enumerate_posterior(gen: &GenerativeParams, x: &SparseBinaryVector) -> Result<Vec<f64>> {
    guard(gen.num_features())?;
    let present = x.to_dense();
    let joint: Vec<f64> = (0..gen.num_classes())
        .map(|y| joint_probability(gen.pi(), gen.theta_tilde(), &present, y))
        .collect();
    let z: f64 = joint.iter().sum();
    Ok(joint.into_iter().map(|p| p / z).collect())
}
