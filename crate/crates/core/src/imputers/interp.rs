//! Linear and cubic-spline gap filling.

use crate::error::{Error, Result};
use crate::series::GappedSeries;

use super::ImputationResult;

pub(crate) fn observed_points(values: &[Option<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|y| (i as f64, y)))
        .unzip();
    if xs.is_empty() {
        return Err(Error::Unimputable("no observed values".into()));
    }
    Ok((xs, ys))
}

/// Straight-line fill between observed neighbours; leading and trailing gaps
/// take the nearest observed value.
pub(crate) fn fill_linear(values: &[Option<f64>]) -> Result<Vec<f64>> {
    let first = values
        .iter()
        .position(Option::is_some)
        .ok_or_else(|| Error::Unimputable("no observed values".into()))?;
    let mut out = Vec::with_capacity(values.len());
    let mut left = (first, values[first].unwrap());
    out.extend(std::iter::repeat_n(left.1, first));
    let mut i = first;
    while i < values.len() {
        match values[i] {
            Some(y) => {
                out.push(y);
                left = (i, y);
                i += 1;
            }
            None => {
                let next = values[i..].iter().position(Option::is_some).map(|o| i + o);
                match next {
                    Some(j) => {
                        let right = values[j].unwrap();
                        let span = (j - left.0) as f64;
                        for t in i..j {
                            let w = (t - left.0) as f64 / span;
                            out.push(left.1 + w * (right - left.1));
                        }
                        i = j;
                    }
                    None => {
                        out.extend(std::iter::repeat_n(left.1, values.len() - i));
                        i = values.len();
                    }
                }
            }
        }
    }
    Ok(out)
}

pub fn impute_linear(g: &GappedSeries) -> Result<ImputationResult> {
    fill_linear(g.values()).map(ImputationResult::from_builtin)
}

/// Cubic spline through every observed point, evaluated at interior gaps.
///
/// The end conditions match the third derivative of the cubic through the
/// four points nearest each end (Forsythe, Malcolm & Moler), so the spline
/// reproduces any cubic polynomial exactly. Gaps before the first or after
/// the last observation take the nearest observed value. Fewer than four
/// observations fall back to linear filling.
pub fn impute_spline(g: &GappedSeries) -> Result<ImputationResult> {
    let (xs, ys) = observed_points(g.values())?;
    if xs.len() < 4 {
        return impute_linear(g);
    }
    let spline = CubicSpline::fmm(&xs, &ys);
    let first = xs[0] as usize;
    let last = *xs.last().unwrap() as usize;
    let values = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            Some(y) => *y,
            None if i < first => ys[0],
            None if i > last => *ys.last().unwrap(),
            None => spline.eval(i as f64),
        })
        .collect();
    Ok(ImputationResult::from_builtin(values))
}

/// Piecewise cubic `y_i + b_i dx + c_i dx^2 + d_i dx^3` on `[x_i, x_{i+1})`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl CubicSpline {
    /// Fits a spline with Forsythe–Malcolm–Moler end conditions.
    ///
    /// `x` must be strictly increasing and hold at least four points.
    pub fn fmm(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(
            n >= 4 && y.len() == n,
            "fmm spline needs at least four points"
        );
        let nm1 = n - 1;
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];

        // Tridiagonal system: b = diagonal, d = off-diagonal, c = right-hand side.
        d[0] = x[1] - x[0];
        c[1] = (y[1] - y[0]) / d[0];
        for i in 1..nm1 {
            d[i] = x[i + 1] - x[i];
            b[i] = 2.0 * (d[i - 1] + d[i]);
            c[i + 1] = (y[i + 1] - y[i]) / d[i];
            c[i] = c[i + 1] - c[i];
        }

        // End conditions from third divided differences.
        b[0] = -d[0];
        b[nm1] = -d[n - 2];
        c[0] = c[2] / (x[3] - x[1]) - c[1] / (x[2] - x[0]);
        c[nm1] = c[n - 2] / (x[nm1] - x[n - 3]) - c[n - 3] / (x[n - 2] - x[n - 4]);
        c[0] = c[0] * d[0] * d[0] / (x[3] - x[0]);
        c[nm1] = -c[nm1] * d[n - 2] * d[n - 2] / (x[nm1] - x[n - 4]);

        for i in 1..=nm1 {
            let t = d[i - 1] / b[i - 1];
            b[i] -= t * d[i - 1];
            c[i] -= t * c[i - 1];
        }
        c[nm1] /= b[nm1];
        for i in (0..nm1).rev() {
            c[i] = (c[i] - d[i] * c[i + 1]) / b[i];
        }

        b[nm1] = (y[nm1] - y[n - 2]) / d[n - 2] + d[n - 2] * (c[n - 2] + 2.0 * c[nm1]);
        for i in 0..nm1 {
            b[i] = (y[i + 1] - y[i]) / d[i] - d[i] * (c[i + 1] + 2.0 * c[i]);
            d[i] = (c[i + 1] - c[i]) / d[i];
            c[i] *= 3.0;
        }
        c[nm1] *= 3.0;
        d[nm1] = d[n - 2];

        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            b,
            c,
            d,
        }
    }

    pub fn eval(&self, at: f64) -> f64 {
        // Index of the last knot <= at, clamped to the first segment.
        let i = self.x.partition_point(|&k| k <= at).saturating_sub(1);
        let dx = at - self.x[i];
        self.y[i] + dx * (self.b[i] + dx * (self.c[i] + dx * self.d[i]))
    }
}
