// Copyright 2026 The capacitary Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Monotone piecewise-cubic Hermite interpolation.

use crate::error::{Error, Result};

/// Cubic Hermite interpolant that preserves strict monotonicity of the data.
///
/// Supplied slopes are kept where they satisfy the Fritsch–Carlson conditions
/// and clipped where they do not, so the interpolant is increasing whenever
/// the knot values are.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant from knots and (optional) exact slopes. Without
    /// slopes, three-point estimates are used.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, slopes: Option<Vec<f64>>) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n || slopes.as_ref().is_some_and(|s| s.len() != n) {
            return Err(Error::InvalidParameter(
                "monotone cubic needs at least two knots of matching length".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "knots must be strictly increasing".into(),
            ));
        }
        let secants: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut ds = slopes.unwrap_or_else(|| {
            let mut d = vec![0.0; n];
            d[0] = secants[0];
            d[n - 1] = secants[n - 2];
            for i in 1..n - 1 {
                d[i] = 0.5 * (secants[i - 1] + secants[i]);
            }
            d
        });
        for (i, &delta) in secants.iter().enumerate() {
            if delta == 0.0 {
                ds[i] = 0.0;
                ds[i + 1] = 0.0;
                continue;
            }
            if ds[i].signum() != delta.signum() {
                ds[i] = 0.0;
            }
            if ds[i + 1].signum() != delta.signum() {
                ds[i + 1] = 0.0;
            }
            let a = ds[i] / delta;
            let b = ds[i + 1] / delta;
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                ds[i] = t * a * delta;
                ds[i + 1] = t * b * delta;
            }
        }
        Ok(Self { xs, ys, ds })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.partition_point(|&k| k <= x) {
            0 => 0,
            i if i >= self.xs.len() => self.xs.len() - 2,
            i => i - 1,
        }
    }

    /// Value at `x`, clamped to the knot range.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.ys[i] + d10 * self.ds[i] + d01 * self.ys[i + 1] + d11 * self.ds[i + 1]
    }

    /// Inverse of an increasing interpolant by bisection on the segment that
    /// brackets `y`.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        let n = self.ys.len();
        if !(self.ys[0]..=self.ys[n - 1]).contains(&y) {
            return None;
        }
        let i = match self.ys.partition_point(|&v| v <= y) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (mut a, mut b) = (self.xs[i], self.xs[i + 1]);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.eval(mid) < y {
                a = mid;
            } else {
                b = mid;
            }
        }
        Some(0.5 * (a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let xs: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x + x).collect();
        let ds: Vec<f64> = xs.iter().map(|x| 3.0 * x * x + 1.0).collect();
        let s = MonotoneCubic::new(xs, ys, Some(ds)).unwrap();
        for x in [0.3, 1.7, 4.2] {
            assert!((s.eval(x) - (x * x * x + x)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0], None).is_err());
    }

    proptest! {
        #[test]
        fn increasing_data_gives_increasing_interpolant(
            steps in prop::collection::vec(1e-6f64..1.0, 2..20),
            jumps in prop::collection::vec(1e-6f64..10.0, 20),
        ) {
            let mut xs = vec![0.0];
            let mut ys = vec![0.0];
            for (i, s) in steps.iter().enumerate() {
                xs.push(xs[i] + s);
                ys.push(ys[i] + jumps[i]);
            }
            let spline = MonotoneCubic::new(xs.clone(), ys, None).unwrap();
            let (lo, hi) = spline.domain();
            let mut prev = spline.eval(lo);
            for k in 1..=400 {
                let x = lo + (hi - lo) * k as f64 / 400.0;
                let v = spline.eval(x);
                prop_assert!(v >= prev - 1e-12);
                prev = v;
            }
        }
    }
}
