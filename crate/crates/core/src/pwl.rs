//! Breakpoint-represented piecewise-linear functions on a closed interval.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFn {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinearFn {
    /// Needs at least two points with strictly increasing, finite `x`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidFunction(format!("need at least 2 breakpoints, got {}", points.len())));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
        for i in 0..xs.len() {
            if !xs[i].is_finite() || !ys[i].is_finite() {
                return Err(Error::InvalidFunction(format!("non-finite breakpoint at index {i}")));
            }
            if i > 0 && xs[i] <= xs[i - 1] {
                return Err(Error::InvalidFunction(format!(
                    "x not strictly increasing at index {i}: {} then {}",
                    xs[i - 1],
                    xs[i]
                )));
            }
        }
        Ok(Self { xs, ys })
    }

    pub fn constant(lo: f64, hi: f64, y: f64) -> Result<Self> {
        Self::new(alloc::vec![(lo, y), (hi, y)])
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Segment index `i` with `xs[i] <= x <= xs[i+1]`, for `x` inside the domain.
    fn segment(&self, x: f64) -> usize {
        let k = self.xs.partition_point(|&b| b <= x);
        k.clamp(1, self.xs.len() - 1) - 1
    }

    fn interp(&self, i: usize, x: f64) -> f64 {
        let (x0, x1, y0, y1) = (self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]);
        if x == x0 {
            return y0;
        }
        if x == x1 {
            return y1;
        }
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }

    /// Linear interpolation; points within [`TOL`] outside the domain are
    /// snapped to it.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo - TOL && x <= hi + TOL) {
            return Err(Error::OutOfDomain { point: x, lo, hi });
        }
        Ok(self.eval_clamped(x))
    }

    /// Evaluates at `x` clamped into the domain.
    pub fn eval_clamped(&self, x: f64) -> f64 {
        let (lo, hi) = self.domain();
        let x = x.clamp(lo, hi);
        self.interp(self.segment(x), x)
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.xs.len() - 1).map(|i| self.slope(i)).collect()
    }

    fn slope(&self, i: usize) -> f64 {
        (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
    }

    /// Leftmost `x` with `f(x) = y`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        for i in 0..self.xs.len() - 1 {
            let (y0, y1) = (self.ys[i], self.ys[i + 1]);
            let (a, b) = if y0 <= y1 { (y0, y1) } else { (y1, y0) };
            if y >= a - TOL && y <= b + TOL {
                if (y - y0).abs() <= TOL || y0 == y1 {
                    return Ok(self.xs[i]);
                }
                if (y - y1).abs() <= TOL {
                    return Ok(self.xs[i + 1]);
                }
                let t = (y - y0) / (y1 - y0);
                return Ok(self.xs[i] + t * (self.xs[i + 1] - self.xs[i]));
            }
        }
        let lo = self.ys.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Err(Error::OutOfDomain { point: y, lo, hi })
    }

    /// Sorted `[lo, hi]` of the adjacent segment slopes at `x`; a single
    /// slope inside a segment or at a domain endpoint.
    pub fn subgradient(&self, x: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.domain();
        if !(x >= lo - TOL && x <= hi + TOL) {
            return Err(Error::OutOfDomain { point: x, lo, hi });
        }
        let n = self.xs.len();
        if let Some(k) = self.xs.iter().position(|&b| (b - x).abs() <= TOL) {
            if k == 0 {
                let s = self.slope(0);
                return Ok((s, s));
            }
            if k == n - 1 {
                let s = self.slope(n - 2);
                return Ok((s, s));
            }
            let (l, r) = (self.slope(k - 1), self.slope(k));
            return Ok(if l <= r { (l, r) } else { (r, l) });
        }
        let s = self.slope(self.segment(x.clamp(lo, hi)));
        Ok((s, s))
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.ys.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// Consecutive slopes nonincreasing; `tol` is on the value scale: each
    /// interior point may sit at most `tol` below the chord of its neighbours.
    pub fn is_concave(&self, tol: f64) -> bool {
        (1..self.xs.len() - 1).all(|k| self.ys[k] >= self.chord(k) - tol)
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        (1..self.xs.len() - 1).all(|k| self.ys[k] <= self.chord(k) + tol)
    }

    fn chord(&self, k: usize) -> f64 {
        let (x0, x1) = (self.xs[k - 1], self.xs[k + 1]);
        let t = (self.xs[k] - x0) / (x1 - x0);
        self.ys[k - 1] + t * (self.ys[k + 1] - self.ys[k - 1])
    }

    pub fn pointwise_min(&self, other: &Self) -> Result<Self> {
        self.combine(other, f64::min)
    }

    pub fn pointwise_max(&self, other: &Self) -> Result<Self> {
        self.combine(other, f64::max)
    }

    /// Clips values into `[lo, hi]`, inserting the crossing points.
    pub fn clip_values(&self, lo: f64, hi: f64) -> Self {
        let (a, b) = self.domain();
        let top = Self { xs: alloc::vec![a, b], ys: alloc::vec![hi, hi] };
        let bottom = Self { xs: alloc::vec![a, b], ys: alloc::vec![lo, lo] };
        // domains match by construction
        self.combine(&top, f64::min).and_then(|f| f.combine(&bottom, f64::max)).unwrap_or_else(|_| self.clone())
    }

    /// Applies `op` on the merged breakpoints of both functions, adding the
    /// points where they cross. Domains must agree.
    fn combine(&self, other: &Self, op: fn(f64, f64) -> f64) -> Result<Self> {
        let (lo, hi) = self.domain();
        let (lo2, hi2) = other.domain();
        if (lo - lo2).abs() > TOL || (hi - hi2).abs() > TOL {
            return Err(Error::InvalidFunction(format!("domain mismatch: [{lo}, {hi}] vs [{lo2}, {hi2}]")));
        }
        let mut xs: Vec<f64> = self.xs.iter().chain(&other.xs).copied().map(|x| x.clamp(lo, hi)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(xs.len() * 2);
        let mut prev: Option<(f64, f64)> = None;
        for &x in &xs {
            let d = self.eval_clamped(x) - other.eval_clamped(x);
            if let Some((px, pd)) = prev {
                if (pd < 0.0 && d > 0.0) || (pd > 0.0 && d < 0.0) {
                    let xc = px + (x - px) * (pd / (pd - d));
                    if xc > px && xc < x {
                        out.push((xc, op(self.eval_clamped(xc), other.eval_clamped(xc))));
                    }
                }
            }
            out.push((x, op(self.eval_clamped(x), other.eval_clamped(x))));
            prev = Some((x, d));
        }
        Self::new(out)
    }

    /// Drops interior breakpoints lying on the segment of their neighbours
    /// within `tol`.
    pub fn simplify(&self, tol: f64) -> Self {
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(self.xs.len());
        for (x, y) in self.points() {
            while pts.len() >= 2 {
                let (x0, y0) = pts[pts.len() - 2];
                let (x1, y1) = pts[pts.len() - 1];
                let on_line = y0 + (y - y0) * ((x1 - x0) / (x - x0));
                if (on_line - y1).abs() <= tol {
                    pts.pop();
                } else {
                    break;
                }
            }
            pts.push((x, y));
        }
        let (xs, ys) = pts.into_iter().unzip();
        Self { xs, ys }
    }
}

/// Indices of the upper concave hull of points sorted by `x`.
pub(crate) fn upper_hull_indices(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(pts.len());
    for i in 0..pts.len() {
        while hull.len() >= 2 {
            let a = pts[hull[hull.len() - 2]];
            let b = pts[hull[hull.len() - 1]];
            let c = pts[i];
            // b on or below the segment a→c
            let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Upper concave hull of points with distinct, ascending `x`.
pub fn concave_closure(points: &[(f64, f64)]) -> Result<PiecewiseLinearFn> {
    if points.len() < 2 {
        return Err(Error::InvalidFunction(format!("need at least 2 points, got {}", points.len())));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidFunction("x values must be distinct and ascending".into()));
    }
    let hull = upper_hull_indices(points);
    PiecewiseLinearFn::new(hull.into_iter().map(|i| points[i]).collect())
}
