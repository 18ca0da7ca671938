//! Learning convex functions from subgradient queries, and concave ones by
//! learning their inverse.
//!
//! An oracle for slope `s` answers with an approximate point `x̃` at which `s`
//! is a subgradient of the convex function `G`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::pwl::PiecewiseLinearFn;

/// `i_max = ⌈(4/ε)·ln(4/ε)⌉` and the slopes `e^{iε/4}` for `i = −i_max..=i_max`.
pub fn slope_grid(eps: f64) -> Result<(i64, Vec<f64>)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("{eps} not in (0, 1)")));
    }
    let i_max = libm::ceil((4.0 / eps) * libm::log(4.0 / eps)) as i64;
    let slopes = (-i_max..=i_max).map(|i| libm::exp(i as f64 * eps / 4.0)).collect();
    Ok((i_max, slopes))
}

/// Builds `G̃` from the answers at every grid slope. Answers are projected
/// to a nondecreasing, nonnegative sequence first. `G̃` is 0 up to the first
/// answer, then follows each grid slope between consecutive answers, and is
/// extended with the steepest slope until it reaches 1.
pub fn learn_convex<O>(mut oracle: O, eps: f64) -> Result<PiecewiseLinearFn>
where
    O: FnMut(f64) -> Result<f64>,
{
    let (_, slopes) = slope_grid(eps)?;
    let mut xs = Vec::with_capacity(slopes.len());
    let mut run = 0.0f64;
    for &s in &slopes {
        let x = oracle(s)?;
        if !x.is_finite() {
            return Err(Error::Oracle(format!("non-finite answer {x} at slope {s}")));
        }
        run = run.max(x);
        xs.push(run);
    }

    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(xs.len() + 2);
    let push = |pts: &mut Vec<(f64, f64)>, p: (f64, f64)| match pts.last() {
        Some(&(x, _)) if x >= p.0 => {}
        _ => pts.push(p),
    };
    push(&mut pts, (0.0, 0.0));
    push(&mut pts, (xs[0], 0.0));
    let mut y = 0.0;
    for i in 0..xs.len() {
        let s = slopes[i];
        let next = if i + 1 < xs.len() { xs[i + 1] } else { f64::INFINITY };
        let reach = y + s * (next - xs[i]);
        if reach >= 1.0 {
            push(&mut pts, (xs[i] + (1.0 - y) / s, 1.0));
            break;
        }
        y = reach;
        push(&mut pts, (next, y));
    }
    if pts.len() < 2 {
        return Err(Error::InvalidFunction("degenerate learned function".into()));
    }
    PiecewiseLinearFn::new(pts)
}

/// `F̃` as the inverse of `G̃ = learn_convex(oracle, ε²/2)`; the oracle
/// answers for `G = F⁻¹`. On the flat start of `G̃`, `F̃(0)` takes the largest
/// preimage.
pub fn learn_concave<O>(oracle: O, eps: f64) -> Result<PiecewiseLinearFn>
where
    O: FnMut(f64) -> Result<f64>,
{
    let g = learn_convex(oracle, eps * eps / 2.0)?;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(g.len());
    for (x, y) in g.points() {
        match pts.last_mut() {
            Some(last) if last.0 == y => last.1 = last.1.max(x),
            _ => pts.push((y, x)),
        }
    }
    PiecewiseLinearFn::new(pts)
}
