//! One-dimensional maximization by golden-section search.

use crate::Result;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section maximization of `f` on `[lo, hi]`.
///
/// Stops when the bracket width falls below `rel_tol · max(|x|, tiny)`, or
/// after `max_iter` reductions. The returned point is the best evaluated
/// point, so `value == f(x)` holds exactly. For a unimodal `f` it converges
/// to the maximizer; for a monotone `f` it converges to the upper endpoint.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<Maximum> {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evaluations = 2;
    let mut best = if fd > fc { (d, fd) } else { (c, fc) };
    for _ in 0..max_iter {
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if (b - a) <= rel_tol * scale {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            if fd > best.1 {
                best = (d, fd);
            }
        }
        evaluations += 1;
    }
    Ok(Maximum {
        x: best.0,
        value: best.1,
        evaluations,
    })
}

/// Evaluates `f` on `points` equally spaced nodes of `[lo, hi]` and returns
/// the index and value of the largest sample together with the grid.
pub fn grid_scan(
    mut f: impl FnMut(f64) -> Result<f64>,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok((grid, best.0, best.1))
}
