//! Small numerical helpers shared by the modules: vector arithmetic on
//! `&[f64]`, order-independent reductions and quadrature.

use nalgebra::DMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

/// Pairwise (cascade) summation. The result depends only on the order of
/// `values`, never on how the values were produced, so parallel evaluation
/// followed by this reduction is deterministic.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Composite trapezoid rule on an arbitrary sorted grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(grid.len(), values.len());
    let terms: Vec<f64> = grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .collect();
    pairwise_sum(&terms)
}

/// Trapezoid on every other node, used as the coarse companion of
/// [`trapezoid`] for error estimates. The last node is always kept.
pub fn trapezoid_half(grid: &[f64], values: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..grid.len()).step_by(2).collect();
    if *idx.last().unwrap_or(&0) != grid.len() - 1 {
        idx.push(grid.len() - 1);
    }
    let g: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
    let v: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
    trapezoid(&g, &v)
}

/// One Richardson step on [`trapezoid`] and [`trapezoid_half`], which is
/// composite Simpson on an even number of uniform intervals. Falls back to
/// the plain trapezoid when the interval count is odd.
pub fn trapezoid_richardson(grid: &[f64], values: &[f64]) -> f64 {
    let fine = trapezoid(grid, values);
    if grid.len() < 3 || !(grid.len() - 1).is_multiple_of(2) {
        return fine;
    }
    fine + (fine - trapezoid_half(grid, values)) / 3.0
}

/// `n + 1` equispaced nodes on `[a, b]` with exact endpoints.
pub fn linspace(a: f64, b: f64, intervals: usize) -> Vec<f64> {
    let n = intervals.max(1);
    (0..=n)
        .map(|k| {
            if k == n {
                b
            } else {
                a + (b - a) * (k as f64) / (n as f64)
            }
        })
        .collect()
}

/// Observed convergence order from three successive refinements with a
/// constant ratio: `log(|q0 - q1| / |q1 - q2|) / log(ratio)`.
///
/// Returns `None` when the differences are at the roundoff floor, where an
/// order is meaningless.
pub fn observed_order(q0: f64, q1: f64, q2: f64, ratio: f64, floor: f64) -> Option<f64> {
    let d01 = (q0 - q1).abs();
    let d12 = (q1 - q2).abs();
    if d01 <= floor || d12 <= floor {
        return None;
    }
    Some((d01 / d12).ln() / ratio.ln())
}
