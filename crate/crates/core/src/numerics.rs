//! Small numerical helpers shared across modules: finite-difference weights
//! on arbitrary grids, quadrature over sampled integrands, least-squares
//! lines and medians.

/// Finite-difference weights for the m-th derivative at `x0` from the nodes
/// `x` (Fornberg's recurrence). Exact for polynomials up to degree
/// `x.len() - 1`.
pub fn fd_weights(x: &[f64], x0: f64, m: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > m, "need more nodes than the derivative order");
    // c[k][j]: weight of node j for the k-th derivative, built incrementally.
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c[m].clone()
}

/// First derivative of sampled data at every index of `grid`, using a
/// five-point Fornberg stencil (three-point at the edges). Fourth-order
/// accurate in the local spacing on smooth grids.
pub fn derivative_on_grid(grid: &[f64], f: &[f64]) -> Vec<f64> {
    let n = grid.len();
    assert_eq!(n, f.len());
    assert!(n >= 3, "need at least three samples");
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (lo, hi) = if n >= 5 {
            let lo = i.saturating_sub(2).min(n - 5);
            (lo, lo + 5)
        } else {
            (0, n)
        };
        let w = fd_weights(&grid[lo..hi], grid[i], 1);
        out[i] = w.iter().zip(&f[lo..hi]).map(|(wj, fj)| wj * fj).sum();
    }
    out
}

/// Integral of sampled data over its grid by composite Simpson on pairs of
/// adjacent intervals (trapezoid on a leftover last interval). Handles
/// non-uniform spacing; fourth-order on smoothly varying grids.
pub fn integrate_samples(grid: &[f64], f: &[f64]) -> f64 {
    let n = grid.len();
    assert_eq!(n, f.len());
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = grid[i + 1] - grid[i];
        let h1 = grid[i + 2] - grid[i + 1];
        let hs = h0 + h1;
        total += hs / 6.0
            * ((2.0 - h1 / h0) * f[i]
                + hs * hs / (h0 * h1) * f[i + 1]
                + (2.0 - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        total += 0.5 * (grid[i + 1] - grid[i]) * (f[i] + f[i + 1]);
    }
    total
}

/// Least-squares line y = a + b x; returns (a, b, max |residual|).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    assert!(x.len() == y.len() && x.len() >= 2);
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let worst = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - a - b * xi).abs())
        .fold(0.0f64, f64::max);
    (a, b, worst)
}

/// Median of a sample set (average of the middle pair for even counts).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_uniform_central_weights() {
        let w = fd_weights(&[-1.0, 0.0, 1.0], 0.0, 1);
        assert!((w[0] + 0.5).abs() < 1e-14);
        assert!(w[1].abs() < 1e-14);
        assert!((w[2] - 0.5).abs() < 1e-14);

        let w = fd_weights(&[-2.0, -1.0, 0.0, 1.0, 2.0], 0.0, 1);
        let expect = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn derivative_on_log_grid() {
        // decaying test function, like the profile-derived quantities the
        // stencil is used on: higher derivatives fall off faster than the
        // log spacing grows
        let grid: Vec<f64> = (0..200).map(|i| 0.1 * 10f64.powf(i as f64 / 64.0)).collect();
        let f: Vec<f64> = grid.iter().map(|r| 1.0 / (1.0 + r * r)).collect();
        let d = derivative_on_grid(&grid, &f);
        for (i, r) in grid.iter().enumerate() {
            let exact = -2.0 * r / (1.0 + r * r).powi(2);
            assert!(
                (d[i] - exact).abs() < 2e-6 * (1.0 + exact.abs()),
                "at r={r}: {} vs {exact}",
                d[i]
            );
        }
    }

    #[test]
    fn simpson_on_nonuniform_grid() {
        // integral of r/(1+r^2)^2 over [0, inf) = 1/2; truncate at 1e4 with a
        // log grid and allow for the O(1/r_max^2) tail.
        let mut grid = vec![0.0];
        grid.extend((0..((8.0 * 64.0) as usize)).map(|i| 1e-4 * 10f64.powf(i as f64 / 64.0)));
        let f: Vec<f64> = grid.iter().map(|r| r / (1.0 + r * r).powi(2)).collect();
        let got = integrate_samples(&grid, &f);
        let tail = 0.5 / (grid.last().unwrap().powi(2));
        assert!(
            (got + tail - 0.5).abs() < 1e-6,
            "integral {got} + tail {tail}"
        );
    }

    #[test]
    fn line_fit_recovers_slope() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|x| 3.0 - 2.0 * x).collect();
        let (a, b, res) = linear_fit(&x, &y);
        assert!((a - 3.0).abs() < 1e-12);
        assert!((b + 2.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn median_handles_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
