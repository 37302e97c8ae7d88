//! Per-feature standardization and Savitzky-Golay smoothing of data lines.

use serde::{Deserialize, Serialize};

use crate::error::{LscError, Result};
use crate::types::{DataMatrix, LineSeries};

/// Per-feature mean and population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Fits column means and population standard deviations (divide by `n`).
///
/// Constant columns get `std = 1`, so they standardize to all zeros.
pub fn fit_standardizer(m: &DataMatrix) -> StandardizationParams {
    let n = m.n_samples() as f64;
    let d = m.n_features();
    let mut means = vec![0.0; d];
    let mut stds = vec![1.0; d];
    for j in 0..d {
        let col = m.column(j);
        let mean = col.iter().sum::<f64>() / n;
        if col.iter().all(|&v| v == col[0]) {
            means[j] = col[0];
            continue;
        }
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        means[j] = mean;
        if var > 0.0 {
            stds[j] = var.sqrt();
        }
    }
    StandardizationParams { means, stds }
}

pub fn apply_standardizer(m: &DataMatrix, p: &StandardizationParams) -> Result<DataMatrix> {
    let d = m.n_features();
    if p.means.len() != d || p.stds.len() != d {
        return Err(LscError::DimensionMismatch {
            expected: d,
            found: p.means.len(),
        });
    }
    let values = m
        .rows()
        .flat_map(|row| {
            row.iter()
                .zip(p.means.iter().zip(&p.stds))
                .map(|(x, (mu, sigma))| (x - mu) / sigma)
        })
        .collect();
    DataMatrix::new(m.n_samples(), d, values)
}

/// Savitzky-Golay window: `window_length = 2m + 1` points, polynomial of
/// degree `poly_order < window_length`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SavGolSpec {
    pub window_length: usize,
    pub poly_order: usize,
}

impl Default for SavGolSpec {
    fn default() -> Self {
        Self {
            window_length: 5,
            poly_order: 2,
        }
    }
}

impl SavGolSpec {
    pub fn new(window_length: usize, poly_order: usize) -> Result<Self> {
        let spec = Self {
            window_length,
            poly_order,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.window_length < 3 || self.window_length.is_multiple_of(2) {
            return Err(LscError::InvalidConfig(format!(
                "window_length must be odd and >= 3, got {}",
                self.window_length
            )));
        }
        if self.poly_order >= self.window_length {
            return Err(LscError::InvalidConfig(format!(
                "poly_order ({}) must be smaller than window_length ({})",
                self.poly_order, self.window_length
            )));
        }
        Ok(())
    }

    pub fn half_width(&self) -> usize {
        self.window_length / 2
    }
}

/// Precomputed filter weights.
///
/// `coefficients` are the convolution weights for the window center. The
/// kernel also keeps, for every offset in the window, the weights that
/// evaluate the fitted polynomial at that offset; they are used for the
/// first and last `m` points of a line.
#[derive(Debug, Clone, PartialEq)]
pub struct SavGolKernel {
    spec: SavGolSpec,
    offset_weights: Vec<Vec<f64>>,
}

impl SavGolKernel {
    pub fn spec(&self) -> SavGolSpec {
        self.spec
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.offset_weights[self.spec.half_width()]
    }

    /// Weights that evaluate the window's least-squares polynomial at
    /// `offset` (in `-m..=m`) from the window samples.
    pub fn weights_at(&self, offset: isize) -> &[f64] {
        let m = self.spec.half_width() as isize;
        assert!(offset.abs() <= m, "offset {offset} outside window");
        &self.offset_weights[(offset + m) as usize]
    }
}

/// Least-squares weights for a polynomial fit of degree `poly_order` over
/// positions `-m..=m`.
///
/// The design matrix `A[k][p] = u_k^p` (positions scaled to `u_k = k/m`) is
/// factored as `A = QR`. The fitted value at `u` is
/// `h(u)^T R^{-1} Q^T y`, so the weight vector is `Q g` with
/// `R^T g = h(u)`.
pub fn savgol_kernel(spec: SavGolSpec) -> Result<SavGolKernel> {
    spec.validate()?;
    let m = spec.half_width();
    let cols = spec.poly_order + 1;
    let scale = m as f64;
    let positions: Vec<f64> = (-(m as isize)..=m as isize)
        .map(|k| k as f64 / scale)
        .collect();
    let design_cols: Vec<Vec<f64>> = (0..cols)
        .map(|p| positions.iter().map(|&u| u.powi(p as i32)).collect())
        .collect();
    let (q, r) = thin_qr(design_cols)?;

    let offset_weights = positions
        .iter()
        .map(|&u| {
            let h: Vec<f64> = (0..cols).map(|p| u.powi(p as i32)).collect();
            // forward substitution with R^T (lower triangular)
            let mut g = vec![0.0; cols];
            for i in 0..cols {
                let acc: f64 = (0..i).map(|k| r[k][i] * g[k]).sum();
                g[i] = (h[i] - acc) / r[i][i];
            }
            (0..positions.len())
                .map(|row| (0..cols).map(|c| q[c][row] * g[c]).sum())
                .collect()
        })
        .collect();
    Ok(SavGolKernel {
        spec,
        offset_weights,
    })
}

/// Thin QR of a column-stored matrix by modified Gram-Schmidt with one
/// re-orthogonalization pass. Returns `Q` as columns and upper-triangular `R`.
fn thin_qr(mut cols: Vec<Vec<f64>>) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let n = cols.len();
    let mut r = vec![vec![0.0; n]; n];
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let proj: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                r[i][j] += proj;
                let qi = cols[i].clone();
                for (v, q) in cols[j].iter_mut().zip(&qi) {
                    *v -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(LscError::InvalidConfig(
                "rank-deficient Savitzky-Golay design matrix".into(),
            ));
        }
        r[j][j] = norm;
        cols[j].iter_mut().for_each(|v| *v /= norm);
    }
    Ok((cols, r))
}

/// Smooths a raw value sequence. Interior points use the center kernel;
/// the first and last `m` points evaluate the polynomial fitted to the first
/// or last full window.
pub fn smooth_values(values: &[f64], kernel: &SavGolKernel) -> Result<Vec<f64>> {
    let w = kernel.spec.window_length;
    let m = kernel.spec.half_width();
    let n = values.len();
    if n < w {
        return Err(LscError::LineTooShort { len: n, window: w });
    }
    let dot = |weights: &[f64], start: usize| -> f64 {
        weights
            .iter()
            .zip(&values[start..start + w])
            .map(|(c, v)| c * v)
            .sum()
    };
    let mut out = Vec::with_capacity(n);
    for i in 0..m {
        out.push(dot(kernel.weights_at(i as isize - m as isize), 0));
    }
    let center = kernel.coefficients();
    for i in m..(n - m) {
        out.push(dot(center, i - m));
    }
    let tail_start = n - w;
    for i in (n - m)..n {
        let offset = i as isize - (n - 1 - m) as isize;
        out.push(dot(kernel.weights_at(offset), tail_start));
    }
    Ok(out)
}

pub fn smooth_line(line: &LineSeries, kernel: &SavGolKernel) -> Result<LineSeries> {
    Ok(line.with_values(smooth_values(line.values(), kernel)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Independent route: solve the unscaled 5x3 least-squares system via
    /// the explicit inverse of the 3x3 normal matrix (Cramer's rule).
    fn window5_order2_oracle() -> Vec<f64> {
        let xs = [-2.0f64, -1.0, 0.0, 1.0, 2.0];
        let s0 = 5.0;
        let s2: f64 = xs.iter().map(|x| x * x).sum();
        let s4: f64 = xs.iter().map(|x| x.powi(4)).sum();
        // A^T A = [[s0,0,s2],[0,s2,0],[s2,0,s4]]; first row of its inverse
        let det = s0 * s4 - s2 * s2;
        let inv00 = s4 / det;
        let inv02 = -s2 / det;
        xs.iter().map(|x| inv00 + inv02 * x * x).collect()
    }

    #[test]
    fn window5_order2_matches_tabulated_kernel() {
        let k = savgol_kernel(SavGolSpec::new(5, 2).unwrap()).unwrap();
        let oracle = window5_order2_oracle();
        let expected = [-3.0, 12.0, 17.0, 12.0, -3.0].map(|v| v / 35.0);
        for ((c, o), e) in k.coefficients().iter().zip(&oracle).zip(expected) {
            assert!(close(*c, *o, 1e-12), "{c} vs oracle {o}");
            assert!(close(*c, e, 1e-12), "{c} vs {e}");
        }
    }

    #[test]
    fn window3_order1_is_moving_average() {
        let k = savgol_kernel(SavGolSpec::new(3, 1).unwrap()).unwrap();
        for c in k.coefficients() {
            assert!(close(*c, 1.0 / 3.0, 1e-12));
        }
    }

    #[test]
    fn kernels_sum_to_one_and_are_symmetric() {
        for w in (3..=15).step_by(2) {
            for order in 0..w {
                let k = savgol_kernel(SavGolSpec::new(w, order).unwrap()).unwrap();
                let c = k.coefficients();
                assert!(close(c.iter().sum::<f64>(), 1.0, 1e-12), "w={w} order={order}");
                for i in 0..w {
                    assert!(close(c[i], c[w - 1 - i], 1e-12), "w={w} order={order}");
                }
            }
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(SavGolSpec::new(4, 2).is_err());
        assert!(SavGolSpec::new(1, 0).is_err());
        assert!(SavGolSpec::new(5, 5).is_err());
    }

    #[test]
    fn quadratic_reproduced_including_edges() {
        let k = savgol_kernel(SavGolSpec::default()).unwrap();
        let xs: Vec<f64> = (0..7).map(|x| (x * x) as f64).collect();
        let out = smooth_values(&xs, &k).unwrap();
        for (a, b) in out.iter().zip(&xs) {
            assert!(close(*a, *b, 1e-9), "{a} vs {b}");
        }
    }

    #[test]
    fn impulse_response_center() {
        let k = savgol_kernel(SavGolSpec::default()).unwrap();
        let out = smooth_values(&[0.0, 0.0, 1.0, 0.0, 0.0], &k).unwrap();
        assert!(close(out[2], 17.0 / 35.0, 1e-12));
    }

    #[test]
    fn constant_line_unchanged() {
        let k = savgol_kernel(SavGolSpec::default()).unwrap();
        let line = LineSeries::new(3, vec![2.5; 9]);
        let out = smooth_line(&line, &k).unwrap();
        assert_eq!(out.index(), 3);
        for v in out.values() {
            assert!(close(*v, 2.5, 1e-12));
        }
    }

    #[test]
    fn short_line_is_rejected() {
        let k = savgol_kernel(SavGolSpec::default()).unwrap();
        let err = smooth_values(&[1.0, 2.0, 3.0, 4.0], &k).unwrap_err();
        assert!(matches!(err, LscError::LineTooShort { len: 4, window: 5 }));
    }

    #[test]
    fn standardizer_population_std() {
        let m = DataMatrix::from_rows(&[[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]).unwrap();
        let p = fit_standardizer(&m);
        assert!(close(p.means[0], 2.0, 1e-15));
        assert!(close(p.stds[0], (2.0f64 / 3.0).sqrt(), 1e-15));
        assert_eq!(p.means[1], 5.0);
        assert_eq!(p.stds[1], 1.0);

        let z = apply_standardizer(&m, &p).unwrap();
        let expected = 1.0 / (2.0f64 / 3.0).sqrt();
        assert!(close(z.get(0, 0), -expected, 1e-12));
        assert!(close(z.get(1, 0), 0.0, 1e-15));
        assert!(close(z.get(2, 0), expected, 1e-12));
        assert_eq!(z.column(1), vec![0.0; 3]);

        let again = fit_standardizer(&z);
        assert!(close(again.means[0], 0.0, 1e-9));
        assert!(close(again.stds[0], 1.0, 1e-9));
    }

    #[test]
    fn constant_column_with_inexact_mean() {
        let m = DataMatrix::from_rows(&[[0.1], [0.1], [0.1]]).unwrap();
        let z = apply_standardizer(&m, &fit_standardizer(&m)).unwrap();
        assert_eq!(z.column(0), vec![0.0; 3]);
    }

    #[test]
    fn identity_params_leave_data_alone() {
        let m = DataMatrix::from_rows(&[[1.5, -2.0], [0.25, 8.0]]).unwrap();
        let p = StandardizationParams {
            means: vec![0.0; 2],
            stds: vec![1.0; 2],
        };
        assert_eq!(apply_standardizer(&m, &p).unwrap(), m);
    }

    #[test]
    fn standardizer_dimension_mismatch() {
        let m = DataMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let p = StandardizationParams {
            means: vec![0.0],
            stds: vec![1.0],
        };
        assert!(matches!(
            apply_standardizer(&m, &p),
            Err(LscError::DimensionMismatch { .. })
        ));
    }

    mod props {
        use proptest::prelude::*;

        use super::super::*;

        fn spec_strategy() -> impl Strategy<Value = SavGolSpec> {
            (1usize..6).prop_flat_map(|m| {
                let w = 2 * m + 1;
                (Just(w), 0..w).prop_map(|(w, p)| SavGolSpec::new(w, p).unwrap())
            })
        }

        proptest! {
            #[test]
            fn polynomials_up_to_order_pass_unchanged(
                spec in spec_strategy(),
                extra in 0usize..10,
                coeffs in proptest::collection::vec(-2.0f64..2.0, 11),
            ) {
                let k = savgol_kernel(spec).unwrap();
                let n = spec.window_length + extra;
                let scale = n as f64;
                let signal: Vec<f64> = (0..n)
                    .map(|x| {
                        let u = x as f64 / scale;
                        (0..=spec.poly_order).map(|p| coeffs[p] * u.powi(p as i32)).sum()
                    })
                    .collect();
                let out = smooth_values(&signal, &k).unwrap();
                for (a, b) in out.iter().zip(&signal) {
                    prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
                }
            }

            #[test]
            fn smoothing_is_linear(
                u in proptest::collection::vec(-10.0f64..10.0, 12),
                v in proptest::collection::vec(-10.0f64..10.0, 12),
                a in -3.0f64..3.0,
                b in -3.0f64..3.0,
            ) {
                let k = savgol_kernel(SavGolSpec::default()).unwrap();
                let mix: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
                let lhs = smooth_values(&mix, &k).unwrap();
                let su = smooth_values(&u, &k).unwrap();
                let sv = smooth_values(&v, &k).unwrap();
                for i in 0..12 {
                    prop_assert!((lhs[i] - (a * su[i] + b * sv[i])).abs() <= 1e-9);
                }
            }

            #[test]
            fn standardized_columns_have_zero_mean_unit_std(
                values in proptest::collection::vec(-100.0f64..100.0, 30),
            ) {
                let m = DataMatrix::new(10, 3, values).unwrap();
                let p = fit_standardizer(&m);
                let z = apply_standardizer(&m, &p).unwrap();
                for j in 0..3 {
                    let col = z.column(j);
                    let mean = col.iter().sum::<f64>() / 10.0;
                    let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 10.0;
                    prop_assert!(mean.abs() <= 1e-9);
                    if m.column(j).iter().any(|&x| x != m.get(0, j)) {
                        prop_assert!((var.sqrt() - 1.0).abs() <= 1e-9);
                    }
                }
            }
        }
    }
}
