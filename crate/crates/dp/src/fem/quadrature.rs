//! Quadrature rules on the reference simplex, in barycentric coordinates.
//!
//! Weights are normalized to sum to 1; integration scales each element's
//! contribution by its measure. 1D rules are Gauss-Legendre (exact up to
//! degree 2n-1), 2D rules are standard symmetric triangle rules.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
    /// Barycentric coordinates, `dim + 1` entries used per point.
    pub points: Vec<[f64; 3]>,
    /// Weights, summing to 1.
    pub weights: Vec<f64>,
}

/// Default exactness degree used throughout the crate.
pub const DEFAULT_DEGREE: usize = 4;

impl QuadratureRule {
    /// Rule with exactness at least `degree` in dimension `dim`.
    pub fn with_degree(dim: usize, degree: usize) -> Result<QuadratureRule> {
        match dim {
            1 => Ok(Self::gauss_1d(degree)),
            2 => Self::triangle(degree),
            _ => Err(Error::Config(format!("no quadrature for dimension {}", dim))),
        }
    }

    pub fn default_for(dim: usize) -> QuadratureRule {
        Self::with_degree(dim, DEFAULT_DEGREE).expect("default rule exists for dim 1 and 2")
    }

    fn gauss_1d(degree: usize) -> QuadratureRule {
        // n-point Gauss is exact up to degree 2n-1.
        let n = degree / 2 + 1;
        let (ts, ws): (Vec<f64>, Vec<f64>) = match n {
            1 => (vec![0.0], vec![2.0]),
            2 => {
                let t = 1.0 / 3f64.sqrt();
                (vec![-t, t], vec![1.0, 1.0])
            }
            3 => {
                let t = (3.0 / 5.0f64).sqrt();
                (vec![-t, 0.0, t], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
            }
            4 => {
                let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0 / 5.0f64).sqrt()).sqrt();
                let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0 / 5.0f64).sqrt()).sqrt();
                let wa = (18.0 + 30f64.sqrt()) / 36.0;
                let wb = (18.0 - 30f64.sqrt()) / 36.0;
                (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
            }
            _ => {
                let a = (5.0 - 2.0 * (10.0 / 7.0f64).sqrt()).sqrt() / 3.0;
                let b = (5.0 + 2.0 * (10.0 / 7.0f64).sqrt()).sqrt() / 3.0;
                let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
                let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
                (
                    vec![-b, -a, 0.0, a, b],
                    vec![wb, wa, 128.0 / 225.0, wa, wb],
                )
            }
        };
        let n = ts.len();
        // map [-1, 1] to barycentric (1-s, s), s in [0, 1]; halve weights.
        let points = ts
            .iter()
            .map(|&t| {
                let s = 0.5 * (t + 1.0);
                [1.0 - s, s, 0.0]
            })
            .collect();
        let weights = ws.iter().map(|&w| 0.5 * w).collect();
        QuadratureRule {
            dim: 1,
            degree: 2 * n - 1,
            points,
            weights,
        }
    }

    fn triangle(degree: usize) -> Result<QuadratureRule> {
        let (points, weights, degree) = match degree {
            0 | 1 => (
                vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]],
                vec![1.0],
                1,
            ),
            2 => {
                let mut pts = Vec::new();
                for i in 0..3 {
                    let mut b = [1.0 / 6.0; 3];
                    b[i] = 2.0 / 3.0;
                    pts.push(b);
                }
                (pts, vec![1.0 / 3.0; 3], 2)
            }
            3 | 4 => {
                // 6-point symmetric rule, exact to degree 4.
                let groups = [
                    (0.445_948_490_915_965, 0.223_381_589_678_011),
                    (0.091_576_213_509_771, 0.109_951_743_655_322),
                ];
                let mut pts = Vec::new();
                let mut ws = Vec::new();
                for &(a, w) in &groups {
                    for i in 0..3 {
                        let mut b = [a; 3];
                        b[i] = 1.0 - 2.0 * a;
                        pts.push(b);
                        ws.push(w);
                    }
                }
                (pts, ws, 4)
            }
            5 => {
                // 7-point symmetric rule, exact to degree 5.
                let s15 = 15f64.sqrt();
                let groups = [
                    ((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0),
                    ((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0),
                ];
                let mut pts = vec![[1.0 / 3.0; 3]];
                let mut ws = vec![9.0 / 40.0];
                for &(a, w) in &groups {
                    for i in 0..3 {
                        let mut b = [a; 3];
                        b[i] = 1.0 - 2.0 * a;
                        pts.push(b);
                        ws.push(w);
                    }
                }
                (pts, ws, 5)
            }
            d => {
                return Err(Error::Config(format!(
                    "triangle quadrature degree {} not available (max 5)",
                    d
                )))
            }
        };
        Ok(QuadratureRule {
            dim: 2,
            degree,
            points,
            weights,
        })
    }
}
