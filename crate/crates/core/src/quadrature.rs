//! Gauss-Legendre rules on `[0, 1]`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Nodes in `(0, 1)` with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Affine image of the rule on `[a, b]`; weights scale with `b - a`.
    pub fn mapped(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let len = b - a;
        (
            self.nodes.iter().map(|&t| a + len * t).collect(),
            self.weights.iter().map(|&w| w * len).collect(),
        )
    }

    /// `∫_a^b f` with this rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(a + len * t))
            .sum::<f64>()
            * len
    }
}

/// `q`-point Gauss-Legendre rule on `[0, 1]`, exact for degree `2q - 1`.
pub fn gauss_legendre(q: usize) -> Result<QuadratureRule1D> {
    if !(1..=32).contains(&q) {
        return Err(Error::OrderOutOfRange(q));
    }
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    let m = q.div_ceil(2);
    for i in 0..m {
        // Newton on P_q starting from the Chebyshev-like guess
        let mut x = (PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(q, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(q, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - x);
        nodes[q - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[q - 1 - i] = 0.5 * w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.5;
    }
    Ok(QuadratureRule1D { nodes, weights })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let d = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn low_order_closed_forms() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes, vec![0.5]);
        assert_relative_eq!(r1.weights[0], 1.0, epsilon = 1e-15);
        let r2 = gauss_legendre(2).unwrap();
        let off = 0.5 / 3f64.sqrt();
        assert_relative_eq!(r2.nodes[0], 0.5 - off, epsilon = 1e-15);
        assert_relative_eq!(r2.nodes[1], 0.5 + off, epsilon = 1e-15);
        assert_relative_eq!(r2.weights[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn exactness_degree() {
        let r3 = gauss_legendre(3).unwrap();
        assert!((r3.integrate(0.0, 1.0, |x| x.powi(5)) - 1.0 / 6.0).abs() <= 1e-15);
        for q in 1..=32 {
            let r = gauss_legendre(q).unwrap();
            let deg = 2 * q - 1;
            let val = r.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert_relative_eq!(val, 1.0 / (deg as f64 + 1.0), max_relative = 1e-13);
            assert_relative_eq!(r.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.nodes.iter().all(|&x| x > 0.0 && x < 1.0));
            for i in 0..q {
                assert_relative_eq!(r.nodes[i] + r.nodes[q - 1 - i], 1.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn order_range() {
        assert_eq!(gauss_legendre(0), Err(Error::OrderOutOfRange(0)));
        assert_eq!(gauss_legendre(33), Err(Error::OrderOutOfRange(33)));
    }

    #[test]
    fn mapped_element_rule() {
        let r = gauss_legendre(2).unwrap();
        let (x, w) = r.mapped(0.25, 0.375);
        for (xi, ti) in x.iter().zip(&r.nodes) {
            assert_relative_eq!(*xi, 0.25 + 0.125 * ti, epsilon = 1e-15);
        }
        assert_relative_eq!(w.iter().sum::<f64>(), 0.125, epsilon = 1e-15);
    }
}
