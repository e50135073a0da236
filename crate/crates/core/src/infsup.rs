//! Numerical stability checks for the multiplier spaces.
//!
//! The corner test pairs `φ = Σ cᵢ Bᵢ` in the degree-`d` space with zero end
//! values against `τ = Σ cᵢ B̃ᵢ` in the space with merged end elements, both
//! restricted to the window `(0, ξ_{d+2})`, and reports the smallest
//! eigenvalue of `sym(M₁) v = μ M₂ v`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::assembly::{interface_rule, normal_jump};
use crate::bspline::KnotVector;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::spaces::{build_multiplier_space, build_trace_space, Discretization, MultiplierMode};
#[allow(unused_imports)]
use num_traits::Float;

/// How a plotted degree maps onto the degree of the tested spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DegreeIndexing {
    /// The plotted value is the primal degree `p`; the spaces have degree `p−1`.
    Primal,
    /// The plotted value is the degree of the tested spaces.
    Space,
}

impl DegreeIndexing {
    pub fn space_degree(self, plotted: usize) -> Result<usize> {
        match self {
            DegreeIndexing::Primal if plotted >= 2 => Ok(plotted - 1),
            DegreeIndexing::Space if plotted >= 1 => Ok(plotted),
            DegreeIndexing::Primal => Err(Error::DegreeTooLow {
                degree: plotted,
                min: 2,
            }),
            DegreeIndexing::Space => Err(Error::DegreeTooLow {
                degree: plotted,
                min: 1,
            }),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DegreeIndexing::Primal => "primal",
            DegreeIndexing::Space => "space",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "primal" => Some(DegreeIndexing::Primal),
            "space" => Some(DegreeIndexing::Space),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenStudy {
    /// Degree of the tested spaces.
    pub degree: usize,
    pub elements: usize,
    /// Right end of the corner window.
    pub window: f64,
    /// Coefficients whose basis functions meet the window.
    pub indices: Vec<usize>,
    pub mu_min: f64,
    /// All generalized eigenvalues, ascending.
    pub spectrum: Vec<f64>,
}

/// Corner test on `elements` uniform elements.
pub fn corner_eigen_test(degree: usize, elements: usize) -> Result<EigenStudy> {
    let interior: Vec<f64> = (1..elements).map(|i| i as f64 / elements as f64).collect();
    corner_eigen_knots(degree, &interior, 0)
}

/// Corner test on arbitrary interior breakpoints. `shift` moves the window
/// end by whole elements relative to `ξ_{d+2}`.
pub fn corner_eigen_knots(degree: usize, interior: &[f64], shift: isize) -> Result<EigenStudy> {
    let d = degree;
    if d == 0 {
        return Err(Error::DegreeTooLow { degree: 0, min: 1 });
    }
    let elements = interior.len() + 1;
    let needed = 2 * d + 4;
    if elements <= needed {
        return Err(Error::MeshTooCoarse { elements, needed });
    }
    let w_idx = (d as isize + 1 + shift).clamp(0, interior.len() as isize - 1) as usize;
    let window = interior[w_idx];

    let ones = vec![1; interior.len()];
    let s0 = KnotVector::with_end_multiplicity(d, d, interior, &ones)?;
    let sm = KnotVector::with_end_multiplicity(d, d + 1, &interior[1..interior.len() - 1], &ones[2..])?;
    debug_assert_eq!(s0.dimension(), sm.dimension());

    let indices: Vec<usize> = (0..s0.dimension())
        .filter(|&i| s0.support(i).0 < window || sm.support(i).0 < window)
        .collect();
    let m = indices.len();
    let pos = |i: usize| indices.iter().position(|&k| k == i);

    let rule = gauss_legendre(d + 1)?;
    let mut m1 = DMatrix::<f64>::zeros(m, m);
    let mut m2 = DMatrix::<f64>::zeros(m, m);
    let mut bp = vec![0.0];
    bp.extend(interior.iter().copied().filter(|&z| z <= window));
    for w in bp.windows(2) {
        let (xs, ws) = rule.mapped(w[0], w[1]);
        for (x, wt) in xs.into_iter().zip(ws) {
            let b0 = s0.eval(x, 0)?;
            let bm = sm.eval(x, 0)?;
            for (i, vi) in b0.indices().zip(b0.values()) {
                let Some(a) = pos(i) else { continue };
                for (j, vj) in b0.indices().zip(b0.values()) {
                    if let Some(b) = pos(j) {
                        m2[(a, b)] += wt * vi * vj;
                    }
                }
                for (j, vj) in bm.indices().zip(bm.values()) {
                    if let Some(b) = pos(j) {
                        m1[(a, b)] += wt * vi * vj;
                    }
                }
            }
        }
    }
    let sym = (&m1 + m1.transpose()) * 0.5;
    let spectrum = generalized_symmetric_eigenvalues(sym, m2)?;
    Ok(EigenStudy {
        degree: d,
        elements,
        window,
        indices,
        mu_min: spectrum[0],
        spectrum,
    })
}

/// Eigenvalues of `A v = μ M v` for symmetric `A` and SPD `M`, ascending.
pub fn generalized_symmetric_eigenvalues(a: DMatrix<f64>, m: DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let chol = m.cholesky().ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
    let l = chol.l();
    let x = l
        .solve_lower_triangular(&a)
        .ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
    let c = l
        .solve_lower_triangular(&x.transpose())
        .ok_or(Error::NotPositiveDefinite { row: 0, pivot: 0.0 })?;
    let c = (&c + c.transpose()) * 0.5;
    let mut e: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    debug_assert_eq!(e.len(), n);
    Ok(e)
}

/// `(plotted degree, μ_min)` on uniform meshes of `4d + 8` elements.
pub fn degree_sweep(plotted: &[usize], indexing: DegreeIndexing) -> Result<Vec<(usize, f64)>> {
    plotted
        .iter()
        .map(|&p| {
            let d = indexing.space_degree(p)?;
            Ok((p, corner_eigen_test(d, 4 * d + 8)?.mu_min))
        })
        .collect()
}

/// Interior knots perturbed by `amplitude · h · (ρ − 1/2)`, `ρ` uniform in
/// `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMeshSpec {
    pub elements: usize,
    pub amplitude: f64,
    pub seed: u64,
    pub trials: usize,
}

impl Default for RandomMeshSpec {
    fn default() -> Self {
        RandomMeshSpec {
            elements: 16,
            amplitude: 0.1,
            seed: 0,
            trials: 1000,
        }
    }
}

/// Uniform sample in `[0, 1)` with 53 random bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl RandomMeshSpec {
    /// Perturbed interior breakpoints of one trial. Each trial draws from
    /// its own ChaCha8 stream, so trials can run in any order.
    pub fn interior(&self, trial: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        let h = 1.0 / self.elements as f64;
        (1..self.elements)
            .map(|i| i as f64 * h + self.amplitude * h * (unit(&mut rng) - 0.5))
            .collect()
    }

    pub fn trial(&self, degree: usize, trial: usize) -> Result<f64> {
        Ok(corner_eigen_knots(degree, &self.interior(trial), 0)?.mu_min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomStudy {
    /// `μ_min` per trial, in trial order.
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl RandomStudy {
    pub fn from_values(values: Vec<f64>) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len().max(1) as f64;
        RandomStudy { values, min, max, mean }
    }

    pub fn histogram(&self, lo: f64, hi: f64, bins: usize) -> Vec<HistogramBin> {
        histogram(&self.values, lo, hi, bins)
    }
}

pub fn random_mesh_study(degree: usize, spec: &RandomMeshSpec) -> Result<RandomStudy> {
    let values = (0..spec.trials)
        .map(|t| spec.trial(degree, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomStudy::from_values(values))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

/// Equal-width bins on `[lo, hi]`; values outside are not counted.
pub fn histogram(values: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<HistogramBin> {
    let bins = bins.max(1);
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            left: lo + b as f64 * width,
            right: if b + 1 == bins { hi } else { lo + (b + 1) as f64 * width },
            count: 0,
        })
        .collect();
    for &v in values {
        if v < lo || v > hi {
            continue;
        }
        let b = (((v - lo) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

/// Singular values of the `W_ℓ × M_ℓ` mass matrix with L²-normalized bases.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingConditioning {
    pub rows: usize,
    pub cols: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub rank: usize,
}

impl CouplingConditioning {
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn full_row_rank(&self) -> bool {
        self.rank == self.rows
    }
}

pub fn coupling_conditioning(disc: &Discretization, l: usize, mode: MultiplierMode) -> Result<CouplingConditioning> {
    let trace = build_trace_space(disc, l);
    let mult = build_multiplier_space(&disc.topology.interface_breakpoints(l), l, disc.degree, mode)?;
    let Some(kv) = mult.knots else {
        return Err(Error::ShapeMismatch {
            rows: trace.dimension(),
            cols: 0,
        });
    };
    let (rows, cols) = (trace.dimension(), kv.dimension());
    let mut g = DMatrix::<f64>::zeros(rows, cols);
    let mut wn = vec![0.0; rows];
    let mut mn = vec![0.0; cols];
    for (y, wt) in interface_rule(disc, l, disc.degree + 2)? {
        let (_, jump) = normal_jump(disc, l, y)?;
        let mut w = vec![0.0; rows];
        for (d, v) in jump {
            if let Some(i) = trace.generators.iter().position(|&gd| gd == d) {
                w[i] += v;
            }
        }
        let mu = kv.eval(y, 0)?;
        for (i, wi) in w.iter().enumerate() {
            wn[i] += wt * wi * wi;
        }
        for (j, mj) in mu.indices().zip(mu.values()) {
            mn[j] += wt * mj * mj;
            for (i, wi) in w.iter().enumerate() {
                g[(i, j)] += wt * wi * mj;
            }
        }
    }
    for i in 0..rows {
        for j in 0..cols {
            g[(i, j)] /= (wn[i] * mn[j]).sqrt();
        }
    }
    let sv = g.svd(false, false).singular_values;
    let sigma_max = sv.iter().copied().fold(0.0, f64::max);
    let sigma_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let rank = sv.iter().filter(|&&s| s > 1e-10 * sigma_max).count();
    Ok(CouplingConditioning {
        rows,
        cols,
        sigma_min,
        sigma_max,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::topology::MultiPatchTopology;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniform_values_do_not_depend_on_h() {
        for d in 1..=4 {
            let a = corner_eigen_test(d, 2 * d + 6).unwrap().mu_min;
            for n in [2 * d + 9, 4 * d + 8, 40] {
                assert_abs_diff_eq!(corner_eigen_test(d, n).unwrap().mu_min, a, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn coarse_mesh_is_rejected() {
        assert_eq!(
            corner_eigen_test(2, 8).unwrap_err(),
            Error::MeshTooCoarse { elements: 8, needed: 8 }
        );
        assert!(corner_eigen_test(2, 9).is_ok());
    }

    #[test]
    fn indexing() {
        assert_eq!(DegreeIndexing::Primal.space_degree(3), Ok(2));
        assert_eq!(DegreeIndexing::Space.space_degree(3), Ok(3));
        assert!(DegreeIndexing::Primal.space_degree(1).is_err());
        assert_eq!(DegreeIndexing::from_name("primal"), Some(DegreeIndexing::Primal));
    }

    #[test]
    fn generalized_eigen_matches_scaled_identity() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 6.0]);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let e = generalized_symmetric_eigenvalues(a, m).unwrap();
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn random_streams_are_independent_and_increasing() {
        let spec = RandomMeshSpec {
            trials: 50,
            seed: 3,
            ..Default::default()
        };
        let a = spec.interior(7);
        assert_eq!(a, spec.interior(7));
        assert_ne!(a, spec.interior(8));
        for t in 0..spec.trials {
            let k = spec.interior(t);
            assert!(k.windows(2).all(|w| w[0] < w[1]));
            assert!(k[0] > 0.0 && *k.last().unwrap() < 1.0);
        }
    }

    #[test]
    fn histogram_counts_every_value_inside() {
        let v = [0.0, 0.1, 0.5, 0.99, 1.0, 1.5];
        let h = histogram(&v, 0.0, 1.0, 4);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 5);
        assert_eq!(h[0].count, 2);
        assert_eq!(h[3].count, 2);
        assert_eq!(h[3].right, 1.0);
    }

    #[test]
    fn merged_coupling_is_square_and_unmerged_is_not() {
        let t = MultiPatchTopology::new(builtin::square2()).unwrap();
        let d = Discretization::new(&t, 3, 3, None).unwrap();
        let merged = coupling_conditioning(&d, 0, MultiplierMode::Merged).unwrap();
        assert_eq!((merged.rows, merged.cols), (7, 7));
        assert!(merged.require_square().is_ok());
        let un = coupling_conditioning(&d, 0, MultiplierMode::Unmerged).unwrap();
        assert_eq!((un.rows, un.cols), (7, 9));
        assert!(un.full_row_rank());
        assert_eq!(un.require_square(), Err(Error::ShapeMismatch { rows: 7, cols: 9 }));
    }
}
