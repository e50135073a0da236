//! Univariate B-spline spaces.
//!
//! Knot vectors live on `[0, 1]`. Basis functions are evaluated with the
//! Cox-de Boor recursion in its triangular-table form, and derivatives come
//! from the knot-difference formula, so every order is exact up to rounding.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Knots closer than this are treated as the same breakpoint.
pub const KNOT_TOL: f64 = 1e-12;

/// A nondecreasing knot sequence on `[0, 1]` together with its degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    /// Validates an arbitrary knot sequence.
    ///
    /// The sequence must start at 0, end at 1, be nondecreasing and carry no
    /// breakpoint more than `degree + 1` times. End multiplicities below
    /// `degree + 1` are allowed; the missing end functions are simply absent.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 * degree + 2 {
            return Err(Error::InvalidKnotVector("fewer than 2(p+1) knots"));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnotVector("non-finite knot"));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::NonMonotone);
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 {
            return Err(Error::InvalidKnotVector("knots must span [0, 1]"));
        }
        let kv = KnotVector { degree, knots };
        for &m in &kv.multiplicities() {
            if m > degree + 1 {
                return Err(Error::MultiplicityOutOfRange {
                    multiplicity: m,
                    max: degree + 1,
                });
            }
        }
        let mults = kv.multiplicities();
        let (m0, m1) = (mults[0], mults[mults.len() - 1]);
        if m0 < degree.max(1) || m1 < degree.max(1) {
            return Err(Error::InvalidKnotVector("end multiplicity below the degree"));
        }
        if kv.dimension() < 1 {
            return Err(Error::InvalidKnotVector("empty space"));
        }
        Ok(kv)
    }

    /// Open knot vector: both ends repeated `degree + 1` times.
    pub fn open(degree: usize, interior: &[f64], multiplicities: &[usize]) -> Result<Self> {
        Self::with_end_multiplicity(degree, degree + 1, interior, multiplicities)
    }

    /// Knot vector whose end values are repeated `end_multiplicity` times.
    pub fn with_end_multiplicity(
        degree: usize,
        end_multiplicity: usize,
        interior: &[f64],
        multiplicities: &[usize],
    ) -> Result<Self> {
        if interior.len() != multiplicities.len() {
            return Err(Error::LengthMismatch {
                breakpoints: interior.len(),
                multiplicities: multiplicities.len(),
            });
        }
        check_interior(interior)?;
        if end_multiplicity == 0 || end_multiplicity > degree + 1 {
            return Err(Error::MultiplicityOutOfRange {
                multiplicity: end_multiplicity,
                max: degree + 1,
            });
        }
        for &m in multiplicities {
            if m == 0 || m > degree + 1 {
                return Err(Error::MultiplicityOutOfRange {
                    multiplicity: m,
                    max: degree + 1,
                });
            }
        }
        let mut knots = vec![0.0; end_multiplicity];
        for (&z, &m) in interior.iter().zip(multiplicities) {
            knots.extend(core::iter::repeat_n(z, m));
        }
        knots.extend(core::iter::repeat_n(1.0, end_multiplicity));
        Self::new(degree, knots)
    }

    /// Open knot vector with `elements` equal spans and simple interior knots.
    pub fn uniform(degree: usize, elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::TooFewElements { found: 0, needed: 1 });
        }
        let interior: Vec<f64> = (1..elements).map(|i| i as f64 / elements as f64).collect();
        let mults = vec![1; interior.len()];
        Self::open(degree, &interior, &mults)
    }

    /// Open knot vector of the given degree on the given breakpoints, each
    /// interior breakpoint with multiplicity one.
    pub fn open_on_breakpoints(degree: usize, breakpoints: &[f64]) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidKnotVector("need at least two breakpoints"));
        }
        let interior = &breakpoints[1..breakpoints.len() - 1];
        Self::open(degree, interior, &vec![1; interior.len()])
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions, `#knots - p - 1`.
    pub fn dimension(&self) -> usize {
        self.knots.len().saturating_sub(self.degree + 1)
    }

    /// Distinct knot values in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            match out.last() {
                Some(&last) if (k - last).abs() <= KNOT_TOL => {}
                _ => out.push(k),
            }
        }
        out
    }

    /// Multiplicity of each breakpoint, aligned with [`Self::breakpoints`].
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        let mut last: Option<f64> = None;
        for &k in &self.knots {
            match last {
                Some(l) if (k - l).abs() <= KNOT_TOL => *out.last_mut().unwrap() += 1,
                _ => {
                    out.push(1);
                    last = Some(k);
                }
            }
        }
        out
    }

    pub fn interior_breakpoints(&self) -> Vec<f64> {
        let bp = self.breakpoints();
        bp[1..bp.len() - 1].to_vec()
    }

    /// Multiplicity of the value 0 at the start of the vector.
    pub fn end_multiplicity(&self) -> usize {
        self.multiplicities()[0]
    }

    pub fn is_open(&self) -> bool {
        let m = self.multiplicities();
        m[0] == self.degree + 1 && m[m.len() - 1] == self.degree + 1
    }

    pub fn num_elements(&self) -> usize {
        self.breakpoints().len() - 1
    }

    /// Lengths of the nonempty knot spans.
    pub fn element_sizes(&self) -> Vec<f64> {
        self.breakpoints().windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Global mesh size: the largest nonempty span.
    pub fn mesh_size(&self) -> f64 {
        self.element_sizes().into_iter().fold(0.0, f64::max)
    }

    /// Quasi-uniformity ratio: smallest nonempty span over the largest.
    pub fn quasi_uniformity(&self) -> f64 {
        let sizes = self.element_sizes();
        let min = sizes.iter().copied().fold(f64::INFINITY, f64::min);
        min / self.mesh_size()
    }

    /// Index of the element containing `x`; the right end belongs to the last
    /// element.
    pub fn element_of(&self, x: f64) -> Result<usize> {
        check_domain(x)?;
        let bp = self.breakpoints();
        let last = bp.len() - 2;
        // first breakpoint strictly greater than x, minus one
        let idx = bp.partition_point(|&b| b <= x);
        Ok(idx.saturating_sub(1).min(last))
    }

    /// Knot span index `i` with `knots[i] <= x < knots[i+1]`, using the left
    /// limit at `x = 1`.
    pub fn find_span(&self, x: f64) -> Result<usize> {
        check_domain(x)?;
        let n = self.knots.len();
        let mut i = self.knots.partition_point(|&k| k <= x);
        if i == n {
            // x == 1: step back to the last nonempty span
            i = self.knots.partition_point(|&k| k < x);
        }
        Ok(i - 1)
    }

    /// Removes the first and the last interior breakpoints, merging the two
    /// end elements with their neighbours. End multiplicities are kept.
    pub fn merge_end_elements(&self) -> Result<KnotVector> {
        let bp = self.breakpoints();
        let interior = bp.len().saturating_sub(2);
        if interior < 3 {
            return Err(Error::TooFewElements {
                found: interior,
                needed: 3,
            });
        }
        let (first, last) = (bp[1], bp[bp.len() - 2]);
        let knots = self
            .knots
            .iter()
            .copied()
            .filter(|&k| (k - first).abs() > KNOT_TOL && (k - last).abs() > KNOT_TOL)
            .collect();
        KnotVector::new(self.degree, knots)
    }

    /// Bisects every nonempty span `levels` times.
    pub fn refine_uniform(&self, levels: usize) -> KnotVector {
        let mut kv = self.clone();
        for _ in 0..levels {
            let mids: Vec<f64> = kv.breakpoints().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            let mut knots = kv.knots.clone();
            knots.extend(mids);
            knots.sort_by(f64::total_cmp);
            kv = KnotVector {
                degree: kv.degree,
                knots,
            };
        }
        kv
    }

    /// The same breakpoints with a different degree, open, simple interior
    /// knots.
    pub fn with_degree(&self, degree: usize) -> Result<KnotVector> {
        Self::open_on_breakpoints(degree, &self.breakpoints())
    }

    /// Values and derivatives up to `max_deriv` of the basis functions that do
    /// not vanish at `x`.
    ///
    /// Derivatives of order above the degree are returned as zeros.
    pub fn eval(&self, x: f64, max_deriv: usize) -> Result<BasisEval> {
        let span = self.find_span(x)?;
        let ders = ders_basis_funs(span, x, self.degree, max_deriv, &self.knots);
        // The table holds functions span-p ..= span; drop the ones that do
        // not exist for reduced end multiplicities.
        let p = self.degree as isize;
        let first = span as isize - p;
        let n = self.dimension() as isize;
        let lo = (-first).max(0) as usize;
        let hi = ((n - first).min(p + 1)) as usize;
        let ders = ders.into_iter().map(|row| row[lo..hi].to_vec()).collect();
        Ok(BasisEval {
            first: (first + lo as isize) as usize,
            ders,
        })
    }

    /// Evaluates a single basis function and its derivatives; zero outside its
    /// support.
    pub fn eval_one(&self, index: usize, x: f64, max_deriv: usize) -> Result<Vec<f64>> {
        let be = self.eval(x, max_deriv)?;
        Ok((0..=max_deriv).map(|k| be.get(k, index)).collect())
    }

    /// Support `[knots[i], knots[i + p + 1]]` of basis function `i`.
    pub fn support(&self, index: usize) -> (f64, f64) {
        (self.knots[index], self.knots[index + self.degree + 1])
    }
}

fn check_domain(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(x))
    }
}

fn check_interior(interior: &[f64]) -> Result<()> {
    if interior.iter().any(|&z| !(z > 0.0 && z < 1.0)) {
        return Err(Error::NonMonotone);
    }
    if interior.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotone);
    }
    Ok(())
}

/// Triangular-table Cox-de Boor evaluation with derivatives, returning
/// `ders[k][j]` = k-th derivative of function `span - p + j`.
fn ders_basis_funs(span: usize, x: f64, p: usize, n: usize, knots: &[f64]) -> Vec<Vec<f64>> {
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            // lower triangle: knot differences
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = if ndu[j][r] == 0.0 {
                0.0
            } else {
                ndu[r][j - 1] / ndu[j][r]
            };
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![0.0; p + 1]; n + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=n.min(p) {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                let rk = rk as usize;
                let den = ndu[pk + 1][rk];
                a[s2][0] = if den == 0.0 { 0.0 } else { a[s1][0] / den };
                d = a[s2][0] * ndu[rk][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                let den = ndu[pk + 1][idx];
                a[s2][j] = if den == 0.0 {
                    0.0
                } else {
                    (a[s1][j] - a[s1][j - 1]) / den
                };
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                let den = ndu[pk + 1][r];
                a[s2][k] = if den == 0.0 { 0.0 } else { -a[s1][k - 1] / den };
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            core::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = p as f64;
    for k in 1..=n.min(p) {
        for v in ders[k].iter_mut() {
            *v *= factor;
        }
        factor *= (p - k) as f64;
    }
    ders
}

/// Nonvanishing basis functions at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisEval {
    /// Global index of the first entry.
    pub first: usize,
    /// `ders[k][j]`: k-th derivative of function `first + j`.
    pub ders: Vec<Vec<f64>>,
}

impl BasisEval {
    pub fn values(&self) -> &[f64] {
        &self.ders[0]
    }

    pub fn len(&self) -> usize {
        self.ders[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.ders[0].is_empty()
    }

    pub fn indices(&self) -> core::ops::Range<usize> {
        self.first..self.first + self.len()
    }

    /// Derivative of order `order` of global function `index` (zero when not
    /// active here).
    pub fn get(&self, order: usize, index: usize) -> f64 {
        if index < self.first || index >= self.first + self.len() || order >= self.ders.len() {
            0.0
        } else {
            self.ders[order][index - self.first]
        }
    }
}

/// Linear side conditions carried by the special interface spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceConstraint {
    /// `v = 0` at both endpoints.
    ZeroAtEnds,
    /// `v = v' = 0` at both endpoints.
    ZeroWithSlopeAtEnds,
    /// `∫ v = 0`.
    ZeroMean,
}

impl SpaceConstraint {
    fn count(self) -> usize {
        match self {
            SpaceConstraint::ZeroAtEnds => 2,
            SpaceConstraint::ZeroWithSlopeAtEnds => 4,
            SpaceConstraint::ZeroMean => 1,
        }
    }
}

/// The four one-dimensional spaces used by the multiplier construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialSpaceKind {
    /// Degree p, open, `v = v' = 0` at the ends.
    PrimalClamped,
    /// Degree p-1, open, zero at the ends and zero mean.
    ReducedZero,
    /// Degree p-1, open, end elements merged, zero mean.
    ReducedMerged,
    /// Degree p-2, open, end elements merged.
    MultiplierMerged,
}

/// A spline space on `[0, 1]` plus the linear conditions restricting it.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineSpace1D {
    pub knot_vector: KnotVector,
    pub constraints: Vec<SpaceConstraint>,
}

impl SplineSpace1D {
    pub fn new(knot_vector: KnotVector) -> Self {
        SplineSpace1D {
            knot_vector,
            constraints: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.knot_vector.degree()
    }

    /// Dimension of the unconstrained spline space.
    pub fn dimension(&self) -> usize {
        self.knot_vector.dimension()
    }

    /// Dimension after applying the side conditions (all of them are
    /// independent on the spaces built here).
    pub fn constrained_dimension(&self) -> usize {
        let c: usize = self.constraints.iter().map(|c| c.count()).sum();
        self.dimension().saturating_sub(c)
    }

    pub fn element_of(&self, x: f64) -> Result<usize> {
        self.knot_vector.element_of(x)
    }

    pub fn eval(&self, x: f64, max_deriv: usize) -> Result<BasisEval> {
        self.knot_vector.eval(x, max_deriv)
    }

    pub fn mesh_size(&self) -> f64 {
        self.knot_vector.mesh_size()
    }

    pub fn quasi_uniformity(&self) -> f64 {
        self.knot_vector.quasi_uniformity()
    }

    /// Smoothness `p - m_j` across each interior breakpoint.
    pub fn regularity(&self) -> Vec<isize> {
        let m = self.knot_vector.multiplicities();
        let p = self.degree() as isize;
        m[1..m.len() - 1].iter().map(|&mj| p - mj as isize).collect()
    }

    /// Builds one of the special interface spaces for primal degree `p` on the
    /// given interior breakpoints.
    pub fn special(kind: SpecialSpaceKind, p: usize, interior: &[f64]) -> Result<Self> {
        let min = match kind {
            SpecialSpaceKind::MultiplierMerged => 2,
            _ => 1,
        };
        if p < min {
            return Err(Error::DegreeTooLow { degree: p, min });
        }
        let ones = vec![1; interior.len()];
        let space = match kind {
            SpecialSpaceKind::PrimalClamped => SplineSpace1D {
                knot_vector: KnotVector::open(p, interior, &ones)?,
                constraints: vec![SpaceConstraint::ZeroWithSlopeAtEnds],
            },
            SpecialSpaceKind::ReducedZero => SplineSpace1D {
                knot_vector: KnotVector::open(p - 1, interior, &ones)?,
                constraints: vec![SpaceConstraint::ZeroAtEnds, SpaceConstraint::ZeroMean],
            },
            SpecialSpaceKind::ReducedMerged => SplineSpace1D {
                knot_vector: KnotVector::open(p - 1, interior, &ones)?.merge_end_elements()?,
                constraints: vec![SpaceConstraint::ZeroMean],
            },
            SpecialSpaceKind::MultiplierMerged => SplineSpace1D {
                knot_vector: KnotVector::open(p - 2, interior, &ones)?.merge_end_elements()?,
                constraints: Vec::new(),
            },
        };
        Ok(space)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn uniform_interior(n: usize) -> Vec<f64> {
        (1..n).map(|i| i as f64 / n as f64).collect()
    }

    #[test]
    fn open_vector_construction() {
        let kv = KnotVector::open(3, &uniform_interior(8), &[1; 7]).unwrap();
        assert_eq!(kv.knots().len(), 15);
        assert_eq!(kv.dimension(), 11);
        assert_eq!(&kv.knots()[..4], &[0.0; 4]);
        assert_relative_eq!(kv.knots()[4], 0.125);
        let bern = KnotVector::open(2, &[], &[]).unwrap();
        assert_eq!(bern.knots(), &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(bern.dimension(), 3);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(KnotVector::open(2, &[0.5, 0.3], &[1, 1]), Err(Error::NonMonotone));
        assert!(matches!(
            KnotVector::open(2, &[0.5], &[4]),
            Err(Error::MultiplicityOutOfRange { .. })
        ));
        assert!(matches!(
            KnotVector::open(2, &[0.5], &[0]),
            Err(Error::MultiplicityOutOfRange { .. })
        ));
        assert_eq!(KnotVector::open(2, &[1.0], &[1]), Err(Error::NonMonotone));
    }

    #[test]
    fn merge_removes_first_and_last_interior_knots() {
        let h = 0.125;
        let kv = KnotVector::open(1, &uniform_interior(8), &[1; 7]).unwrap();
        let merged = kv.merge_end_elements().unwrap();
        let mut expected = vec![0.0, 0.0];
        expected.extend((2..=6).map(|i| i as f64 * h));
        expected.extend([1.0, 1.0]);
        assert_eq!(merged.knots().len(), expected.len());
        for (a, b) in merged.knots().iter().zip(&expected) {
            assert_relative_eq!(*a, *b);
        }

        let kv3 = KnotVector::open(3, &uniform_interior(8), &[1; 7]).unwrap();
        let m3 = kv3.merge_end_elements().unwrap();
        assert_eq!(m3.end_multiplicity(), 4);
        assert_eq!(m3.interior_breakpoints().len(), 5);
        assert_relative_eq!(m3.interior_breakpoints()[0], 0.25);

        let short = KnotVector::open(2, &[1.0 / 3.0, 2.0 / 3.0], &[1, 1]).unwrap();
        assert_eq!(
            short.merge_end_elements(),
            Err(Error::TooFewElements { found: 2, needed: 3 })
        );
    }

    #[test]
    fn special_spaces() {
        let interior = uniform_interior(8);
        let m = SplineSpace1D::special(SpecialSpaceKind::MultiplierMerged, 3, &interior).unwrap();
        assert_eq!(m.degree(), 1);
        assert_eq!(m.dimension(), 7);
        assert_eq!(m.knot_vector.knots().len(), 9);

        let c = SplineSpace1D::special(SpecialSpaceKind::PrimalClamped, 3, &interior).unwrap();
        assert_eq!(c.degree(), 3);
        assert_eq!(c.dimension(), 11);
        assert_eq!(c.constrained_dimension(), 7);

        let r = SplineSpace1D::special(SpecialSpaceKind::ReducedZero, 3, &interior).unwrap();
        assert_eq!(r.knot_vector.end_multiplicity(), 3);
        assert_eq!(r.constrained_dimension(), r.dimension() - 3);

        let rm = SplineSpace1D::special(SpecialSpaceKind::ReducedMerged, 3, &interior).unwrap();
        assert_eq!(rm.knot_vector.end_multiplicity(), 3);
        assert_eq!(rm.dimension(), 8);

        assert_eq!(
            SplineSpace1D::special(SpecialSpaceKind::MultiplierMerged, 1, &interior),
            Err(Error::DegreeTooLow { degree: 1, min: 2 })
        );
    }

    #[test]
    fn bernstein_values_and_derivatives() {
        let kv = KnotVector::open(2, &[], &[]).unwrap();
        let be = kv.eval(0.5, 1).unwrap();
        assert_eq!(be.first, 0);
        for (a, b) in be.values().iter().zip([0.25, 0.5, 0.25]) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
        // d/dx of (1-x)^2, 2x(1-x), x^2 at 0.5
        for (a, b) in be.ders[1].iter().zip([-1.0, 0.0, 1.0]) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn dimension_and_element_lookup() {
        let kv = KnotVector::uniform(3, 8).unwrap();
        assert_eq!(kv.dimension(), 11);
        assert_eq!(kv.element_of(0.3).unwrap(), 2);
        assert_eq!(kv.element_of(1.0).unwrap(), 7);
        assert_eq!(kv.element_of(0.0).unwrap(), 0);
        assert_eq!(kv.element_of(1.5), Err(Error::OutOfDomain(1.5)));
        assert_eq!(KnotVector::uniform(2, 1).unwrap().dimension(), 3);
    }

    #[test]
    fn right_endpoint_uses_left_limit() {
        let kv = KnotVector::uniform(3, 4).unwrap();
        let be = kv.eval(1.0, 0).unwrap();
        assert_eq!(be.first + be.len(), kv.dimension());
        assert_relative_eq!(*be.values().last().unwrap(), 1.0);
        let be0 = kv.eval(0.0, 0).unwrap();
        assert_eq!(be0.first, 0);
        assert_relative_eq!(be0.values()[0], 1.0);
    }

    #[test]
    fn reduced_end_multiplicity_drops_end_functions() {
        // degree 2 with end multiplicity 2: the open basis without its first
        // and last function
        let interior = uniform_interior(6);
        let kv = KnotVector::with_end_multiplicity(2, 2, &interior, &[1; 5]).unwrap();
        let open = KnotVector::open(2, &interior, &[1; 5]).unwrap();
        assert_eq!(kv.dimension(), open.dimension() - 2);
        for &x in &[0.0, 0.05, 0.3, 0.77, 1.0] {
            let a = kv.eval(x, 1).unwrap();
            let b = open.eval(x, 1).unwrap();
            for i in 0..kv.dimension() {
                assert_relative_eq!(a.get(0, i), b.get(0, i + 1), epsilon = 1e-14);
                assert_relative_eq!(a.get(1, i), b.get(1, i + 1), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn refinement_bisects_spans() {
        let kv = KnotVector::uniform(2, 1).unwrap().refine_uniform(2);
        assert_eq!(kv.num_elements(), 4);
        assert_relative_eq!(kv.mesh_size(), 0.25);
        assert_relative_eq!(kv.quasi_uniformity(), 1.0);
    }
}
