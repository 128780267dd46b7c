//! Dense vector primitives and the geometric helpers built on them.
//!
//! Everything is `f64`; the growth-identity checks in `analysis` need double
//! precision to reach their tolerances. Values are immutable once
//! constructed and every constructor rejects NaN and infinities, so any
//! `Vector` in circulation is finite.

use crate::error::{Error, Result};
use std::ops::Range;

/// A finite real vector of length >= 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Builds a vector, rejecting empty data and non-finite elements.
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(index) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { data })
    }

    pub fn from_slice(data: &[f64]) -> Result<Self> {
        Self::new(data.to_vec())
    }

    /// All-zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    /// Euclidean norm sqrt(sum v_i^2).
    pub fn l2_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Unit vector v / ||v||.
    pub fn unit(&self) -> Result<Vector> {
        let n = self.l2_norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        Vector::new(self.data.iter().map(|x| x / n).collect())
    }

    /// Elementwise a - b.
    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        check_same_len(&self.data, &other.data)?;
        Vector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Scalar multiple c * v.
    pub fn scale(&self, c: f64) -> Result<Vector> {
        Vector::new(self.data.iter().map(|x| c * x).collect())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl<'a> IntoIterator for &'a Vector {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;
    fn into_iter(self) -> Self::IntoIter {
        self.data.iter()
    }
}

pub(crate) fn check_same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// Dot product over raw slices. Lengths must already agree.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm over a raw slice.
pub(crate) fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Euclidean norm of a vector.
pub fn l2_norm(v: &Vector) -> f64 {
    v.l2_norm()
}

/// Normalizes `v` to unit length. Errors on the zero vector: a zero weight
/// under projection is a modeling bug the caller must see, not a silent
/// zero.
pub fn unit(v: &Vector) -> Result<Vector> {
    v.unit()
}

/// |a.b| / (||a|| ||b||), clamped into [0, 1].
///
/// Rounding can push the quotient to 1 + 1e-16; downstream threshold
/// comparisons must never see an out-of-range cosine.
pub fn cosine_abs(a: &Vector, b: &Vector) -> Result<f64> {
    check_same_len(a.as_slice(), b.as_slice())?;
    cosine_abs_slices(a.as_slice(), b.as_slice())
}

pub(crate) fn cosine_abs_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot(a, b).abs() / (na * nb)).min(1.0))
}

/// Removes from `x` its component parallel to `w`: x - (w.x / w.w) w.
///
/// The result is the tangential part of `x` at `w`, orthogonal to `w` up to
/// rounding.
pub fn project_out(w: &Vector, x: &Vector) -> Result<Vector> {
    check_same_len(w.as_slice(), x.as_slice())?;
    let mut out = x.as_slice().to_vec();
    project_out_in_place(w.as_slice(), &mut out)?;
    Vector::new(out)
}

pub(crate) fn project_out_in_place(w: &[f64], x: &mut [f64]) -> Result<()> {
    let ww = dot(w, w);
    if ww == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let radial = dot(w, x) / ww;
    for (xi, wi) in x.iter_mut().zip(w) {
        *xi -= radial * wi;
    }
    Ok(())
}

/// How a parameter tensor is sliced for invariance detection and tangent
/// projection.
#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionScope {
    /// Detect and project over the whole flattened tensor.
    WholeTensor,
    /// Detect and project independently per channel; the ranges must
    /// partition `[0, dim)`.
    PerChannel(Vec<Range<usize>>),
}

impl ProjectionScope {
    /// Uniform channel split: `channels` contiguous ranges of width
    /// `dim / channels`.
    pub fn uniform_channels(dim: usize, channels: usize) -> Result<Self> {
        if channels == 0 || !dim.is_multiple_of(channels) {
            return Err(Error::InvalidScope(format!(
                "cannot split dimension {dim} into {channels} equal channels"
            )));
        }
        let width = dim / channels;
        Ok(ProjectionScope::PerChannel(
            (0..channels).map(|c| c * width..(c + 1) * width).collect(),
        ))
    }

    /// The slice ranges this scope induces on a tensor of length `dim`.
    // One-element Vec<Range> is the intended value for a whole tensor.
    #[allow(clippy::single_range_in_vec_init)]
    pub fn slices(&self, dim: usize) -> Vec<Range<usize>> {
        match self {
            ProjectionScope::WholeTensor => vec![0..dim],
            ProjectionScope::PerChannel(ranges) => ranges.clone(),
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            ProjectionScope::WholeTensor => Ok(()),
            ProjectionScope::PerChannel(ranges) => {
                let mut sorted: Vec<_> = ranges.clone();
                sorted.sort_by_key(|r| r.start);
                let mut cursor = 0usize;
                for r in &sorted {
                    if r.start != cursor {
                        return Err(Error::InvalidScope(format!(
                            "channels must cover [0, {dim}) without gaps or overlap; \
                             found boundary at {} where {cursor} was expected",
                            r.start
                        )));
                    }
                    // A 1-element channel makes the tangent projection
                    // identically zero, so it is rejected outright.
                    if r.end - r.start < 2 {
                        return Err(Error::InvalidScope(format!(
                            "channel {}..{} has fewer than 2 elements",
                            r.start, r.end
                        )));
                    }
                    cursor = r.end;
                }
                if cursor != dim {
                    return Err(Error::InvalidScope(format!(
                        "channels cover [0, {cursor}) but the tensor has length {dim}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// One optimizable parameter tensor, flattened, plus its projection scope.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBlock {
    values: Vector,
    scope: ProjectionScope,
}

impl ParamBlock {
    pub fn new(values: Vector, scope: ProjectionScope) -> Result<Self> {
        scope.validate(values.len())?;
        Ok(Self { values, scope })
    }

    /// Whole-tensor scope shorthand.
    pub fn whole(values: Vector) -> Self {
        Self {
            values,
            scope: ProjectionScope::WholeTensor,
        }
    }

    pub fn values(&self) -> &Vector {
        &self.values
    }

    pub fn scope(&self) -> &ProjectionScope {
        &self.scope
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Replaces the stored values; the new vector must keep the block's
    /// length so the scope stays valid.
    pub fn set_values(&mut self, values: Vector) -> Result<()> {
        if values.len() != self.values.len() {
            return Err(Error::ShapeMismatch {
                expected: self.values.len(),
                actual: values.len(),
            });
        }
        self.values = values;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(data: &[f64]) -> Vector {
        Vector::from_slice(data).unwrap()
    }

    #[test]
    fn rejects_nan_and_empty() {
        assert!(matches!(
            Vector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        ));
        assert!(matches!(
            Vector::new(vec![f64::INFINITY]),
            Err(Error::NonFinite { index: 0 })
        ));
        assert!(matches!(Vector::new(vec![]), Err(Error::Empty)));
    }

    #[test]
    fn l2_norm_345() {
        assert_eq!(v(&[3.0, 4.0]).l2_norm(), 5.0);
    }

    #[test]
    fn l2_norm_zero_vector() {
        assert_eq!(v(&[0.0, 0.0, 0.0]).l2_norm(), 0.0);
    }

    #[test]
    fn l2_norm_matches_compensated_two_pass_oracle() {
        // Independent oracle: Kahan-compensated accumulation of squares.
        let mut rng = crate::rng::Rng::with_seed(20240901);
        let x = rng.standard_normal_vector(1000).unwrap();
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for &xi in x.iter() {
            let term = xi * xi - carry;
            let next = sum + term;
            carry = (next - sum) - term;
            sum = next;
        }
        let oracle = sum.sqrt();
        assert_relative_eq!(x.l2_norm(), oracle, max_relative = 1e-12);
    }

    #[test]
    fn unit_axis_and_diagonal() {
        let u = unit(&v(&[0.0, 2.0])).unwrap();
        assert_eq!(u.as_slice(), &[0.0, 1.0]);
        let u = unit(&v(&[1.0, 1.0])).unwrap();
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert_relative_eq!(u[0], inv_sqrt2, max_relative = 1e-15);
        assert_relative_eq!(u[1], inv_sqrt2, max_relative = 1e-15);
        assert_relative_eq!(u.l2_norm(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn unit_zero_norm_errors() {
        assert!(matches!(unit(&v(&[0.0, 0.0])), Err(Error::ZeroNorm)));
    }

    #[test]
    fn cosine_abs_cases() {
        assert_eq!(cosine_abs(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        assert_eq!(cosine_abs(&v(&[1.0, 0.0]), &v(&[-2.0, 0.0])).unwrap(), 1.0);
        assert_relative_eq!(
            cosine_abs(&v(&[1.0, 1.0]), &v(&[1.0, 0.0])).unwrap(),
            1.0 / 2.0f64.sqrt(),
            max_relative = 1e-15
        );
        assert!(matches!(
            cosine_abs(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn cosine_abs_never_exceeds_one() {
        // Parallel vectors with awkward magnitudes can round above 1.
        let a = v(&[0.1, 0.2, 0.3, 0.4]);
        let b = a.scale(3.000000000000001).unwrap();
        let c = cosine_abs(&a, &b).unwrap();
        assert!(c <= 1.0);
        assert!(c > 1.0 - 1e-14);
    }

    #[test]
    fn project_out_removes_parallel_component() {
        let p = project_out(&v(&[1.0, 0.0]), &v(&[3.0, 5.0])).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 5.0]);
        let p = project_out(&v(&[2.0, 0.0]), &v(&[7.0, 0.0])).unwrap();
        assert_eq!(p.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn project_out_fixes_tangent_input() {
        let w = v(&[1.0, 1.0, 1.0]);
        let x = v(&[1.0, -2.0, 1.0]); // orthogonal to w
        let p = project_out(&w, &x).unwrap();
        for i in 0..3 {
            assert_relative_eq!(p[i], x[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn project_out_zero_weight_errors() {
        assert!(matches!(
            project_out(&v(&[0.0, 0.0]), &v(&[1.0, 2.0])),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn project_out_result_orthogonal_to_weight() {
        let mut rng = crate::rng::Rng::with_seed(11);
        for _ in 0..20 {
            let w = rng.standard_normal_vector(8).unwrap();
            let x = rng.standard_normal_vector(8).unwrap();
            let p = project_out(&w, &x).unwrap();
            let resid = dot(p.as_slice(), w.as_slice()).abs();
            assert!(resid <= 1e-10 * p.l2_norm() * w.l2_norm() + 1e-300);
        }
    }

    #[test]
    fn per_channel_scope_validation() {
        let ok = ParamBlock::new(
            v(&[1.0, 2.0, 3.0, 4.0]),
            ProjectionScope::PerChannel(vec![0..2, 2..4]),
        );
        assert!(ok.is_ok());

        let gap = ParamBlock::new(
            v(&[1.0, 2.0, 3.0, 4.0]),
            ProjectionScope::PerChannel(vec![0..2, 3..4]),
        );
        assert!(matches!(gap, Err(Error::InvalidScope(_))));

        let overlap = ParamBlock::new(
            v(&[1.0, 2.0, 3.0, 4.0]),
            ProjectionScope::PerChannel(vec![0..3, 2..4]),
        );
        assert!(matches!(overlap, Err(Error::InvalidScope(_))));

        let short_channel = ParamBlock::new(
            v(&[1.0, 2.0, 3.0]),
            ProjectionScope::PerChannel(vec![0..2, 2..3]),
        );
        assert!(matches!(short_channel, Err(Error::InvalidScope(_))));

        #[allow(clippy::single_range_in_vec_init)]
        let not_covering = ParamBlock::new(
            v(&[1.0, 2.0, 3.0, 4.0]),
            ProjectionScope::PerChannel(vec![0..2]),
        );
        assert!(matches!(not_covering, Err(Error::InvalidScope(_))));
    }

    #[test]
    fn uniform_channels_splits_evenly() {
        let scope = ProjectionScope::uniform_channels(6, 3).unwrap();
        assert_eq!(scope.slices(6), vec![0..2, 2..4, 4..6]);
        assert!(ProjectionScope::uniform_channels(6, 4).is_err());
    }
}
