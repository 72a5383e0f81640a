//! Optimal rotations between weighted point lists (Kabsch-Umeyama).
//!
//! Given weighted pairs `(x_l, y_l)`, the rotation `R` minimizing
//! `Σ w_l |x_l - R y_l|^2` maximizes `tr(R Aᵀ)` where
//! `A_kj = Σ w_l x_lk y_lj`. With `A = U S Vᵀ` the maximizer is
//! `U diag(1, …, 1, s) Vᵀ`, `s = sign(det(U V))`.

use nalgebra::{DMatrix, DVector};

use crate::error::RotationError;
use crate::samples::{norm_sq, Samples};
use crate::srvf::{trapezoid_weights, ShapeFunction};

type Result<T> = std::result::Result<T, RotationError>;

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

/// A d×d orthogonal matrix with determinant +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(d: usize) -> Self {
        Rotation {
            matrix: DMatrix::identity(d, d),
        }
    }

    /// Wraps a matrix without checking orthogonality.
    pub fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        assert!(matrix.is_square());
        Rotation { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `max |RᵀR - I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let d = self.dim();
        (self.matrix.transpose() * &self.matrix - DMatrix::<f64>::identity(d, d)).amax()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|r| (0..d).map(|c| self.matrix[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn apply_all(&self, s: &Samples) -> Samples {
        s.transformed(&self.matrix)
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|ij| self.matrix[ij])
            .collect()
    }
}

/// The d×d correlation matrix `A` whose trace pairing with a rotation is
/// the quantity being maximized.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossMatrix(pub DMatrix<f64>);

impl CrossMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// `A_kj = Σ_l w_l target_lk source_lj`.
pub fn weighted_cross_matrix(target: &Samples, source: &Samples, weights: &[f64]) -> CrossMatrix {
    let d = target.dim();
    assert_eq!(source.dim(), d);
    assert_eq!(target.len(), source.len());
    assert_eq!(weights.len(), target.len());
    let mut a = DMatrix::<f64>::zeros(d, d);
    for ((x, y), &w) in target.iter().zip(source.iter()).zip(weights) {
        for k in 0..d {
            let wx = w * x[k];
            for j in 0..d {
                a[(k, j)] += wx * y[j];
            }
        }
    }
    CrossMatrix(a)
}

/// Cross matrix of two shape functions on a shared partition, weighted by
/// the trapezoidal rule.
pub fn cross_matrix(target: &ShapeFunction, source: &ShapeFunction) -> Result<CrossMatrix> {
    if target.partition() != source.partition() || target.dim() != source.dim() {
        return Err(RotationError::PartitionMismatch);
    }
    let w = trapezoid_weights(target.partition().values());
    Ok(weighted_cross_matrix(target.values(), source.values(), &w))
}

/// Kabsch-Umeyama: the rotation maximizing `tr(R Aᵀ)`, and that maximum.
pub fn ku_rotation(a: &CrossMatrix) -> Result<(Rotation, f64)> {
    let m = &a.0;
    let d = m.nrows();
    assert!(m.is_square() && d >= 1);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(RotationError::NonFinite);
    }
    if d == 1 {
        return Ok((Rotation::identity(1), m[(0, 0)]));
    }
    let svd = m
        .clone()
        .try_svd(true, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or(RotationError::SvdFailure)?;
    let u = svd.u.as_ref().ok_or(RotationError::SvdFailure)?;
    let v_t = svd.v_t.as_ref().ok_or(RotationError::SvdFailure)?;
    // nalgebra does not guarantee ordering; the sign flip must land on the
    // smallest singular value
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let u = DMatrix::from_fn(d, d, |r, c| u[(r, order[c])]);
    let v_t = DMatrix::from_fn(d, d, |r, c| v_t[(order[r], c)]);
    // det(U V) = det(U) det(Vᵀ); exact zero takes the +1 branch
    let s_last = if u.determinant() * v_t.determinant() < 0.0 {
        -1.0
    } else {
        1.0
    };
    let mut s = DVector::from_element(d, 1.0);
    s[d - 1] = s_last;
    let r = &u * DMatrix::from_diagonal(&s) * &v_t;
    let maxtrace = r.component_mul(m).sum();
    Ok((Rotation { matrix: r }, maxtrace))
}

/// A map `y ↦ R y + t` with `R` a rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotion {
    pub rotation: Rotation,
    pub translation: Vec<f64>,
}

impl RigidMotion {
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let mut out = self.rotation.apply(y);
        for (o, t) in out.iter_mut().zip(&self.translation) {
            *o += t;
        }
        out
    }

    /// `Σ w_l |x_l - φ(y_l)|^2`.
    pub fn residual(&self, x: &Samples, y: &Samples, weights: &[f64]) -> f64 {
        x.iter()
            .zip(y.iter())
            .zip(weights)
            .map(|((xl, yl), w)| {
                let p = self.apply(yl);
                w * xl.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            })
            .sum()
    }
}

fn centroid(s: &Samples, weights: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; s.dim()];
    for (p, w) in s.iter().zip(weights) {
        for (ck, pk) in c.iter_mut().zip(p) {
            *ck += w * pk;
        }
    }
    c
}

fn centered(s: &Samples, c: &[f64]) -> Samples {
    let mut out = s.clone();
    for l in 0..out.len() {
        for (v, ck) in out.get_mut(l).iter_mut().zip(c) {
            *v -= ck;
        }
    }
    out
}

/// Orientation-preserving rigid motion `φ` minimizing `Σ w_l |x_l - φ(y_l)|^2`,
/// together with the minimal residual.
///
/// Both clouds are centered at their weighted centroids, the rotation
/// comes from the centered cross matrix, and the translation maps the
/// centroid of `y` onto the centroid of `x`.
pub fn fit_rigid_motion(x: &Samples, y: &Samples, weights: &[f64]) -> Result<(RigidMotion, f64)> {
    if x.len() != y.len() {
        return Err(RotationError::LengthMismatch(x.len(), y.len()));
    }
    if weights.len() != x.len() {
        return Err(RotationError::LengthMismatch(x.len(), weights.len()));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(RotationError::NonPositiveWeights);
    }
    let cx = centroid(x, weights);
    let cy = centroid(y, weights);
    let a = weighted_cross_matrix(&centered(x, &cx), &centered(y, &cy), weights);
    let (rotation, _) = ku_rotation(&a)?;
    let ry = rotation.apply(&cy);
    let translation = cx.iter().zip(&ry).map(|(a, b)| a - b).collect();
    let motion = RigidMotion {
        rotation,
        translation,
    };
    let residual = motion.residual(x, y, weights);
    Ok((motion, residual))
}

/// `Σ w_l (|x_l|^2 + |y_l|^2)`, the rotation-independent part of the
/// alignment energy.
pub fn weighted_energy_offset(x: &Samples, y: &Samples, weights: &[f64]) -> f64 {
    x.iter()
        .zip(y.iter())
        .zip(weights)
        .map(|((a, b), w)| w * (norm_sq(a) + norm_sq(b)))
        .sum()
}
