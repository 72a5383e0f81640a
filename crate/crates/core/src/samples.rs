//! Flat storage for ordered lists of vectors in R^d.

use nalgebra::DMatrix;

/// An ordered list of `len()` vectors of dimension `dim()`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    dim: usize,
    data: Vec<f64>,
}

impl Samples {
    /// Panics if `data.len()` is not a multiple of `dim` or `dim == 0`.
    pub fn from_flat(dim: usize, data: Vec<f64>) -> Self {
        assert!(dim > 0, "dimension must be positive");
        assert_eq!(data.len() % dim, 0, "data length must be a multiple of dim");
        Samples { dim, data }
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: impl IntoIterator<Item = R>) -> Self {
        let mut data = Vec::new();
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), dim, "row width must equal dim");
            data.extend_from_slice(r);
        }
        Samples::from_flat(dim, data)
    }

    pub fn zeros(dim: usize, len: usize) -> Self {
        Samples::from_flat(dim, vec![0.0; dim * len])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, l: usize) -> &[f64] {
        &self.data[l * self.dim..(l + 1) * self.dim]
    }

    #[inline]
    pub fn get_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.data[l * self.dim..(l + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.data
    }

    /// Coordinate `k` of every sample.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.iter().map(|p| p[k]).collect()
    }

    pub fn scaled(&self, s: f64) -> Samples {
        Samples::from_flat(self.dim, self.data.iter().map(|v| v * s).collect())
    }

    pub fn reversed(&self) -> Samples {
        let mut data = Vec::with_capacity(self.data.len());
        for p in self.iter().rev() {
            data.extend_from_slice(p);
        }
        Samples::from_flat(self.dim, data)
    }

    /// Applies the d×d matrix `m` to every sample.
    pub fn transformed(&self, m: &DMatrix<f64>) -> Samples {
        assert_eq!(m.nrows(), self.dim);
        assert_eq!(m.ncols(), self.dim);
        let d = self.dim;
        let mut out = vec![0.0; self.data.len()];
        for (src, dst) in self.iter().zip(out.chunks_exact_mut(d)) {
            for (r, o) in dst.iter_mut().enumerate() {
                *o = (0..d).map(|c| m[(r, c)] * src[c]).sum();
            }
        }
        Samples::from_flat(d, out)
    }

    pub fn max_abs_diff(&self, other: &Samples) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}
