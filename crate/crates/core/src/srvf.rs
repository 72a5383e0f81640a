//! Square-root velocity functions of discretized curves.

use crate::curve::{Curve, PartitionSpec};
use crate::error::SrvfError;
use crate::samples::{norm_sq, Samples};
use crate::spline::{CubicSpline, EndCondition};

/// Velocities with norm below this are treated as zero.
pub const ZERO_VELOCITY: f64 = 1e-14;

/// Discretized SRVF `q(t_l) = β'(t_l) / |β'(t_l)|^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFunction {
    values: Samples,
    partition: PartitionSpec,
    periodic: bool,
}

impl ShapeFunction {
    /// Panics if lengths disagree.
    pub fn new(values: Samples, partition: PartitionSpec, periodic: bool) -> Self {
        assert_eq!(values.len(), partition.len(), "one value per partition node");
        ShapeFunction {
            values,
            partition,
            periodic,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Samples {
        &self.values
    }

    pub fn partition(&self) -> &PartitionSpec {
        &self.partition
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Same partition and periodicity, new values.
    pub fn with_values(&self, values: Samples) -> ShapeFunction {
        ShapeFunction::new(values, self.partition.clone(), self.periodic)
    }

    /// Cubic spline through the samples, periodic when the function is.
    pub fn spline(&self) -> CubicSpline {
        let end = if self.periodic {
            EndCondition::Periodic
        } else {
            EndCondition::NotAKnot
        };
        CubicSpline::new(self.partition.values(), &self.values, end)
    }

    /// Trapezoidal quadrature of `|q|^2`.
    pub fn squared_norm(&self) -> f64 {
        trapezoid_weights(self.partition.values())
            .iter()
            .zip(self.values.iter())
            .map(|(w, q)| w * norm_sq(q))
            .sum()
    }
}

/// Trapezoidal weights `h_1 = (t_2-t_1)/2`, `h_N = (t_N-t_{N-1})/2`,
/// `h_l = (t_{l+1}-t_{l-1})/2`.
pub fn trapezoid_weights(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|l| {
            let lo = t[l.saturating_sub(1)];
            let hi = t[(l + 1).min(n - 1)];
            (hi - lo) / 2.0
        })
        .collect()
}

/// Finite-difference velocity of the curve at every node.
///
/// Interior nodes use the three-point formula exact for quadratics on
/// nonuniform grids. Open endpoints use one-sided second-order stencils;
/// closed curves wrap around the seam.
fn velocities(c: &Curve) -> Samples {
    let n = c.len();
    let d = c.dim();
    let t = c.partition();
    let p = c.points();
    let mut out = Samples::zeros(d, n);
    let centered = |prev: &[f64], cur: &[f64], next: &[f64], hm: f64, hp: f64, o: &mut [f64]| {
        let a = -hp / (hm * (hm + hp));
        let b = (hp - hm) / (hm * hp);
        let e = hm / (hp * (hm + hp));
        for k in 0..o.len() {
            o[k] = a * prev[k] + b * cur[k] + e * next[k];
        }
    };
    for l in 1..n - 1 {
        centered(
            p.get(l - 1),
            p.get(l),
            p.get(l + 1),
            t[l] - t[l - 1],
            t[l + 1] - t[l],
            out.get_mut(l),
        );
    }
    if c.is_closed() {
        centered(
            p.get(n - 2),
            p.get(0),
            p.get(1),
            t[n - 1] - t[n - 2],
            t[1] - t[0],
            out.get_mut(0),
        );
        let first = out.get(0).to_vec();
        out.get_mut(n - 1).copy_from_slice(&first);
    } else {
        let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
        let a = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
        let b = (h1 + h2) / (h1 * h2);
        let e = -h1 / (h2 * (h1 + h2));
        let (p0, p1, p2) = (p.get(0), p.get(1), p.get(2));
        for (k, o) in out.get_mut(0).iter_mut().enumerate() {
            *o = a * p0[k] + b * p1[k] + e * p2[k];
        }
        let (h1, h2) = (t[n - 1] - t[n - 2], t[n - 2] - t[n - 3]);
        let a = (2.0 * h1 + h2) / (h1 * (h1 + h2));
        let b = -(h1 + h2) / (h1 * h2);
        let e = h1 / (h2 * (h1 + h2));
        let (p0, p1, p2) = (p.get(n - 1), p.get(n - 2), p.get(n - 3));
        for (k, o) in out.get_mut(n - 1).iter_mut().enumerate() {
            *o = a * p0[k] + b * p1[k] + e * p2[k];
        }
    }
    out
}

/// Computes the SRVF of a (normalized) curve.
pub fn compute_srvf(c: &Curve) -> ShapeFunction {
    let mut q = velocities(c);
    for l in 0..q.len() {
        let v = q.get_mut(l);
        let speed = norm_sq(v).sqrt();
        if speed < ZERO_VELOCITY {
            v.iter_mut().for_each(|x| *x = 0.0);
        } else {
            let s = 1.0 / speed.sqrt();
            v.iter_mut().for_each(|x| *x *= s);
        }
    }
    let partition = PartitionSpec::from_values(c.partition().to_vec())
        .expect("curve partitions are strictly increasing");
    ShapeFunction::new(q, partition, c.is_closed())
}

/// Index rotation of a periodic sample list: the output's sample `l` is
/// sample `(offset + l) mod (N-1)` of the input, and the last sample repeats
/// the first.
pub fn shift_samples(values: &Samples, offset: usize) -> Samples {
    let n = values.len();
    let period = n - 1;
    let d = values.dim();
    let mut data = Vec::with_capacity(n * d);
    for l in 0..period {
        data.extend_from_slice(values.get((offset + l) % period));
    }
    data.extend_from_slice(values.get(offset % period));
    Samples::from_flat(d, data)
}

/// Returns `q(t_offset + t)`, i.e. the function restarted at node `offset`
/// (0-based; offset 0 is the identity).
pub fn shift(q: &ShapeFunction, offset: usize) -> Result<ShapeFunction, SrvfError> {
    if !q.periodic {
        return Err(SrvfError::NotPeriodic);
    }
    if !q.partition.is_uniform() {
        return Err(SrvfError::NonUniformPartition);
    }
    let samples = q.len() - 1;
    if offset >= samples {
        return Err(SrvfError::ShiftOutOfRange { offset, samples });
    }
    Ok(q.with_values(shift_samples(&q.values, offset)))
}
