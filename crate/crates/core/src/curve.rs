//! Discretized curves: loading, normalization, common partitions,
//! spline resampling and direction reversal.

use std::io::{BufRead, BufReader, Read};

use crate::error::CurveError;
use crate::samples::{dist, Samples};
use crate::spline::{CubicSpline, EndCondition};

type Result<T> = std::result::Result<T, CurveError>;

/// Tolerance for declaring a partition uniform.
pub const UNIFORM_TOL: f64 = 1e-12;
/// Relative first/last distance below which a loaded curve counts as closed.
pub const CLOSED_DETECT_TOL: f64 = 1e-6;

/// Strictly increasing parameter values, with a flag recording uniform spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionSpec {
    values: Vec<f64>,
    uniform: bool,
}

impl PartitionSpec {
    /// The uniform partition of [0,1] with `n` nodes.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 2);
        let step = 1.0 / (n - 1) as f64;
        let mut values: Vec<f64> = (0..n).map(|l| l as f64 * step).collect();
        values[n - 1] = 1.0;
        PartitionSpec {
            values,
            uniform: true,
        }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(CurveError::MalformedInput(
                "a partition needs at least two values".into(),
            ));
        }
        if let Some(row) = values.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(CurveError::DuplicateParameter { row: row + 1 });
        }
        let uniform = is_uniform(&values);
        Ok(PartitionSpec { values, uniform })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }
}

fn is_uniform(values: &[f64]) -> bool {
    let n = values.len();
    let span = values[n - 1] - values[0];
    let step = span / (n - 1) as f64;
    values
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= UNIFORM_TOL * span.max(1.0))
}

/// An ordered list of points in R^d sampled at a strictly increasing partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    points: Samples,
    partition: Vec<f64>,
    closed: bool,
}

impl Curve {
    pub fn new(points: Samples, partition: Vec<f64>, closed: bool) -> Result<Self> {
        let n = points.len();
        if n < 3 {
            return Err(CurveError::MalformedInput(format!(
                "a curve needs at least 3 points, got {n}"
            )));
        }
        if partition.len() != n {
            return Err(CurveError::MalformedInput(format!(
                "{} parameter values for {n} points",
                partition.len()
            )));
        }
        if points.as_flat().iter().chain(&partition).any(|v| !v.is_finite()) {
            return Err(CurveError::MalformedInput("non-finite value".into()));
        }
        if let Some(row) = partition.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(CurveError::DuplicateParameter { row: row + 1 });
        }
        Ok(Curve {
            points,
            partition,
            closed,
        })
    }

    /// A curve sampled at the uniform partition of [0,1].
    pub fn with_uniform_partition(points: Samples, closed: bool) -> Result<Self> {
        let n = points.len();
        let partition = if n >= 2 {
            PartitionSpec::uniform(n).values
        } else {
            vec![0.0; n]
        };
        Curve::new(points, partition, closed)
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &Samples {
        &self.points
    }

    pub fn partition(&self) -> &[f64] {
        &self.partition
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Copy of this curve with every point mapped through the d×d matrix `m`.
    pub fn transformed(&self, m: &nalgebra::DMatrix<f64>) -> Curve {
        Curve {
            points: self.points.transformed(m),
            partition: self.partition.clone(),
            closed: self.closed,
        }
    }

    fn spline(&self) -> CubicSpline {
        let end = if self.closed {
            EndCondition::Periodic
        } else {
            EndCondition::NotAKnot
        };
        CubicSpline::new(&self.partition, &self.points, end)
    }
}

/// Parses a curve from whitespace-separated numeric text.
///
/// Lines starting with `#` are comments, except the directive `# t`, which
/// marks the first column of every row as the parameter value. Blank lines
/// are ignored. Without `# t` the partition is proportional to the row index.
///
/// A curve hinted closed whose endpoints differ is closed by repeating its
/// first point.
pub fn load_curve<R: Read>(source: R, closed_hint: Option<bool>) -> Result<Curve> {
    let reader = BufReader::new(source);
    let mut has_param = false;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CurveError::MalformedInput(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if comment.trim() == "t" {
                if !rows.is_empty() {
                    return Err(CurveError::MalformedInput(
                        "`# t` directive must precede the data rows".into(),
                    ));
                }
                has_param = true;
            }
            continue;
        }
        let row = trimmed
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| {
                    CurveError::MalformedInput(format!("line {}: cannot parse `{tok}`", lineno + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(CurveError::MalformedInput(format!(
                "line {}: non-finite value",
                lineno + 1
            )));
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CurveError::MalformedInput(format!(
                    "line {}: expected {} columns, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    let width = rows.first().map_or(0, Vec::len);
    let dim = if has_param { width.saturating_sub(1) } else { width };
    if dim == 0 {
        return Err(CurveError::MalformedInput("no coordinate columns".into()));
    }
    if rows.len() < 3 {
        return Err(CurveError::MalformedInput(format!(
            "a curve needs at least 3 points, got {}",
            rows.len()
        )));
    }
    let (mut partition, mut points): (Vec<f64>, Vec<f64>) = if has_param {
        let t = rows.iter().map(|r| r[0]).collect();
        let p = rows.iter().flat_map(|r| r[1..].iter().copied()).collect();
        (t, p)
    } else {
        let n = rows.len();
        let t = (0..n).map(|l| l as f64 / (n - 1) as f64).collect();
        (t, rows.into_iter().flatten().collect())
    };
    if let Some(row) = partition.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(CurveError::DuplicateParameter { row: row + 1 });
    }
    let samples = Samples::from_flat(dim, points.clone());
    let n = samples.len();
    let gap = dist(samples.get(0), samples.get(n - 1));
    let closed = match closed_hint {
        Some(c) => c,
        None => gap <= CLOSED_DETECT_TOL * bounding_box_diagonal(&samples),
    };
    if closed && gap > 0.0 && closed_hint == Some(true) {
        let length = polyline_length_of(&samples);
        if gap > 1e-8 * length {
            let first = samples.get(0).to_vec();
            points.extend_from_slice(&first);
            if has_param {
                let step = partition[n - 1] - partition[n - 2];
                partition.push(partition[n - 1] + step);
            } else {
                partition = (0..=n).map(|l| l as f64 / n as f64).collect();
            }
        }
    }
    if closed {
        // snap the seam so the closure invariant holds exactly
        let first = points[..dim].to_vec();
        let len = points.len();
        points[len - dim..].copy_from_slice(&first);
    }
    Curve::new(Samples::from_flat(dim, points), partition, closed)
}

fn bounding_box_diagonal(points: &Samples) -> f64 {
    let d = points.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points.iter() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    lo.iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt()
}

// Segment lengths are summed in sorted order so the result does not depend
// on the traversal direction.
fn polyline_length_of(points: &Samples) -> f64 {
    let mut segments: Vec<f64> = (1..points.len())
        .map(|l| dist(points.get(l - 1), points.get(l)))
        .collect();
    segments.sort_by(f64::total_cmp);
    segments.iter().sum()
}

/// Sum of the Euclidean lengths of the segments joining consecutive points.
pub fn polyline_length(c: &Curve) -> f64 {
    polyline_length_of(&c.points)
}

/// Scales the curve to unit polyline length and maps its partition onto [0,1].
pub fn normalize(c: &Curve) -> Result<Curve> {
    let length = polyline_length(c);
    if !(length > 0.0) {
        return Err(CurveError::ZeroLengthCurve);
    }
    let t0 = c.partition[0];
    let span = c.partition[c.len() - 1] - t0;
    let mut partition: Vec<f64> = c.partition.iter().map(|t| (t - t0) / span).collect();
    let n = partition.len();
    partition[0] = 0.0;
    partition[n - 1] = 1.0;
    Ok(Curve {
        points: c.points.scaled(1.0 / length),
        partition,
        closed: c.closed,
    })
}

/// Builds the partition on which both (normalized) curves get resampled.
///
/// If either curve is closed this is the uniform partition with
/// `max(N, M)` nodes. Two open curves in d > 1 share the union of their
/// partitions, with values closer than `0.25 / max(N, M)` to the previously
/// kept value dropped. Two open scalar curves need no common partition.
pub fn build_common_partition(c1: &Curve, c2: &Curve) -> Result<PartitionSpec> {
    if c1.dim() != c2.dim() {
        return Err(CurveError::DimensionMismatch(c1.dim(), c2.dim()));
    }
    let size = c1.len().max(c2.len());
    if c1.closed || c2.closed {
        return Ok(PartitionSpec::uniform(size));
    }
    if c1.dim() == 1 {
        return Err(CurveError::NoCommonPartitionNeeded);
    }
    let eps = 0.25 / size as f64;
    let mut merged: Vec<f64> = c1.partition.iter().chain(&c2.partition).copied().collect();
    merged.sort_by(f64::total_cmp);
    let mut kept: Vec<f64> = vec![0.0];
    for &v in &merged {
        if v <= 0.0 || v >= 1.0 {
            continue;
        }
        if v - kept[kept.len() - 1] >= eps {
            kept.push(v);
        }
    }
    while kept.len() > 1 && 1.0 - kept[kept.len() - 1] < eps {
        kept.pop();
    }
    kept.push(1.0);
    PartitionSpec::from_values(kept)
}

/// Evaluates the curve's cubic spline (periodic when closed) at `p`.
pub fn resample(c: &Curve, p: &PartitionSpec) -> Curve {
    let spline = c.spline();
    let mut points = spline.eval_many(p.values());
    if c.closed {
        let n = points.len();
        let first = points.get(0).to_vec();
        points.get_mut(n - 1).copy_from_slice(&first);
    }
    Curve {
        points,
        partition: p.values().to_vec(),
        closed: c.closed,
    }
}

/// Evaluates the curve's spline at arbitrary parameter values.
pub fn evaluate(c: &Curve, params: &[f64]) -> Samples {
    c.spline().eval_many(params)
}

/// Traverses the curve in the opposite direction.
pub fn reverse_direction(c: &Curve) -> Curve {
    let n = c.len();
    let (a, b) = (c.partition[0], c.partition[n - 1]);
    let partition = (0..n).map(|l| a + b - c.partition[n - 1 - l]).collect();
    Curve {
        points: c.points.reversed(),
        partition,
        closed: c.closed,
    }
}
