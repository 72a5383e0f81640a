//! Optimal reparametrization by dynamic programming on grid paths.
//!
//! Rows of the grid carry the partition `t` of the fixed function `q1`,
//! columns the partition `z` of the reparametrized function `q2`. A
//! reparametrization is a strictly monotone piecewise linear path from the
//! lower-left to the upper-right grid corner, and its energy is the sum of
//! trapezoidal segment energies.
//!
//! [`procedure_dp`] solves the problem restricted to a point set `R` with a
//! trailing `layrs × layrs` neighborhood. [`adapt_dp`] runs it on a sequence
//! of increasingly fine grids, each time restricted to a strip of Voronoi
//! bins around the previous solution, which keeps the total work linear in
//! `N + M`.

use crate::error::DpError;
use crate::samples::Samples;
use crate::spline::CubicSpline;
use crate::srvf::ShapeFunction;

type Result<T> = std::result::Result<T, DpError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpConfig {
    /// Side of the trailing neighborhood searched for predecessors.
    pub layrs: usize,
    /// How many bins to the left of and below the previous path the strip extends.
    pub lstrp: usize,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig { layrs: 5, lstrp: 30 }
    }
}

impl DpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layrs == 0 || self.lstrp == 0 {
            return Err(DpError::InvalidConfig);
        }
        Ok(())
    }
}

/// Discretized reparametrization `γ_l = γ(t_l)` with forward-difference
/// derivative `γ'_l = (γ_{l+1} - γ_l) / (t_{l+1} - t_l)`, `γ'_N = γ'_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diffeomorphism {
    gamma: Vec<f64>,
    derivative: Vec<f64>,
}

impl Diffeomorphism {
    pub fn new(gamma: Vec<f64>, partition: &[f64]) -> Result<Self> {
        let n = gamma.len();
        if n != partition.len() || n < 2 {
            return Err(DpError::InvalidDiffeomorphism(format!(
                "{n} values for a partition of {}",
                partition.len()
            )));
        }
        if gamma[0].abs() > 1e-12 || (gamma[n - 1] - 1.0).abs() > 1e-12 {
            return Err(DpError::InvalidDiffeomorphism(
                "must map 0 to 0 and 1 to 1".into(),
            ));
        }
        if gamma.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(DpError::InvalidDiffeomorphism(
                "must be strictly increasing".into(),
            ));
        }
        let mut derivative: Vec<f64> = (0..n - 1)
            .map(|l| (gamma[l + 1] - gamma[l]) / (partition[l + 1] - partition[l]))
            .collect();
        derivative.push(derivative[0]);
        Ok(Diffeomorphism { gamma, derivative })
    }

    pub fn identity(partition: &[f64]) -> Self {
        Diffeomorphism::new(partition.to_vec(), partition).expect("partition is a valid identity")
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn derivative(&self) -> &[f64] {
        &self.derivative
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// The data a DP run needs: `q1` sampled on `t`, and a spline of `q2` whose
/// knots are the column partition `z`.
pub struct DpProblem<'a> {
    q1: &'a Samples,
    t: &'a [f64],
    q2: &'a CubicSpline,
}

impl<'a> DpProblem<'a> {
    pub fn new(q1: &'a Samples, t: &'a [f64], q2: &'a CubicSpline) -> Self {
        assert_eq!(q1.len(), t.len());
        assert_eq!(q1.dim(), q2.dim());
        DpProblem { q1, t, q2 }
    }

    pub fn rows(&self) -> usize {
        self.t.len()
    }

    pub fn cols(&self) -> usize {
        self.q2.knots().len()
    }

    pub fn row_partition(&self) -> &[f64] {
        self.t
    }

    pub fn col_partition(&self) -> &[f64] {
        self.q2.knots()
    }

    /// Trapezoidal energy of the straight segment `(k,l) → (i,j)`, summed
    /// over the row indices in `rows` (sorted, first `k`, last `i`).
    pub fn segment_energy(&self, from: (usize, usize), to: (usize, usize), rows: &[usize]) -> f64 {
        let (k, l) = from;
        let (i, j) = to;
        debug_assert!(k < i && l < j);
        debug_assert!(rows.first() == Some(&k) && rows.last() == Some(&i));
        let z = self.q2.knots();
        let (tk, zl, zj) = (self.t[k], z[l], z[j]);
        let slope = (zj - zl) / (self.t[i] - tk);
        let root = slope.sqrt();
        let d = self.q1.dim();
        let mut buf = [0.0f64; 8];
        let mut heap;
        let q2v: &mut [f64] = if d <= buf.len() {
            &mut buf[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        let mut f = |m: usize| {
            let alpha = if m == i { zj } else { zl + slope * (self.t[m] - tk) };
            self.q2.eval_into(alpha, q2v);
            self.q1
                .get(m)
                .iter()
                .zip(q2v.iter())
                .map(|(a, b)| {
                    let r = a - root * b;
                    r * r
                })
                .sum::<f64>()
        };
        let mut prev_m = rows[0];
        let mut prev_f = f(prev_m);
        let mut total = 0.0;
        for &m in &rows[1..] {
            let fm = f(m);
            total += (self.t[m] - self.t[prev_m]) * (fm + prev_f);
            prev_m = m;
            prev_f = fm;
        }
        0.5 * total
    }
}

/// A set of grid points with the DP energy and back-pointer of each.
#[derive(Debug, Clone)]
pub struct GridPointSet {
    n: usize,
    m: usize,
    /// Distinct row indices, ascending.
    rows: Vec<usize>,
    /// `cols[row_start[p]..row_start[p + 1]]` are the columns of row `rows[p]`.
    row_start: Vec<usize>,
    cols: Vec<usize>,
    /// Distinct column indices over all rows, ascending.
    all_cols: Vec<usize>,
    energy: Vec<f64>,
    pointer: Vec<Option<(usize, usize)>>,
}

impl GridPointSet {
    /// Builds the set from arbitrary points of an `n × m` grid (duplicates ignored).
    pub fn new(n: usize, m: usize, points: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut pts: Vec<(usize, usize)> = points.into_iter().collect();
        assert!(pts.iter().all(|&(i, j)| i < n && j < m), "point outside grid");
        pts.sort_unstable();
        pts.dedup();
        let mut rows = Vec::new();
        let mut row_start = Vec::new();
        let mut cols = Vec::with_capacity(pts.len());
        for (idx, &(i, j)) in pts.iter().enumerate() {
            if rows.last() != Some(&i) {
                rows.push(i);
                row_start.push(idx);
            }
            cols.push(j);
        }
        row_start.push(pts.len());
        let mut all_cols = cols.clone();
        all_cols.sort_unstable();
        all_cols.dedup();
        let len = cols.len();
        GridPointSet {
            n,
            m,
            rows,
            row_start,
            cols,
            all_cols,
            energy: vec![f64::INFINITY; len],
            pointer: vec![None; len],
        }
    }

    /// Every interior point plus the two corners.
    pub fn full(n: usize, m: usize) -> Self {
        let interior = (1..n - 1).flat_map(|i| (1..m - 1).map(move |j| (i, j)));
        GridPointSet::new(
            n,
            m,
            std::iter::once((0, 0))
                .chain(interior)
                .chain(std::iter::once((n - 1, m - 1))),
        )
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn grid_size(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    fn row_cols(&self, p: usize) -> &[usize] {
        &self.cols[self.row_start[p]..self.row_start[p + 1]]
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let p = self.rows.binary_search(&i).ok()?;
        let c = self.row_cols(p).binary_search(&j).ok()?;
        Some(self.row_start[p] + c)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.slot(i, j).is_some()
    }

    /// DP energy of `(i, j)`; `None` if the point is absent or unreachable.
    pub fn energy(&self, i: usize, j: usize) -> Option<f64> {
        self.slot(i, j)
            .map(|s| self.energy[s])
            .filter(|e| e.is_finite())
    }

    pub fn pointer(&self, i: usize, j: usize) -> Option<(usize, usize)> {
        self.slot(i, j).and_then(|s| self.pointer[s])
    }

    pub fn points(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(move |(p, &i)| self.row_cols(p).iter().map(move |&j| (i, j)))
    }
}

/// Fills energies and back-pointers of `grid` by dynamic programming.
///
/// For each point `(i, j)` the candidate predecessors are the points of the
/// set whose row is among the `layrs` largest rows below `i` and whose
/// column is among the `layrs` largest columns below `j`. Ties go to the
/// first candidate in row-major order. A point with no reachable candidate
/// falls back to the reachable point with the largest row below `i`, then
/// the largest column below `j`.
pub fn procedure_dp(grid: &mut GridPointSet, problem: &DpProblem<'_>, layrs: usize) -> Result<()> {
    let (n, m) = (grid.n, grid.m);
    if n != problem.rows() || m != problem.cols() {
        return Err(DpError::TooFewSamples(problem.rows(), problem.cols()));
    }
    let origin = grid.slot(0, 0).ok_or(DpError::EmptyGrid)?;
    if grid.slot(n - 1, m - 1).is_none() {
        return Err(DpError::EmptyGrid);
    }
    let layrs = layrs.max(1);
    grid.energy.iter_mut().for_each(|e| *e = f64::INFINITY);
    grid.pointer.iter_mut().for_each(|p| *p = None);
    grid.energy[origin] = 0.0;

    for p in 1..grid.rows.len() {
        let i = grid.rows[p];
        let first_row = p.saturating_sub(layrs);
        for s in grid.row_start[p]..grid.row_start[p + 1] {
            let j = grid.cols[s];
            let q = grid.all_cols.partition_point(|&c| c < j);
            let cand_cols = &grid.all_cols[q.saturating_sub(layrs)..q];
            let mut best = f64::INFINITY;
            let mut best_ptr = None;
            for pk in first_row..p {
                let k = grid.rows[pk];
                let base = grid.row_start[pk];
                let row = grid.row_cols(pk);
                for &l in cand_cols {
                    let Ok(c) = row.binary_search(&l) else { continue };
                    let ek = grid.energy[base + c];
                    if !ek.is_finite() {
                        continue;
                    }
                    let e = ek + problem.segment_energy((k, l), (i, j), &grid.rows[pk..=p]);
                    if e < best {
                        best = e;
                        best_ptr = Some((k, l));
                    }
                }
            }
            if best_ptr.is_none() {
                if let Some((pk, k, l, ek)) = fallback_predecessor(grid, p, j) {
                    best = ek + problem.segment_energy((k, l), (i, j), &grid.rows[pk..=p]);
                    best_ptr = Some((k, l));
                }
            }
            grid.energy[s] = best;
            grid.pointer[s] = best_ptr;
        }
    }
    Ok(())
}

fn fallback_predecessor(
    grid: &GridPointSet,
    p: usize,
    j: usize,
) -> Option<(usize, usize, usize, f64)> {
    for pk in (0..p).rev() {
        let row = grid.row_cols(pk);
        let upto = row.partition_point(|&c| c < j);
        for c in (0..upto).rev() {
            let e = grid.energy[grid.row_start[pk] + c];
            if e.is_finite() {
                return Some((pk, grid.rows[pk], row[c], e));
            }
        }
    }
    None
}

/// Follows back-pointers from the upper-right corner to the origin,
/// returning the path vertices from origin to corner.
pub fn backtrack_path(grid: &GridPointSet) -> Result<Vec<(usize, usize)>> {
    let (n, m) = grid.grid_size();
    let mut path = vec![(n - 1, m - 1)];
    let mut cur = (n - 1, m - 1);
    while cur != (0, 0) {
        let next = grid.pointer(cur.0, cur.1).ok_or(DpError::BrokenPointerChain)?;
        if !(next.0 < cur.0 && next.1 < cur.1) {
            return Err(DpError::BrokenPointerChain);
        }
        path.push(next);
        cur = next;
    }
    path.reverse();
    Ok(path)
}

/// Converts a monotone vertex path into the discretized reparametrization,
/// interpolating linearly between vertices.
pub fn path_to_diffeomorphism(path: &[(usize, usize)], t: &[f64], z: &[f64]) -> Result<Diffeomorphism> {
    let n = t.len();
    let mut gamma = vec![f64::NAN; n];
    for w in path.windows(2) {
        let ((k, l), (i, j)) = (w[0], w[1]);
        gamma[k] = z[l];
        gamma[i] = z[j];
        let span = t[i] - t[k];
        for mm in k + 1..i {
            gamma[mm] = (t[i] - t[mm]) / span * z[l] + (t[mm] - t[k]) / span * z[j];
        }
    }
    if gamma.iter().any(|g| g.is_nan()) {
        return Err(DpError::BrokenPointerChain);
    }
    Diffeomorphism::new(gamma, t)
}

/// Backtracks `grid` into the optimal reparametrization.
pub fn backtrack_opt_diffeom(grid: &GridPointSet, t: &[f64], z: &[f64]) -> Result<Diffeomorphism> {
    let path = backtrack_path(grid)?;
    path_to_diffeomorphism(&path, t, z)
}

/// Output of [`adapt_dp`].
#[derive(Debug, Clone)]
pub struct DpSolution {
    pub diffeomorphism: Diffeomorphism,
    /// DP energy at the upper-right corner.
    pub energy: f64,
    pub path: Vec<(usize, usize)>,
}

/// Index set of level `r`: `round(p (n-1) / 2^r)` for `p = 0..=2^r`, deduplicated.
fn level_indices(n: usize, r: u32) -> Vec<usize> {
    let steps = 1u64 << r;
    let span = (n - 1) as u64;
    let mut out: Vec<usize> = (0..=steps)
        .map(|p| ((2 * p * span + steps) / (2 * steps)) as usize)
        .collect();
    out.dedup();
    out
}

/// Boundaries of the Voronoi bins of the interior level nodes; bin `p`
/// (`1 <= p <= len-2`) spans `[b[p-1], b[p]]`.
fn bin_boundaries(idx: &[usize], part: &[f64]) -> Vec<f64> {
    let k = idx.len();
    let mut b: Vec<f64> = (0..k - 1)
        .map(|p| 0.5 * (part[idx[p]] + part[idx[p + 1]]))
        .collect();
    b[0] = part[0];
    b[k - 2] = part[part.len() - 1];
    b
}

/// Interior bins `p` whose closed extent meets `[lo, hi]`.
fn bins_overlapping(b: &[f64], lo: f64, hi: f64) -> std::ops::RangeInclusive<usize> {
    let last = b.len() - 1;
    let first = b.partition_point(|&v| v < lo).max(1);
    let end = b.partition_point(|&v| v <= hi).min(last);
    first..=end
}

fn strip_bins(
    path: &[(usize, usize)],
    t: &[f64],
    z: &[f64],
    bx: &[f64],
    by: &[f64],
) -> Vec<(usize, usize)> {
    let mut bins = Vec::new();
    for w in path.windows(2) {
        let (x0, y0) = (t[w[0].0], z[w[0].1]);
        let (x1, y1) = (t[w[1].0], z[w[1].1]);
        let slope = (y1 - y0) / (x1 - x0);
        for p in bins_overlapping(bx, x0, x1) {
            let xa = x0.max(bx[p - 1]);
            let xb = x1.min(bx[p]);
            if xa > xb {
                continue;
            }
            let ya = y0 + slope * (xa - x0);
            let yb = if xb >= x1 { y1 } else { y0 + slope * (xb - x0) };
            for q in bins_overlapping(by, ya.min(yb), ya.max(yb)) {
                bins.push((p, q));
            }
        }
    }
    bins.sort_unstable();
    bins.dedup();
    bins
}

/// Linear-time approximate minimizer of the reparametrization energy
/// between `q1` (rows) and `q2` (columns, interpolated by its spline).
pub fn adapt_dp(q1: &ShapeFunction, q2: &ShapeFunction, cfg: &DpConfig) -> Result<DpSolution> {
    let spline = q2.spline();
    let problem = DpProblem::new(q1.values(), q1.partition().values(), &spline);
    adapt_dp_problem(&problem, cfg)
}

pub fn adapt_dp_problem(problem: &DpProblem<'_>, cfg: &DpConfig) -> Result<DpSolution> {
    cfg.validate()?;
    let (n, m) = (problem.rows(), problem.cols());
    if n < 3 || m < 3 {
        return Err(DpError::TooFewSamples(n, m));
    }
    let t = problem.row_partition();
    let z = problem.col_partition();
    let levels = usize::BITS - (n.max(m) - 2).leading_zeros();
    let mut path = vec![(0, 0), (n - 1, m - 1)];
    let mut grid = None;
    for r in 1..=levels {
        let ii = level_indices(n, r);
        let jj = level_indices(m, r);
        let bx = bin_boundaries(&ii, t);
        let by = bin_boundaries(&jj, z);
        let bins = strip_bins(&path, t, z, &bx, &by);
        let mut pts = Vec::with_capacity(bins.len() * 2 * (cfg.lstrp + 1) + 2);
        pts.push((0, 0));
        pts.push((n - 1, m - 1));
        for &(p, q) in &bins {
            let i0 = p.saturating_sub(cfg.lstrp).max(1);
            let j0 = q.saturating_sub(cfg.lstrp).max(1);
            pts.extend((i0..=p).map(|a| (ii[a], jj[q])));
            pts.extend((j0..=q).map(|b| (ii[p], jj[b])));
        }
        let mut g = GridPointSet::new(n, m, pts);
        procedure_dp(&mut g, problem, cfg.layrs)?;
        path = backtrack_path(&g)?;
        grid = Some(g);
    }
    let grid = grid.expect("at least one level");
    let energy = grid.energy(n - 1, m - 1).ok_or(DpError::BrokenPointerChain)?;
    let diffeomorphism = path_to_diffeomorphism(&path, t, z)?;
    Ok(DpSolution {
        diffeomorphism,
        energy,
        path,
    })
}
