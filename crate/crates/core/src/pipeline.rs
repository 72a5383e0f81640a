//! Elastic shape distance: alternating minimization over the starting
//! point, the rotation and the reparametrization.

use nalgebra::DMatrix;

use crate::curve::{
    build_common_partition, normalize, resample, reverse_direction, Curve, PartitionSpec,
};
use crate::dp::{adapt_dp_problem, DpConfig, DpProblem, Diffeomorphism};
use crate::error::{CurveError, Error, Result, RotationError};
use crate::fft_rotation::{ku2, sort_candidates, ShiftRotationCandidate};
use crate::rotation::{cross_matrix, ku_rotation, Rotation};
use crate::samples::{dist_sq, Samples};
use crate::spline::CubicSpline;
use crate::srvf::{compute_srvf, shift, shift_samples, trapezoid_weights, ShapeFunction};

/// Which alternating scheme drives closed and multi-dimensional cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Reparametrizes the second curve; all starting points are ranked by
    /// rotation fit before any DP run.
    #[default]
    Procedure2,
    /// Reparametrizes the first curve; one DP run per starting point.
    Procedure1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub itop: usize,
    pub iten: usize,
    pub tol: f64,
    pub e_init: f64,
    pub dp: DpConfig,
    pub use_fft: bool,
    pub try_both_directions: bool,
    /// Keep every `stride`-th node as a starting point.
    pub stride: usize,
    pub scheme: Scheme,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            itop: 1,
            iten: 10,
            tol: 1e-6,
            e_init: 1e6,
            dp: DpConfig::default(),
            use_fft: false,
            try_both_directions: false,
            stride: 1,
            scheme: Scheme::Procedure2,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.itop == 0 {
            return Err(Error::InvalidConfig("itop must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidConfig("stride must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        self.dp.validate()?;
        Ok(())
    }
}

/// Candidate starting points, as node offsets and parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct StartingPointSet {
    pub offsets: Vec<usize>,
    pub params: Vec<f64>,
}

impl StartingPointSet {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

/// `{0}` for two open curves, otherwise every `stride`-th node of the
/// partition except the last (which coincides with the first on a closed curve).
pub fn starting_point_set(c1: &Curve, c2: &Curve, p: &PartitionSpec, stride: usize) -> StartingPointSet {
    if !c1.is_closed() && !c2.is_closed() {
        return StartingPointSet {
            offsets: vec![0],
            params: vec![0.0],
        };
    }
    let offsets: Vec<usize> = (0..p.len() - 1).step_by(stride.max(1)).collect();
    let params = offsets.iter().map(|&m| p.values()[m]).collect();
    StartingPointSet { offsets, params }
}

/// Normalized curves on their shared partition, with their SRVFs.
#[derive(Debug, Clone)]
pub struct PreparedCurves {
    pub curve1: Curve,
    pub curve2: Curve,
    pub srvf1: ShapeFunction,
    pub srvf2: ShapeFunction,
    /// The input curves were exchanged so that a closed curve comes first.
    pub swapped: bool,
}

impl PreparedCurves {
    /// Normalizes both curves, resamples them on their common partition
    /// (scalar open pairs keep their own), and computes SRVFs.
    pub fn new(c1: &Curve, c2: &Curve) -> Result<Self> {
        let n1 = normalize(c1)?;
        let n2 = normalize(c2)?;
        let (curve1, curve2) = match build_common_partition(&n1, &n2) {
            Ok(p) => (resample(&n1, &p), resample(&n2, &p)),
            Err(CurveError::NoCommonPartitionNeeded) => (n1, n2),
            Err(e) => return Err(e.into()),
        };
        let srvf1 = compute_srvf(&curve1);
        let srvf2 = compute_srvf(&curve2);
        Ok(PreparedCurves {
            curve1,
            curve2,
            srvf1,
            srvf2,
            swapped: false,
        })
    }

    fn starting_points(&self, stride: usize) -> StartingPointSet {
        let p = self.srvf1.partition();
        starting_point_set(&self.curve1, &self.curve2, p, stride)
    }
}

#[derive(Debug, Clone)]
pub struct RegistrationResult {
    /// Starting parameter of the first curve.
    pub t0: f64,
    /// Node index of `t0`.
    pub start_offset: usize,
    pub rotation: Rotation,
    pub gamma: Diffeomorphism,
    /// Partition on which `gamma` and the registered samples live.
    pub partition: Vec<f64>,
    /// Minimal discretized energy `E = Σ h_l ‖q̂1 - q̂2‖²`.
    pub energy: f64,
    /// Elastic shape distance `√E`.
    pub distance: f64,
    pub registered_curve1: Samples,
    pub registered_curve2: Samples,
    pub registered_srvf1: Samples,
    pub registered_srvf2: Samples,
    pub direction_reversed: bool,
    pub curves_swapped: bool,
    /// Repeat-loop iterations performed (1 for the single-pass schemes).
    pub iterations: usize,
}

fn trapezoid_energy(t: &[f64], a: &Samples, b: &Samples) -> f64 {
    trapezoid_weights(t)
        .iter()
        .zip(a.iter().zip(b.iter()))
        .map(|(w, (x, y))| w * dist_sq(x, y))
        .sum()
}

impl RegistrationResult {
    /// `Σ h_l ‖q̂1 - q̂2‖²` from the registered SRVFs.
    pub fn recomputed_energy(&self) -> f64 {
        trapezoid_energy(&self.partition, &self.registered_srvf1, &self.registered_srvf2)
    }
}

/// `√γ'_l q(γ_l)` for every node, with `q` given by its spline.
fn reparametrize(spline: &CubicSpline, g: &Diffeomorphism) -> Samples {
    let mut out = spline.eval_many(g.gamma());
    for (l, &dg) in g.derivative().iter().enumerate() {
        let s = dg.sqrt();
        out.get_mut(l).iter_mut().for_each(|v| *v *= s);
    }
    out
}

/// Shifted copy of a function's values; offset 0 leaves open functions alone.
fn shifted(q: &ShapeFunction, offset: usize) -> Result<ShapeFunction> {
    if offset == 0 {
        Ok(q.clone())
    } else {
        Ok(shift(q, offset)?)
    }
}

/// `Σ h_l ‖R q1(t0 + t_l) - √γ'_l q2(γ_l)‖²`, with `q2` interpolated by
/// its cubic spline (and `q1` too when `t0` is not zero).
pub fn evaluate_energy(
    t0: f64,
    r: &Rotation,
    g: &Diffeomorphism,
    q1: &ShapeFunction,
    q2: &ShapeFunction,
) -> Result<f64> {
    if q1.partition() != q2.partition() || g.len() != q1.len() {
        return Err(RotationError::PartitionMismatch.into());
    }
    let t = q1.partition().values();
    let base = if t0 == 0.0 {
        q1.values().clone()
    } else {
        if !q1.is_periodic() {
            return Err(crate::error::SrvfError::NotPeriodic.into());
        }
        let params: Vec<f64> = t.iter().map(|tl| t0 + tl).collect();
        q1.spline().eval_many(&params)
    };
    let lhs = r.apply_all(&base);
    let rhs = reparametrize(&q2.spline(), g);
    Ok(trapezoid_energy(t, &lhs, &rhs))
}

fn rotated(r: &Rotation, s: &Samples) -> Samples {
    r.apply_all(s)
}

fn shifted_points(c: &Curve, offset: usize) -> Samples {
    if offset == 0 {
        c.points().clone()
    } else {
        shift_samples(c.points(), offset)
    }
}

fn curve_spline(c: &Curve) -> CubicSpline {
    let end = if c.is_closed() {
        crate::spline::EndCondition::Periodic
    } else {
        crate::spline::EndCondition::NotAKnot
    };
    CubicSpline::new(c.partition(), c.points(), end)
}

/// Procedure 1: for every starting point, rotate, reparametrize the first
/// curve by DP, and rotate again; keeps the best triple.
pub fn procedure1(
    k: &StartingPointSet,
    prep: &PreparedCurves,
    cfg: &PipelineConfig,
) -> Result<RegistrationResult> {
    cfg.validate()?;
    let (q1, q2) = (&prep.srvf1, &prep.srvf2);
    let t = q1.partition().values();
    let d = q1.dim();
    let mut best: Option<RegistrationResult> = None;
    for (&offset, &t0) in k.offsets.iter().zip(&k.params) {
        let q1s = shifted(q1, offset)?;
        let r = if d == 1 {
            Rotation::identity(1)
        } else {
            ku_rotation(&cross_matrix(q2, &q1s)?)?.0
        };
        let bar = q1s.with_values(rotated(&r, q1s.values()));
        let bar_spline = bar.spline();
        let problem = DpProblem::new(q2.values(), t, &bar_spline);
        let sol = adapt_dp_problem(&problem, &cfg.dp)?;
        let g = sol.diffeomorphism;
        let q1s_spline = q1s.spline();
        let warped = q1s.with_values(reparametrize(&q1s_spline, &g));
        let r = if d == 1 {
            Rotation::identity(1)
        } else {
            ku_rotation(&cross_matrix(q2, &warped)?)?.0
        };
        let hat = rotated(&r, warped.values());
        let energy = trapezoid_energy(t, &hat, q2.values());
        if best.as_ref().is_none_or(|b| energy < b.energy) {
            best = Some(RegistrationResult {
                t0,
                start_offset: offset,
                rotation: r,
                gamma: g,
                partition: t.to_vec(),
                energy,
                distance: energy.sqrt(),
                registered_curve1: Samples::zeros(d, 0),
                registered_curve2: prep.curve2.points().clone(),
                registered_srvf1: hat,
                registered_srvf2: q2.values().clone(),
                direction_reversed: false,
                curves_swapped: prep.swapped,
                iterations: 1,
            });
        }
    }
    let mut best = best.ok_or_else(|| Error::InvalidConfig("empty starting-point set".into()))?;
    let c1 = Curve::new(
        shifted_points(&prep.curve1, best.start_offset),
        t.to_vec(),
        prep.curve1.is_closed(),
    )?;
    best.registered_curve1 = rotated(&best.rotation, &curve_spline(&c1).eval_many(best.gamma.gamma()));
    Ok(best)
}

/// Procedure 1': scalar open curves on their own partitions; a single DP
/// run reparametrizing the second curve.
pub fn procedure1_prime(prep: &PreparedCurves, cfg: &PipelineConfig) -> Result<RegistrationResult> {
    let (q1, q2) = (&prep.srvf1, &prep.srvf2);
    if q1.dim() != 1 || q2.dim() != 1 || prep.curve1.is_closed() || prep.curve2.is_closed() {
        return Err(Error::WrongCase);
    }
    cfg.dp.validate()?;
    let t = q1.partition().values();
    let q2_spline = q2.spline();
    let problem = DpProblem::new(q1.values(), t, &q2_spline);
    let sol = adapt_dp_problem(&problem, &cfg.dp)?;
    let g = sol.diffeomorphism;
    let hat2 = reparametrize(&q2_spline, &g);
    let energy = trapezoid_energy(t, q1.values(), &hat2);
    Ok(RegistrationResult {
        t0: 0.0,
        start_offset: 0,
        rotation: Rotation::identity(1),
        partition: t.to_vec(),
        energy,
        distance: energy.sqrt(),
        registered_curve1: prep.curve1.points().clone(),
        registered_curve2: curve_spline(&prep.curve2).eval_many(g.gamma()),
        registered_srvf1: q1.values().clone(),
        registered_srvf2: hat2,
        gamma: g,
        direction_reversed: false,
        curves_swapped: prep.swapped,
        iterations: 1,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RotationSearch {
    PerShift,
    Fft,
}

/// Rotation fit of every starting point against `target`; the `itop` best.
fn rank_starting_points(
    k: &StartingPointSet,
    target: &ShapeFunction,
    q1: &ShapeFunction,
    itop: usize,
) -> Result<Vec<ShiftRotationCandidate>> {
    if itop > k.len() {
        return Err(RotationError::ItopTooLarge {
            itop,
            available: k.len(),
        }
        .into());
    }
    let mut out = Vec::with_capacity(k.len());
    for &offset in &k.offsets {
        let (rotation, maxtrace) = ku_rotation(&cross_matrix(target, &shifted(q1, offset)?)?)?;
        out.push(ShiftRotationCandidate {
            offset,
            rotation,
            maxtrace,
        });
    }
    sort_candidates(&mut out);
    out.truncate(itop);
    Ok(out)
}

struct Tracked {
    offset: usize,
    rotation: Rotation,
    gamma: Diffeomorphism,
    energy: f64,
    hat1: Samples,
    hat2: Samples,
}

fn repeat_loop(
    k: &StartingPointSet,
    prep: &PreparedCurves,
    cfg: &PipelineConfig,
    search: RotationSearch,
) -> Result<RegistrationResult> {
    cfg.validate()?;
    let (q1, q2) = (&prep.srvf1, &prep.srvf2);
    let t = q1.partition().values();
    let q2_spline = q2.spline();
    let mut target = q2.clone();
    let mut e_curr = cfg.e_init;
    let mut best: Option<Tracked> = None;
    let mut iter = 0;
    loop {
        iter += 1;
        let e_prev = e_curr;
        let couples = match search {
            RotationSearch::PerShift => rank_starting_points(k, &target, q1, cfg.itop)?,
            RotationSearch::Fft => ku2(&target, q1, &k.offsets, cfg.itop)?,
        };
        e_curr = f64::INFINITY;
        for c in couples {
            let hat1 = rotated(&c.rotation, shifted(q1, c.offset)?.values());
            let problem = DpProblem::new(&hat1, t, &q2_spline);
            let sol = adapt_dp_problem(&problem, &cfg.dp)?;
            let hat2 = reparametrize(&q2_spline, &sol.diffeomorphism);
            let energy = trapezoid_energy(t, &hat1, &hat2);
            e_curr = e_curr.min(energy);
            if best.as_ref().is_none_or(|b| energy < b.energy) {
                best = Some(Tracked {
                    offset: c.offset,
                    rotation: c.rotation,
                    gamma: sol.diffeomorphism,
                    energy,
                    hat1,
                    hat2,
                });
            }
        }
        let b = best.as_ref().expect("itop >= 1 candidates per iteration");
        target = q2.with_values(b.hat2.clone());
        if (e_curr - e_prev).abs() < cfg.tol || iter > cfg.iten {
            break;
        }
    }
    let b = best.expect("at least one iteration");
    let curve1 = rotated(&b.rotation, &shifted_points(&prep.curve1, b.offset));
    let curve2 = curve_spline(&prep.curve2).eval_many(b.gamma.gamma());
    Ok(RegistrationResult {
        t0: t[b.offset],
        start_offset: b.offset,
        rotation: b.rotation,
        partition: t.to_vec(),
        energy: b.energy,
        distance: b.energy.sqrt(),
        registered_curve1: curve1,
        registered_curve2: curve2,
        registered_srvf1: b.hat1,
        registered_srvf2: b.hat2,
        gamma: b.gamma,
        direction_reversed: false,
        curves_swapped: prep.swapped,
        iterations: iter,
    })
}

/// Procedure 2: each iteration ranks all starting points by rotation fit
/// against the current reparametrized second function, then runs DP for
/// the `itop` best.
pub fn procedure2(
    k: &StartingPointSet,
    prep: &PreparedCurves,
    cfg: &PipelineConfig,
) -> Result<RegistrationResult> {
    repeat_loop(k, prep, cfg, RotationSearch::PerShift)
}

/// Procedure 2 with the per-shift rotation loop replaced by one FFT pass.
pub fn procedure3(
    k: &StartingPointSet,
    prep: &PreparedCurves,
    cfg: &PipelineConfig,
) -> Result<RegistrationResult> {
    if !prep.curve1.is_closed() || !prep.curve2.is_closed() {
        return Err(Error::NotClosed);
    }
    repeat_loop(k, prep, cfg, RotationSearch::Fft)
}

/// Orders the pair so a closed curve comes first; for two closed curves
/// without FFT, the one with more samples goes first.
fn order_pair<'a>(c1: &'a Curve, c2: &'a Curve, cfg: &PipelineConfig) -> (&'a Curve, &'a Curve, bool) {
    let swap = match (c1.is_closed(), c2.is_closed()) {
        (false, true) => true,
        (true, true) => !cfg.use_fft && c2.len() > c1.len(),
        _ => false,
    };
    if swap {
        (c2, c1, true)
    } else {
        (c1, c2, false)
    }
}

fn run_once(c1: &Curve, c2: &Curve, cfg: &PipelineConfig) -> Result<RegistrationResult> {
    if c1.dim() != c2.dim() {
        return Err(CurveError::DimensionMismatch(c1.dim(), c2.dim()).into());
    }
    if cfg.use_fft && !(c1.is_closed() && c2.is_closed()) {
        return Err(Error::NotClosed);
    }
    let (a, b, swapped) = order_pair(c1, c2, cfg);
    let mut prep = PreparedCurves::new(a, b)?;
    prep.swapped = swapped;
    if c1.dim() == 1 && !c1.is_closed() && !c2.is_closed() {
        return procedure1_prime(&prep, cfg);
    }
    let k = prep.starting_points(cfg.stride);
    if cfg.use_fft {
        procedure3(&k, &prep, cfg)
    } else {
        match cfg.scheme {
            Scheme::Procedure2 => procedure2(&k, &prep, cfg),
            Scheme::Procedure1 => procedure1(&k, &prep, cfg),
        }
    }
}

/// Elastic shape distance and registration of two curves.
///
/// With `try_both_directions` the second curve is also traversed backwards
/// and the smaller distance wins (ties keep the original direction).
pub fn compute_esd(c1: &Curve, c2: &Curve, cfg: &PipelineConfig) -> Result<RegistrationResult> {
    cfg.validate()?;
    let forward = run_once(c1, c2, cfg)?;
    if !cfg.try_both_directions {
        return Ok(forward);
    }
    let mut backward = run_once(c1, &reverse_direction(c2), cfg)?;
    if backward.distance < forward.distance {
        backward.direction_reversed = true;
        Ok(backward)
    } else {
        Ok(forward)
    }
}

/// Row-major `d × d` entries of a matrix.
pub fn row_major(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn closed_curve(n: usize, f: impl Fn(f64) -> [f64; 3]) -> Curve {
        let rows: Vec<[f64; 3]> = (0..n).map(|l| f(TAU * l as f64 / (n - 1) as f64)).collect();
        let mut s = Samples::from_rows(3, rows);
        let first = s.get(0).to_vec();
        s.get_mut(n - 1).copy_from_slice(&first);
        Curve::with_uniform_partition(s, true).unwrap()
    }

    #[test]
    fn starting_points_cases() {
        let open = Curve::with_uniform_partition(Samples::from_rows(1, [[0.0], [1.0], [3.0]]), false).unwrap();
        let k = starting_point_set(&open, &open, &PartitionSpec::uniform(3), 1);
        assert_eq!(k.offsets, vec![0]);
        let c = closed_curve(1001, |t| [t.cos(), t.sin(), 0.0]);
        let p = PartitionSpec::uniform(1001);
        assert_eq!(starting_point_set(&c, &open, &p, 1).len(), 1000);
        let k10 = starting_point_set(&c, &open, &p, 10);
        assert_eq!(k10.len(), 100);
        assert!(k10.params.iter().zip(&k10.offsets).all(|(v, &o)| *v == p.values()[o]));
    }

    #[test]
    fn energy_of_identical_functions_is_zero() {
        let c = normalize(&closed_curve(129, |t| [t.cos(), 2.0 * t.sin(), (2.0 * t).sin()])).unwrap();
        let q = compute_srvf(&c);
        let g = Diffeomorphism::identity(q.partition().values());
        let e = evaluate_energy(0.0, &Rotation::identity(3), &g, &q, &q).unwrap();
        assert!(e < 1e-12);
        let zero = q.with_values(Samples::zeros(3, q.len()));
        let e = evaluate_energy(0.0, &Rotation::identity(3), &g, &q, &zero).unwrap();
        assert!((e - q.squared_norm()).abs() < 1e-14);
        assert!((e - 1.0).abs() < 1e-2);
    }

    #[test]
    fn self_distance_is_zero() {
        let c = closed_curve(101, |t| [t.cos(), 1.5 * t.sin(), 0.3 * (3.0 * t).cos()]);
        for scheme in [Scheme::Procedure1, Scheme::Procedure2] {
            let cfg = PipelineConfig {
                scheme,
                ..PipelineConfig::default()
            };
            let r = compute_esd(&c, &c, &cfg).unwrap();
            assert!(r.distance < 1e-6, "{scheme:?}: {}", r.distance);
            assert!((r.energy - r.recomputed_energy()).abs() < 1e-10);
        }
    }

    #[test]
    fn wrong_case_and_not_closed() {
        let c = closed_curve(33, |t| [t.cos(), t.sin(), 0.0]);
        let prep = PreparedCurves::new(&c, &c).unwrap();
        assert_eq!(procedure1_prime(&prep, &PipelineConfig::default()).unwrap_err(), Error::WrongCase);
        let open = Curve::with_uniform_partition(
            Samples::from_rows(3, (0..20).map(|l| [l as f64, (l * l) as f64, 0.0])),
            false,
        )
        .unwrap();
        let cfg = PipelineConfig {
            use_fft: true,
            ..PipelineConfig::default()
        };
        assert_eq!(compute_esd(&c, &open, &cfg).unwrap_err(), Error::NotClosed);
    }
}
