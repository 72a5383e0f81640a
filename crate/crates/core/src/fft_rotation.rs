//! Cross matrices for every circular shift at once, via the DFT.
//!
//! For periodic samples on a uniform partition with `n = N-1` distinct
//! nodes, `A_kj(s) = Σ_a target_k[a] source_j[(s + a) mod n]` is a circular
//! cross-correlation. Reversing the target sequence turns it into a
//! circular convolution, computed as `IDFT(DFT(rev target_k) · DFT(source_j))`.

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{RotationError, SrvfError};
use crate::rotation::{ku_rotation, CrossMatrix, Rotation};
use crate::srvf::ShapeFunction;

type Result<T> = std::result::Result<T, RotationError>;

/// One `(shift, rotation, maxtrace)` triple from the all-shifts search.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRotationCandidate {
    /// 0-based shift: the source restarted at node `offset`.
    pub offset: usize,
    pub rotation: Rotation,
    pub maxtrace: f64,
}

fn check_periodic_pair(target: &ShapeFunction, source: &ShapeFunction) -> Result<()> {
    if !target.is_periodic() || !source.is_periodic() {
        return Err(SrvfError::NotPeriodic.into());
    }
    if !target.partition().is_uniform() || !source.partition().is_uniform() {
        return Err(SrvfError::NonUniformPartition.into());
    }
    if target.partition() != source.partition() || target.dim() != source.dim() {
        return Err(RotationError::PartitionMismatch);
    }
    Ok(())
}

/// Unweighted cross matrices `A(s)`, `s = 0..N-1`, for every circular shift
/// of `source` against `target`.
pub fn circular_cross_matrices(
    target: &ShapeFunction,
    source: &ShapeFunction,
) -> Result<Vec<CrossMatrix>> {
    check_periodic_pair(target, source)?;
    let d = target.dim();
    let n = target.len() - 1;
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    let transform = |seq: Vec<Complex<f64>>| {
        let mut buf = seq;
        fft.process(&mut buf);
        buf
    };
    // target reversed: rev[a] = target[(n - a) mod n]
    let target_hat: Vec<Vec<Complex<f64>>> = (0..d)
        .map(|k| {
            let seq = (0..n)
                .map(|a| Complex::new(target.values().get((n - a) % n)[k], 0.0))
                .collect();
            transform(seq)
        })
        .collect();
    let source_hat: Vec<Vec<Complex<f64>>> = (0..d)
        .map(|j| {
            let seq = (0..n)
                .map(|a| Complex::new(source.values().get(a)[j], 0.0))
                .collect();
            transform(seq)
        })
        .collect();

    let mut out = vec![DMatrix::<f64>::zeros(d, d); n];
    let scale = 1.0 / n as f64;
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for k in 0..d {
        for j in 0..d {
            for ((b, x), y) in buf.iter_mut().zip(&target_hat[k]).zip(&source_hat[j]) {
                *b = x * y;
            }
            ifft.process(&mut buf);
            for (s, v) in buf.iter().enumerate() {
                out[s][(k, j)] = v.re * scale;
            }
        }
    }
    Ok(out.into_iter().map(CrossMatrix).collect())
}

/// Kabsch-Umeyama over every admissible shift using the FFT cross matrices.
///
/// Cross matrices are scaled by the grid spacing so `maxtrace` agrees with
/// the trapezoid-weighted [`crate::rotation::cross_matrix`] of the shifted
/// source. Returns the `itop` best shifts, largest `maxtrace` first, ties to
/// the smaller offset.
pub fn ku2(
    target: &ShapeFunction,
    source: &ShapeFunction,
    admissible: &[usize],
    itop: usize,
) -> Result<Vec<ShiftRotationCandidate>> {
    if itop == 0 || itop > admissible.len() {
        return Err(RotationError::ItopTooLarge {
            itop,
            available: admissible.len(),
        });
    }
    let all = circular_cross_matrices(target, source)?;
    let h = 1.0 / all.len() as f64;
    let mut candidates = admissible
        .iter()
        .map(|&offset| {
            let a = all.get(offset).ok_or(SrvfError::ShiftOutOfRange {
                offset,
                samples: all.len(),
            })?;
            let (rotation, maxtrace) = ku_rotation(&CrossMatrix(&a.0 * h))?;
            Ok(ShiftRotationCandidate {
                offset,
                rotation,
                maxtrace,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    sort_candidates(&mut candidates);
    candidates.truncate(itop);
    Ok(candidates)
}

pub(crate) fn sort_candidates(c: &mut [ShiftRotationCandidate]) {
    c.sort_by(|a, b| b.maxtrace.total_cmp(&a.maxtrace).then(a.offset.cmp(&b.offset)));
}
