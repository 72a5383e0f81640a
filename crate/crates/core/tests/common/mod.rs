#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use elastic_shape::curve::{Curve, PartitionSpec};
use elastic_shape::samples::Samples;
use elastic_shape::spline::{CubicSpline, EndCondition};
use elastic_shape::srvf::ShapeFunction;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(n: usize) -> Vec<f64> {
    PartitionSpec::uniform(n).values().to_vec()
}

/// Unit helix around the z axis, or around the x axis when `x_axis`.
pub fn helix(n: usize, loops: f64, x_axis: bool) -> Curve {
    let tmax = 2.0 * PI * loops;
    let t: Vec<f64> = (0..n).map(|l| tmax * l as f64 / (n - 1) as f64).collect();
    let rows: Vec<[f64; 3]> = t
        .iter()
        .map(|&t| if x_axis { [t, t.cos(), t.sin()] } else { [t.cos(), t.sin(), t] })
        .collect();
    Curve::new(Samples::from_rows(3, rows), t, false).unwrap()
}

/// Closed curve on a sphere of radius `r`: an ellipse with semi-axes `a`,
/// `b` lifted onto the upper hemisphere, about z or (rotated) about x.
/// `params` are angles in `[0, 2π]`.
pub fn spherical_ellipse(r: f64, a: f64, b: f64, params: &[f64], about_x: bool) -> Curve {
    let n = params.len();
    let rows: Vec<[f64; 3]> = params
        .iter()
        .map(|&t| {
            let (x, y) = (a * t.cos(), b * t.sin());
            let h = (r * r - x * x - y * y).sqrt();
            if about_x {
                [h, x, y]
            } else {
                [x, y, h]
            }
        })
        .collect();
    let mut s = Samples::from_rows(3, rows);
    let first = s.get(0).to_vec();
    s.get_mut(n - 1).copy_from_slice(&first);
    Curve::new(s, params.to_vec(), true).unwrap()
}

/// The ellipsoid pair used for the closed-curve experiments: 1001 nodes on
/// a nonuniform partition and 901 nodes on a uniform one.
pub fn ellipsoid_pair() -> (Curve, Curve) {
    let p1: Vec<f64> = (0..1001)
        .map(|l| {
            let u = l as f64 / 1000.0;
            TAU * (u + 0.05 * (TAU * u).sin() / TAU)
        })
        .collect();
    let p2: Vec<f64> = (0..901).map(|l| TAU * l as f64 / 900.0).collect();
    (
        spherical_ellipse(2.0, 1.3, 1.0, &p1, false),
        spherical_ellipse(2.0, 1.0, 1.3, &p2, true),
    )
}

/// Smooth random closed curve in R^d from a few Fourier modes.
pub fn random_closed_curve(rng: &mut impl Rng, n: usize, d: usize) -> Curve {
    let modes = 3;
    let coef: Vec<f64> = (0..d * modes * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut s = Samples::zeros(d, n);
    for l in 0..n {
        let t = TAU * l as f64 / (n - 1) as f64;
        let p = s.get_mut(l);
        for (k, pk) in p.iter_mut().enumerate() {
            *pk = (0..modes)
                .map(|m| {
                    let f = (m + 1) as f64;
                    let c = &coef[(k * modes + m) * 2..];
                    (c[0] * (f * t).cos() + c[1] * (f * t).sin()) / f
                })
                .sum();
        }
        // a dominant first harmonic keeps the curve from degenerating
        p[0] += t.cos();
        if d > 1 {
            p[1] += t.sin();
        }
    }
    let first = s.get(0).to_vec();
    s.get_mut(n - 1).copy_from_slice(&first);
    Curve::with_uniform_partition(s, true).unwrap()
}

pub fn random_samples(rng: &mut impl Rng, d: usize, n: usize) -> Samples {
    Samples::from_flat(d, (0..d * n).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

pub fn periodic_function(values: Samples) -> ShapeFunction {
    let n = values.len();
    let mut v = values;
    let first = v.get(0).to_vec();
    v.get_mut(n - 1).copy_from_slice(&first);
    ShapeFunction::new(v, PartitionSpec::uniform(n), true)
}

pub fn open_spline(z: &[f64], values: &Samples) -> CubicSpline {
    CubicSpline::new(z, values, EndCondition::NotAKnot)
}

/// Uniformly distributed rotation in dimension `d` (QR of a Gaussian matrix
/// with sign fix, then det forced to +1).
pub fn random_rotation(rng: &mut impl Rng, d: usize) -> nalgebra::DMatrix<f64> {
    let g = nalgebra::DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..d {
        if r[(c, c)] < 0.0 {
            for row in 0..d {
                q[(row, c)] = -q[(row, c)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for row in 0..d {
            q[(row, 0)] = -q[(row, 0)];
        }
    }
    q
}

pub fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `½ Σ (t_{m+1} - t_m)(F_{m+1} + F_m)` over every row of the segment,
/// written out directly.
pub fn naive_segment(
    q1: &Samples,
    t: &[f64],
    q2: &CubicSpline,
    z: &[f64],
    (k, l): (usize, usize),
    (i, j): (usize, usize),
) -> f64 {
    let slope = (z[j] - z[l]) / (t[i] - t[k]);
    let f = |m: usize| -> f64 {
        let v = q2.eval(z[l] + slope * (t[m] - t[k]));
        (0..q1.dim())
            .map(|c| (q1.get(m)[c] - slope.sqrt() * v[c]).powi(2))
            .sum()
    };
    (k..i).map(|m| 0.5 * (t[m + 1] - t[m]) * (f(m + 1) + f(m))).sum()
}

/// Unrestricted DP over the full grid with every predecessor allowed.
pub fn full_dp(n: usize, m: usize, seg: &dyn Fn((usize, usize), (usize, usize)) -> f64) -> f64 {
    let mut e = vec![vec![f64::INFINITY; m]; n];
    e[0][0] = 0.0;
    for i in 1..n {
        for j in 1..m {
            for k in 0..i {
                for l in 0..j {
                    if e[k][l].is_finite() {
                        e[i][j] = e[i][j].min(e[k][l] + seg((k, l), (i, j)));
                    }
                }
            }
        }
    }
    e[n - 1][m - 1]
}
