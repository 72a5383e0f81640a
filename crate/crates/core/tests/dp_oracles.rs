mod common;

use common::{full_dp, max_abs, naive_segment, open_spline, random_samples, rng, uniform};
use elastic_shape::curve::{Curve, PartitionSpec};
use elastic_shape::dp::{
    adapt_dp, adapt_dp_problem, backtrack_opt_diffeom, procedure_dp, DpConfig, DpProblem,
    GridPointSet,
};
use elastic_shape::samples::Samples;
use elastic_shape::srvf::{compute_srvf, ShapeFunction};

/// Minimum over every strictly increasing lattice path from the lower-left
/// to the upper-right corner, by explicit enumeration.
fn enumerate_paths(n: usize, m: usize, seg: &dyn Fn((usize, usize), (usize, usize)) -> f64) -> f64 {
    fn walk(
        at: (usize, usize),
        acc: f64,
        n: usize,
        m: usize,
        seg: &dyn Fn((usize, usize), (usize, usize)) -> f64,
        best: &mut f64,
    ) {
        if at == (n - 1, m - 1) {
            *best = best.min(acc);
            return;
        }
        for i in at.0 + 1..n {
            for j in at.1 + 1..m {
                walk((i, j), acc + seg(at, (i, j)), n, m, seg, best);
            }
        }
    }
    let mut best = f64::INFINITY;
    walk((0, 0), 0.0, n, m, seg, &mut best);
    best
}

#[test]
fn segment_energy_matches_direct_sum() {
    let mut r = rng(11);
    for _ in 0..20 {
        let (n, m) = (8, 8);
        let t = uniform(n);
        let z = uniform(m);
        let q1 = random_samples(&mut r, 3, n);
        let q2 = open_spline(&z, &random_samples(&mut r, 3, m));
        let p = DpProblem::new(&q1, &t, &q2);
        for &(a, b) in &[((0, 0), (7, 7)), ((1, 2), (5, 3)), ((2, 0), (3, 6))] {
            let rows: Vec<usize> = (a.0..=b.0).collect();
            let got = p.segment_energy(a, b, &rows);
            let want = naive_segment(&q1, &t, &q2, &z, a, b);
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }
}

#[test]
fn segment_energy_with_zero_second_function() {
    let mut r = rng(12);
    let t: Vec<f64> = vec![0.0, 0.1, 0.35, 0.5, 0.8, 1.0];
    let z = uniform(5);
    let q1 = random_samples(&mut r, 2, t.len());
    let q2 = open_spline(&z, &Samples::zeros(2, 5));
    let p = DpProblem::new(&q1, &t, &q2);
    let rows = [1, 2, 3, 4];
    let want: f64 = rows
        .windows(2)
        .map(|w| {
            let n = |m: usize| q1.get(m).iter().map(|v| v * v).sum::<f64>();
            0.5 * (t[w[1]] - t[w[0]]) * (n(w[1]) + n(w[0]))
        })
        .sum();
    assert!((p.segment_energy((1, 0), (4, 3), &rows) - want).abs() < 1e-14);
}

#[test]
fn full_grid_dp_matches_path_enumeration() {
    let mut r = rng(13);
    for &(n, m) in &[(9, 9), (9, 9), (9, 9), (8, 9), (9, 6), (5, 7)] {
        let t = uniform(n);
        let z = uniform(m);
        let q1 = random_samples(&mut r, 2, n);
        let q2 = open_spline(&z, &random_samples(&mut r, 2, m));
        let p = DpProblem::new(&q1, &t, &q2);
        let seg = |a, b| naive_segment(&q1, &t, &q2, &z, a, b);
        let want = enumerate_paths(n, m, &seg);
        let mut g = GridPointSet::full(n, m);
        procedure_dp(&mut g, &p, n.max(m) - 1).unwrap();
        let got = g.energy(n - 1, m - 1).unwrap();
        assert!((got - want).abs() < 1e-10 * want.max(1.0), "{n}x{m}: {got} vs {want}");
        assert!((full_dp(n, m, &seg) - want).abs() < 1e-10 * want.max(1.0));
    }
}

#[test]
fn pointers_always_point_down_and_left() {
    let mut r = rng(14);
    let (n, m) = (12, 10);
    let t = uniform(n);
    let z = uniform(m);
    let q1 = random_samples(&mut r, 1, n);
    let q2 = open_spline(&z, &random_samples(&mut r, 1, m));
    let p = DpProblem::new(&q1, &t, &q2);
    for layrs in [1, 2, 5] {
        let mut g = GridPointSet::full(n, m);
        procedure_dp(&mut g, &p, layrs).unwrap();
        for (i, j) in g.points() {
            if let Some((k, l)) = g.pointer(i, j) {
                assert!(k < i && l < j);
            }
        }
        let gamma = backtrack_opt_diffeom(&g, &t, &z).unwrap();
        assert_eq!(gamma.gamma()[0], 0.0);
        assert_eq!(gamma.gamma()[n - 1], 1.0);
    }
}

#[test]
fn adapt_dp_with_wide_parameters_is_exact_on_small_grids() {
    let mut r = rng(15);
    for n in [5, 9, 12, 17] {
        let t = uniform(n);
        let q1 = random_samples(&mut r, 2, n);
        let q2 = open_spline(&t, &random_samples(&mut r, 2, n));
        let p = DpProblem::new(&q1, &t, &q2);
        let seg = |a, b| naive_segment(&q1, &t, &q2, &t, a, b);
        let want = full_dp(n, n, &seg);
        let cfg = DpConfig { layrs: 16, lstrp: 16 };
        let got = adapt_dp_problem(&p, &cfg).unwrap().energy;
        assert!(got <= want + 1e-10, "n={n}: {got} vs {want}");
    }
}

fn warp(t: f64) -> f64 {
    t + 0.08 * (std::f64::consts::TAU * t).sin()
}

/// Inverse of `warp` by bisection.
fn unwarp(s: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if warp(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn recovers_a_known_warp() {
    // q2 is the SRVF of β∘φ with φ = warp⁻¹, so the optimal γ is `warp`.
    let n = 129;
    let t = uniform(n);
    let beta = |s: f64| [s.cos() * 0.3 + s, (2.0 * s).sin() * 0.4, s * s];
    let c1 = Curve::new(Samples::from_rows(3, t.iter().map(|&s| beta(s))), t.clone(), false).unwrap();
    let c2 = Curve::new(Samples::from_rows(3, t.iter().map(|&s| beta(unwarp(s)))), t.clone(), false).unwrap();
    let q1 = compute_srvf(&c1);
    let q2 = compute_srvf(&c2);
    let sol = adapt_dp(&q1, &q2, &DpConfig::default()).unwrap();
    let truth: Vec<f64> = t.iter().map(|&s| warp(s)).collect();
    let dev = max_abs(sol.diffeomorphism.gamma(), &truth);
    assert!(dev <= 2.0 / (n - 1) as f64, "deviation {dev}");
}

#[test]
fn identical_functions_give_identity() {
    let n = 257;
    let t = uniform(n);
    let c = Curve::new(
        Samples::from_rows(2, t.iter().map(|&s| [s.sin(), (3.0 * s).cos()])),
        t.clone(),
        false,
    )
    .unwrap();
    let q = compute_srvf(&c);
    let sol = adapt_dp(&q, &q, &DpConfig::default()).unwrap();
    assert!(max_abs(sol.diffeomorphism.gamma(), &t) <= 1e-8);
    assert!(sol.energy <= 1e-10);
}

#[test]
fn handles_unequal_sizes_and_nonuniform_rows() {
    let mut r = rng(16);
    let t: Vec<f64> = (0..40).map(|l| (l as f64 / 39.0).powf(1.3)).collect();
    let z = uniform(23);
    let q1 = random_samples(&mut r, 3, t.len());
    let q2 = ShapeFunction::new(random_samples(&mut r, 3, z.len()), PartitionSpec::uniform(23), false);
    let spline = q2.spline();
    let p = DpProblem::new(&q1, &t, &spline);
    let sol = adapt_dp_problem(&p, &DpConfig::default()).unwrap();
    let g = sol.diffeomorphism.gamma();
    assert_eq!(g.len(), t.len());
    assert!(g.windows(2).all(|w| w[1] > w[0]));
    assert!(sol.diffeomorphism.derivative().iter().all(|&v| v > 0.0));
}

/// Larger `layrs`/`lstrp` widen the search, but a wider coarse level can
/// commit to a different strip, so the energy is not monotone on every
/// instance. On smooth warps it is.
#[test]
fn wider_search_on_smooth_instances_does_not_worsen() {
    let n = 129;
    let t = uniform(n);
    for a in [0.02, 0.05, 0.08, 0.12] {
        let w = |s: f64| s + a * (std::f64::consts::TAU * s).sin();
        let beta = |s: f64| [s.cos() * 0.3 + s, (2.0 * s).sin() * 0.4, s * s];
        let c1 = Curve::new(Samples::from_rows(3, t.iter().map(|&s| beta(s))), t.clone(), false).unwrap();
        let c2 = Curve::new(Samples::from_rows(3, t.iter().map(|&s| beta(w(s)))), t.clone(), false).unwrap();
        let q1 = compute_srvf(&c1);
        let q2 = compute_srvf(&c2);
        let mut prev = f64::INFINITY;
        for (layrs, lstrp) in [(2, 5), (5, 30), (8, 40)] {
            let e = adapt_dp(&q1, &q2, &DpConfig { layrs, lstrp }).unwrap().energy;
            assert!(e <= prev + 1e-6, "a={a} layrs={layrs} lstrp={lstrp}: {e} > {prev}");
            prev = e;
        }
    }
}

#[test]
fn wider_search_rarely_worsens_on_rough_instances() {
    let mut r = rng(99);
    let (mut worse, mut total) = (0, 0);
    for _ in 0..200 {
        let n = 33;
        let t = uniform(n);
        let q1 = random_samples(&mut r, 2, n);
        let q2 = open_spline(&t, &random_samples(&mut r, 2, n));
        let p = DpProblem::new(&q1, &t, &q2);
        let mut best = f64::INFINITY;
        for (layrs, lstrp) in [(1, 1), (2, 2), (3, 5), (5, 30), (8, 40)] {
            let e = adapt_dp_problem(&p, &DpConfig { layrs, lstrp }).unwrap().energy;
            total += 1;
            if e > best + 1e-12 {
                worse += 1;
            }
            best = best.min(e);
        }
    }
    assert!(worse * 100 <= total, "{worse} of {total} runs worsened");
}
