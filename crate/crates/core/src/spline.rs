//! Componentwise cubic spline interpolation of vector-valued samples.
//!
//! Open data uses not-a-knot end conditions; periodic data uses periodic
//! end conditions with the last knot identified with the first.

use crate::samples::Samples;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndCondition {
    NotAKnot,
    Periodic,
}

/// Cubic spline through `(knots[l], values[l])`, one spline per coordinate.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    knots: Vec<f64>,
    values: Samples,
    /// Second derivatives at the knots, same layout as `values`.
    second: Samples,
    end: EndCondition,
    /// Knot spacing when the knots are equispaced, for O(1) interval lookup.
    step: Option<f64>,
}

impl CubicSpline {
    /// Panics if fewer than two knots are given, knots are not strictly
    /// increasing, or lengths disagree.
    pub fn new(knots: &[f64], values: &Samples, end: EndCondition) -> Self {
        let n = knots.len();
        assert!(n >= 2, "a spline needs at least two knots");
        assert_eq!(values.len(), n, "one value per knot");
        assert!(
            knots.windows(2).all(|w| w[1] > w[0]),
            "knots must be strictly increasing"
        );
        let dim = values.dim();
        let mut values = values.clone();
        if end == EndCondition::Periodic {
            let first = values.get(0).to_vec();
            values.get_mut(n - 1).copy_from_slice(&first);
        }
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let mut second = Samples::zeros(dim, n);
        for k in 0..dim {
            let y = values.component(k);
            let m = match end {
                EndCondition::NotAKnot => not_a_knot_second(&h, &y),
                EndCondition::Periodic => periodic_second(&h, &y),
            };
            for (l, v) in m.into_iter().enumerate() {
                second.get_mut(l)[k] = v;
            }
        }
        let step = (knots[n - 1] - knots[0]) / (n - 1) as f64;
        let uniform = h.iter().all(|&hi| (hi - step).abs() <= 1e-12 * step);
        CubicSpline {
            knots: knots.to_vec(),
            values,
            second,
            end,
            step: uniform.then_some(step),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn end_condition(&self) -> EndCondition {
        self.end
    }

    fn period(&self) -> f64 {
        self.knots[self.knots.len() - 1] - self.knots[0]
    }

    /// Evaluates all coordinates at `x`, writing into `out`.
    ///
    /// Periodic splines wrap `x` into the knot range; open splines
    /// extrapolate with the end polynomials.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) {
        let n = self.knots.len();
        let mut x = x;
        if self.end == EndCondition::Periodic {
            let a = self.knots[0];
            let p = self.period();
            x = a + (x - a).rem_euclid(p);
            if x >= self.knots[n - 1] {
                x = a;
            }
        }
        let i = self.interval(x);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - x) / h;
        let b = (x - self.knots[i]) / h;
        let c = (a * a * a - a) * h * h / 6.0;
        let e = (b * b * b - b) * h * h / 6.0;
        let y0 = self.values.get(i);
        let y1 = self.values.get(i + 1);
        let m0 = self.second.get(i);
        let m1 = self.second.get(i + 1);
        for k in 0..out.len() {
            out[k] = a * y0[k] + b * y1[k] + c * m0[k] + e * m1[k];
        }
    }

    /// Index `i` with `knots[i] <= x < knots[i+1]`, clamped to `0..=n-2`.
    fn interval(&self, x: f64) -> usize {
        let n = self.knots.len();
        if let Some(step) = self.step {
            let g = ((x - self.knots[0]) / step).floor();
            if g >= 0.0 && g < (n - 1) as f64 {
                let g = g as usize;
                // the guess can be off by one through rounding
                if self.knots[g] <= x && x < self.knots[g + 1] {
                    return g;
                }
                if g > 0 && self.knots[g - 1] <= x && x < self.knots[g] {
                    return g - 1;
                }
                if g + 2 < n && self.knots[g + 1] <= x && x < self.knots[g + 2] {
                    return g + 1;
                }
            }
        }
        match self.knots.partition_point(|&k| k <= x) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        }
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out);
        out
    }

    pub fn eval_many(&self, xs: &[f64]) -> Samples {
        let d = self.dim();
        let mut data = vec![0.0; d * xs.len()];
        for (x, out) in xs.iter().zip(data.chunks_exact_mut(d)) {
            self.eval_into(*x, out);
        }
        Samples::from_flat(d, data)
    }
}

fn not_a_knot_second(h: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    match n {
        2 => vec![0.0; 2],
        // a single parabola through the three points
        3 => {
            let c = 2.0 * (delta[1] - delta[0]) / (h[0] + h[1]);
            vec![c; 3]
        }
        _ => {
            // unknowns m[1..n-1], tridiagonal after eliminating m[0], m[n-1]
            let k = n - 2;
            let mut sub = vec![0.0; k];
            let mut diag = vec![0.0; k];
            let mut sup = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for r in 0..k {
                let i = r + 1;
                sub[r] = h[i - 1];
                diag[r] = 2.0 * (h[i - 1] + h[i]);
                sup[r] = h[i];
                rhs[r] = 6.0 * (delta[i] - delta[i - 1]);
            }
            let (h0, h1) = (h[0], h[1]);
            diag[0] = 3.0 * h0 + 2.0 * h1 + h0 * h0 / h1;
            sup[0] = h1 - h0 * h0 / h1;
            let (ha, hb) = (h[n - 3], h[n - 2]);
            diag[k - 1] = 2.0 * ha + 3.0 * hb + hb * hb / ha;
            sub[k - 1] = ha - hb * hb / ha;
            if k == 1 {
                unreachable!("n >= 4 gives at least two interior unknowns");
            }
            let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs);
            let mut m = vec![0.0; n];
            m[1..n - 1].copy_from_slice(&inner);
            m[0] = m[1] * (1.0 + h0 / h1) - (h0 / h1) * m[2];
            m[n - 1] = m[n - 2] * (1.0 + hb / ha) - (hb / ha) * m[n - 3];
            m
        }
    }
}

fn periodic_second(h: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let p = n - 1; // number of intervals == number of unknowns
    let delta: Vec<f64> = (0..p).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut sub = vec![0.0; p];
    let mut diag = vec![0.0; p];
    let mut sup = vec![0.0; p];
    let mut rhs = vec![0.0; p];
    for i in 0..p {
        let im = (i + p - 1) % p;
        sub[i] = h[im];
        diag[i] = 2.0 * (h[im] + h[i]);
        sup[i] = h[i];
        rhs[i] = 6.0 * (delta[i] - delta[im]);
    }
    let m = if p <= 2 {
        let mut a = nalgebra::DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            a[(i, i)] += diag[i];
            a[(i, (i + p - 1) % p)] += sub[i];
            a[(i, (i + 1) % p)] += sup[i];
        }
        let b = nalgebra::DVector::from_vec(rhs);
        match a.lu().solve(&b) {
            Some(x) => x.iter().copied().collect(),
            None => vec![0.0; p],
        }
    } else {
        solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)
    };
    let mut out = m;
    out.push(out[0]);
    out
}

/// Thomas algorithm. `sub[0]` and `sup[n-1]` are ignored.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let denom = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Cyclic tridiagonal solve via Sherman-Morrison; `sub[0]` couples to the
/// last unknown and `sup[n-1]` to the first.
fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut bb = diag.to_vec();
    bb[0] = diag[0] - gamma;
    bb[n - 1] = diag[n - 1] - alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &bb, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &bb, sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}
