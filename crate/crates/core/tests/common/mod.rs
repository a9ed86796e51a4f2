#![allow(dead_code)]

use bs_ssd::app::RunManifest;
use bs_ssd::config::{parse_config, RunConfig};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (v, err) = gk15(f, a, b);
    if err <= tol || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod on a finite interval.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adapt(&f, a, b, tol, 40)
}

/// Integral over `(0, inf)` via `x = t / (1 - t)`.
pub fn integrate_positive(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let g = |t: f64| {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let x = t / (1.0 - t);
        let v = f(x) / ((1.0 - t) * (1.0 - t));
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    adapt(&g, 0.0, 1.0, tol, 40)
}

/// Cumulative trapezoid of `f` on a uniform grid; returns (xs, normalized cdf).
pub fn tabulated_cdf(f: impl Fn(f64) -> f64, lo: f64, hi: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (hi - lo) / m as f64;
    let xs: Vec<f64> = (0..=m).map(|i| lo + h * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut cdf = vec![0.0; m + 1];
    for i in 1..=m {
        cdf[i] = cdf[i - 1] + 0.5 * h * (ys[i] + ys[i - 1]);
    }
    let total = cdf[m];
    cdf.iter_mut().for_each(|v| *v /= total);
    (xs, cdf)
}

pub fn tabulated_quantile(xs: &[f64], cdf: &[f64], p: f64) -> f64 {
    let i = cdf.partition_point(|&v| v < p).clamp(1, xs.len() - 1);
    let (c0, c1) = (cdf[i - 1], cdf[i]);
    let t = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.0 };
    xs[i - 1] + t * (xs[i] - xs[i - 1])
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// One-sample KS statistic against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

pub fn config(text: &str) -> RunConfig {
    parse_config(text).expect("valid test config")
}

pub fn run_in_pool(cfg: &RunConfig, threads: usize) -> RunManifest {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(|| bs_ssd::run(cfg).expect("run succeeds"))
}

/// Posterior kernel of beta written directly from the likelihood product,
/// scaled so its log is 0 at `beta_ref`.
pub fn beta_posterior_density(
    xs: &[f64],
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
) -> impl Fn(f64) -> f64 + '_ {
    let n = xs.len() as f64;
    let log_kernel = move |beta: f64| {
        let mut lp = -(a1 + 1.0) * beta.ln() - b1 / beta;
        let mut s = 0.0;
        for &x in xs {
            let r = beta / x;
            lp += (r.sqrt() + r * r.sqrt()).ln() - beta.ln();
            s += x / beta + beta / x - 2.0;
        }
        lp - ((n + 1.0) / 2.0 + a2) * (0.5 * s + b2).ln()
    };
    let reference = {
        let mut best = f64::NEG_INFINITY;
        let mut b = 0.01;
        while b < 200.0 {
            best = best.max(log_kernel(b));
            b *= 1.01;
        }
        best
    };
    move |beta: f64| {
        if beta <= 0.0 {
            0.0
        } else {
            (log_kernel(beta) - reference).exp()
        }
    }
}

/// Smallest average loss over a brute-force search of decisions. Candidates
/// are the draws themselves, midpoints between them and a fine grid.
pub fn grid_search_min(draws: &[f64], spec: &bs_ssd::LossSpec) -> f64 {
    use bs_ssd::loss::loss_value;
    use bs_ssd::Decision;
    let lo = draws.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = draws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1.0);
    let mut cands: Vec<f64> = (0..=400)
        .map(|i| lo - span + 3.0 * span * i as f64 / 400.0)
        .collect();
    cands.extend_from_slice(draws);
    for a in draws {
        for b in draws {
            cands.push(0.5 * (a + b));
        }
    }
    let avg = |d: &Decision| {
        draws
            .iter()
            .map(|&t| loss_value(t, d, spec).unwrap_or(f64::INFINITY))
            .sum::<f64>()
            / draws.len() as f64
    };
    let mut best = f64::INFINITY;
    if spec.is_interval() {
        for (i, &a) in cands.iter().enumerate() {
            for &b in &cands[i..] {
                if b > a {
                    best = best.min(avg(&Decision::Interval { lower: a, upper: b }));
                }
            }
        }
        if let bs_ssd::LossSpec::IntervalCentered { .. } = spec {
            // Width is continuous; refine half-widths around every center.
            for &m in &cands {
                for k in 1..=400 {
                    let tau = span * k as f64 / 200.0;
                    best = best.min(avg(&Decision::Interval { lower: m - tau, upper: m + tau }));
                }
            }
        }
    } else {
        for &d in &cands {
            best = best.min(avg(&Decision::Point(d)));
        }
    }
    best
}
