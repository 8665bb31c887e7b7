//! Normal CDF, adaptive quadrature and the modified Bessel function of the
//! second kind.

use statrs::function::erf::erfc;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// 15-point Kronrod estimate and its difference to the embedded 7-point Gauss rule.
fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod integration over a finite interval.
/// Bisects the segment with the largest error estimate until the summed
/// error falls below `rel_tol * |result|`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    const MAX_SEGMENTS: usize = 4096;
    let (v, e) = gauss_kronrod(&f, a, b);
    let mut segments = vec![(a, b, v, e)];
    loop {
        let total: f64 = segments.iter().map(|s| s.2).sum();
        let err: f64 = segments.iter().map(|s| s.3).sum();
        if err <= rel_tol * total.abs() || err < f64::MIN_POSITIVE || segments.len() >= MAX_SEGMENTS {
            return total;
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = segments.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gauss_kronrod(&f, lo, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, hi);
        segments.push((lo, mid, v1, e1));
        segments.push((mid, hi, v2, e2));
    }
}

fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p() - std::f64::consts::LN_2
}

/// `ln K_v(z)` for `z > 0`, from `K_v(z) = 1/2 ∫_0^∞ y^{v-1} exp(-z(y + 1/y)/2) dy`
/// after the substitution `y = e^t`, which gives `∫_0^∞ cosh(vt) exp(-z cosh t) dt`.
/// The integrand is rescaled by its peak so large orders and arguments do
/// not overflow.
pub fn ln_bessel_k(v: f64, z: f64) -> f64 {
    assert!(z > 0.0, "Bessel K needs a positive argument");
    let v = v.abs();
    let g = |t: f64| ln_cosh(v * t) - z * t.cosh();

    // g is unimodal on [0, inf): locate the peak by golden-section search
    let mut hi = 1.0_f64;
    while g(2.0 * hi) > g(hi) {
        hi *= 2.0;
    }
    let hi = 2.0 * hi;
    let (mut a, mut b) = (0.0_f64, hi);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if g(c) >= g(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let t_peak = 0.5 * (a + b);
    let g_peak = g(t_peak).max(g(0.0));

    let mut upper = t_peak.max(1.0);
    while g(upper) - g_peak > -60.0 {
        upper *= 1.5;
    }
    let mut pieces = vec![0.0];
    if t_peak > 0.0 && t_peak < upper {
        pieces.push(t_peak);
    }
    pieces.push(upper);
    let integral: f64 = pieces
        .windows(2)
        .map(|w| integrate(|t| (g(t) - g_peak).exp(), w[0], w[1], 1e-10))
        .sum();
    g_peak + integral.ln()
}
