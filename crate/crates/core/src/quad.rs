//! Numerical integration used by the noise model and the broadband-efficiency overlap.

use crate::error::{QfcError, Result};

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss weights.
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

const MAX_SUBINTERVALS: usize = 10_000;

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        // odd Kronrod indices coincide with the Gauss nodes
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive Gauss-Kronrod quadrature on `[a, b]`.
///
/// Subintervals are bisected, largest error estimate first, until the summed
/// error estimate drops below `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(QfcError::invalid("integration bounds must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let (v, e) = kronrod15(&f, lo, hi);
    let mut intervals = vec![(lo, hi, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= abs_tol {
            return Ok(sign * total);
        }
        if intervals.len() >= MAX_SUBINTERVALS {
            return Err(QfcError::NumericFailure {
                message: format!("quadrature error estimate {err:e} above tolerance {abs_tol:e}"),
                iterations: intervals.len(),
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (l, r, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (l + r);
        let (v1, e1) = kronrod15(&f, l, mid);
        let (v2, e2) = kronrod15(&f, mid, r);
        intervals.push((l, mid, v1, e1));
        intervals.push((mid, r, v2, e2));
    }
}

/// Trapezoidal rule over paired samples. `x` must be sorted.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// `n` evenly spaced points from `start` to `stop`, both inclusive.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n).map(|i| start + step * i as f64).collect()
        }
    }
}
