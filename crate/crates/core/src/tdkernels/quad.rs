//! Adaptive Gauss-Kronrod (7/15) quadrature.

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
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub(crate) struct Estimate {
    pub value: f64,
    pub error: f64,
    /// integral of |f|, used for an absolute floor on the tolerance
    pub magnitude: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut mag = fc.abs() * WGK[7];
    for j in 0..7 {
        let x = h * XGK[j];
        let (f1, f2) = (f(c - x), f(c + x));
        kron += WGK[j] * (f1 + f2);
        mag += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Estimate {
        value: kron * h,
        error: ((kron - gauss) * h).abs(),
        magnitude: mag * h.abs(),
    }
}

/// Adaptive bisection with a global error budget. Returns `None` when the
/// tolerance is not met within `max_intervals`.
pub(crate) fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Option<Estimate> {
    if a == b {
        return Some(Estimate { value: 0.0, error: 0.0, magnitude: 0.0 });
    }
    let first = gk15(&mut f, a, b);
    let mut pieces = vec![(a, b, first)];
    loop {
        let (value, error, magnitude) = pieces.iter().fold((0.0, 0.0, 0.0), |acc, p| {
            (acc.0 + p.2.value, acc.1 + p.2.error, acc.2 + p.2.magnitude)
        });
        if error <= rel_tol * value.abs().max(1e-4 * magnitude) || error <= 1e-15 * magnitude {
            return Some(Estimate { value, error, magnitude });
        }
        if pieces.len() >= max_intervals || !error.is_finite() {
            return None;
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2.error.total_cmp(&y.1 .2.error))
            .map(|(i, _)| i)?;
        let (lo, hi, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let left = gk15(&mut f, lo, mid);
        let right = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, left));
        pieces.push((mid, hi, right));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_integrates_smooth_functions() {
        let e = adaptive(|x: f64| x.cos(), 0.0, 2.0, 1e-12, 50).unwrap();
        assert!((e.value - 2f64.sin()).abs() < 1e-13);
        let e = adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10, 200).unwrap();
        let exact = 2.0 * (1.0 / 1e-2f64).atan() / 1e-2;
        assert!((e.value / exact - 1.0).abs() < 1e-10);
    }
}
