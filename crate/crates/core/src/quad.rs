//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature on finite intervals.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate satisfies `err <= max(abs_tol, rel_tol * |I|)`. Integrands may be
//! fallible; the first error aborts the integration.

use crate::error::Error;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_417_795_025,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_642,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lower: f64,
    upper: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F, E>(f: &mut F, lower: f64, upper: f64) -> Result<Segment, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let center = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let fc = f(center)?;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = half * XGK[i];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Ok(Segment {
        lower,
        upper,
        value,
        error: if error.is_nan() { f64::INFINITY } else { error },
    })
}

/// Integrates a fallible integrand over `[lower, upper]`.
pub fn integrate<F, E>(mut f: F, lower: f64, upper: f64, opts: &QuadOptions) -> Result<QuadResult, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<Error>,
{
    if lower == upper {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            intervals: 0,
        });
    }
    if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
        return Err(Error::Domain {
            op: "integrate",
            detail: format!("need finite lower < upper, got [{lower}, {upper}]"),
        }
        .into());
    }

    let first = kronrod21(&mut f, lower, upper)?;
    let mut evaluations = 21;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    // segments too narrow to split; their value is kept and their error accepted
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut value = first.value;
    let mut open_error = first.error;

    loop {
        if !value.is_finite() {
            return Err(Error::Quadrature {
                lower,
                upper,
                error: open_error + frozen_error,
                intervals: heap.len(),
            }
            .into());
        }
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if open_error + frozen_error <= target || (open_error <= target && frozen_error > 0.0) {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature {
                lower,
                upper,
                error: open_error + frozen_error,
                intervals: heap.len(),
            }
            .into());
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lower + worst.upper);
        if !(mid > worst.lower && mid < worst.upper)
            || (worst.upper - worst.lower) < 1e3 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
        {
            frozen_value += worst.value;
            frozen_error += worst.error;
            open_error -= worst.error;
            continue;
        }
        let left = kronrod21(&mut f, worst.lower, mid)?;
        let right = kronrod21(&mut f, mid, worst.upper)?;
        evaluations += 42;
        value += left.value + right.value - worst.value;
        open_error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // resum now and then so cancellation in the running totals cannot drift
        if heap.len() % 64 == 0 {
            value = heap.iter().map(|s| s.value).sum::<f64>() + frozen_value;
            open_error = heap.iter().map(|s| s.error).sum::<f64>();
        }
    }

    Ok(QuadResult {
        value: heap.iter().map(|s| s.value).sum::<f64>() + frozen_value,
        abs_error: heap.iter().map(|s| s.error).sum::<f64>() + frozen_error,
        evaluations,
        intervals: heap.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[derive(Debug)]
    struct E;
    impl From<Error> for E {
        fn from(_: Error) -> Self {
            E
        }
    }

    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> QuadResult {
        integrate::<_, E>(|x| Ok::<_, E>(f(x)), a, b, &QuadOptions::default()).unwrap()
    }

    #[test]
    fn polynomials_are_exact() {
        let r = quad(|x| 3.0 * x * x - 2.0 * x + 1.0, -1.0, 2.0);
        assert_abs_diff_eq!(r.value, 9.0 - 3.0 + 3.0, epsilon = 1e-13);
        assert_eq!(r.evaluations, 21);
    }

    #[test]
    fn smooth_and_peaked() {
        let r = quad(|x| x.exp(), 0.0, 1.0);
        assert_abs_diff_eq!(r.value, std::f64::consts::E - 1.0, epsilon = 1e-13);
        let r = quad(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0);
        assert_abs_diff_eq!(r.value, 2.0 * (1.0f64 / 1e-2).atan() / 1e-2, epsilon = 1e-6);
        let r = quad(|x| x.sqrt(), 0.0, 1.0);
        assert_abs_diff_eq!(r.value, 2.0 / 3.0, epsilon = 1e-9);
    }

    #[test]
    fn log_endpoint_singularity() {
        let r = quad(|x| -x.ln(), 0.0, 1.0);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn errors_propagate() {
        let r = integrate::<_, Error>(
            |x| {
                if x > 0.5 {
                    Err(Error::Degenerate("boom".into()))
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            &QuadOptions::default(),
        );
        assert!(matches!(r, Err(Error::Degenerate(_))));
        let r = integrate::<_, Error>(Ok, 1.0, 0.0, &QuadOptions::default());
        assert!(matches!(r, Err(Error::Domain { .. })));
    }

    #[test]
    fn subdivision_limit_reports_failure() {
        let opts = QuadOptions {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_intervals: 4,
        };
        let r = integrate::<_, Error>(|x: f64| Ok((50.0 * x).sin().abs()), 0.0, 10.0, &opts);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
