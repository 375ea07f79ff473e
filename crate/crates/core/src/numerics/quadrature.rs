//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-15,
            max_intervals: 4000,
        }
    }
}

impl QuadratureOptions {
    pub fn tight() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-300,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
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

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrate `f` over the finite interval `[lo, hi]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, opts: QuadratureOptions) -> Result<f64> {
    integrate_with_breaks(f, lo, hi, &[], opts)
}

/// Integrate `f` over `[lo, hi]`, splitting first at the supplied interior
/// points (kinks, jumps or singularities of the integrand).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    opts: QuadratureOptions,
) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::QuadratureFailed { lo, hi, error: f64::INFINITY });
    }
    if lo == hi {
        return Ok(0.0);
    }
    if lo > hi {
        return integrate_with_breaks(f, hi, lo, breaks, opts).map(|v| -v);
    }
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&b| b > lo && b < hi).collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut edges = Vec::with_capacity(points.len() + 2);
    edges.push(lo);
    edges.extend(points);
    edges.push(hi);

    let mut heap: BinaryHeap<Segment> = edges
        .windows(2)
        .map(|w| gauss_kronrod(&f, w[0], w[1]))
        .collect();
    let mut intervals = heap.len();
    let mut total: f64 = heap.iter().map(|s| s.value).sum();
    let mut err: f64 = heap.iter().map(|s| s.error).sum();
    loop {
        if !total.is_finite() {
            return Err(Error::QuadratureFailed { lo, hi, error: f64::INFINITY });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            // the running totals drift; confirm against a fresh sum
            total = heap.iter().map(|s| s.value).sum();
            err = heap.iter().map(|s| s.error).sum();
            if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
                return Ok(total);
            }
        }
        if intervals >= opts.max_intervals {
            return Err(Error::QuadratureFailed { lo, hi, error: err });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval can no longer be bisected in floating point
            return Err(Error::QuadratureFailed { lo, hi, error: err });
        }
        let left = gauss_kronrod(&f, worst.lo, mid);
        let right = gauss_kronrod(&f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        err = (err + left.error + right.error - worst.error).max(0.0);
        heap.push(left);
        heap.push(right);
        intervals += 1;
    }
}

/// `E g(mean + sd·U)` for a standard normal `U`. `breaks` are given in the
/// original (x) coordinates.
pub fn normal_expectation<G: Fn(f64) -> f64>(
    g: G,
    mean: f64,
    sd: f64,
    breaks: &[f64],
    opts: QuadratureOptions,
) -> Result<f64> {
    if sd == 0.0 {
        return Ok(g(mean));
    }
    const SPAN: f64 = 40.0;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut zb: Vec<f64> = breaks.iter().map(|b| (b - mean) / sd).collect();
    // the bulk of the mass: keep the adaptive scheme from sampling only tails
    zb.extend([-8.0, -4.0, -1.0, 0.0, 1.0, 4.0, 8.0]);
    integrate_with_breaks(
        |z| {
            let w = norm * (-0.5 * z * z).exp();
            if w == 0.0 {
                0.0
            } else {
                g(mean + sd * z) * w
            }
        },
        -SPAN,
        SPAN,
        &zb,
        opts,
    )
}
