//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

use num_complex::Complex64;
use serde::Serialize;

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

pub const MAX_INTERVALS: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    splittable: bool,
}

fn kronrod(f: &impl Fn(f64) -> Complex64, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let pair = f(centre - half * x) + f(centre + half * x);
        k += pair * w;
        if j % 2 == 1 {
            g += pair * WG[j / 2];
        }
    }
    Panel {
        a,
        b,
        value: k * half,
        error: ((k - g) * half).norm(),
        splittable: a < centre && centre < b,
    }
}

/// Bisects the panel with the largest error estimate (lowest index on ties)
/// until the summed estimate drops below `max(abs_tol, rel_tol |value|)`.
pub fn integrate_unchecked(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> QuadratureResult {
    let mut panels = vec![kronrod(&f, a, b)];
    let mut evaluations = 15;
    loop {
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = abs_tol.max(rel_tol * value.norm());
        let converged = error.is_finite() && value.norm().is_finite() && error <= target;
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| p.splittable)
            .fold(None, |best: Option<(usize, f64)>, (i, p)| match best {
                Some((_, e)) if e >= p.error => best,
                _ => Some((i, p.error)),
            });
        if converged || panels.len() >= MAX_INTERVALS || worst.is_none() {
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let value = panels.iter().map(|p| p.value).sum();
            return QuadratureResult {
                value,
                abs_error_estimate: error,
                evaluations,
                converged,
            };
        }
        let (worst, _) = worst.expect("checked above");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(kronrod(&f, p.a, mid));
        panels.push(kronrod(&f, mid, p.b));
        evaluations += 30;
    }
}

/// As [`integrate_unchecked`], failing with the running estimate when the
/// tolerance is not reached.
pub fn integrate(
    f: impl Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    let r = integrate_unchecked(f, a, b, abs_tol, rel_tol);
    if r.converged {
        Ok(r)
    } else {
        Err(Error::NonConvergence { estimate: r.value.re })
    }
}
