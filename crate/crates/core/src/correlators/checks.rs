//! Symmetry, causality, boundedness, singularity, contraction-limit,
//! `w`-collapse and gradient checks on the closed forms.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::family::{dual_scaling_function, CorrelatorFamily, CorrelatorParams, CorrelatorSpec, FieldPoint};
use super::ward::Grid;
use crate::error::{Error, Result};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const W_COLLAPSE_TOL: f64 = 1e-10;
pub const GRADIENT_TOL: f64 = 1e-6;
pub const SINGULARITY_THRESHOLD: f64 = 1e6;
pub const SINGULARITY_WINDOW: f64 = 1e-3;

/// `|a - reference| / |reference|`.
fn rel_to(a: Complex64, reference: Complex64) -> f64 {
    (a - reference).norm() / reference.norm()
}

fn rel_gap(a: Complex64, b: Complex64) -> f64 {
    let d = (a - b).norm();
    if d == 0.0 {
        0.0
    } else {
        d / a.norm().max(b.norm())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub family: CorrelatorFamily,
    pub points: usize,
    pub max_rel_gap: f64,
    pub worst_point: Option<FieldPoint>,
    pub pass: bool,
}

/// `C(t, r) = C(-t, -r)` on every grid point where both sides are defined.
pub fn check_symmetry(spec: &CorrelatorSpec, grid: &Grid) -> Result<SymmetryReport> {
    if !matches!(
        spec.family,
        CorrelatorFamily::Ortho | CorrelatorFamily::MetaFinal | CorrelatorFamily::Cga
    ) {
        return Err(Error::Unsupported(format!("no exchange symmetry claim for {}", spec.family)));
    }
    let mut points = 0;
    let mut max_rel_gap = 0.0;
    let mut worst_point = None;
    for p in &grid.points {
        let mirrored = FieldPoint::with_zeta(-p.t, -p.r, p.zeta1, p.zeta2);
        let (Ok(a), Ok(b)) = (spec.eval(p), spec.eval(&mirrored)) else {
            continue;
        };
        points += 1;
        let gap = rel_gap(a, b);
        if gap > max_rel_gap || worst_point.is_none() {
            max_rel_gap = f64::max(max_rel_gap, gap);
            worst_point = Some(*p);
        }
    }
    if points == 0 {
        return Err(Error::EmptyGrid);
    }
    Ok(SymmetryReport {
        family: spec.family,
        points,
        max_rel_gap,
        worst_point,
        pass: max_rel_gap <= SYMMETRY_TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CausalityReport {
    pub points: usize,
    /// Points with `M1 t < 0` where the causal form is not exactly zero.
    pub acausal_nonzero: usize,
    /// Largest relative gap between the causal and plain forms on `M1 t > 0`.
    pub max_rel_gap_causal_side: f64,
    pub pass: bool,
}

/// The causal Schrödinger form vanishes exactly for `M1 t < 0` and agrees
/// with the plain form for `M1 t > 0`.
pub fn check_causality(params: &CorrelatorParams, grid: &Grid) -> Result<CausalityReport> {
    let ext = CorrelatorSpec::new(CorrelatorFamily::SchrExt, *params);
    let plain = CorrelatorSpec::new(CorrelatorFamily::Schr, *params);
    let mut points = 0;
    let mut acausal_nonzero = 0;
    let mut max_gap = 0.0f64;
    for p in &grid.points {
        let Ok(v) = ext.eval(p) else { continue };
        points += 1;
        if params.m1 * p.t < 0.0 {
            if v != Complex64::new(0.0, 0.0) {
                acausal_nonzero += 1;
            }
        } else {
            max_gap = max_gap.max(rel_gap(v, plain.eval(p)?));
        }
    }
    if points == 0 {
        return Err(Error::EmptyGrid);
    }
    Ok(CausalityReport {
        points,
        acausal_nonzero,
        max_rel_gap_causal_side: max_gap,
        pass: acausal_nonzero == 0 && max_gap == 0.0,
    })
}

/// One ray: a coordinate running over `±2^k` with the other held fixed.
#[derive(Clone, Debug, Serialize)]
pub struct RayReport {
    pub along: String,
    pub fixed: f64,
    pub sign: f64,
    pub values: Vec<f64>,
    /// Index from which the sampled values never increase.
    pub monotone_from: usize,
    pub decays: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundednessReport {
    pub family: CorrelatorFamily,
    pub rays: Vec<RayReport>,
    /// Points violating `C(t, r) <= |t|^-2x`.
    pub bound_violations: usize,
    pub pass: bool,
}

pub const RAY_EXPONENTS: std::ops::RangeInclusive<i32> = 0..=60;

fn ray(spec: &CorrelatorSpec, along_r: bool, fixed: f64, sign: f64, violations: &mut usize) -> Result<RayReport> {
    let x = spec.params.x1;
    let mut values = Vec::new();
    for k in RAY_EXPONENTS {
        let s = sign * 2f64.powi(k);
        let p = if along_r { FieldPoint::new(fixed, s) } else { FieldPoint::new(s, fixed) };
        let v = spec.eval(&p)?.re;
        if v > p.t.abs().powf(-2.0 * x) * (1.0 + 4.0 * f64::EPSILON) {
            *violations += 1;
        }
        values.push(v);
    }
    let monotone_from = (0..values.len())
        .rev()
        .take_while(|&i| i == 0 || values[i] <= values[i - 1])
        .last()
        .unwrap_or(values.len() - 1);
    let max = values.iter().copied().fold(0.0, f64::max);
    let decays = *values.last().expect("non-empty ray") <= 1e-3 * max && monotone_from < values.len() / 2;
    Ok(RayReport {
        along: if along_r { "r".into() } else { "t".into() },
        fixed,
        sign,
        values,
        monotone_from,
        decays,
    })
}

/// Rays `|r| -> inf` at fixed `t` and `|t| -> inf` at fixed `r`, both signs,
/// plus the bound `C <= |t|^-2x` at every sample.
pub fn check_boundedness(spec: &CorrelatorSpec, fixed_t: f64, fixed_r: f64) -> Result<BoundednessReport> {
    let p = &spec.params;
    if !matches!(
        spec.family,
        CorrelatorFamily::Ortho | CorrelatorFamily::MetaFinal | CorrelatorFamily::Cga
    ) {
        return Err(Error::Unsupported(format!("no boundedness claim for {}", spec.family)));
    }
    if !(p.x1 > 0.0 && p.gamma1 > 0.0 && p.mu > 0.0) {
        return Err(Error::Domain("boundedness needs x1 > 0, gamma1 > 0, mu > 0".into()));
    }
    let mut violations = 0;
    let mut rays = Vec::new();
    for sign in [1.0, -1.0] {
        rays.push(ray(spec, true, fixed_t, sign, &mut violations)?);
        rays.push(ray(spec, false, fixed_r, sign, &mut violations)?);
    }
    let pass = violations == 0 && rays.iter().all(|r| r.decays);
    Ok(BoundednessReport {
        family: spec.family,
        rays,
        bound_violations: violations,
        pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityRow {
    /// Distance `r/t - (-1/mu)`.
    pub eps: f64,
    pub r_over_t: f64,
    pub value: Option<f64>,
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularityReport {
    pub mu: f64,
    pub gamma: f64,
    pub x: f64,
    pub t: f64,
    pub rows: Vec<SingularityRow>,
    pub divergence_flagged: bool,
}

pub const SINGULARITY_DISTANCES: [f64; 9] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];

/// The naive meta-conformal form approached along `r/t -> -1/mu` from the
/// allowed side, ending with the locus itself (a domain error).
pub fn singularity_demo(mu: f64, gamma: f64, x: f64, t: f64) -> Result<SingularityReport> {
    let spec = CorrelatorSpec::new(
        CorrelatorFamily::MetaNaive,
        CorrelatorParams::default().with_x(x).with_gamma(gamma).with_mu(mu),
    );
    let mut rows = Vec::new();
    let mut flagged = false;
    for eps in SINGULARITY_DISTANCES.into_iter().chain([0.0]) {
        let u = -1.0 / mu + eps;
        let (value, status) = match spec.eval(&FieldPoint::new(t, u * t)) {
            Ok(v) => {
                let divergent = v.re > SINGULARITY_THRESHOLD && eps <= SINGULARITY_WINDOW;
                flagged |= divergent;
                (Some(v.re), if divergent { "divergent" } else { "finite" }.to_string())
            }
            Err(e @ Error::Domain(_)) => (None, e.to_string()),
            Err(e) => return Err(e),
        };
        rows.push(SingularityRow { eps, r_over_t: u, value, status });
    }
    Ok(SingularityReport {
        mu,
        gamma,
        x,
        t,
        rows,
        divergence_flagged: flagged,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionStep {
    pub mu: f64,
    pub max_rel_gap: f64,
    /// Gap at the previous (ten times larger) `mu` divided by this one.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub gamma: f64,
    pub x: f64,
    pub points: usize,
    pub max_abs_ratio: f64,
    pub steps: Vec<ContractionStep>,
    pub monotone: bool,
    pub ratios_linear: bool,
    pub final_gap_ok: bool,
    pub pass: bool,
}

pub const CONTRACTION_MUS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
pub const CONTRACTION_MAX_RATIO: f64 = 2.0;
pub const CONTRACTION_FINAL_TOL: f64 = 1e-3;
pub const CONTRACTION_RATIO_BAND: (f64, f64) = (9.0, 11.0);

/// Relative gap between the final meta-conformal form at decreasing `mu` and
/// the conformal Galilean form. Grid points with `r = 0` or
/// `|r/t| > CONTRACTION_MAX_RATIO` are dropped: the gap grows like
/// `gamma mu (r/t)^2`, so the linear regime needs `mu (r/t)^2` small.
pub fn contraction_limit_check(gamma: f64, x: f64, mus: &[f64], grid: &Grid) -> Result<ContractionReport> {
    if gamma <= 0.0 {
        return Err(Error::Domain("contraction check needs gamma1 > 0".into()));
    }
    let points: Vec<FieldPoint> = grid
        .points
        .iter()
        .copied()
        .filter(|p| p.t != 0.0 && p.r != 0.0 && p.ratio().abs() <= CONTRACTION_MAX_RATIO)
        .collect();
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let cga = CorrelatorSpec::new(CorrelatorFamily::Cga, CorrelatorParams::default().with_x(x).with_gamma(gamma));
    let mut steps: Vec<ContractionStep> = Vec::new();
    for &mu in mus {
        let meta = CorrelatorSpec::new(
            CorrelatorFamily::MetaFinal,
            CorrelatorParams::default().with_x(x).with_gamma(gamma).with_mu(mu),
        );
        let gaps: Vec<f64> = points
            .par_iter()
            .map(|p| Ok(rel_to(meta.eval(p)?, cga.eval(p)?)))
            .collect::<Result<_>>()?;
        let max_rel_gap = gaps.into_iter().fold(0.0, f64::max);
        let ratio = steps.last().map(|prev| prev.max_rel_gap / max_rel_gap);
        steps.push(ContractionStep { mu, max_rel_gap, ratio });
    }
    let monotone = steps.windows(2).all(|w| w[1].max_rel_gap < w[0].max_rel_gap);
    let (lo, hi) = CONTRACTION_RATIO_BAND;
    let ratios_linear = steps
        .windows(2)
        .all(|w| (w[0].mu / w[1].mu - 10.0).abs() > 1e-9 || w[1].ratio.is_some_and(|q| (lo..=hi).contains(&q)));
    let final_gap_ok = steps.last().is_some_and(|s| s.max_rel_gap <= CONTRACTION_FINAL_TOL);
    Ok(ContractionReport {
        gamma,
        x,
        points: points.len(),
        max_abs_ratio: CONTRACTION_MAX_RATIO,
        monotone,
        ratios_linear,
        final_gap_ok,
        pass: monotone && ratios_linear && final_gap_ok,
        steps,
    })
}

/// `w = u - ln(1 + mu u)/mu + i v`.
pub fn w_variable(u: f64, v: f64, mu: f64) -> Complex64 {
    Complex64::new(u - (mu * u).ln_1p() / mu, v)
}

/// `g(u, v) = (-i)^nu f(u, zeta_+ = v - i u)`, normalized so that it equals
/// `w^-nu` on the upper half plane.
pub fn g_hat(u: f64, v: f64, mu: f64, nu: f64) -> Result<Complex64> {
    let f = dual_scaling_function(Complex64::new(v, -u), u, mu, nu)?;
    Ok(Complex64::new(0.0, -1.0).powf(nu) * f)
}

/// The other `u'` with `u' - ln(1 + mu u')/mu = u - ln(1 + mu u)/mu`.
pub fn partner_u(u: f64, mu: f64) -> Result<f64> {
    if u == 0.0 {
        return Err(Error::Domain("u = 0 has no partner".into()));
    }
    let h = |s: f64| s - (mu * s).ln_1p() / mu;
    let target = h(u);
    let (mut lo, mut hi) = if u > 0.0 {
        (-1.0 / mu * (1.0 - f64::EPSILON), 0.0)
    } else {
        let mut hi = 1.0 / mu;
        while h(hi) < target {
            hi *= 2.0;
        }
        (0.0, hi)
    };
    // h is decreasing on the negative side and increasing on the positive.
    let decreasing = u > 0.0;
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let above = h(mid) > target;
        if above == decreasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Clone, Debug, Serialize)]
pub struct WSample {
    pub u: f64,
    pub v: f64,
    pub w: Complex64,
    pub g: Complex64,
    pub curve_gap: f64,
    pub partner_u: Option<f64>,
    pub partner_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WCollapseReport {
    pub nu_sum: f64,
    pub mu: f64,
    pub samples: Vec<WSample>,
    pub max_curve_gap: f64,
    pub max_partner_gap: f64,
    pub pass: bool,
}

/// The dual scaling function depends on `(u, v)` only through `w`, and
/// equals `w^-nu` there.
pub fn w_collapse_check(nu_sum: f64, mu: f64, samples: &[(f64, f64)]) -> Result<WCollapseReport> {
    if mu <= 0.0 {
        return Err(Error::Domain("mu must be positive".into()));
    }
    let mut out = Vec::new();
    for &(u, v) in samples {
        if 1.0 + mu * u <= 0.0 || v <= 0.0 {
            return Err(Error::Domain(format!("sample ({u}, {v}) needs 1 + mu*u > 0 and v > 0")));
        }
        let w = w_variable(u, v, mu);
        let g = g_hat(u, v, mu, nu_sum)?;
        let curve_gap = rel_gap(g, w.powf(-nu_sum));
        let (partner_u, partner_gap) = if u != 0.0 {
            let up = partner_u(u, mu)?;
            (Some(up), Some(rel_gap(g, g_hat(up, v, mu, nu_sum)?)))
        } else {
            (None, None)
        };
        out.push(WSample { u, v, w, g, curve_gap, partner_u, partner_gap });
    }
    let max_curve_gap = out.iter().map(|s| s.curve_gap).fold(0.0, f64::max);
    let max_partner_gap = out.iter().filter_map(|s| s.partner_gap).fold(0.0, f64::max);
    Ok(WCollapseReport {
        nu_sum,
        mu,
        pass: max_curve_gap <= W_COLLAPSE_TOL && max_partner_gap <= W_COLLAPSE_TOL,
        samples: out,
        max_curve_gap,
        max_partner_gap,
    })
}

/// Default `(u, v)` samples for the collapse check.
pub fn default_w_samples(mu: f64) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 1.0)];
    for &u in &[-0.5 / mu, -0.25 / mu, 0.3, 1.0, 2.5] {
        for &v in &[0.5, 1.0, 3.0] {
            out.push((u, v));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GradientReport {
    pub family: CorrelatorFamily,
    pub points: usize,
    pub max_rel_error: f64,
    pub worst_point: Option<FieldPoint>,
    pub pass: bool,
}

fn central(h: f64, shift: impl Fn(f64) -> (CorrelatorSpec, FieldPoint)) -> Result<Complex64> {
    let (sp, pp) = shift(h);
    let (sm, pm) = shift(-h);
    Ok((sp.eval(&pp)? - sm.eval(&pm)?) / (2.0 * h))
}

/// Analytic partials against central differences with step
/// `1e-6 * max(1, |coordinate|)`. Errors are measured relative to
/// `max(|analytic partial|, |value|)`.
pub fn gradient_check(spec: &CorrelatorSpec, points: &[FieldPoint]) -> Result<GradientReport> {
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let errors: Vec<f64> = points
        .par_iter()
        .map(|p| {
            let jet = spec.jet(p)?;
            let d = jet.partials;
            let step = |x: f64| 1e-6 * x.abs().max(1.0);
            let fd = [
                central(step(p.t), |h| (*spec, FieldPoint { t: p.t + h, ..*p }))?,
                central(step(p.r), |h| (*spec, FieldPoint { r: p.r + h, ..*p }))?,
                central(step(p.zeta1), |h| (*spec, FieldPoint { zeta1: p.zeta1 + h, ..*p }))?,
                central(step(p.zeta2), |h| (*spec, FieldPoint { zeta2: p.zeta2 + h, ..*p }))?,
                central(1e-6 * spec.params.mu.abs().max(1e-3), |h| {
                    let mut s = *spec;
                    s.params.mu += h;
                    (s, *p)
                })?,
            ];
            let an = [d.t, d.r, d.zeta1, d.zeta2, d.mu];
            Ok(an
                .iter()
                .zip(fd)
                .map(|(a, f)| (a - f).norm() / a.norm().max(jet.value.norm()).max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let (mut worst, mut max_rel_error) = (None, 0.0);
    for (p, e) in points.iter().zip(errors) {
        if e > max_rel_error || worst.is_none() {
            max_rel_error = f64::max(max_rel_error, e);
            worst = Some(*p);
        }
    }
    Ok(GradientReport {
        family: spec.family,
        points: points.len(),
        max_rel_error,
        worst_point: worst,
        pass: max_rel_error <= GRADIENT_TOL,
    })
}

/// `count` random interior points of the family domain: `|t| in [0.5, 4]`,
/// `|r| in [0.25, 3]`, `zeta in [-1, 2]`, kept at least `0.05` away from
/// boundaries so the finite-difference stencil stays inside.
pub fn random_interior_points(spec: &CorrelatorSpec, count: usize, seed: u64) -> Vec<FieldPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 1000 * count {
        attempts += 1;
        let sign = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let t = sign(&mut rng) * rng.gen_range(0.5..4.0);
        let r = sign(&mut rng) * rng.gen_range(0.25..3.0);
        let p = FieldPoint::with_zeta(t, r, rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..2.0));
        let cone = 1.0 + spec.params.mu * p.ratio();
        let needs_cone = matches!(spec.family, CorrelatorFamily::MetaNaive | CorrelatorFamily::Dual);
        if needs_cone && cone < 0.05 {
            continue;
        }
        if spec.jet(&p).is_ok() {
            out.push(p);
        }
    }
    out
}
