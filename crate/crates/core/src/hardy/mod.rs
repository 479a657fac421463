//! Hardy-class bound, spectral one-sidedness and the dualization round trip
//! of `f(zeta) = (zeta + i lambda)^-nu`.

mod gamma;
pub mod quadrature;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

pub use gamma::gamma_fn;
pub use quadrature::{integrate, integrate_unchecked, QuadratureResult};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HardyParams {
    /// `nu1 + nu2`.
    pub nu_sum: f64,
    /// `ln(1 + mu r/t)/mu`.
    pub lambda: f64,
    /// Offset of the horizontal line from the real axis, on the side of the
    /// half plane the function is holomorphic in.
    pub v: f64,
}

impl HardyParams {
    pub fn new(nu_sum: f64, lambda: f64, v: f64) -> Self {
        Self { nu_sum, lambda, v }
    }

    fn distance(&self) -> Result<f64> {
        if !(self.nu_sum > 0.5) {
            return Err(Error::Divergent(format!(
                "the square integral diverges for nu_sum = {} <= 1/2",
                self.nu_sum
            )));
        }
        if self.lambda == 0.0 {
            return Err(Error::Domain("lambda = 0 is in neither Hardy class".into()));
        }
        if self.v * self.lambda < 0.0 {
            return Err(Error::Domain(format!(
                "v = {} must lie on the side of lambda = {}",
                self.v, self.lambda
            )));
        }
        Ok((self.v + self.lambda).abs())
    }
}

/// `(z + i lambda)^-nu` on the principal branch.
pub fn f_lambda(z: Complex64, lambda: f64, nu: f64) -> Complex64 {
    (z + Complex64::new(0.0, lambda)).powf(-nu)
}

/// `int du |f(u + i v)|^2 = sqrt(pi) Gamma(nu - 1/2)/Gamma(nu) |v + lambda|^(1 - 2 nu)`.
pub fn m2_closed(p: &HardyParams) -> Result<f64> {
    let a = p.distance()?;
    Ok(PI.sqrt() * gamma_fn(p.nu_sum - 0.5)? / gamma_fn(p.nu_sum)? * a.powf(1.0 - 2.0 * p.nu_sum))
}

/// The same integral by adaptive quadrature after `u = |v + lambda| tan(theta)`.
pub fn m2_numeric(p: &HardyParams, target_tol: f64) -> Result<QuadratureResult> {
    let a = p.distance()?;
    let b = p.v + p.lambda;
    let nu = p.nu_sum;
    let integrand = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let u = a * s / c;
        let jacobian = a / (c * c);
        Complex64::new(Complex64::new(u, b).powf(-nu).norm_sqr() * jacobian, 0.0)
    };
    integrate(integrand, -0.5 * PI, 0.5 * PI, 0.0, target_tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct M2Report {
    pub params: HardyParams,
    pub value: f64,
    pub closed_form: f64,
    pub rel_gap: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

pub fn m2_report(p: &HardyParams, target_tol: f64) -> Result<M2Report> {
    let closed_form = m2_closed(p)?;
    let q = m2_numeric(p, target_tol)?;
    Ok(M2Report {
        params: *p,
        value: q.value.re,
        closed_form,
        rel_gap: (q.value.re - closed_form).abs() / closed_form,
        abs_error_estimate: q.abs_error_estimate,
        evaluations: q.evaluations,
    })
}

pub const M2_NU_BATTERY: [f64; 5] = [0.75, 1.0, 1.5, 2.0, 3.0];
pub const M2_LAMBDA_BATTERY: [f64; 3] = [0.5, 1.0, 2.0];
pub const M2_V_BATTERY: [f64; 2] = [0.0, 0.5];

/// Every combination of the standard parameter battery.
pub fn m2_battery(target_tol: f64) -> Result<Vec<M2Report>> {
    let mut params = Vec::new();
    for nu in M2_NU_BATTERY {
        for lambda in M2_LAMBDA_BATTERY {
            for v in M2_V_BATTERY {
                params.push(HardyParams::new(nu, lambda, v));
            }
        }
    }
    params.par_iter().map(|p| m2_report(p, target_tol)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

pub const ONE_SIDED_PASS: f64 = 1e-6;
pub const ONE_SIDED_INCONCLUSIVE: f64 = 1e-3;
/// Fraction of the window length covered by the cosine tapers.
pub const TUKEY_ALPHA: f64 = 0.1;

fn tukey(position: f64) -> f64 {
    let edge = 0.5 * TUKEY_ALPHA;
    let d = position.min(1.0 - position);
    if d >= edge {
        1.0
    } else {
        0.5 * (1.0 - (PI * d / edge).cos())
    }
}

/// Windowed samples of `f` at `zeta_j = -L/2 + j L/N` and their forward DFT.
fn windowed_spectrum(nu: f64, lambda: f64, n: usize, l: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let dx = l / n as f64;
    let samples: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let z = -0.5 * l + dx * j as f64;
            f_lambda(Complex64::new(z, 0.0), lambda, nu) * tukey(j as f64 / n as f64)
        })
        .collect();
    let mut spectrum = samples.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut spectrum);
    (samples, spectrum)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub nu_sum: f64,
    pub lambda: f64,
    pub n: usize,
    pub l: f64,
    pub window: String,
    /// Energy in bins `1..N/2` (frequencies `+gamma`).
    pub positive_fraction: f64,
    /// Energy in bins `N/2+1..N`.
    pub negative_fraction: f64,
    /// The fraction on the side the Hardy class forbids.
    pub forbidden_fraction: f64,
    /// `int |f|^2` beyond the untapered window, relative to the total.
    pub tail_fraction: f64,
    pub energy_discrete: f64,
    pub energy_exact: f64,
    pub energy_rel_gap: f64,
    pub verdict: Verdict,
}

/// Energy fractions of the windowed DFT of `f` at positive and negative
/// frequencies. The DC and Nyquist bins count towards neither side.
pub fn spectral_onesidedness(nu_sum: f64, lambda: f64, n: usize, l: f64) -> Result<SpectralReport> {
    if lambda == 0.0 {
        return Err(Error::Domain("lambda = 0 is in neither Hardy class".into()));
    }
    if nu_sum < 1.5 {
        return Err(Error::Domain(format!("nu_sum = {nu_sum} decays too slowly; need nu_sum >= 1.5")));
    }
    if n < 16 || !n.is_power_of_two() || !(l > 0.0) {
        return Err(Error::Domain("need N a power of two >= 16 and L > 0".into()));
    }
    let dx = l / n as f64;
    let (samples, spectrum) = windowed_spectrum(nu_sum, lambda, n, l);
    let energy = |range: std::ops::Range<usize>| -> f64 { spectrum[range].iter().map(|x| x.norm_sqr()).sum() };
    let positive = energy(1..n / 2);
    let negative = energy(n / 2 + 1..n);
    let both = positive + negative;
    let positive_fraction = positive / both;
    let negative_fraction = negative / both;
    let forbidden_fraction = if lambda > 0.0 { negative_fraction } else { positive_fraction };
    let energy_discrete = samples.iter().map(|x| x.norm_sqr()).sum::<f64>() * dx;
    let energy_exact = m2_closed(&HardyParams::new(nu_sum, lambda, 0.0))?;
    let a = lambda.abs();
    let cutoff = 0.5 * l * (1.0 - TUKEY_ALPHA);
    let tail = integrate(
        |theta: f64| {
            let (s, c) = theta.sin_cos();
            let u = a * s / c;
            Complex64::new(Complex64::new(u, lambda).powf(-nu_sum).norm_sqr() * a / (c * c), 0.0)
        },
        (cutoff / a).atan(),
        0.5 * PI,
        0.0,
        1e-8,
    )?;
    let verdict = if forbidden_fraction < ONE_SIDED_PASS {
        Verdict::Pass
    } else if forbidden_fraction <= ONE_SIDED_INCONCLUSIVE {
        Verdict::Inconclusive
    } else {
        Verdict::Fail
    };
    Ok(SpectralReport {
        nu_sum,
        lambda,
        n,
        l,
        window: format!("tukey({TUKEY_ALPHA})"),
        positive_fraction,
        negative_fraction,
        forbidden_fraction,
        tail_fraction: 2.0 * tail.value.re / energy_exact,
        energy_discrete,
        energy_exact,
        energy_rel_gap: (energy_discrete - energy_exact).abs() / energy_exact,
        verdict,
    })
}

/// `i^-nu gamma^(nu-1) e^(-lambda gamma) / Gamma(nu)` for `gamma > 0`: the
/// density with `f(zeta) = int_0^inf S(gamma) e^(i gamma zeta) d gamma`.
pub fn spectral_density(gamma: f64, nu: f64, lambda: f64) -> Result<Complex64> {
    if gamma <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let phase = Complex64::new(0.0, -0.5 * PI * nu).exp();
    Ok(phase * gamma.powf(nu - 1.0) * (-lambda * gamma).exp() / gamma_fn(nu)?)
}

/// `int_0^inf S(gamma) e^(i gamma zeta) d gamma` by quadrature.
pub fn reconstruct(zeta: f64, nu: f64, lambda: f64) -> Result<Complex64> {
    let g = gamma_fn(nu)?;
    let phase = Complex64::new(0.0, -0.5 * PI * nu).exp() / g;
    let upper = 60.0 / lambda;
    let integrand = |s: f64| {
        // gamma = s^2 removes the gamma^(nu-1) endpoint singularity for nu < 1.
        let gamma = s * s;
        Complex64::new(0.0, gamma * zeta).exp() * (2.0 * s * gamma.powf(nu - 1.0) * (-lambda * gamma).exp())
    };
    Ok(phase * integrate(integrand, 0.0, upper.sqrt(), 1e-14, 1e-12)?.value)
}

pub const ROUNDTRIP_SHAPE_TOL: f64 = 1e-4;
pub const ROUNDTRIP_RECONSTRUCTION_TOL: f64 = 1e-9;
pub const EXPONENT_BRIDGE_TOL: f64 = 1e-12;
pub const ROUNDTRIP_DEFAULT_N: usize = 1 << 18;
pub const ROUNDTRIP_DEFAULT_L: f64 = 2000.0;
/// The bulk of the support, in units of `1/lambda`.
pub const ROUNDTRIP_BULK: (f64, f64) = (0.25, 4.0);
pub const RECONSTRUCTION_ZETAS: [f64; 5] = [-3.0, -0.5, 0.0, 1.0, 4.0];

#[derive(Clone, Debug, Serialize)]
pub struct BridgeCheck {
    pub mu: f64,
    pub u: f64,
    pub gamma0: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundtripReport {
    pub nu_sum: f64,
    pub lambda: f64,
    pub n: usize,
    pub l: f64,
    pub window: String,
    pub normalization_gamma: f64,
    pub bulk: (f64, f64),
    pub bulk_bins: usize,
    pub max_shape_deviation: f64,
    pub worst_gamma: f64,
    /// Largest gap between `f` and the quadrature reconstruction from the
    /// exact density.
    pub reconstruction_gap: f64,
    pub bridge: Vec<BridgeCheck>,
    pub pass: bool,
}

pub const BRIDGE_CASES: [(f64, f64, f64); 5] = [
    (1.0, 1.0, 1.0),
    (0.5, 2.0, 0.75),
    (2.0, 0.1, 3.0),
    (0.01, 5.0, 1.0),
    (1.5, -0.4, 2.0),
];

/// `exp(-2 gamma0 lambda) = (1 + mu u)^(-2 gamma0/mu)` with
/// `lambda = ln(1 + mu u)/mu`.
pub fn exponent_bridge(mu: f64, u: f64, gamma0: f64) -> Result<BridgeCheck> {
    let b = 1.0 + mu * u;
    if !(mu > 0.0 && b > 0.0) {
        return Err(Error::Domain("need mu > 0 and 1 + mu*u > 0".into()));
    }
    let lambda = b.ln() / mu;
    let lhs = (-2.0 * gamma0 * lambda).exp();
    let rhs = b.powf(-2.0 * gamma0 / mu);
    Ok(BridgeCheck {
        mu,
        u,
        gamma0,
        lhs,
        rhs,
        rel_gap: (lhs - rhs).abs() / rhs,
    })
}

/// Recovers the spectral density of `f` from its windowed DFT and compares
/// its shape to the exact density on the bulk of the support.
pub fn dualization_roundtrip(nu_sum: f64, lambda: f64, n: usize, l: f64) -> Result<RoundtripReport> {
    if !(lambda > 0.0) {
        return Err(Error::Domain("the round trip needs lambda > 0".into()));
    }
    if !(nu_sum > 0.5) {
        return Err(Error::Divergent(format!("nu_sum = {nu_sum} <= 1/2")));
    }
    if n < 16 || !n.is_power_of_two() || !(l > 0.0) {
        return Err(Error::Domain("need N a power of two >= 16 and L > 0".into()));
    }
    let dx = l / n as f64;
    let (_, spectrum) = windowed_spectrum(nu_sum, lambda, n, l);
    let gamma_k = |k: usize| 2.0 * PI * k as f64 / l;
    let recovered = |k: usize| {
        let g = gamma_k(k);
        spectrum[k] * Complex64::new(0.0, 0.5 * g * l).exp() * (dx / (2.0 * PI))
    };
    let target = nu_sum.max(2.0) - 1.0;
    let k_ref = ((target / lambda) / gamma_k(1)).round().max(1.0) as usize;
    let scale = spectral_density(gamma_k(k_ref), nu_sum, lambda)? / recovered(k_ref);
    let (lo, hi) = (ROUNDTRIP_BULK.0 / lambda, ROUNDTRIP_BULK.1 / lambda);
    let mut max_dev = 0.0f64;
    let mut worst_gamma = gamma_k(k_ref);
    let mut bulk_bins = 0;
    for k in 1..n / 2 {
        let g = gamma_k(k);
        if g < lo || g > hi {
            continue;
        }
        bulk_bins += 1;
        let exact = spectral_density(g, nu_sum, lambda)?;
        let dev = (recovered(k) * scale - exact).norm() / exact.norm();
        if dev > max_dev {
            max_dev = dev;
            worst_gamma = g;
        }
    }
    if bulk_bins == 0 {
        return Err(Error::EmptyGrid);
    }
    let mut reconstruction_gap = 0.0f64;
    for z in RECONSTRUCTION_ZETAS {
        let direct = f_lambda(Complex64::new(z, 0.0), lambda, nu_sum);
        let rebuilt = reconstruct(z, nu_sum, lambda)?;
        reconstruction_gap = reconstruction_gap.max((rebuilt - direct).norm() / direct.norm());
    }
    let bridge = BRIDGE_CASES
        .iter()
        .map(|&(mu, u, g0)| exponent_bridge(mu, u, g0))
        .collect::<Result<Vec<_>>>()?;
    let pass = max_dev <= ROUNDTRIP_SHAPE_TOL
        && reconstruction_gap <= ROUNDTRIP_RECONSTRUCTION_TOL
        && bridge.iter().all(|b| b.rel_gap <= EXPONENT_BRIDGE_TOL);
    Ok(RoundtripReport {
        nu_sum,
        lambda,
        n,
        l,
        window: format!("tukey({TUKEY_ALPHA})"),
        normalization_gamma: gamma_k(k_ref),
        bulk: (lo, hi),
        bulk_bins,
        max_shape_deviation: max_dev,
        worst_gamma,
        reconstruction_gap,
        bridge,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert!((m2_closed(&HardyParams::new(1.0, 1.0, 0.0)).unwrap() - PI).abs() < 1e-13);
        assert!((m2_closed(&HardyParams::new(1.0, 2.0, 0.0)).unwrap() - PI / 2.0).abs() < 1e-13);
        assert!((m2_closed(&HardyParams::new(1.5, 1.0, 0.0)).unwrap() - 2.0).abs() < 1e-13);
        assert!(matches!(m2_closed(&HardyParams::new(0.4, 1.0, 0.0)), Err(Error::Divergent(_))));
        assert!(m2_closed(&HardyParams::new(1.0, -1.0, -0.5)).is_ok());
        assert!(m2_closed(&HardyParams::new(1.0, 1.0, -0.5)).is_err());
    }

    #[test]
    fn numeric_matches_closed_form() {
        let r = m2_report(&HardyParams::new(1.0, 1.0, 0.0), 1e-10).unwrap();
        assert!((r.value - PI).abs() < 1e-6);
        for r in m2_battery(1e-10).unwrap() {
            assert!(r.rel_gap <= 1e-6, "{r:?}");
        }
    }

    #[test]
    fn bound_decreases_away_from_the_axis() {
        let values: Vec<f64> = [0.0, 0.25, 0.5, 1.0, 2.0]
            .iter()
            .map(|&v| m2_numeric(&HardyParams::new(1.5, 1.0, v), 1e-10).unwrap().value.re)
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }

    #[test]
    fn spectrum_is_one_sided() {
        let up = spectral_onesidedness(2.0, 1.0, 1 << 16, 200.0).unwrap();
        assert_eq!(up.verdict, Verdict::Pass, "{up:?}");
        assert!(up.energy_rel_gap <= 1e-4, "{up:?}");
        let down = spectral_onesidedness(2.0, -1.0, 1 << 16, 200.0).unwrap();
        assert_eq!(down.verdict, Verdict::Pass);
        assert!((up.negative_fraction - down.positive_fraction).abs() <= 1e-8);
        assert!(spectral_onesidedness(2.0, 0.0, 1 << 16, 200.0).is_err());
        let coarse = spectral_onesidedness(1.5, 1.0, 1 << 16, 200.0).unwrap();
        assert_eq!(coarse.verdict, Verdict::Inconclusive, "{coarse:?}");
    }

    #[test]
    fn density_transform_pair() {
        for (nu, lambda) in [(2.0, 1.0), (0.75, 0.5), (3.0, 2.0)] {
            for z in RECONSTRUCTION_ZETAS {
                let direct = f_lambda(Complex64::new(z, 0.0), lambda, nu);
                let rebuilt = reconstruct(z, nu, lambda).unwrap();
                assert!((rebuilt - direct).norm() <= 1e-9 * direct.norm(), "{nu} {lambda} {z}");
            }
        }
    }

    #[test]
    fn roundtrip() {
        let r = dualization_roundtrip(2.0, 1.0, ROUNDTRIP_DEFAULT_N, ROUNDTRIP_DEFAULT_L).unwrap();
        assert!(r.pass, "{r:?}");
        let b = exponent_bridge(1.0, 1.0, 1.0).unwrap();
        assert!((b.lhs - 0.25).abs() < 1e-15);
    }

    #[test]
    fn large_lambda_concentrates_near_zero() {
        let mass_below_one = |lambda: f64| {
            let total = integrate(|g| spectral_density(g, 2.0, lambda).unwrap(), 0.0, 80.0 / lambda, 0.0, 1e-12)
                .unwrap()
                .value
                .norm();
            let low = integrate(|g| spectral_density(g, 2.0, lambda).unwrap(), 0.0, 1.0, 0.0, 1e-12).unwrap().value.norm();
            low / total
        };
        assert!(mass_below_one(0.5) < mass_below_one(2.0));
        assert!(mass_below_one(2.0) < mass_below_one(8.0));
    }
}
