//! Closed-form two-point functions and their analytic first partials.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelatorFamily {
    /// `(t^2 + r^2)^-x`
    Ortho,
    /// `t^-x exp(-M r^2 / 2t)`
    Schr,
    /// Causal form: `Theta(M t) t^-x exp(-M r^2 / 2t)`
    SchrExt,
    /// `t^-2x (1 + mu r/t)^(-2 gamma/mu)`
    MetaNaive,
    /// `|t|^-2x (1 + mu |r/t|)^(-2 gamma/mu)`
    MetaFinal,
    /// `|t|^-2x exp(-|2 gamma r/t|)`
    Cga,
    /// `|t|^-2x ((zeta1+zeta2)/2 + c + i ln(1 + mu r/t)/mu)^-(nu1+nu2)`
    Dual,
}

impl CorrelatorFamily {
    pub const ALL: [CorrelatorFamily; 7] = [
        CorrelatorFamily::Ortho,
        CorrelatorFamily::Schr,
        CorrelatorFamily::SchrExt,
        CorrelatorFamily::MetaNaive,
        CorrelatorFamily::MetaFinal,
        CorrelatorFamily::Cga,
        CorrelatorFamily::Dual,
    ];

    pub fn label(self) -> &'static str {
        match self {
            CorrelatorFamily::Ortho => "ortho",
            CorrelatorFamily::Schr => "schr",
            CorrelatorFamily::SchrExt => "schr-ext",
            CorrelatorFamily::MetaNaive => "meta-naive",
            CorrelatorFamily::MetaFinal => "meta-final",
            CorrelatorFamily::Cga => "cga",
            CorrelatorFamily::Dual => "dual",
        }
    }

    /// Whether the rapidity Kronecker delta applies.
    pub fn gates_rapidity(self) -> bool {
        matches!(
            self,
            CorrelatorFamily::MetaNaive | CorrelatorFamily::MetaFinal | CorrelatorFamily::Cga
        )
    }

    pub fn uses_zeta(self) -> bool {
        self == CorrelatorFamily::Dual
    }
}

impl fmt::Display for CorrelatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CorrelatorFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|f| f.label() == key)
            .ok_or_else(|| Error::Unsupported(format!("unknown correlator family `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelatorParams {
    pub x1: f64,
    pub x2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub nu1: f64,
    pub nu2: f64,
    pub mu: f64,
    pub m1: f64,
    pub c: f64,
    pub normalization: Complex64,
    /// For `MetaFinal` with `gamma1 < 0`: use the literal negative-rapidity
    /// branch `Theta(-r/t) |t|^-2x (1 + mu r/t)^(-2 gamma/mu)` instead of
    /// rejecting the parameters.
    pub literal_negative_rapidity: bool,
}

impl Default for CorrelatorParams {
    fn default() -> Self {
        Self {
            x1: 1.0,
            x2: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
            nu1: 1.0,
            nu2: 1.0,
            mu: 1.0,
            m1: 1.0,
            c: 0.0,
            normalization: Complex64::new(1.0, 0.0),
            literal_negative_rapidity: false,
        }
    }
}

impl CorrelatorParams {
    pub fn with_x(mut self, x: f64) -> Self {
        self.x1 = x;
        self.x2 = x;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma1 = gamma;
        self.gamma2 = gamma;
        self
    }

    pub fn with_nu(mut self, nu1: f64, nu2: f64) -> Self {
        self.nu1 = nu1;
        self.nu2 = nu2;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn nu_sum(&self) -> f64 {
        self.nu1 + self.nu2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelatorSpec {
    pub family: CorrelatorFamily,
    pub params: CorrelatorParams,
}

impl CorrelatorSpec {
    pub fn new(family: CorrelatorFamily, params: CorrelatorParams) -> Self {
        Self { family, params }
    }
}

/// Separation `t = t1 - t2`, `r = r1 - r2`, plus the dual coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct FieldPoint {
    pub t: f64,
    pub r: f64,
    pub zeta1: f64,
    pub zeta2: f64,
}

impl FieldPoint {
    pub fn new(t: f64, r: f64) -> Self {
        Self { t, r, zeta1: 0.0, zeta2: 0.0 }
    }

    pub fn with_zeta(t: f64, r: f64, zeta1: f64, zeta2: f64) -> Self {
        Self { t, r, zeta1, zeta2 }
    }

    pub fn ratio(&self) -> f64 {
        self.r / self.t
    }
}

/// First partials with respect to the separation variables, the dual
/// coordinates and `mu`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Partials {
    pub t: Complex64,
    pub r: Complex64,
    pub zeta1: Complex64,
    pub zeta2: Complex64,
    pub mu: Complex64,
}

impl Partials {
    fn scaled(value: Complex64, t: Complex64, r: Complex64, mu: Complex64) -> Self {
        Self {
            t: t * value,
            r: r * value,
            mu: mu * value,
            ..Self::default()
        }
    }
}

/// Value and first partials at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Jet {
    pub value: Complex64,
    pub partials: Partials,
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0 && x.is_finite()
}

/// `base^exponent` on the principal branch; negative bases only allow
/// integer exponents.
fn real_pow(base: f64, exponent: f64, what: &str) -> Result<f64> {
    if base > 0.0 {
        Ok(base.powf(exponent))
    } else if base == 0.0 {
        if exponent > 0.0 {
            Ok(0.0)
        } else if exponent == 0.0 {
            Ok(1.0)
        } else {
            Err(Error::Domain(format!("{what} = 0 raised to a negative power")))
        }
    } else if is_integer(exponent) && exponent.abs() < i32::MAX as f64 {
        Ok(base.powi(exponent as i32))
    } else {
        Err(Error::Domain(format!(
            "{what} = {base} < 0 raised to non-integer power {exponent} lies on the branch cut"
        )))
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Domain(msg()))
    }
}

fn require_t(p: &FieldPoint) -> Result<()> {
    require(p.t != 0.0, || "t = 0 is excluded".into())
}

fn require_mu(params: &CorrelatorParams) -> Result<()> {
    require(params.mu > 0.0, || format!("mu = {} must be positive", params.mu))
}

/// `1 + mu r/t`, which must be positive.
fn light_cone_factor(params: &CorrelatorParams, p: &FieldPoint) -> Result<f64> {
    let b = 1.0 + params.mu * p.ratio();
    require(b > 0.0, || format!("1 + mu*r/t = {b} must be positive"))?;
    Ok(b)
}

impl CorrelatorSpec {
    fn gated(&self) -> bool {
        let p = &self.params;
        p.x1 != p.x2 || (self.family.gates_rapidity() && p.gamma1 != p.gamma2)
    }

    fn check_point(&self, p: &FieldPoint) -> Result<()> {
        require(p.t.is_finite() && p.r.is_finite(), || "non-finite coordinates".into())?;
        match self.family {
            CorrelatorFamily::Ortho => require(p.t != 0.0 || p.r != 0.0, || "t = r = 0 is excluded".into()),
            _ => require_t(p),
        }
    }

    /// Parameter checks that hold independently of the point.
    fn check_params(&self) -> Result<()> {
        let p = &self.params;
        match self.family {
            CorrelatorFamily::SchrExt => {
                require(p.m1 > 0.0, || format!("M1 = {} must be positive", p.m1))
            }
            CorrelatorFamily::MetaNaive | CorrelatorFamily::Dual => require_mu(p),
            CorrelatorFamily::MetaFinal => {
                require_mu(p)?;
                if p.gamma1 < 0.0 && !p.literal_negative_rapidity {
                    return Err(Error::Unsupported(
                        "gamma1 < 0 requires the literal negative-rapidity branch".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Value and analytic first partials. Gated parameter sets give an
    /// identically vanishing jet.
    pub fn jet(&self, p: &FieldPoint) -> Result<Jet> {
        self.check_params()?;
        self.check_point(p)?;
        if self.gated() {
            return Ok(Jet::default());
        }
        let mut jet = self.raw_jet(p)?;
        let n = self.params.normalization;
        jet.value *= n;
        let d = &mut jet.partials;
        for v in [&mut d.t, &mut d.r, &mut d.zeta1, &mut d.zeta2, &mut d.mu] {
            *v *= n;
        }
        Ok(jet)
    }

    fn raw_jet(&self, p: &FieldPoint) -> Result<Jet> {
        let par = &self.params;
        let (x, gamma, mu) = (par.x1, par.gamma1, par.mu);
        let (t, r) = (p.t, p.r);
        let u = r / t;
        match self.family {
            CorrelatorFamily::Ortho => {
                let s = t * t + r * r;
                let value = real(s.powf(-x));
                let partials = Partials::scaled(value, real(-2.0 * x * t / s), real(-2.0 * x * r / s), real(0.0));
                Ok(Jet { value, partials })
            }
            CorrelatorFamily::Schr | CorrelatorFamily::SchrExt => {
                if self.family == CorrelatorFamily::SchrExt && par.m1 * t < 0.0 {
                    return Ok(Jet::default());
                }
                let m = par.m1;
                let value = real(real_pow(t, -x, "t")? * (-m * r * r / (2.0 * t)).exp());
                let dt = -x / t + m * r * r / (2.0 * t * t);
                let dr = -m * r / t;
                let partials = Partials::scaled(value, real(dt), real(dr), real(0.0));
                Ok(Jet { value, partials })
            }
            CorrelatorFamily::MetaNaive => {
                let b = light_cone_factor(par, p)?;
                let value = real(real_pow(t, -2.0 * x, "t")? * b.powf(-2.0 * gamma / mu));
                let dt = -2.0 * x / t + 2.0 * gamma * u / (t * b);
                let dr = -2.0 * gamma / (t * b);
                let dmu = 2.0 * gamma * (b.ln() / (mu * mu) - u / (mu * b));
                let partials = Partials::scaled(value, real(dt), real(dr), real(dmu));
                Ok(Jet { value, partials })
            }
            CorrelatorFamily::MetaFinal if gamma < 0.0 => {
                if u > 0.0 {
                    return Ok(Jet::default());
                }
                let b = light_cone_factor(par, p)?;
                let value = real(t.abs().powf(-2.0 * x) * b.powf(-2.0 * gamma / mu));
                if r == 0.0 {
                    return self.kink();
                }
                let dt = -2.0 * x / t + 2.0 * gamma * u / (t * b);
                let dr = -2.0 * gamma / (t * b);
                let dmu = 2.0 * gamma * (b.ln() / (mu * mu) - u / (mu * b));
                Ok(Jet { value, partials: Partials::scaled(value, real(dt), real(dr), real(dmu)) })
            }
            CorrelatorFamily::MetaFinal => {
                let au = u.abs();
                let b = 1.0 + mu * au;
                let value = real(t.abs().powf(-2.0 * x) * b.powf(-2.0 * gamma / mu));
                if r == 0.0 && gamma != 0.0 {
                    return self.kink();
                }
                let dt = -2.0 * x / t + 2.0 * gamma * au / (t * b);
                let dr = -2.0 * gamma * u.signum() / (t * b);
                let dmu = -2.0 * gamma * (au / (mu * b) - b.ln() / (mu * mu));
                Ok(Jet { value, partials: Partials::scaled(value, real(dt), real(dr), real(dmu)) })
            }
            CorrelatorFamily::Cga => {
                let g = gamma.abs();
                let value = real(t.abs().powf(-2.0 * x) * (-2.0 * g * u.abs()).exp());
                if r == 0.0 && gamma != 0.0 {
                    return self.kink();
                }
                let dt = -2.0 * x / t + 2.0 * g * u.abs() / t;
                let dr = -2.0 * g * u.signum() / t;
                Ok(Jet { value, partials: Partials::scaled(value, real(dt), real(dr), real(0.0)) })
            }
            CorrelatorFamily::Dual => {
                let b = light_cone_factor(par, p)?;
                let zeta_plus = 0.5 * (p.zeta1 + p.zeta2) + par.c;
                let lambda = b.ln() / mu;
                let w = Complex64::new(zeta_plus, lambda);
                require(w.im != 0.0 || w.re > 0.0, || {
                    format!("zeta_+ + c + i*lambda = {w} lies on the branch cut")
                })?;
                let nu = par.nu_sum();
                let value = w.powf(-nu) * t.abs().powf(-2.0 * x);
                let i = Complex64::i();
                let k = -nu / w;
                let dl_dt = -u / (t * b);
                let dl_dr = 1.0 / (t * b);
                let dl_dmu = u / (mu * b) - b.ln() / (mu * mu);
                let partials = Partials {
                    t: value * (real(-2.0 * x / t) + k * i * dl_dt),
                    r: value * k * i * dl_dr,
                    zeta1: value * k * 0.5,
                    zeta2: value * k * 0.5,
                    mu: value * k * i * dl_dmu,
                };
                Ok(Jet { value, partials })
            }
        }
    }

    fn kink(&self) -> Result<Jet> {
        Err(Error::NonDifferentiablePoint(format!("{} at r = 0", self.family)))
    }

    pub fn eval(&self, p: &FieldPoint) -> Result<Complex64> {
        match self.jet(p) {
            Ok(j) => Ok(j.value),
            Err(Error::NonDifferentiablePoint(_)) => self.eval_at_kink(p),
            Err(e) => Err(e),
        }
    }

    fn eval_at_kink(&self, p: &FieldPoint) -> Result<Complex64> {
        let x = self.params.x1;
        Ok(self.params.normalization * p.t.abs().powf(-2.0 * x))
    }

    pub fn grad(&self, p: &FieldPoint) -> Result<Partials> {
        Ok(self.jet(p)?.partials)
    }
}

pub fn eval_correlator(spec: &CorrelatorSpec, p: &FieldPoint) -> Result<Complex64> {
    spec.eval(p)
}

pub fn grad_correlator(spec: &CorrelatorSpec, p: &FieldPoint) -> Result<Partials> {
    spec.grad(p)
}

/// `(zeta_+ + i ln(1 + mu u)/mu)^-nu` for complex `zeta_+`, the dual scaling
/// function without its `|t|^-2x` prefactor.
pub fn dual_scaling_function(zeta_plus: Complex64, u: f64, mu: f64, nu: f64) -> Result<Complex64> {
    let b = 1.0 + mu * u;
    require(b > 0.0, || format!("1 + mu*u = {b} must be positive"))?;
    let w = zeta_plus + Complex64::new(0.0, b.ln() / mu);
    require(w.im != 0.0 || w.re > 0.0, || format!("argument {w} lies on the branch cut"))?;
    Ok(w.powf(-nu))
}
