//! Generator factories for the meta-conformal representation, its dual
//! (rapidity Fourier-transformed) form, the conformal Galilean contraction
//! and the chiral Virasoro pair.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::diffop::{binomial, DiffOp};
use crate::error::{Error, Result};
use crate::exactalg::{GaussianRational, Poly, Ring, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Meta,
    MetaDual,
    Cga,
    OrthoChiral,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Meta => "meta",
            Family::MetaDual => "meta-dual",
            Family::Cga => "cga",
            Family::OrthoChiral => "ortho-chiral",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "meta" => Ok(Family::Meta),
            "meta-dual" | "dual" => Ok(Family::MetaDual),
            "cga" => Ok(Family::Cga),
            "ortho-chiral" | "chiral" => Ok(Family::OrthoChiral),
            other => Err(Error::Unsupported(format!("unknown generator family `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Kind {
    X,
    Y,
    N,
    S,
    Ell,
    EllBar,
}

impl Kind {
    pub fn is_indexed(self) -> bool {
        !matches!(self, Kind::N | Kind::S)
    }

    fn stem(self) -> &'static str {
        match self {
            Kind::X => "X",
            Kind::Y => "Y",
            Kind::N => "N",
            Kind::S => "S",
            Kind::Ell => "ell",
            Kind::EllBar => "ellbar",
        }
    }

    /// `X_1`, `Y_-1`, `N`, ...
    pub fn label(self, n: i64) -> String {
        if self.is_indexed() {
            format!("{}_{}", self.stem(), n)
        } else {
            self.stem().to_string()
        }
    }
}

/// Exact values for some parameters; the rest stay formal symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamValues(BTreeMap<Var, GaussianRational>);

impl ParamValues {
    pub fn formal() -> Self {
        Self::default()
    }

    pub fn with(mut self, v: Var, value: GaussianRational) -> Self {
        self.0.insert(v, value);
        self
    }

    pub fn is_formal(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &GaussianRational)> {
        self.0.iter()
    }

    pub fn apply(&self, op: DiffOp) -> Result<DiffOp> {
        self.0.iter().try_fold(op, |acc, (v, val)| acc.substitute(*v, val))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub family: Family,
    pub kind: Kind,
    /// Mode index, ignored for `N` and `S`.
    pub index: i64,
    pub params: ParamValues,
}

impl GeneratorSpec {
    pub fn new(family: Family, kind: Kind, index: i64) -> Self {
        Self {
            family,
            kind,
            index,
            params: ParamValues::formal(),
        }
    }

    pub fn with_params(mut self, params: ParamValues) -> Self {
        self.params = params;
        self
    }
}

/// Builds the differential operator for `spec`.
pub fn make_generator(spec: &GeneratorSpec) -> Result<DiffOp> {
    let n = spec.index;
    if spec.kind.is_indexed() && n < -1 {
        return Err(Error::UnsupportedIndex(n));
    }
    let op = match (spec.family, spec.kind) {
        (Family::Meta, Kind::X) => meta_x(n)?,
        (Family::Meta, Kind::Y) => meta_y(n)?,
        (Family::MetaDual, Kind::X) => dual_x(n)?,
        (Family::MetaDual, Kind::Y) => dual_y(n)?,
        (Family::MetaDual, Kind::N) => dual_n()?,
        (Family::Meta | Family::MetaDual, Kind::S) => advection()?,
        (Family::Cga, Kind::X) => cga_x(n)?,
        (Family::Cga, Kind::Y) => cga_y(n)?,
        (Family::Cga, Kind::S) => advection()?.substitute(Var::Mu, &GaussianRational::zero())?,
        (Family::OrthoChiral, Kind::Ell) => ell(n)?,
        (Family::OrthoChiral, Kind::EllBar) => ell_bar(n)?,
        (Family::OrthoChiral, Kind::X) => ell(n)?.checked_add(&ell_bar(n)?)?,
        (Family::OrthoChiral, Kind::Y) => ell_bar(n)?.mul_poly(&var(Var::Mu))?,
        (family, kind) => {
            return Err(Error::Unsupported(format!(
                "generator kind {kind:?} is not defined for family `{family}`"
            )))
        }
    };
    spec.params.apply(op)
}

fn ring() -> Ring {
    Ring::standard()
}

fn var(v: Var) -> Poly {
    Poly::var(&ring(), v).expect("standard ring holds every symbol")
}

fn int(n: i64) -> Poly {
    Poly::int(&ring(), n)
}

fn mu_inv() -> Poly {
    Poly::monomial(&ring(), GaussianRational::one(), &[(Var::Mu, -1)]).expect("mu is invertible")
}

fn i_unit() -> Poly {
    Poly::constant(&ring(), GaussianRational::i())
}

/// `t + mu r`.
fn light_cone() -> Poly {
    &var(Var::T) + &(&var(Var::Mu) * &var(Var::R))
}

fn t_pow(k: i64) -> Poly {
    debug_assert!(k >= 0);
    var(Var::T).pow(k as u32)
}

fn d(v: Var) -> DiffOp {
    DiffOp::deriv(&ring(), v).expect("coordinate")
}

fn times(p: Poly, v: Var) -> DiffOp {
    d(v).mul_poly(&p).expect("same ring")
}

/// `mu^-1 [(t + mu r)^k - t^k]`, exact; the Laurent prefactor cancels.
fn light_cone_difference(k: i64) -> Poly {
    if k <= 0 {
        return Poly::zero(&ring());
    }
    let diff = &light_cone().pow(k as u32) - &t_pow(k);
    let out = &mu_inv() * &diff;
    debug_assert!(out.min_exponent(Var::Mu).unwrap_or(0) >= 0);
    out
}

fn meta_x(n: i64) -> Result<DiffOp> {
    let k = n + 1;
    let mut op = times(-t_pow(k), Var::T);
    op = &op + &times(-light_cone_difference(k), Var::R);
    let scalar = &(&(&int(-k) * &var(Var::Gamma)) * &light_cone_difference(n))
        - &(&(&int(k) * &var(Var::X)) * &t_pow_or_zero(n, k));
    Ok(&op + &DiffOp::scalar(scalar))
}

/// `t^n` when the prefactor `coef` is nonzero; avoids `t^-1` at `n = -1`.
fn t_pow_or_zero(n: i64, coef: i64) -> Poly {
    if coef == 0 {
        Poly::zero(&ring())
    } else {
        t_pow(n)
    }
}

fn light_cone_pow_or_zero(n: i64, coef: i64) -> Poly {
    if coef == 0 {
        Poly::zero(&ring())
    } else {
        light_cone().pow(n as u32)
    }
}

fn meta_y(n: i64) -> Result<DiffOp> {
    let k = n + 1;
    let op = times(-light_cone().pow(k as u32), Var::R);
    let scalar = &(&int(-k) * &var(Var::Gamma)) * &light_cone_pow_or_zero(n, k);
    Ok(&op + &DiffOp::scalar(scalar))
}

fn dual_x(n: i64) -> Result<DiffOp> {
    let k = n + 1;
    let zeta = times(&(&i_unit() * &int(k)) * &light_cone_difference(n), Var::Zeta);
    let op = &(&zeta + &times(-t_pow(k), Var::T)) + &times(-light_cone_difference(k), Var::R);
    let scalar = &(&int(-k) * &var(Var::X)) * &t_pow_or_zero(n, k);
    Ok(&op + &DiffOp::scalar(scalar))
}

fn dual_y(n: i64) -> Result<DiffOp> {
    let k = n + 1;
    let zeta = times(&(&i_unit() * &int(k)) * &light_cone_pow_or_zero(n, k), Var::Zeta);
    Ok(&zeta + &times(-light_cone().pow(k as u32), Var::R))
}

/// `N = -r d_r - (zeta + c) d_zeta + mu d_mu - nu`.
fn dual_n() -> Result<DiffOp> {
    let op = &times(-var(Var::R), Var::R) + &times(-(&var(Var::Zeta) + &var(Var::C)), Var::Zeta);
    let op = &op + &times(var(Var::Mu), Var::Mu);
    Ok(&op - &DiffOp::scalar(var(Var::Nu)))
}

/// The advection operator `S = -mu d_t + d_r`.
fn advection() -> Result<DiffOp> {
    Ok(&times(-var(Var::Mu), Var::T) + &d(Var::R))
}

fn cga_x(n: i64) -> Result<DiffOp> {
    let k = n + 1;
    let mut op = times(-t_pow(k), Var::T);
    op = &op + &times(&(&int(-k) * &t_pow_or_zero(n, k)) * &var(Var::R), Var::R);
    let galilei = n * k;
    let gamma_term = if galilei == 0 {
        Poly::zero(&ring())
    } else {
        &(&(&int(-galilei) * &var(Var::Gamma)) * &t_pow(n - 1)) * &var(Var::R)
    };
    let scalar = &gamma_term - &(&(&int(k) * &var(Var::X)) * &t_pow_or_zero(n, k));
    Ok(&op + &DiffOp::scalar(scalar))
}

fn cga_y(n: i64) -> Result<DiffOp> {
    let k = n + 1;
    let op = times(-t_pow(k), Var::R);
    let scalar = &(&int(-k) * &var(Var::Gamma)) * &t_pow_or_zero(n, k);
    Ok(&op + &DiffOp::scalar(scalar))
}

/// `ellbar_n = mu^-1 Y_n`.
fn ell_bar(n: i64) -> Result<DiffOp> {
    meta_y(n)?.mul_poly(&mu_inv())
}

/// `ell_n = X_n - mu^-1 Y_n`.
fn ell(n: i64) -> Result<DiffOp> {
    meta_x(n)?.checked_sub(&ell_bar(n)?)
}

/// Reference expansion of the meta-conformal `X_n`, written out term by term
/// with binomial coefficients rather than through Laurent cancellation.
pub fn meta_x_binomial(n: i64) -> Result<DiffOp> {
    if n < -1 {
        return Err(Error::UnsupportedIndex(n));
    }
    let k = n + 1;
    let mut op = times(-t_pow(k), Var::T);
    for j in 1..=k {
        let c = binomial(k, j);
        let coef = &(&(&int(-c) * &t_pow(k - j)) * &var(Var::Mu).pow((j - 1) as u32)) * &var(Var::R).pow(j as u32);
        op = &op + &times(coef, Var::R);
    }
    let mut scalar = if k == 0 {
        Poly::zero(&ring())
    } else {
        &(&int(-k) * &var(Var::X)) * &t_pow(n)
    };
    for j in 1..=n {
        let c = binomial(n, j);
        let coef = &(&(&(&int(-k * c) * &var(Var::Gamma)) * &t_pow(n - j)) * &var(Var::Mu).pow((j - 1) as u32))
            * &var(Var::R).pow(j as u32);
        scalar = &scalar + &coef;
    }
    Ok(&op + &DiffOp::scalar(scalar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opexpr::parse_op_expr;

    fn gen(family: Family, kind: Kind, n: i64) -> DiffOp {
        make_generator(&GeneratorSpec::new(family, kind, n)).unwrap()
    }

    fn parse(s: &str) -> DiffOp {
        parse_op_expr(s).unwrap()
    }

    #[test]
    fn finite_meta_generators_match_closed_forms() {
        assert_eq!(gen(Family::Meta, Kind::X, -1), parse("-dt"));
        assert_eq!(gen(Family::Meta, Kind::X, 0), parse("-t*dt - r*dr - x"));
        assert_eq!(
            gen(Family::Meta, Kind::X, 1),
            parse("-t^2*dt - 2*t*r*dr - mu*r^2*dr - 2*x*t - 2*gamma*r")
        );
        assert_eq!(gen(Family::Meta, Kind::Y, -1), parse("-dr"));
        assert_eq!(gen(Family::Meta, Kind::Y, 0), parse("-t*dr - mu*r*dr - gamma"));
        assert_eq!(
            gen(Family::Meta, Kind::Y, 1),
            parse("-t^2*dr - 2*mu*t*r*dr - mu^2*r^2*dr - 2*gamma*t - 2*gamma*mu*r")
        );
    }

    #[test]
    fn laurent_and_binomial_routes_agree() {
        for n in -1..=7 {
            assert_eq!(gen(Family::Meta, Kind::X, n), meta_x_binomial(n).unwrap(), "n = {n}");
        }
    }

    #[test]
    fn dual_generators() {
        assert_eq!(
            gen(Family::MetaDual, Kind::Y, 1),
            parse("2*i*(t + mu*r)*dzeta - (t + mu*r)*(t + mu*r)*dr")
        );
        assert_eq!(gen(Family::MetaDual, Kind::N, 0), parse("-r*dr - (zeta + c)*dzeta + mu*dmu - nu"));
        // the dual X_n has no rapidity scalar term: gamma became i d_zeta
        assert!(!gen(Family::MetaDual, Kind::X, 2).vars_used().contains(&Var::Gamma));
        assert_eq!(gen(Family::MetaDual, Kind::X, 1), parse("2*i*r*dzeta - t^2*dt - 2*t*r*dr - mu*r^2*dr - 2*x*t"));
    }

    #[test]
    fn only_dual_n_carries_mu_derivative() {
        let mu_d = |op: &DiffOp| op.terms().any(|(a, _)| a[3] > 0);
        for family in [Family::Meta, Family::MetaDual, Family::Cga, Family::OrthoChiral] {
            for kind in [Kind::X, Kind::Y, Kind::N, Kind::S, Kind::Ell, Kind::EllBar] {
                for n in -1..=2 {
                    if let Ok(op) = make_generator(&GeneratorSpec::new(family, kind, n)) {
                        assert_eq!(mu_d(&op), family == Family::MetaDual && kind == Kind::N, "{family} {kind:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn cga_factory() {
        assert_eq!(gen(Family::Cga, Kind::Y, 0), parse("-t*dr - gamma"));
        assert_eq!(gen(Family::Cga, Kind::X, 1), parse("-t^2*dt - 2*t*r*dr - 2*x*t - 2*gamma*r"));
        assert_eq!(gen(Family::Cga, Kind::X, -1), parse("-dt"));
    }

    #[test]
    fn errors() {
        let spec = GeneratorSpec::new(Family::Meta, Kind::X, -2);
        assert_eq!(make_generator(&spec), Err(Error::UnsupportedIndex(-2)));
        assert!(matches!(
            make_generator(&GeneratorSpec::new(Family::Meta, Kind::N, 0)),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            make_generator(&GeneratorSpec::new(Family::Meta, Kind::Ell, 0)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn numeric_parameters() {
        let params = ParamValues::formal().with(Var::X, GaussianRational::ratio(1, 2));
        let op = make_generator(&GeneratorSpec::new(Family::Meta, Kind::X, 0).with_params(params)).unwrap();
        assert_eq!(op, parse("-t*dt - r*dr - 1/2"));
    }

    #[test]
    fn factories_are_deterministic() {
        let spec = GeneratorSpec::new(Family::MetaDual, Kind::X, 3);
        assert_eq!(make_generator(&spec).unwrap().to_string(), make_generator(&spec).unwrap().to_string());
    }

    #[test]
    fn family_names() {
        assert_eq!("meta".parse::<Family>().unwrap(), Family::Meta);
        assert_eq!("META_DUAL".parse::<Family>().unwrap(), Family::MetaDual);
        assert!("foo".parse::<Family>().is_err());
    }
}
