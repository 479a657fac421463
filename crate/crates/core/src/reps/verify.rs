//! Exact verifiers for commutation relations. Every check reduces to "this
//! operator has an empty term map".

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::generators::{make_generator, Family, GeneratorSpec, Kind, ParamValues};
use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::exactalg::{GaussianRational, Poly, Ring, Var};

/// One checked relation: `residual` must vanish.
#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub lhs: String,
    pub rhs: String,
    /// The identity being checked, e.g. `[X_1,Y_0] - (1)*Y_1`.
    pub relation: String,
    pub residual_text: String,
    pub zero: bool,
    #[serde(skip)]
    pub residual: DiffOp,
}

impl PairCheck {
    fn new(lhs: String, rhs: String, relation: String, residual: DiffOp) -> Self {
        Self {
            lhs,
            rhs,
            relation,
            residual_text: residual.to_string(),
            zero: residual.is_zero(),
            residual,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlgebraReport {
    pub family: String,
    pub pairs: Vec<PairCheck>,
    pub all_zero: bool,
}

impl AlgebraReport {
    pub fn new(family: impl Into<String>, pairs: Vec<PairCheck>) -> Self {
        let all_zero = pairs.iter().all(|p| p.zero);
        Self {
            family: family.into(),
            pairs,
            all_zero,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &PairCheck> {
        self.pairs.iter().filter(|p| !p.zero)
    }

    fn extend(mut self, other: AlgebraReport) -> Self {
        self.all_zero &= other.all_zero;
        self.pairs.extend(other.pairs);
        self
    }
}

/// Supplies generators by kind and index. Implemented by the plain factory
/// and by test doubles that corrupt a generator on purpose.
pub trait GeneratorSource: Sync {
    fn generator(&self, kind: Kind, n: i64) -> Result<DiffOp>;
}

/// The standard factories for one family and parameter set.
#[derive(Clone, Debug)]
pub struct Factory {
    pub family: Family,
    pub params: ParamValues,
}

impl Factory {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            params: ParamValues::formal(),
        }
    }

    pub fn with_params(family: Family, params: ParamValues) -> Self {
        Self { family, params }
    }
}

impl GeneratorSource for Factory {
    fn generator(&self, kind: Kind, n: i64) -> Result<DiffOp> {
        make_generator(&GeneratorSpec::new(self.family, kind, n).with_params(self.params.clone()))
    }
}

/// Generators for every kind and index in `kinds × [-1, max]`, built once.
struct Table(BTreeMap<(Kind, i64), DiffOp>);

impl Table {
    fn build(source: &dyn GeneratorSource, kinds: &[Kind], max: i64) -> Result<Self> {
        let keys: Vec<(Kind, i64)> = kinds.iter().flat_map(|&k| (-1..=max).map(move |n| (k, n))).collect();
        let ops: Vec<Result<DiffOp>> = keys.par_iter().map(|&(k, n)| source.generator(k, n)).collect();
        let mut map = BTreeMap::new();
        for (key, op) in keys.into_iter().zip(ops) {
            map.insert(key, op?);
        }
        Ok(Self(map))
    }

    fn get(&self, kind: Kind, n: i64) -> &DiffOp {
        &self.0[&(kind, n)]
    }
}

fn ring() -> Ring {
    Ring::standard()
}

fn int(n: i64) -> GaussianRational {
    GaussianRational::from_int(n)
}

/// Checks `[A_n, B_m] - coef * (n - m) * C_{n+m}` for one bracket family.
#[allow(clippy::too_many_arguments)]
fn bracket_checks(
    table: &Table,
    a: Kind,
    b: Kind,
    c: Kind,
    coef: Option<&Poly>,
    n_max: i64,
    coef_label: &str,
) -> Result<Vec<PairCheck>> {
    let pairs: Vec<(i64, i64)> = (-1..=n_max).flat_map(|n| (-1..=n_max).map(move |m| (n, m))).collect();
    pairs
        .par_iter()
        .map(|&(n, m)| {
            let lhs = table.get(a, n);
            let rhs = table.get(b, m);
            let bracket = lhs.commutator(rhs)?;
            let expected = match coef {
                Some(k) if n != m => table.get(c, n + m).mul_poly(k)?.scale(&int(n - m)),
                _ => DiffOp::zero(&ring()),
            };
            let residual = bracket.checked_sub(&expected)?;
            let relation = format!(
                "[{},{}] - {}({})*{}",
                a.label(n),
                b.label(m),
                coef_label,
                n - m,
                c.label(n + m)
            );
            Ok(PairCheck::new(a.label(n), b.label(m), relation, residual))
        })
        .collect()
}

/// `[X_n,X_m] = (n-m) X_{n+m}`, `[X_n,Y_m] = (n-m) Y_{n+m}`,
/// `[Y_n,Y_m] = mu (n-m) Y_{n+m}` for `-1 <= n, m <= n_max`. For the
/// conformal Galilean family the last bracket vanishes.
pub fn verify_structure_constants(family: Family, n_max: i64) -> Result<AlgebraReport> {
    if family == Family::OrthoChiral {
        return verify_chiral_isomorphism(n_max);
    }
    verify_structure_constants_with(&Factory::new(family), family, n_max)
}

pub fn verify_structure_constants_with(
    source: &dyn GeneratorSource,
    family: Family,
    n_max: i64,
) -> Result<AlgebraReport> {
    check_n_max(n_max)?;
    let table = Table::build(source, &[Kind::X, Kind::Y], 2 * n_max)?;
    let one = Poly::one(&ring());
    let mu = Poly::var(&ring(), Var::Mu)?;
    let yy = if family == Family::Cga { None } else { Some(&mu) };
    let yy_label = if family == Family::Cga { "0*" } else { "mu*" };
    let mut pairs = bracket_checks(&table, Kind::X, Kind::X, Kind::X, Some(&one), n_max, "")?;
    pairs.extend(bracket_checks(&table, Kind::X, Kind::Y, Kind::Y, Some(&one), n_max, "")?);
    pairs.extend(bracket_checks(&table, Kind::Y, Kind::Y, Kind::Y, yy, n_max, yy_label)?);
    Ok(AlgebraReport::new(family.label(), pairs))
}

fn check_n_max(n_max: i64) -> Result<()> {
    if n_max < 1 {
        return Err(Error::Unsupported(format!("n_max must be at least 1, got {n_max}")));
    }
    Ok(())
}

/// `[X_n, N] = 0` and `[Y_n, N] = -Y_n` in the dual representation.
pub fn verify_n_extension(n_max: i64) -> Result<AlgebraReport> {
    verify_n_extension_with(n_max, &ParamValues::formal())
}

pub fn verify_n_extension_with(n_max: i64, params: &ParamValues) -> Result<AlgebraReport> {
    check_n_max(n_max)?;
    let source = Factory::with_params(Family::MetaDual, params.clone());
    let table = Table::build(&source, &[Kind::X, Kind::Y], n_max)?;
    let n_op = source.generator(Kind::N, 0)?;
    let pairs: Vec<Result<PairCheck>> = (-1..=n_max)
        .into_par_iter()
        .flat_map_iter(|n| {
            let x = table.get(Kind::X, n);
            let y = table.get(Kind::Y, n);
            let n_op = &n_op;
            [
                x.commutator(n_op)
                    .map(|res| PairCheck::new(Kind::X.label(n), "N".into(), format!("[X_{n},N]"), res)),
                y.commutator(n_op).and_then(|c| c.checked_add(y)).map(|res| {
                    PairCheck::new(Kind::Y.label(n), "N".into(), format!("[Y_{n},N] + Y_{n}"), res)
                }),
            ]
        })
        .collect();
    let pairs = pairs.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(AlgebraReport::new(Family::MetaDual.label(), pairs))
}

/// `[S, Y_n] = 0`, `[S, X_n] = -(n+1) t^n S + n(n+1)(mu x - gamma) t^(n-1)`
/// and `[S, N] = -S`, with `S = -mu d_t + d_r`.
pub fn verify_dynamical_symmetry(n_max: i64) -> Result<AlgebraReport> {
    check_n_max(n_max)?;
    let meta = Factory::new(Family::Meta);
    let table = Table::build(&meta, &[Kind::X, Kind::Y], n_max)?;
    let s = meta.generator(Kind::S, 0)?;
    let t = Poly::var(&ring(), Var::T)?;
    let anomaly = &(&Poly::var(&ring(), Var::Mu)? * &Poly::var(&ring(), Var::X)?) - &Poly::var(&ring(), Var::Gamma)?;

    let mut pairs = Vec::new();
    for n in -1..=n_max {
        let sy = s.commutator(table.get(Kind::Y, n))?;
        pairs.push(PairCheck::new("S".into(), Kind::Y.label(n), format!("[S,Y_{n}]"), sy));

        let sx = s.commutator(table.get(Kind::X, n))?;
        let k = n + 1;
        let mut expected = DiffOp::zero(&ring());
        if k != 0 {
            expected = s.mul_poly(&t.pow(n as u32))?.scale(&int(-k));
        }
        if n * k != 0 {
            let scalar = (&anomaly * &t.pow((n - 1) as u32)).scale(&int(n * k));
            expected = expected.checked_add(&DiffOp::scalar(scalar))?;
        }
        let relation = format!("[S,X_{n}] + {k}*t^{n}*S - {}*(mu*x-gamma)*t^{}", n * k, n - 1);
        pairs.push(PairCheck::new("S".into(), Kind::X.label(n), relation, sx.checked_sub(&expected)?));
    }
    let n_op = make_generator(&GeneratorSpec::new(Family::MetaDual, Kind::N, 0))?;
    let sn = s.commutator(&n_op)?.checked_add(&s)?;
    pairs.push(PairCheck::new("S".into(), "N".into(), "[S,N] + S".into(), sn));
    Ok(AlgebraReport::new(Family::Meta.label(), pairs))
}

/// With the scaling dimension tied to the rapidity, `x = gamma/mu`, the
/// anomaly drops out: `[S, X_n] + (n+1) t^n S = 0`.
pub fn verify_solution_space_invariance(n_max: i64) -> Result<AlgebraReport> {
    check_n_max(n_max)?;
    let tied = &Poly::var(&ring(), Var::Gamma)? * &Poly::monomial(&ring(), GaussianRational::one(), &[(Var::Mu, -1)])?;
    let meta = Factory::new(Family::Meta);
    let s = meta.generator(Kind::S, 0)?;
    let t = Poly::var(&ring(), Var::T)?;
    let mut pairs = Vec::new();
    for n in -1..=n_max {
        let x = meta.generator(Kind::X, n)?.substitute_poly(Var::X, &tied)?;
        let mut residual = s.commutator(&x)?;
        if n + 1 != 0 {
            residual = residual.checked_add(&s.mul_poly(&t.pow(n as u32))?.scale(&int(n + 1)))?;
        }
        pairs.push(PairCheck::new(
            "S".into(),
            Kind::X.label(n),
            format!("[S,X_{n}] + {}*t^{n}*S with x = gamma/mu", n + 1),
            residual,
        ));
    }
    Ok(AlgebraReport::new(Family::Meta.label(), pairs))
}

/// `ell_n = X_n - mu^-1 Y_n`, `ellbar_n = mu^-1 Y_n` form two commuting
/// centreless Virasoro algebras, and `ell_n + ellbar_n = X_n`.
pub fn verify_chiral_isomorphism(n_max: i64) -> Result<AlgebraReport> {
    check_n_max(n_max)?;
    let chiral = Factory::new(Family::OrthoChiral);
    let table = Table::build(&chiral, &[Kind::Ell, Kind::EllBar], 2 * n_max)?;
    let one = Poly::one(&ring());
    let mut pairs = bracket_checks(&table, Kind::Ell, Kind::Ell, Kind::Ell, Some(&one), n_max, "")?;
    pairs.extend(bracket_checks(&table, Kind::EllBar, Kind::EllBar, Kind::EllBar, Some(&one), n_max, "")?);
    pairs.extend(bracket_checks(&table, Kind::Ell, Kind::EllBar, Kind::Ell, None, n_max, "0*")?);
    let meta = Factory::new(Family::Meta);
    for n in -1..=n_max {
        let sum = table.get(Kind::Ell, n).checked_add(table.get(Kind::EllBar, n))?;
        let residual = sum.checked_sub(&meta.generator(Kind::X, n)?)?;
        pairs.push(PairCheck::new(
            format!("ell_{n}+ellbar_{n}"),
            Kind::X.label(n),
            format!("ell_{n} + ellbar_{n} - X_{n}"),
            residual,
        ));
    }
    Ok(AlgebraReport::new(Family::OrthoChiral.label(), pairs))
}

/// The `mu -> 0` contraction of the meta-conformal generators.
#[derive(Clone, Debug)]
pub struct Contraction {
    /// `(label, operator)` for `X_n` and `Y_n`, `-1 <= n <= n_max`.
    pub generators: Vec<(String, DiffOp)>,
    /// Conformal Galilean structure constants on the contracted operators,
    /// plus agreement with the direct Galilean factory.
    pub report: AlgebraReport,
}

pub fn contract_cga(n_max: i64) -> Result<Contraction> {
    check_n_max(n_max)?;
    struct Contracted;
    impl GeneratorSource for Contracted {
        fn generator(&self, kind: Kind, n: i64) -> Result<DiffOp> {
            let op = make_generator(&GeneratorSpec::new(Family::Meta, kind, n))?;
            op.substitute(Var::Mu, &GaussianRational::zero())
        }
    }
    let contracted = Contracted;
    let report = verify_structure_constants_with(&contracted, Family::Cga, n_max)?;
    let direct = Factory::new(Family::Cga);
    let mut generators = Vec::new();
    let mut agreement = Vec::new();
    for kind in [Kind::X, Kind::Y] {
        for n in -1..=n_max {
            let op = contracted.generator(kind, n)?;
            let residual = op.checked_sub(&direct.generator(kind, n)?)?;
            agreement.push(PairCheck::new(
                format!("{}|mu=0", kind.label(n)),
                format!("{}(cga)", kind.label(n)),
                format!("{}|mu=0 - {}(cga)", kind.label(n), kind.label(n)),
                residual,
            ));
            generators.push((kind.label(n), op));
        }
    }
    let report = report.extend(AlgebraReport::new(Family::Cga.label(), agreement));
    Ok(Contraction { generators, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opexpr::parse_op_expr;

    fn gen(family: Family, kind: Kind, n: i64) -> DiffOp {
        make_generator(&GeneratorSpec::new(family, kind, n)).unwrap()
    }

    #[test]
    fn individual_brackets() {
        let x0 = gen(Family::Meta, Kind::X, 0);
        let y_1 = gen(Family::Meta, Kind::Y, -1);
        assert_eq!(x0.commutator(&y_1).unwrap(), y_1);
        let y0 = gen(Family::Meta, Kind::Y, 0);
        let mu = Poly::var(&ring(), Var::Mu).unwrap();
        assert_eq!(y0.commutator(&y_1).unwrap(), y_1.mul_poly(&mu).unwrap());
        let x1 = gen(Family::Meta, Kind::X, 1);
        let x_1 = gen(Family::Meta, Kind::X, -1);
        assert!(x1.commutator(&x_1).unwrap().equals(&x0.scale(&int(2))).unwrap());
    }

    #[test]
    fn meta_and_dual_close() {
        for family in [Family::Meta, Family::MetaDual, Family::Cga] {
            let report = verify_structure_constants(family, 3).unwrap();
            assert!(report.all_zero, "{family}: {:?}", report.failures().next());
            assert_eq!(report.pairs.len(), 3 * 25);
        }
    }

    #[test]
    fn n_extension() {
        let report = verify_n_extension(3).unwrap();
        assert!(report.all_zero);
        let shifted = ParamValues::formal().with(Var::C, GaussianRational::ratio(37, 11));
        let report2 = verify_n_extension_with(3, &shifted).unwrap();
        assert!(report2.all_zero);
        assert_eq!(report.pairs.len(), report2.pairs.len());
    }

    #[test]
    fn dynamical_symmetry() {
        let report = verify_dynamical_symmetry(4).unwrap();
        assert!(report.all_zero, "{:?}", report.failures().next());
        let s = gen(Family::Meta, Kind::S, 0);
        let x1 = gen(Family::Meta, Kind::X, 1);
        let expect = parse_op_expr("-2*t*(-mu*dt + dr) + 2*(mu*x - gamma)").unwrap();
        assert_eq!(s.commutator(&x1).unwrap(), expect);
        assert!(verify_solution_space_invariance(4).unwrap().all_zero);
    }

    #[test]
    fn advection_solutions_are_mapped_to_solutions() {
        // f = (t + mu r)^k solves S f = 0; X_n f with x = gamma/mu must too.
        let tied = &Poly::var(&ring(), Var::Gamma).unwrap()
            * &Poly::monomial(&ring(), GaussianRational::one(), &[(Var::Mu, -1)]).unwrap();
        let s = gen(Family::Meta, Kind::S, 0);
        let cone = parse_op_expr("t + mu*r").unwrap().scalar_part();
        for k in 0..=3u32 {
            let f = cone.pow(k);
            assert!(s.apply(&f).unwrap().is_zero());
            for n in -1..=4 {
                let x = gen(Family::Meta, Kind::X, n).substitute_poly(Var::X, &tied).unwrap();
                let g = x.apply(&f).unwrap();
                assert!(s.apply(&g).unwrap().is_zero(), "n = {n}, k = {k}");
            }
        }
    }

    #[test]
    fn chiral_pair() {
        let report = verify_chiral_isomorphism(2).unwrap();
        assert!(report.all_zero, "{:?}", report.failures().next());
        let l0 = gen(Family::OrthoChiral, Kind::Ell, 0);
        let lb0 = gen(Family::OrthoChiral, Kind::EllBar, 0);
        assert!(l0.commutator(&lb0).unwrap().is_zero());
        let l1 = gen(Family::OrthoChiral, Kind::Ell, 1);
        let l_1 = gen(Family::OrthoChiral, Kind::Ell, -1);
        assert_eq!(l1.commutator(&l_1).unwrap(), l0.scale(&int(2)));
    }

    #[test]
    fn contraction() {
        let c = contract_cga(3).unwrap();
        assert!(c.report.all_zero, "{:?}", c.report.failures().next());
        let y0 = &c.generators.iter().find(|(l, _)| l == "Y_0").unwrap().1;
        assert_eq!(*y0, parse_op_expr("-t*dr - gamma").unwrap());
        let x1 = &c.generators.iter().find(|(l, _)| l == "X_1").unwrap().1;
        assert_eq!(*x1, parse_op_expr("-t^2*dt - 2*t*r*dr - 2*x*t - 2*gamma*r").unwrap());
        let ellbar = gen(Family::OrthoChiral, Kind::EllBar, 0);
        assert!(matches!(
            ellbar.substitute(Var::Mu, &GaussianRational::zero()),
            Err(Error::PoleAtContraction(_))
        ));
    }

    #[test]
    fn corrupted_generator_is_caught() {
        struct Flipped;
        impl GeneratorSource for Flipped {
            fn generator(&self, kind: Kind, n: i64) -> Result<DiffOp> {
                let op = Factory::new(Family::Meta).generator(kind, n)?;
                if (kind, n) == (Kind::Y, 0) {
                    let s = op.scalar_part();
                    return op.checked_sub(&DiffOp::scalar(s.scale(&int(2))));
                }
                Ok(op)
            }
        }
        let report = verify_structure_constants_with(&Flipped, Family::Meta, 1).unwrap();
        assert!(!report.all_zero);
    }

    #[test]
    fn n_max_validation() {
        assert!(verify_structure_constants(Family::Meta, 0).is_err());
    }
}
