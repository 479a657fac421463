//! Numerical application of first-order two-body generators to closed-form
//! correlators.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::family::{CorrelatorFamily, CorrelatorSpec, FieldPoint, Jet};
use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::exactalg::{Assignment, Var};
use crate::opexpr::parse_op_expr;
use crate::reps::{make_generator, Family, GeneratorSpec, Kind};

/// Distance kept from domain boundaries and non-smooth loci.
pub const GRID_MARGIN: f64 = 1e-3;

pub const STANDARD_T: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const STANDARD_R: [f64; 3] = [0.25, 1.0, 3.0];
pub const STANDARD_ZETA: [f64; 3] = [-1.0, 0.5, 2.0];

/// Positions `(t2, r2)` of the second body. Separations are added on top, so
/// generators that are not translation invariant are probed away from the
/// origin too.
pub const BODY_TWO_OFFSETS: [(f64, f64); 2] = [(0.0, 0.0), (0.375, -0.625)];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub points: Vec<FieldPoint>,
}

impl Grid {
    /// Tensor grid `t in ±{0.5,1,2,4}`, `r in ±{0.25,1,3}` and, when
    /// `with_zeta`, `zeta1, zeta2 in {-1, 0.5, 2}`.
    pub fn standard(with_zeta: bool) -> Self {
        let signed = |xs: &[f64]| -> Vec<f64> { xs.iter().flat_map(|&x| [-x, x]).collect() };
        let zetas: Vec<f64> = if with_zeta { STANDARD_ZETA.to_vec() } else { vec![0.0] };
        let mut points = Vec::new();
        for &t in &signed(&STANDARD_T) {
            for &r in &signed(&STANDARD_R) {
                for &z1 in &zetas {
                    for &z2 in &zetas {
                        points.push(FieldPoint::with_zeta(t, r, z1, z2));
                    }
                }
            }
        }
        Self { points }
    }

    pub fn for_family(family: CorrelatorFamily) -> Self {
        Self::standard(family.uses_zeta())
    }

    pub fn from_points(points: Vec<FieldPoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sub-region of a family's domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    Natural,
    /// `r/t > 0` in addition to the natural domain.
    PositiveRatio,
    /// `r/t < 0` in addition to the natural domain.
    NegativeRatio,
}

impl Region {
    fn admits(self, p: &FieldPoint) -> bool {
        match self {
            Region::Natural => true,
            Region::PositiveRatio => p.ratio() > GRID_MARGIN,
            Region::NegativeRatio => p.ratio() < -GRID_MARGIN,
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Region::Natural => "",
            Region::PositiveRatio => " and r/t > 0",
            Region::NegativeRatio => " and r/t < 0",
        }
    }
}

/// Something with a value and first partials at each point, plus parameter
/// values for generator coefficients.
pub trait Field: Sync {
    fn jet(&self, p: &FieldPoint) -> Result<Jet>;
    fn parameters(&self) -> Assignment;
    fn label(&self) -> String;
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl Field for CorrelatorSpec {
    fn jet(&self, p: &FieldPoint) -> Result<Jet> {
        CorrelatorSpec::jet(self, p)
    }

    fn parameters(&self) -> Assignment {
        let p = &self.params;
        Assignment::from([
            (Var::X, c(p.x1)),
            (Var::X1, c(p.x1)),
            (Var::X2, c(p.x2)),
            (Var::Gamma, c(p.gamma1)),
            (Var::Gamma1, c(p.gamma1)),
            (Var::Gamma2, c(p.gamma2)),
            (Var::Nu, c(p.nu_sum())),
            (Var::Nu1, c(p.nu1)),
            (Var::Nu2, c(p.nu2)),
            (Var::C, c(p.c)),
            (Var::M1, c(p.m1)),
            (Var::Mu, c(p.mu)),
        ])
    }

    fn label(&self) -> String {
        self.family.label().to_string()
    }
}

/// Boundary margins of a family's natural domain.
fn margin_ok(spec: &CorrelatorSpec, p: &FieldPoint) -> bool {
    let e = GRID_MARGIN;
    let mu = spec.params.mu;
    let cone = 1.0 + mu * p.ratio();
    match spec.family {
        CorrelatorFamily::Ortho => p.t.hypot(p.r) > e,
        CorrelatorFamily::Schr | CorrelatorFamily::SchrExt => p.t.abs() > e,
        CorrelatorFamily::MetaNaive => p.t.abs() > e && cone > e,
        CorrelatorFamily::MetaFinal | CorrelatorFamily::Cga => p.t.abs() > e && p.r.abs() > e,
        CorrelatorFamily::Dual => {
            let w = Complex64::new(0.5 * (p.zeta1 + p.zeta2) + spec.params.c, cone.max(1e-300).ln() / mu);
            p.t.abs() > e && cone > e && w.norm() > e
        }
    }
}

fn domain_text(family: CorrelatorFamily) -> &'static str {
    match family {
        CorrelatorFamily::Ortho => "t^2 + r^2 > 0",
        CorrelatorFamily::Schr | CorrelatorFamily::SchrExt => "t != 0",
        CorrelatorFamily::MetaNaive => "1 + mu*r/t > 0",
        CorrelatorFamily::MetaFinal | CorrelatorFamily::Cga => "t != 0, r != 0",
        CorrelatorFamily::Dual => "1 + mu*r/t > 0, zeta_+ + c + i*lambda off the branch cut",
    }
}

/// Grid points inside the family domain and the region, at distance at
/// least [`GRID_MARGIN`] from the boundary. Returns the points and a
/// description of the domain.
pub fn restrict(spec: &CorrelatorSpec, region: Region, grid: &Grid) -> (Vec<FieldPoint>, String) {
    let points = grid
        .points
        .iter()
        .copied()
        .filter(|p| region.admits(p) && margin_ok(spec, p) && spec.jet(p).is_ok())
        .collect();
    let text = format!(
        "{{{}{}}} with margin {:e}",
        domain_text(spec.family),
        region.describe(),
        GRID_MARGIN
    );
    (points, text)
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorResidual {
    pub id: String,
    pub max_abs: f64,
    pub max_rel: f64,
    pub worst_point: Option<FieldPoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualReport {
    pub field: String,
    pub domain: String,
    pub points: usize,
    pub body_two_offsets: Vec<(f64, f64)>,
    pub generators: Vec<GeneratorResidual>,
    pub max_abs: f64,
    pub max_rel: f64,
}

impl ResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel <= tol
    }
}

/// Value of the partial selected by a single first-order multi-index.
fn partial(ring_vars: &[Var], index: &[u32], jet: &Jet) -> Result<Complex64> {
    let order: u32 = index.iter().sum();
    if order == 0 {
        return Ok(jet.value);
    }
    if order > 1 {
        return Err(Error::NotFirstOrder(order as usize));
    }
    let pos = index.iter().position(|&k| k == 1).expect("order one");
    let d = &jet.partials;
    Ok(match ring_vars[pos] {
        Var::T | Var::T1 => d.t,
        Var::T2 => -d.t,
        Var::R | Var::R1 => d.r,
        Var::R2 => -d.r,
        Var::Zeta1 => d.zeta1,
        Var::Zeta2 => d.zeta2,
        Var::Mu => d.mu,
        other => {
            return Err(Error::Unsupported(format!(
                "no partial with respect to `{}` for a two-point function",
                other.name()
            )))
        }
    })
}

/// `(|sum|, sum |terms|)` of a generator applied to a field at one point.
pub fn apply_at(op: &DiffOp, jet: &Jet, assignment: &Assignment) -> Result<(f64, f64)> {
    let vars = op.ring().vars().to_vec();
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (index, coef) in op.terms() {
        let term = coef.eval(assignment)? * partial(&vars, index, jet)?;
        total += term;
        scale += term.norm();
    }
    Ok((total.norm(), scale))
}

fn point_assignment(base: &Assignment, p: &FieldPoint, offset: (f64, f64)) -> Assignment {
    let (t2, r2) = offset;
    let mut a = base.clone();
    a.extend([
        (Var::T, c(p.t)),
        (Var::R, c(p.r)),
        (Var::T1, c(p.t + t2)),
        (Var::R1, c(p.r + r2)),
        (Var::T2, c(t2)),
        (Var::R2, c(r2)),
        (Var::Zeta, c(p.zeta1)),
        (Var::Zeta1, c(p.zeta1)),
        (Var::Zeta2, c(p.zeta2)),
    ]);
    a
}

/// Applies every generator at every point (for each position of the second
/// body) and records the worst absolute and relative residuals. The relative
/// residual is `|sum| / max(1, sum |terms|)`.
pub fn ward_residual(
    generators: &[(String, DiffOp)],
    field: &dyn Field,
    points: &[FieldPoint],
    domain: &str,
) -> Result<ResidualReport> {
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for (_, op) in generators {
        if op.order() > 1 {
            return Err(Error::NotFirstOrder(op.order()));
        }
    }
    let base = field.parameters();
    let jets: Vec<Jet> = points.par_iter().map(|p| field.jet(p)).collect::<Result<_>>()?;
    let per_generator: Vec<GeneratorResidual> = generators
        .par_iter()
        .map(|(id, op)| {
            let mut worst = GeneratorResidual {
                id: id.clone(),
                max_abs: 0.0,
                max_rel: 0.0,
                worst_point: None,
            };
            for (p, jet) in points.iter().zip(&jets) {
                for &offset in &BODY_TWO_OFFSETS {
                    let (abs, scale) = apply_at(op, jet, &point_assignment(&base, p, offset))?;
                    let rel = abs / scale.max(1.0);
                    worst.max_abs = worst.max_abs.max(abs);
                    if rel > worst.max_rel || worst.worst_point.is_none() {
                        worst.max_rel = worst.max_rel.max(rel);
                        worst.worst_point = Some(*p);
                    }
                }
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let max_abs = per_generator.iter().map(|g| g.max_abs).fold(0.0, f64::max);
    let max_rel = per_generator.iter().map(|g| g.max_rel).fold(0.0, f64::max);
    Ok(ResidualReport {
        field: field.label(),
        domain: domain.to_string(),
        points: points.len(),
        body_two_offsets: BODY_TWO_OFFSETS.to_vec(),
        generators: per_generator,
        max_abs,
        max_rel,
    })
}

/// [`ward_residual`] on the standard grid restricted to a region.
pub fn ward_residual_on(
    generators: &[(String, DiffOp)],
    spec: &CorrelatorSpec,
    region: Region,
    grid: &Grid,
) -> Result<ResidualReport> {
    let (points, domain) = restrict(spec, region, grid);
    ward_residual(generators, spec, &points, &domain)
}

fn two_body_set(family: Family, with_n: bool) -> Result<Vec<(String, DiffOp)>> {
    let mut out = Vec::new();
    for kind in [Kind::X, Kind::Y] {
        for n in -1..=1 {
            let op = make_generator(&GeneratorSpec::new(family, kind, n))?.two_body()?;
            out.push((format!("{}^[2]", kind.label(n)), op));
        }
    }
    if with_n {
        let op = make_generator(&GeneratorSpec::new(family, Kind::N, 0))?.two_body()?;
        out.push(("N^[2]".to_string(), op));
    }
    Ok(out)
}

/// Two-body `X_n`, `Y_n`, `n in {-1,0,1}`, of the meta-conformal
/// representation.
pub fn meta_ward_generators() -> Result<Vec<(String, DiffOp)>> {
    two_body_set(Family::Meta, false)
}

/// Two-body dual `X_n`, `Y_n`, `n in {-1,0,1}`, and `N`.
pub fn dual_ward_generators() -> Result<Vec<(String, DiffOp)>> {
    two_body_set(Family::MetaDual, true)
}

/// The reduced covariance conditions on `F(zeta1, zeta2, t, r; mu)` left
/// after translation invariance.
pub fn build_reduced_system() -> Result<Vec<(String, DiffOp)>> {
    [
        ("scaling", "t*dt + r*dr + x1 + x2"),
        ("Y_0 covariance", "t*dr + mu*r*dr - i*(dzeta1 + dzeta2)"),
        ("X_1 covariance", "i*r*(dzeta1 - dzeta2) - t*(x1 - x2)"),
        ("Y_1 covariance", "(t + mu*r)*(dzeta1 - dzeta2)"),
        (
            "N covariance",
            "r*dr + (1/2*zeta1 + 1/2*zeta2 + c)*(dzeta1 + dzeta2) - mu*dmu + nu1 + nu2",
        ),
    ]
    .into_iter()
    .map(|(label, text)| Ok((label.to_string(), parse_op_expr(text)?)))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::family::{CorrelatorParams, Partials};

    #[test]
    fn standard_grid_shape() {
        assert_eq!(Grid::standard(false).len(), 48);
        assert_eq!(Grid::standard(true).len(), 48 * 9);
    }

    #[test]
    fn meta_generators_annihilate_naive_form() {
        let spec = CorrelatorSpec::new(CorrelatorFamily::MetaNaive, CorrelatorParams::default().with_gamma(0.75));
        let gens = meta_ward_generators().unwrap();
        let report = ward_residual_on(&gens, &spec, Region::Natural, &Grid::standard(false)).unwrap();
        assert!(report.points > 20);
        assert!(report.max_rel <= 1e-10, "{report:?}");
    }

    #[test]
    fn naive_generators_fail_on_final_form_off_region() {
        let spec = CorrelatorSpec::new(CorrelatorFamily::MetaFinal, CorrelatorParams::default());
        let gens = meta_ward_generators().unwrap();
        let on = ward_residual_on(&gens, &spec, Region::PositiveRatio, &Grid::standard(false)).unwrap();
        assert!(on.max_rel <= 1e-10, "{on:?}");
        let off = ward_residual_on(&gens, &spec, Region::NegativeRatio, &Grid::standard(false)).unwrap();
        assert!(off.max_rel > 1e-3);
    }

    #[test]
    fn dual_generators_annihilate_dual_form() {
        let mut params = CorrelatorParams::default().with_nu(0.7, 1.1);
        params.c = 0.3;
        let spec = CorrelatorSpec::new(CorrelatorFamily::Dual, params);
        let gens = dual_ward_generators().unwrap();
        let report = ward_residual_on(&gens, &spec, Region::Natural, &Grid::standard(true)).unwrap();
        assert!(report.max_rel <= 1e-10, "{report:?}");
        let reduced = build_reduced_system().unwrap();
        let report = ward_residual_on(&reduced, &spec, Region::Natural, &Grid::standard(true)).unwrap();
        assert!(report.max_rel <= 1e-10, "{report:?}");
    }

    struct Scaling<F: Fn(f64, f64) -> (f64, f64, f64) + Sync> {
        x: f64,
        g: F,
    }

    impl<F: Fn(f64, f64) -> (f64, f64, f64) + Sync> Field for Scaling<F> {
        fn jet(&self, p: &FieldPoint) -> Result<Jet> {
            let u = p.ratio();
            let zp = 0.5 * (p.zeta1 + p.zeta2);
            let (g, gu, gz) = (self.g)(u, zp);
            let pre = p.t.powf(-2.0 * self.x);
            let value = pre * g;
            Ok(Jet {
                value: c(value),
                partials: Partials {
                    t: c(-2.0 * self.x / p.t * value - pre * gu * u / p.t),
                    r: c(pre * gu / p.t),
                    zeta1: c(0.5 * pre * gz),
                    zeta2: c(0.5 * pre * gz),
                    mu: c(0.0),
                },
            })
        }
        fn parameters(&self) -> Assignment {
            Assignment::from([(Var::X1, c(self.x)), (Var::X2, c(self.x))])
        }
        fn label(&self) -> String {
            "scaling test".into()
        }
    }

    #[test]
    fn scaling_condition_on_arbitrary_scaling_functions() {
        let scaling = build_reduced_system().unwrap().remove(0);
        let points: Vec<FieldPoint> = Grid::standard(true).points.into_iter().filter(|p| p.t > 0.0).collect();
        let gs: [&(dyn Fn(f64, f64) -> (f64, f64, f64) + Sync); 3] = [
            &|u, z| ((u + z).exp(), (u + z).exp(), (u + z).exp()),
            &|u, _| (1.0 / (1.0 + u * u), -2.0 * u / (1.0 + u * u).powi(2), 0.0),
            &|u, z| (u.sin() * z, u.cos() * z, u.sin()),
        ];
        for g in gs {
            let field = Scaling { x: 0.8, g };
            let report = ward_residual(std::slice::from_ref(&scaling), &field, &points, "t > 0").unwrap();
            assert!(report.max_rel <= 1e-12, "{report:?}");
        }
    }

    #[test]
    fn empty_grid_and_second_order_rejected() {
        let spec = CorrelatorSpec::new(CorrelatorFamily::Ortho, CorrelatorParams::default());
        let gens = meta_ward_generators().unwrap();
        assert_eq!(ward_residual(&gens, &spec, &[], "").unwrap_err(), Error::EmptyGrid);
        let second = vec![("dt^2".to_string(), parse_op_expr("dt^2").unwrap())];
        let p = [FieldPoint::new(1.0, 1.0)];
        assert!(matches!(ward_residual(&second, &spec, &p, ""), Err(Error::NotFirstOrder(2))));
    }
}
