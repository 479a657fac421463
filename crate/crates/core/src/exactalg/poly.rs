//! Sparse multivariate Laurent-in-`mu` polynomials over [`GaussianRational`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::ring::{Ring, Var};
use super::scalar::GaussianRational;
use crate::error::{Error, Result};

/// Dense exponent vector over the variables of a [`Ring`].
pub type Exponents = Box<[i32]>;

/// Numeric values for the variables of a polynomial.
pub type Assignment = BTreeMap<Var, Complex64>;

/// A polynomial with no stored zero coefficients. Negative exponents are
/// confined to the invertible symbol `mu`.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    ring: Ring,
    terms: BTreeMap<Exponents, GaussianRational>,
}

impl Poly {
    pub fn zero(ring: &Ring) -> Self {
        Self {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ring: &Ring, c: GaussianRational) -> Self {
        let mut p = Self::zero(ring);
        if !c.is_zero() {
            p.terms.insert(vec![0; ring.len()].into(), c);
        }
        p
    }

    pub fn one(ring: &Ring) -> Self {
        Self::constant(ring, GaussianRational::one())
    }

    pub fn int(ring: &Ring, n: i64) -> Self {
        Self::constant(ring, GaussianRational::from_int(n))
    }

    pub fn var(ring: &Ring, v: Var) -> Result<Self> {
        Self::monomial(ring, GaussianRational::one(), &[(v, 1)])
    }

    /// `coef * prod v^e`. Repeated variables multiply.
    pub fn monomial(ring: &Ring, coef: GaussianRational, powers: &[(Var, i32)]) -> Result<Self> {
        let mut exps = vec![0; ring.len()];
        for &(v, e) in powers {
            exps[ring.index_of(v)?] += e;
        }
        for (i, &e) in exps.iter().enumerate() {
            let v = ring.vars()[i];
            if e < 0 && !v.is_invertible() {
                return Err(Error::NonInvertible(v.name().to_string()));
            }
        }
        let mut p = Self::zero(ring);
        if !coef.is_zero() {
            p.terms.insert(exps.into(), coef);
        }
        Ok(p)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&[i32], &GaussianRational)> {
        self.terms.iter().map(|(e, c)| (&e[..], c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value if the polynomial has no variable dependence.
    pub fn as_constant(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next()?;
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Variables with a nonzero exponent in some term, in ring order.
    pub fn vars_used(&self) -> Vec<Var> {
        self.ring
            .vars()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.terms.keys().any(|e| e[*i] != 0))
            .map(|(_, &v)| v)
            .collect()
    }

    /// Smallest exponent of `v` over all terms (0 for the zero polynomial).
    pub fn min_exponent(&self, v: Var) -> Result<i32> {
        let i = self.ring.index_of(v)?;
        Ok(self.terms.keys().map(|e| e[i]).min().unwrap_or(0).min(0))
    }

    /// Largest total degree, counting negative exponents as negative.
    pub fn total_degree(&self) -> i32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn insert_term(&mut self, e: Exponents, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        self.ring.check_same(&other.ring)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        self.ring.check_same(&other.ring)?;
        let mut out = Poly::zero(&self.ring);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb.iter()).map(|(a, b)| a + b).collect();
                out.insert_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> Poly {
        let mut out = Poly::zero(&self.ring);
        if c.is_zero() {
            return out;
        }
        for (e, k) in &self.terms {
            out.terms.insert(e.clone(), k * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one(&self.ring);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative with respect to a coordinate.
    pub fn diff(&self, v: Var) -> Result<Poly> {
        if !v.is_differentiable() {
            return Err(Error::NotDifferentiable(v.name().to_string()));
        }
        let i = self.ring.index_of(v)?;
        let mut out = Poly::zero(&self.ring);
        for (e, c) in &self.terms {
            let k = e[i];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.insert_term(e2, c * &GaussianRational::from_int(k as i64));
        }
        Ok(out)
    }

    /// Replaces `v` by an exact value.
    pub fn subst(&self, v: Var, value: &GaussianRational) -> Result<Poly> {
        let i = self.ring.index_of(v)?;
        let mut out = Poly::zero(&self.ring);
        for (e, c) in &self.terms {
            let k = e[i];
            if k < 0 && value.is_zero() {
                return Err(Error::PoleAtContraction(v.name().to_string()));
            }
            let mut e2 = e.clone();
            e2[i] = 0;
            out.insert_term(e2, c * &value.powi(k)?);
        }
        Ok(out)
    }

    /// Replaces `v` by a polynomial. `v` must occur with non-negative powers
    /// only, unless `value` is a single monomial.
    pub fn subst_poly(&self, v: Var, value: &Poly) -> Result<Poly> {
        self.ring.check_same(&value.ring)?;
        let i = self.ring.index_of(v)?;
        let inverse = if self.min_exponent(v)? < 0 { Some(value.monomial_inverse()?) } else { None };
        let mut out = Poly::zero(&self.ring);
        for (e, c) in &self.terms {
            let k = e[i];
            let mut e2 = e.clone();
            e2[i] = 0;
            let rest = Poly {
                ring: self.ring.clone(),
                terms: BTreeMap::from([(e2, c.clone())]),
            };
            let factor = if k >= 0 {
                value.pow(k as u32)
            } else {
                inverse.as_ref().expect("inverse computed for negative powers").pow((-k) as u32)
            };
            out = &out + &(&rest * &factor);
        }
        Ok(out)
    }

    fn monomial_inverse(&self) -> Result<Poly> {
        if self.terms.len() != 1 {
            return Err(Error::Unsupported("inverse of a non-monomial polynomial".into()));
        }
        let (e, c) = self.terms.iter().next().expect("one term");
        let neg: Exponents = e.iter().map(|k| -k).collect();
        for (idx, &k) in neg.iter().enumerate() {
            let var = self.ring.vars()[idx];
            if k < 0 && !var.is_invertible() {
                return Err(Error::NonInvertible(var.name().to_string()));
            }
        }
        Ok(Poly {
            ring: self.ring.clone(),
            terms: BTreeMap::from([(neg, c.inv()?)]),
        })
    }

    /// Renames variables through `map`; `None` aborts with `on_fail`.
    pub fn relabel(&self, map: impl Fn(Var) -> Option<Var>, on_fail: Error) -> Result<Poly> {
        let mut out = Poly::zero(&self.ring);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; self.ring.len()];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let target = map(self.ring.vars()[i]).ok_or_else(|| on_fail.clone())?;
                e2[self.ring.index_of(target)?] += k;
            }
            out.insert_term(e2.into(), c.clone());
        }
        Ok(out)
    }

    /// Floating-point evaluation.
    pub fn eval(&self, assignment: &Assignment) -> Result<Complex64> {
        let used = self.vars_used();
        let mut values = vec![Complex64::new(0.0, 0.0); self.ring.len()];
        for v in used {
            let i = self.ring.index_of(v)?;
            let value = *assignment
                .get(&v)
                .ok_or_else(|| Error::MissingAssignment(v.name().to_string()))?;
            if value == Complex64::new(0.0, 0.0) && self.min_exponent(v)? < 0 {
                return Err(Error::PoleAtContraction(v.name().to_string()));
            }
            values[i] = value;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut term = c.to_complex();
            for (i, &k) in e.iter().enumerate() {
                if k != 0 {
                    term *= values[i].powi(k);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Fully explicit form with every coefficient written as `(re+imi)`,
    /// e.g. `(2+0i)*t^2*mu^-1`.
    pub fn to_canonical(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mono = format_monomial(&self.ring, e);
                if mono.is_empty() {
                    c.to_canonical()
                } else {
                    format!("{}*{}", c.to_canonical(), mono)
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Compact term strings in descending exponent order; used by the
    /// operator printer.
    pub(crate) fn compact_terms(&self, suffix: &str) -> Vec<String> {
        self.terms
            .iter()
            .rev()
            .map(|(e, c)| {
                let mut body = format_monomial(&self.ring, e);
                if !suffix.is_empty() {
                    if !body.is_empty() {
                        body.push('*');
                    }
                    body.push_str(suffix);
                }
                compact_term(c, &body)
            })
            .collect()
    }
}

pub(crate) fn compact_term(c: &GaussianRational, body: &str) -> String {
    if body.is_empty() {
        return c.to_string();
    }
    if c.is_one() {
        body.to_string()
    } else if (-c).is_one() {
        format!("-{body}")
    } else {
        format!("{c}*{body}")
    }
}

pub(crate) fn join_signed(terms: Vec<String>) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, t) in terms.into_iter().enumerate() {
        if k == 0 {
            out.push_str(&t);
        } else if let Some(rest) = t.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&t);
        }
    }
    out
}

fn format_monomial(ring: &Ring, e: &[i32]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.iter().enumerate() {
        let name = ring.vars()[i].name();
        match k {
            0 => {}
            1 => parts.push(name.to_string()),
            _ => parts.push(format!("{name}^{k}")),
        }
    }
    parts.join("*")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_signed(self.compact_terms("")))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

// Operator forms panic on ring mismatch; use the `checked_*` methods when the
// rings are not known to agree.
impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: Self) -> Poly {
        self.checked_add(rhs).expect("ring mismatch in Poly addition")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: Self) -> Poly {
        self.checked_sub(rhs).expect("ring mismatch in Poly subtraction")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: Self) -> Poly {
        self.checked_mul(rhs).expect("ring mismatch in Poly multiplication")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&GaussianRational::from_int(-1))
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Self) -> Poly {
                (&self).$m(&rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);
