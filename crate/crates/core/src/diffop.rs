//! Linear differential operators with polynomial coefficients.
//!
//! An operator is a finite sum `sum_a p_a(vars) * d^a` where `d^a` is a
//! partial-derivative multi-index over the differentiable variables of the
//! ring. Operators act on the left: `a.compose(b)` applies `b` first.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactalg::{join_signed, GaussianRational, Poly, Ring, Var};

/// Derivative orders, dense over the ring's variables.
pub type MultiIndex = Box<[u32]>;

/// Which particle a one-body operator is lifted onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BodyIndex {
    One,
    Two,
}

impl BodyIndex {
    pub fn value(self) -> u8 {
        match self {
            BodyIndex::One => 1,
            BodyIndex::Two => 2,
        }
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct DiffOp {
    ring: Ring,
    terms: BTreeMap<MultiIndex, Poly>,
}

impl DiffOp {
    pub fn zero(ring: &Ring) -> Self {
        Self {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// Multiplication by `p`.
    pub fn scalar(p: Poly) -> Self {
        let ring = p.ring().clone();
        let mut op = Self::zero(&ring);
        op.insert(vec![0; ring.len()].into(), p);
        op
    }

    /// `d/dv`.
    pub fn deriv(ring: &Ring, v: Var) -> Result<Self> {
        Self::term(Poly::one(ring), &[(v, 1)])
    }

    /// `coef * prod d_v^k`.
    pub fn term(coef: Poly, derivs: &[(Var, u32)]) -> Result<Self> {
        let ring = coef.ring().clone();
        let mut idx = vec![0u32; ring.len()];
        for &(v, k) in derivs {
            if !v.is_differentiable() {
                return Err(Error::NotDifferentiable(v.name().to_string()));
            }
            idx[ring.index_of(v)?] += k;
        }
        let mut op = Self::zero(&ring);
        op.insert(idx.into(), coef);
        Ok(op)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending multi-index order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&[u32], &Poly)> {
        self.terms.iter().map(|(a, p)| (&a[..], p))
    }

    pub fn order(&self) -> usize {
        self.terms
            .keys()
            .map(|a| a.iter().map(|&k| k as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Coefficient of `prod d_v^k` (zero if absent).
    pub fn coefficient(&self, derivs: &[(Var, u32)]) -> Result<Poly> {
        let mut idx = vec![0u32; self.ring.len()];
        for &(v, k) in derivs {
            idx[self.ring.index_of(v)?] += k;
        }
        let idx: MultiIndex = idx.into();
        Ok(self.terms.get(&idx).cloned().unwrap_or_else(|| Poly::zero(&self.ring)))
    }

    fn insert(&mut self, idx: MultiIndex, p: Poly) {
        if p.is_zero() {
            return;
        }
        let sum = match self.terms.remove(&idx) {
            Some(existing) => &existing + &p,
            None => p,
        };
        if !sum.is_zero() {
            self.terms.insert(idx, sum);
        }
    }

    pub fn checked_add(&self, other: &DiffOp) -> Result<DiffOp> {
        self.ring.check_same(&other.ring)?;
        let mut out = self.clone();
        for (a, p) in &other.terms {
            out.insert(a.clone(), p.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &DiffOp) -> Result<DiffOp> {
        self.checked_add(&-other)
    }

    /// Left multiplication by a polynomial, `p * self`.
    pub fn mul_poly(&self, p: &Poly) -> Result<DiffOp> {
        self.ring.check_same(p.ring())?;
        let mut out = DiffOp::zero(&self.ring);
        for (a, q) in &self.terms {
            out.insert(a.clone(), p * q);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &GaussianRational) -> DiffOp {
        let mut out = DiffOp::zero(&self.ring);
        for (a, q) in &self.terms {
            out.insert(a.clone(), q.scale(c));
        }
        out
    }

    /// Applies the operator to a polynomial.
    pub fn apply(&self, f: &Poly) -> Result<Poly> {
        self.ring.check_same(f.ring())?;
        let mut out = Poly::zero(&self.ring);
        for (a, p) in &self.terms {
            out = &out + &(p * &derive_multi(f, a, &self.ring)?);
        }
        Ok(out)
    }

    /// `self ∘ other` by the generalised Leibniz rule.
    pub fn compose(&self, other: &DiffOp) -> Result<DiffOp> {
        self.ring.check_same(&other.ring)?;
        let mut out = DiffOp::zero(&self.ring);
        for (alpha, p) in &self.terms {
            let subs = sub_indices(alpha);
            for (beta, q) in &other.terms {
                for gamma in &subs {
                    let weight = multi_binomial(alpha, gamma);
                    let dq = derive_multi(q, gamma, &self.ring)?;
                    if dq.is_zero() {
                        continue;
                    }
                    let idx: MultiIndex = alpha
                        .iter()
                        .zip(gamma.iter())
                        .zip(beta.iter())
                        .map(|((a, g), b)| a - g + b)
                        .collect();
                    out.insert(idx, (p * &dq).scale(&GaussianRational::from_int(weight)));
                }
            }
        }
        Ok(out)
    }

    /// `[self, other] = self∘other − other∘self`.
    pub fn commutator(&self, other: &DiffOp) -> Result<DiffOp> {
        let c = self.compose(other)?.checked_sub(&other.compose(self)?)?;
        if self.order() <= 1 && other.order() <= 1 {
            assert!(c.order() <= 1, "second-order terms survived a first-order commutator");
        }
        Ok(c)
    }

    /// Exact equality within a common ring.
    pub fn equals(&self, other: &DiffOp) -> Result<bool> {
        Ok(self.checked_sub(other)?.is_zero())
    }

    /// Relabels a one-body operator onto body `body`: `t, r, zeta, x, gamma,
    /// nu` gain the body suffix, `mu` and `c` stay shared.
    ///
    /// Each `d_mu` picks up a factor 1/2, so that summing the two lifts of a
    /// first-order operator gives the diagonal restriction of `d_mu1 + d_mu2`
    /// at `mu1 = mu2 = mu`.
    pub fn lift_two_body(&self, body: BodyIndex) -> Result<DiffOp> {
        let b = body.value();
        let ring = &self.ring;
        let mu_pos = ring.index_of(Var::Mu).ok();
        let mut out = DiffOp::zero(ring);
        for (alpha, p) in &self.terms {
            let mut coef = p.relabel(|v| v.for_body(b), Error::AlreadyLifted)?;
            let mut idx = vec![0u32; ring.len()];
            for (i, &k) in alpha.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let target = ring.vars()[i].for_body(b).ok_or(Error::AlreadyLifted)?;
                idx[ring.index_of(target)?] += k;
                if Some(i) == mu_pos {
                    coef = coef.scale(&GaussianRational::ratio(1, 2).powi(k as i32)?);
                }
            }
            out.insert(idx.into(), coef);
        }
        Ok(out)
    }

    /// `lift(self, 1) + lift(self, 2)`.
    pub fn two_body(&self) -> Result<DiffOp> {
        self.lift_two_body(BodyIndex::One)?
            .checked_add(&self.lift_two_body(BodyIndex::Two)?)
    }

    /// Coefficient-wise exact substitution of a parameter or coordinate.
    pub fn substitute(&self, v: Var, value: &GaussianRational) -> Result<DiffOp> {
        let mut out = DiffOp::zero(&self.ring);
        for (a, p) in &self.terms {
            out.insert(a.clone(), p.subst(v, value)?);
        }
        Ok(out)
    }

    /// Coefficient-wise substitution of a polynomial for a parameter.
    pub fn substitute_poly(&self, v: Var, value: &Poly) -> Result<DiffOp> {
        let mut out = DiffOp::zero(&self.ring);
        for (a, p) in &self.terms {
            out.insert(a.clone(), p.subst_poly(v, value)?);
        }
        Ok(out)
    }

    /// The multiplication-operator part.
    pub fn scalar_part(&self) -> Poly {
        let idx: MultiIndex = vec![0u32; self.ring.len()].into();
        self.terms.get(&idx).cloned().unwrap_or_else(|| Poly::zero(&self.ring))
    }

    /// All symbols appearing anywhere in the operator.
    pub fn vars_used(&self) -> Vec<Var> {
        let mut used: Vec<Var> = Vec::new();
        for (a, p) in &self.terms {
            for (i, &k) in a.iter().enumerate() {
                if k > 0 {
                    used.push(self.ring.vars()[i]);
                }
            }
            used.extend(p.vars_used());
        }
        used.sort();
        used.dedup();
        used
    }
}

fn derive_multi(f: &Poly, idx: &[u32], ring: &Ring) -> Result<Poly> {
    let mut out = f.clone();
    for (i, &k) in idx.iter().enumerate() {
        for _ in 0..k {
            if out.is_zero() {
                return Ok(out);
            }
            out = out.diff(ring.vars()[i])?;
        }
    }
    Ok(out)
}

fn sub_indices(alpha: &[u32]) -> Vec<MultiIndex> {
    let mut acc: Vec<Vec<u32>> = vec![Vec::with_capacity(alpha.len())];
    for &a in alpha {
        acc = acc
            .into_iter()
            .flat_map(|prefix| {
                (0..=a).map(move |g| {
                    let mut p = prefix.clone();
                    p.push(g);
                    p
                })
            })
            .collect();
    }
    acc.into_iter().map(Into::into).collect()
}

fn multi_binomial(alpha: &[u32], gamma: &[u32]) -> i64 {
    alpha
        .iter()
        .zip(gamma)
        .map(|(&a, &g)| binomial(a as i64, g as i64))
        .product()
}

pub(crate) fn binomial(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i64, |acc, i| acc * (n - i) / (i + 1))
}

fn derivative_suffix(ring: &Ring, idx: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in idx.iter().enumerate() {
        let name = ring.vars()[i].name();
        match k {
            0 => {}
            1 => parts.push(format!("d{name}")),
            _ => parts.push(format!("d{name}^{k}")),
        }
    }
    parts.join("*")
}

/// Fully expanded form: one `coefficient*monomial*derivatives` per term,
/// highest derivative multi-index first, e.g. `-t*dt - r*dr - x`.
impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (a, p) in self.terms.iter().rev() {
            terms.extend(p.compact_terms(&derivative_suffix(&self.ring, a)));
        }
        f.write_str(&join_signed(terms))
    }
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiffOp({self})")
    }
}

impl Add for &DiffOp {
    type Output = DiffOp;
    fn add(self, rhs: Self) -> DiffOp {
        self.checked_add(rhs).expect("ring mismatch in DiffOp addition")
    }
}

impl Sub for &DiffOp {
    type Output = DiffOp;
    fn sub(self, rhs: Self) -> DiffOp {
        self.checked_sub(rhs).expect("ring mismatch in DiffOp subtraction")
    }
}

impl Neg for &DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        self.scale(&GaussianRational::from_int(-1))
    }
}

impl Neg for DiffOp {
    type Output = DiffOp;
    fn neg(self) -> DiffOp {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring() -> Ring {
        Ring::standard()
    }
    fn v(x: Var) -> Poly {
        Poly::var(&ring(), x).unwrap()
    }
    fn d(x: Var) -> DiffOp {
        DiffOp::deriv(&ring(), x).unwrap()
    }
    fn q(n: i64) -> Poly {
        Poly::int(&ring(), n)
    }
    fn mul(p: Poly, op: &DiffOp) -> DiffOp {
        op.mul_poly(&p).unwrap()
    }

    fn x0() -> DiffOp {
        let a = mul(-v(Var::T), &d(Var::T));
        let b = mul(-v(Var::R), &d(Var::R));
        &(&a + &b) - &DiffOp::scalar(v(Var::X))
    }

    #[test]
    fn leibniz_compositions() {
        let tdt = mul(v(Var::T), &d(Var::T));
        let dtt = DiffOp::term(Poly::one(&ring()), &[(Var::T, 2)]).unwrap();
        // d_t ∘ (t d_t) = d_t + t d_t^2
        let got = d(Var::T).compose(&tdt).unwrap();
        assert_eq!(got, &d(Var::T) + &mul(v(Var::T), &dtt));
        // d_r ∘ (t d_t) = t d_t d_r
        let got = d(Var::R).compose(&tdt).unwrap();
        assert_eq!(got, DiffOp::term(v(Var::T), &[(Var::T, 1), (Var::R, 1)]).unwrap());
        // (t d_t)∘(t d_t) = t d_t + t^2 d_t^2
        let got = tdt.compose(&tdt).unwrap();
        let expect = &tdt + &mul(&v(Var::T) * &v(Var::T), &dtt);
        assert_eq!(got, expect);
    }

    #[test]
    fn euler_operator_squared_on_monomials() {
        // (t d_t)^2 t^k = k^2 t^k: checks the composed operator against two
        // successive applications.
        let tdt = mul(v(Var::T), &d(Var::T));
        let sq = tdt.compose(&tdt).unwrap();
        for k in 0..6u32 {
            let f = v(Var::T).pow(k);
            let twice = tdt.apply(&tdt.apply(&f).unwrap()).unwrap();
            assert_eq!(sq.apply(&f).unwrap(), twice);
            assert_eq!(twice, f.scale(&GaussianRational::from_int((k * k) as i64)));
        }
    }

    #[test]
    fn commutator_basics() {
        let y_minus1 = -d(Var::R);
        // [X_0, Y_-1] = Y_-1
        assert_eq!(x0().commutator(&y_minus1).unwrap(), y_minus1);
        assert!(x0().commutator(&x0()).unwrap().is_zero());
        assert!(x0().equals(&x0()).unwrap());
    }

    #[test]
    fn lifting() {
        let lifted = (-d(Var::T)).lift_two_body(BodyIndex::One).unwrap();
        assert_eq!(lifted, -d(Var::T1));
        let sum = x0().two_body().unwrap();
        let expect = &(&(&mul(-v(Var::T1), &d(Var::T1)) + &mul(-v(Var::R1), &d(Var::R1)))
            + &(&mul(-v(Var::T2), &d(Var::T2)) + &mul(-v(Var::R2), &d(Var::R2))))
            - &DiffOp::scalar(&v(Var::X1) + &v(Var::X2));
        assert_eq!(sum, expect);
        assert_eq!(lifted.lift_two_body(BodyIndex::Two), Err(Error::AlreadyLifted));
    }

    #[test]
    fn shared_mu_derivative_counted_once() {
        let n_mu = mul(v(Var::Mu), &d(Var::Mu));
        let two = n_mu.two_body().unwrap();
        assert_eq!(two, n_mu);
        // acting on mu^3 * t1: the pair operator gives 3 mu^3 t1
        let f = &v(Var::Mu).pow(3) * &v(Var::T1);
        assert_eq!(two.apply(&f).unwrap(), f.scale(&GaussianRational::from_int(3)));
    }

    #[test]
    fn substitution_and_poles() {
        let y1 = {
            let a = &v(Var::T) + &(&v(Var::Mu) * &v(Var::R));
            &mul(-(&a * &a), &d(Var::R)) - &DiffOp::scalar(&(&q(2) * &v(Var::Gamma)) * &a)
        };
        let contracted = y1.substitute(Var::Mu, &GaussianRational::zero()).unwrap();
        let expect = &mul(-(&v(Var::T) * &v(Var::T)), &d(Var::R)) - &DiffOp::scalar(&(&q(2) * &v(Var::Gamma)) * &v(Var::T));
        assert_eq!(contracted, expect);
        let pole = DiffOp::scalar(Poly::monomial(&ring(), GaussianRational::one(), &[(Var::Mu, -1)]).unwrap());
        assert!(matches!(pole.substitute(Var::Mu, &GaussianRational::zero()), Err(Error::PoleAtContraction(_))));
    }

    #[test]
    fn printing() {
        assert_eq!(x0().to_string(), "-t*dt - r*dr - x");
        assert_eq!(DiffOp::zero(&ring()).to_string(), "0");
        let second = DiffOp::term(q(3), &[(Var::T, 2), (Var::R, 1)]).unwrap();
        assert_eq!(second.to_string(), "3*dt^2*dr");
    }

    #[test]
    fn not_differentiable() {
        assert_eq!(DiffOp::deriv(&ring(), Var::Gamma), Err(Error::NotDifferentiable("gamma".into())));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(6, 0), 1);
        assert_eq!(binomial(3, 4), 0);
    }
}
