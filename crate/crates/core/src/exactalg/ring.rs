//! Variable inventory and polynomial rings over it.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Every symbol the toolkit knows about.
///
/// Coordinates (`t`, `r`, `zeta`, `mu` and their body-indexed forms) are
/// differentiable; the remaining symbols are constant parameters. Only `mu`
/// may appear with negative exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    R,
    Zeta,
    Mu,
    T1,
    R1,
    Zeta1,
    T2,
    R2,
    Zeta2,
    X,
    Gamma,
    Nu,
    C,
    X1,
    X2,
    Gamma1,
    Gamma2,
    Nu1,
    Nu2,
    M1,
}

/// Descriptive view of a [`Var`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarSymbol {
    pub name: &'static str,
    pub differentiable: bool,
    pub invertible: bool,
}

impl Var {
    pub const ALL: [Var; 21] = [
        Var::T,
        Var::R,
        Var::Zeta,
        Var::Mu,
        Var::T1,
        Var::R1,
        Var::Zeta1,
        Var::T2,
        Var::R2,
        Var::Zeta2,
        Var::X,
        Var::Gamma,
        Var::Nu,
        Var::C,
        Var::X1,
        Var::X2,
        Var::Gamma1,
        Var::Gamma2,
        Var::Nu1,
        Var::Nu2,
        Var::M1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::R => "r",
            Var::Zeta => "zeta",
            Var::Mu => "mu",
            Var::T1 => "t1",
            Var::R1 => "r1",
            Var::Zeta1 => "zeta1",
            Var::T2 => "t2",
            Var::R2 => "r2",
            Var::Zeta2 => "zeta2",
            Var::X => "x",
            Var::Gamma => "gamma",
            Var::Nu => "nu",
            Var::C => "c",
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::Gamma1 => "gamma1",
            Var::Gamma2 => "gamma2",
            Var::Nu1 => "nu1",
            Var::Nu2 => "nu2",
            Var::M1 => "M1",
        }
    }

    /// Looks a symbol up by its ASCII name or a Greek alias (`μ`, `γ1`, ...).
    pub fn from_name(name: &str) -> Option<Var> {
        let ascii = name
            .replace('μ', "mu")
            .replace('ζ', "zeta")
            .replace('γ', "gamma")
            .replace('ν', "nu");
        Var::ALL.into_iter().find(|v| v.name() == ascii)
    }

    pub fn is_differentiable(self) -> bool {
        matches!(
            self,
            Var::T
                | Var::R
                | Var::Zeta
                | Var::Mu
                | Var::T1
                | Var::R1
                | Var::Zeta1
                | Var::T2
                | Var::R2
                | Var::Zeta2
        )
    }

    pub fn is_invertible(self) -> bool {
        self == Var::Mu
    }

    pub fn symbol(self) -> VarSymbol {
        VarSymbol {
            name: self.name(),
            differentiable: self.is_differentiable(),
            invertible: self.is_invertible(),
        }
    }

    /// One-body symbols relabelled for body `1` or `2`; `mu` and `c` are
    /// shared and map to themselves. Returns `None` for symbols that are
    /// already body-indexed.
    pub fn for_body(self, body: u8) -> Option<Var> {
        let first = body == 1;
        Some(match self {
            Var::T => pick(first, Var::T1, Var::T2),
            Var::R => pick(first, Var::R1, Var::R2),
            Var::Zeta => pick(first, Var::Zeta1, Var::Zeta2),
            Var::X => pick(first, Var::X1, Var::X2),
            Var::Gamma => pick(first, Var::Gamma1, Var::Gamma2),
            Var::Nu => pick(first, Var::Nu1, Var::Nu2),
            Var::Mu | Var::C => self,
            _ => return None,
        })
    }
}

fn pick(first: bool, a: Var, b: Var) -> Var {
    if first {
        a
    } else {
        b
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// An ordered set of variables; exponent vectors and derivative multi-indices
/// are dense over this list.
#[derive(Clone)]
pub struct Ring {
    vars: Arc<[Var]>,
}

impl Ring {
    pub fn new(vars: &[Var]) -> Result<Self> {
        let mut seen = Vec::with_capacity(vars.len());
        for &v in vars {
            if seen.contains(&v) {
                return Err(Error::Unsupported(format!("duplicate variable `{v}` in ring")));
            }
            seen.push(v);
        }
        Ok(Self { vars: seen.into() })
    }

    /// The ring over the full symbol inventory, shared process-wide.
    pub fn standard() -> Self {
        static STANDARD: OnceLock<Ring> = OnceLock::new();
        STANDARD
            .get_or_init(|| Ring { vars: Var::ALL.to_vec().into() })
            .clone()
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index_of(&self, v: Var) -> Result<usize> {
        self.vars
            .iter()
            .position(|&w| w == v)
            .ok_or_else(|| Error::UnknownVariable(v.name().to_string()))
    }

    pub(crate) fn check_same(&self, other: &Ring) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars
    }
}

impl Eq for Ring {}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.vars.iter()).finish()
    }
}

impl Default for Ring {
    fn default() -> Self {
        Self::standard()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inventory_flags() {
        let diff: Vec<_> = Var::ALL.iter().filter(|v| v.is_differentiable()).map(|v| v.name()).collect();
        assert_eq!(diff, ["t", "r", "zeta", "mu", "t1", "r1", "zeta1", "t2", "r2", "zeta2"]);
        let inv: Vec<_> = Var::ALL.iter().filter(|v| v.is_invertible()).collect();
        assert_eq!(inv, [&Var::Mu]);
    }

    #[test]
    fn names_round_trip() {
        for v in Var::ALL {
            assert_eq!(Var::from_name(v.name()), Some(v));
        }
        assert_eq!(Var::from_name("μ"), Some(Var::Mu));
        assert_eq!(Var::from_name("γ2"), Some(Var::Gamma2));
        assert_eq!(Var::from_name("q"), None);
    }

    #[test]
    fn body_relabelling_shares_mu_and_c() {
        assert_eq!(Var::T.for_body(1), Some(Var::T1));
        assert_eq!(Var::Gamma.for_body(2), Some(Var::Gamma2));
        assert_eq!(Var::Mu.for_body(2), Some(Var::Mu));
        assert_eq!(Var::C.for_body(1), Some(Var::C));
        assert_eq!(Var::T1.for_body(1), None);
    }

    #[test]
    fn ring_identity() {
        assert_eq!(Ring::standard(), Ring::standard());
        let small = Ring::new(&[Var::T, Var::Mu]).unwrap();
        assert_ne!(small, Ring::standard());
        assert!(Ring::new(&[Var::T, Var::T]).is_err());
        assert_eq!(small.index_of(Var::R), Err(Error::UnknownVariable("r".into())));
    }
}
