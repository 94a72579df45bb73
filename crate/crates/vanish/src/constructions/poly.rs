//! Multivariate polynomials with exact rational coefficients.
//!
//! These drive both the algebra generators (`P(E_{r_1}, ..., E_{r_d})`) and
//! the `PolyCombine` expression node. Generator polynomials must carry no
//! constant term.

use std::collections::BTreeMap;
use std::fmt;

use rug::Rational;

use crate::error::{Error, Result};
use crate::numkit::rat::{format_rational, parse_rational};
use crate::numkit::{Jet, Real};

/// Exponent pattern of one monomial; trailing zeros are trimmed.
pub type Monomial = Vec<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    /// monomial -> nonzero coefficient
    terms: BTreeMap<Monomial, Rational>,
}

fn trim(mut m: Monomial) -> Monomial {
    while m.last() == Some(&0) {
        m.pop();
    }
    m
}

impl MultiPoly {
    pub fn zero() -> MultiPoly {
        MultiPoly { terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(terms: I) -> MultiPoly
    where
        I: IntoIterator<Item = (Rational, Monomial)>,
    {
        let mut map: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (c, m) in terms {
            if c == 0 {
                continue;
            }
            let key = trim(m);
            let slot = map.entry(key).or_insert_with(Rational::new);
            *slot += c;
        }
        map.retain(|_, c| *c != 0);
        MultiPoly { terms: map }
    }

    /// Single variable `v_i` (0-based).
    pub fn var(i: usize) -> MultiPoly {
        let mut m = vec![0u32; i + 1];
        m[i] = 1;
        MultiPoly::from_terms([(Rational::from(1), m)])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_constant_term(&self) -> bool {
        self.terms.contains_key(&Vec::new())
    }

    /// Number of variables actually referenced.
    pub fn arity(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Reject polynomials with a constant term (generator precondition).
    pub fn require_no_constant_term(&self) -> Result<()> {
        if self.has_constant_term() {
            Err(Error::ConstantTermPresent)
        } else {
            Ok(())
        }
    }

    /// Evaluate over (value, bound) pairs; the result bound is the triangle
    /// inequality over all monomials, cancellation-free.
    pub fn eval_with_bounds(&self, args: &[(Real, Real)], bits: u32) -> (Real, Real) {
        let mut value = Real::zero(bits);
        let mut bound = Real::zero(bits);
        for (m, c) in &self.terms {
            let mut term = Real::from_rational(c, bits);
            let mut term_hi = term.abs();
            let mut term_center = term.abs();
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let (v, b) = &args[i];
                let va = v.abs();
                let hi = &va + b;
                for _ in 0..e {
                    term = &term * v;
                    term_hi = &term_hi * &hi;
                    term_center = &term_center * &va;
                }
            }
            value = &value + &term;
            bound = &bound + &(&term_hi - &term_center);
        }
        (value, bound)
    }

    /// Evaluate over jets.
    pub fn eval_jets(&self, args: &[Jet], x0: &Real, order: usize) -> Result<Jet> {
        let mut acc = Jet::zero(x0.clone(), order);
        for (m, c) in &self.terms {
            let mut term: Option<Jet> = None;
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let factor = args[i].pow_int(e)?;
                term = Some(match term {
                    None => factor,
                    Some(t) => t.mul(&factor)?,
                });
            }
            let term = match term {
                None => Jet::constant(x0.clone(), Real::one(x0.prec()), order),
                Some(t) => t,
            };
            let scaled = term.scale(&Real::from_rational(c, x0.prec()));
            acc = acc.add(&scaled)?;
        }
        Ok(acc)
    }

    /// Document form: a JSON array of `[coefficient, [exponents...]]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                serde_json::json!([format_rational(c), m])
            })
            .collect();
        serde_json::Value::Array(rows)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<MultiPoly> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Parse("polynomial must be an array of [coeff, exponents] pairs".into()))?;
        let mut terms = Vec::new();
        for row in rows {
            let pair = row
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse("each polynomial term is a [coeff, exponents] pair".into()))?;
            let c = match &pair[0] {
                serde_json::Value::String(s) => parse_rational(s)?,
                serde_json::Value::Number(n) => parse_rational(&n.to_string())?,
                other => return Err(Error::Parse(format!("bad coefficient {other}"))),
            };
            let exps = pair[1]
                .as_array()
                .ok_or_else(|| Error::Parse("exponents must be an array".into()))?
                .iter()
                .map(|e| {
                    e.as_u64()
                        .map(|x| x as u32)
                        .ok_or_else(|| Error::Parse("exponents must be nonnegative integers".into()))
                })
                .collect::<Result<Vec<u32>>>()?;
            terms.push((c, exps));
        }
        Ok(MultiPoly::from_terms(terms))
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", format_rational(c))?;
            for (i, &e) in m.iter().enumerate() {
                if e == 1 {
                    write!(f, "*v{}", i + 1)?;
                } else if e > 1 {
                    write!(f, "*v{}^{}", i + 1, e)?;
                }
            }
        }
        Ok(())
    }
}
