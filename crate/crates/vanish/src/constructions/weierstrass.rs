//! Canonical product with zeros on an integer lattice.
//!
//! Zeros are enumerated as `s, -s, 2s, -2s, ...` and the nth factor is the
//! degree-n elementary factor `E_n(w) = (1 - w) exp(Σ_{j<=n} w^j / j)` at
//! `w = x / a_n`. For `|w| <= 1/2` the dropped factors satisfy
//! `|log E_n(w)| <= 2 |w|^{n+1}`, so the tail decays geometrically once the
//! kept prefix covers `|a_n| <= 2|x|`; real zeros of the truncation inside
//! the window are then exactly the lattice points there.

use rug::Rational;

use crate::error::{Error, Result};
use crate::numkit::{Jet, Real};

use super::{EvalCtx, Evaluated, JetEval};

/// nth lattice zero (1-based): s, -s, 2s, -2s, ...
fn lattice_zero(step: &Rational, n: u32) -> Rational {
    let k = (n as i64 + 1) / 2;
    let sign = if n % 2 == 1 { 1 } else { -1 };
    Rational::from(sign * k) * step.clone()
}

/// Exact membership: is `x` a lattice point?
pub fn on_lattice(step: &Rational, x: &Rational) -> bool {
    let ratio = Rational::from(x / step);
    *ratio.denom() == 1
}

/// Number of factors to keep for arguments of magnitude `<= mag`, and the
/// multiplicative tail bound `e^tau - 1` with `tau = 4 q^{N+2}`,
/// `q = |mag / a_{N+1}| <= 1/2`.
fn plan_factors(step: &Rational, mag: &Rational, ctx: &EvalCtx) -> Result<u32> {
    let cap = ctx.caps.weierstrass_factor_cap;
    let bits = ctx.working_bits();
    let eps = Real::pow2(-(ctx.prec.bits() as i32) - 16, bits);
    let two_mag = Rational::from(2 * mag.clone());
    let mut n = 0u32;
    loop {
        n += 1;
        if n > cap {
            return Err(Error::TailBoundUnachievable(format!(
                "canonical product needs more than {cap} factors here"
            )));
        }
        let a_next = lattice_zero(step, n + 1);
        let a_next_abs = Rational::from(a_next.abs_ref());
        if a_next_abs <= two_mag {
            continue; // the next factor could vanish in the window; keep going
        }
        // q = mag / |a_{N+1}| <= 1/2
        let q = Real::from_rational(&Rational::from(mag / &a_next_abs), bits);
        let tau = q.powi(n as i32 + 2).mul_2exp(2);
        if tau < eps {
            return Ok(n);
        }
    }
}

/// One elementary factor `E_n(x / a_n)` as a value.
fn factor_value(step: &Rational, n: u32, x: &Rational, bits: u32) -> Real {
    let a_n = lattice_zero(step, n);
    let w = Rational::from(x / &a_n);
    let wr = Real::from_rational(&w, bits);
    // Σ_{j<=n} w^j / j by Horner from the top
    let mut acc = Real::zero(bits);
    for j in (1..=n).rev() {
        acc = &(&acc + &Real::from_int(j as i64, bits).recip()) * &wr;
    }
    let exp_part = acc.exp();
    &(&Real::one(bits) - &wr) * &exp_part
}

fn factor_jet(step: &Rational, n: u32, x0: &Rational, order: usize, bits: u32) -> Result<Jet> {
    let a_n = lattice_zero(step, n);
    let x0r = Real::from_rational(x0, bits);
    let a_inv = Real::from_rational(&Rational::from(a_n.recip_ref()), bits);
    // w = x / a_n as a jet
    let w = Jet::linear(x0r.clone(), a_inv, Real::zero(bits), order);
    let mut acc = Jet::zero(x0r.clone(), order);
    for j in (1..=n).rev() {
        acc = acc
            .add_const(&Real::from_int(j as i64, bits).recip())
            .mul(&w)?;
    }
    let (exp_part, _) = acc.exp()?;
    let one_minus_w = Jet::constant(x0r, Real::one(bits), order).sub(&w)?;
    one_minus_w.mul(&exp_part)
}

pub fn eval(step: &Rational, x: &Rational, ctx: &EvalCtx) -> Result<Evaluated> {
    let bits = ctx.working_bits();
    if on_lattice(step, x) {
        return Ok(Evaluated {
            value: Real::zero(bits),
            bound: Real::zero(bits),
            underflow: false,
        });
    }
    let mag = Rational::from(x.abs_ref()).max(step.clone());
    let n_keep = plan_factors(step, &mag, ctx)?;
    let mut product = Real::one(bits);
    for n in 1..=n_keep {
        product = &product * &factor_value(step, n, x, bits);
    }
    // |F - P| <= |P| (e^tau - 1) <= |P| * tau * e^tau with tau below eps
    let eps = Real::pow2(-(ctx.prec.bits() as i32) - 16, bits);
    let bound = &product.abs() * &(&eps * &eps.exp());
    Ok(Evaluated { value: product, bound: bound.bump_up(bits / 2), underflow: false })
}

pub fn jet(step: &Rational, x0: &Rational, order: usize, ctx: &EvalCtx) -> Result<JetEval> {
    let bits = ctx.working_bits();
    let x0r = Real::from_rational(x0, bits);
    // dropped factors must satisfy |a_n| >= 4 R0 for the majorant below
    let r0: Rational = Rational::from(x0.abs_ref()) + 1u32;
    let doubled_r0 = r0.clone() * 2u32;
    let n_geom = (ctx.prec.bits() + 24) as u64;
    let mut n_keep = plan_factors(step, &doubled_r0, ctx)?;
    n_keep = n_keep.max(n_geom.min(u32::MAX as u64) as u32);
    if n_keep > ctx.caps.weierstrass_factor_cap {
        return Err(Error::TailBoundUnachievable(format!(
            "jet of the canonical product needs {n_keep} factors, above the cap"
        )));
    }
    let mut product = Jet::constant(x0r.clone(), Real::one(bits), order);
    for n in 1..=n_keep {
        product = product.mul(&factor_jet(step, n, x0, order, bits)?)?;
    }
    // Majorant of the dropped log-tail around x0: coefficient k of
    // Σ_{n>N} log E_n is at most R0^{-k} 2^{-N+1} when dropped |a_n| >= 4 R0.
    let r0_inv = Real::from_rational(&Rational::from(r0.recip_ref()), bits);
    let scale = Real::pow2(-(n_keep as i32) + 1, bits);
    let mut eps_coeffs = Vec::with_capacity(order + 1);
    let mut cur = scale;
    for _ in 0..=order {
        eps_coeffs.push(cur.clone());
        cur = &cur * &r0_inv;
    }
    let eps_jet = Jet::from_coeffs(
        x0r.clone(),
        eps_coeffs,
        vec![Real::zero(bits); order + 1],
    );
    let (exp_eps, _) = eps_jet.exp()?;
    // delta = exp(eps) - 1 dominates |e^T - 1| coefficientwise
    let delta = exp_eps.add_const(&-Real::one(bits));
    let mut err: Vec<Real> = product.errs().to_vec();
    for k in 0..=order {
        let mut extra = Real::zero(bits);
        for i in 0..=k {
            extra = &extra + &(&product.coeff(i).abs() * &delta.coeff(k - i).abs());
        }
        err[k] = &err[k] + &extra;
    }
    Ok(JetEval {
        jet: Jet::from_coeffs(x0r, product.coeffs().to_vec(), err),
        underflow: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Prec;

    fn ctx() -> EvalCtx {
        EvalCtx::new(Prec::default())
    }

    #[test]
    fn vanishes_exactly_on_lattice() {
        let step = Rational::from(1);
        for k in -3i64..=3 {
            let v = eval(&step, &Rational::from(k), &ctx()).unwrap();
            assert!(v.value.is_zero());
            assert!(v.bound.is_zero());
        }
    }

    #[test]
    fn matches_independent_resummation() {
        // independent oracle: re-accumulate the elementary factors with a
        // separate loop, twice the factor count, at four times the precision
        let step = Rational::from(1);
        let c = ctx();
        for (num, den) in [(1i64, 2i64), (1, 3), (-5, 7)] {
            let x = Rational::from((num, den));
            let v = eval(&step, &x, &c).unwrap();
            let bits = 4096u32;
            let xr = Real::from_rational(&x, bits);
            let mut want = Real::one(bits);
            for n in 1..=600u32 {
                let a_n = lattice_zero(&step, n);
                let w = &xr / &Real::from_rational(&a_n, bits);
                let mut acc = Real::zero(bits);
                for j in (1..=n).rev() {
                    acc = &(&acc + &Real::from_int(j as i64, bits).recip()) * &w;
                }
                want = &want * &(&(&Real::one(bits) - &w) * &acc.exp());
            }
            let diff = (&v.value - &want).abs();
            assert!(
                diff <= Real::pow2(-200, 64),
                "x = {x}: got {:?}, want {want:?}",
                v.value
            );
            assert!(v.bound <= Real::pow2(-260, 64));
        }
    }

    #[test]
    fn truncation_bound_sound_under_precision_doubling() {
        // doubling the precision keeps more factors; the value must move by
        // less than the reported bound
        let step = Rational::from(1);
        let c = ctx();
        let c2 = EvalCtx::new(Prec::new(512).unwrap());
        for (num, den) in [(1i64, 2i64), (7, 3)] {
            let x = Rational::from((num, den));
            let v1 = eval(&step, &x, &c).unwrap();
            let v2 = eval(&step, &x, &c2).unwrap();
            assert!((&v1.value - &v2.value).abs() <= v1.bound);
        }
    }

    #[test]
    fn nonzero_off_lattice_with_margin() {
        let step = Rational::from(1);
        let v = eval(&step, &Rational::from((1, 2)), &ctx()).unwrap();
        assert!(v.value.abs() > v.bound);
    }

    #[test]
    fn jet_order0_matches_eval() {
        let step = Rational::from(1);
        let c = ctx();
        let x = Rational::from((3, 10));
        let v = eval(&step, &x, &c).unwrap();
        let j = jet(&step, &x, 4, &c).unwrap().jet;
        let diff = (&v.value - &j.coeff(0).clone()).abs();
        assert!(diff <= Real::pow2(-200, 64));
    }

    #[test]
    fn jet_derivative_matches_finite_difference() {
        let step = Rational::from(1);
        let c = ctx();
        let x = Rational::from((3, 10));
        let h = Rational::from((1, 1i64 << 40));
        let j = jet(&step, &x, 1, &c).unwrap().jet;
        let vp = eval(&step, &Rational::from(&x + &h), &c).unwrap();
        let vm = eval(&step, &Rational::from(&x - &h), &c).unwrap();
        let fd = &(&vp.value - &vm.value)
            / &Real::from_rational(&Rational::from(2 * h), c.working_bits());
        let diff = (&fd - &j.coeff(1).clone()).abs();
        assert!(diff <= Real::pow2(-60, 64), "fd {fd:?} vs jet {:?}", j.coeff(1));
    }
}
