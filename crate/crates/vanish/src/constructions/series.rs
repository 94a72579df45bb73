//! The two explicit series and their certified truncations.
//!
//! * `lerch(a, x) = Σ_{n≥1} cos(aⁿ x)/n!` for odd `a ≥ 3`: smooth, bounded,
//!   nowhere analytic. Value tail `Σ_{n>N} 1/n! ≤ 2/(N+1)!`; order-k jet
//!   tail `Σ_{n>N} a^{nk}/(n! k!) ≤ 2 a^{(N+1)k}/((N+1)! k!)` once the term
//!   ratio `a^k/(n+1)` has dropped below 1/2.
//! * `g(x) = Σ_{n≥1} b_n^{1-n} sin(b_n x)` with `b_n = 2(2 + c_n + (c_{n-1}
//!   + Σ_{j<n} b_j^{n+1-j}))`, `c_n = (n+1)!(n+1)^{n+1}`: bounded with
//!   everywhere-zero Taylor radius. All its tail bounds ride on
//!   `b_{n+1} ≥ 2 b_n`, which is asserted from the computed values.
//!
//! Series arguments like `aⁿ x` get huge; `sin_cos_of_rational` converts the
//! exact rational argument at enough extra precision that MPFR's internal
//! argument reduction stays accurate.

use rug::ops::Pow;
use rug::{Complete, Integer, Rational};

use crate::error::{Error, Result};
use crate::numkit::{Jet, Real};

use super::{EvalCtx, Evaluated, JetEval, TermPolicy};

/// `c_n = (n+1)! (n+1)^{n+1}`, exact.
pub fn c_seq(n: u32) -> Integer {
    assert!(n >= 1);
    let np1 = n + 1;
    Integer::factorial(np1).complete() * Integer::from(np1).pow(np1)
}

/// `b_1..b_upto`, exact and memoized (the digits double per step, so the
/// values are worth keeping). Panics if the doubling growth
/// `b_{n+1} >= 2 b_n` ever failed, since every tail certificate depends on
/// it.
pub fn b_seq(upto: u32) -> Vec<Integer> {
    use std::sync::{Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<Vec<Integer>>> = OnceLock::new();
    assert!(upto >= 1);
    let mut b = CACHE.get_or_init(|| Mutex::new(Vec::new())).lock().expect("b-sequence cache");
    while b.len() < upto as usize {
        let n = b.len() as u32 + 1;
        let inner = if n == 1 {
            Integer::new()
        } else {
            let mut acc = c_seq(n - 1);
            for j in 1..n {
                acc += b[(j - 1) as usize].clone().pow(n + 1 - j);
            }
            acc
        };
        let bn = 2 * (Integer::from(2) + c_seq(n) + inner);
        if let Some(prev) = b.last() {
            assert!(
                bn >= Integer::from(2) * prev,
                "b-sequence doubling failed at n = {n}"
            );
        }
        b.push(bn);
    }
    b[..upto as usize].to_vec()
}

/// `sin` and `cos` of an exact rational, accurate to `bits` even when the
/// argument is enormous.
pub fn sin_cos_of_rational(arg: &Rational, bits: u32) -> (Real, Real) {
    if *arg == 0 {
        return (Real::zero(bits), Real::one(bits));
    }
    let mag = arg.numer().significant_bits() as i64 - arg.denom().significant_bits() as i64;
    let w = (bits as i64 + mag.max(0) + 32).min(1 << 24) as u32;
    let a = Real::from_rational(arg, w);
    let (s, c) = a.sin_cos();
    (s.round_to(bits), c.round_to(bits))
}

/// kth derivative of `cos` at angle with (sin, cos) = (s, c):
/// cycle cos, -sin, -cos, sin.
fn cos_deriv_cycle(k: usize, s: &Real, c: &Real) -> Real {
    match k % 4 {
        0 => c.clone(),
        1 => s.neg_ref(),
        2 => c.neg_ref(),
        _ => s.clone(),
    }
}

/// kth derivative of `sin`: cycle sin, cos, -sin, -cos.
fn sin_deriv_cycle(k: usize, s: &Real, c: &Real) -> Real {
    match k % 4 {
        0 => s.clone(),
        1 => c.clone(),
        2 => s.neg_ref(),
        _ => c.neg_ref(),
    }
}

fn validate_lerch_base(base: u32) -> Result<()> {
    if base < 3 || base % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "series base must be an odd integer >= 3, got {base}"
        )));
    }
    Ok(())
}

pub fn lerch_eval(base: u32, x: &Rational, ctx: &EvalCtx) -> Result<Evaluated> {
    validate_lerch_base(base)?;
    let bits = ctx.working_bits();
    let eps = Real::pow2(-(ctx.prec.bits() as i32) - 16, bits);
    let mut sum = Real::zero(bits);
    let mut fact = Integer::from(1);
    let mut apow = Integer::from(1);
    let mut n = 0u32;
    let tail = loop {
        n += 1;
        fact *= n;
        apow *= base;
        let arg = Rational::from(&apow * x);
        let (_, c) = sin_cos_of_rational(&arg, bits);
        sum = &sum + &(&c / &Real::from_integer(&fact, bits));
        // tail after n terms: 2/(n+1)!
        let next_fact = fact.clone() * (n + 1);
        let t = (&Real::from_int(2, bits)) / &Real::from_integer(&next_fact, bits);
        if t < eps {
            break t;
        }
        if n > 1_000_000 {
            return Err(Error::TailBoundUnachievable(
                "series truncation did not converge within the term cap".into(),
            ));
        }
    };
    Ok(Evaluated { value: sum, bound: tail.bump_up(bits / 2), underflow: false })
}

pub fn lerch_jet(base: u32, x0: &Rational, order: usize, ctx: &EvalCtx) -> Result<JetEval> {
    validate_lerch_base(base)?;
    if order > ctx.caps.lerch_order_cap {
        return Err(Error::TailBoundUnachievable(format!(
            "an order-{order} jet of the cosine series needs about {}^{order} terms; the cap is order {}",
            base, ctx.caps.lerch_order_cap
        )));
    }
    let bits = ctx.working_bits();
    let eps = Real::pow2(-(ctx.prec.bits() as i32) - 16, bits);
    // beyond n_ratio the term ratio is <= 1/2 for every k <= order
    let n_ratio = 2 * (base as u64).pow(order as u32);
    let mut coeffs = vec![Real::zero(bits); order + 1];
    let mut fact = Integer::from(1);
    let mut apow = Integer::from(1);
    let kfacts: Vec<Real> = (0..=order)
        .map(|k| Real::from_integer(&Integer::factorial(k as u32).complete(), bits))
        .collect();
    let mut n = 0u64;
    loop {
        n += 1;
        fact *= n as u32;
        apow *= base;
        let arg = Rational::from(&apow * x0);
        let (s, c) = sin_cos_of_rational(&arg, bits);
        let apow_r = Real::from_integer(&apow, bits);
        let inv_fact = Real::from_integer(&fact, bits).recip();
        let mut apow_k = Real::one(bits);
        for k in 0..=order {
            let rot = cos_deriv_cycle(k, &s, &c);
            let contrib = &(&(&rot * &apow_k) * &inv_fact) / &kfacts[k];
            coeffs[k] = &coeffs[k] + &contrib;
            if k < order {
                apow_k = &apow_k * &apow_r;
            }
        }
        if n >= n_ratio {
            // tail for the highest order controls all lower ones here
            let t = jet_tail(base, n, order, &fact, &kfacts, bits);
            if t < eps {
                break;
            }
        }
        if n > 2_000_000 {
            return Err(Error::TailBoundUnachievable(
                "series truncation did not converge within the term cap".into(),
            ));
        }
    }
    let err: Vec<Real> = (0..=order)
        .map(|k| jet_tail(base, n, k, &fact, &kfacts, bits).bump_up(bits / 2))
        .collect();
    let x0r = Real::from_rational(x0, bits);
    Ok(JetEval {
        jet: Jet::from_coeffs(x0r, coeffs, err),
        underflow: false,
    })
}

/// `2 a^{(n+1)k} / ((n+1)! k!)`, the order-k coefficient tail after `n`
/// terms (valid once the term ratio is below 1/2).
fn jet_tail(base: u32, n: u64, k: usize, fact_n: &Integer, kfacts: &[Real], bits: u32) -> Real {
    let next_fact = Real::from_integer(&(fact_n.clone() * (n as u32 + 1)), bits);
    let a_pow = Real::from_integer(&Integer::from(base).pow((n as u32 + 1) * k as u32), bits);
    &(&(&Real::from_int(2, bits) * &a_pow) / &next_fact) / &kfacts[k]
}

/// Certified upper bound for `sup |lerch|`: termwise `|cos| <= 1` gives
/// `Σ 1/n! = e - 1`, rounded up.
pub fn lerch_sup_bound(base: u32, ctx: &EvalCtx) -> Result<Real> {
    validate_lerch_base(base)?;
    let bits = ctx.working_bits();
    let e_minus_1 = &Real::one(bits).exp() - &Real::one(bits);
    Ok(e_minus_1.bump_up(bits / 2))
}

/// Certified upper bound for `sup |lerch^{(k)}|`: `Σ a^{nk}/n! <= e^{a^k}`.
pub fn lerch_deriv_sup(base: u32, k: usize, ctx: &EvalCtx) -> Result<Real> {
    validate_lerch_base(base)?;
    let bits = ctx.working_bits();
    let ak = Real::from_integer(&Integer::from(base).pow(k as u32), bits);
    let (v, _) = ak.exp_checked()?;
    Ok(v.bump_up(bits / 2))
}

/// Resolve the term-count policy for evaluating `g` itself.
fn g_eval_terms(policy: &TermPolicy, ctx: &EvalCtx) -> Result<(u32, Vec<Integer>)> {
    let cap = ctx.caps.pringsheim_term_cap;
    match policy {
        TermPolicy::Fixed(k) => {
            if *k < 1 || *k > cap {
                return Err(Error::TailBoundUnachievable(format!(
                    "term count {k} outside 1..={cap} (the digits of b_n double per term)"
                )));
            }
            Ok((*k, b_seq(*k + 1)))
        }
        TermPolicy::Auto => {
            let bits = ctx.working_bits();
            let eps = Real::pow2(-(ctx.prec.bits() as i32) - 16, bits);
            let b = b_seq(cap + 1);
            for k in 3..=cap {
                let t = g_value_tail(&b, k, bits);
                if t < eps {
                    return Ok((k, b));
                }
            }
            Err(Error::TailBoundUnachievable(format!(
                "value tail still above 2^-(p+16) at the term cap {cap}"
            )))
        }
    }
}

/// `2 b_{K+1}^{-K}`, the value tail after `K` terms.
fn g_value_tail(b: &[Integer], terms: u32, bits: u32) -> Real {
    Real::from_integer(&b[terms as usize], bits).powi(-(terms as i32))
        .mul_2exp(1)
}

pub fn pringsheim_eval(policy: &TermPolicy, x: &Rational, ctx: &EvalCtx) -> Result<Evaluated> {
    let bits = ctx.working_bits();
    let (terms, b) = g_eval_terms(policy, ctx)?;
    let mut sum = Real::zero(bits);
    for n in 1..=terms {
        let bn = &b[(n - 1) as usize];
        let arg = Rational::from(bn * x);
        let (s, _) = sin_cos_of_rational(&arg, bits);
        // b_n^{1-n}
        let weight = Real::from_integer(bn, bits).powi(1 - n as i32);
        sum = &sum + &(&weight * &s);
    }
    let tail = g_value_tail(&b, terms, bits);
    Ok(Evaluated { value: sum, bound: tail.bump_up(bits / 2), underflow: false })
}

pub fn pringsheim_jet(
    policy: &TermPolicy,
    x0: &Rational,
    order: usize,
    ctx: &EvalCtx,
) -> Result<JetEval> {
    let bits = ctx.working_bits();
    let cap = ctx.caps.pringsheim_term_cap;
    let min_terms = order as u32 + 2;
    let terms = match policy {
        TermPolicy::Fixed(k) => {
            if *k < min_terms {
                return Err(Error::TailBoundUnachievable(format!(
                    "order-{order} jet tails certify only with at least {min_terms} terms, got {k}"
                )));
            }
            *k
        }
        TermPolicy::Auto => (order as u32 + 3).max(4),
    };
    if terms > cap {
        return Err(Error::TailBoundUnachievable(format!(
            "term count {terms} above the cap {cap} (the digits of b_n double per term)"
        )));
    }
    let b = b_seq(terms + 1);
    let kfacts: Vec<Real> = (0..=order)
        .map(|k| Real::from_integer(&Integer::factorial(k as u32).complete(), bits))
        .collect();
    let mut coeffs = vec![Real::zero(bits); order + 1];
    for n in 1..=terms {
        let bn = &b[(n - 1) as usize];
        let arg = Rational::from(bn * x0);
        let (s, c) = sin_cos_of_rational(&arg, bits);
        let bn_r = Real::from_integer(bn, bits);
        let weight = bn_r.powi(1 - n as i32);
        let mut bn_k = Real::one(bits);
        for k in 0..=order {
            let rot = sin_deriv_cycle(k, &s, &c);
            let contrib = &(&(&rot * &bn_k) * &weight) / &kfacts[k];
            coeffs[k] = &coeffs[k] + &contrib;
            if k < order {
                bn_k = &bn_k * &bn_r;
            }
        }
    }
    // order-k tail: 2 b_{K+1}^{k-K} / k!
    let b_next = Real::from_integer(&b[terms as usize], bits);
    let err: Vec<Real> = (0..=order)
        .map(|k| {
            (&b_next.powi(k as i32 - terms as i32).mul_2exp(1) / &kfacts[k]).bump_up(bits / 2)
        })
        .collect();
    let x0r = Real::from_rational(x0, bits);
    Ok(JetEval {
        jet: Jet::from_coeffs(x0r, coeffs, err),
        underflow: false,
    })
}

/// Certified upper bound for `sup |g|`: `Σ_{n<=K} b_n^{1-n} + 2 b_{K+1}^{-K}`.
pub fn pringsheim_sup_bound(policy: &TermPolicy, ctx: &EvalCtx) -> Result<Real> {
    let bits = ctx.working_bits();
    let (terms, b) = g_eval_terms(policy, ctx)?;
    let mut sum = Real::zero(bits);
    for n in 1..=terms {
        sum = &sum + &Real::from_integer(&b[(n - 1) as usize], bits).powi(1 - n as i32);
    }
    sum = &sum + &g_value_tail(&b, terms, bits);
    Ok(sum.bump_up(bits / 2))
}

/// Certified upper bound for `sup |g^{(k)}|`:
/// `Σ_{n<=K} b_n^{1-n+k} + 2 b_{K+1}^{1+k-(K+1)}` with `K >= k+2`.
pub fn pringsheim_deriv_sup(k: usize, ctx: &EvalCtx) -> Result<Real> {
    let bits = ctx.working_bits();
    let terms = (k as u32 + 3).max(4);
    if terms > ctx.caps.pringsheim_term_cap {
        return Err(Error::TailBoundUnachievable(format!(
            "derivative sup bound of order {k} needs {terms} terms, above the cap"
        )));
    }
    let b = b_seq(terms + 1);
    let mut sum = Real::zero(bits);
    for n in 1..=terms {
        sum = &sum + &Real::from_integer(&b[(n - 1) as usize], bits).powi(1 + k as i32 - n as i32);
    }
    let tail = Real::from_integer(&b[terms as usize], bits)
        .powi(k as i32 - terms as i32)
        .mul_2exp(1);
    sum = &sum + &tail;
    Ok(sum.bump_up(bits / 2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::Prec;

    fn ctx() -> EvalCtx {
        EvalCtx::new(Prec::default())
    }

    #[test]
    fn integer_recursion_hand_values() {
        // c_1 = 2! * 2^2 = 8; b_1 = 2(2 + 8 + 0) = 20
        // c_2 = 3! * 27 = 162; inner = c_1 + b_1^2 = 408; b_2 = 2*572 = 1144
        // c_3 = 4! * 256 = 6144; inner = c_2 + b_1^3 + b_2^2 = 1316898;
        //   b_3 = 2 * 1323044 = 2646088
        assert_eq!(c_seq(1), 8);
        assert_eq!(c_seq(2), 162);
        assert_eq!(c_seq(3), 6144);
        let b = b_seq(3);
        assert_eq!(b[0], 20);
        assert_eq!(b[1], 1144);
        assert_eq!(b[2], 2646088);
    }

    #[test]
    fn b_doubles_up_to_13() {
        let b = b_seq(13);
        for w in b.windows(2) {
            assert!(w[1] >= Integer::from(2) * &w[0]);
        }
    }

    #[test]
    fn lerch_at_zero_is_e_minus_one() {
        let v = lerch_eval(3, &Rational::from(0), &ctx()).unwrap();
        let want = &Real::one(2048).exp() - &Real::one(2048);
        let diff = (&v.value - &want).abs();
        assert!(diff <= Real::pow2(-200, 64), "lerch(0) = {:?}", v.value);
        assert!(v.bound <= Real::pow2(-260, 64));
    }

    #[test]
    fn lerch_rejects_bad_base() {
        assert!(lerch_eval(2, &Rational::from(0), &ctx()).is_err());
        assert!(lerch_eval(1, &Rational::from(0), &ctx()).is_err());
    }

    #[test]
    fn lerch_jet_first_coeff_zero_at_origin() {
        let j = lerch_jet(3, &Rational::from(0), 1, &ctx()).unwrap().jet;
        assert!(j.coeff(1).is_zero(), "sin 0 = 0 termwise");
    }

    #[test]
    fn lerch_second_coeff_closed_form() {
        // coefficient 2 at 0: -(1/2) Σ 9^n/n! = -(e^9 - 1)/2
        let j = lerch_jet(3, &Rational::from(0), 2, &ctx()).unwrap().jet;
        let want = &(&Real::from_int(9, 2048).exp() - &Real::one(2048))
            / &Real::from_int(-2, 2048);
        let diff = (&j.coeff(2).clone() - &want).abs();
        let rel = &diff / &want.abs();
        assert!(rel <= Real::pow2(-100, 64), "coeff2 = {:?}", j.coeff(2));
        assert!(*j.err(2) <= Real::pow2(-260, 64));
    }

    #[test]
    fn lerch_order_cap_enforced() {
        let e = lerch_jet(3, &Rational::from(0), 9, &ctx());
        assert!(matches!(e, Err(Error::TailBoundUnachievable(_))));
    }

    #[test]
    fn g_vanishes_at_zero_exactly() {
        let v = pringsheim_eval(&TermPolicy::Auto, &Rational::from(0), &ctx()).unwrap();
        assert!(v.value.is_zero());
    }

    #[test]
    fn g_first_derivative_at_zero() {
        // g'(0) = Σ b_n^{2-n} = 20 + 1 + 1/b_3 + ... ≈ 21.00000037...
        let j = pringsheim_jet(&TermPolicy::Auto, &Rational::from(0), 1, &ctx())
            .unwrap()
            .jet;
        let d = j.coeff(1);
        let lo = Real::from_rational(&Rational::from((2100000037, 100000000)), 256);
        let hi = Real::from_rational(&Rational::from((2100000038, 100000000)), 256);
        assert!(*d > lo && *d < hi, "g'(0) = {d:?}");
    }

    #[test]
    fn g_sup_bound_bracket() {
        let s = pringsheim_sup_bound(&TermPolicy::Auto, &ctx()).unwrap();
        let lo = Real::from_rational(&Rational::from((10008, 10000)), 256);
        let hi = Real::from_rational(&Rational::from((10009, 10000)), 256);
        assert!(s > lo && s < hi, "sup bound = {s:?}");
    }

    #[test]
    fn g_sup_bound_dominates_samples() {
        use rand::{Rng, SeedableRng};
        let c = ctx();
        let s = pringsheim_sup_bound(&TermPolicy::Auto, &c).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let num = rng.gen_range(-(10i64 << 16)..(10i64 << 16));
            let x = Rational::from((num, 1i64 << 16));
            let v = pringsheim_eval(&TermPolicy::Auto, &x, &c).unwrap();
            assert!(v.value.abs() <= s, "|g({x})| exceeds the sup bound");
        }
    }

    #[test]
    fn g_jet_requires_enough_terms() {
        let e = pringsheim_jet(&TermPolicy::Fixed(3), &Rational::from(0), 5, &ctx());
        assert!(matches!(e, Err(Error::TailBoundUnachievable(_))));
    }

    #[test]
    fn deriv_sup_values() {
        let c = ctx();
        let m1 = pringsheim_deriv_sup(1, &c).unwrap();
        // Σ b_n^{3-n-1}... for k=1: 20 + 1 + 1/b_3 + ..., just above 21
        assert!(m1 > Real::from_int(21, 64));
        assert!(m1 < Real::from_rational(&Rational::from((211, 10)), 64));
        let m2 = pringsheim_deriv_sup(2, &c).unwrap();
        // k=2: b_1^2 + b_2 + 1 + small = 400 + 1144 + 1 + ...
        assert!(m2 > Real::from_int(1545, 64));
        assert!(m2 < Real::from_int(1546, 64));
    }

    #[test]
    fn huge_argument_trig_is_accurate() {
        // sin(3^40 * 1/7) with exact reduction vs. naive low-precision conversion
        let arg = Rational::from((Integer::from(3).pow(40), Integer::from(7)));
        let (s, c) = sin_cos_of_rational(&arg, 256);
        let one = &(&s * &s) + &(&c * &c);
        assert!((&one - &Real::one(256)).abs() <= Real::pow2(-250, 64));
        // against a direct very-high-precision evaluation
        let direct = Real::from_rational(&arg, 4096);
        let (s2, _) = direct.sin_cos();
        assert!((&s - &s2).abs() <= Real::pow2(-250, 64));
    }
}
