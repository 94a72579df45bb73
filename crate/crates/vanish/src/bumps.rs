//! Flat bump kernels supported on a single gap.
//!
//! `Phi_{a,b}(x) = exp(-1/(x-a)^2 - 1/(x-b)^2)` inside `(a,b)`, exactly zero
//! outside; the one-sided kernels drop the absent term. Two independent
//! derivative paths are provided: jet arithmetic through the exponential
//! recurrence, and an exact rational form
//! `Phi^(k) = P_k(s,t) * s^{-3k} t^{-3k} * Phi` with integer-coefficient
//! polynomials `P_k` maintained by
//! `P_{k+1} = (dP/ds + dP/dt) s^3 t^3 - 3k P (s^2 t^3 + s^3 t^2) + 2 P (s^3 + t^3)`
//! (one-variable analogue for rays). The two paths cross-validate each
//! other.
//!
//! Evaluations outside the open support short-circuit to exact zero before
//! any floating-point work, so "vanishes exactly on Z" stays a bit-exact
//! statement. When the exponent falls below the representable range the
//! value underflows; we return exact zero with an `underflow` annotation
//! since the true value is below every representable positive number.

use std::collections::BTreeMap;
use std::fmt;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::numkit::{Jet, Real};
use crate::zeroset::XRat;

/// A bump kernel on the open interval `(a, b)`; at least one endpoint is
/// finite.
#[derive(Clone, Debug, PartialEq)]
pub struct BumpKernel {
    a: XRat,
    b: XRat,
}

/// Scalar evaluation result with the underflow annotation.
#[derive(Clone, Debug)]
pub struct BumpValue {
    pub value: Real,
    /// True value is strictly positive but below the representable range.
    pub underflow: bool,
}

impl BumpKernel {
    pub fn new(a: XRat, b: XRat) -> Result<BumpKernel> {
        if a >= b {
            return Err(Error::InvalidInput(format!("bump endpoints must satisfy a < b, got {a}, {b}")));
        }
        if !a.is_finite() && !b.is_finite() {
            return Err(Error::InvalidInput("bump kernel needs at least one finite endpoint".into()));
        }
        Ok(BumpKernel { a, b })
    }

    pub fn finite(a: Rational, b: Rational) -> Result<BumpKernel> {
        BumpKernel::new(XRat::Fin(a), XRat::Fin(b))
    }

    pub fn ray_right(a: Rational) -> BumpKernel {
        BumpKernel { a: XRat::Fin(a), b: XRat::PosInf }
    }

    pub fn ray_left(b: Rational) -> BumpKernel {
        BumpKernel { a: XRat::NegInf, b: XRat::Fin(b) }
    }

    pub fn a(&self) -> &XRat {
        &self.a
    }

    pub fn b(&self) -> &XRat {
        &self.b
    }

    /// Strictly inside the open support?
    pub fn contains(&self, x: &Rational) -> bool {
        let x = XRat::Fin(x.clone());
        self.a < x && x < self.b
    }

    fn is_endpoint(&self, x: &Rational) -> bool {
        self.a.finite() == Some(x) || self.b.finite() == Some(x)
    }

    /// The exponent `-1/(x-a)^2 - 1/(x-b)^2` as an exact rational
    /// (`x` strictly inside the support).
    fn exponent(&self, x: &Rational) -> Rational {
        let mut u = Rational::new();
        for e in [&self.a, &self.b] {
            if let Some(c) = e.finite() {
                let s = Rational::from(x - c);
                u -= Rational::from(&s * &s).recip();
            }
        }
        u
    }

    /// Pointwise value: exact zero outside the open support, otherwise the
    /// exponential at the working precision.
    pub fn eval(&self, x: &Rational, bits: u32) -> BumpValue {
        if !self.contains(x) {
            return BumpValue { value: Real::zero(bits), underflow: false };
        }
        let u = self.exponent(x);
        let ur = Real::from_rational(&u, bits);
        // the exponent is always <= 0 inside the support: no overflow arm
        let (value, underflow) = ur.exp_checked().expect("non-positive exponent cannot overflow");
        BumpValue { value, underflow }
    }

    /// Order-`n` jet at `x0`. Endpoints and exterior points give the exact
    /// zero jet (the kernel is flat there); interior points run the
    /// exponential jet recurrence.
    pub fn jet(&self, x0: &Rational, order: usize, bits: u32) -> (Jet, bool) {
        let x0r = Real::from_rational(x0, bits);
        if !self.contains(x0) || self.is_endpoint(x0) {
            return (Jet::zero(x0r, order), false);
        }
        let mut u = Jet::zero(x0r.clone(), order);
        for e in [&self.a, &self.b] {
            if let Some(c) = e.finite() {
                let shifted = Jet::linear(
                    x0r.clone(),
                    Real::one(bits),
                    Real::from_rational(&Rational::from(-c), bits),
                    order,
                );
                let inv_sq = shifted
                    .pow_int(2)
                    .expect("m >= 1")
                    .recip()
                    .expect("nonzero inside the support");
                u = u.sub(&inv_sq).expect("same expansion point");
            }
        }
        let (jet, underflow) = u.exp().expect("non-positive exponent cannot overflow");
        (jet, underflow)
    }

    /// `Phi^(k)(x)` through the exact rational derivative form; `x` must be
    /// strictly inside the support.
    pub fn deriv_recurrence(&self, k: usize, x: &Rational, bits: u32) -> Result<Real> {
        if !self.contains(x) {
            return Err(Error::InvalidInput(format!(
                "derivative recurrence needs a point strictly inside the support, got {}",
                x
            )));
        }
        let form = DerivForm::for_kernel(self, k);
        let ratio = form.rational_factor(self, x);
        let phi = self.eval(x, bits);
        Ok(&Real::from_rational(&ratio, bits) * &phi.value)
    }

    /// Certified upper bound for
    /// `sup { |Phi^(k-1)(x)| / (x-a) : a < x < a+delta }`,
    /// monotone in `delta` and tending to 0 with it. Requires a finite left
    /// endpoint and `k >= 1`.
    pub fn flatness_bound(&self, k: usize, delta: &Rational, bits: u32) -> Result<Real> {
        if k == 0 {
            return Err(Error::InvalidInput("flatness bound needs k >= 1".into()));
        }
        if *delta <= 0 {
            return Err(Error::InvalidInput("flatness bound needs delta > 0".into()));
        }
        if !self.a.is_finite() {
            return Err(Error::InvalidInput(
                "flatness bound needs a finite left endpoint".into(),
            ));
        }
        let form = DerivForm::for_kernel(self, k - 1);
        let three_k = 3 * (k - 1) as i64;
        let width = match (&self.a, &self.b) {
            (XRat::Fin(a), XRat::Fin(b)) => Some(Rational::from(b - a)),
            _ => None,
        };
        // effective delta never exceeds the support width
        let delta_s = match &width {
            Some(w) if delta > w => w.clone(),
            _ => delta.clone(),
        };
        let ds = Real::from_rational(&delta_s, bits);
        let mut total = Real::zero(bits);
        match &form.poly {
            Poly::Ray(p) => {
                for (&i, c) in p {
                    // s-exponent after dividing by s^{3(k-1)} and by (x-a)
                    let m = three_k + 1 - i as i64;
                    let bs = sup_pow_gauss(m, &ds, bits);
                    total = &total + &(&Real::from_integer(&c.clone().abs(), bits) * &bs);
                }
            }
            Poly::TwoSided(p) => {
                let w = width.expect("two-sided kernel has finite width");
                let wr = Real::from_rational(&w, bits);
                let small_delta = Rational::from(&delta_s * &Rational::from(2)) <= w;
                // e^{-1/t^2} <= e^{-1/W^2} uniformly on the strip
                let t_exp_cap = (&wr * &wr).recip().neg_ref().exp();
                for (&(i, j), c) in p {
                    let ms = three_k + 1 - i as i64;
                    let bs = sup_pow_gauss(ms, &ds, bits);
                    let mt = three_k - j as i64;
                    let bt = if small_delta {
                        // |t| in [W - delta, W]
                        let tmin = &wr - &ds;
                        let base = if mt >= 0 { tmin.powi(-(mt as i32)) } else { wr.powi(-(mt as i32)) };
                        &base * &t_exp_cap
                    } else if mt > 0 {
                        gauss_max(mt as u32, bits)
                    } else {
                        wr.powi(-(mt as i32))
                    };
                    total = &total + &(&(&Real::from_integer(&c.clone().abs(), bits) * &bs) * &bt);
                }
            }
        }
        // nudge upward so rounded arithmetic cannot undercut the bound
        Ok(total.bump_up(bits / 2))
    }

    /// The exact derivative form of order `k` (exposed for the symmetry
    /// checks).
    pub fn derivative_form(&self, k: usize) -> DerivForm {
        DerivForm::for_kernel(self, k)
    }
}

impl fmt::Display for BumpKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phi({}, {})", self.a, self.b)
    }
}

/// Kernel-independent certificate for
/// `sup { |f^(k-1)(x)| / (x - c) : c < x < c + delta }` where `f` is any sum
/// of gap bumps with `c` on the boundary of its zero set. Near such a point
/// only one bump is active and `x - c >= x - a`, so per-term bounds over the
/// universal derivative polynomials suffice; the per-variable degree of
/// `P_k` stays at most `3k`, so every exponent below is a nonnegative
/// Gaussian power. Monotone in `delta`, tending to 0 with it.
pub fn uniform_flatness_cert(k: usize, delta: &Rational, bits: u32) -> Real {
    assert!(k >= 1);
    let ds = Real::from_rational(delta, bits);
    let three_k = 3 * (k - 1) as i64;
    // two-sided gaps
    let mut two_sided = Real::zero(bits);
    let two_form = DerivForm::two_sided(k - 1);
    if let Poly::TwoSided(p) = &two_form.poly {
        for (&(i, j), c) in p {
            let bs = sup_pow_gauss(three_k + 1 - i as i64, &ds, bits);
            let mt = three_k - j as i64;
            debug_assert!(mt >= 0, "t-degree of P_k exceeds 3k");
            let bt = gauss_max(mt.max(0) as u32, bits);
            two_sided = &two_sided + &(&(&Real::from_integer(&c.clone().abs(), bits) * &bs) * &bt);
        }
    }
    // one-sided (ray) gaps
    let mut ray = Real::zero(bits);
    let ray_form = DerivForm::ray(k - 1);
    if let Poly::Ray(p) = &ray_form.poly {
        for (&i, c) in p {
            let bs = sup_pow_gauss(three_k + 1 - i as i64, &ds, bits);
            ray = &ray + &(&Real::from_integer(&c.clone().abs(), bits) * &bs);
        }
    }
    two_sided.max(&ray).bump_up(bits / 2)
}

/// `sup over (0, delta) of s^{-m} e^{-1/s^2}` (for `m <= 0` this is the
/// product of endpoint bounds). The function increases up to
/// `s = sqrt(2/m)` and its global maximum is `(m/(2e))^{m/2}`.
fn sup_pow_gauss(m: i64, delta: &Real, bits: u32) -> Real {
    let exp_at_delta = (&(delta * delta).recip().neg_ref()).exp();
    if m <= 0 {
        return &delta.powi((-m) as i32) * &exp_at_delta;
    }
    let two_over_m = &Real::from_int(2, bits) / &Real::from_int(m, bits);
    let crit = two_over_m.sqrt();
    if *delta <= crit {
        &delta.powi(-(m as i32)) * &exp_at_delta
    } else {
        gauss_max(m as u32, bits)
    }
}

/// Global maximum `(m/(2e))^{m/2}` of `t^{-m} e^{-1/t^2}` over `t > 0`.
fn gauss_max(m: u32, bits: u32) -> Real {
    if m == 0 {
        return Real::one(bits);
    }
    let mr = Real::from_int(m as i64, bits);
    let e = Real::one(bits).exp();
    let base = &mr / &(&Real::from_int(2, bits) * &e);
    // (m/(2e))^{m/2} = exp((m/2) ln(m/2e))
    (&(&mr / &Real::from_int(2, bits)) * &base.ln()).exp()
}

/// Exact numerator polynomial `P_k` of the derivative form.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivForm {
    pub k: usize,
    pub poly: Poly,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Poly {
    /// Coefficients of `s^i t^j`, symmetric in (i, j).
    TwoSided(BTreeMap<(u32, u32), Integer>),
    /// Coefficients of `s^i`.
    Ray(BTreeMap<u32, Integer>),
}

impl DerivForm {
    /// `P_k` for kernels with two finite endpoints.
    pub fn two_sided(k: usize) -> DerivForm {
        let mut p = BTreeMap::new();
        p.insert((0u32, 0u32), Integer::from(1));
        let mut form = DerivForm { k: 0, poly: Poly::TwoSided(p) };
        for _ in 0..k {
            form = form.next();
        }
        form
    }

    /// `P_k` for ray kernels (one finite endpoint).
    pub fn ray(k: usize) -> DerivForm {
        let mut p = BTreeMap::new();
        p.insert(0u32, Integer::from(1));
        let mut form = DerivForm { k: 0, poly: Poly::Ray(p) };
        for _ in 0..k {
            form = form.next();
        }
        form
    }

    fn for_kernel(kernel: &BumpKernel, k: usize) -> DerivForm {
        if kernel.a.is_finite() && kernel.b.is_finite() {
            DerivForm::two_sided(k)
        } else {
            DerivForm::ray(k)
        }
    }

    /// One step of the derivative recurrence.
    fn next(&self) -> DerivForm {
        let k = self.k as i64;
        let poly = match &self.poly {
            Poly::TwoSided(p) => {
                let mut out: BTreeMap<(u32, u32), Integer> = BTreeMap::new();
                let mut add = |key: (u32, u32), v: Integer| {
                    let slot = out.entry(key).or_default();
                    *slot += v;
                };
                for (&(i, j), c) in p {
                    // (d/ds + d/dt) P * s^3 t^3
                    if i > 0 {
                        add((i + 2, j + 3), c.clone() * i);
                    }
                    if j > 0 {
                        add((i + 3, j + 2), c.clone() * j);
                    }
                    // -3k P (s^2 t^3 + s^3 t^2)
                    if k > 0 {
                        add((i + 2, j + 3), c.clone() * (-3 * k));
                        add((i + 3, j + 2), c.clone() * (-3 * k));
                    }
                    // +2 P (s^3 + t^3)
                    add((i + 3, j), c.clone() * 2);
                    add((i, j + 3), c.clone() * 2);
                }
                out.retain(|_, v| *v != 0);
                Poly::TwoSided(out)
            }
            Poly::Ray(p) => {
                let mut out: BTreeMap<u32, Integer> = BTreeMap::new();
                let mut add = |key: u32, v: Integer| {
                    let slot = out.entry(key).or_default();
                    *slot += v;
                };
                for (&i, c) in p {
                    if i > 0 {
                        add(i + 2, c.clone() * i);
                    }
                    if k > 0 {
                        add(i + 2, c.clone() * (-3 * k));
                    }
                    add(i, c.clone() * 2);
                }
                out.retain(|_, v| *v != 0);
                Poly::Ray(out)
            }
        };
        DerivForm { k: self.k + 1, poly }
    }

    /// Exact rational `P_k(s,t) s^{-3k} t^{-3k}` at `x` (strictly inside the
    /// support).
    fn rational_factor(&self, kernel: &BumpKernel, x: &Rational) -> Rational {
        let three_k = 3 * self.k as u32;
        match &self.poly {
            Poly::TwoSided(p) => {
                let a = kernel.a.finite().expect("two-sided");
                let b = kernel.b.finite().expect("two-sided");
                let s = Rational::from(x - a);
                let t = Rational::from(x - b);
                let mut acc = Rational::new();
                for (&(i, j), c) in p {
                    acc += Rational::from(c)
                        * Rational::from((&s).pow(i))
                        * Rational::from((&t).pow(j));
                }
                acc * Rational::from((&s).pow(three_k)).recip()
                    * Rational::from((&t).pow(three_k)).recip()
            }
            Poly::Ray(p) => {
                let c0 = kernel
                    .a
                    .finite()
                    .or_else(|| kernel.b.finite())
                    .expect("one finite endpoint");
                let s = Rational::from(x - c0);
                let mut acc = Rational::new();
                for (&i, c) in p {
                    acc += Rational::from(c) * Rational::from((&s).pow(i));
                }
                acc * Rational::from((&s).pow(three_k)).recip()
            }
        }
    }

    /// Two-variable symmetry `P_k(s,t) = P_k(t,s)`.
    pub fn is_symmetric(&self) -> bool {
        match &self.poly {
            Poly::TwoSided(p) => p.iter().all(|(&(i, j), c)| p.get(&(j, i)) == Some(c)),
            Poly::Ray(_) => true,
        }
    }
}
