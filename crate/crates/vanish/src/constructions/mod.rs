//! Executable constructions: every supported function is a finite expression
//! DAG whose nodes know how to produce (i) a value with a certified
//! truncation bound at any rational point and (ii) a jet of any order with
//! per-coefficient bounds.
//!
//! Exact zeros short-circuit before floating-point work and survive
//! products, exponential-algebra nodes (`e^0 - 1 = 0` exactly), and
//! polynomial combinations, so "vanishes exactly on Z" is testable
//! bit-for-bit.

pub mod poly;
pub mod primitive;
pub mod series;
pub mod weierstrass;

use std::fmt;

use rug::Rational;

use crate::bumps::BumpKernel;
use crate::error::{Error, Result};
use crate::numkit::rat::{format_rational, parse_rational};
use crate::numkit::{Jet, Prec, Real};
use crate::zeroset::{self, Gap, XRat, ZeroSetSpec};

pub use poly::MultiPoly;

/// Truncation caps: the cost-model knobs. Defaults match the documented safe
/// ranges; exceeding one yields `TailBoundUnachievable` instead of a silent
/// hour-long sum.
#[derive(Clone, Debug)]
pub struct Caps {
    /// Order cap for cosine-series jets (order k needs about base^k terms).
    pub lerch_order_cap: usize,
    /// Term cap for the sine series (digits of b_n double per term).
    pub pringsheim_term_cap: u32,
    /// Factor cap for canonical products.
    pub weierstrass_factor_cap: u32,
    /// Absolute quadrature error target, as a power of two.
    pub quad_target_log2: i32,
    /// Panel cap for quadrature.
    pub quad_panel_cap: u64,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps {
            lerch_order_cap: 8,
            pringsheim_term_cap: 16,
            weierstrass_factor_cap: 1 << 17,
            quad_target_log2: -24,
            quad_panel_cap: 1 << 20,
        }
    }
}

/// Precision plus caps: everything an evaluation needs besides the point.
#[derive(Clone, Debug)]
pub struct EvalCtx {
    pub prec: Prec,
    pub caps: Caps,
}

impl EvalCtx {
    pub fn new(prec: Prec) -> EvalCtx {
        EvalCtx { prec, caps: Caps::default() }
    }

    /// All internal arithmetic runs at 4x guard precision.
    pub fn working_bits(&self) -> u32 {
        self.prec.guard_bits()
    }

    pub fn doubled(&self) -> EvalCtx {
        EvalCtx { prec: self.prec.doubled(), caps: self.caps.clone() }
    }
}

/// A value with its certified truncation bound.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub value: Real,
    /// `|true - value| <= bound` up to rounding, which the guard precision
    /// absorbs.
    pub bound: Real,
    /// Some strictly positive subvalue fell below the representable range
    /// and was replaced by exact zero.
    pub underflow: bool,
}

/// A jet with the underflow annotation.
#[derive(Clone, Debug)]
pub struct JetEval {
    pub jet: Jet,
    pub underflow: bool,
}

/// Exponent rate of an exponential-algebra generator, kept symbolic so
/// serialized expressions round-trip exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Rate {
    Rational(Rational),
    SqrtPrime(u32),
}

impl Rate {
    pub fn value(&self, bits: u32) -> Real {
        match self {
            Rate::Rational(q) => Real::from_rational(q, bits),
            Rate::SqrtPrime(p) => Real::from_int(*p as i64, bits).sqrt(),
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Rational(q) => write!(f, "{}", format_rational(q)),
            Rate::SqrtPrime(p) => write!(f, "sqrt({p})"),
        }
    }
}

/// Term-count policy for the sine series.
#[derive(Clone, Debug, PartialEq)]
pub enum TermPolicy {
    /// Smallest certified count for the request (value: precision-driven;
    /// jets: order + 3).
    Auto,
    Fixed(u32),
}

/// The expression DAG.
#[derive(Clone, Debug, PartialEq)]
pub enum FnExpr {
    /// One bump kernel.
    Bump(BumpKernel),
    /// Sum of one bump per complementary gap of the zero set; evaluation
    /// resolves the single gap containing the point.
    BumpSum(ZeroSetSpec),
    /// `Σ cos(baseⁿ x)/n!`, odd base >= 3.
    LerchSeries { base: u32 },
    /// `Σ b_n^{1-n} sin(b_n x)`.
    PringsheimSeries { terms: TermPolicy },
    /// Canonical product vanishing on an integer lattice.
    WeierstrassProduct { step: Rational },
    /// Polynomial with exact rational coefficients, `coeffs[j]` on `x^j`.
    Entire { coeffs: Vec<Rational> },
    Const(Rational),
    /// `child + offset`.
    Shift { child: Box<FnExpr>, offset: Rational },
    Product { children: Vec<FnExpr> },
    /// `e^{rate * child(x)} + shift` (an algebra generator composed with the
    /// inner function).
    ExpAffine { rate: Rate, shift: Rational, child: Box<FnExpr> },
    /// `P(child_1, ..., child_d)` with no constant term.
    PolyCombine { poly: MultiPoly, children: Vec<FnExpr> },
    /// `x ↦ ∫_{basepoint}^x child`.
    Primitive { child: Box<FnExpr>, basepoint: Rational },
}

fn kernel_for_gap(gap: &Gap) -> Result<BumpKernel> {
    match (&gap.a, &gap.b) {
        (XRat::Fin(a), XRat::Fin(b)) => BumpKernel::finite(a.clone(), b.clone()),
        (XRat::NegInf, XRat::Fin(b)) => Ok(BumpKernel::ray_left(b.clone())),
        (XRat::Fin(a), XRat::PosInf) => Ok(BumpKernel::ray_right(a.clone())),
        _ => Err(Error::UnsupportedZeroSet(
            "the empty set has no gap bumps; its smooth representative is the constant 1".into(),
        )),
    }
}

impl FnExpr {
    pub fn eval(&self, x: &Rational, ctx: &EvalCtx) -> Result<Evaluated> {
        let bits = ctx.working_bits();
        match self {
            FnExpr::Bump(kernel) => {
                let v = kernel.eval(x, bits);
                Ok(Evaluated { value: v.value, bound: Real::zero(bits), underflow: v.underflow })
            }
            FnExpr::BumpSum(z) => {
                if z.membership(x)? {
                    return Ok(Evaluated {
                        value: Real::zero(bits),
                        bound: Real::zero(bits),
                        underflow: false,
                    });
                }
                let gap = z.locate_gap(x)?.expect("non-member lies in a gap");
                let kernel = kernel_for_gap(&gap)?;
                let v = kernel.eval(x, bits);
                Ok(Evaluated { value: v.value, bound: Real::zero(bits), underflow: v.underflow })
            }
            FnExpr::LerchSeries { base } => series::lerch_eval(*base, x, ctx),
            FnExpr::PringsheimSeries { terms } => series::pringsheim_eval(terms, x, ctx),
            FnExpr::WeierstrassProduct { step } => weierstrass::eval(step, x, ctx),
            FnExpr::Entire { coeffs } => {
                let mut acc = Rational::new();
                for c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                Ok(Evaluated {
                    value: Real::from_rational(&acc, bits),
                    bound: Real::zero(bits),
                    underflow: false,
                })
            }
            FnExpr::Const(c) => Ok(Evaluated {
                value: Real::from_rational(c, bits),
                bound: Real::zero(bits),
                underflow: false,
            }),
            FnExpr::Shift { child, offset } => {
                let v = child.eval(x, ctx)?;
                Ok(Evaluated {
                    value: &v.value + &Real::from_rational(offset, bits),
                    bound: v.bound,
                    underflow: v.underflow,
                })
            }
            FnExpr::Product { children } => {
                let mut value = Real::one(bits);
                let mut bound = Real::zero(bits);
                let mut underflow = false;
                for child in children {
                    let v = child.eval(x, ctx)?;
                    let new_bound = &(&(&value.abs() * &v.bound) + &(&bound * &v.value.abs()))
                        + &(&bound * &v.bound);
                    value = &value * &v.value;
                    bound = new_bound;
                    underflow |= v.underflow;
                }
                Ok(Evaluated { value, bound, underflow })
            }
            FnExpr::ExpAffine { rate, shift, child } => {
                let v = child.eval(x, ctx)?;
                let r = rate.value(bits);
                let arg = &r * &v.value;
                let (e, uf) = arg.exp_checked()?;
                // |e^{r(v±b)} - e^{rv}| <= e^{rv} |r| b e^{|r| b}
                let rb = &r.abs() * &v.bound;
                let bound = &(&e * &rb) * &rb.exp();
                Ok(Evaluated {
                    value: &e + &Real::from_rational(shift, bits),
                    bound,
                    underflow: v.underflow || uf,
                })
            }
            FnExpr::PolyCombine { poly, children } => {
                let mut args = Vec::with_capacity(children.len());
                let mut underflow = false;
                for child in children {
                    let v = child.eval(x, ctx)?;
                    underflow |= v.underflow;
                    args.push((v.value, v.bound));
                }
                let (value, bound) = poly.eval_with_bounds(&args, bits);
                Ok(Evaluated { value, bound, underflow })
            }
            FnExpr::Primitive { child, basepoint } => {
                primitive::integrate(child, basepoint, x, ctx)
            }
        }
    }

    pub fn jet(&self, x0: &Rational, order: usize, ctx: &EvalCtx) -> Result<JetEval> {
        let bits = ctx.working_bits();
        let x0r = Real::from_rational(x0, bits);
        match self {
            FnExpr::Bump(kernel) => {
                let (jet, underflow) = kernel.jet(x0, order, bits);
                Ok(JetEval { jet, underflow })
            }
            FnExpr::BumpSum(z) => {
                if z.membership(x0)? {
                    // flat on the whole zero set, boundary included
                    return Ok(JetEval { jet: Jet::zero(x0r, order), underflow: false });
                }
                let gap = z.locate_gap(x0)?.expect("non-member lies in a gap");
                let kernel = kernel_for_gap(&gap)?;
                let (jet, underflow) = kernel.jet(x0, order, bits);
                Ok(JetEval { jet, underflow })
            }
            FnExpr::LerchSeries { base } => series::lerch_jet(*base, x0, order, ctx),
            FnExpr::PringsheimSeries { terms } => series::pringsheim_jet(terms, x0, order, ctx),
            FnExpr::WeierstrassProduct { step } => weierstrass::jet(step, x0, order, ctx),
            FnExpr::Entire { coeffs } => {
                Ok(JetEval { jet: polynomial_jet(coeffs, x0, order, bits), underflow: false })
            }
            FnExpr::Const(c) => Ok(JetEval {
                jet: Jet::constant(x0r, Real::from_rational(c, bits), order),
                underflow: false,
            }),
            FnExpr::Shift { child, offset } => {
                let j = child.jet(x0, order, ctx)?;
                Ok(JetEval {
                    jet: j.jet.add_const(&Real::from_rational(offset, bits)),
                    underflow: j.underflow,
                })
            }
            FnExpr::Product { children } => {
                let mut jet = Jet::constant(x0r, Real::one(bits), order);
                let mut underflow = false;
                for child in children {
                    let j = child.jet(x0, order, ctx)?;
                    underflow |= j.underflow;
                    jet = jet.mul(&j.jet)?;
                }
                Ok(JetEval { jet, underflow })
            }
            FnExpr::ExpAffine { rate, shift, child } => {
                let j = child.jet(x0, order, ctx)?;
                let scaled = j.jet.scale(&rate.value(bits));
                let (e, uf) = scaled.exp()?;
                Ok(JetEval {
                    jet: e.add_const(&Real::from_rational(shift, bits)),
                    underflow: j.underflow || uf,
                })
            }
            FnExpr::PolyCombine { poly, children } => {
                let mut jets = Vec::with_capacity(children.len());
                let mut underflow = false;
                for child in children {
                    let j = child.jet(x0, order, ctx)?;
                    underflow |= j.underflow;
                    jets.push(j.jet);
                }
                Ok(JetEval { jet: poly.eval_jets(&jets, &x0r, order)?, underflow })
            }
            FnExpr::Primitive { child, basepoint } => {
                let v = primitive::integrate(child, basepoint, x0, ctx)?;
                if order == 0 {
                    let jet = Jet::from_coeffs(x0r, vec![v.value], vec![v.bound]);
                    return Ok(JetEval { jet, underflow: v.underflow });
                }
                let inner = child.jet(x0, order - 1, ctx)?;
                let mut coeffs = Vec::with_capacity(order + 1);
                let mut err = Vec::with_capacity(order + 1);
                coeffs.push(v.value);
                err.push(v.bound);
                for k in 1..=order {
                    let kr = Real::from_int(k as i64, bits);
                    coeffs.push(&inner.jet.coeff(k - 1).clone() / &kr);
                    err.push(&inner.jet.err(k - 1).clone() / &kr);
                }
                Ok(JetEval {
                    jet: Jet::from_coeffs(x0r, coeffs, err),
                    underflow: v.underflow || inner.underflow,
                })
            }
        }
    }

    /// One-line structural description for reports.
    pub fn describe(&self) -> String {
        match self {
            FnExpr::Bump(k) => format!("{k}"),
            FnExpr::BumpSum(z) => format!("bump_sum({})", z.kind_name()),
            FnExpr::LerchSeries { base } => format!("lerch({base})"),
            FnExpr::PringsheimSeries { .. } => "pringsheim_g".to_string(),
            FnExpr::WeierstrassProduct { step } => {
                format!("weierstrass_lattice(step={})", format_rational(step))
            }
            FnExpr::Entire { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(format_rational).collect();
                format!("poly[{}]", parts.join(", "))
            }
            FnExpr::Const(c) => format!("const({})", format_rational(c)),
            FnExpr::Shift { child, .. } => format!("shift({})", child.describe()),
            FnExpr::Product { children } => {
                let parts: Vec<String> = children.iter().map(|c| c.describe()).collect();
                format!("product({})", parts.join(", "))
            }
            FnExpr::ExpAffine { rate, shift, child } => {
                format!("exp({rate}*{})+({})", child.describe(), format_rational(shift))
            }
            FnExpr::PolyCombine { poly, children } => {
                let parts: Vec<String> = children.iter().map(|c| c.describe()).collect();
                format!("poly_combine[{poly}]({})", parts.join(", "))
            }
            FnExpr::Primitive { child, basepoint } => {
                format!("integral({}, from={})", child.describe(), format_rational(basepoint))
            }
        }
    }
}

/// Exact Taylor coefficients of a rational polynomial at `x0` by repeated
/// synthetic division.
fn polynomial_jet(coeffs: &[Rational], x0: &Rational, order: usize, bits: u32) -> Jet {
    let x0r = Real::from_rational(x0, bits);
    let mut work: Vec<Rational> = coeffs.to_vec();
    let mut taylor = Vec::with_capacity(order + 1);
    for _ in 0..=order {
        if work.is_empty() {
            taylor.push(Rational::new());
            continue;
        }
        // synthetic division by (x - x0): top-down, remainder pops out low
        let mut carry = Rational::new();
        for j in (0..work.len()).rev() {
            carry = work[j].clone() + carry * x0;
            work[j] = carry.clone();
        }
        taylor.push(work.remove(0));
    }
    let c: Vec<Real> = taylor.iter().map(|q| Real::from_rational(q, bits)).collect();
    let err = vec![Real::zero(bits); order + 1];
    Jet::from_coeffs(x0r, c, err)
}

// ---------------------------------------------------------------------------
// builders

/// Smooth function vanishing exactly on `Z` (sum of one flat bump per gap).
pub fn build_smooth(z: &ZeroSetSpec) -> Result<FnExpr> {
    match z.generator() {
        zeroset::Generator::FatComplement { .. } => Err(Error::UnsupportedZeroSet(
            "the fat complement's gap structure is not finitely resolvable; only containment-style constructions accept it".into(),
        )),
        zeroset::Generator::EmptySet => Ok(FnExpr::Const(Rational::from(1))),
        zeroset::Generator::FullLine => Ok(FnExpr::Const(Rational::new())),
        _ => Ok(FnExpr::BumpSum(z.clone())),
    }
}

/// Entire function vanishing exactly on `Z` (polynomial or canonical
/// product); requires `Z` to be the whole line or have no accumulation
/// point.
pub fn build_entire(z: &ZeroSetSpec) -> Result<FnExpr> {
    let report = z.classify();
    match z.generator() {
        zeroset::Generator::FullLine => return Ok(FnExpr::Const(Rational::new())),
        zeroset::Generator::EmptySet => return Ok(FnExpr::Const(Rational::from(1))),
        _ => {}
    }
    if !report.entire_exact_possible.value {
        return Err(Error::NotRepresentableAsEntire(
            report.entire_exact_possible.why.clone(),
        ));
    }
    match z.generator() {
        zeroset::Generator::FiniteSet(pts) => Ok(FnExpr::Entire { coeffs: monic_from_roots(pts) }),
        zeroset::Generator::IntervalUnion(comps) => {
            let pts: Vec<Rational> = comps.iter().map(|(a, _)| a.clone()).collect();
            Ok(FnExpr::Entire { coeffs: monic_from_roots(&pts) })
        }
        zeroset::Generator::IntegerLattice { step } => {
            Ok(FnExpr::WeierstrassProduct { step: step.clone() })
        }
        _ => unreachable!("accumulation-point generators were rejected above"),
    }
}

fn monic_from_roots(roots: &[Rational]) -> Vec<Rational> {
    let mut coeffs = vec![Rational::from(1)];
    for r in roots {
        let mut next = vec![Rational::new(); coeffs.len() + 1];
        for (j, c) in coeffs.iter().enumerate() {
            next[j + 1] += c.clone();
            next[j] -= Rational::from(c * r);
        }
        coeffs = next;
    }
    coeffs
}

/// Nowhere-analytic function vanishing exactly on `Z`: the gap-bump sum
/// times a zero-free shifted bounded nowhere-analytic factor. Requires
/// empty interior.
pub fn build_singular(z: &ZeroSetSpec, ctx: &EvalCtx) -> Result<FnExpr> {
    let report = z.classify();
    if !report.singular_exact_possible.value {
        return Err(Error::InteriorNotEmpty(report.singular_exact_possible.why.clone()));
    }
    if matches!(z.generator(), zeroset::Generator::FatComplement { .. }) {
        return Err(Error::UnsupportedZeroSet(
            "the fat complement's gap structure is not finitely resolvable; only containment-style constructions accept it".into(),
        ));
    }
    let lerch = FnExpr::LerchSeries { base: 3 };
    let alpha = Rational::from(1)
        + sup_bound(&lerch, ctx)?
            .to_rational()
            .expect("finite bound");
    let shifted = FnExpr::Shift { child: Box::new(lerch), offset: alpha };
    if matches!(z.generator(), zeroset::Generator::EmptySet) {
        return Ok(shifted);
    }
    Ok(FnExpr::Product { children: vec![shifted, build_smooth(z)?] })
}

/// Function with everywhere-zero Taylor radius vanishing exactly on `Z`:
/// shifted zero-free sine series times an entire function with zeros `Z`.
/// Requires `Z` discrete.
pub fn build_pringsheim_zero(z: &ZeroSetSpec, ctx: &EvalCtx) -> Result<FnExpr> {
    let report = z.classify();
    if !report.pringsheim_exact_possible.value {
        return Err(Error::AccumulationPointPresent(
            report.pringsheim_exact_possible.why.clone(),
        ));
    }
    let g = FnExpr::PringsheimSeries { terms: TermPolicy::Auto };
    let shift = Rational::from(1)
        + sup_bound(&g, ctx)?
            .to_rational()
            .expect("finite bound");
    let shifted = FnExpr::Shift { child: Box::new(g), offset: shift };
    let entire = build_entire(z)?;
    if entire == FnExpr::Const(Rational::from(1)) {
        return Ok(shifted);
    }
    Ok(FnExpr::Product { children: vec![shifted, entire] })
}

/// Entire multiplier catalog for the linear-family members.
#[derive(Clone, Debug)]
pub enum EntireWitness {
    /// Polynomial coefficients, low order first.
    Poly(Vec<Rational>),
    /// `x ↦ e^{c x}`, nonzero rational `c`.
    ExpRate(Rational),
}

/// One member `phi * f` of the linear family over the zero-set-`Z`
/// construction: same zero set plus the zeros of `phi`.
pub fn lineable_family_member(
    z: &ZeroSetSpec,
    witness: &EntireWitness,
    ctx: &EvalCtx,
) -> Result<FnExpr> {
    let base = build_pringsheim_zero(z, ctx)?;
    let multiplier = match witness {
        EntireWitness::Poly(coeffs) => {
            if coeffs.iter().all(|c| *c == 0) {
                return Err(Error::ZeroPolynomial);
            }
            if coeffs.len() == 1 && coeffs[0] == 1 {
                return Ok(base);
            }
            FnExpr::Entire { coeffs: coeffs.clone() }
        }
        EntireWitness::ExpRate(c) => {
            if *c == 0 {
                return Err(Error::InvalidInput("exponential witness needs a nonzero rate".into()));
            }
            FnExpr::ExpAffine {
                rate: Rate::Rational(c.clone()),
                shift: Rational::new(),
                child: Box::new(FnExpr::Entire {
                    coeffs: vec![Rational::new(), Rational::from(1)],
                }),
            }
        }
    };
    Ok(FnExpr::Product { children: vec![base, multiplier] })
}

/// `x ↦ ∫_{basepoint}^x h` for an integrand with a certified positive lower
/// bound; strictly increasing by construction.
pub fn monotone_primitive(h: FnExpr, basepoint: Rational, ctx: &EvalCtx) -> Result<FnExpr> {
    let lb = lower_bound_cert(&h, ctx)?;
    if !(lb > Real::zero(64)) {
        return Err(Error::PositivityUncertified);
    }
    Ok(FnExpr::Primitive { child: Box::new(h), basepoint })
}

/// Certified upper bound on the uniform norm; only the two series nodes
/// carry one.
pub fn sup_bound(expr: &FnExpr, ctx: &EvalCtx) -> Result<Real> {
    match expr {
        FnExpr::LerchSeries { base } => series::lerch_sup_bound(*base, ctx),
        FnExpr::PringsheimSeries { terms } => series::pringsheim_sup_bound(terms, ctx),
        other => Err(Error::InvalidInput(format!(
            "sup bound supports only the series nodes, not {}",
            other.describe()
        ))),
    }
}

/// Certified positive lower bound, available for the shifted-series shapes
/// the constructions produce.
pub fn lower_bound_cert(expr: &FnExpr, ctx: &EvalCtx) -> Result<Real> {
    let bits = ctx.working_bits();
    match expr {
        FnExpr::Const(c) if *c > 0 => Ok(Real::from_rational(c, bits)),
        FnExpr::Entire { coeffs } if coeffs.len() == 1 && coeffs[0] > 0 => {
            Ok(Real::from_rational(&coeffs[0], bits))
        }
        FnExpr::Shift { child, offset } => {
            let sup = sup_bound(child, ctx).map_err(|_| Error::PositivityUncertified)?;
            let lb = &Real::from_rational(offset, bits) - &sup;
            if lb > Real::zero(64) {
                Ok(lb)
            } else {
                Err(Error::PositivityUncertified)
            }
        }
        FnExpr::Product { children } => {
            let mut acc = Real::one(bits);
            for c in children {
                acc = &acc * &lower_bound_cert(c, ctx)?;
            }
            Ok(acc)
        }
        _ => Err(Error::PositivityUncertified),
    }
}

/// Certified global bound on the kth derivative, for the quadrature
/// certificates.
pub fn deriv_sup_bound(expr: &FnExpr, k: usize, ctx: &EvalCtx) -> Result<Real> {
    let bits = ctx.working_bits();
    match expr {
        FnExpr::Const(c) => Ok(if k == 0 {
            Real::from_rational(c, bits).abs()
        } else {
            Real::zero(bits)
        }),
        FnExpr::Entire { coeffs } if coeffs.len() <= 1 => Ok(if k == 0 {
            coeffs
                .first()
                .map(|c| Real::from_rational(c, bits).abs())
                .unwrap_or_else(|| Real::zero(bits))
        } else {
            Real::zero(bits)
        }),
        FnExpr::LerchSeries { base } => {
            if k == 0 {
                series::lerch_sup_bound(*base, ctx)
            } else {
                series::lerch_deriv_sup(*base, k, ctx)
            }
        }
        FnExpr::PringsheimSeries { .. } => {
            if k == 0 {
                series::pringsheim_sup_bound(&TermPolicy::Auto, ctx)
            } else {
                series::pringsheim_deriv_sup(k, ctx)
            }
        }
        FnExpr::Shift { child, offset } => {
            let inner = deriv_sup_bound(child, k, ctx)?;
            Ok(if k == 0 {
                &inner + &Real::from_rational(offset, bits).abs()
            } else {
                inner
            })
        }
        other => Err(Error::TailBoundUnachievable(format!(
            "no certified derivative bound for {}",
            other.describe()
        ))),
    }
}

// ---------------------------------------------------------------------------
// document format

impl FnExpr {
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            FnExpr::Bump(k) => serde_json::json!({
                "node": "bump",
                "a": k.a().to_string(),
                "b": k.b().to_string(),
            }),
            FnExpr::BumpSum(z) => serde_json::json!({
                "node": "bump_sum",
                "zeroset": serde_json::from_str::<serde_json::Value>(&zeroset::render_zeroset(z))
                    .expect("rendered zero set is valid JSON"),
            }),
            FnExpr::LerchSeries { base } => serde_json::json!({
                "node": "lerch",
                "base": base,
            }),
            FnExpr::PringsheimSeries { terms } => serde_json::json!({
                "node": "pringsheim",
                "terms": match terms {
                    TermPolicy::Auto => serde_json::Value::String("auto".into()),
                    TermPolicy::Fixed(k) => serde_json::json!(k),
                },
            }),
            FnExpr::WeierstrassProduct { step } => serde_json::json!({
                "node": "weierstrass_lattice",
                "step": format_rational(step),
            }),
            FnExpr::Entire { coeffs } => serde_json::json!({
                "node": "entire",
                "coeffs": coeffs.iter().map(format_rational).collect::<Vec<_>>(),
            }),
            FnExpr::Const(c) => serde_json::json!({
                "node": "const",
                "value": format_rational(c),
            }),
            FnExpr::Shift { child, offset } => serde_json::json!({
                "node": "shift",
                "offset": format_rational(offset),
                "child": child.to_json(),
            }),
            FnExpr::Product { children } => serde_json::json!({
                "node": "product",
                "children": children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            }),
            FnExpr::ExpAffine { rate, shift, child } => serde_json::json!({
                "node": "exp_affine",
                "rate": match rate {
                    Rate::Rational(q) => serde_json::json!({"kind": "rational", "value": format_rational(q)}),
                    Rate::SqrtPrime(p) => serde_json::json!({"kind": "sqrt_prime", "p": p}),
                },
                "shift": format_rational(shift),
                "child": child.to_json(),
            }),
            FnExpr::PolyCombine { poly, children } => serde_json::json!({
                "node": "poly_combine",
                "poly": poly.to_json(),
                "children": children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            }),
            FnExpr::Primitive { child, basepoint } => serde_json::json!({
                "node": "primitive",
                "basepoint": format_rational(basepoint),
                "child": child.to_json(),
            }),
        }
    }

    pub fn render(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("serializable")
    }

    pub fn parse(text: &str) -> Result<FnExpr> {
        let v: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
        FnExpr::from_json(&v)
    }

    pub fn from_json(v: &serde_json::Value) -> Result<FnExpr> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("expression node must be an object".into()))?;
        let node = obj
            .get("node")
            .and_then(|n| n.as_str())
            .ok_or_else(|| Error::Parse("missing \"node\" discriminator".into()))?;
        let field = |name: &str| {
            obj.get(name)
                .ok_or_else(|| Error::Parse(format!("{node} node needs \"{name}\"")))
        };
        let rational_field =
            |name: &str| -> Result<Rational> { zeroset::value_to_rational(field(name)?) };
        match node {
            "bump" => {
                let parse_endpoint = |name: &str| -> Result<XRat> {
                    let s = field(name)?
                        .as_str()
                        .ok_or_else(|| Error::Parse("bump endpoints are strings".into()))?;
                    Ok(match s {
                        "-inf" => XRat::NegInf,
                        "+inf" | "inf" => XRat::PosInf,
                        other => XRat::Fin(parse_rational(other)?),
                    })
                };
                let kernel = BumpKernel::new(parse_endpoint("a")?, parse_endpoint("b")?)
                    .map_err(|e| Error::Parse(e.to_string()))?;
                Ok(FnExpr::Bump(kernel))
            }
            "bump_sum" => {
                let z = zeroset::parse_zeroset(&field("zeroset")?.to_string())?;
                Ok(FnExpr::BumpSum(z))
            }
            "lerch" => {
                let base = field("base")?
                    .as_u64()
                    .ok_or_else(|| Error::Parse("lerch base must be an integer".into()))?;
                if base < 3 || base % 2 == 0 {
                    return Err(Error::Parse("lerch base must be an odd integer >= 3".into()));
                }
                Ok(FnExpr::LerchSeries { base: base as u32 })
            }
            "pringsheim" => {
                let terms = match field("terms")? {
                    serde_json::Value::String(s) if s == "auto" => TermPolicy::Auto,
                    v => TermPolicy::Fixed(
                        v.as_u64()
                            .ok_or_else(|| {
                                Error::Parse("terms must be \"auto\" or an integer".into())
                            })? as u32,
                    ),
                };
                Ok(FnExpr::PringsheimSeries { terms })
            }
            "weierstrass_lattice" => {
                let step = rational_field("step")?;
                if step <= 0 {
                    return Err(Error::Parse("lattice step must be positive".into()));
                }
                Ok(FnExpr::WeierstrassProduct { step })
            }
            "entire" => {
                let coeffs = field("coeffs")?
                    .as_array()
                    .ok_or_else(|| Error::Parse("entire coeffs must be an array".into()))?
                    .iter()
                    .map(zeroset::value_to_rational)
                    .collect::<Result<Vec<_>>>()?;
                Ok(FnExpr::Entire { coeffs })
            }
            "const" => Ok(FnExpr::Const(rational_field("value")?)),
            "shift" => Ok(FnExpr::Shift {
                offset: rational_field("offset")?,
                child: Box::new(FnExpr::from_json(field("child")?)?),
            }),
            "product" => {
                let children = field("children")?
                    .as_array()
                    .ok_or_else(|| Error::Parse("product children must be an array".into()))?
                    .iter()
                    .map(FnExpr::from_json)
                    .collect::<Result<Vec<_>>>()?;
                if children.is_empty() {
                    return Err(Error::Parse("product needs at least one child".into()));
                }
                Ok(FnExpr::Product { children })
            }
            "exp_affine" => {
                let rate_v = field("rate")?;
                let rate_obj = rate_v
                    .as_object()
                    .ok_or_else(|| Error::Parse("rate must be an object".into()))?;
                let rate = match rate_obj.get("kind").and_then(|k| k.as_str()) {
                    Some("rational") => Rate::Rational(zeroset::value_to_rational(
                        rate_obj
                            .get("value")
                            .ok_or_else(|| Error::Parse("rational rate needs \"value\"".into()))?,
                    )?),
                    Some("sqrt_prime") => {
                        let p = rate_obj.get("p").and_then(|p| p.as_u64()).ok_or_else(|| {
                            Error::Parse("sqrt_prime rate needs integer \"p\"".into())
                        })?;
                        Rate::SqrtPrime(p as u32)
                    }
                    _ => {
                        return Err(Error::Parse(
                            "rate kind must be rational or sqrt_prime".into(),
                        ))
                    }
                };
                Ok(FnExpr::ExpAffine {
                    rate,
                    shift: rational_field("shift")?,
                    child: Box::new(FnExpr::from_json(field("child")?)?),
                })
            }
            "poly_combine" => {
                let poly = MultiPoly::from_json(field("poly")?)?;
                poly.require_no_constant_term()?;
                let children = field("children")?
                    .as_array()
                    .ok_or_else(|| Error::Parse("poly_combine children must be an array".into()))?
                    .iter()
                    .map(FnExpr::from_json)
                    .collect::<Result<Vec<_>>>()?;
                if children.len() < poly.arity() {
                    return Err(Error::Parse(format!(
                        "polynomial references {} variables but only {} children given",
                        poly.arity(),
                        children.len()
                    )));
                }
                Ok(FnExpr::PolyCombine { poly, children })
            }
            "primitive" => Ok(FnExpr::Primitive {
                basepoint: rational_field("basepoint")?,
                child: Box::new(FnExpr::from_json(field("child")?)?),
            }),
            other => Err(Error::Parse(format!("unknown expression node {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeroset::parse_zeroset;

    fn ctx() -> EvalCtx {
        EvalCtx::new(Prec::default())
    }

    fn qr(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn assert_close(a: &Real, b: &Real, log2_tol: i32) {
        let diff = (a - b).abs();
        assert!(diff <= Real::pow2(log2_tol, 64), "{a:?} vs {b:?}");
    }

    #[test]
    fn product_of_constants() {
        let e = FnExpr::Product {
            children: vec![FnExpr::Const(qr(2, 1)), FnExpr::Const(qr(3, 1))],
        };
        let v = e.eval(&qr(7, 1), &ctx()).unwrap();
        assert_eq!(v.value, Real::from_int(6, 64));
        assert!(v.bound.is_zero());
    }

    #[test]
    fn smooth_singleton_zero_set() {
        let z = parse_zeroset(r#"{"kind":"finite","points":[0]}"#).unwrap();
        let f = build_smooth(&z).unwrap();
        let v = f.eval(&qr(1, 1), &ctx()).unwrap();
        let want = Real::from_int(-1, 1024).exp();
        assert_close(&v.value, &want, -250);
        assert!(f.eval(&qr(0, 1), &ctx()).unwrap().value.is_zero());
    }

    #[test]
    fn smooth_reciprocal_values() {
        let z = parse_zeroset(r#"{"kind":"reciprocal"}"#).unwrap();
        let f = build_smooth(&z).unwrap();
        for n in 1..=7i64 {
            assert!(f.eval(&qr(1, n), &ctx()).unwrap().value.is_zero());
        }
        let v = f.eval(&qr(2, 5), &ctx()).unwrap();
        assert!(v.value > Real::zero(64));
    }

    #[test]
    fn smooth_cantor_midgap_value() {
        // gap (1/3, 2/3) at its midpoint: squared distances (1/6)^2 each side,
        // exponent -36 - 36 = -72
        let z = parse_zeroset(r#"{"kind":"cantor","depth":20}"#).unwrap();
        let f = build_smooth(&z).unwrap();
        let v = f.eval(&qr(1, 2), &ctx()).unwrap();
        let want = Real::from_int(-72, 1024).exp();
        assert_close(&v.value, &want, -250);
    }

    #[test]
    fn smooth_jet_flat_on_the_set() {
        let z = parse_zeroset(r#"{"kind":"reciprocal"}"#).unwrap();
        let f = build_smooth(&z).unwrap();
        let j = f.jet(&qr(0, 1), 6, &ctx()).unwrap();
        assert!(j.jet.is_exactly_zero());
        let j = f.jet(&qr(1, 3), 6, &ctx()).unwrap();
        assert!(j.jet.is_exactly_zero());
    }

    #[test]
    fn entire_finite_polynomial() {
        let z = parse_zeroset(r#"{"kind":"finite","points":[0,1,2]}"#).unwrap();
        let f = build_entire(&z).unwrap();
        // x(x-1)(x-2) = 2x - 3x^2 + x^3
        match &f {
            FnExpr::Entire { coeffs } => {
                assert_eq!(coeffs.len(), 4);
                assert_eq!(coeffs[0], 0);
                assert_eq!(coeffs[1], qr(2, 1));
                assert_eq!(coeffs[2], qr(-3, 1));
                assert_eq!(coeffs[3], qr(1, 1));
            }
            other => panic!("expected a polynomial, got {}", other.describe()),
        }
        let v = f.eval(&qr(3, 1), &ctx()).unwrap();
        assert_eq!(v.value, Real::from_int(6, 64));
    }

    #[test]
    fn entire_empty_set_is_one() {
        let z = parse_zeroset(r#"{"kind":"empty_set"}"#).unwrap();
        let f = build_entire(&z).unwrap();
        assert_eq!(f, FnExpr::Const(qr(1, 1)));
    }

    #[test]
    fn entire_rejects_accumulation() {
        let z = parse_zeroset(r#"{"kind":"reciprocal"}"#).unwrap();
        assert!(matches!(build_entire(&z), Err(Error::NotRepresentableAsEntire(_))));
    }

    #[test]
    fn polynomial_jet_is_exact() {
        // p(x) = x^5 - 5x^3 + 4x at 3/10
        let coeffs = vec![qr(0, 1), qr(4, 1), qr(0, 1), qr(-5, 1), qr(0, 1), qr(1, 1)];
        let j = polynomial_jet(&coeffs, &qr(3, 10), 12, 256);
        // c1 = p'(3/10) = 5 (3/10)^4 - 15 (3/10)^2 + 4 = 2.6905
        let c1 = Real::from_rational(&qr(26905, 10000), 256);
        assert_eq!(*j.coeff(1), c1);
        // beyond the degree everything is exactly zero
        for k in 6..=12 {
            assert!(j.coeff(k).is_zero());
        }
    }

    #[test]
    fn singular_empty_set_is_shifted_series() {
        let z = parse_zeroset(r#"{"kind":"empty_set"}"#).unwrap();
        let c = ctx();
        let f = build_singular(&z, &c).unwrap();
        // eval(0) = (e - 1) + alpha with alpha = 1 + sup_bound = e + tiny,
        // so the value sits within a hair of 2e - 1
        let v = f.eval(&qr(0, 1), &c).unwrap();
        let e = Real::one(1024).exp();
        let two_e_minus_1 = &(&e + &e) - &Real::one(1024);
        assert!((&v.value - &two_e_minus_1).abs() <= Real::pow2(-120, 64));
    }

    #[test]
    fn singular_vanishes_exactly_and_positively() {
        let z = parse_zeroset(r#"{"kind":"finite","points":[0]}"#).unwrap();
        let c = ctx();
        let f = build_singular(&z, &c).unwrap();
        let at_zero = f.eval(&qr(0, 1), &c).unwrap();
        assert!(at_zero.value.is_zero());
        assert!(at_zero.bound.is_zero());
        let off = f.eval(&qr(1, 1), &c).unwrap();
        assert!(off.value > off.bound);
    }

    #[test]
    fn singular_rejects_interior() {
        let z = parse_zeroset(r#"{"kind":"intervals","components":[[0,1]]}"#).unwrap();
        assert!(matches!(
            build_singular(&z, &ctx()),
            Err(Error::InteriorNotEmpty(_))
        ));
    }

    #[test]
    fn pringsheim_empty_set_value() {
        let z = parse_zeroset(r#"{"kind":"empty_set"}"#).unwrap();
        let c = ctx();
        let f = build_pringsheim_zero(&z, &c).unwrap();
        // g(0) = 0, so eval(0) = 1 + sup_bound(g) in (2.0008, 2.0009)
        let v = f.eval(&qr(0, 1), &c).unwrap();
        assert!(v.value > Real::from_rational(&qr(20008, 10000), 64));
        assert!(v.value < Real::from_rational(&qr(20009, 10000), 64));
    }

    #[test]
    fn pringsheim_lattice_zeros() {
        let z = parse_zeroset(r#"{"kind":"integer_lattice","step":1}"#).unwrap();
        let c = ctx();
        let f = build_pringsheim_zero(&z, &c).unwrap();
        for k in -3i64..=3 {
            let v = f.eval(&qr(k, 1), &c).unwrap();
            assert!(v.value.is_zero(), "f({k}) should be exactly zero");
            assert!(v.bound.is_zero());
        }
        let v = f.eval(&qr(1, 2), &c).unwrap();
        assert!(v.value.abs() > v.bound);
    }

    #[test]
    fn pringsheim_rejects_accumulation() {
        let z = parse_zeroset(r#"{"kind":"reciprocal"}"#).unwrap();
        assert!(matches!(
            build_pringsheim_zero(&z, &ctx()),
            Err(Error::AccumulationPointPresent(_))
        ));
    }

    #[test]
    fn lineable_members() {
        let z = parse_zeroset(r#"{"kind":"empty_set"}"#).unwrap();
        let c = ctx();
        // identity witness returns the base construction
        let base = lineable_family_member(&z, &EntireWitness::Poly(vec![qr(1, 1)]), &c).unwrap();
        assert_eq!(base, build_pringsheim_zero(&z, &c).unwrap());
        // phi = x vanishes exactly at 0
        let member =
            lineable_family_member(&z, &EntireWitness::Poly(vec![qr(0, 1), qr(1, 1)]), &c).unwrap();
        assert!(member.eval(&qr(0, 1), &c).unwrap().value.is_zero());
        let v = member.eval(&qr(1, 2), &c).unwrap();
        assert!(v.value.abs() > v.bound);
        // zero polynomial rejected
        assert!(matches!(
            lineable_family_member(&z, &EntireWitness::Poly(vec![qr(0, 1)]), &c),
            Err(Error::ZeroPolynomial)
        ));
    }

    #[test]
    fn lineable_independence_witness() {
        // members with phi in {1, x, x^2} evaluated at x in {1,2,3}:
        // the matrix is Vandermonde times a positive diagonal, so nonsingular
        let z = parse_zeroset(r#"{"kind":"empty_set"}"#).unwrap();
        let c = ctx();
        let phis = [
            EntireWitness::Poly(vec![qr(1, 1)]),
            EntireWitness::Poly(vec![qr(0, 1), qr(1, 1)]),
            EntireWitness::Poly(vec![qr(0, 1), qr(0, 1), qr(1, 1)]),
        ];
        let mut m = Vec::new();
        for phi in &phis {
            let member = lineable_family_member(&z, phi, &c).unwrap();
            let row: Vec<Real> = (1..=3i64)
                .map(|x| member.eval(&qr(x, 1), &c).unwrap().value)
                .collect();
            m.push(row);
        }
        let minor = |r1: usize, r2: usize, c1: usize, c2: usize| -> Real {
            &(&m[r1][c1] * &m[r2][c2]) - &(&m[r1][c2] * &m[r2][c1])
        };
        let det = &(&(&m[0][0] * &minor(1, 2, 1, 2)) - &(&m[0][1] * &minor(1, 2, 0, 2)))
            + &(&m[0][2] * &minor(1, 2, 0, 1));
        assert!(det.abs() > Real::pow2(-100, 64));
    }

    #[test]
    fn monotone_primitive_of_constant_is_identity() {
        let c = ctx();
        let f = monotone_primitive(FnExpr::Const(qr(1, 1)), qr(0, 1), &c).unwrap();
        let v = f.eval(&qr(3, 4), &c).unwrap();
        assert_close(&v.value, &Real::from_rational(&qr(3, 4), 1024), -250);
        assert!(f.eval(&qr(0, 1), &c).unwrap().value.is_zero());
    }

    #[test]
    fn monotone_primitive_requires_certificate() {
        let c = ctx();
        assert!(matches!(
            monotone_primitive(FnExpr::LerchSeries { base: 3 }, qr(0, 1), &c),
            Err(Error::PositivityUncertified)
        ));
    }

    #[test]
    fn monotone_primitive_of_shifted_g_increases() {
        let c = ctx();
        let g = FnExpr::PringsheimSeries { terms: TermPolicy::Auto };
        let shift = Rational::from(1) + sup_bound(&g, &c).unwrap().to_rational().unwrap();
        let h = FnExpr::Shift { child: Box::new(g), offset: shift };
        let f = monotone_primitive(h, qr(0, 1), &c).unwrap();
        // integrand >= 1, so f(x2) - f(x1) >= x2 - x1
        let v1 = f.eval(&qr(1, 10), &c).unwrap();
        let v2 = f.eval(&qr(2, 10), &c).unwrap();
        let diff = &v2.value - &v1.value;
        let margin = &Real::from_rational(&qr(1, 10), 1024) - &(&v1.bound + &v2.bound);
        assert!(diff >= margin);
        assert!(diff > Real::zero(64));
    }

    #[test]
    fn exp_affine_exact_zero_containment() {
        let z = parse_zeroset(r#"{"kind":"finite","points":[0]}"#).unwrap();
        let inner = build_smooth(&z).unwrap();
        let elem = FnExpr::ExpAffine {
            rate: Rate::SqrtPrime(2),
            shift: qr(-1, 1),
            child: Box::new(inner),
        };
        let c = ctx();
        let v = elem.eval(&qr(0, 1), &c).unwrap();
        assert!(v.value.is_zero(), "e^0 - 1 must be exactly zero");
        assert!(v.bound.is_zero());
        let off = elem.eval(&qr(1, 1), &c).unwrap();
        assert!(!off.value.is_zero());
    }

    #[test]
    fn jet_order0_matches_eval_across_nodes() {
        let z = parse_zeroset(r#"{"kind":"finite","points":[0,1]}"#).unwrap();
        let c = ctx();
        let exprs = vec![
            build_smooth(&z).unwrap(),
            build_entire(&z).unwrap(),
            build_singular(&z, &c).unwrap(),
            build_pringsheim_zero(&z, &c).unwrap(),
            FnExpr::LerchSeries { base: 3 },
            FnExpr::PringsheimSeries { terms: TermPolicy::Auto },
        ];
        let x = qr(2, 5);
        for e in exprs {
            let v = e.eval(&x, &c).unwrap();
            let j = e.jet(&x, 3, &c).unwrap();
            let diff = (&v.value - &j.jet.coeff(0).clone()).abs();
            let tol = &(&v.bound + &j.jet.err(0).clone()) + &Real::pow2(-200, 64);
            assert!(
                diff <= tol,
                "{}: value {:?} vs jet {:?}",
                e.describe(),
                v.value,
                j.jet.coeff(0)
            );
        }
    }

    #[test]
    fn serialization_roundtrip() {
        let z = parse_zeroset(r#"{"kind":"reciprocal"}"#).unwrap();
        let c = ctx();
        let exprs = vec![
            build_smooth(&z).unwrap(),
            build_singular(&z, &c).unwrap(),
            FnExpr::ExpAffine {
                rate: Rate::SqrtPrime(5),
                shift: qr(-1, 1),
                child: Box::new(FnExpr::Const(qr(2, 3))),
            },
            FnExpr::PolyCombine {
                poly: MultiPoly::from_terms([(qr(1, 2), vec![2, 1]), (qr(-3, 1), vec![0, 1])]),
                children: vec![
                    FnExpr::Const(qr(1, 1)),
                    FnExpr::Entire { coeffs: vec![qr(0, 1), qr(1, 1)] },
                ],
            },
            FnExpr::Primitive {
                child: Box::new(FnExpr::Const(qr(1, 1))),
                basepoint: qr(0, 1),
            },
        ];
        for e in exprs {
            let text = e.render();
            let back = FnExpr::parse(&text).unwrap();
            assert_eq!(e, back, "roundtrip failed for {}", e.describe());
        }
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(FnExpr::parse("not json").is_err());
        assert!(FnExpr::parse(r#"{"node":"nope"}"#).is_err());
        assert!(FnExpr::parse(r#"{"node":"lerch","base":4}"#).is_err());
        // constant term in a combine polynomial
        assert!(FnExpr::parse(
            r#"{"node":"poly_combine","poly":[["1",[]]],"children":[{"node":"const","value":"1"}]}"#
        )
        .is_err());
    }

    #[test]
    fn truncation_bound_sound_for_series() {
        let c = ctx();
        let c2 = c.doubled();
        let x = qr(5, 7);
        for e in [
            FnExpr::LerchSeries { base: 3 },
            FnExpr::PringsheimSeries { terms: TermPolicy::Auto },
        ] {
            let v1 = e.eval(&x, &c).unwrap();
            let v2 = e.eval(&x, &c2).unwrap();
            assert!((&v1.value - &v2.value).abs() <= v1.bound);
        }
    }
}
