//! Free exponential algebras over an inner function.
//!
//! Generators are `x ↦ e^{r f(x)} + a` with rates `r` drawn from a
//! ℚ-linearly-independent catalog (square roots of distinct primes). A
//! polynomial `P` without constant term applied to the generators expands,
//! over the symbol `X_i = e^{r_i f}`, into an exponential sum with exact
//! rational coefficients and exact integer exponent vectors. Distinct
//! exponent vectors yield distinct rate combinations `Σ m_i r_i` (that is
//! the ℚ-independence pedigree), so the dominant term of a nonempty
//! expansion is a finite witness that the element is not identically zero —
//! |Q(x)| grows like its dominant exponential as x → +∞. No floating
//! comparison participates in the freeness bookkeeping; numerics only
//! cross-check it.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rug::{Integer, Rational};

use crate::constructions::{EvalCtx, FnExpr, MultiPoly, Rate};
use crate::error::{Error, Result};
use crate::numkit::rat::format_rational;
use crate::numkit::Real;

/// Ordered rates `sqrt(p_1) < ... < sqrt(p_d)` over distinct primes.
///
/// The pedigree: square roots of distinct squarefree integers are linearly
/// independent over ℚ, so integer combinations `Σ m_i sqrt(p_i)` coincide
/// only when the integer vectors coincide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentBasis {
    primes: Vec<u32>,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl ExponentBasis {
    pub fn new(mut primes: Vec<u32>) -> Result<ExponentBasis> {
        if primes.is_empty() {
            return Err(Error::InvalidInput("basis needs at least one prime".into()));
        }
        primes.sort_unstable();
        for w in primes.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput(format!("repeated prime {}", w[0])));
            }
        }
        for &p in &primes {
            if !is_prime(p) {
                return Err(Error::InvalidInput(format!(
                    "{p} is not prime; the independence pedigree covers square roots of distinct primes only"
                )));
            }
        }
        Ok(ExponentBasis { primes })
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn rate(&self, i: usize) -> Rate {
        Rate::SqrtPrime(self.primes[i])
    }

    pub fn rate_value(&self, i: usize, bits: u32) -> Real {
        Real::from_int(self.primes[i] as i64, bits).sqrt()
    }

    pub fn pedigree(&self) -> String {
        format!(
            "square roots of the distinct primes {:?}: linearly independent over the rationals",
            self.primes
        )
    }

    /// `Σ m_i sqrt(p_i)` at the given precision.
    pub fn combination(&self, v: &ExponentVector, bits: u32) -> Real {
        let mut acc = Real::zero(bits);
        for (i, &m) in v.coords.iter().enumerate() {
            if m != 0 {
                acc = &acc + &(&self.rate_value(i, bits) * m as i64);
            }
        }
        acc
    }

    /// Dominance comparison of two exponent vectors: by the real value of
    /// the rate combination, decided numerically with an escalating
    /// separation guard, tie-broken by coordinates (ties in the real value
    /// cannot occur for distinct coordinates, by the pedigree).
    pub fn cmp_dominance(&self, a: &ExponentVector, b: &ExponentVector) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        for bits in [256u32, 1024, 4096] {
            let va = self.combination(a, bits);
            let vb = self.combination(b, bits);
            let diff = &va - &vb;
            let guard = Real::pow2(-(bits as i32) / 4, bits);
            if diff.abs() > guard {
                return if diff.is_sign_positive() && !diff.is_zero() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                };
            }
        }
        // unreachable for the catalog; keep the order total anyway
        a.coords.cmp(&b.coords)
    }
}

/// Exact integer coordinates of one exponential-sum term.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExponentVector {
    pub coords: Vec<u32>,
}

impl ExponentVector {
    pub fn new(coords: Vec<u32>) -> ExponentVector {
        ExponentVector { coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&m| m == 0)
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Fully expanded exponential-sum form of `P(X_1 + a, ..., X_d + a)` with
/// `X_i = e^{r_i x}`: like terms combined, zero coefficients dropped, exact
/// rational arithmetic throughout.
pub fn expand(
    poly: &MultiPoly,
    shift: &Rational,
    basis: &ExponentBasis,
) -> Result<Vec<(Rational, ExponentVector)>> {
    poly.require_no_constant_term()?;
    if poly.arity() > basis.len() {
        return Err(Error::InvalidInput(format!(
            "polynomial references {} variables but the basis has {}",
            poly.arity(),
            basis.len()
        )));
    }
    let d = basis.len();
    let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    for (mono, coeff) in poly.terms() {
        // expand Π (X_i + a)^{m_i} over the choice of how many X_i to take
        let mut partial: Vec<(Vec<u32>, Rational)> = vec![(vec![0u32; d], coeff.clone())];
        for (i, &m) in mono.iter().enumerate() {
            if m == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(partial.len() * (m as usize + 1));
            for (vec_so_far, c_so_far) in &partial {
                for k in 0..=m {
                    let binom = Integer::from(m).binomial(k);
                    let a_pow = pow_rational(shift, m - k);
                    let c = Rational::from(c_so_far * &Rational::from(binom)) * a_pow;
                    if c == 0 {
                        continue;
                    }
                    let mut v = vec_so_far.clone();
                    v[i] = k;
                    next.push((v, c));
                }
            }
            partial = next;
        }
        for (v, c) in partial {
            let slot = acc.entry(v).or_insert_with(Rational::new);
            *slot += c;
        }
    }
    acc.retain(|_, c| *c != 0);
    Ok(acc
        .into_iter()
        .map(|(v, c)| (c, ExponentVector::new(v)))
        .collect())
}

fn pow_rational(q: &Rational, e: u32) -> Rational {
    use rug::ops::Pow;
    if e == 0 {
        Rational::from(1)
    } else {
        Rational::from(q.pow(e))
    }
}

/// One element of the algebra: polynomial, shift, basis, inner function, and
/// the cached exact expansion.
#[derive(Clone, Debug)]
pub struct AlgebraElement {
    pub basis: ExponentBasis,
    pub shift: Rational,
    pub poly: MultiPoly,
    pub inner: FnExpr,
    pub expansion: Vec<(Rational, ExponentVector)>,
}

impl AlgebraElement {
    pub fn new(
        basis: ExponentBasis,
        shift: Rational,
        poly: MultiPoly,
        inner: FnExpr,
    ) -> Result<AlgebraElement> {
        let expansion = expand(&poly, &shift, &basis)?;
        Ok(AlgebraElement { basis, shift, poly, inner, expansion })
    }

    /// The composed expression `P(e^{r_1 f} + a, ..., e^{r_d f} + a)`.
    pub fn compose(&self) -> FnExpr {
        let children: Vec<FnExpr> = (0..self.basis.len())
            .map(|i| FnExpr::ExpAffine {
                rate: self.basis.rate(i),
                shift: self.shift.clone(),
                child: Box::new(self.inner.clone()),
            })
            .collect();
        FnExpr::PolyCombine { poly: self.poly.clone(), children }
    }

    pub fn nonzero_certificate(&self) -> Certificate {
        nonzero_certificate(&self.basis, &self.expansion)
    }
}

/// Finite nonvanishing witness: the dominant term of the expansion.
#[derive(Clone, Debug)]
pub enum Certificate {
    IsZero,
    Dominant {
        vector: ExponentVector,
        coeff: Rational,
        /// `Σ m_i r_i`, the growth rate of the dominant exponential.
        rate: Real,
    },
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::IsZero => write!(f, "zero element (empty expansion)"),
            Certificate::Dominant { vector, coeff, rate } => write!(
                f,
                "dominant term {} * exp({} x), exponent vector {vector}: the element is not identically zero",
                format_rational(coeff),
                rate.to_decimal(crate::numkit::Prec::new(64).expect("valid")),
            ),
        }
    }
}

pub fn nonzero_certificate(
    basis: &ExponentBasis,
    expansion: &[(Rational, ExponentVector)],
) -> Certificate {
    let mut best: Option<&(Rational, ExponentVector)> = None;
    for term in expansion {
        best = Some(match best {
            None => term,
            Some(cur) => {
                if basis.cmp_dominance(&term.1, &cur.1) == Ordering::Greater {
                    term
                } else {
                    cur
                }
            }
        });
    }
    match best {
        None => Certificate::IsZero,
        Some((coeff, vector)) => Certificate::Dominant {
            vector: vector.clone(),
            coeff: coeff.clone(),
            rate: basis.combination(vector, 256),
        },
    }
}

/// Outcome of the randomized freeness exercise.
#[derive(Clone, Debug)]
pub struct FreenessReport {
    pub trials: u32,
    pub passes: u32,
    pub failures: Vec<String>,
}

impl FreenessReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty() && self.passes == self.trials
    }
}

impl fmt::Display for FreenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "freeness trials: {}, passes: {}", self.trials, self.passes)?;
        for fail in &self.failures {
            writeln!(f, "  FAIL {fail}")?;
        }
        Ok(())
    }
}

/// Draw a random nonzero polynomial without constant term: bounded degree
/// and coefficients, at least one term.
pub fn random_poly<R: Rng>(rng: &mut R, vars: usize, max_degree: u32, coeff_range: i64) -> MultiPoly {
    loop {
        let n_terms = rng.gen_range(1..=5);
        let mut terms = Vec::with_capacity(n_terms);
        for _ in 0..n_terms {
            let mut mono = vec![0u32; vars];
            // guarantee no constant term: at least one positive exponent
            loop {
                for e in mono.iter_mut() {
                    *e = rng.gen_range(0..=max_degree.min(2));
                }
                let total: u32 = mono.iter().sum();
                if total >= 1 && total <= max_degree {
                    break;
                }
            }
            let mut c = 0i64;
            while c == 0 {
                c = rng.gen_range(-coeff_range..=coeff_range);
            }
            terms.push((Rational::from(c), mono));
        }
        let p = MultiPoly::from_terms(terms);
        if !p.is_zero() {
            return p;
        }
    }
}

/// For each seeded trial: draw a random nonzero polynomial without constant
/// term, expand it, and assert the freeness witnesses — pairwise-distinct
/// exponent vectors (exact) and a nonempty expansion with a nonzero
/// dominant coefficient.
pub fn freeness_check(basis: &ExponentBasis, trials: u32, seed: u64) -> FreenessReport {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let shift = Rational::from(-1);
    let mut passes = 0;
    let mut failures = Vec::new();
    for t in 0..trials {
        let poly = random_poly(&mut rng, basis.len(), 4, 9);
        match expand(&poly, &shift, basis) {
            Err(e) => failures.push(format!("trial {t}: expansion failed: {e}")),
            Ok(expansion) => {
                if expansion.is_empty() {
                    failures.push(format!(
                        "trial {t}: nonzero polynomial {poly} expanded to the empty sum"
                    ));
                    continue;
                }
                // distinctness is structural (map keys); verify anyway
                let mut seen = std::collections::BTreeSet::new();
                let distinct = expansion.iter().all(|(_, v)| seen.insert(v.coords.clone()));
                if !distinct {
                    failures.push(format!("trial {t}: duplicate exponent vectors"));
                    continue;
                }
                match nonzero_certificate(basis, &expansion) {
                    Certificate::IsZero => {
                        failures.push(format!("trial {t}: no dominant term"));
                    }
                    Certificate::Dominant { coeff, .. } => {
                        if coeff == 0 {
                            failures.push(format!("trial {t}: zero dominant coefficient"));
                        } else {
                            passes += 1;
                        }
                    }
                }
            }
        }
    }
    FreenessReport { trials, passes, failures }
}

/// Separation data for two points through `e^{f}` with `f` a certified
/// strictly increasing primitive.
#[derive(Clone, Debug)]
pub struct SeparationReport {
    pub phi_x1: Real,
    pub phi_x2: Real,
    /// Certified lower bound for `|e^{f(x2)} - e^{f(x1)}|`.
    pub margin: Real,
    pub separated: bool,
}

impl fmt::Display for SeparationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "e^f(x1) = {:?} (nonzero), e^f(x2) = {:?}, certified separation margin {:?}: {}",
            self.phi_x1,
            self.phi_x2,
            self.margin,
            if self.separated { "separated" } else { "NOT separated" }
        )
    }
}

/// Check `e^{f(x1)} != 0` (with its value) and `e^{f(x1)} != e^{f(x2)}`
/// with a certified margin from the monotonicity certificate: the integrand
/// sits above a positive lower bound `lb`, so `f(x2) - f(x1) >= lb (x2 - x1)`.
pub fn separation_witness(
    f: &FnExpr,
    x1: &Rational,
    x2: &Rational,
    ctx: &EvalCtx,
) -> Result<SeparationReport> {
    if x1 == x2 {
        return Err(Error::InvalidInput("separation needs two distinct points".into()));
    }
    let child = match f {
        FnExpr::Primitive { child, .. } => child.as_ref(),
        other => {
            return Err(Error::InvalidInput(format!(
                "separation witnesses require a certified monotone primitive, got {}",
                other.describe()
            )))
        }
    };
    let lb = crate::constructions::lower_bound_cert(child, ctx)?;
    let bits = ctx.working_bits();
    let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
    let f1 = f.eval(x1, ctx)?;
    let f2 = f.eval(x2, ctx)?;
    let (e1, _) = f1.value.exp_checked()?;
    let (e2, _) = f2.value.exp_checked()?;
    // f(hi) - f(lo) >= lb * (hi - lo) minus the two quadrature bounds
    let gap = &(&lb * &Real::from_rational(&Rational::from(hi - lo), bits))
        - &(&f1.bound + &f2.bound);
    let f_lo = if x1 < x2 { &f1 } else { &f2 };
    let (e_lo, _) = (&f_lo.value - &f_lo.bound).exp_checked()?;
    // |e^{f(hi)} - e^{f(lo)}| >= e^{f(lo)} (e^{gap} - 1)
    let margin = &e_lo * &(&gap.exp() - &Real::one(bits));
    let separated = margin > Real::zero(64);
    Ok(SeparationReport { phi_x1: e1, phi_x2: e2, margin, separated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_smooth, monotone_primitive, sup_bound, TermPolicy};
    use crate::numkit::Prec;
    use crate::zeroset::parse_zeroset;

    fn qr(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn ctx() -> EvalCtx {
        EvalCtx::new(Prec::default())
    }

    #[test]
    fn basis_construction() {
        let b = ExponentBasis::new(vec![3, 2]).unwrap();
        assert_eq!(b.primes(), &[2, 3]);
        assert!(b.rate_value(0, 256) < b.rate_value(1, 256));
        assert!(ExponentBasis::new(vec![2, 2]).is_err());
        assert!(ExponentBasis::new(vec![4]).is_err());
        assert!(ExponentBasis::new(vec![]).is_err());
    }

    #[test]
    fn expand_single_variable() {
        let basis = ExponentBasis::new(vec![2]).unwrap();
        let p = MultiPoly::var(0);
        let e = expand(&p, &qr(-1, 1), &basis).unwrap();
        // e^{sqrt2 x} - 1
        assert_eq!(e.len(), 2);
        assert_eq!(e[0], (qr(-1, 1), ExponentVector::new(vec![0])));
        assert_eq!(e[1], (qr(1, 1), ExponentVector::new(vec![1])));
    }

    #[test]
    fn expand_pure_exponential() {
        let basis = ExponentBasis::new(vec![2]).unwrap();
        let p = MultiPoly::var(0);
        let e = expand(&p, &Rational::new(), &basis).unwrap();
        assert_eq!(e, vec![(qr(1, 1), ExponentVector::new(vec![1]))]);
    }

    #[test]
    fn expand_v1sq_v2_table() {
        // (X - 1)^2 (Y - 1) over (sqrt2, sqrt3):
        // X^2 Y - 2XY + Y - X^2 + 2X - 1
        let basis = ExponentBasis::new(vec![2, 3]).unwrap();
        let p = MultiPoly::from_terms([(qr(1, 1), vec![2, 1])]);
        let e = expand(&p, &qr(-1, 1), &basis).unwrap();
        let want: Vec<(Rational, Vec<u32>)> = vec![
            (qr(-1, 1), vec![0, 0]),
            (qr(1, 1), vec![0, 1]),
            (qr(2, 1), vec![1, 0]),
            (qr(-2, 1), vec![1, 1]),
            (qr(-1, 1), vec![2, 0]),
            (qr(1, 1), vec![2, 1]),
        ];
        assert_eq!(e.len(), want.len());
        for ((c, v), (wc, wv)) in e.iter().zip(&want) {
            assert_eq!(v.coords, *wv);
            assert_eq!(c, wc);
        }
    }

    #[test]
    fn expand_rejects_constant_term() {
        let basis = ExponentBasis::new(vec![2]).unwrap();
        let p = MultiPoly::from_terms([(qr(1, 1), vec![]), (qr(1, 1), vec![1])]);
        assert!(matches!(
            expand(&p, &qr(-1, 1), &basis),
            Err(Error::ConstantTermPresent)
        ));
    }

    #[test]
    fn certificate_for_commutator_is_zero() {
        // v1 v2 - v2 v1 cancels to the zero polynomial
        let p = MultiPoly::from_terms([(qr(1, 1), vec![1, 1]), (qr(-1, 1), vec![1, 1])]);
        assert!(p.is_zero());
        let basis = ExponentBasis::new(vec![2, 3]).unwrap();
        let e = expand(&p, &qr(-1, 1), &basis).unwrap();
        assert!(matches!(nonzero_certificate(&basis, &e), Certificate::IsZero));
    }

    #[test]
    fn certificate_dominant_terms() {
        let basis = ExponentBasis::new(vec![2, 3]).unwrap();
        let p = MultiPoly::var(0);
        let e = expand(&p, &qr(-1, 1), &basis).unwrap();
        match nonzero_certificate(&basis, &e) {
            Certificate::Dominant { vector, coeff, .. } => {
                assert_eq!(vector.coords, vec![1, 0]);
                assert_eq!(coeff, 1);
            }
            Certificate::IsZero => panic!("expected a dominant term"),
        }

        let p = MultiPoly::from_terms([(qr(1, 1), vec![2, 1])]);
        let e = expand(&p, &qr(-1, 1), &basis).unwrap();
        match nonzero_certificate(&basis, &e) {
            Certificate::Dominant { vector, coeff, .. } => {
                assert_eq!(vector.coords, vec![2, 1]);
                assert_eq!(coeff, 1);
            }
            Certificate::IsZero => panic!("expected a dominant term"),
        }
    }

    #[test]
    fn dominance_order_on_combinations() {
        let basis = ExponentBasis::new(vec![2, 3]).unwrap();
        let v = |a, b| ExponentVector::new(vec![a, b]);
        // sqrt2 < sqrt3
        assert_eq!(basis.cmp_dominance(&v(1, 0), &v(0, 1)), Ordering::Less);
        // 2 sqrt2 = 2.828 > sqrt3 = 1.732
        assert_eq!(basis.cmp_dominance(&v(2, 0), &v(0, 1)), Ordering::Greater);
        // equal vectors
        assert_eq!(basis.cmp_dominance(&v(1, 2), &v(1, 2)), Ordering::Equal);
        // the zero vector never dominates a positive one
        assert_eq!(basis.cmp_dominance(&v(0, 0), &v(1, 0)), Ordering::Less);
    }

    #[test]
    fn freeness_hundred_trials() {
        let basis = ExponentBasis::new(vec![2, 3, 5]).unwrap();
        let report = freeness_check(&basis, 100, 42);
        assert!(report.all_passed(), "{report}");
    }

    #[test]
    fn monomial_trial_term_count() {
        // (X - 1)^3 expands into exactly 4 binomial terms
        let basis = ExponentBasis::new(vec![2]).unwrap();
        let p = MultiPoly::from_terms([(qr(1, 1), vec![3])]);
        let e = expand(&p, &qr(-1, 1), &basis).unwrap();
        assert_eq!(e.len(), 4);
    }

    #[test]
    fn composed_element_vanishes_on_inner_zeros() {
        let z = parse_zeroset(r#"{"kind":"finite","points":[0]}"#).unwrap();
        let inner = build_smooth(&z).unwrap();
        let basis = ExponentBasis::new(vec![2, 3]).unwrap();
        let poly = MultiPoly::from_terms([(qr(1, 1), vec![2, 1])]);
        let elem = AlgebraElement::new(basis, qr(-1, 1), poly, inner).unwrap();
        let composed = elem.compose();
        let c = ctx();
        let v = composed.eval(&qr(0, 1), &c).unwrap();
        assert!(v.value.is_zero(), "a = -1 elements vanish where the inner function does");
        assert!(v.bound.is_zero());
        let off = composed.eval(&qr(1, 1), &c).unwrap();
        assert!(!off.value.is_zero());
        // hand value: (e^{sqrt2 s} - 1)^2 (e^{sqrt3 s} - 1) with s = e^{-1}
        let bits = 1024;
        let s = Real::from_int(-1, bits).exp();
        let e2 = &(&Real::from_int(2, bits).sqrt() * &s).exp() - &Real::one(bits);
        let e3 = &(&Real::from_int(3, bits).sqrt() * &s).exp() - &Real::one(bits);
        let want = &(&e2 * &e2) * &e3;
        assert!((&off.value - &want).abs() <= Real::pow2(-200, 64));
    }

    #[test]
    fn pure_exponential_of_zero_inner_is_one() {
        let basis = ExponentBasis::new(vec![2]).unwrap();
        let poly = MultiPoly::var(0);
        let elem =
            AlgebraElement::new(basis, Rational::new(), poly, FnExpr::Const(Rational::new()))
                .unwrap();
        let composed = elem.compose();
        let v = composed.eval(&qr(7, 3), &ctx()).unwrap();
        assert_eq!(v.value, Real::one(v.value.prec()));
    }

    #[test]
    fn expansion_matches_direct_evaluation() {
        use rand::SeedableRng;
        let basis = ExponentBasis::new(vec![2, 3]).unwrap();
        let shift = qr(-1, 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let bits = 1024;
        for _ in 0..20 {
            let poly = random_poly(&mut rng, 2, 4, 5);
            let expansion = expand(&poly, &shift, &basis).unwrap();
            for _ in 0..5 {
                let x = qr(rng.gen_range(-(1i64 << 12)..(1i64 << 12)), 1 << 12);
                let xr = Real::from_rational(&x, bits);
                // direct: P(e^{r1 x} - 1, e^{r2 x} - 1)
                let args: Vec<(Real, Real)> = (0..2)
                    .map(|i| {
                        let e = (&basis.rate_value(i, bits) * &xr).exp();
                        (&e - &Real::one(bits), Real::zero(bits))
                    })
                    .collect();
                let (direct, _) = poly.eval_with_bounds(&args, bits);
                // expansion: Σ c e^{(m·r) x}
                let mut via_sum = Real::zero(bits);
                for (c, v) in &expansion {
                    let rate = basis.combination(v, bits);
                    via_sum = &via_sum + &(&Real::from_rational(c, bits) * &(&rate * &xr).exp());
                }
                let diff = (&direct - &via_sum).abs();
                let scale = direct.abs().max(&Real::one(bits));
                assert!(
                    &diff / &scale <= Real::pow2(-900, 64),
                    "poly {poly} at {x}: {direct:?} vs {via_sum:?}"
                );
            }
        }
    }

    #[test]
    fn dominant_term_carries_the_growth() {
        // |Q(x) / (A* e^{m* x})| -> 1 along x = 10, 20, 40
        let basis = ExponentBasis::new(vec![2, 3]).unwrap();
        let poly = MultiPoly::from_terms([(qr(1, 1), vec![2, 1]), (qr(-3, 1), vec![0, 1])]);
        let expansion = expand(&poly, &qr(-1, 1), &basis).unwrap();
        let (vector, coeff) = match nonzero_certificate(&basis, &expansion) {
            Certificate::Dominant { vector, coeff, .. } => (vector, coeff),
            Certificate::IsZero => panic!("nonzero"),
        };
        let bits = 1024;
        let mut prev_gap: Option<Real> = None;
        for x in [10i64, 20, 40] {
            let xr = Real::from_int(x, bits);
            let args: Vec<(Real, Real)> = (0..2)
                .map(|i| {
                    let e = (&basis.rate_value(i, bits) * &xr).exp();
                    (&e - &Real::one(bits), Real::zero(bits))
                })
                .collect();
            let (q, _) = poly.eval_with_bounds(&args, bits);
            let dominant = &Real::from_rational(&coeff, bits)
                * &(&basis.combination(&vector, bits) * &xr).exp();
            let ratio = &q / &dominant;
            let gap = (&ratio - &Real::one(bits)).abs();
            if let Some(p) = prev_gap {
                assert!(gap < p, "ratio should approach 1");
            }
            if x == 40 {
                assert!(gap < Real::from_rational(&qr(1, 10), 64), "within 10% at x = 40");
            }
            prev_gap = Some(gap);
        }
    }

    #[test]
    fn separation_witness_with_margin() {
        let c = ctx();
        let g = FnExpr::PringsheimSeries { terms: TermPolicy::Auto };
        let shift = Rational::from(1) + sup_bound(&g, &c).unwrap().to_rational().unwrap();
        let h = FnExpr::Shift { child: Box::new(g), offset: shift };
        let f = monotone_primitive(h, qr(0, 1), &c).unwrap();
        let report = separation_witness(&f, &qr(0, 1), &qr(1, 4), &c).unwrap();
        assert!(report.separated);
        assert!(report.margin > Real::zero(64));
        // e^{f(x1)} is trivially nonzero
        assert!(!report.phi_x1.is_zero());
        // symmetric order
        let report2 = separation_witness(&f, &qr(1, 4), &qr(0, 1), &c).unwrap();
        assert!(report2.separated);
        // degenerate pair rejected
        assert!(separation_witness(&f, &qr(1, 4), &qr(1, 4), &c).is_err());
    }
}
