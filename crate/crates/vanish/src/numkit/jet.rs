//! Truncated Taylor-jet arithmetic.
//!
//! A jet stores scaled derivatives `coeffs[k] = f^(k)(x0)/k!` together with a
//! nonnegative truncation bound per coefficient. Bounds move through the
//! recurrences interval-style (center/radius); rounding is left to the guard
//! precision.

use rug::{Complete, Integer};

use crate::error::{Error, Result};
use crate::numkit::real::Real;

#[derive(Clone, Debug)]
pub struct Jet {
    x0: Real,
    coeffs: Vec<Real>,
    err: Vec<Real>,
}

impl Jet {
    pub fn from_coeffs(x0: Real, coeffs: Vec<Real>, err: Vec<Real>) -> Jet {
        assert_eq!(coeffs.len(), err.len());
        assert!(!coeffs.is_empty());
        Jet { x0, coeffs, err }
    }

    /// Jet of the identity `x` at `x0`: `[x0, 1, 0, ...]`.
    pub fn var(x0: Real, order: usize) -> Jet {
        let bits = x0.prec();
        let mut coeffs = vec![Real::zero(bits); order + 1];
        coeffs[0] = x0.clone();
        if order >= 1 {
            coeffs[1] = Real::one(bits);
        }
        let err = vec![Real::zero(bits); order + 1];
        Jet { x0, coeffs, err }
    }

    /// Jet of a constant.
    pub fn constant(x0: Real, c: Real, order: usize) -> Jet {
        let bits = x0.prec().max(c.prec());
        let mut coeffs = vec![Real::zero(bits); order + 1];
        coeffs[0] = c;
        let err = vec![Real::zero(bits); order + 1];
        Jet { x0, coeffs, err }
    }

    /// All-zero jet with zero bounds (an exactly-flat function).
    pub fn zero(x0: Real, order: usize) -> Jet {
        let bits = x0.prec();
        Jet {
            coeffs: vec![Real::zero(bits); order + 1],
            err: vec![Real::zero(bits); order + 1],
            x0,
        }
    }

    /// Jet of `slope * x + offset` at `x0`.
    pub fn linear(x0: Real, slope: Real, offset: Real, order: usize) -> Jet {
        let bits = x0.prec().max(slope.prec()).max(offset.prec());
        let mut coeffs = vec![Real::zero(bits); order + 1];
        coeffs[0] = &(&slope * &x0) + &offset;
        if order >= 1 {
            coeffs[1] = slope;
        }
        let err = vec![Real::zero(bits); order + 1];
        Jet { x0, coeffs, err }
    }

    pub fn x0(&self) -> &Real {
        &self.x0
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &Real {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Real] {
        &self.coeffs
    }

    pub fn err(&self, k: usize) -> &Real {
        &self.err[k]
    }

    pub fn errs(&self) -> &[Real] {
        &self.err
    }

    /// Raw derivative `f^(k)(x0) = k! * coeffs[k]`.
    pub fn deriv(&self, k: usize) -> Real {
        let fact = Integer::factorial(k as u32).complete();
        let f = Real::from_integer(&fact, self.coeffs[k].prec());
        &self.coeffs[k] * &f
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.coeffs.iter().all(Real::is_zero) && self.err.iter().all(Real::is_zero)
    }

    pub fn has_zero_err(&self) -> bool {
        self.err.iter().all(Real::is_zero)
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if self.x0 != other.x0 {
            return Err(Error::JetMismatch("expansion points differ".into()));
        }
        if self.order() != other.order() {
            return Err(Error::JetMismatch(format!(
                "orders differ: {} vs {}",
                self.order(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        let err = self
            .err
            .iter()
            .zip(&other.err)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Jet { x0: self.x0.clone(), coeffs, err })
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        let err = self
            .err
            .iter()
            .zip(&other.err)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Jet { x0: self.x0.clone(), coeffs, err })
    }

    pub fn neg(&self) -> Jet {
        Jet {
            x0: self.x0.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            err: self.err.clone(),
        }
    }

    pub fn scale(&self, c: &Real) -> Jet {
        let ca = c.abs();
        Jet {
            x0: self.x0.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
            err: self.err.iter().map(|e| e * &ca).collect(),
        }
    }

    pub fn add_const(&self, c: &Real) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] = &out.coeffs[0] + c;
        out
    }

    /// Cauchy product; bounds propagate by the triangle inequality
    /// `|a||eb| + |ea||b| + |ea||eb|` per convolution cell.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        let n = self.order();
        let bits = self.coeffs[0].prec().max(other.coeffs[0].prec());
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut err = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut sum = Real::zero(bits);
            let mut bound = Real::zero(bits);
            for i in 0..=k {
                let (a, ea) = (&self.coeffs[i], &self.err[i]);
                let (b, eb) = (&other.coeffs[k - i], &other.err[k - i]);
                sum = &sum + &(a * b);
                let aa = a.abs();
                let bb = b.abs();
                bound = &bound + &(&(&aa * eb) + &(&(ea * &bb) + &(ea * eb)));
            }
            coeffs.push(sum);
            err.push(bound);
        }
        Ok(Jet { x0: self.x0.clone(), coeffs, err })
    }

    /// Reciprocal via the division recurrence. Requires the leading
    /// coefficient to be nonzero beyond its own error bound.
    pub fn recip(&self) -> Result<Jet> {
        let a0 = &self.coeffs[0];
        let e0 = &self.err[0];
        if a0.is_zero() || a0.abs() <= *e0 {
            return Err(Error::PoleAtExpansionPoint);
        }
        let n = self.order();
        let b0 = a0.recip();
        // radius of 1/(a0 +- e0): e0 / (|a0| (|a0| - e0))
        let a0abs = a0.abs();
        let r0 = &(e0 / &a0abs) / &(&a0abs - e0);
        let mut coeffs = vec![b0.clone()];
        let mut err = vec![r0];
        for k in 1..=n {
            let mut t = Real::zero(a0.prec());
            let mut rt = Real::zero(a0.prec());
            for j in 1..=k {
                let (a, ea) = (&self.coeffs[j], &self.err[j]);
                let (b, eb) = (&coeffs[k - j], &err[k - j]);
                t = &t + &(a * b);
                rt = &rt + &(&(&a.abs() * eb) + &(&(ea * &b.abs()) + &(ea * eb)));
            }
            // b_k = -b0 * t
            let bk = -&(&b0 * &t);
            let rk = &(&b0.abs() * &rt) + &(&err[0] * &(&t.abs() + &rt));
            coeffs.push(bk);
            err.push(rk);
        }
        Ok(Jet { x0: self.x0.clone(), coeffs, err })
    }

    /// Jet of `exp(self)` by the ODE recurrence `(e^a)' = a' e^a`.
    ///
    /// Returns the jet and an underflow flag: when `exp(a0)` is below the
    /// representable range the jet is exactly zero and the flag is set.
    pub fn exp(&self) -> Result<(Jet, bool)> {
        let n = self.order();
        let (b0, underflow) = self.coeffs[0].exp_checked()?;
        // radius of exp(a0 +- e0) around exp(a0): exp(a0 + e0) - exp(a0)
        let r0 = if self.err[0].is_zero() {
            Real::zero(b0.prec())
        } else {
            let (hi, _) = (&self.coeffs[0] + &self.err[0]).exp_checked()?;
            &hi - &b0
        };
        let mut coeffs = vec![b0];
        let mut err = vec![r0];
        let bits = self.coeffs[0].prec();
        for k in 1..=n {
            let mut sum = Real::zero(bits);
            let mut bound = Real::zero(bits);
            for j in 1..=k {
                let jr = Real::from_int(j as i64, bits);
                let (a, ea) = (&self.coeffs[j], &self.err[j]);
                let (b, eb) = (&coeffs[k - j], &err[k - j]);
                sum = &sum + &(&jr * &(a * b));
                bound = &bound + &(&jr * &(&(&a.abs() * eb) + &(ea * &(&b.abs() + eb))));
            }
            let kr = Real::from_int(k as i64, bits);
            coeffs.push(&sum / &kr);
            err.push(&bound / &kr);
        }
        Ok((Jet { x0: self.x0.clone(), coeffs, err }, underflow))
    }

    /// Simultaneous jets of `sin(self)` and `cos(self)` via the coupled
    /// recurrence.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.order();
        let bits = self.coeffs[0].prec();
        let (s0, c0) = self.coeffs[0].sin_cos();
        // |sin'| <= 1 and |cos'| <= 1, so the order-0 radius is just e0.
        let r0 = self.err[0].clone();
        let mut s = vec![s0];
        let mut c = vec![c0];
        let mut es = vec![r0.clone()];
        let mut ec = vec![r0];
        for k in 1..=n {
            let mut sum_s = Real::zero(bits);
            let mut sum_c = Real::zero(bits);
            let mut bound_s = Real::zero(bits);
            let mut bound_c = Real::zero(bits);
            for j in 1..=k {
                let jr = Real::from_int(j as i64, bits);
                let (a, ea) = (&self.coeffs[j], &self.err[j]);
                sum_s = &sum_s + &(&jr * &(a * &c[k - j]));
                sum_c = &sum_c + &(&jr * &(a * &s[k - j]));
                let aa = a.abs();
                bound_s = &bound_s + &(&jr * &(&(&aa * &ec[k - j]) + &(ea * &(&c[k - j].abs() + &ec[k - j]))));
                bound_c = &bound_c + &(&jr * &(&(&aa * &es[k - j]) + &(ea * &(&s[k - j].abs() + &es[k - j]))));
            }
            let kr = Real::from_int(k as i64, bits);
            s.push(&sum_s / &kr);
            c.push(-&(&sum_c / &kr));
            es.push(&bound_s / &kr);
            ec.push(&bound_c / &kr);
        }
        let x0 = self.x0.clone();
        (
            Jet { x0: x0.clone(), coeffs: s, err: es },
            Jet { x0, coeffs: c, err: ec },
        )
    }

    /// Integer power `m >= 1` by binary exponentiation.
    pub fn pow_int(&self, m: u32) -> Result<Jet> {
        if m < 1 {
            return Err(Error::InvalidInput("jet power requires m >= 1".into()));
        }
        let mut base = self.clone();
        let mut e = m;
        let mut acc: Option<Jet> = None;
        loop {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a.mul(&base)?,
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            base = base.mul(&base)?;
        }
        Ok(acc.expect("m >= 1"))
    }
}
