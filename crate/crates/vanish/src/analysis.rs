//! Diagnostics that make the non-finitely-decidable claims observable.
//!
//! A radius trace reports finite-order Taylor-radius estimates
//! `r_n = |c_n|^{-1/n}`; collapse of the trace is the finite-order shadow of
//! a zero radius of convergence, never a claim about the true limsup. A
//! verification report runs finitely many checks (exact zeros, margins,
//! flatness schedules) and records every point, value, bound, and verdict;
//! reports are reproducible bit-for-bit from (seed, precision, grid).

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Rational;

use crate::bumps;
use crate::constructions::{EvalCtx, FnExpr, MultiPoly};
use crate::error::{Error, Result};
use crate::numkit::rat::format_rational;
use crate::numkit::Real;
use crate::zeroset::ZeroSetSpec;

/// One order of a radius trace.
#[derive(Clone, Debug)]
pub struct RadiusEntry {
    pub order: usize,
    pub coeff: Real,
    pub bound: Real,
    /// `|c_n|^{-1/n}`; `None` when the coefficient is exactly zero or does
    /// not exceed its own truncation bound (indeterminate).
    pub estimate: Option<Real>,
    pub status: RadiusStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusStatus {
    Ok,
    ZeroCoeff,
    Indeterminate,
}

/// Finite-order radius-of-convergence diagnostics at one point.
#[derive(Clone, Debug)]
pub struct RadiusTrace {
    pub x0: Rational,
    pub entries: Vec<RadiusEntry>,
    /// `(N, rho_N)` with `rho_N = (max_{1<=n<=N} |c_n|^{1/n})^{-1}` over the
    /// usable orders; non-increasing in `N` by construction.
    pub window: Vec<(usize, Option<Real>)>,
}

fn nth_root(x: &Real, n: usize) -> Real {
    // x > 0
    (&x.ln() / &Real::from_int(n as i64, x.prec())).exp()
}

pub fn radius_trace(
    expr: &FnExpr,
    x0: &Rational,
    max_order: usize,
    ctx: &EvalCtx,
) -> Result<RadiusTrace> {
    if max_order < 1 {
        return Err(Error::InvalidInput("radius trace needs max order >= 1".into()));
    }
    let jet = expr.jet(x0, max_order, ctx)?.jet;
    let mut entries = Vec::with_capacity(max_order);
    let mut window = Vec::with_capacity(max_order);
    let mut best_growth: Option<Real> = None; // max |c_n|^{1/n}
    for n in 1..=max_order {
        let coeff = jet.coeff(n).clone();
        let bound = jet.err(n).clone();
        let (status, estimate) = if coeff.is_zero() {
            (RadiusStatus::ZeroCoeff, None)
        } else if coeff.abs() <= bound {
            (RadiusStatus::Indeterminate, None)
        } else {
            let growth = nth_root(&coeff.abs(), n);
            let est = growth.recip();
            best_growth = Some(match best_growth.take() {
                None => growth.clone(),
                Some(b) => b.max(&growth),
            });
            (RadiusStatus::Ok, Some(est))
        };
        entries.push(RadiusEntry { order: n, coeff, bound, estimate, status });
        window.push((n, best_growth.as_ref().map(Real::recip)));
    }
    Ok(RadiusTrace { x0: x0.clone(), entries, window })
}

impl RadiusTrace {
    pub fn estimate_at(&self, order: usize) -> Option<&Real> {
        self.entries
            .iter()
            .find(|e| e.order == order)
            .and_then(|e| e.estimate.as_ref())
    }

    pub fn window_at(&self, order: usize) -> Option<&Real> {
        self.window
            .iter()
            .find(|(n, _)| *n == order)
            .and_then(|(_, r)| r.as_ref())
    }

    pub fn to_text(&self, ctx: &EvalCtx) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "radius trace at x0 = {}", format_rational(&self.x0));
        let _ = writeln!(out, "order | coeff | tail_bound | r_n | status");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{} | {} | {} | {} | {}",
                e.order,
                e.coeff.to_decimal(ctx.prec),
                e.bound.to_decimal(ctx.prec),
                e.estimate
                    .as_ref()
                    .map(|r| r.to_decimal(ctx.prec))
                    .unwrap_or_else(|| "-".into()),
                match e.status {
                    RadiusStatus::Ok => "ok",
                    RadiusStatus::ZeroCoeff => "zero-coefficient (skipped)",
                    RadiusStatus::Indeterminate => "indeterminate (below tail bound)",
                },
            );
        }
        let _ = writeln!(out, "window rho_N (non-increasing):");
        for (n, r) in &self.window {
            let _ = writeln!(
                out,
                "  N = {} : {}",
                n,
                r.as_ref().map(|r| r.to_decimal(ctx.prec)).unwrap_or_else(|| "-".into())
            );
        }
        out
    }

    pub fn to_csv(&self, ctx: &EvalCtx) -> String {
        let mut out = String::from("order,coeff,tail_bound,r_n,rho_N\n");
        for (e, (_, rho)) in self.entries.iter().zip(&self.window) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                e.order,
                e.coeff.to_decimal(ctx.prec),
                e.bound.to_decimal(ctx.prec),
                e.estimate.as_ref().map(|r| r.to_decimal(ctx.prec)).unwrap_or_default(),
                rho.as_ref().map(|r| r.to_decimal(ctx.prec)).unwrap_or_default(),
            );
        }
        out
    }
}

/// Verdict of one finitely checkable item.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckRow {
    pub point: String,
    pub value: String,
    pub bound: String,
    pub verdict: Verdict,
    pub detail: String,
}

/// A reproducible finite-check report. Never asserts nowhere-analyticity or
/// a true radius value; finite-order evidence only.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub title: String,
    pub construction: String,
    pub config: String,
    pub rows: Vec<CheckRow>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "report: {}", self.title);
        let _ = writeln!(out, "construction: {}", self.construction);
        let _ = writeln!(out, "config: {}", self.config);
        let _ = writeln!(out, "point | value | bound | verdict | detail");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{} | {} | {} | {} | {}",
                r.point, r.value, r.bound, r.verdict.as_str(), r.detail
            );
        }
        let _ = writeln!(out, "overall: {}", if self.passed { "PASS" } else { "FAIL" });
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,value,bound,verdict,detail\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.point.replace(',', ";"),
                r.value,
                r.bound,
                r.verdict.as_str(),
                r.detail.replace(',', ";"),
            );
        }
        out
    }

    fn tally(&mut self) {
        self.passed = self.rows.iter().all(|r| r.verdict != Verdict::Fail);
    }
}

/// Sampling plan for zero-set verification.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub in_count: usize,
    pub off_count: usize,
    /// Sampling window for off-set points; defaults to the set's own window.
    pub window: Option<(Rational, Rational)>,
}

impl Default for GridSpec {
    fn default() -> GridSpec {
        GridSpec { in_count: 200, off_count: 1000, window: None }
    }
}

/// Check that `expr` vanishes bit-exactly on sampled members of `Z` and is
/// nonzero with margin beyond its truncation bound off `Z`.
pub fn verify_zero_set(
    expr: &FnExpr,
    z: &ZeroSetSpec,
    grid: &GridSpec,
    seed: u64,
    ctx: &EvalCtx,
) -> Result<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VerificationReport {
        title: format!("zero-set verification over {}", z.kind_name()),
        construction: expr.describe(),
        config: format!(
            "seed={}, precision={}, in_count={}, off_count={}",
            seed,
            ctx.prec.bits(),
            grid.in_count,
            grid.off_count
        ),
        rows: Vec::new(),
        passed: true,
    };
    let members = z.member_samples(grid.in_count, &mut rng)?;
    for x in &members {
        let v = expr.eval(x, ctx)?;
        let exact_zero = v.value.is_zero() && v.bound.is_zero() && !v.underflow;
        report.rows.push(CheckRow {
            point: format_rational(x),
            value: v.value.to_decimal(ctx.prec),
            bound: v.bound.to_decimal(ctx.prec),
            verdict: if exact_zero { Verdict::Pass } else { Verdict::Fail },
            detail: if exact_zero {
                "bit-exact zero on the set".into()
            } else {
                "expected the exact zero with zero bound".into()
            },
        });
    }
    if grid.off_count > 0 && !z.flags().is_dense.value {
        let window = grid.window.clone().unwrap_or_else(|| z.default_window());
        let offs = z.off_samples(grid.off_count, window, &mut rng)?;
        for x in &offs {
            match expr.eval(x, ctx) {
                Ok(v) => {
                    let (verdict, detail) = if v.value.is_zero() && v.underflow {
                        (
                            Verdict::Pass,
                            "positive but below the representable range (certified by gap support)"
                                .to_string(),
                        )
                    } else if !v.value.is_zero() && v.value.abs() > v.bound {
                        (Verdict::Pass, "nonzero with margin beyond the bound".to_string())
                    } else {
                        (Verdict::Fail, "vanishes (or within bound) off the set".to_string())
                    };
                    report.rows.push(CheckRow {
                        point: format_rational(x),
                        value: v.value.to_decimal(ctx.prec),
                        bound: v.bound.to_decimal(ctx.prec),
                        verdict,
                        detail,
                    });
                }
                Err(Error::Undecidable { detail, .. }) => {
                    report.rows.push(CheckRow {
                        point: format_rational(x),
                        value: String::new(),
                        bound: String::new(),
                        verdict: Verdict::Skipped,
                        detail,
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }
    report.tally();
    Ok(report)
}

/// Boundary-flatness schedule: for each order `k <= k_max` and each delta,
/// the sampled supremum of `|f^(k-1)(x)| / (x - c)` over `(c, c+delta)`
/// against a kernel-independent certificate, with the schedule required to
/// decrease.
#[allow(clippy::too_many_arguments)]
pub fn flatness_report(
    expr: &FnExpr,
    z: &ZeroSetSpec,
    c: &Rational,
    k_max: usize,
    deltas: &[Rational],
    samples_per_delta: usize,
    seed: u64,
    ctx: &EvalCtx,
) -> Result<VerificationReport> {
    if !z.is_boundary_point(c)? {
        return Err(Error::InvalidInput(format!(
            "flatness reports need a boundary point of the zero set; {} is not one",
            format_rational(c)
        )));
    }
    if k_max < 1 || deltas.is_empty() {
        return Err(Error::InvalidInput("need k_max >= 1 and a nonempty delta schedule".into()));
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| b.cmp(a)); // decreasing
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = ctx.working_bits();
    let mut report = VerificationReport {
        title: format!("boundary flatness at c = {}", format_rational(c)),
        construction: expr.describe(),
        config: format!(
            "seed={}, precision={}, k_max={}, samples={}",
            seed,
            ctx.prec.bits(),
            k_max,
            samples_per_delta
        ),
        rows: Vec::new(),
        passed: true,
    };
    for k in 1..=k_max {
        let mut prev_sup: Option<Real> = None;
        for delta in &sorted {
            let mut sup = Real::zero(bits);
            let mut underflow_count = 0usize;
            for _ in 0..samples_per_delta {
                let t = Rational::from((rng.gen_range(1..=(1i64 << 40)), 1i64 << 40));
                let x = c.clone() + delta.clone() * t;
                let j = expr.jet(&x, k - 1, ctx)?;
                if j.underflow {
                    underflow_count += 1;
                }
                let num = j.jet.deriv(k - 1).abs();
                let den = Real::from_rational(&Rational::from(&x - c), bits);
                sup = sup.max(&(&num / &den));
            }
            let cert = bumps::uniform_flatness_cert(k, delta, bits);
            let below_cert = sup <= cert;
            let decreasing = prev_sup.as_ref().map(|p| sup < *p).unwrap_or(true);
            let verdict = if below_cert && decreasing { Verdict::Pass } else { Verdict::Fail };
            let mut detail = String::new();
            if !below_cert {
                detail.push_str("sampled sup exceeds the certificate; ");
            }
            if !decreasing {
                detail.push_str("sup did not decrease along the schedule; ");
            }
            if detail.is_empty() {
                detail = format!(
                    "sup of |f^({})(x)|/(x-c) below certificate; decreasing along schedule",
                    k - 1
                );
            }
            if underflow_count > 0 {
                let _ = write!(detail, " ({underflow_count} samples below representable range)");
            }
            report.rows.push(CheckRow {
                point: format!("k={} delta={}", k, format_rational(delta)),
                value: sup.to_decimal(ctx.prec),
                bound: cert.to_decimal(ctx.prec),
                verdict,
                detail,
            });
            prev_sup = Some(sup);
        }
    }
    report.tally();
    Ok(report)
}

/// The one-dimensionality obstruction: for independent `f, g` vanishing
/// exactly on `Z` and `x0` off `Z`, the combination
/// `h = g(x0) f - f(x0) g` vanishes at `x0` yet is not identically zero, so
/// no two-dimensional space of functions shares the exact zero set.
pub fn dim_le_one_demo(
    f: &FnExpr,
    g: &FnExpr,
    z: &ZeroSetSpec,
    x0: &Rational,
    witness_points: &[Rational],
    ctx: &EvalCtx,
) -> Result<VerificationReport> {
    if z.membership(x0)? {
        return Err(Error::InvalidInput(format!(
            "x0 = {} lies in the zero set; pick a point off it",
            format_rational(x0)
        )));
    }
    let f0 = f.eval(x0, ctx)?;
    let g0 = g.eval(x0, ctx)?;
    let c1 = g0.value.to_rational().expect("finite value");
    let c2 = -f0.value.to_rational().expect("finite value");
    let poly = MultiPoly::from_terms([(c1, vec![1, 0]), (c2, vec![0, 1])]);
    let h = FnExpr::PolyCombine { poly, children: vec![f.clone(), g.clone()] };
    let mut report = VerificationReport {
        title: "dimension-at-most-one obstruction".to_string(),
        construction: format!("h = g(x0) f - f(x0) g over f = {}, g = {}", f.describe(), g.describe()),
        config: format!("x0={}, precision={}", format_rational(x0), ctx.prec.bits()),
        rows: Vec::new(),
        passed: true,
    };
    let at_x0 = h.eval(x0, ctx)?;
    // the two products cancel exactly in correctly rounded arithmetic
    let guard = Real::pow2(-(2 * ctx.prec.bits() as i32), ctx.working_bits());
    let scale = f0.value.abs().max(&g0.value.abs()).max(&Real::one(64));
    let vanish_ok = at_x0.value.abs() <= &(&at_x0.bound + &guard) * &scale.max(&Real::one(64));
    report.rows.push(CheckRow {
        point: format!("x0={}", format_rational(x0)),
        value: at_x0.value.to_decimal(ctx.prec),
        bound: at_x0.bound.to_decimal(ctx.prec),
        verdict: if vanish_ok { Verdict::Pass } else { Verdict::Fail },
        detail: "h(x0) vanishes to guard precision".into(),
    });
    let mut witness_found = false;
    for x1 in witness_points {
        if x1 == x0 || z.membership(x1)? {
            continue;
        }
        let v = h.eval(x1, ctx)?;
        let threshold = &v.bound * &Real::from_int(10, ctx.working_bits());
        if !v.value.is_zero() && v.value.abs() > threshold {
            witness_found = true;
            report.rows.push(CheckRow {
                point: format!("x1={}", format_rational(x1)),
                value: v.value.to_decimal(ctx.prec),
                bound: v.bound.to_decimal(ctx.prec),
                verdict: Verdict::Pass,
                detail: "witness: |h(x1)| exceeds 10x its bound, so h is not identically zero; its zero set strictly contains Z plus x0".into(),
            });
            break;
        }
    }
    if !witness_found {
        report.rows.push(CheckRow {
            point: "witness-search".into(),
            value: String::new(),
            bound: String::new(),
            verdict: Verdict::Skipped,
            detail: "no nonvanishing witness found: the pair behaves linearly dependent (h = 0 identically)".into(),
        });
    }
    report.tally();
    Ok(report)
}
