//! Finite descriptions of closed subsets of the real line.
//!
//! A `ZeroSetSpec` answers three kinds of question: exact membership of a
//! rational point, location of the complementary gap containing a
//! non-member, and which constructions the set admits (`classify`). The
//! classification flags are generator metadata with hardcoded
//! justifications, not something inferred from a black-box membership test:
//! density and nowhere-density of an arbitrary closed set are not decidable
//! from finitely many queries.

use std::cmp::Ordering;
use std::fmt;

use rand::Rng;
use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::numkit::rat::{format_rational, parse_rational};

/// An extended rational endpoint; infinities mark unbounded gaps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum XRat {
    NegInf,
    Fin(Rational),
    PosInf,
}

impl XRat {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            XRat::Fin(q) => Some(q),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, XRat::Fin(_))
    }
}

impl PartialOrd for XRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for XRat {
    fn cmp(&self, other: &Self) -> Ordering {
        use XRat::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
            (Fin(a), Fin(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for XRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XRat::NegInf => write!(f, "-inf"),
            XRat::Fin(q) => write!(f, "{}", format_rational(q)),
            XRat::PosInf => write!(f, "+inf"),
        }
    }
}

/// A maximal connected component `(a, b)` of the complement of `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gap {
    pub a: XRat,
    pub b: XRat,
}

impl Gap {
    fn new(a: XRat, b: XRat) -> Gap {
        debug_assert!(a < b);
        Gap { a, b }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let x = XRat::Fin(x.clone());
        self.a < x && x < self.b
    }
}

impl fmt::Display for Gap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Generator kinds for the supported closed sets.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// A finite, sorted list of distinct points.
    FiniteSet(Vec<Rational>),
    /// Disjoint closed intervals `[a, b]` (degenerate allowed), sorted.
    IntervalUnion(Vec<(Rational, Rational)>),
    /// `{ k * step : k integer }`, step > 0.
    IntegerLattice { step: Rational },
    /// `{0} ∪ {±1/n : n ≥ 1}`.
    ReciprocalSeq,
    /// The middle-thirds Cantor set, queries resolved to `depth` levels.
    CantorMiddleThirds { depth: u32 },
    /// Complement of the first `terms` intervals `(q_n - ε/2^{n+1}, q_n + ε/2^{n+1})`
    /// over the fixed enumeration of `ℚ ∩ [0,1]`; membership is truncated.
    FatComplement { epsilon: Rational, terms: u32 },
    EmptySet,
    FullLine,
}

/// A classification flag with its one-line justification.
#[derive(Clone, Debug, PartialEq)]
pub struct Flag {
    pub value: bool,
    pub why: String,
}

impl Flag {
    fn new(value: bool, why: &str) -> Flag {
        Flag { value, why: why.to_string() }
    }
}

/// Hardcoded per-generator topological facts.
#[derive(Clone, Debug, PartialEq)]
pub struct Flags {
    pub is_closed: Flag,
    pub has_accumulation_point: Flag,
    pub empty_interior: Flag,
    pub is_dense: Flag,
    pub is_nowhere_dense: Flag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeroSetSpec {
    generator: Generator,
    flags: Flags,
}

/// Which constructions the set admits, each with the reason.
#[derive(Clone, Debug)]
pub struct ClassificationReport {
    pub entire_exact_possible: Flag,
    pub smooth_exact_possible: Flag,
    pub singular_exact_possible: Flag,
    /// Known *sufficient* condition only; no full characterization is known.
    pub pringsheim_exact_possible: Flag,
    pub smooth_contained_nontrivial: Flag,
    pub singular_contained_nonempty: Flag,
}

impl ClassificationReport {
    pub fn rows(&self) -> Vec<(&'static str, &Flag)> {
        vec![
            ("entire_exact_possible", &self.entire_exact_possible),
            ("smooth_exact_possible", &self.smooth_exact_possible),
            ("singular_exact_possible", &self.singular_exact_possible),
            ("pringsheim_exact_possible", &self.pringsheim_exact_possible),
            ("smooth_contained_nontrivial", &self.smooth_contained_nontrivial),
            ("singular_contained_nonempty", &self.singular_contained_nonempty),
        ]
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

impl ZeroSetSpec {
    pub fn new(generator: Generator) -> Result<ZeroSetSpec> {
        validate(&generator)?;
        let flags = flags_for(&generator);
        Ok(ZeroSetSpec { generator, flags })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn flags(&self) -> &Flags {
        &self.flags
    }

    pub fn kind_name(&self) -> &'static str {
        match self.generator {
            Generator::FiniteSet(_) => "finite",
            Generator::IntervalUnion(_) => "intervals",
            Generator::IntegerLattice { .. } => "integer_lattice",
            Generator::ReciprocalSeq => "reciprocal",
            Generator::CantorMiddleThirds { .. } => "cantor",
            Generator::FatComplement { .. } => "fat_complement",
            Generator::EmptySet => "empty_set",
            Generator::FullLine => "full_line",
        }
    }

    /// Exact membership for every generator except `FatComplement`, whose
    /// truncation can return `Undecidable`.
    pub fn membership(&self, x: &Rational) -> Result<bool> {
        match &self.generator {
            Generator::FiniteSet(pts) => Ok(pts.binary_search(x).is_ok()),
            Generator::IntervalUnion(comps) => Ok(interval_index(comps, x).is_some()),
            Generator::IntegerLattice { step } => {
                let ratio = Rational::from(x / step);
                Ok(*ratio.denom() == 1)
            }
            Generator::ReciprocalSeq => {
                if *x == 0 {
                    return Ok(true);
                }
                let inv = Rational::from(x.recip_ref());
                Ok(*inv.denom() == 1 && inv.numer().clone().abs() >= 1)
            }
            Generator::CantorMiddleThirds { depth } => {
                match cantor_walk(x, *depth)? {
                    CantorPlace::Member => Ok(true),
                    CantorPlace::InGap(_) => Ok(false),
                }
            }
            Generator::FatComplement { epsilon, terms } => {
                fat_membership(epsilon, *terms, x)
            }
            Generator::EmptySet => Ok(false),
            Generator::FullLine => Ok(true),
        }
    }

    /// The unique complementary gap containing `x`, or `None` if `x` is a
    /// member.
    pub fn locate_gap(&self, x: &Rational) -> Result<Option<Gap>> {
        if self.membership(x)? {
            return Ok(None);
        }
        let gap = match &self.generator {
            Generator::FiniteSet(pts) => neighbors_gap(pts, x),
            Generator::IntervalUnion(comps) => {
                let endpoints: Vec<XRat> = comps
                    .iter()
                    .flat_map(|(a, b)| [XRat::Fin(a.clone()), XRat::Fin(b.clone())])
                    .collect();
                gap_from_sorted_endpoints(&endpoints, comps, x)
            }
            Generator::IntegerLattice { step } => {
                let k = Rational::from(x / step).floor();
                let a = Rational::from(&k * step);
                let b = Rational::from(&(k + Rational::from(1)) * step);
                Gap::new(XRat::Fin(a), XRat::Fin(b))
            }
            Generator::ReciprocalSeq => reciprocal_gap(x),
            Generator::CantorMiddleThirds { depth } => {
                match cantor_walk(x, *depth)? {
                    CantorPlace::InGap(g) => g,
                    CantorPlace::Member => unreachable!("membership was false"),
                }
            }
            Generator::FatComplement { .. } => {
                return Err(Error::Undecidable {
                    set: "fat_complement".into(),
                    detail: "maximal gaps are not finitely resolvable from the truncation".into(),
                });
            }
            Generator::EmptySet => Gap::new(XRat::NegInf, XRat::PosInf),
            Generator::FullLine => unreachable!("membership was true"),
        };
        Ok(Some(gap))
    }

    pub fn classify(&self) -> ClassificationReport {
        let f = &self.flags;
        let is_full_line = matches!(self.generator, Generator::FullLine);
        let entire = if is_full_line {
            Flag::new(true, "Z is the whole line; the zero function is entire")
        } else if !f.has_accumulation_point.value {
            Flag::new(true, "Z has no accumulation point; a polynomial or convergent canonical product vanishes exactly on Z")
        } else {
            Flag::new(false, "a nonzero entire function has isolated real zeros, but Z has an accumulation point")
        };
        let smooth = Flag::new(
            true,
            "Z is closed; the sum of one flat bump per complementary gap vanishes exactly on Z",
        );
        let singular = if f.empty_interior.value {
            Flag::new(true, "Z is closed with empty interior; a zero-free nowhere-analytic factor times the gap-bump sum keeps the zero set and kills analyticity everywhere")
        } else {
            Flag::new(false, "Z has interior points, where any function vanishing exactly on Z is locally zero, hence analytic")
        };
        let pringsheim = if !f.has_accumulation_point.value {
            Flag::new(true, "known sufficient condition holds: Z is discrete, so a zero-free function with everywhere-zero Taylor radius times an entire function vanishing on Z works")
        } else {
            Flag::new(false, "known sufficient condition fails: Z has an accumulation point (only discreteness is known to suffice; no full characterization is available)")
        };
        let smooth_contained = if !f.is_dense.value {
            Flag::new(true, "Z is not dense: a closed interval misses Z and carries a nonzero smooth function vanishing on Z")
        } else {
            Flag::new(false, "Z is dense: a continuous function vanishing on Z vanishes identically")
        };
        let singular_contained = if f.is_nowhere_dense.value {
            Flag::new(true, "Z is nowhere dense: a nowhere-analytic function with zero set containing Z exists")
        } else {
            Flag::new(false, "Z is somewhere dense: its closure has interior, forcing analytic (zero) patches in any function vanishing on it")
        };
        ClassificationReport {
            entire_exact_possible: entire,
            smooth_exact_possible: smooth,
            singular_exact_possible: singular,
            pringsheim_exact_possible: pringsheim,
            smooth_contained_nontrivial: smooth_contained,
            singular_contained_nonempty: singular_contained,
        }
    }

    /// Seeded member points for verification grids. `EmptySet` yields none.
    pub fn member_samples<R: Rng>(&self, count: usize, rng: &mut R) -> Result<Vec<Rational>> {
        let mut out = Vec::with_capacity(count);
        match &self.generator {
            Generator::FiniteSet(pts) => {
                for _ in 0..count {
                    out.push(pts[rng.gen_range(0..pts.len())].clone());
                }
            }
            Generator::IntervalUnion(comps) => {
                for _ in 0..count {
                    let (a, b) = &comps[rng.gen_range(0..comps.len())];
                    if a == b {
                        out.push(a.clone());
                    } else {
                        // dyadic position inside [a, b]
                        let t = q(rng.gen_range(0..=1 << 20), 1 << 20);
                        out.push(a.clone() + Rational::from(b - a) * t);
                    }
                }
            }
            Generator::IntegerLattice { step } => {
                for _ in 0..count {
                    let k = rng.gen_range(-50i64..=50);
                    out.push(Rational::from(k) * step.clone());
                }
            }
            Generator::ReciprocalSeq => {
                for _ in 0..count {
                    let n = rng.gen_range(1i64..=100);
                    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                    if rng.gen_range(0..50) == 0 {
                        out.push(Rational::from(0));
                    } else {
                        out.push(q(sign, n));
                    }
                }
            }
            Generator::CantorMiddleThirds { depth } => {
                // endpoints of surviving intervals are members at every depth
                for _ in 0..count {
                    let levels = rng.gen_range(0..=*depth.min(&30));
                    let mut lo = Rational::from(0);
                    let mut width = Rational::from(1);
                    for _ in 0..levels {
                        width /= 3;
                        if rng.gen_bool(0.5) {
                            lo += Rational::from(2) * width.clone();
                        }
                    }
                    out.push(if rng.gen_bool(0.5) { lo.clone() + width } else { lo });
                }
            }
            Generator::EmptySet => {}
            Generator::FullLine => {
                for _ in 0..count {
                    out.push(q(rng.gen_range(-4_000_000..=4_000_000), 1 << 20));
                }
            }
            Generator::FatComplement { .. } => {
                return Err(Error::UnsupportedZeroSet(
                    "fat_complement membership is truncated; no certified member sampler".into(),
                ));
            }
        }
        Ok(out)
    }

    /// Window that contains all the structure of the set, for off-set
    /// sampling.
    pub fn default_window(&self) -> (Rational, Rational) {
        match &self.generator {
            Generator::FiniteSet(pts) => {
                (pts[0].clone() - 2, pts[pts.len() - 1].clone() + 2)
            }
            Generator::IntervalUnion(comps) => (
                comps[0].0.clone() - 2,
                comps[comps.len() - 1].1.clone() + 2,
            ),
            Generator::IntegerLattice { step } => {
                (Rational::from(-4) * step.clone(), Rational::from(4) * step.clone())
            }
            Generator::ReciprocalSeq => (q(-2, 1), q(2, 1)),
            Generator::CantorMiddleThirds { .. } => (q(-1, 2), q(3, 2)),
            Generator::FatComplement { .. } | Generator::EmptySet | Generator::FullLine => {
                (q(-2, 1), q(2, 1))
            }
        }
    }

    /// Seeded off-set points from a window, rejecting members and
    /// undecidable queries.
    pub fn off_samples<R: Rng>(
        &self,
        count: usize,
        window: (Rational, Rational),
        rng: &mut R,
    ) -> Result<Vec<Rational>> {
        let (lo, hi) = window;
        if lo >= hi {
            return Err(Error::InvalidInput("empty sampling window".into()));
        }
        let span = Rational::from(&hi - &lo);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count {
            attempts += 1;
            if attempts > count * 100 {
                return Err(Error::InvalidInput(
                    "off-set sampling window appears to be covered by the set".into(),
                ));
            }
            let t = q(rng.gen_range(0..=(1i64 << 40)), 1i64 << 40);
            let x = lo.clone() + span.clone() * t;
            match self.membership(&x) {
                Ok(false) => out.push(x),
                Ok(true) => {}
                Err(Error::Undecidable { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// Is `c` a boundary point of the set? (Exact for resolvable
    /// generators: every member of a set with empty interior is a boundary
    /// point; interval members are boundary exactly at endpoints.)
    pub fn is_boundary_point(&self, c: &Rational) -> Result<bool> {
        if !self.membership(c)? {
            return Ok(false);
        }
        match &self.generator {
            Generator::FullLine => Ok(false),
            Generator::IntervalUnion(comps) => {
                let idx = interval_index(comps, c).expect("member");
                let (a, b) = &comps[idx];
                Ok(c == a || c == b)
            }
            _ => Ok(true),
        }
    }
}

fn validate(generator: &Generator) -> Result<()> {
    match generator {
        Generator::FiniteSet(pts) => {
            if pts.is_empty() {
                return Err(Error::Parse(
                    "finite set needs at least one point (use kind \"empty_set\")".into(),
                ));
            }
            for w in pts.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Parse("finite-set points must be strictly increasing".into()));
                }
            }
        }
        Generator::IntervalUnion(comps) => {
            if comps.is_empty() {
                return Err(Error::Parse(
                    "interval union needs at least one component (use kind \"empty_set\")".into(),
                ));
            }
            for (a, b) in comps {
                if a > b {
                    return Err(Error::Parse("interval endpoints must satisfy a <= b".into()));
                }
            }
            for w in comps.windows(2) {
                if w[0].1 >= w[1].0 {
                    return Err(Error::Parse(
                        "interval components must be disjoint and sorted; merge touching ones".into(),
                    ));
                }
            }
        }
        Generator::IntegerLattice { step } => {
            if *step <= 0 {
                return Err(Error::Parse("lattice step must be positive".into()));
            }
        }
        Generator::CantorMiddleThirds { depth } => {
            if *depth == 0 || *depth > 64 {
                return Err(Error::Parse("cantor depth must be in 1..=64".into()));
            }
        }
        Generator::FatComplement { epsilon, terms } => {
            if *epsilon <= 0 {
                return Err(Error::Parse("epsilon must be positive".into()));
            }
            if *terms == 0 || *terms > 100_000 {
                return Err(Error::Parse("enumeration length must be in 1..=100000".into()));
            }
        }
        _ => {}
    }
    Ok(())
}

fn flags_for(generator: &Generator) -> Flags {
    let closed = Flag::new(true, "every supported generator denotes a closed set by construction");
    match generator {
        Generator::FiniteSet(_) => Flags {
            is_closed: closed,
            has_accumulation_point: Flag::new(false, "finite sets are discrete"),
            empty_interior: Flag::new(true, "finite sets contain no interval"),
            is_dense: Flag::new(false, "finite sets miss every interval beyond their points"),
            is_nowhere_dense: Flag::new(true, "closed with empty interior"),
        },
        Generator::IntervalUnion(comps) => {
            let has_interval = comps.iter().any(|(a, b)| a < b);
            Flags {
                is_closed: closed,
                has_accumulation_point: Flag::new(
                    has_interval,
                    if has_interval {
                        "a nondegenerate closed interval accumulates at each of its points"
                    } else {
                        "all components are single points; the set is finite"
                    },
                ),
                empty_interior: Flag::new(!has_interval, if has_interval {
                    "a nondegenerate component has interior"
                } else {
                    "all components are single points"
                }),
                is_dense: Flag::new(false, "a finite union of bounded closed sets misses far-out intervals"),
                is_nowhere_dense: Flag::new(!has_interval, if has_interval {
                    "closure contains an interval"
                } else {
                    "closed with empty interior"
                }),
            }
        }
        Generator::IntegerLattice { .. } => Flags {
            is_closed: closed,
            has_accumulation_point: Flag::new(false, "lattice points are uniformly separated"),
            empty_interior: Flag::new(true, "lattice points are isolated"),
            is_dense: Flag::new(false, "open gaps between consecutive lattice points miss the set"),
            is_nowhere_dense: Flag::new(true, "closed with empty interior"),
        },
        Generator::ReciprocalSeq => Flags {
            is_closed: closed,
            has_accumulation_point: Flag::new(true, "0 is the accumulation point of ±1/n"),
            empty_interior: Flag::new(true, "a countable set contains no interval"),
            is_dense: Flag::new(false, "the set lies in [-1,1] and is countable"),
            is_nowhere_dense: Flag::new(true, "closed with empty interior"),
        },
        Generator::CantorMiddleThirds { .. } => Flags {
            is_closed: closed,
            has_accumulation_point: Flag::new(true, "the Cantor set is perfect: every point accumulates"),
            empty_interior: Flag::new(true, "every surviving interval loses its middle third; no interval survives"),
            is_dense: Flag::new(false, "the set misses every removed middle-third gap"),
            is_nowhere_dense: Flag::new(true, "closed with empty interior"),
        },
        Generator::FatComplement { .. } => Flags {
            is_closed: closed,
            has_accumulation_point: Flag::new(true, "the set has positive measure, hence is uncountable and accumulates"),
            empty_interior: Flag::new(true, "every interval contains a rational, around which an open slab is removed"),
            is_dense: Flag::new(false, "the set misses the open slab around every rational"),
            is_nowhere_dense: Flag::new(true, "closed with empty interior"),
        },
        Generator::EmptySet => Flags {
            is_closed: closed,
            has_accumulation_point: Flag::new(false, "nothing to accumulate"),
            empty_interior: Flag::new(true, "empty"),
            is_dense: Flag::new(false, "empty"),
            is_nowhere_dense: Flag::new(true, "empty"),
        },
        Generator::FullLine => Flags {
            is_closed: closed,
            has_accumulation_point: Flag::new(true, "every point accumulates"),
            empty_interior: Flag::new(false, "the interior is the whole line"),
            is_dense: Flag::new(true, "the set is the whole line"),
            is_nowhere_dense: Flag::new(false, "the closure is the whole line"),
        },
    }
}

fn interval_index(comps: &[(Rational, Rational)], x: &Rational) -> Option<usize> {
    let mut lo = 0usize;
    let mut hi = comps.len();
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (a, b) = &comps[mid];
        if x < a {
            hi = mid;
        } else if x > b {
            lo = mid + 1;
        } else {
            return Some(mid);
        }
    }
    None
}

fn neighbors_gap(pts: &[Rational], x: &Rational) -> Gap {
    match pts.binary_search(x) {
        Ok(_) => unreachable!("member"),
        Err(idx) => {
            let a = if idx == 0 { XRat::NegInf } else { XRat::Fin(pts[idx - 1].clone()) };
            let b = if idx == pts.len() { XRat::PosInf } else { XRat::Fin(pts[idx].clone()) };
            Gap::new(a, b)
        }
    }
}

fn gap_from_sorted_endpoints(
    _endpoints: &[XRat],
    comps: &[(Rational, Rational)],
    x: &Rational,
) -> Gap {
    // x lies strictly between component i-1 and component i
    let mut idx = comps.len();
    for (i, (a, _)) in comps.iter().enumerate() {
        if x < a {
            idx = i;
            break;
        }
    }
    let a = if idx == 0 { XRat::NegInf } else { XRat::Fin(comps[idx - 1].1.clone()) };
    let b = if idx == comps.len() { XRat::PosInf } else { XRat::Fin(comps[idx].0.clone()) };
    Gap::new(a, b)
}

fn reciprocal_gap(x: &Rational) -> Gap {
    if *x > 1 {
        return Gap::new(XRat::Fin(Rational::from(1)), XRat::PosInf);
    }
    if *x < -1 {
        return Gap::new(XRat::NegInf, XRat::Fin(Rational::from(-1)));
    }
    debug_assert!(*x != 0);
    if *x > 0 {
        // 1/(n+1) < x < 1/n with n = floor(1/x)
        let n = Rational::from(x.recip_ref()).floor();
        let a = Rational::from(1) / (n.clone() + Rational::from(1));
        let b = Rational::from(1) / n;
        Gap::new(XRat::Fin(a), XRat::Fin(b))
    } else {
        let ax = Rational::from(-x);
        let n = Rational::from(ax.recip_ref()).floor();
        let a = Rational::from(-1) / n.clone();
        let b = Rational::from(-1) / (n + Rational::from(1));
        Gap::new(XRat::Fin(a), XRat::Fin(b))
    }
}

enum CantorPlace {
    Member,
    InGap(Gap),
}

/// Ternary-digit walk, exact on rationals, resolved to `depth` levels.
fn cantor_walk(x: &Rational, depth: u32) -> Result<CantorPlace> {
    let zero = Rational::from(0);
    let one = Rational::from(1);
    if *x < zero {
        return Ok(CantorPlace::InGap(Gap::new(XRat::NegInf, XRat::Fin(zero))));
    }
    if *x > one {
        return Ok(CantorPlace::InGap(Gap::new(XRat::Fin(one), XRat::PosInf)));
    }
    let mut lo = zero.clone();
    let mut width = one.clone();
    for _ in 0..depth {
        if *x == lo || *x == Rational::from(&lo + &width) {
            return Ok(CantorPlace::Member);
        }
        let third = Rational::from(&width / &Rational::from(3));
        let g_lo = Rational::from(&lo + &third);
        let g_hi = Rational::from(&lo + &width) - third.clone();
        match (x.cmp(&g_lo), x.cmp(&g_hi)) {
            (Ordering::Equal, _) | (_, Ordering::Equal) => return Ok(CantorPlace::Member),
            (Ordering::Greater, Ordering::Less) => {
                return Ok(CantorPlace::InGap(Gap::new(XRat::Fin(g_lo), XRat::Fin(g_hi))));
            }
            (Ordering::Less, _) => {
                width = third;
            }
            (_, Ordering::Greater) => {
                lo = g_hi;
                width = third;
            }
        }
    }
    if *x == lo || *x == lo + width {
        return Ok(CantorPlace::Member);
    }
    Err(Error::Undecidable {
        set: "cantor".into(),
        detail: format!("point not resolved within resolution depth {depth}; increase it"),
    })
}

/// Fixed enumeration of `ℚ ∩ [0,1]` in lowest terms, ordered by denominator
/// then numerator: 0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, 1/5, ...
pub fn rational_enumeration(terms: u32) -> Vec<Rational> {
    let mut out = Vec::with_capacity(terms as usize);
    out.push(Rational::from(0));
    if terms >= 2 {
        out.push(Rational::from(1));
    }
    let mut d = 2u64;
    'outer: while out.len() < terms as usize {
        for n in 1..d {
            if Integer::from(n).gcd(&Integer::from(d)) == 1 {
                out.push(Rational::from((n, d)));
                if out.len() == terms as usize {
                    break 'outer;
                }
            }
        }
        d += 1;
    }
    out
}

/// Materialized complement intervals of the fat-complement truncation.
pub fn fat_intervals(epsilon: &Rational, terms: u32) -> Vec<(Rational, Rational)> {
    rational_enumeration(terms)
        .into_iter()
        .enumerate()
        .map(|(i, qn)| {
            let radius = epsilon.clone() / Rational::from(Integer::from(2).pow(i as u32 + 2));
            (qn.clone() - radius.clone(), qn + radius)
        })
        .collect()
}

fn fat_membership(epsilon: &Rational, terms: u32, x: &Rational) -> Result<bool> {
    for (a, b) in fat_intervals(epsilon, terms) {
        if *x > a && *x < b {
            return Ok(false);
        }
    }
    let margin = Rational::from(epsilon / &Rational::from(4));
    if *x <= Rational::from(-&margin) || *x >= Rational::from(1) + margin {
        return Ok(true);
    }
    Err(Error::Undecidable {
        set: "fat_complement".into(),
        detail: format!(
            "point not covered by the first {terms} intervals; increase rational_enumeration_length"
        ),
    })
}

// ---------------------------------------------------------------------------
// document format

/// Parse the zero-set document: one JSON object with a `kind` discriminator.
pub fn parse_zeroset(text: &str) -> Result<ZeroSetSpec> {
    let v: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("invalid JSON: {e}")))?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("expected a JSON object".into()))?;
    let kind = obj
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::Parse("missing \"kind\" field".into()))?;
    let generator = match kind {
        "finite" => {
            let pts = obj
                .get("points")
                .and_then(|p| p.as_array())
                .ok_or_else(|| Error::Parse("finite set needs a \"points\" array".into()))?;
            let mut parsed: Vec<Rational> =
                pts.iter().map(value_to_rational).collect::<Result<_>>()?;
            parsed.sort();
            parsed.dedup();
            Generator::FiniteSet(parsed)
        }
        "intervals" => {
            let comps = obj
                .get("components")
                .and_then(|p| p.as_array())
                .ok_or_else(|| Error::Parse("interval union needs a \"components\" array".into()))?;
            let mut parsed = Vec::new();
            for c in comps {
                match c {
                    serde_json::Value::Array(pair) if pair.len() == 2 => {
                        parsed.push((value_to_rational(&pair[0])?, value_to_rational(&pair[1])?));
                    }
                    serde_json::Value::Array(_) => {
                        return Err(Error::Parse("interval components are [a, b] pairs".into()))
                    }
                    other => {
                        let p = value_to_rational(other)?;
                        parsed.push((p.clone(), p));
                    }
                }
            }
            parsed.sort_by(|x, y| x.0.cmp(&y.0));
            Generator::IntervalUnion(parsed)
        }
        "integer_lattice" => {
            let step = match obj.get("step") {
                Some(s) => value_to_rational(s)?,
                None => Rational::from(1),
            };
            Generator::IntegerLattice { step }
        }
        "reciprocal" => Generator::ReciprocalSeq,
        "cantor" => {
            let depth = obj
                .get("depth")
                .and_then(|d| d.as_u64())
                .ok_or_else(|| Error::Parse("cantor needs an integer \"depth\"".into()))?;
            Generator::CantorMiddleThirds { depth: depth as u32 }
        }
        "fat_complement" => {
            let epsilon = obj
                .get("epsilon")
                .ok_or_else(|| Error::Parse("fat_complement needs \"epsilon\"".into()))
                .and_then(value_to_rational)?;
            let terms = obj
                .get("terms")
                .and_then(|d| d.as_u64())
                .ok_or_else(|| Error::Parse("fat_complement needs an integer \"terms\"".into()))?;
            Generator::FatComplement { epsilon, terms: terms as u32 }
        }
        "empty_set" => Generator::EmptySet,
        "full_line" => Generator::FullLine,
        other => return Err(Error::Parse(format!("unknown zero-set kind {other:?}"))),
    };
    ZeroSetSpec::new(generator)
}

/// Exact-rational extraction from a JSON value: integer/decimal literals and
/// `"p/q"` strings both work.
pub fn value_to_rational(v: &serde_json::Value) -> Result<Rational> {
    match v {
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        serde_json::Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected a number or \"p/q\" string, got {other}"))),
    }
}

/// Serialize back to the document format.
pub fn render_zeroset(spec: &ZeroSetSpec) -> String {
    let v = match spec.generator() {
        Generator::FiniteSet(pts) => serde_json::json!({
            "kind": "finite",
            "points": pts.iter().map(|p| format_rational(p)).collect::<Vec<_>>(),
        }),
        Generator::IntervalUnion(comps) => serde_json::json!({
            "kind": "intervals",
            "components": comps
                .iter()
                .map(|(a, b)| vec![format_rational(a), format_rational(b)])
                .collect::<Vec<_>>(),
        }),
        Generator::IntegerLattice { step } => serde_json::json!({
            "kind": "integer_lattice",
            "step": format_rational(step),
        }),
        Generator::ReciprocalSeq => serde_json::json!({ "kind": "reciprocal" }),
        Generator::CantorMiddleThirds { depth } => serde_json::json!({
            "kind": "cantor",
            "depth": depth,
        }),
        Generator::FatComplement { epsilon, terms } => serde_json::json!({
            "kind": "fat_complement",
            "epsilon": format_rational(epsilon),
            "terms": terms,
        }),
        Generator::EmptySet => serde_json::json!({ "kind": "empty_set" }),
        Generator::FullLine => serde_json::json!({ "kind": "full_line" }),
    };
    v.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> ZeroSetSpec {
        parse_zeroset(s).unwrap()
    }

    #[test]
    fn parse_and_flags() {
        let z = parse(r#"{"kind":"finite","points":[0,1,2]}"#);
        assert!(!z.flags().has_accumulation_point.value);

        let z = parse(r#"{"kind":"reciprocal"}"#);
        assert!(z.flags().has_accumulation_point.value);
        assert!(z.flags().empty_interior.value);

        let z = parse(r#"{"kind":"full_line"}"#);
        assert!(z.flags().is_dense.value);
    }

    #[test]
    fn parse_rejects_malformed() {
        assert!(parse_zeroset("not json").is_err());
        assert!(parse_zeroset(r#"{"kind":"nope"}"#).is_err());
        assert!(parse_zeroset(r#"{"kind":"finite"}"#).is_err());
        assert!(parse_zeroset(r#"{"kind":"fat_complement","epsilon":"-1/2","terms":4}"#).is_err());
        assert!(
            parse_zeroset(r#"{"kind":"intervals","components":[[0,1],["1/2","2"]]}"#).is_err(),
            "overlapping intervals must be rejected"
        );
    }

    #[test]
    fn reciprocal_membership() {
        let z = parse(r#"{"kind":"reciprocal"}"#);
        assert!(z.membership(&Rational::from((1, 3))).unwrap());
        assert!(!z.membership(&Rational::from((2, 5))).unwrap());
        assert!(z.membership(&Rational::from(0)).unwrap());
        assert!(z.membership(&Rational::from(-1)).unwrap());
        assert!(!z.membership(&Rational::from((-2, 5))).unwrap());
        assert!(!z.membership(&Rational::from(3)).unwrap());
    }

    #[test]
    fn reciprocal_gaps() {
        let z = parse(r#"{"kind":"reciprocal"}"#);
        let g = z.locate_gap(&Rational::from((2, 5))).unwrap().unwrap();
        assert_eq!(g.a, XRat::Fin(Rational::from((1, 3))));
        assert_eq!(g.b, XRat::Fin(Rational::from((1, 2))));
        let g = z.locate_gap(&Rational::from((-2, 5))).unwrap().unwrap();
        assert_eq!(g.a, XRat::Fin(Rational::from((-1, 2))));
        assert_eq!(g.b, XRat::Fin(Rational::from((-1, 3))));
        assert!(z.locate_gap(&Rational::from((1, 7))).unwrap().is_none());
    }

    #[test]
    fn finite_gaps() {
        let z = parse(r#"{"kind":"finite","points":[0,1]}"#);
        let g = z.locate_gap(&Rational::from((1, 2))).unwrap().unwrap();
        assert_eq!(g.a, XRat::Fin(Rational::from(0)));
        assert_eq!(g.b, XRat::Fin(Rational::from(1)));
        let g = z.locate_gap(&Rational::from(5)).unwrap().unwrap();
        assert_eq!(g.b, XRat::PosInf);
    }

    #[test]
    fn cantor_membership_and_gap() {
        let z = parse(r#"{"kind":"cantor","depth":20}"#);
        assert!(!z.membership(&Rational::from((1, 2))).unwrap());
        let g = z.locate_gap(&Rational::from((1, 2))).unwrap().unwrap();
        assert_eq!(g.a, XRat::Fin(Rational::from((1, 3))));
        assert_eq!(g.b, XRat::Fin(Rational::from((2, 3))));
        for m in [
            Rational::from(0),
            Rational::from(1),
            Rational::from((1, 3)),
            Rational::from((2, 3)),
            Rational::from((2, 9)),
        ] {
            assert!(z.membership(&m).unwrap(), "{m} should be a member");
        }
        // 1/4 never resolves by digit inspection: it stays in the surviving
        // intervals at every level and is not an endpoint
        assert!(matches!(
            z.membership(&Rational::from((1, 4))),
            Err(Error::Undecidable { .. })
        ));
    }

    #[test]
    fn lattice_membership() {
        let z = parse(r#"{"kind":"integer_lattice","step":1}"#);
        assert!(z.membership(&Rational::from(-3)).unwrap());
        assert!(!z.membership(&Rational::from((1, 2))).unwrap());
        let g = z.locate_gap(&Rational::from((1, 2))).unwrap().unwrap();
        assert_eq!(g.a, XRat::Fin(Rational::from(0)));
        assert_eq!(g.b, XRat::Fin(Rational::from(1)));
    }

    #[test]
    fn classify_catalog() {
        let z = parse(r#"{"kind":"reciprocal"}"#);
        let c = z.classify();
        assert!(!c.entire_exact_possible.value);
        assert!(c.smooth_exact_possible.value);
        assert!(c.singular_exact_possible.value);
        assert!(!c.pringsheim_exact_possible.value);

        let z = parse(r#"{"kind":"full_line"}"#);
        let c = z.classify();
        assert!(c.entire_exact_possible.value);
        assert!(!c.singular_exact_possible.value);
        assert!(!c.smooth_contained_nontrivial.value);

        let z = parse(r#"{"kind":"finite","points":[0,1,2]}"#);
        let c = z.classify();
        assert!(c.entire_exact_possible.value);
        assert!(c.smooth_exact_possible.value);
        assert!(c.singular_exact_possible.value);
        assert!(c.pringsheim_exact_possible.value);
    }

    #[test]
    fn classification_implications_hold_for_all_kinds() {
        let specs = [
            r#"{"kind":"finite","points":[0,1,2]}"#.to_string(),
            r#"{"kind":"intervals","components":[[0,1],[2,2]]}"#.to_string(),
            r#"{"kind":"intervals","components":[[0,0],[1,1]]}"#.to_string(),
            r#"{"kind":"integer_lattice","step":"1/2"}"#.to_string(),
            r#"{"kind":"reciprocal"}"#.to_string(),
            r#"{"kind":"cantor","depth":12}"#.to_string(),
            r#"{"kind":"fat_complement","epsilon":"1/10","terms":16}"#.to_string(),
            r#"{"kind":"empty_set"}"#.to_string(),
            r#"{"kind":"full_line"}"#.to_string(),
        ];
        for s in &specs {
            let z = parse(s);
            let c = z.classify();
            if c.entire_exact_possible.value {
                assert!(c.smooth_exact_possible.value, "{s}");
            }
            if c.singular_exact_possible.value {
                assert!(c.smooth_exact_possible.value, "{s}");
            }
            if c.pringsheim_exact_possible.value {
                assert!(c.singular_exact_possible.value, "{s}");
            }
        }
    }

    #[test]
    fn fat_complement_measure_and_membership() {
        let eps = Rational::from((1, 10));
        let intervals = fat_intervals(&eps, 64);
        let total: Rational = intervals.iter().map(|(a, b)| Rational::from(b - a)).sum();
        assert!(total <= eps);

        let z = parse(r#"{"kind":"fat_complement","epsilon":"1/10","terms":64}"#);
        // 1/2 is q_3; covered by a materialized interval
        assert!(!z.membership(&Rational::from((1, 2))).unwrap());
        // far outside is certified inside Z
        assert!(z.membership(&Rational::from(2)).unwrap());
        // a rational deep in the enumeration is undecidable at terms=64
        assert!(matches!(
            z.membership(&Rational::from((101, 1009))).unwrap_err(),
            Error::Undecidable { .. }
        ));
    }

    #[test]
    fn enumeration_prefix() {
        let e = rational_enumeration(7);
        let want: Vec<Rational> = vec![
            Rational::from(0),
            Rational::from(1),
            Rational::from((1, 2)),
            Rational::from((1, 3)),
            Rational::from((2, 3)),
            Rational::from((1, 4)),
            Rational::from((3, 4)),
        ];
        assert_eq!(e, want);
    }

    #[test]
    fn document_roundtrip() {
        for s in [
            r#"{"kind":"finite","points":["1/3",0,2]}"#,
            r#"{"kind":"cantor","depth":20}"#,
            r#"{"kind":"integer_lattice","step":"1/2"}"#,
        ] {
            let z = parse(s);
            let re = parse(&render_zeroset(&z));
            assert_eq!(z.generator(), re.generator());
        }
    }

    #[test]
    fn gap_membership_consistency_randomized() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let specs = [
            r#"{"kind":"finite","points":[0,1,2]}"#,
            r#"{"kind":"reciprocal"}"#,
            r#"{"kind":"integer_lattice","step":1}"#,
            r#"{"kind":"cantor","depth":24}"#,
        ];
        for s in specs {
            let z = parse(s);
            let window = z.default_window();
            let span = Rational::from(&window.1 - &window.0);
            let mut checked = 0;
            while checked < 1000 {
                let t = Rational::from((rand::Rng::gen_range(&mut rng, 0..=(1i64 << 30)), 1i64 << 30));
                let x = window.0.clone() + span.clone() * t;
                match z.membership(&x) {
                    Ok(true) => {
                        assert!(z.locate_gap(&x).unwrap().is_none());
                    }
                    Ok(false) => {
                        let g = z.locate_gap(&x).unwrap().expect("gap for non-member");
                        assert!(g.contains(&x));
                        // endpoints of the gap are members (or infinite)
                        for e in [&g.a, &g.b] {
                            if let Some(q) = e.finite() {
                                assert!(z.membership(q).unwrap(), "{s}: endpoint {q}");
                            }
                        }
                    }
                    Err(Error::Undecidable { .. }) => {}
                    Err(e) => panic!("{e}"),
                }
                checked += 1;
            }
        }
    }
}
