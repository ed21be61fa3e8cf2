//! Injective piecewise contractions.
//!
//! An `n`-PC is `f(x) = a_i·x + c_i` on `I_i = [x_{i−1}, x_i)` with
//! `0 < |a_i| < 1`. Orbits are followed as intervals: a single exact point
//! for a concrete map, or an enclosure when the map itself is only known up
//! to bounds on its breakpoints and intercepts (see [`PcEnclosure`]).
//! Everything generic is written against [`AffinePieces`].

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::iet::{locate, validate_partition};
use crate::numeric::{common_radicand, to_ball, Ball, ExactNumber, Interval, NumericError};
use crate::words::{detect_in, SymbolicWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PcError {
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("not injective: {0}")]
    NotInjective(String),
    #[error("not contracting: {0}")]
    NotContracting(String),
    #[error("image escapes [0, 1): {0}")]
    ImageEscapes(String),
    #[error("point {0} outside [0, 1)")]
    OutOfDomain(String),
    #[error("image of {0} is 1, the closed end of a reversed piece")]
    EscapesAtEndpoint(String),
    #[error("orbit denominators exceed {budget} bits at step {step}")]
    DenominatorBlowup { step: usize, budget: u64 },
    #[error("orbit is certified eventually periodic (preperiod {q}, period {p})")]
    PeriodicOrbit { q: usize, p: usize },
    #[error("insufficient visits: {0}")]
    InsufficientVisits(String),
    #[error("bad enclosure: {0}")]
    BadEnclosure(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Affine pieces with exact slopes, possibly uncertain breakpoints and
/// intercepts. Statements proved through this interface hold for every map
/// it describes.
pub trait AffinePieces {
    fn pieces(&self) -> usize;
    fn slope(&self, i: usize) -> &ExactNumber;
    /// Points lying in piece `i` for every described map.
    fn core(&self, i: usize) -> Interval;
    fn intercept_bounds(&self, i: usize) -> (&ExactNumber, &ExactNumber);
    /// One concrete map among those described.
    fn representative(&self) -> &PiecewiseContraction;
    /// Largest `|slope|`.
    fn lambda(&self) -> ExactNumber {
        (0..self.pieces())
            .map(|i| self.slope(i).abs())
            .reduce(|a, b| a.max_exact(&b).clone())
            .expect("at least one piece")
    }
}

/// Validated injective piecewise contraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseContraction {
    breakpoints: Vec<ExactNumber>,
    slopes: Vec<ExactNumber>,
    intercepts: Vec<ExactNumber>,
    lambda: ExactNumber,
}

/// Serialized form: `{"type":"pc","breakpoints":[...],"slopes":[...],"intercepts":[...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PcSpec {
    pub breakpoints: Vec<ExactNumber>,
    pub slopes: Vec<ExactNumber>,
    pub intercepts: Vec<ExactNumber>,
}

impl PiecewiseContraction {
    /// Images must lie in `[0, 1)` and have pairwise disjoint interiors. As
    /// for IETs, a reversed piece may touch a neighbouring image or reach 1
    /// at its closed end; evaluating at such a point is an error.
    pub fn new(
        breakpoints: Vec<ExactNumber>,
        slopes: Vec<ExactNumber>,
        intercepts: Vec<ExactNumber>,
    ) -> Result<Self, PcError> {
        common_radicand(breakpoints.iter().chain(&slopes).chain(&intercepts))?;
        validate_partition(&breakpoints).map_err(PcError::BadPartition)?;
        let n = breakpoints.len() - 1;
        if slopes.len() != n || intercepts.len() != n {
            return Err(PcError::BadPartition(format!(
                "{n} pieces but {} slopes and {} intercepts",
                slopes.len(),
                intercepts.len()
            )));
        }
        let one = ExactNumber::one();
        for (i, a) in slopes.iter().enumerate() {
            if a.is_zero() {
                return Err(PcError::NotInjective(format!("piece {} is constant", i + 1)));
            }
            if a.abs().cmp_exact(&one) != Ordering::Less {
                return Err(PcError::NotContracting(format!("slope {a} on piece {}", i + 1)));
            }
        }
        let unit = Interval::closed(ExactNumber::zero(), one);
        let images: Vec<Interval> = (0..n)
            .map(|i| {
                Interval::half_open(breakpoints[i].clone(), breakpoints[i + 1].clone())
                    .affine_image(&slopes[i], &intercepts[i])
            })
            .collect();
        for (i, img) in images.iter().enumerate() {
            if !Interval::closed(img.lo.clone(), img.hi.clone()).is_subset_of(&unit) {
                return Err(PcError::ImageEscapes(format!("piece {} maps onto {img}", i + 1)));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if !images[i].interiors_disjoint(&images[j]) {
                    return Err(PcError::NotInjective(format!(
                        "images {} and {} of pieces {} and {} overlap",
                        images[i],
                        images[j],
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let lambda = slopes
            .iter()
            .map(ExactNumber::abs)
            .reduce(|a, b| a.max_exact(&b).clone())
            .expect("n >= 1");
        Ok(PiecewiseContraction {
            breakpoints,
            slopes,
            intercepts,
            lambda,
        })
    }

    pub fn from_spec(spec: PcSpec) -> Result<Self, PcError> {
        PiecewiseContraction::new(spec.breakpoints, spec.slopes, spec.intercepts)
    }

    pub fn to_spec(&self) -> PcSpec {
        PcSpec {
            breakpoints: self.breakpoints.clone(),
            slopes: self.slopes.clone(),
            intercepts: self.intercepts.clone(),
        }
    }

    /// `x/2 + δ` on `[0, 2 − 2δ)` and `x/2 + δ − 1` after it, the two-piece
    /// map attached to a rotation. When `2 − 2δ` falls outside `(0, 1)`
    /// only one branch survives.
    pub fn half_rotation(delta: &ExactNumber) -> Result<Self, PcError> {
        let half = ExactNumber::ratio(1, 2);
        let one = ExactNumber::one();
        let x1 = ExactNumber::from(2) - delta.mul_pow2(1);
        let (zero, one_) = (ExactNumber::zero(), one.clone());
        if x1.cmp_exact(&one) != Ordering::Less {
            PiecewiseContraction::new(vec![zero, one_], vec![half], vec![delta.clone()])
        } else if x1.signum() <= 0 {
            PiecewiseContraction::new(vec![zero, one_], vec![half], vec![delta - &one])
        } else {
            PiecewiseContraction::new(
                vec![zero, x1, one_],
                vec![half.clone(), half],
                vec![delta.clone(), delta - &one],
            )
        }
    }

    pub fn breakpoints(&self) -> &[ExactNumber] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[ExactNumber] {
        &self.slopes
    }

    pub fn intercepts(&self) -> &[ExactNumber] {
        &self.intercepts
    }

    pub fn piece(&self, i: usize) -> Interval {
        Interval::half_open(self.breakpoints[i].clone(), self.breakpoints[i + 1].clone())
    }

    pub fn image(&self, i: usize) -> Interval {
        self.piece(i).affine_image(&self.slopes[i], &self.intercepts[i])
    }

    pub fn piece_index(&self, x: &ExactNumber) -> Result<usize, PcError> {
        common_radicand(self.breakpoints.iter().chain(&self.intercepts).chain([x]))?;
        locate(&self.breakpoints, x).ok_or_else(|| PcError::OutOfDomain(x.to_string()))
    }

    pub fn eval(&self, x: &ExactNumber) -> Result<ExactNumber, PcError> {
        let i = self.piece_index(x)?;
        let y = &self.slopes[i] * x + &self.intercepts[i];
        if y == ExactNumber::one() {
            return Err(PcError::EscapesAtEndpoint(x.to_string()));
        }
        Ok(y)
    }

    /// Exact `L`-prefix of the natural coding of `x`, refusing to carry
    /// orbit points larger than `max_bits`.
    pub fn coding_with_budget(&self, x: &ExactNumber, len: usize, max_bits: u64) -> Result<SymbolicWord, PcError> {
        self.piece_index(x)?;
        let orbit = enclosed_orbit(self, Interval::point(x.clone()), len, Arithmetic::Exact { max_bits })?;
        match orbit.stop {
            OrbitStop::Completed => Ok(self.word(orbit.letters, format!("pc coding of {x}"))),
            OrbitStop::Escaped { step } | OrbitStop::Undecided { step } => Err(PcError::OutOfDomain(format!(
                "{} (reached at step {step})",
                orbit_point_text(&orbit, step)
            ))),
        }
    }

    pub fn coding(&self, x: &ExactNumber, len: usize) -> Result<SymbolicWord, PcError> {
        self.coding_with_budget(x, len, DEFAULT_MAX_BITS)
    }

    /// Coding through outward-rounded enclosures at `bits` of precision.
    /// Stops at the first letter the enclosure cannot decide.
    pub fn coding_rounded(&self, x: &ExactNumber, len: usize, bits: u32) -> Result<ApproxCoding, PcError> {
        self.piece_index(x)?;
        let orbit = enclosed_orbit(self, Interval::point(x.clone()), len, Arithmetic::Rounded { bits })?;
        Ok(ApproxCoding {
            word: self.word(orbit.letters, format!("rounded pc coding of {x}")),
            stop: orbit.stop,
            approximate: true,
        })
    }

    fn word(&self, letters: Vec<u8>, provenance: String) -> SymbolicWord {
        SymbolicWord::new(letters, self.slopes.len() as u8, provenance).expect("letters within 1..=n")
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let inner: Vec<f64> = self.breakpoints[1..self.breakpoints.len() - 1]
            .iter()
            .map(ExactNumber::to_f64)
            .collect();
        let i = inner.partition_point(|&b| b <= x);
        self.slopes[i].to_f64() * x + self.intercepts[i].to_f64()
    }
}

fn orbit_point_text(orbit: &OrbitEnclosure, step: usize) -> String {
    orbit
        .points
        .get(step)
        .map_or_else(|| format!("orbit point {step}"), |p| p.lo.to_string())
}

impl Serialize for PiecewiseContraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::maps::MapFile::Pc(self.to_spec()).serialize(s)
    }
}

impl AffinePieces for PiecewiseContraction {
    fn pieces(&self) -> usize {
        self.slopes.len()
    }

    fn slope(&self, i: usize) -> &ExactNumber {
        &self.slopes[i]
    }

    fn core(&self, i: usize) -> Interval {
        self.piece(i)
    }

    fn intercept_bounds(&self, i: usize) -> (&ExactNumber, &ExactNumber) {
        (&self.intercepts[i], &self.intercepts[i])
    }

    fn lambda(&self) -> ExactNumber {
        self.lambda.clone()
    }

    fn representative(&self) -> &PiecewiseContraction {
        self
    }
}

/// All PCs with given slopes whose breakpoints and intercepts lie in the
/// given closed bounds. Keeps one concrete member for plain evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PcEnclosure {
    breakpoints: Vec<(ExactNumber, ExactNumber)>,
    slopes: Vec<ExactNumber>,
    intercepts: Vec<(ExactNumber, ExactNumber)>,
    representative: PiecewiseContraction,
}

impl PcEnclosure {
    pub fn exact(pc: PiecewiseContraction) -> Self {
        PcEnclosure {
            breakpoints: pc.breakpoints.iter().map(|b| (b.clone(), b.clone())).collect(),
            slopes: pc.slopes.clone(),
            intercepts: pc.intercepts.iter().map(|c| (c.clone(), c.clone())).collect(),
            representative: pc,
        }
    }

    pub fn new(
        representative: PiecewiseContraction,
        breakpoints: Vec<(ExactNumber, ExactNumber)>,
        intercepts: Vec<(ExactNumber, ExactNumber)>,
    ) -> Result<Self, PcError> {
        let n = representative.slopes.len();
        if breakpoints.len() != n + 1 || intercepts.len() != n {
            return Err(PcError::BadEnclosure("length mismatch".into()));
        }
        let inside = |(lo, hi): &(ExactNumber, ExactNumber), v: &ExactNumber| {
            lo.cmp_exact(v) != Ordering::Greater && v.cmp_exact(hi) != Ordering::Greater
        };
        for (b, v) in breakpoints.iter().zip(&representative.breakpoints) {
            if !inside(b, v) {
                return Err(PcError::BadEnclosure(format!(
                    "breakpoint {v} outside [{}, {}]",
                    b.0, b.1
                )));
            }
        }
        for (c, v) in intercepts.iter().zip(&representative.intercepts) {
            if !inside(c, v) {
                return Err(PcError::BadEnclosure(format!(
                    "intercept {v} outside [{}, {}]",
                    c.0, c.1
                )));
            }
        }
        if breakpoints[0] != (ExactNumber::zero(), ExactNumber::zero())
            || breakpoints[n] != (ExactNumber::one(), ExactNumber::one())
        {
            return Err(PcError::BadEnclosure(
                "outer breakpoints must be exactly 0 and 1".into(),
            ));
        }
        Ok(PcEnclosure {
            breakpoints,
            slopes: representative.slopes.clone(),
            intercepts,
            representative,
        })
    }

    /// Bounds from Balls, widened to include the representative's values.
    pub fn from_balls(
        representative: PiecewiseContraction,
        inner_breakpoints: &[Ball],
        intercepts: &[Ball],
    ) -> Result<Self, PcError> {
        let hull = |b: &Ball, v: &ExactNumber| {
            let lo = b.lo().to_exact();
            let hi = b.hi().to_exact();
            (lo.min_exact(v).clone(), hi.max_exact(v).clone())
        };
        let rep_bp = &representative.breakpoints;
        let mut bps = vec![(ExactNumber::zero(), ExactNumber::zero())];
        for (b, v) in inner_breakpoints.iter().zip(&rep_bp[1..rep_bp.len() - 1]) {
            bps.push(hull(b, v));
        }
        bps.push((ExactNumber::one(), ExactNumber::one()));
        let ics = intercepts
            .iter()
            .zip(&representative.intercepts)
            .map(|(b, v)| hull(b, v))
            .collect();
        PcEnclosure::new(representative, bps, ics)
    }

    /// Every intercept bound moved by `shift`; the representative is left
    /// alone, so the result need not contain it.
    pub fn with_shifted_intercepts(&self, shift: &ExactNumber) -> Self {
        PcEnclosure {
            intercepts: self
                .intercepts
                .iter()
                .map(|(lo, hi)| (lo + shift, hi + shift))
                .collect(),
            ..self.clone()
        }
    }

    pub fn breakpoint_bounds(&self) -> &[(ExactNumber, ExactNumber)] {
        &self.breakpoints
    }

    pub fn intercept_bounds_all(&self) -> &[(ExactNumber, ExactNumber)] {
        &self.intercepts
    }

    /// Widest breakpoint or intercept bound.
    pub fn max_width(&self) -> ExactNumber {
        self.breakpoints
            .iter()
            .chain(&self.intercepts)
            .map(|(lo, hi)| hi - lo)
            .fold(ExactNumber::zero(), |a, b| a.max_exact(&b).clone())
    }
}

impl AffinePieces for PcEnclosure {
    fn pieces(&self) -> usize {
        self.slopes.len()
    }

    fn slope(&self, i: usize) -> &ExactNumber {
        &self.slopes[i]
    }

    fn core(&self, i: usize) -> Interval {
        Interval::half_open(self.breakpoints[i].1.clone(), self.breakpoints[i + 1].0.clone())
    }

    fn intercept_bounds(&self, i: usize) -> (&ExactNumber, &ExactNumber) {
        let (lo, hi) = &self.intercepts[i];
        (lo, hi)
    }

    fn representative(&self) -> &PiecewiseContraction {
        &self.representative
    }
}

#[derive(Serialize, Deserialize)]
struct EnclosureText {
    breakpoints: Vec<[ExactNumber; 2]>,
    slopes: Vec<ExactNumber>,
    intercepts: Vec<[ExactNumber; 2]>,
    representative: PcSpec,
}

impl Serialize for PcEnclosure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pair = |(a, b): &(ExactNumber, ExactNumber)| [a.clone(), b.clone()];
        EnclosureText {
            breakpoints: self.breakpoints.iter().map(pair).collect(),
            slopes: self.slopes.clone(),
            intercepts: self.intercepts.iter().map(pair).collect(),
            representative: self.representative.to_spec(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PcEnclosure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let t = EnclosureText::deserialize(d)?;
        let rep = PiecewiseContraction::from_spec(t.representative).map_err(D::Error::custom)?;
        if rep.slopes != t.slopes {
            return Err(D::Error::custom("slopes differ from the representative"));
        }
        let unpair = |[a, b]: [ExactNumber; 2]| (a, b);
        PcEnclosure::new(
            rep,
            t.breakpoints.into_iter().map(unpair).collect(),
            t.intercepts.into_iter().map(unpair).collect(),
        )
        .map_err(D::Error::custom)
    }
}

pub const DEFAULT_MAX_BITS: u64 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Arithmetic {
    /// Exact endpoints, failing past the bit budget.
    Exact { max_bits: u64 },
    /// Endpoints rounded outward to dyadics after every step.
    Rounded { bits: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum OrbitStop {
    Completed,
    /// The enclosure meets more than one piece.
    Undecided {
        step: usize,
    },
    /// The enclosure lies outside `[0, 1)`.
    Escaped {
        step: usize,
    },
}

/// `points[j]` encloses the `j`-th orbit point and lies in piece
/// `letters[j]` (1-based) for every described map.
#[derive(Clone, Debug)]
pub struct OrbitEnclosure {
    pub points: Vec<Interval>,
    pub letters: Vec<u8>,
    pub stop: OrbitStop,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxCoding {
    pub word: SymbolicWord,
    pub stop: OrbitStop,
    pub approximate: bool,
}

pub(crate) enum Location {
    Piece(usize),
    Straddles,
    Outside,
}

pub(crate) fn locate_enclosure<P: AffinePieces + ?Sized>(f: &P, x: &Interval) -> Location {
    if x.is_disjoint(&Interval::unit()) {
        return Location::Outside;
    }
    (0..f.pieces())
        .find(|&i| x.is_subset_of(&f.core(i)))
        .map_or(Location::Straddles, Location::Piece)
}

/// Image of `x` under piece `i` of every described map.
pub(crate) fn image_enclosure<P: AffinePieces + ?Sized>(f: &P, i: usize, x: &Interval) -> Interval {
    let (c_lo, c_hi) = f.intercept_bounds(i);
    let low = x.affine_image(f.slope(i), c_lo);
    if c_lo == c_hi {
        return low;
    }
    let high = x.affine_image(f.slope(i), c_hi);
    Interval {
        lo: low.lo,
        hi: high.hi,
        lo_closed: low.lo_closed,
        hi_closed: high.hi_closed,
    }
}

fn round_out(x: &Interval, bits: u32) -> Interval {
    let keep = |v: &ExactNumber| v.bit_size() <= 2 * bits as u64;
    if keep(&x.lo) && keep(&x.hi) {
        return x.clone();
    }
    Interval::closed(
        to_ball(&x.lo, bits).lo().to_exact(),
        to_ball(&x.hi, bits).hi().to_exact(),
    )
}

/// Follows an enclosure for up to `steps` letters.
pub fn enclosed_orbit<P: AffinePieces + ?Sized>(
    f: &P,
    start: Interval,
    steps: usize,
    arithmetic: Arithmetic,
) -> Result<OrbitEnclosure, PcError> {
    let mut walk = OrbitWalk::new(start, arithmetic);
    walk.extend(f, steps)?;
    Ok(OrbitEnclosure {
        points: walk.points,
        letters: walk.letters,
        stop: walk.stop.unwrap_or(OrbitStop::Completed),
    })
}

struct OrbitWalk {
    points: Vec<Interval>,
    letters: Vec<u8>,
    next: Interval,
    stop: Option<OrbitStop>,
    arithmetic: Arithmetic,
}

impl OrbitWalk {
    fn new(start: Interval, arithmetic: Arithmetic) -> Self {
        OrbitWalk {
            points: Vec::new(),
            letters: Vec::new(),
            next: start,
            stop: None,
            arithmetic,
        }
    }

    /// Grows the orbit to `target` letters unless it has stopped.
    fn extend<P: AffinePieces + ?Sized>(&mut self, f: &P, target: usize) -> Result<(), PcError> {
        while self.stop.is_none() && self.letters.len() < target {
            let step = self.letters.len();
            let i = match locate_enclosure(f, &self.next) {
                Location::Piece(i) => i,
                Location::Straddles => {
                    self.stop = Some(OrbitStop::Undecided { step });
                    break;
                }
                Location::Outside => {
                    self.stop = Some(OrbitStop::Escaped { step });
                    break;
                }
            };
            let mut image = image_enclosure(f, i, &self.next);
            match self.arithmetic {
                Arithmetic::Exact { max_bits } => {
                    if image.lo.bit_size().max(image.hi.bit_size()) > max_bits {
                        return Err(PcError::DenominatorBlowup {
                            step: step + 1,
                            budget: max_bits,
                        });
                    }
                }
                Arithmetic::Rounded { bits } => image = round_out(&image, bits),
            }
            self.points.push(std::mem::replace(&mut self.next, image));
            self.letters.push(i as u8 + 1);
        }
        Ok(())
    }
}

/// Proof object for an eventually periodic coding.
///
/// For every described map `g`: the `p`-step itinerary of every point of
/// `cylinder` is `word`, `g^p(cylinder) ⊆ image ⊆ cylinder`, and
/// `g^q(start) ∈ cylinder`. Hence the coding of `start` is
/// `θ_0…θ_{q−1}·word^∞`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicCertificate {
    pub start: ExactNumber,
    pub preperiod: usize,
    pub period: usize,
    pub cylinder: Interval,
    pub image: Interval,
    /// Slope of `g^p` on the cylinder.
    pub slope: ExactNumber,
    /// `λ^p`.
    pub lambda_pow: ExactNumber,
    pub word: Vec<u8>,
}

impl PeriodicCertificate {
    /// Re-checks the certificate by forward interval propagation, without
    /// the pullback used to find it.
    pub fn revalidate<P: AffinePieces + ?Sized>(&self, f: &P) -> Result<(), String> {
        if self.word.len() != self.period || self.period == 0 {
            return Err("word length differs from period".into());
        }
        let orbit = enclosed_orbit(
            f,
            Interval::point(self.start.clone()),
            self.preperiod + 1,
            Arithmetic::Exact { max_bits: u64::MAX },
        )
        .map_err(|e| e.to_string())?;
        let y = orbit
            .points
            .get(self.preperiod)
            .ok_or_else(|| format!("orbit stopped: {:?}", orbit.stop))?;
        if !y.is_subset_of(&self.cylinder) {
            return Err(format!("orbit point {y} not in cylinder {}", self.cylinder));
        }
        let mut x = self.cylinder.clone();
        for (j, &letter) in self.word.iter().enumerate() {
            match locate_enclosure(f, &x) {
                Location::Piece(i) if i as u8 + 1 == letter => x = image_enclosure(f, i, &x),
                _ => return Err(format!("itinerary breaks at step {j}: {x}")),
            }
        }
        if !x.is_subset_of(&self.cylinder) {
            return Err(format!("f^p(C) = {x} not inside C = {}", self.cylinder));
        }
        if !x.is_subset_of(&self.image) {
            return Err(format!("f^p(C) = {x} differs from recorded {}", self.image));
        }
        Ok(())
    }

    pub fn word_text(&self) -> String {
        self.word.iter().map(|d| char::from(b'0' + d)).collect()
    }
}

/// `g^p(x) ∈ slope·x + [d_lo, d_hi]` along a fixed itinerary, plus the set
/// of points following that itinerary.
struct Cylinder {
    set: Interval,
    slope: ExactNumber,
    d_lo: ExactNumber,
    d_hi: ExactNumber,
}

fn cylinder_of<P: AffinePieces + ?Sized>(f: &P, word: &[u8]) -> Option<Cylinder> {
    let mut set = f.core(word[0] as usize - 1);
    let mut slope = ExactNumber::one();
    let mut d_lo = ExactNumber::zero();
    let mut d_hi = ExactNumber::zero();
    for (j, &letter) in word.iter().enumerate() {
        let i = letter as usize - 1;
        if j > 0 {
            // {x : slope·x + [d_lo, d_hi] ⊆ core}
            let core = f.core(i);
            let needed = Interval {
                lo: &core.lo - &d_lo,
                hi: &core.hi - &d_hi,
                ..core
            };
            let pulled = needed.affine_image(&slope.recip().ok()?, &ExactNumber::zero());
            set = set.intersect(&pulled);
            if set.is_empty() {
                return None;
            }
        }
        let a = f.slope(i);
        let (c_lo, c_hi) = f.intercept_bounds(i);
        let (lo, hi) = if a.signum() > 0 {
            (a * &d_lo + c_lo, a * &d_hi + c_hi)
        } else {
            (a * &d_hi + c_lo, a * &d_lo + c_hi)
        };
        d_lo = lo;
        d_hi = hi;
        slope = a * &slope;
    }
    Some(Cylinder { set, slope, d_lo, d_hi })
}

fn hull_image(cyl: &Cylinder, c: &Interval) -> Interval {
    let low = c.affine_image(&cyl.slope, &cyl.d_lo);
    let high = c.affine_image(&cyl.slope, &cyl.d_hi);
    Interval {
        lo: low.lo,
        hi: high.hi,
        lo_closed: low.lo_closed,
        hi_closed: high.hi_closed,
    }
}

/// Tries the full cylinder, then a neighbourhood of the attracting fixed
/// point of `g^p` reaching back to `y`.
fn certify_at(cyl: &Cylinder, y: &Interval) -> Option<(Interval, Interval)> {
    let mut candidates = vec![cyl.set.clone()];
    let denom = ExactNumber::one() - &cyl.slope;
    let z_lo = (&cyl.d_lo / &denom).clone();
    let z_hi = (&cyl.d_hi / &denom).clone();
    let spread = &z_hi - &z_lo;
    let reach = (&y.hi - &z_lo).max_exact(&(&z_hi - &y.lo)).clone();
    let rho = &reach.max_exact(&ExactNumber::zero()).clone() + &spread;
    candidates.push(cyl.set.intersect(&Interval::closed(&z_lo - &rho, &z_hi + &rho)));
    candidates.into_iter().find_map(|c| {
        if c.is_empty() || !y.is_subset_of(&c) {
            return None;
        }
        let img = hull_image(cyl, &c);
        img.is_subset_of(&c).then_some((c, img))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Orbit steps examined.
    pub budget: usize,
    pub arithmetic: Arithmetic,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            budget: 5000,
            arithmetic: Arithmetic::Exact {
                max_bits: DEFAULT_MAX_BITS,
            },
        }
    }
}

/// Looks for a periodicity certificate within `budget` orbit steps.
/// `None` means inconclusive, not aperiodic.
pub fn certify_periodic<P: AffinePieces + ?Sized>(
    f: &P,
    x: &ExactNumber,
    budget: usize,
) -> Result<Option<PeriodicCertificate>, PcError> {
    certify_periodic_with(
        f,
        x,
        CertifyOptions {
            budget,
            ..CertifyOptions::default()
        },
    )
}

pub fn certify_periodic_with<P: AffinePieces + ?Sized>(
    f: &P,
    x: &ExactNumber,
    opts: CertifyOptions,
) -> Result<Option<PeriodicCertificate>, PcError> {
    let mut walk = OrbitWalk::new(Interval::point(x.clone()), opts.arithmetic);
    let mut target = 32.min(opts.budget);
    let mut tried = std::collections::HashSet::new();
    loop {
        walk.extend(f, target)?;
        if walk.letters.is_empty() {
            return Err(PcError::OutOfDomain(x.to_string()));
        }
        if let Some(ep) = detect_in(&walk.letters) {
            let (q, p) = (ep.preperiod, ep.period);
            let word = walk.letters[q..q + p].to_vec();
            if let Some(cyl) = cylinder_of(f, &word) {
                let mut start = q;
                while start < walk.points.len() && walk.letters[start..].starts_with(&word[..1]) {
                    if tried.insert((start, p)) {
                        if let Some((c, img)) = certify_at(&cyl, &walk.points[start]) {
                            return Ok(Some(PeriodicCertificate {
                                start: x.clone(),
                                preperiod: start,
                                period: p,
                                cylinder: c,
                                image: img,
                                slope: cyl.slope.clone(),
                                lambda_pow: pow(&f.lambda(), p),
                                word: word.clone(),
                            }));
                        }
                    }
                    start += p;
                }
            }
        }
        if walk.stop.is_some() || target >= opts.budget {
            return Ok(None);
        }
        target = (target * 2).min(opts.budget);
    }
}

fn pow(x: &ExactNumber, p: usize) -> ExactNumber {
    (0..p).fold(ExactNumber::one(), |acc, _| &acc * x)
}

/// Empirical semiconjugacy onto an IET, estimated from one orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalFactor {
    pub m: usize,
    /// `(t, ĥ(t))` on a uniform grid of `[0, 1]`.
    pub grid: Vec<(f64, f64)>,
    /// 1-based PC pieces kept in the factor alphabet.
    pub kept_pieces: Vec<usize>,
    pub visits: Vec<usize>,
    /// `0 = ŷ_0 < ŷ_1 < … < ŷ_r = 1`.
    pub breakpoints: Vec<f64>,
    pub signs: Vec<i8>,
    pub translations: Vec<f64>,
    /// `max |ĥ(f(s)) − T̂(ĥ(s))|` over samples in kept pieces.
    pub residual: f64,
    /// Orbit computed in floating point.
    pub approximate: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FactorOptions {
    pub grid_size: usize,
    /// Steps given to [`certify_periodic`] before estimating.
    pub certify_budget: usize,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions {
            grid_size: 1001,
            certify_budget: 2000,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Periodicity is ruled out against everything `f` describes; the samples
/// follow its representative in floating point.
pub fn empirical_factor<P: AffinePieces + ?Sized>(
    f: &P,
    x: &ExactNumber,
    m: usize,
    grid_size: usize,
) -> Result<EmpiricalFactor, PcError> {
    empirical_factor_with(
        f,
        x,
        m,
        FactorOptions {
            grid_size,
            ..FactorOptions::default()
        },
    )
}

pub fn empirical_factor_with<P: AffinePieces + ?Sized>(
    f: &P,
    x: &ExactNumber,
    m: usize,
    opts: FactorOptions,
) -> Result<EmpiricalFactor, PcError> {
    if m < 1000 {
        return Err(PcError::InsufficientVisits(format!("m = {m} < 1000 samples")));
    }
    let rep = f.representative();
    rep.piece_index(x)?;
    let certify = CertifyOptions {
        budget: opts.certify_budget,
        arithmetic: Arithmetic::Rounded { bits: 256 },
    };
    if let Some(c) = certify_periodic_with(f, x, certify)? {
        return Err(PcError::PeriodicOrbit {
            q: c.preperiod,
            p: c.period,
        });
    }

    let n = f.pieces();
    let inner: Vec<f64> = rep.breakpoints[1..n].iter().map(ExactNumber::to_f64).collect();
    let slopes: Vec<f64> = rep.slopes.iter().map(ExactNumber::to_f64).collect();
    let intercepts: Vec<f64> = rep.intercepts.iter().map(ExactNumber::to_f64).collect();
    let mut samples = Vec::with_capacity(m + 1);
    let mut pieces = Vec::with_capacity(m);
    let mut s = x.to_f64();
    for _ in 0..m {
        let i = inner.partition_point(|&b| b <= s);
        samples.push(s);
        pieces.push(i);
        s = (slopes[i] * s + intercepts[i]).clamp(0.0, 1.0 - f64::EPSILON);
    }
    samples.push(s);

    let mut sorted = samples[..m].to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = |t: f64| sorted.partition_point(|&v| v <= t) as f64 / m as f64;
    // pieces are half-open, so a sample sitting on a breakpoint belongs above it
    let below = |t: f64| sorted.partition_point(|&v| v < t) as f64 / m as f64;

    let mut visits = vec![0usize; n];
    for &i in &pieces {
        visits[i] += 1;
    }
    let threshold = (m as f64).log2();
    let kept: Vec<usize> = (0..n).filter(|&i| visits[i] as f64 >= threshold).collect();
    if kept.is_empty() {
        return Err(PcError::InsufficientVisits("no piece visited log2(m) times".into()));
    }

    let mut breakpoints = vec![0.0];
    for &i in &kept[..kept.len() - 1] {
        breakpoints.push(below(rep.breakpoints[i + 1].to_f64()));
    }
    breakpoints.push(1.0);
    if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PcError::InsufficientVisits(format!(
            "factor breakpoints not increasing: {breakpoints:?}"
        )));
    }

    let signs: Vec<i8> = kept.iter().map(|&i| rep.slopes[i].signum() as i8).collect();
    let slot = |i: usize| kept.iter().position(|&k| k == i);
    let mut diffs = vec![Vec::new(); kept.len()];
    let hs: Vec<f64> = samples.iter().map(|&v| h(v)).collect();
    for k in 0..m {
        if let Some(l) = slot(pieces[k]) {
            diffs[l].push(hs[k + 1] - signs[l] as f64 * hs[k]);
        }
    }
    let translations: Vec<f64> = diffs.iter_mut().map(|d| median(d)).collect();
    let residual = (0..m)
        .filter_map(|k| slot(pieces[k]).map(|l| (hs[k + 1] - (signs[l] as f64 * hs[k] + translations[l])).abs()))
        .fold(0.0, f64::max);

    let g = opts.grid_size.max(2);
    let grid = (0..g)
        .map(|j| {
            let t = j as f64 / (g - 1) as f64;
            (t, h(t))
        })
        .collect();
    Ok(EmpiricalFactor {
        m,
        grid,
        kept_pieces: kept.iter().map(|i| i + 1).collect(),
        visits,
        breakpoints,
        signs,
        translations,
        residual,
        approximate: true,
    })
}

/// Random injective 2-PC with slopes `1/2` and rational parameters over
/// denominator 1000: breakpoint uniform, images placed in random order with
/// random gaps.
pub fn random_half_slope_pc<R: Rng + ?Sized>(rng: &mut R) -> PiecewiseContraction {
    const D: i64 = 1000;
    let b = ExactNumber::ratio(rng.gen_range(1..D), D);
    let mut cuts = [rng.gen_range(0..=D / 2), rng.gen_range(0..=D / 2)];
    cuts.sort_unstable();
    let g0 = ExactNumber::ratio(cuts[0], D);
    let g1 = ExactNumber::ratio(cuts[1] - cuts[0], D);
    let half = ExactNumber::ratio(1, 2);
    let len1 = b.mul_pow2(-1);
    let len2 = &half - &len1;
    let (c1, c2) = if rng.gen_bool(0.5) {
        (g0.clone(), &g0 + &g1)
    } else {
        (&(&g0 + &len2) + &g1, &g0 - &len1)
    };
    PiecewiseContraction::new(
        vec![ExactNumber::zero(), b, ExactNumber::one()],
        vec![half.clone(), half],
        vec![c1, c2],
    )
    .expect("random 2-PC is valid by construction")
}


#[cfg(test)]
mod proptests {
    use super::*;
    use crate::words::detect_eventual_period;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Random injective PC with slopes in `{±1/2, ±1/3, ±2/3}` and images laid
    /// out in shuffled order with random gaps.
    fn random_pc() -> impl Strategy<Value = PiecewiseContraction> {
        (1usize..=4)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(1i64..10, n),
                    prop::collection::vec((1i64..=2, prop::sample::select(vec![2i64, 3]), any::<bool>()), n),
                    Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
                    prop::collection::vec(0i64..10, n + 1),
                )
            })
            .prop_filter_map("slope not below 1", |(raw, slopes, order, gaps)| {
                let n = raw.len();
                let total: i64 = raw.iter().sum();
                let lens: Vec<ExactNumber> = raw.iter().map(|&l| ExactNumber::ratio(l, total)).collect();
                let slopes: Vec<ExactNumber> = slopes
                    .iter()
                    .map(|&(p, q, neg)| ExactNumber::ratio(if neg { -p } else { p }, q))
                    .collect();
                if slopes.iter().any(|s| s.abs() >= ExactNumber::one()) {
                    return None;
                }
                let mut bps = vec![ExactNumber::zero()];
                for l in &lens {
                    let next = bps.last().unwrap() + l;
                    bps.push(next);
                }
                let widths: Vec<ExactNumber> = (0..n).map(|i| &slopes[i].abs() * &lens[i]).collect();
                let used = widths.iter().fold(ExactNumber::zero(), |a, w| &a + w);
                let gap_total: i64 = gaps.iter().sum::<i64>().max(1);
                let spare = ExactNumber::one() - used;
                let mut at = ExactNumber::zero();
                let mut starts = vec![ExactNumber::zero(); n];
                for (slot, &i) in order.iter().enumerate() {
                    at = &at + &(&spare * &ExactNumber::ratio(gaps[slot], gap_total));
                    starts[i] = at.clone();
                    at = &at + &widths[i];
                }
                let intercepts = (0..n)
                    .map(|i| {
                        let end = if slopes[i].signum() > 0 { &bps[i] } else { &bps[i + 1] };
                        &starts[i] - &(&slopes[i] * end)
                    })
                    .collect();
                PiecewiseContraction::new(bps, slopes, intercepts).ok()
            })
    }

    fn unit_point() -> impl Strategy<Value = ExactNumber> {
        (0i64..997).prop_map(|k| ExactNumber::ratio(k, 997))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn contraction_law(f in random_pc(), x in unit_point(), y in unit_point()) {
            prop_assume!(f.piece_index(&x).unwrap() == f.piece_index(&y).unwrap());
            let (fx, fy) = (f.eval(&x).unwrap(), f.eval(&y).unwrap());
            prop_assert!((&fx - &fy).abs() <= &f.lambda() * &(&x - &y).abs());
        }

        #[test]
        fn certificates_are_sound(seed in any::<u64>(), k in 0i64..97) {
            let f = random_half_slope_pc(&mut ChaCha8Rng::seed_from_u64(seed));
            let x = ExactNumber::ratio(k, 97);
            let Some(cert) = certify_periodic(&f, &x, 3000).unwrap() else { return Ok(()) };
            prop_assert!(cert.revalidate(&f).is_ok());
            let (q, p) = (cert.preperiod, cert.period);
            let word = f.coding(&x, q + 10 * p).unwrap();
            let tail = &word.symbols()[q..];
            for block in tail.chunks(p) {
                prop_assert_eq!(block, &cert.word[..]);
            }

            // the detector's candidate on the same prefix divides the certificate
            if let Some(found) = detect_eventual_period(&word) {
                prop_assert_eq!(p % found.period, 0);
                prop_assert!(found.preperiod <= q);
            }
        }

        #[test]
        fn certificates_on_general_pcs_revalidate(f in random_pc(), x in unit_point()) {
            if let Some(cert) = certify_periodic(&f, &x, 2000).unwrap() {
                prop_assert!(cert.revalidate(&f).is_ok());
                let word = f.coding(&x, cert.preperiod + 10 * cert.period).unwrap();
                let v = &cert.word[..];
                prop_assert!(word.symbols()[cert.preperiod..].chunks(cert.period).all(|b| b == v));
            }
        }
    }
}
