//! Piecewise ½-affine contractions semiconjugate to a given IET.
//!
//! A dense orbit `p_1, p_2, …` of the IET is spread out into gaps `G_k`
//! of length `2^{−k}`, placed in the same order as the `p_k`. The map sending
//! each `G_k` affinely onto `G_{k+1}` extends to a piecewise contraction
//! with slopes `±1/2`, and collapsing every gap to its orbit point is a
//! semiconjugacy onto the IET.
//!
//! Only `N` orbit points are used; every left-out gap contributes to a tail
//! of total length `2^{−N}`, which is carried in Ball radii.
//!
//! The first orbit point must be an endpoint of an image interval `T(J_s)`.
//! Otherwise `G_1`, which is nobody's image, would sit between the images
//! of two gaps of one piece and no single slope-`1/2` map could send both
//! onto their successors.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::iet::{Iet, IetError};
use crate::numeric::{Ball, Dyadic, ExactNumber, Interval};
use crate::pc::{enclosed_orbit, AffinePieces, Arithmetic, OrbitStop, PcEnclosure, PcError, PiecewiseContraction};
use crate::words::{fibonacci_word, isomorphic_slices, LetterBijection, SymbolicWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("truncation depth {0} below 16")]
    DepthTooSmall(usize),
    #[error("seed orbit hits a breakpoint at step {0}")]
    OrbitHitsBreakpoint(usize),
    #[error("no dense orbit: {0}")]
    NotTransitiveEvidence(String),
    #[error("seed {0} is not an endpoint of an image interval")]
    SeedNotImageEndpoint(String),
    #[error("piece {piece}: no gap with a successor among the first N orbit points")]
    MissingGap { piece: usize },
    #[error("piece {piece}: intercepts from gaps {k} and {j} disagree")]
    InterceptMismatch { piece: usize, k: usize, j: usize },
    #[error("letters must be 1 or 2, found {0}")]
    BadAlphabet(u8),
    #[error("word of length {0} is shorter than 8")]
    WordTooShort(usize),
    #[error(transparent)]
    Iet(#[from] IetError),
    #[error(transparent)]
    Pc(#[from] PcError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum GapWarning {
    /// IET pieces (1-based) never visited by the orbit prefix.
    NotTransitiveEvidence { unvisited: Vec<usize> },
    /// `p_again = p_first`: the orbit is periodic and gaps overlap.
    OrbitRepeats { first: usize, again: usize },
}

/// Truncated gap system for orbit points `p_1 … p_N`.
#[derive(Clone, Debug)]
pub struct GapSystem {
    depth: usize,
    orbit: Vec<ExactNumber>,
    /// 0-based IET piece of each `p_k`.
    pieces: Vec<usize>,
    /// `Σ_{ℓ≤N, p_ℓ<p_k} 2^{−ℓ}`.
    trunc_inf: Vec<Dyadic>,
    /// Same sums below each IET breakpoint `y_0 … y_n`.
    trunc_breakpoints: Vec<Dyadic>,
    warnings: Vec<GapWarning>,
}

fn tail_ball(trunc: &Dyadic, depth: usize) -> Ball {
    let half_tail = Dyadic::pow2(-(depth as i64) - 1);
    Ball::new(trunc + &half_tail, half_tail)
}

impl GapSystem {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `p_1 … p_N`.
    pub fn orbit(&self) -> &[ExactNumber] {
        &self.orbit
    }

    /// `p_k` for 1-based `k`.
    pub fn point(&self, k: usize) -> &ExactNumber {
        &self.orbit[k - 1]
    }

    /// 0-based IET piece holding `p_k`.
    pub fn piece_of(&self, k: usize) -> usize {
        self.pieces[k - 1]
    }

    pub fn warnings(&self) -> &[GapWarning] {
        &self.warnings
    }

    pub fn truncated_inf(&self, k: usize) -> &Dyadic {
        &self.trunc_inf[k - 1]
    }

    pub fn inf(&self, k: usize) -> Ball {
        tail_ball(&self.trunc_inf[k - 1], self.depth)
    }

    pub fn sup(&self, k: usize) -> Ball {
        self.inf(k).add_dyadic(&Dyadic::pow2(-(k as i64)))
    }

    /// Encloses the midpoint of `G_k`.
    pub fn midpoint(&self, k: usize) -> Ball {
        self.inf(k).add_dyadic(&Dyadic::pow2(-(k as i64) - 1))
    }

    /// PC breakpoint `x_i`, the gap mass left of the IET breakpoint `y_i`.
    pub fn breakpoint(&self, i: usize) -> Ball {
        let n = self.trunc_breakpoints.len() - 1;
        if i == 0 {
            Ball::exact(Dyadic::zero())
        } else if i == n {
            Ball::exact(Dyadic::one())
        } else {
            tail_ball(&self.trunc_breakpoints[i], self.depth)
        }
    }

    /// `Σ_{ℓ≤N, p_ℓ ∈ J_i} 2^{−ℓ}` for the 0-based piece `i`.
    pub fn piece_mass(&self, i: usize) -> Dyadic {
        self.pieces
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p == i)
            .fold(Dyadic::zero(), |acc, (l, _)| &acc + &Dyadic::pow2(-(l as i64) - 1))
    }

    /// Total length of the tracked gaps, `1 − 2^{−N}`.
    pub fn tracked_measure(&self) -> Dyadic {
        &Dyadic::one() - &Dyadic::pow2(-(self.depth as i64))
    }

    /// Compares gap positions with orbit order on every pair.
    pub fn ordering_report(&self) -> OrderingReport {
        let n = self.depth;
        let mut report = OrderingReport::default();
        for k in 1..=n {
            for j in k + 1..=n {
                report.pairs += 1;
                let (a, b) = match self.point(k).cmp_exact(self.point(j)) {
                    Ordering::Less => (k, j),
                    Ordering::Greater => (j, k),
                    Ordering::Equal => {
                        report.ties += 1;
                        continue;
                    }
                };
                // G_a left of G_b: inf enclosures ordered
                let (ia, ib) = (self.inf(a), self.inf(b));
                if ia.hi() <= ib.lo() {
                    report.inf_order_certified += 1;
                } else if ib.hi() <= ia.lo() {
                    report.contradictions += 1;
                }
                let sa = self.sup(a);
                if sa.hi() <= ib.lo() {
                    report.separation_certified += 1;
                } else if ib.hi() < sa.lo() {
                    report.contradictions += 1;
                }
            }
        }
        report
    }
}

/// Pairwise check of `p_k < p_j ⟹ sup G_k ≤ inf G_j`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OrderingReport {
    pub pairs: usize,
    /// Pairs with `p_k = p_j`.
    pub ties: usize,
    /// Pairs whose inf enclosures are ordered like the orbit points.
    pub inf_order_certified: usize,
    /// Pairs with `sup G_k` certainly at or below `inf G_j`.
    pub separation_certified: usize,
    /// Certified orders contradicting the orbit order.
    pub contradictions: usize,
}

/// `p_k = T^{k−1}(seed)` for `k = 1..=N`, checked to avoid the breakpoints.
pub fn build_gap_system(t: &Iet, seed: &ExactNumber, depth: usize) -> Result<GapSystem, ConstructError> {
    if depth < 16 {
        return Err(ConstructError::DepthTooSmall(depth));
    }
    let n = t.pieces();
    let starts = &t.breakpoints()[..n];
    let mut orbit = Vec::with_capacity(depth);
    let mut pieces = Vec::with_capacity(depth);
    let mut cur = seed.clone();
    for step in 0..depth {
        let i = t.piece_index(&cur)?;
        if starts.contains(&cur) {
            return Err(ConstructError::OrbitHitsBreakpoint(step));
        }
        pieces.push(i);
        let next = if step + 1 < depth { Some(t.eval(&cur)?) } else { None };
        orbit.push(std::mem::replace(&mut cur, next.unwrap_or_else(ExactNumber::zero)));
    }

    let mut warnings = Vec::new();
    let unvisited: Vec<usize> = (0..n).filter(|i| !pieces.contains(i)).map(|i| i + 1).collect();
    if !unvisited.is_empty() {
        warnings.push(GapWarning::NotTransitiveEvidence { unvisited });
    }
    let mut first_seen: HashMap<&ExactNumber, usize> = HashMap::new();
    for (idx, p) in orbit.iter().enumerate() {
        if let Some(&first) = first_seen.get(p) {
            warnings.push(GapWarning::OrbitRepeats {
                first: first + 1,
                again: idx + 1,
            });
            break;
        }
        first_seen.insert(p, idx);
    }

    // strict-less prefix sums in orbit order
    let mut order: Vec<usize> = (0..depth).collect();
    order.sort_by(|&a, &b| orbit[a].cmp_exact(&orbit[b]).then(a.cmp(&b)));
    let mut trunc_inf = vec![Dyadic::zero(); depth];
    let mut below = Dyadic::zero();
    let mut run = Dyadic::zero();
    for (pos, &idx) in order.iter().enumerate() {
        if pos > 0 && orbit[order[pos - 1]] != orbit[idx] {
            below = &below + &run;
            run = Dyadic::zero();
        }
        trunc_inf[idx] = below.clone();
        run = &run + &Dyadic::pow2(-(idx as i64) - 1);
    }
    let trunc_breakpoints = t
        .breakpoints()
        .iter()
        .map(|y| {
            orbit
                .iter()
                .enumerate()
                .filter(|(_, p)| p.cmp_exact(y) == Ordering::Less)
                .fold(Dyadic::zero(), |acc, (l, _)| &acc + &Dyadic::pow2(-(l as i64) - 1))
        })
        .collect();
    Ok(GapSystem {
        depth,
        orbit,
        pieces,
        trunc_inf,
        trunc_breakpoints,
        warnings,
    })
}

/// First image endpoint, lower end before upper, piece by piece, whose orbit
/// avoids the breakpoints for `depth` steps. For a standard IET this is the
/// first such `T(y_j)`.
pub fn default_seed(t: &Iet, depth: usize) -> Result<ExactNumber, ConstructError> {
    let mut last = ConstructError::OrbitHitsBreakpoint(0);
    let one = ExactNumber::one();
    for i in 0..t.pieces() {
        let img = t.image(i);
        for candidate in [&img.lo, &img.hi] {
            if candidate.cmp_exact(&one) != Ordering::Less {
                continue;
            }
            match build_gap_system(t, candidate, depth.max(16)) {
                Ok(_) => return Ok(candidate.clone()),
                Err(e @ ConstructError::OrbitHitsBreakpoint(_)) => last = e,
                Err(e) => return Err(e),
            }
        }
    }
    Err(last)
}

#[derive(Clone, Debug, Serialize)]
pub struct PieceProvenance {
    /// 1-based IET piece.
    pub iet_piece: usize,
    pub sign: i8,
    pub slope: ExactNumber,
    pub intercept: Ball,
    /// Gap whose pair `(G_k, G_{k+1})` produced the intercept.
    pub intercept_gap: usize,
    /// Other gaps in the piece whose intercepts overlapped it.
    pub cross_checked: Vec<usize>,
    pub breakpoint: Ball,
}

#[derive(Clone, Debug)]
pub struct ConstructedPc {
    /// Exact member of `family`, built from the truncated gap lengths.
    pub pc: PiecewiseContraction,
    /// Every PC compatible with the enclosures; contains the limiting map.
    pub family: PcEnclosure,
    pub gaps: GapSystem,
    pub provenance: Vec<PieceProvenance>,
    /// Largest Ball radius among breakpoints and intercepts.
    pub error_bound: Dyadic,
    pub seed: ExactNumber,
}

fn max_dyadic(a: Dyadic, b: &Dyadic) -> Dyadic {
    if &a >= b {
        a
    } else {
        b.clone()
    }
}

pub fn build_pc_from_iet(t: &Iet, seed: Option<&ExactNumber>, depth: usize) -> Result<ConstructedPc, ConstructError> {
    let n = t.pieces();
    if n == 1 {
        return Err(ConstructError::NotTransitiveEvidence(
            "a 1-IET is the identity and has no dense orbit".into(),
        ));
    }
    let seed = match seed {
        Some(s) => s.clone(),
        None => default_seed(t, depth)?,
    };
    let gaps = build_gap_system(t, &seed, depth)?;

    let seed_piece = (0..n)
        .find(|&i| t.image(i).contains(&seed))
        .ok_or_else(|| ConstructError::SeedNotImageEndpoint(seed.to_string()))?;
    let seed_image = t.image(seed_piece);
    let seed_at_bottom = if seed == seed_image.lo {
        true
    } else if seed == seed_image.hi {
        false
    } else {
        return Err(ConstructError::SeedNotImageEndpoint(seed.to_string()));
    };

    // intercepts from the gap pairs, cross-checked within each piece
    let half = Dyadic::pow2(-1);
    let mut intercept_balls = Vec::with_capacity(n);
    let mut provenance = Vec::with_capacity(n);
    for m in 0..n {
        let ks: Vec<usize> = (1..depth).filter(|&k| gaps.piece_of(k) == m).collect();
        let &first = ks.first().ok_or(ConstructError::MissingGap { piece: m + 1 })?;
        let sign = t.signs()[m];
        let from_gap = |k: usize| {
            let next = gaps.inf(k + 1);
            if sign == 1 {
                &next - &gaps.inf(k).mul_pow2(-1)
            } else {
                &next + &gaps.sup(k).mul_pow2(-1)
            }
        };
        let c = from_gap(first);
        for &k in &ks[1..] {
            if !from_gap(k).overlaps(&c) {
                return Err(ConstructError::InterceptMismatch {
                    piece: m + 1,
                    k: first,
                    j: k,
                });
            }
        }
        provenance.push(PieceProvenance {
            iet_piece: m + 1,
            sign,
            slope: ExactNumber::ratio(sign as i64, 2),
            intercept: c.clone(),
            intercept_gap: first,
            cross_checked: ks[1..].to_vec(),
            breakpoint: gaps.breakpoint(m + 1),
        });
        intercept_balls.push(c);
    }

    // exact member from the truncated weights, the tail going to the last piece
    let mut weights: Vec<Dyadic> = (0..n).map(|m| gaps.piece_mass(m)).collect();
    weights[n - 1] = &weights[n - 1] + &Dyadic::pow2(-(depth as i64));
    let mut xs = vec![Dyadic::zero()];
    for w in &weights {
        let last = xs.last().expect("nonempty");
        xs.push(last + w);
    }
    let image_lo: Vec<&ExactNumber> = (0..n).map(|m| &t.image(m).lo).collect();
    let below = |a: usize, b: usize| image_lo[a].cmp_exact(image_lo[b]) == Ordering::Less;
    let intercepts: Vec<ExactNumber> = (0..n)
        .map(|m| {
            let mut acc = Dyadic::zero();
            for mm in (0..n).filter(|&mm| below(mm, m)) {
                acc = &acc + &weights[mm];
                if mm == seed_piece {
                    acc = &acc + &Dyadic::one();
                }
            }
            if m == seed_piece && seed_at_bottom {
                acc = &acc + &Dyadic::one();
            }
            let c = if t.signs()[m] == 1 {
                &acc - &xs[m]
            } else {
                &acc + &xs[m + 1]
            };
            (&c * &half).to_exact()
        })
        .collect();
    let pc = PiecewiseContraction::new(
        xs.iter().map(Dyadic::to_exact).collect(),
        t.signs().iter().map(|&s| ExactNumber::ratio(s as i64, 2)).collect(),
        intercepts,
    )?;
    let inner: Vec<Ball> = (1..n).map(|i| gaps.breakpoint(i)).collect();
    let family = PcEnclosure::from_balls(pc.clone(), &inner, &intercept_balls)?;
    let error_bound = inner
        .iter()
        .chain(&intercept_balls)
        .fold(Dyadic::zero(), |acc, b| max_dyadic(acc, b.radius()));
    Ok(ConstructedPc {
        pc,
        family,
        gaps,
        provenance,
        error_bound,
        seed,
    })
}

#[derive(Serialize)]
struct GapRow {
    k: usize,
    point: ExactNumber,
    piece: usize,
    inf: Ball,
    sup: Ball,
}

/// Audit record written next to the PC map.
#[derive(Serialize)]
pub struct Sidecar<'a> {
    seed: &'a ExactNumber,
    depth: usize,
    error_bound: String,
    breakpoints: Vec<Ball>,
    pieces: &'a [PieceProvenance],
    family: &'a PcEnclosure,
    warnings: &'a [GapWarning],
    gaps: Vec<GapRow>,
}

impl ConstructedPc {
    pub fn sidecar(&self) -> Sidecar<'_> {
        let g = &self.gaps;
        Sidecar {
            seed: &self.seed,
            depth: g.depth,
            error_bound: self.error_bound.to_string(),
            breakpoints: (0..=self.pc.pieces()).map(|i| g.breakpoint(i)).collect(),
            pieces: &self.provenance,
            family: &self.family,
            warnings: &g.warnings,
            gaps: (1..=g.depth)
                .map(|k| GapRow {
                    k,
                    point: g.point(k).clone(),
                    piece: g.piece_of(k) + 1,
                    inf: g.inf(k),
                    sup: g.sup(k),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RotationPc {
    pub delta: Ball,
    pub breakpoint: Ball,
    /// `δ` or `x_1 = 2 − 2δ` not certainly inside `(0, 1)`.
    pub degenerate: bool,
}

fn inside_unit(b: &Ball) -> bool {
    b.lo() > Dyadic::zero() && b.hi() < Dyadic::one()
}

/// `δ = ¼·Σ θ_ℓ 2^{−ℓ}` and `x_1 = 2 − 2δ` for a coding over `{1, 2}`.
/// The unseen tail lies in `[2^{−L−1}, 2^{−L}]`.
pub fn rotation_pc(theta: &SymbolicWord) -> Result<RotationPc, ConstructError> {
    let len = theta.len();
    if len < 8 {
        return Err(ConstructError::WordTooShort(len));
    }
    let mut sum = Dyadic::zero();
    for (l, &c) in theta.symbols().iter().enumerate() {
        if !(1..=2).contains(&c) {
            return Err(ConstructError::BadAlphabet(c));
        }
        sum = &sum + &Dyadic::from_integer(c as i64).mul_pow2(-(l as i64) - 2);
    }
    let l = len as i64;
    let center = &sum + &Dyadic::from_integer(3).mul_pow2(-l - 2);
    let delta = Ball::new(center, Dyadic::pow2(-l - 2));
    let breakpoint = &Ball::exact(Dyadic::from_integer(2)) - &delta.mul_pow2(1);
    let degenerate = !(inside_unit(&delta) && inside_unit(&breakpoint));
    Ok(RotationPc {
        delta,
        breakpoint,
        degenerate,
    })
}

/// `R = 1 − Σ_{ℓ≥0} f_ℓ 2^{−(ℓ+1)}` over the Fibonacci word `f`, with
/// radius at most `2^{−bits}`.
pub fn rabbit_constant(precision_bits: u32) -> Ball {
    let terms = precision_bits as usize + 1;
    let f = fibonacci_word(terms);
    let sum = f
        .symbols()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 1)
        .fold(Dyadic::zero(), |acc, (l, _)| &acc + &Dyadic::pow2(-(l as i64) - 1));
    let hi = &Dyadic::one() - &sum;
    let lo = &hi - &Dyadic::pow2(-(terms as i64));
    Ball::from_endpoints(&lo, &hi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleAgreement {
    pub gap: usize,
    pub agree: usize,
    pub disagree: usize,
    pub undecided: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemiconjugacyReport {
    pub length: usize,
    pub samples: Vec<SampleAgreement>,
    pub agree: usize,
    pub disagree: usize,
    pub undecided: usize,
    /// `(gap, position)` of the first certified disagreement.
    pub first_disagreement: Option<(usize, usize)>,
    /// Letter bijection between the decided parts, when one exists.
    pub relabeling: Option<LetterBijection>,
    pub pass: bool,
}

impl SemiconjugacyReport {
    pub fn undecided_fraction(&self) -> f64 {
        self.undecided as f64 / (self.agree + self.disagree + self.undecided).max(1) as f64
    }
}

pub fn verify_semiconjugacy(
    cpc: &ConstructedPc,
    t: &Iet,
    len: usize,
    samples: usize,
) -> Result<SemiconjugacyReport, ConstructError> {
    verify_family(&cpc.family, &cpc.gaps, t, len, samples)
}

/// For gaps `k = 1..=samples`, codes the midpoint of `G_k` under every map
/// of `family` and compares with the IET coding of `p_k`. A position counts
/// as decided only when the enclosure fixes the letter for the whole
/// family; an enclosure certainly outside `[0, 1)` is a disagreement.
pub fn verify_family<P: AffinePieces + ?Sized>(
    family: &P,
    gaps: &GapSystem,
    t: &Iet,
    len: usize,
    samples: usize,
) -> Result<SemiconjugacyReport, ConstructError> {
    let mut rows = Vec::new();
    let mut f_letters = Vec::new();
    let mut t_letters = Vec::new();
    let mut first_disagreement = None;
    for k in 1..=samples.min(gaps.depth()) {
        let mid = gaps.midpoint(k);
        let start = Interval::closed(mid.lo().to_exact(), mid.hi().to_exact());
        let orbit = enclosed_orbit(family, start, len, Arithmetic::Exact { max_bits: u64::MAX })?;
        let expected = t.coding(gaps.point(k), len)?;
        let mut row = SampleAgreement {
            gap: k,
            agree: 0,
            disagree: 0,
            undecided: 0,
        };
        for (j, &want) in expected.symbols().iter().enumerate() {
            match orbit.letters.get(j) {
                Some(&got) => {
                    f_letters.push(got);
                    t_letters.push(want);
                    if got == want {
                        row.agree += 1;
                    } else {
                        row.disagree += 1;
                        first_disagreement.get_or_insert((k, j));
                    }
                }
                None => {
                    if orbit.stop == (OrbitStop::Escaped { step: j }) {
                        row.disagree += 1;
                        first_disagreement.get_or_insert((k, j));
                    } else {
                        row.undecided += 1;
                    }
                }
            }
        }
        rows.push(row);
    }
    let agree = rows.iter().map(|r| r.agree).sum();
    let disagree = rows.iter().map(|r| r.disagree).sum();
    let undecided = rows.iter().map(|r| r.undecided).sum();
    let relabeling = isomorphic_slices(&f_letters, &t_letters).ok().flatten();
    Ok(SemiconjugacyReport {
        length: len,
        samples: rows,
        agree,
        disagree,
        undecided,
        first_disagreement,
        relabeling,
        pass: disagree == 0,
    })
}
