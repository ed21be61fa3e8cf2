//! Exact interval exchange transformations.
//!
//! Pieces are `I_i = [x_{i−1}, x_i)` and `T(x) = σ_i·x + b_i` on `I_i`.
//! Images keep track of open and closed ends; a reversed piece maps
//! `[x_{i−1}, x_i)` onto `(T(x_i), T(x_{i−1})]`.
//!
//! With a reversed piece the half-open convention cannot tile `[0, 1)`
//! exactly, so bijectivity is checked up to the finitely many image
//! endpoints: closures lie in `[0, 1]` and interiors are pairwise disjoint.
//! For orientation-preserving maps this is exact bijectivity.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{common_radicand, ExactNumber, Interval, NumericError};
use crate::words::{ComplexityTable, SymbolicWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IetError {
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("not bijective: {0}")]
    NotBijective(String),
    #[error("point {0} outside [0, 1)")]
    OutOfDomain(String),
    #[error("image of {0} is 1, the closed end of a reversed piece")]
    EscapesAtEndpoint(String),
    #[error("orbit hits a breakpoint at step {0}")]
    OrbitHitsBreakpoint(usize),
    #[error("new division points increase at level {0}")]
    NonMonotoneRefinement(usize),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Validated `n`-IET.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iet {
    breakpoints: Vec<ExactNumber>,
    signs: Vec<i8>,
    translations: Vec<ExactNumber>,
    images: Vec<Interval>,
}

/// Serialized form: `{"type":"iet","breakpoints":[...],"signs":[...],"translations":[...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IetSpec {
    pub breakpoints: Vec<ExactNumber>,
    pub signs: Vec<i8>,
    pub translations: Vec<ExactNumber>,
}

pub(crate) fn validate_partition(breakpoints: &[ExactNumber]) -> Result<(), String> {
    if breakpoints.len() < 2 {
        return Err("need at least the endpoints 0 and 1".into());
    }
    if !breakpoints[0].is_zero() || breakpoints[breakpoints.len() - 1] != ExactNumber::one() {
        return Err("breakpoints must run from 0 to 1".into());
    }
    if let Some(w) = breakpoints.windows(2).find(|w| w[0].cmp_exact(&w[1]) != Ordering::Less) {
        return Err(format!("breakpoints not increasing at {} / {}", w[0], w[1]));
    }
    Ok(())
}

/// Index of the half-open piece `[x_{i−1}, x_i)` holding `x`, if any.
pub(crate) fn locate(breakpoints: &[ExactNumber], x: &ExactNumber) -> Option<usize> {
    if x.signum() < 0 || x.cmp_exact(breakpoints.last()?) != Ordering::Less {
        return None;
    }
    // number of interior breakpoints ≤ x
    let inner = &breakpoints[1..breakpoints.len() - 1];
    Some(inner.partition_point(|b| b.cmp_exact(x) != Ordering::Greater))
}

impl Iet {
    pub fn new(
        breakpoints: Vec<ExactNumber>,
        signs: Vec<i8>,
        translations: Vec<ExactNumber>,
    ) -> Result<Self, IetError> {
        common_radicand(breakpoints.iter().chain(&translations))?;
        validate_partition(&breakpoints).map_err(IetError::BadPartition)?;
        let n = breakpoints.len() - 1;
        if signs.len() != n || translations.len() != n {
            return Err(IetError::BadPartition(format!(
                "{n} pieces but {} signs and {} translations",
                signs.len(),
                translations.len()
            )));
        }
        if let Some(s) = signs.iter().find(|s| s.abs() != 1) {
            return Err(IetError::BadPartition(format!("sign {s} is not ±1")));
        }
        let unit = Interval::closed(ExactNumber::zero(), ExactNumber::one());
        let images: Vec<Interval> = (0..n)
            .map(|i| {
                let piece = Interval::half_open(breakpoints[i].clone(), breakpoints[i + 1].clone());
                piece.affine_image(&ExactNumber::from(signs[i] as i64), &translations[i])
            })
            .collect();
        for (i, img) in images.iter().enumerate() {
            let closure = Interval::closed(img.lo.clone(), img.hi.clone());
            if !closure.is_subset_of(&unit) {
                return Err(IetError::NotBijective(format!(
                    "image {img} of piece {} leaves [0, 1)",
                    i + 1
                )));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if !images[i].interiors_disjoint(&images[j]) {
                    return Err(IetError::NotBijective(format!(
                        "images {} and {} of pieces {} and {} overlap",
                        images[i],
                        images[j],
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Iet {
            breakpoints,
            signs,
            translations,
            images,
        })
    }

    /// Standard IET from piece lengths and a permutation: `perm[i]` is the
    /// 1-based position of piece `i+1` in the image.
    pub fn from_permutation(lengths: &[ExactNumber], perm: &[usize]) -> Result<Self, IetError> {
        let n = lengths.len();
        if perm.len() != n {
            return Err(IetError::BadPartition("permutation length".into()));
        }
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (1..=n).collect::<Vec<_>>() {
            return Err(IetError::BadPartition(format!("{perm:?} is not a permutation")));
        }
        let mut breakpoints = vec![ExactNumber::zero()];
        for l in lengths {
            let last = breakpoints.last().expect("nonempty");
            breakpoints.push(last.checked_add(l)?);
        }
        let translations = (0..n)
            .map(|i| {
                let start: ExactNumber = (0..n)
                    .filter(|&j| perm[j] < perm[i])
                    .fold(ExactNumber::zero(), |acc, j| acc + &lengths[j]);
                &start - &breakpoints[i]
            })
            .collect();
        Iet::new(breakpoints, vec![1; n], translations)
    }

    /// The rotation `x ↦ x + α mod 1` as a 2-IET, `0 < α < 1`.
    pub fn rotation(alpha: &ExactNumber) -> Result<Self, IetError> {
        let one = ExactNumber::one();
        Iet::new(
            vec![ExactNumber::zero(), &one - alpha, one.clone()],
            vec![1, 1],
            vec![alpha.clone(), alpha - &one],
        )
    }

    /// Rotation by `α = 2 − φ`.
    pub fn golden_rotation() -> Self {
        let alpha = ExactNumber::from(2) - ExactNumber::golden_ratio();
        Iet::rotation(&alpha).expect("golden rotation is a valid IET")
    }

    /// Symmetric 3-IET (permutation `(3,2,1)`) with lengths
    /// `((√5−1)/4, 1/4, (4−√5)/4)`; passes the i.d.o.c. check to depth 200.
    pub fn three_interval_example() -> Self {
        let s5 = ExactNumber::sqrt_of(5).expect("5 > 0");
        let one = ExactNumber::one();
        let lengths = [
            (&s5 - &one).mul_pow2(-2),
            ExactNumber::ratio(1, 4),
            (ExactNumber::from(4) - s5).mul_pow2(-2),
        ];
        Iet::from_permutation(&lengths, &[3, 2, 1]).expect("valid lengths")
    }

    pub fn identity() -> Self {
        Iet::new(
            vec![ExactNumber::zero(), ExactNumber::one()],
            vec![1],
            vec![ExactNumber::zero()],
        )
        .expect("identity is valid")
    }

    pub fn from_spec(spec: IetSpec) -> Result<Self, IetError> {
        Iet::new(spec.breakpoints, spec.signs, spec.translations)
    }

    pub fn to_spec(&self) -> IetSpec {
        IetSpec {
            breakpoints: self.breakpoints.clone(),
            signs: self.signs.clone(),
            translations: self.translations.clone(),
        }
    }

    pub fn pieces(&self) -> usize {
        self.signs.len()
    }

    pub fn breakpoints(&self) -> &[ExactNumber] {
        &self.breakpoints
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn translations(&self) -> &[ExactNumber] {
        &self.translations
    }

    /// `[x_{i−1}, x_i)` for the 0-based piece index `i`.
    pub fn piece(&self, i: usize) -> Interval {
        Interval::half_open(self.breakpoints[i].clone(), self.breakpoints[i + 1].clone())
    }

    pub fn image(&self, i: usize) -> &Interval {
        &self.images[i]
    }

    /// All pieces orientation-preserving.
    pub fn is_standard(&self) -> bool {
        self.signs.iter().all(|&s| s == 1)
    }

    pub fn radicand(&self) -> Option<num_bigint::BigInt> {
        common_radicand(self.breakpoints.iter().chain(&self.translations)).expect("validated")
    }

    fn check_point(&self, x: &ExactNumber) -> Result<usize, IetError> {
        common_radicand(self.breakpoints.iter().chain(&self.translations).chain([x]))?;
        locate(&self.breakpoints, x).ok_or_else(|| IetError::OutOfDomain(x.to_string()))
    }

    /// 0-based index of the piece containing `x`.
    pub fn piece_index(&self, x: &ExactNumber) -> Result<usize, IetError> {
        self.check_point(x)
    }

    fn apply(&self, i: usize, x: &ExactNumber) -> ExactNumber {
        if self.signs[i] == 1 {
            x + &self.translations[i]
        } else {
            &self.translations[i] - x
        }
    }

    /// Exact image `T(x)`.
    pub fn eval(&self, x: &ExactNumber) -> Result<ExactNumber, IetError> {
        let i = self.check_point(x)?;
        let y = self.apply(i, x);
        if y == ExactNumber::one() {
            return Err(IetError::EscapesAtEndpoint(x.to_string()));
        }
        Ok(y)
    }

    /// `T⁻¹(y)`, taking the first piece whose image contains `y`. `None`
    /// for the endpoint a reversed piece leaves uncovered.
    pub fn inverse(&self, y: &ExactNumber) -> Option<ExactNumber> {
        let i = self.images.iter().position(|img| img.contains(y))?;
        Some(if self.signs[i] == 1 {
            y - &self.translations[i]
        } else {
            &self.translations[i] - y
        })
    }

    /// `x, T(x), …, T^{len−1}(x)`.
    pub fn orbit(&self, x: &ExactNumber, len: usize) -> Result<Vec<ExactNumber>, IetError> {
        let mut out = Vec::with_capacity(len);
        let mut cur = x.clone();
        for step in 0..len {
            if step + 1 < len {
                let next = self.eval(&cur)?;
                out.push(std::mem::replace(&mut cur, next));
            } else {
                self.check_point(&cur)?;
                out.push(cur.clone());
            }
        }
        Ok(out)
    }

    /// First `len` letters of the natural coding of `x`.
    pub fn coding(&self, x: &ExactNumber, len: usize) -> Result<SymbolicWord, IetError> {
        let mut letters = Vec::with_capacity(len);
        let mut cur = x.clone();
        for step in 0..len {
            let i = self.check_point(&cur)?;
            letters.push(i as u8 + 1);
            if step + 1 < len {
                cur = self.apply(i, &cur);
                if cur == ExactNumber::one() {
                    return Err(IetError::EscapesAtEndpoint(cur.to_string()));
                }
            }
        }
        Ok(
            SymbolicWord::new(letters, self.pieces() as u8, format!("iet coding of {x}"))
                .expect("letters within 1..=n"),
        )
    }

    /// No proper prefix union `I_1 ∪ … ∪ I_j` is mapped into itself.
    pub fn irreducible(&self) -> bool {
        (1..self.pieces()).all(|j| {
            let bound = &self.breakpoints[j];
            !self.images[..j]
                .iter()
                .all(|img| img.hi.cmp_exact(bound) != Ordering::Greater)
        })
    }

    /// Follows the discontinuities `x_1 … x_{n−1}` for `depth` steps and
    /// looks for exact repeats.
    pub fn idoc_check(&self, depth: usize) -> Result<IdocCertificate, IetError> {
        let n = self.pieces();
        let mut seen: HashMap<ExactNumber, (usize, usize)> = HashMap::new();
        let mut current: Vec<ExactNumber> = self.breakpoints[1..n].to_vec();
        for step in 0..=depth {
            for (j, p) in current.iter().enumerate() {
                let i = j + 1;
                if let Some(&(i0, k0)) = seen.get(p) {
                    let verdict = if i0 == i {
                        IdocVerdict::FailedFinite { i, k: step }
                    } else {
                        IdocVerdict::FailedDisjoint {
                            i: i0,
                            j: i,
                            k: k0,
                            l: step,
                        }
                    };
                    return Ok(IdocCertificate { depth, verdict });
                }
                seen.insert(p.clone(), (i, step));
            }
            if step < depth {
                current = current.iter().map(|p| self.eval(p)).collect::<Result<_, _>>()?;
            }
        }
        Ok(IdocCertificate {
            depth,
            verdict: IdocVerdict::PassedToDepth,
        })
    }

    /// Counts of new division points `m_ℓ` among `T^{−ℓ}(x_1), …,
    /// T^{−ℓ}(x_{n−1})` for `ℓ < k_max`, and `p(k) = 1 + Σ_{ℓ<k} m_ℓ`.
    ///
    /// `x_regular` stands for the coding being described; its orbit must
    /// avoid the breakpoints for `k_max` steps.
    pub fn refinement_complexity(
        &self,
        x_regular: &ExactNumber,
        k_max: usize,
    ) -> Result<RefinementComplexity, IetError> {
        let mut cur = x_regular.clone();
        for step in 0..=k_max {
            let i = self.check_point(&cur)?;
            if cur == self.breakpoints[i] {
                return Err(IetError::OrbitHitsBreakpoint(step));
            }
            if step < k_max {
                cur = self.eval(&cur)?;
            }
        }

        let n = self.pieces();
        let mut seen: HashSet<ExactNumber> = HashSet::from([ExactNumber::zero()]);
        let mut level: Vec<Option<ExactNumber>> = self.breakpoints[1..n].iter().cloned().map(Some).collect();
        let mut new_points = Vec::with_capacity(k_max);
        for ell in 0..k_max {
            if ell > 0 {
                level = level.iter().map(|p| p.as_ref().and_then(|p| self.inverse(p))).collect();
            }
            let fresh = level.iter().flatten().filter(|p| seen.insert((*p).clone())).count();
            if new_points.last().is_some_and(|&prev| fresh > prev) {
                return Err(IetError::NonMonotoneRefinement(ell));
            }
            new_points.push(fresh);
        }
        let counts: Vec<usize> = new_points
            .iter()
            .scan(1usize, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        Ok(RefinementComplexity {
            table: ComplexityTable::from_counts(n, &counts),
            new_points,
        })
    }

    /// Finite evidence for minimality: irreducibility plus i.d.o.c. to the
    /// given depth, combined through Keane's criterion for standard maps.
    pub fn minimality_evidence(&self, depth: usize) -> Result<MinimalityEvidence, IetError> {
        let idoc = self.idoc_check(depth)?;
        let irreducible = self.irreducible();
        let standard = self.is_standard();
        let keane_applies = irreducible && standard && self.pieces() >= 2 && idoc.verdict == IdocVerdict::PassedToDepth;
        Ok(MinimalityEvidence {
            irreducible,
            standard,
            idoc,
            keane_applies,
        })
    }
}

impl Serialize for Iet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::maps::MapFile::Iet(self.to_spec()).serialize(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum IdocVerdict {
    PassedToDepth,
    /// `T^k(x_i) = T^l(x_j)` for distinct discontinuities.
    FailedDisjoint {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
    },
    /// The orbit of `x_i` repeats at step `k`.
    FailedFinite {
        i: usize,
        k: usize,
    },
}

/// Finite-depth evidence only: passing says nothing beyond `depth`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdocCertificate {
    pub depth: usize,
    pub verdict: IdocVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinimalityEvidence {
    pub irreducible: bool,
    pub standard: bool,
    pub idoc: IdocCertificate,
    /// Irreducible, standard, `n ≥ 2` and i.d.o.c. passed to depth.
    pub keane_applies: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefinementComplexity {
    pub table: ComplexityTable,
    /// `m_0, …, m_{k_max−1}`.
    pub new_points: Vec<usize>,
}
