//! Finite prefixes of infinite words: factor sets, complexity tables,
//! letter isomorphisms and eventual-period candidates.
//!
//! Everything here sees only a prefix. Factor sets and complexity values are
//! lower bounds for the infinite word; the prefix itself is described
//! exactly.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("factor length {k} exceeds word length {len}")]
    KTooLarge { k: usize, len: usize },
    #[error("k_max = {k_max} needs a prefix of at least {needed} letters, have {len}")]
    PrefixTooShort { k_max: usize, needed: usize, len: usize },
    #[error("words have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("letter {letter} outside alphabet {first}..{last}")]
    BadLetter { letter: u8, first: u8, last: u8 },
    #[error("empty word")]
    Empty,
    #[error("cannot parse word: {0}")]
    Parse(String),
}

/// Prefix of a natural coding. Letters run over
/// `first_letter ..= first_letter + alphabet_size − 1`; codings use `1..=n`,
/// the Fibonacci word uses `{0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicWord {
    symbols: Vec<u8>,
    first_letter: u8,
    alphabet_size: u8,
    provenance: String,
}

impl SymbolicWord {
    /// Word over `{1, …, alphabet_size}`.
    pub fn new(symbols: Vec<u8>, alphabet_size: u8, provenance: impl Into<String>) -> Result<Self, WordError> {
        Self::with_alphabet(symbols, 1, alphabet_size, provenance)
    }

    pub fn with_alphabet(
        symbols: Vec<u8>,
        first_letter: u8,
        alphabet_size: u8,
        provenance: impl Into<String>,
    ) -> Result<Self, WordError> {
        if symbols.is_empty() {
            return Err(WordError::Empty);
        }
        let last = first_letter.saturating_add(alphabet_size.max(1) - 1);
        if let Some(&bad) = symbols.iter().find(|&&s| s < first_letter || s > last) {
            return Err(WordError::BadLetter {
                letter: bad,
                first: first_letter,
                last,
            });
        }
        Ok(SymbolicWord {
            symbols,
            first_letter,
            alphabet_size,
            provenance: provenance.into(),
        })
    }

    /// Parses a digit string (`112112`) or comma-separated integers; the
    /// alphabet is taken as `1..=max` unless a `0` occurs.
    pub fn parse(text: &str, provenance: impl Into<String>) -> Result<Self, WordError> {
        let text = text.trim();
        let symbols: Vec<u8> = if text.contains(',') {
            text.split(',')
                .map(|t| t.trim().parse::<u8>().map_err(|e| WordError::Parse(e.to_string())))
                .collect::<Result<_, _>>()?
        } else {
            text.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| WordError::Parse(format!("unexpected character {c:?}")))
                })
                .collect::<Result<_, _>>()?
        };
        let max = symbols.iter().copied().max().ok_or(WordError::Empty)?;
        let first = if symbols.contains(&0) { 0 } else { 1 };
        Self::with_alphabet(symbols, first, max - first + 1, provenance)
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet_size(&self) -> u8 {
        self.alphabet_size
    }

    pub fn first_letter(&self) -> u8 {
        self.first_letter
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Letters actually present.
    pub fn letters(&self) -> BTreeSet<u8> {
        self.symbols.iter().copied().collect()
    }

    /// The word with `q` leading letters dropped.
    pub fn suffix(&self, q: usize) -> Result<Self, WordError> {
        if q >= self.len() {
            return Err(WordError::KTooLarge { k: q, len: self.len() });
        }
        Ok(SymbolicWord {
            symbols: self.symbols[q..].to_vec(),
            first_letter: self.first_letter,
            alphabet_size: self.alphabet_size,
            provenance: format!("{} [from {q}]", self.provenance),
        })
    }

    pub fn prefix(&self, len: usize) -> Result<Self, WordError> {
        if len == 0 || len > self.len() {
            return Err(WordError::KTooLarge {
                k: len,
                len: self.len(),
            });
        }
        Ok(SymbolicWord {
            symbols: self.symbols[..len].to_vec(),
            first_letter: self.first_letter,
            alphabet_size: self.alphabet_size,
            provenance: self.provenance.clone(),
        })
    }

    /// Adds `delta` to every letter (e.g. `θ − 1` turns a `{1,2}` coding
    /// into a binary word).
    pub fn shifted(&self, delta: i16) -> Result<Self, WordError> {
        let symbols = self
            .symbols
            .iter()
            .map(|&s| {
                u8::try_from(s as i16 + delta).map_err(|_| WordError::Parse(format!("letter {s} shifted by {delta}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let first = u8::try_from(self.first_letter as i16 + delta)
            .map_err(|_| WordError::Parse("shifted alphabet below 0".into()))?;
        Self::with_alphabet(symbols, first, self.alphabet_size, self.provenance.clone())
    }

    /// Compact digit string when every letter is a single digit, else
    /// comma-separated integers.
    pub fn to_text(&self) -> String {
        if self.symbols.iter().all(|&s| s <= 9) {
            self.symbols.iter().map(|s| char::from(b'0' + s)).collect()
        } else {
            self.symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
        }
    }
}

impl fmt::Display for SymbolicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `p(k) = α·k + β` for every tabulated `k ≥ k0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineFit {
    pub alpha: i64,
    pub beta: i64,
    pub k0: usize,
}

/// Factor counts `p(k)` for `k = 1..=K`, with the affine tail if the table
/// ends in one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityTable {
    pub alphabet_size: usize,
    pub values: Vec<(usize, usize)>,
    pub fit: Option<AffineFit>,
}

impl ComplexityTable {
    /// Builds a table from `p(1), …, p(K)` and fits its tail.
    pub fn from_counts(alphabet_size: usize, counts: &[usize]) -> Self {
        let values: Vec<(usize, usize)> = counts.iter().enumerate().map(|(i, &p)| (i + 1, p)).collect();
        let fit = fit_affine_tail(counts);
        ComplexityTable {
            alphabet_size,
            values,
            fit,
        }
    }

    pub fn k_max(&self) -> usize {
        self.values.len()
    }

    /// `p(k)` for a tabulated `k`.
    pub fn p(&self, k: usize) -> Option<usize> {
        k.checked_sub(1).and_then(|i| self.values.get(i)).map(|&(_, p)| p)
    }

    pub fn counts(&self) -> Vec<usize> {
        self.values.iter().map(|&(_, p)| p).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,p\n");
        for (k, p) in &self.values {
            out.push_str(&format!("{k},{p}\n"));
        }
        out
    }
}

/// Exact affine fit of the last `⌈K/2⌉` values, extended backwards as far as
/// the same line holds. Needs at least two tail values.
pub fn fit_affine_tail(counts: &[usize]) -> Option<AffineFit> {
    let k_max = counts.len();
    let tail = k_max.div_ceil(2);
    if tail < 2 {
        return None;
    }
    let p = |k: usize| counts[k - 1] as i64;
    let alpha = p(k_max) - p(k_max - 1);
    let beta = p(k_max) - alpha * k_max as i64;
    let on_line = |k: usize| p(k) == alpha * k as i64 + beta;
    let start = k_max - tail + 1;
    if !(start..=k_max).all(on_line) {
        return None;
    }
    let mut k0 = start;
    while k0 > 1 && on_line(k0 - 1) {
        k0 -= 1;
    }
    Some(AffineFit { alpha, beta, k0 })
}

/// Distinct length-`k` factors of the prefix.
pub fn factors(w: &SymbolicWord, k: usize) -> Result<BTreeSet<Vec<u8>>, WordError> {
    if k == 0 || k > w.len() {
        return Err(WordError::KTooLarge { k, len: w.len() });
    }
    Ok(w.symbols().windows(k).map(<[u8]>::to_vec).collect())
}

fn factor_count(symbols: &[u8], k: usize) -> usize {
    symbols.windows(k).collect::<HashSet<_>>().len()
}

/// Complexity table `p(1..=k_max)` of the prefix.
///
/// Refuses `k_max > len/4`: counts near the prefix length undercount the
/// infinite word. [`complexity_unguarded`] skips the check.
pub fn complexity(w: &SymbolicWord, k_max: usize) -> Result<ComplexityTable, WordError> {
    let needed = 4 * k_max;
    if k_max == 0 || needed > w.len() {
        return Err(WordError::PrefixTooShort {
            k_max,
            needed,
            len: w.len(),
        });
    }
    complexity_unguarded(w, k_max)
}

pub fn complexity_unguarded(w: &SymbolicWord, k_max: usize) -> Result<ComplexityTable, WordError> {
    if k_max == 0 || k_max > w.len() {
        return Err(WordError::KTooLarge { k: k_max, len: w.len() });
    }
    let counts: Vec<usize> = (1..=k_max).map(|k| factor_count(w.symbols(), k)).collect();
    Ok(ComplexityTable::from_counts(w.alphabet_size() as usize, &counts))
}

/// Tables of the prefixes of length `L/4`, `L/2` and `L`, reporting whether
/// either of the last two doublings changed `p(1..=k_max)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrefixStability {
    pub lengths: [usize; 3],
    pub tables: Vec<ComplexityTable>,
    pub changed: bool,
}

pub fn prefix_stability(w: &SymbolicWord, k_max: usize) -> Result<PrefixStability, WordError> {
    let len = w.len();
    let lengths = [len / 4, len / 2, len];
    let tables = lengths
        .iter()
        .map(|&l| complexity_unguarded(&w.prefix(l)?, k_max))
        .collect::<Result<Vec<_>, _>>()?;
    let changed = tables.windows(2).any(|t| t[0].values != t[1].values);
    Ok(PrefixStability {
        lengths,
        tables,
        changed,
    })
}

/// Offsets `β_k = p_k(w) − p_k(w[q..])` for `k = 1..=k_max`.
///
/// Every factor of the suffix is a factor of `w`, and only the `q` factors
/// starting before position `q` can be missing from it, so each offset lies
/// in `0..=q` and is nondecreasing in `k`.
pub fn suffix_offsets(w: &SymbolicWord, q: usize, k_max: usize) -> Result<Vec<usize>, WordError> {
    let tail = w.suffix(q)?;
    if k_max > tail.len() {
        return Err(WordError::KTooLarge {
            k: k_max,
            len: tail.len(),
        });
    }
    Ok((1..=k_max)
        .map(|k| factor_count(w.symbols(), k) - factor_count(tail.symbols(), k))
        .collect())
}

/// Letter bijection `π` with `w2[k] = π(w1[k])` for every position.
pub type LetterBijection = BTreeMap<u8, u8>;

pub fn isomorphic(w1: &SymbolicWord, w2: &SymbolicWord) -> Result<Option<LetterBijection>, WordError> {
    isomorphic_slices(w1.symbols(), w2.symbols())
}

pub(crate) fn isomorphic_slices(a: &[u8], b: &[u8]) -> Result<Option<LetterBijection>, WordError> {
    if a.len() != b.len() {
        return Err(WordError::LengthMismatch(a.len(), b.len()));
    }
    let mut forward = BTreeMap::new();
    let mut backward = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        if *forward.entry(x).or_insert(y) != y || *backward.entry(y).or_insert(x) != x {
            return Ok(None);
        }
    }
    Ok(Some(forward))
}

/// `w[i] = w[i + period]` for all `preperiod ≤ i < len − period`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventualPeriod {
    pub preperiod: usize,
    pub period: usize,
}

/// Lexicographically smallest `(preperiod, period)` whose periodic part
/// spans at least three full periods of the prefix.
///
/// Only a candidate: a finite prefix cannot prove periodicity.
pub fn detect_eventual_period(w: &SymbolicWord) -> Option<EventualPeriod> {
    detect_in(w.symbols())
}

pub(crate) fn detect_in(s: &[u8]) -> Option<EventualPeriod> {
    let n = s.len();
    if n < 8 {
        return None;
    }
    let mut best: Option<EventualPeriod> = None;
    for p in 1..=n / 3 {
        // smallest q such that s[q..] has period p
        let q = (0..n - p).rev().find(|&i| s[i] != s[i + p]).map_or(0, |i| i + 1);
        if n - q < 3 * p {
            continue;
        }
        let better = best.is_none_or(|b| q < b.preperiod);
        if better {
            best = Some(EventualPeriod {
                preperiod: q,
                period: p,
            });
        }
        if q == 0 {
            break;
        }
    }
    best
}

/// Prefix of the fixed point of `0 ↦ 01, 1 ↦ 0`.
pub fn fibonacci_word(length: usize) -> SymbolicWord {
    assert!(length >= 1, "fibonacci_word needs length >= 1");
    let mut w: Vec<u8> = vec![0];
    while w.len() < length {
        w = w
            .iter()
            .flat_map(|&c| if c == 0 { &[0u8, 1][..] } else { &[0u8][..] })
            .copied()
            .collect();
    }
    w.truncate(length);
    SymbolicWord::with_alphabet(w, 0, 2, "fibonacci").expect("binary letters")
}

/// True iff some tabulated `p(k) ≤ k`, which forces ultimate periodicity
/// when the table is exact.
pub fn morse_hedlund_flag(table: &ComplexityTable) -> bool {
    table.values.iter().any(|&(k, p)| p <= k)
}
