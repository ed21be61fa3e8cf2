//! Exact interval exchange transformations, injective piecewise
//! contractions, and the construction of a ½-affine contraction whose
//! natural codings match those of a given exchange.

pub mod construct;
pub mod iet;
pub mod maps;
pub mod numeric;
pub mod pc;
pub mod words;

pub use construct::{ConstructError, ConstructedPc, GapSystem, SemiconjugacyReport};
pub use iet::{IdocCertificate, IdocVerdict, Iet, IetError};
pub use maps::MapFile;
pub use numeric::{parse_exact, Ball, Dyadic, ExactNumber, Interval, NumericError};
pub use pc::{AffinePieces, EmpiricalFactor, PcEnclosure, PcError, PeriodicCertificate, PiecewiseContraction};
pub use words::{ComplexityTable, EventualPeriod, SymbolicWord, WordError};
