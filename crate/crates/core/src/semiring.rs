//! Score semirings for weighted deduction.
//!
//! The chart parser is generic over a [`Semiring`]. Three instances are
//! provided: [`LogProb`] (inside probabilities, kept in the log domain so
//! that long derivations do not underflow), [`ViterbiProb`] (max/times, also
//! log domain) and [`Recognized`] (plain boolean recognition).
//!
//! Rule probabilities enter the parser as `f64` values in `[0, 1]` and are
//! injected into the semiring with [`Semiring::from_prob`].

use std::cmp::Ordering;
use std::fmt;

/// A semiring `(⊕, ⊗, 0, 1)` together with the small amount of extra
/// structure the parser needs: probability injection, a total order for
/// best-derivation extraction, and a convergence test for the agenda loop.
pub trait Semiring: Copy + fmt::Debug + PartialEq + Send + Sync + 'static {
    /// Additive identity. Annihilates `times`.
    fn zero() -> Self;
    /// Multiplicative identity.
    fn one() -> Self;
    /// Semiring addition: combines alternative derivations.
    fn plus(&self, other: &Self) -> Self;
    /// Semiring multiplication: chains sub-derivations.
    fn times(&self, other: &Self) -> Self;
    /// Injects a rule probability from `[0, 1]`.
    fn from_prob(p: f64) -> Self;
    /// Reports the score back on the probability scale (for output).
    fn prob(&self) -> f64;
    /// Total order, used to pick maximal backpointers and break ties.
    fn compare(&self, other: &Self) -> Ordering;
    /// Whether an item's score has stopped changing noticeably since its
    /// last dequeue. Numeric semirings compare log values with an absolute
    /// tolerance; relative tolerance would be ill-defined at zero.
    fn converged(&self, previous: &Self, tol: f64) -> bool;
}

/// A probability stored as its natural logarithm. `-inf` is exact zero and
/// `0.0` is exact one. Addition uses log-sum-exp and cannot overflow for
/// log values `<= 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogProb(f64);

impl LogProb {
    pub fn from_ln(ln: f64) -> Self {
        LogProb(ln)
    }

    pub fn ln_value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.prob())
    }
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn log_converged(a: f64, b: f64, tol: f64) -> bool {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return true;
    }
    (a - b).abs() <= tol
}

impl Semiring for LogProb {
    fn zero() -> Self {
        LogProb(f64::NEG_INFINITY)
    }

    fn one() -> Self {
        LogProb(0.0)
    }

    fn plus(&self, other: &Self) -> Self {
        LogProb(log_sum_exp(self.0, other.0))
    }

    fn times(&self, other: &Self) -> Self {
        LogProb(self.0 + other.0)
    }

    fn from_prob(p: f64) -> Self {
        LogProb(p.ln())
    }

    fn prob(&self) -> f64 {
        self.0.exp()
    }

    fn compare(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    fn converged(&self, previous: &Self, tol: f64) -> bool {
        log_converged(self.0, previous.0, tol)
    }
}

/// Viterbi score: the probability of the single best derivation, in the log
/// domain. `plus` is max, `times` is product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViterbiProb(f64);

impl ViterbiProb {
    pub fn from_ln(ln: f64) -> Self {
        ViterbiProb(ln)
    }

    pub fn ln_value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for ViterbiProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.prob())
    }
}

impl Semiring for ViterbiProb {
    fn zero() -> Self {
        ViterbiProb(f64::NEG_INFINITY)
    }

    fn one() -> Self {
        ViterbiProb(0.0)
    }

    fn plus(&self, other: &Self) -> Self {
        if self.0.total_cmp(&other.0) == Ordering::Less {
            *other
        } else {
            *self
        }
    }

    fn times(&self, other: &Self) -> Self {
        ViterbiProb(self.0 + other.0)
    }

    fn from_prob(p: f64) -> Self {
        ViterbiProb(p.ln())
    }

    fn prob(&self) -> f64 {
        self.0.exp()
    }

    fn compare(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }

    fn converged(&self, previous: &Self, tol: f64) -> bool {
        log_converged(self.0, previous.0, tol)
    }
}

/// Boolean recognition semiring: or/and over `{false, true}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Recognized(pub bool);

impl fmt::Display for Recognized {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Semiring for Recognized {
    fn zero() -> Self {
        Recognized(false)
    }

    fn one() -> Self {
        Recognized(true)
    }

    fn plus(&self, other: &Self) -> Self {
        Recognized(self.0 || other.0)
    }

    fn times(&self, other: &Self) -> Self {
        Recognized(self.0 && other.0)
    }

    fn from_prob(p: f64) -> Self {
        Recognized(p > 0.0)
    }

    fn prob(&self) -> f64 {
        if self.0 {
            1.0
        } else {
            0.0
        }
    }

    fn compare(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }

    fn converged(&self, previous: &Self, _tol: f64) -> bool {
        self == previous
    }
}
