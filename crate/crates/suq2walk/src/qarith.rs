//! Exact half-integer spin labels and numerically stable q-number arithmetic.
//!
//! Spins live in (1/2)Z+ and are stored as doubled integers so that fusion
//! arithmetic stays exact. All q-numbers are evaluated through the summed form
//! `[n]_q = q^{n-1} + q^{n-3} + ... + q^{-n+1}`, which avoids the cancellation
//! in the quotient definition for small q.

use crate::{Error, Result};

/// A spin label s in (1/2)Z+, stored exactly as 2s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    /// Spin from its doubled value (2s).
    pub const fn from_twice(twice: u32) -> Self {
        Spin { twice }
    }

    /// Integer spin n.
    pub const fn from_int(n: u32) -> Self {
        Spin { twice: 2 * n }
    }

    pub const ZERO: Spin = Spin { twice: 0 };
    pub const HALF: Spin = Spin { twice: 1 };
    pub const ONE: Spin = Spin { twice: 2 };

    /// The doubled value 2s.
    pub const fn twice(self) -> u32 {
        self.twice
    }

    /// s as a float.
    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Classical dimension 2s + 1.
    pub const fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// True when s is a half-odd-integer (not in Z+).
    pub const fn is_half_odd(self) -> bool {
        self.twice % 2 == 1
    }

    /// Magnetic indices j = -s, -s+1, ..., s as doubled integers, ascending.
    pub fn magnetic_indices(self) -> impl Iterator<Item = i64> {
        let t = self.twice as i64;
        (-t..=t).step_by(2)
    }

    /// Position of the magnetic index j (doubled) in the ascending basis.
    pub fn index_of(self, twice_j: i64) -> Result<usize> {
        let t = self.twice as i64;
        if twice_j.abs() > t || (twice_j - t) % 2 != 0 {
            return Err(Error::IndexOutOfRange {
                twice_s: self.twice,
                twice_j,
            });
        }
        Ok(((twice_j + t) / 2) as usize)
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Deformation parameter q in (0,1) with a default comparison tolerance.
///
/// Immutable after construction; cheap to copy and share across threads.
#[derive(Debug, Clone, Copy)]
pub struct QContext {
    q: f64,
    tol: f64,
}

impl QContext {
    /// Default tolerance used by approximate assertions.
    pub const DEFAULT_TOL: f64 = 1e-10;

    /// Context for a given q, rejecting anything outside the open interval (0,1).
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidQ(q));
        }
        Ok(QContext {
            q,
            tol: Self::DEFAULT_TOL,
        })
    }

    /// Same context with an overridden default tolerance.
    pub fn with_tol(self, tol: f64) -> Result<Self> {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(Error::InvalidTolerance(tol));
        }
        Ok(QContext { q: self.q, tol })
    }

    pub fn q(self) -> f64 {
        self.q
    }

    pub fn tol(self) -> f64 {
        self.tol
    }

    /// q^p for an integer exponent.
    pub fn q_pow(self, p: i64) -> f64 {
        self.q.powi(p as i32)
    }

    /// q^(twice/2) for a doubled (possibly odd) exponent.
    pub fn q_pow_half(self, twice: i64) -> f64 {
        if twice % 2 == 0 {
            self.q.powi((twice / 2) as i32)
        } else {
            self.q.powf(twice as f64 / 2.0)
        }
    }

    /// The q-number [n]_q via the summed form; [0]_q = 0, [-n]_q = -[n]_q.
    pub fn q_number(self, n: i64) -> f64 {
        self.q_number_base(n, 1)
    }

    /// The q-number in base q^k, i.e. [n]_{q^k}.
    pub fn q_number_base(self, n: i64, base_power: u32) -> f64 {
        debug_assert!(base_power >= 1);
        if n == 0 {
            return 0.0;
        }
        if n < 0 {
            return -self.q_number_base(-n, base_power);
        }
        let b = self.q.powi(base_power as i32);
        // b^{n-1} + b^{n-3} + ... + b^{-n+1}, summed small-to-large
        let mut sum = 0.0;
        let mut e = n - 1;
        while e >= -(n - 1) {
            sum += b.powi(e as i32);
            e -= 2;
        }
        sum
    }

    /// Quantum dimension d_s = [2s+1]_q = Tr(rho_s).
    pub fn quantum_dim(self, s: Spin) -> f64 {
        self.q_number(s.twice as i64 + 1)
    }
}

/// Relative comparison: |a - b| <= tol * max(1, |a|, |b|).
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1.0_f64.max(a.abs()).max(b.abs())
}
