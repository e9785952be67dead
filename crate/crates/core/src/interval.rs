//! Closed real intervals with midpoint/radius and minimal/maximal module.
//!
//! Arithmetic results are widened by a relative epsilon on each side instead
//! of switching the FPU rounding mode, which keeps the inclusion property at
//! desk scale without platform-specific code.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative widening applied to every arithmetic result.
pub const OUTWARD_EPS: f64 = 1e-15;

fn down(x: f64) -> f64 {
    x - OUTWARD_EPS * x.abs()
}

fn up(x: f64) -> f64 {
    x + OUTWARD_EPS * x.abs()
}

/// A closed interval `[lo, hi]` with finite bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Midpoint, radius, mignitude and magnitude of an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    pub mid: f64,
    pub rad: f64,
    pub mig: f64,
    pub mag: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::MalformedInterval { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x)
    }

    /// Unchecked constructor for bounds already known to be ordered.
    fn raw(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    fn outward(lo: f64, hi: f64) -> Self {
        Self::raw(down(lo), up(hi))
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        // Avoids overflow of lo + hi for huge bounds.
        self.lo / 2.0 + self.hi / 2.0
    }

    pub fn rad(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    /// Minimal module `min{|x| : x in self}`.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Maximal module `max{|x| : x in self}`.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn measures(&self) -> Measures {
        Measures {
            mid: self.mid(),
            rad: self.rad(),
            mig: self.mig(),
            mag: self.mag(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn scale(self, k: f64) -> Self {
        if k >= 0.0 {
            Self::outward(self.lo * k, self.hi * k)
        } else {
            Self::outward(self.hi * k, self.lo * k)
        }
    }

    pub fn checked_div(self, rhs: Interval) -> Result<Self> {
        if rhs.contains(0.0) {
            return Err(Error::DivisionByZeroInterval);
        }
        let q = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        Ok(Self::outward(min4(q), max4(q)))
    }
}

fn min4(v: [f64; 4]) -> f64 {
    v.into_iter().fold(f64::INFINITY, f64::min)
}

fn max4(v: [f64; 4]) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(iv: Interval) -> Self {
        [iv.lo, iv.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;

    fn add(self, rhs: Interval) -> Interval {
        Interval::outward(self.lo + rhs.lo, self.hi + rhs.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;

    fn sub(self, rhs: Interval) -> Interval {
        Interval::outward(self.lo - rhs.hi, self.hi - rhs.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;

    fn mul(self, rhs: Interval) -> Interval {
        let p = [
            self.lo * rhs.lo,
            self.lo * rhs.hi,
            self.hi * rhs.lo,
            self.hi * rhs.hi,
        ];
        Interval::outward(min4(p), max4(p))
    }
}

impl Neg for Interval {
    type Output = Interval;

    fn neg(self) -> Interval {
        Interval::raw(-self.hi, -self.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn construction() {
        assert_eq!(iv(2.0, 3.0).lo(), 2.0);
        assert_eq!(iv(2.0, 3.0).hi(), 3.0);
        assert!(iv(0.0, 0.0).is_point());
        assert!(matches!(
            Interval::new(3.0, 2.0),
            Err(Error::MalformedInterval { .. })
        ));
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        assert!(Interval::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn measures() {
        let m = iv(2.0, 3.0).measures();
        assert_eq!((m.mid, m.rad, m.mig, m.mag), (2.5, 0.5, 2.0, 3.0));
        let m = iv(-1.0, 1.0).measures();
        assert_eq!((m.mid, m.rad, m.mig, m.mag), (0.0, 1.0, 0.0, 1.0));
        let m = iv(-4.0, -2.0).measures();
        assert_eq!((m.mid, m.rad, m.mig, m.mag), (-3.0, 1.0, 2.0, 4.0));
    }

    #[test]
    fn arithmetic_examples() {
        let s = iv(1.0, 2.0) + iv(3.0, 4.0);
        assert!(close(s.lo(), 4.0) && close(s.hi(), 6.0));
        let p = iv(-1.0, 2.0) * iv(3.0, 4.0);
        assert!(close(p.lo(), -4.0) && close(p.hi(), 8.0));
        assert_eq!(
            iv(1.0, 2.0).checked_div(iv(-1.0, 1.0)),
            Err(Error::DivisionByZeroInterval)
        );
        let q = iv(1.0, 2.0).checked_div(iv(2.0, 4.0)).unwrap();
        assert!(close(q.lo(), 0.25) && close(q.hi(), 1.0));
        let k = iv(1.0, 2.0).scale(-3.0);
        assert!(close(k.lo(), -6.0) && close(k.hi(), -3.0));
    }

    #[test]
    fn serde_rejects_reversed_bounds() {
        assert!(serde_json::from_str::<Interval>("[3, 2]").is_err());
        let v: Interval = serde_json::from_str("[2, 3]").unwrap();
        assert_eq!(v, iv(2.0, 3.0));
    }

    fn interval() -> impl Strategy<Value = Interval> {
        (-100.0f64..100.0, 0.0f64..50.0).prop_map(|(lo, w)| iv(lo, lo + w))
    }

    fn sample(a: Interval, t: f64) -> f64 {
        (a.lo() + t * (a.hi() - a.lo())).clamp(a.lo(), a.hi())
    }

    proptest! {
        #[test]
        fn inclusion(a in interval(), b in interval(), ts in prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 1000)) {
            let sum = a + b;
            let diff = a - b;
            let prod = a * b;
            let quot = if b.contains(0.0) { None } else { Some(a.checked_div(b).unwrap()) };
            let scaled = a.scale(b.mid());
            for (s, t) in ts {
                let (x, y) = (sample(a, s), sample(b, t));
                prop_assert!(sum.contains(x + y));
                prop_assert!(diff.contains(x - y));
                prop_assert!(prod.contains(x * y));
                prop_assert!(scaled.contains(x * b.mid()));
                if let Some(q) = quot {
                    prop_assert!(q.contains(x / y));
                }
            }
        }

        #[test]
        fn mid_rad_round_trip(a in interval()) {
            let back = iv(a.mid() - a.rad(), a.mid() + a.rad());
            prop_assert!(close(back.lo(), a.lo()));
            prop_assert!(close(back.hi(), a.hi()));
        }

        #[test]
        fn mig_zero_iff_contains_zero(a in interval()) {
            prop_assert_eq!(a.mig() == 0.0, a.lo() <= 0.0 && 0.0 <= a.hi());
        }
    }
}
