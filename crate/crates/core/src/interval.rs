//! Closed, finite intervals with outward rounding.
//!
//! Rational operations (`add`, `sub`, `mul`, `div`, `inv`, `scale`, `shift`)
//! are rounded to the adjacent representable value only when the
//! round-to-nearest result is inexact; exactness is detected with error-free
//! transformations (two-sum and fused multiply-add residuals), so results
//! like `[1,2] + [3,4] = [4,6]` stay exact. Transcendental endpoints are
//! evaluated with the platform libm and widened by [`TRANSCENDENTAL_ULPS`].

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use crate::error::{Error, Result};

/// Number of ulps each transcendental endpoint is widened by.
pub const TRANSCENDENTAL_ULPS: u32 = 4;

/// Directed-rounding scalar kernels.
pub(crate) mod round {
    use crate::error::{Error, Result};

    // Below this magnitude fma residuals may underflow, so exactness is not trusted.
    const TINY: f64 = f64::MIN_POSITIVE * 9007199254740992.0;

    fn finite(x: f64, op: &'static str) -> Result<f64> {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Overflow { op })
        }
    }

    /// Returns `(s, e)` with `s = fl(a + b)` and `a + b = s + e` exactly.
    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        let e = (a - (s - bb)) + (b - bb);
        (s, e)
    }

    pub fn add_down(a: f64, b: f64) -> Result<f64> {
        let (s, e) = two_sum(a, b);
        let s = finite(s, "add")?;
        Ok(if e < 0.0 { s.next_down() } else { s })
    }

    pub fn add_up(a: f64, b: f64) -> Result<f64> {
        let (s, e) = two_sum(a, b);
        let s = finite(s, "add")?;
        Ok(if e > 0.0 { s.next_up() } else { s })
    }

    pub fn sub_down(a: f64, b: f64) -> Result<f64> {
        add_down(a, -b)
    }

    pub fn sub_up(a: f64, b: f64) -> Result<f64> {
        add_up(a, -b)
    }

    pub fn mul_down(a: f64, b: f64) -> Result<f64> {
        let p = finite(a * b, "mul")?;
        if a == 0.0 || b == 0.0 {
            return Ok(p);
        }
        if p.abs() < TINY {
            return Ok(p.next_down());
        }
        let e = a.mul_add(b, -p);
        Ok(if e < 0.0 { p.next_down() } else { p })
    }

    pub fn mul_up(a: f64, b: f64) -> Result<f64> {
        let p = finite(a * b, "mul")?;
        if a == 0.0 || b == 0.0 {
            return Ok(p);
        }
        if p.abs() < TINY {
            return Ok(p.next_up());
        }
        let e = a.mul_add(b, -p);
        Ok(if e > 0.0 { p.next_up() } else { p })
    }

    /// Sign of `a/b - fl(a/b)`, or `None` when it cannot be trusted.
    fn div_residual_sign(a: f64, b: f64, q: f64) -> Option<f64> {
        if q.abs() < TINY || a.abs() < TINY {
            return None;
        }
        let r = (-q).mul_add(b, a);
        Some(if r == 0.0 {
            0.0
        } else {
            r.signum() * b.signum()
        })
    }

    pub fn div_down(a: f64, b: f64) -> Result<f64> {
        let q = finite(a / b, "div")?;
        if a == 0.0 {
            return Ok(q);
        }
        Ok(match div_residual_sign(a, b, q) {
            Some(s) if s >= 0.0 => q,
            _ => q.next_down(),
        })
    }

    pub fn div_up(a: f64, b: f64) -> Result<f64> {
        let q = finite(a / b, "div")?;
        if a == 0.0 {
            return Ok(q);
        }
        Ok(match div_residual_sign(a, b, q) {
            Some(s) if s <= 0.0 => q,
            _ => q.next_up(),
        })
    }

    pub fn widen_down(mut x: f64, ulps: u32) -> f64 {
        for _ in 0..ulps {
            x = x.next_down();
        }
        x
    }

    pub fn widen_up(mut x: f64, ulps: u32) -> f64 {
        for _ in 0..ulps {
            x = x.next_up();
        }
        x
    }

    /// `x^k` rounded down for `x >= 0`.
    pub fn powi_down(x: f64, k: u32) -> Result<f64> {
        let mut acc = 1.0;
        for _ in 0..k {
            acc = mul_down(acc, x)?;
        }
        Ok(acc.max(0.0))
    }

    /// `x^k` rounded up for `x >= 0`.
    pub fn powi_up(x: f64, k: u32) -> Result<f64> {
        let mut acc = 1.0;
        for _ in 0..k {
            acc = mul_up(acc, x)?;
        }
        Ok(acc)
    }
}

use round::*;

/// A closed interval `[lo, hi]` with finite endpoints.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

fn transcendental_lo(x: f64) -> f64 {
    widen_down(x, TRANSCENDENTAL_ULPS)
}

fn transcendental_hi(x: f64) -> f64 {
    widen_up(x, TRANSCENDENTAL_ULPS)
}

/// Enclosure of `sin(x)` for a single point, exact at `x = 0`.
fn sin_point(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 0.0);
    }
    let s = x.sin();
    (
        transcendental_lo(s).max(-1.0),
        transcendental_hi(s).min(1.0),
    )
}

fn cos_point(x: f64) -> (f64, f64) {
    if x == 0.0 {
        return (1.0, 1.0);
    }
    let c = x.cos();
    (
        transcendental_lo(c).max(-1.0),
        transcendental_hi(c).min(1.0),
    )
}

/// Whether some `offset + 2πk` may lie in `[lo, hi]`. Errs towards `true`.
fn may_contain_periodic(lo: f64, hi: f64, offset: f64) -> bool {
    let slack = 1e-14 * lo.abs().max(hi.abs()).max(1.0);
    let k0 = ((lo - offset) / TAU).ceil();
    [k0 - 1.0, k0, k0 + 1.0].iter().any(|&k| {
        let c = offset + TAU * k;
        c >= lo - slack && c <= hi + slack
    })
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };
    pub const UNIT: Interval = Interval { lo: -1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Interval { lo, hi })
        } else {
            Err(Error::InvalidInterval { lo, hi })
        }
    }

    /// Degenerate interval `[x, x]`. Panics on non-finite input.
    pub fn point(x: f64) -> Self {
        assert!(
            x.is_finite(),
            "Interval::point requires a finite value, got {x}"
        );
        Interval { lo: x, hi: x }
    }

    /// Symmetric interval `[-r, r]` for `r >= 0`.
    pub fn symmetric(r: f64) -> Result<Self> {
        Interval::new(-r, r)
    }

    pub(crate) fn from_bounds(lo: f64, hi: f64) -> Self {
        debug_assert!(lo.is_finite() && hi.is_finite() && lo <= hi, "[{lo}, {hi}]");
        Interval { lo, hi }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    /// Width `hi - lo`, rounded up.
    pub fn diam(&self) -> f64 {
        sub_up(self.hi, self.lo).unwrap_or(f64::MAX)
    }

    /// Rounded midpoint, guaranteed to lie in `[lo, hi]`.
    pub fn mid(&self) -> f64 {
        let m = if self.lo.abs() > 1e300 || self.hi.abs() > 1e300 {
            0.5 * self.lo + 0.5 * self.hi
        } else {
            0.5 * (self.lo + self.hi)
        };
        m.clamp(self.lo, self.hi)
    }

    /// Largest absolute value in the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Smallest absolute value in the interval.
    pub fn mig(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn add(&self, other: &Interval) -> Result<Interval> {
        Ok(Interval {
            lo: add_down(self.lo, other.lo)?,
            hi: add_up(self.hi, other.hi)?,
        })
    }

    pub fn sub(&self, other: &Interval) -> Result<Interval> {
        Ok(Interval {
            lo: sub_down(self.lo, other.hi)?,
            hi: sub_up(self.hi, other.lo)?,
        })
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    /// `c + self`.
    pub fn shift(&self, c: f64) -> Result<Interval> {
        Ok(Interval {
            lo: add_down(self.lo, c)?,
            hi: add_up(self.hi, c)?,
        })
    }

    /// `c * self`; endpoints swap for negative `c`.
    pub fn scale(&self, c: f64) -> Result<Interval> {
        if c >= 0.0 {
            Ok(Interval {
                lo: mul_down(self.lo, c)?,
                hi: mul_up(self.hi, c)?,
            })
        } else {
            Ok(Interval {
                lo: mul_down(self.hi, c)?,
                hi: mul_up(self.lo, c)?,
            })
        }
    }

    pub fn mul(&self, other: &Interval) -> Result<Interval> {
        let (a, b, c, d) = (self.lo, self.hi, other.lo, other.hi);
        let lo = mul_down(a, c)?
            .min(mul_down(a, d)?)
            .min(mul_down(b, c)?)
            .min(mul_down(b, d)?);
        let hi = mul_up(a, c)?
            .max(mul_up(a, d)?)
            .max(mul_up(b, c)?)
            .max(mul_up(b, d)?);
        Ok(Interval { lo, hi })
    }

    /// `1 / self`; fails with `ZeroInDomain` when `0 ∈ self`.
    pub fn inv(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::ZeroInDomain {
                lo: self.lo,
                hi: self.hi,
            });
        }
        Ok(Interval {
            lo: div_down(1.0, self.hi)?,
            hi: div_up(1.0, self.lo)?,
        })
    }

    pub fn div(&self, other: &Interval) -> Result<Interval> {
        if other.contains_zero() {
            return Err(Error::ZeroInDomain {
                lo: other.lo,
                hi: other.hi,
            });
        }
        let (a, b, c, d) = (self.lo, self.hi, other.lo, other.hi);
        let lo = div_down(a, c)?
            .min(div_down(a, d)?)
            .min(div_down(b, c)?)
            .min(div_down(b, d)?);
        let hi = div_up(a, c)?
            .max(div_up(a, d)?)
            .max(div_up(b, c)?)
            .max(div_up(b, d)?);
        Ok(Interval { lo, hi })
    }

    pub fn sqr(&self) -> Result<Interval> {
        self.powi(2)
    }

    /// `self^k` for `k >= 1` (tight monotone-piece rule).
    pub fn powi(&self, k: u32) -> Result<Interval> {
        match k {
            0 => Ok(Interval::ONE),
            1 => Ok(*self),
            _ if k.is_multiple_of(2) => {
                if self.lo >= 0.0 {
                    Ok(Interval {
                        lo: powi_down(self.lo, k)?,
                        hi: powi_up(self.hi, k)?,
                    })
                } else if self.hi <= 0.0 {
                    Ok(Interval {
                        lo: powi_down(-self.hi, k)?,
                        hi: powi_up(-self.lo, k)?,
                    })
                } else {
                    Ok(Interval {
                        lo: 0.0,
                        hi: powi_up(self.mag(), k)?,
                    })
                }
            }
            _ => {
                let odd_down = |x: f64| -> Result<f64> {
                    if x >= 0.0 {
                        powi_down(x, k)
                    } else {
                        Ok(-powi_up(-x, k)?)
                    }
                };
                let odd_up = |x: f64| -> Result<f64> {
                    if x >= 0.0 {
                        powi_up(x, k)
                    } else {
                        Ok(-powi_down(-x, k)?)
                    }
                };
                Ok(Interval {
                    lo: odd_down(self.lo)?,
                    hi: odd_up(self.hi)?,
                })
            }
        }
    }

    pub fn exp(&self) -> Result<Interval> {
        let point = |x: f64| -> Result<(f64, f64)> {
            if x == 0.0 {
                return Ok((1.0, 1.0));
            }
            let e = x.exp();
            if !e.is_finite() {
                return Err(Error::Overflow { op: "exp" });
            }
            Ok((transcendental_lo(e).max(0.0), transcendental_hi(e)))
        };
        let (lo, _) = point(self.lo)?;
        let (_, hi) = point(self.hi)?;
        Interval::new(lo, hi).map_err(|_| Error::Overflow { op: "exp" })
    }

    pub fn log(&self) -> Result<Interval> {
        if self.lo <= 0.0 {
            return Err(Error::domain(
                "log",
                format!("lower endpoint {} is not positive", self.lo),
            ));
        }
        let point = |x: f64| -> (f64, f64) {
            if x == 1.0 {
                (0.0, 0.0)
            } else {
                let l = x.ln();
                (transcendental_lo(l), transcendental_hi(l))
            }
        };
        Ok(Interval {
            lo: point(self.lo).0,
            hi: point(self.hi).1,
        })
    }

    pub fn sin(&self) -> Interval {
        if self.diam() >= TAU {
            return Interval::UNIT;
        }
        let (a_lo, a_hi) = sin_point(self.lo);
        let (b_lo, b_hi) = sin_point(self.hi);
        let mut lo = a_lo.min(b_lo);
        let mut hi = a_hi.max(b_hi);
        if may_contain_periodic(self.lo, self.hi, FRAC_PI_2) {
            hi = 1.0;
        }
        if may_contain_periodic(self.lo, self.hi, -FRAC_PI_2) {
            lo = -1.0;
        }
        Interval { lo, hi }
    }

    pub fn cos(&self) -> Interval {
        if self.diam() >= TAU {
            return Interval::UNIT;
        }
        let (a_lo, a_hi) = cos_point(self.lo);
        let (b_lo, b_hi) = cos_point(self.hi);
        let mut lo = a_lo.min(b_lo);
        let mut hi = a_hi.max(b_hi);
        if may_contain_periodic(self.lo, self.hi, 0.0) {
            hi = 1.0;
        }
        if may_contain_periodic(self.lo, self.hi, PI) {
            lo = -1.0;
        }
        Interval { lo, hi }
    }

    /// `tan` on a pole-free interval; any possible pole contact is an error.
    pub fn tan(&self) -> Result<Interval> {
        let fail = || Error::domain("tan", format!("{self} may contain a pole"));
        if self.diam() >= PI {
            return Err(fail());
        }
        let k = (self.mid() / PI).round();
        let slack = 1e-15 * (1.0 + 4.0 * k.abs());
        let center = PI * k;
        if self.lo - center <= -FRAC_PI_2 + slack || self.hi - center >= FRAC_PI_2 - slack {
            return Err(fail());
        }
        let point = |x: f64| -> (f64, f64) {
            if x == 0.0 {
                (0.0, 0.0)
            } else {
                let t = x.tan();
                (transcendental_lo(t), transcendental_hi(t))
            }
        };
        let lo = point(self.lo).0;
        let hi = point(self.hi).1;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(fail());
        }
        Ok(Interval { lo, hi })
    }

    /// `sqrt` via the libm square root, correctly rounded so 1 ulp suffices.
    pub fn sqrt(&self) -> Result<Interval> {
        if self.lo < 0.0 {
            return Err(Error::domain(
                "sqrt",
                format!("lower endpoint {} is negative", self.lo),
            ));
        }
        let lo = self.lo.sqrt();
        let hi = self.hi.sqrt();
        let lo = if lo * lo == self.lo {
            lo
        } else {
            lo.next_down().max(0.0)
        };
        let hi = if hi * hi == self.hi { hi } else { hi.next_up() };
        Ok(Interval { lo, hi })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn exact_endpoint_sums_stay_exact() {
        assert_eq!(iv(1.0, 2.0).add(&iv(3.0, 4.0)).unwrap(), iv(4.0, 6.0));
        let x = iv(-0.3, 7.25);
        assert_eq!(Interval::ZERO.add(&x).unwrap(), x);
    }

    #[test]
    fn inexact_sum_encloses_decimal() {
        let s = Interval::point(0.1).add(&Interval::point(0.2)).unwrap();
        // The exact sum of the two doubles is 0.30000000000000001665..., which lies
        // strictly between the neighbours 0.29999999999999998890 and 0.30000000000000004441.
        assert_eq!(s.lo(), 0.3);
        assert_eq!(s.hi(), 0.30000000000000004);
        assert_eq!(s.hi(), s.lo().next_up());
    }

    #[test]
    fn products() {
        assert_eq!(iv(-1.0, 2.0).mul(&iv(3.0, 4.0)).unwrap(), iv(-4.0, 8.0));
        assert_eq!(Interval::ZERO.mul(&iv(-5.0, 3.0)).unwrap(), Interval::ZERO);
        assert_eq!(iv(-2.0, -1.0).mul(&iv(-3.0, 1.0)).unwrap(), iv(-2.0, 6.0));
    }

    #[test]
    fn affine_maps() {
        assert_eq!(iv(1.0, 3.0).scale(-2.0).unwrap(), iv(-6.0, -2.0));
        assert_eq!(iv(0.0, 1.0).shift(5.0).unwrap(), iv(5.0, 6.0));
        assert_eq!(iv(1.0, 2.0).sub(&iv(1.0, 2.0)).unwrap(), iv(-1.0, 1.0));
        let x = iv(-0.7, 1.3);
        assert_eq!(x.scale(-1.0).unwrap(), x.neg());
    }

    #[test]
    fn inversion() {
        assert_eq!(iv(1.0, 2.0).inv().unwrap(), iv(0.5, 1.0));
        assert_eq!(iv(-4.0, -2.0).inv().unwrap(), iv(-0.5, -0.25));
        assert!(matches!(
            iv(-1.0, 1.0).inv(),
            Err(Error::ZeroInDomain { .. })
        ));
        let third = iv(3.0, 3.0).inv().unwrap();
        assert!(third.lo() < third.hi() && third.contains(1.0 / 3.0));
    }

    #[test]
    fn elementary_functions() {
        assert_eq!(iv(-1.0, 2.0).sqr().unwrap(), iv(0.0, 4.0));
        let s = iv(0.0, PI).sin();
        assert_eq!(s, iv(0.0, 1.0));
        let e = iv(0.0, 1.0).exp().unwrap();
        assert_eq!(e.lo(), 1.0);
        assert!(e.hi() >= std::f64::consts::E && e.hi() - std::f64::consts::E < 1e-14);
        assert!(iv(-1.0, 1.0).log().is_err());
        assert!(iv(1.0, 2.0).tan().is_err());
        assert!(iv(-1.5, 1.5).tan().is_ok());
        assert!(iv(1.0, 2.0 + PI).tan().is_err());
        assert_eq!(iv(0.0, 7.0).cos(), Interval::UNIT);
    }

    #[test]
    fn plumbing() {
        assert_eq!(iv(1.0, 4.0).diam(), 3.0);
        assert!(!iv(0.0, 1.0).contains(1.5));
        assert_eq!(iv(0.0, 1.0).hull(&iv(2.0, 3.0)), iv(0.0, 3.0));
        let m = iv(1.0, 1.0f64.next_up()).mid();
        assert!(iv(1.0, 1.0f64.next_up()).contains(m));
        assert!(Interval::new(2.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn overflow_is_an_error() {
        let big = iv(f64::MAX, f64::MAX);
        assert!(matches!(big.add(&big), Err(Error::Overflow { .. })));
        assert!(matches!(iv(0.0, 800.0).exp(), Err(Error::Overflow { .. })));
    }

    #[test]
    fn powers() {
        assert_eq!(iv(-2.0, 1.0).powi(3).unwrap(), iv(-8.0, 1.0));
        assert_eq!(iv(-2.0, 1.0).powi(4).unwrap(), iv(0.0, 16.0));
        assert_eq!(iv(-3.0, -2.0).powi(2).unwrap(), iv(4.0, 9.0));
    }

    fn arb_interval() -> impl Strategy<Value = (Interval, f64)> {
        (-20.0f64..20.0, 0.0f64..8.0, 0.0f64..=1.0).prop_map(|(lo, w, t)| {
            let x = iv(lo, lo + w);
            (x, (lo + t * w).clamp(x.lo(), x.hi()))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn unary_soundness((x, p) in arb_interval()) {
            prop_assert!(x.sin().contains(p.sin()));
            prop_assert!(x.cos().contains(p.cos()));
            prop_assert!(x.sqr().unwrap().contains(p * p));
            prop_assert!(x.sqr().unwrap().lo() >= 0.0);
            prop_assert!(x.sin().is_subset_of(&Interval::UNIT));
            if let Ok(e) = x.exp() { prop_assert!(e.contains(p.exp())); }
            if let Ok(l) = x.log() { prop_assert!(l.contains(p.ln())); }
            if let Ok(i) = x.inv() { prop_assert!(i.contains(1.0 / p)); }
            if let Ok(t) = x.tan() { prop_assert!(t.contains(p.tan())); }
            prop_assert!(x.neg().contains(-p));
        }

        #[test]
        fn binary_soundness((x, p) in arb_interval(), (y, q) in arb_interval()) {
            prop_assert!(x.add(&y).unwrap().contains(p + q));
            prop_assert!(x.sub(&y).unwrap().contains(p - q));
            prop_assert!(x.mul(&y).unwrap().contains(p * q));
            if let Ok(d) = x.div(&y) { prop_assert!(d.contains(p / q)); }
        }

        #[test]
        fn inclusion_monotone((x, _) in arb_interval(), (y, _) in arb_interval(), grow in 0.0f64..2.0) {
            let xw = iv(x.lo() - grow, x.hi() + grow);
            let yw = iv(y.lo() - grow, y.hi() + grow);
            prop_assert!(x.mul(&y).unwrap().is_subset_of(&xw.mul(&yw).unwrap()));
            prop_assert!(x.add(&y).unwrap().is_subset_of(&xw.add(&yw).unwrap()));
            prop_assert!(x.sin().is_subset_of(&xw.sin()));
            prop_assert!(x.cos().is_subset_of(&xw.cos()));
            prop_assert!(x.sqr().unwrap().is_subset_of(&xw.sqr().unwrap()));
        }
    }
}
