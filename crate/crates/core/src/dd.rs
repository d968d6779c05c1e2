//! Double-double arithmetic: a number stored as an unevaluated sum of two
//! doubles, giving roughly 32 significant decimal digits. Built from the
//! classic error-free transformations (two-sum, two-product via FMA).

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Error-free sum: returns (fl(a+b), exact residual).
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Error-free sum assuming |a| >= |b| (or a == 0).
pub fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

/// Error-free product: returns (fl(a*b), exact residual).
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

/// hi + lo with |lo| <= ulp(hi)/2; the invariant is restored by a final
/// quick_two_sum in every operation.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        DoubleDouble { hi, lo }
    }

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// Square root: a float estimate refined by one Newton step carried out
    /// in double-double, which doubles the correct digits to full precision.
    /// Negative inputs produce NaN, matching `f64::sqrt`.
    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 && self.lo == 0.0 {
            return DoubleDouble::ZERO;
        }
        if self.hi < 0.0 {
            return DoubleDouble::from_f64(f64::NAN);
        }
        let estimate = DoubleDouble::from_f64(self.hi.sqrt());
        (estimate + self / estimate) * DoubleDouble::from_f64(0.5)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
}

impl Neg for DoubleDouble {
    type Output = DoubleDouble;
    fn neg(self) -> DoubleDouble {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = DoubleDouble;
    fn add(self, rhs: DoubleDouble) -> DoubleDouble {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let (t, f) = two_sum(self.lo, rhs.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = DoubleDouble;
    fn sub(self, rhs: DoubleDouble) -> DoubleDouble {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = DoubleDouble;
    fn mul(self, rhs: DoubleDouble) -> DoubleDouble {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = DoubleDouble;
    fn div(self, rhs: DoubleDouble) -> DoubleDouble {
        // long division: three float quotient digits with dd remainders
        let q1 = self.hi / rhs.hi;
        let mut rem = self - rhs.mul_f64(q1);
        let q2 = rem.hi / rhs.hi;
        rem = rem - rhs.mul_f64(q2);
        let q3 = rem.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        DoubleDouble { hi: s, lo: e } + DoubleDouble::from_f64(q3)
    }
}

impl DoubleDouble {
    fn mul_f64(self, rhs: f64) -> DoubleDouble {
        let (p, e) = two_prod(self.hi, rhs);
        let (hi, lo) = quick_two_sum(p, e + self.lo * rhs);
        DoubleDouble { hi, lo }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::Signed;
    use rand::{Rng, SeedableRng};

    fn rational(x: f64) -> BigRational {
        BigRational::from_float(x).expect("finite")
    }

    fn dd_rational(x: DoubleDouble) -> BigRational {
        rational(x.hi) + rational(x.lo)
    }

    #[test]
    fn small_offset_survives_subtraction() {
        let tiny = 2.0_f64.powi(-60);
        let x = DoubleDouble::ONE + DoubleDouble::from_f64(tiny);
        let back = x - DoubleDouble::ONE;
        assert_eq!(back.to_f64(), tiny);
        assert_eq!(back.lo, 0.0);
    }

    #[test]
    fn sqrt_round_trips() {
        let two = DoubleDouble::from_f64(2.0);
        let s = two.sqrt();
        let err = (s.sqr() - two).abs().to_f64();
        assert!(err <= 2.0_f64.powi(-100) * 2.0, "sqrt error {err}");
    }

    #[test]
    fn sqrt_of_negative_is_nan() {
        assert!(DoubleDouble::from_f64(-1.0).sqrt().to_f64().is_nan());
    }

    #[test]
    fn repeated_tenth_sums_to_exact_thousand() {
        // 1/10 rounded once to double-double, then summed 10^4 times,
        // compared against the exact rational 10^4/10.
        let tenth = DoubleDouble::ONE / DoubleDouble::from_f64(10.0);
        let mut sum = DoubleDouble::ZERO;
        for _ in 0..10_000 {
            sum = sum + tenth;
        }
        let exact = BigRational::new(BigInt::from(10_000), BigInt::from(10));
        let err = (dd_rational(sum) - &exact).abs() / exact;
        let bound = BigRational::new(BigInt::from(1), BigInt::from(2).pow(90));
        assert!(err < bound, "relative error {} too large", err);
    }

    #[test]
    fn two_sum_and_two_prod_are_error_free() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100_000 {
            let a = rng.random_range(-1e12..1e12);
            let b = rng.random_range(-1e-6..1e-6);
            let (s, e) = two_sum(a, b);
            assert_eq!(rational(s) + rational(e), rational(a) + rational(b));
            let (p, e) = two_prod(a, b);
            assert_eq!(rational(p) + rational(e), rational(a) * rational(b));
        }
    }

    #[test]
    fn arithmetic_stays_normalized_and_accurate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let bound = BigRational::new(BigInt::from(1), BigInt::from(2).pow(99));
        for _ in 0..2_000 {
            let a = DoubleDouble::from_f64(rng.random_range(0.1..100.0))
                / DoubleDouble::from_f64(rng.random_range(0.1..100.0));
            let b = DoubleDouble::from_f64(rng.random_range(0.1..100.0))
                / DoubleDouble::from_f64(rng.random_range(0.1..100.0));
            for (dd, exact) in [
                (a + b, dd_rational(a) + dd_rational(b)),
                (a - b, dd_rational(a) - dd_rational(b)),
                (a * b, dd_rational(a) * dd_rational(b)),
                (a / b, dd_rational(a) / dd_rational(b)),
            ] {
                assert!(dd.lo.abs() <= 0.5 * (dd.hi.abs() * f64::EPSILON).max(f64::MIN_POSITIVE));
                let err = (dd_rational(dd) - &exact).abs();
                let scale = exact.abs().max(BigRational::from_float(1e-30).unwrap());
                assert!(err / scale < bound);
            }
        }
    }
}
