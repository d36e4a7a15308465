//! Exact rational arithmetic on `i128` with overflow-checked operations.
//!
//! The permutation-enumeration oracles count integer events over factorial
//! denominators; those fit comfortably in `i128` for the block sizes we
//! enumerate (up to 12!), and products across independent blocks either fit
//! or the caller falls back to the `f64` value.

use std::fmt;

/// A reduced rational number with positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    num: i128,
    den: i128,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Ratio {
    /// Builds `num/den` in lowest terms. Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Ratio {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn from_int(n: i128) -> Self {
        Ratio { num: n, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn checked_add(&self, other: &Ratio) -> Option<Ratio> {
        // a/b + c/d = (a*(d/g) + c*(b/g)) / (b*(d/g)) with g = gcd(b, d)
        let g = gcd(self.den, other.den).max(1);
        let db = other.den / g;
        let num = self
            .num
            .checked_mul(db)?
            .checked_add(other.num.checked_mul(self.den / g)?)?;
        let den = self.den.checked_mul(db)?;
        Some(Ratio::new(num, den))
    }

    pub fn checked_sub(&self, other: &Ratio) -> Option<Ratio> {
        self.checked_add(&Ratio {
            num: other.num.checked_neg()?,
            den: other.den,
        })
    }

    pub fn checked_mul(&self, other: &Ratio) -> Option<Ratio> {
        // Cross-reduce first to keep intermediates small.
        let g1 = gcd(self.num, other.den).max(1);
        let g2 = gcd(other.num, self.den).max(1);
        let num = (self.num / g1).checked_mul(other.num / g2)?;
        let den = (self.den / g2).checked_mul(other.den / g1)?;
        Some(Ratio::new(num, den))
    }

    pub fn checked_pow(&self, mut exp: u32) -> Option<Ratio> {
        let mut base = *self;
        let mut acc = Ratio::from_int(1);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Some(acc)
    }

    /// Scales by an integer, checked.
    pub fn checked_mul_int(&self, n: i128) -> Option<Ratio> {
        self.checked_mul(&Ratio::from_int(n))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}
