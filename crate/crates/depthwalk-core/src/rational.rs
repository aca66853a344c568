//! Exact rational arithmetic over `i128`.
//!
//! Every quantity we feed through this type is provably small: ball sizes up
//! to `4·3^12`, walk path weights with denominator at most `4^n` for `n ≤ 32`,
//! and subgroup densities with denominator bounded by the table order. A
//! fixed-width rational keeps the core dependency-free; overflow panics
//! rather than silently degrading exactness.

use core::cmp::Ordering;
use core::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i128,
    den: i128, // always > 0, gcd(num, den) == 1
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    pub fn new(num: i128, den: i128) -> Rational {
        assert!(den != 0, "rational with zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = gcd(num, den).max(1);
        Rational {
            num: sign * (num / g),
            den: (den / g).abs(),
        }
    }

    pub fn integer(n: i128) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn checked(num: Option<i128>, den: Option<i128>) -> Rational {
        match (num, den) {
            (Some(n), Some(d)) => Rational::new(n, d),
            _ => panic!("rational overflow"),
        }
    }

    pub fn add(&self, other: &Rational) -> Rational {
        // Reduce by the denominator gcd first to keep intermediates small.
        let g = gcd(self.den, other.den);
        let (da, db) = (self.den / g, other.den / g);
        Rational::checked(
            self.num
                .checked_mul(db)
                .and_then(|x| other.num.checked_mul(da).and_then(|y| x.checked_add(y))),
            self.den.checked_mul(db),
        )
    }

    pub fn sub(&self, other: &Rational) -> Rational {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Rational {
        Rational {
            num: -self.num,
            den: self.den,
        }
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        let g1 = gcd(self.num, other.den).max(1);
        let g2 = gcd(other.num, self.den).max(1);
        Rational::checked(
            (self.num / g1).checked_mul(other.num / g2),
            (self.den / g2).checked_mul(other.den / g1),
        )
    }

    pub fn div(&self, other: &Rational) -> Rational {
        assert!(!other.is_zero(), "rational division by zero");
        self.mul(&Rational::new(other.den, other.num))
    }

    pub fn scale(&self, k: i128) -> Rational {
        self.mul(&Rational::integer(k))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Rational) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Rational) -> Ordering {
        // den > 0 on both sides, so cross-multiplication preserves order.
        let lhs = self.num.checked_mul(other.den).expect("rational overflow");
        let rhs = other.num.checked_mul(self.den).expect("rational overflow");
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}
