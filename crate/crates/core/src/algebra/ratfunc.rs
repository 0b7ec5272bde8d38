//! Rational functions: quotients of multivariate polynomials.
//!
//! No polynomial gcd is attempted; only the rational content is removed and
//! the sign of the denominator's leading coefficient is fixed. This keeps the
//! representation canonical enough for pivoting while avoiding gcd storms.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num::Signed;

use super::poly::{MultiPoly, Rat};
use super::AlgebraError;

/// gcd of two positive rationals: gcd(a/b, c/d) = gcd(ad, cb) / bd.
fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    Rat::new(
        num::integer::gcd(a.numer() * b.denom(), b.numer() * a.denom()),
        a.denom() * b.denom(),
    )
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RatFunc {
    num: MultiPoly,
    den: MultiPoly,
}

impl RatFunc {
    pub fn new(num: MultiPoly, den: MultiPoly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    pub fn from_poly(p: MultiPoly) -> Self {
        let one = MultiPoly::one(p.num_vars());
        Self::normalized(p, one)
    }

    fn normalized(num: MultiPoly, den: MultiPoly) -> Self {
        assert_eq!(num.num_vars(), den.num_vars());
        if num.is_zero() {
            return RatFunc {
                den: MultiPoly::one(num.num_vars()),
                num,
            };
        }
        // cheap structural reduction: exact polynomial division in either
        // direction collapses quotients like x*y / x*y without a full gcd
        let (num, den) = if let Some(q) = num.div_exact(&den) {
            (q, MultiPoly::one(den.num_vars()))
        } else if let Some(q) = den.div_exact(&num) {
            (MultiPoly::one(num.num_vars()), q)
        } else {
            (num, den)
        };
        let g = rat_gcd(&num.content(), &den.content());
        let mut num = num.scale(&g.recip());
        let mut den = den.scale(&g.recip());
        if den.leading_coeff().unwrap().is_negative() {
            num = -&num;
            den = -&den;
        }
        RatFunc { num, den }
    }

    pub fn zero(num_vars: usize) -> Self {
        Self::from_poly(MultiPoly::zero(num_vars))
    }

    pub fn one(num_vars: usize) -> Self {
        Self::from_poly(MultiPoly::one(num_vars))
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn recip(&self) -> Result<Self, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        Ok(Self::normalized(self.den.clone(), self.num.clone()))
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::normalized(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::normalized(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &RatFunc {
    type Output = RatFunc;
    fn div(self, rhs: &RatFunc) -> RatFunc {
        assert!(!rhs.is_zero(), "division by zero rational function");
        RatFunc::normalized(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}
