//! Exact multivariate polynomials over Q with graded lexicographic term order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, Zero};

use super::AlgebraError;

/// Arbitrary-precision rational. Always reduced, positive denominator.
pub type Rat = BigRational;

/// Exponent vector ordered by total degree first, then lexicographically.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
struct Monomial(Vec<u32>);

impl Monomial {
    fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A multivariate polynomial over Q. Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MultiPoly {
    num_vars: usize,
    terms: BTreeMap<Monomial, Rat>,
}

impl MultiPoly {
    pub fn zero(num_vars: usize) -> Self {
        MultiPoly {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: Rat) -> Self {
        let mut p = Self::zero(num_vars);
        if !c.is_zero() {
            p.terms.insert(Monomial(vec![0; num_vars]), c);
        }
        p
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, Rat::one())
    }

    /// The variable with the given index, as a polynomial.
    pub fn var(num_vars: usize, index: usize) -> Self {
        assert!(index < num_vars, "variable index out of range");
        let mut exps = vec![0; num_vars];
        exps[index] = 1;
        let mut p = Self::zero(num_vars);
        p.terms.insert(Monomial(exps), Rat::one());
        p
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.degree() == 0)
    }

    /// Value of the polynomial if it is constant.
    pub fn constant_value(&self) -> Option<Rat> {
        if self.is_zero() {
            Some(Rat::zero())
        } else if self.is_constant() {
            self.terms.values().next().cloned()
        } else {
            None
        }
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    /// Leading coefficient in graded lexicographic order.
    pub fn leading_coeff(&self) -> Option<&Rat> {
        self.terms.values().next_back()
    }

    fn insert_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Build from raw (exponents, coefficient) pairs.
    pub fn from_terms(num_vars: usize, terms: Vec<(Vec<u32>, Rat)>) -> Self {
        let mut p = Self::zero(num_vars);
        for (exps, c) in terms {
            assert_eq!(exps.len(), num_vars);
            p.insert_term(Monomial(exps), c);
        }
        p
    }

    /// Iterate terms as (exponents, coefficient), ascending grlex.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rat)> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_vars);
        }
        MultiPoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.num_vars);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Exact partial derivative with respect to the given variable.
    pub fn diff(&self, var_index: usize) -> Result<Self, AlgebraError> {
        if var_index >= self.num_vars {
            return Err(AlgebraError::VarOutOfRange {
                index: var_index,
                num_vars: self.num_vars,
            });
        }
        let mut out = Self::zero(self.num_vars);
        for (m, c) in &self.terms {
            let e = m.0[var_index];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var_index] -= 1;
            out.insert_term(Monomial(exps), c * Rat::from_integer(BigInt::from(e)));
        }
        Ok(out)
    }

    /// Exact evaluation by substitution.
    pub fn eval(&self, point: &[Rat]) -> Result<Rat, AlgebraError> {
        if point.len() != self.num_vars {
            return Err(AlgebraError::PointLengthMismatch {
                got: point.len(),
                expected: self.num_vars,
            });
        }
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &point[i];
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating-point evaluation (used only by the trajectory integrator).
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rat_to_f64(c);
            for (i, &e) in m.0.iter().enumerate() {
                t *= point[i].powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    /// Substitute each variable by the given polynomial. All substituted
    /// polynomials must share one variable set; the result lives there.
    pub fn substitute(&self, subs: &[MultiPoly]) -> Self {
        assert_eq!(subs.len(), self.num_vars, "substitution arity mismatch");
        let new_nv = subs.first().map(|p| p.num_vars).unwrap_or(0);
        let mut acc = Self::zero(new_nv);
        // cache powers per variable as needed
        let mut powers: Vec<Vec<MultiPoly>> = subs
            .iter()
            .map(|p| vec![MultiPoly::one(new_nv), p.clone()])
            .collect();
        for (m, c) in &self.terms {
            let mut t = Self::constant(new_nv, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &subs[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e as usize];
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Reinterpret in a larger variable set, keeping variable indices.
    pub fn extend_vars(&self, new_num_vars: usize) -> Self {
        assert!(new_num_vars >= self.num_vars);
        MultiPoly {
            num_vars: new_num_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut exps = m.0.clone();
                    exps.resize(new_num_vars, 0);
                    (Monomial(exps), c.clone())
                })
                .collect(),
        }
    }

    /// Positive rational c such that self/c has coprime integer coefficients.
    pub fn content(&self) -> Rat {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num::integer::gcd(num_gcd, c.numer().abs());
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
        }
        if num_gcd.is_zero() {
            Rat::one()
        } else {
            Rat::new(num_gcd, den_lcm)
        }
    }

    /// Divide out the content and make the leading coefficient positive.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = self.content();
        if self.leading_coeff().unwrap().is_negative() {
            c = -c;
        }
        self.scale(&c.recip())
    }

    /// Exact division; returns None if `d` does not divide `self` exactly.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<Self> {
        assert_eq!(self.num_vars, d.num_vars);
        if d.is_zero() {
            return None;
        }
        let (dlead_m, dlead_c) = d.terms.iter().next_back().unwrap();
        let mut rem = self.clone();
        let mut quot = Self::zero(self.num_vars);
        while !rem.is_zero() {
            let (rlead_m, rlead_c) = rem.terms.iter().next_back().unwrap();
            let mut qexps = Vec::with_capacity(self.num_vars);
            for (re, de) in rlead_m.0.iter().zip(&dlead_m.0) {
                if re < de {
                    return None;
                }
                qexps.push(re - de);
            }
            let qc = rlead_c / dlead_c;
            let qm = Monomial(qexps);
            let mut mono = Self::zero(self.num_vars);
            mono.terms.insert(qm.clone(), qc.clone());
            rem = &rem - &(&mono * d);
            quot.insert_term(qm, qc);
        }
        Some(quot)
    }

    /// Render with explicit variable names, descending grlex, `*` products
    /// and `^` powers. The output is accepted back by the expression parser.
    pub fn render(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.num_vars);
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else if neg {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.degree() == 0 {
                factors.push(fmt_rat(&abs));
            }
            for (v, &e) in m.0.iter().enumerate() {
                if e == 1 {
                    factors.push(names[v].clone());
                } else if e > 1 {
                    factors.push(format!("{}^{}", names[v], e));
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let n = r.numer();
    let d = r.denom();
    // exact for desk-scale values; falls back to string parsing for huge ones
    match (n.to_string().parse::<f64>(), d.to_string().parse::<f64>()) {
        (Ok(nf), Ok(df)) => nf / df,
        _ => 0.0,
    }
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.num_vars, rhs.num_vars, "variable count mismatch");
        let mut out = MultiPoly::zero(self.num_vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let exps: Vec<u32> = ma.0.iter().zip(&mb.0).map(|(a, b)| a + b).collect();
                out.insert_term(Monomial(exps), ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.num_vars).map(|i| format!("x{i}")).collect();
        write!(f, "{}", self.render(&names))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, ratio};

    fn x(i: usize) -> MultiPoly {
        MultiPoly::var(3, i)
    }

    #[test]
    fn power_rule() {
        let p = x(0).pow(2);
        assert_eq!(p.diff(0).unwrap(), x(0).scale(&rat(2)));
        // independent variable
        assert!(p.diff(1).unwrap().is_zero());
    }

    #[test]
    fn cubic_derivative() {
        // d/dx1 (x1^3) = 3 x1^2, the coefficient behind -3x1^2 d6 in the R^7 frame
        let p = x(0).pow(3);
        assert_eq!(p.diff(0).unwrap(), x(0).pow(2).scale(&rat(3)));
    }

    #[test]
    fn diff_out_of_range() {
        assert!(matches!(
            x(0).diff(7),
            Err(AlgebraError::VarOutOfRange { .. })
        ));
    }

    #[test]
    fn eval_exact() {
        let five = MultiPoly::constant(3, rat(5));
        assert_eq!(five.eval(&[rat(9), rat(-3), ratio(1, 7)]).unwrap(), rat(5));

        // x1*(2*x2 + 3*x1*x3) at (1, 1, 0) -> 2
        let p = &x(0) * &(&x(1).scale(&rat(2)) + &(&x(0) * &x(2)).scale(&rat(3)));
        assert_eq!(p.eval(&[rat(1), rat(1), rat(0)]).unwrap(), rat(2));

        assert!(p.eval(&[rat(1)]).is_err());
    }

    #[test]
    fn div_exact_roundtrip() {
        let a = &(&x(0) + &x(1)).pow(2) * &x(2);
        let b = &x(0) + &x(1);
        let q = a.div_exact(&b).unwrap();
        assert_eq!(&q * &b, a);
        assert!(x(0).div_exact(&x(1)).is_none());
    }

    #[test]
    fn primitive_content() {
        let p = &x(0).scale(&ratio(-2, 3)) - &x(1).scale(&ratio(4, 3));
        let prim = p.primitive();
        // leading term (grlex: x1 over x2... x2 vs x1: lex order puts x1 first)
        assert_eq!(prim, &x(0) + &x(1).scale(&rat(2)));
    }

    #[test]
    fn render_parses_back_shape() {
        let p = &(&x(0).pow(2) - &x(1).scale(&ratio(1, 2))) + &MultiPoly::one(3);
        assert_eq!(p.to_string(), "x1^2 - 1/2*x2 + 1");
    }

    #[test]
    fn substitute_composes() {
        // p(x1,x2,x3) = x1*x2 + x3 with x1 -> u1^2, x2 -> u2, x3 -> u1
        let p = &(&x(0) * &x(1)) + &x(2);
        let u = |i| MultiPoly::var(2, i);
        let q = p.substitute(&[u(0).pow(2), u(1), u(0)]);
        let expect = &(&u(0).pow(2) * &u(1)) + &u(0);
        assert_eq!(q, expect);
    }
}
