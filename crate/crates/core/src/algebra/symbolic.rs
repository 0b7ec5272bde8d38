//! Symbolic linear algebra over the rational function field.

use num::Signed;

use super::matrix::QMatrix;
use super::poly::{MultiPoly, Rat};
use super::ratfunc::RatFunc;

/// Dense matrix of polynomials sharing one variable set.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    num_vars: usize,
    entries: Vec<MultiPoly>,
}

impl PolyMatrix {
    pub fn from_rows(num_vars: usize, rows: Vec<Vec<MultiPoly>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|v| v.len()).unwrap_or(0);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            for p in &row {
                assert_eq!(p.num_vars(), num_vars, "entries share one variable set");
            }
            entries.extend(row);
        }
        PolyMatrix {
            rows: r,
            cols: c,
            num_vars,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn get(&self, r: usize, c: usize) -> &MultiPoly {
        &self.entries[r * self.cols + c]
    }

    /// Evaluate every entry at a rational point.
    pub fn eval(&self, point: &[Rat]) -> QMatrix {
        let mut m = QMatrix::zero(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.set(r, c, self.get(r, c).eval(point).expect("point arity"));
            }
        }
        m
    }

    /// All k x k minors (as polynomials), row/column index sets in order.
    pub fn minors(&self, k: usize) -> Vec<MultiPoly> {
        let mut out = Vec::new();
        if k == 0 || k > self.rows || k > self.cols {
            return out;
        }
        let row_sets = combinations(self.rows, k);
        let col_sets = combinations(self.cols, k);
        for rs in &row_sets {
            for cs in &col_sets {
                out.push(self.minor_det(rs, cs));
            }
        }
        out
    }

    fn minor_det(&self, rs: &[usize], cs: &[usize]) -> MultiPoly {
        // cofactor expansion; minors here are small (k <= 4 in practice)
        if rs.len() == 1 {
            return self.get(rs[0], cs[0]).clone();
        }
        let mut det = MultiPoly::zero(self.num_vars);
        let sub_rows = &rs[1..];
        for (j, &c) in cs.iter().enumerate() {
            let rest: Vec<usize> = cs.iter().copied().filter(|&cc| cc != c).collect();
            let sub = self.minor_det(sub_rows, &rest);
            let term = &(self.get(rs[0], c).clone()) * &sub;
            if j % 2 == 0 {
                det = &det + &term;
            } else {
                det = &det - &term;
            }
        }
        det
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Generators of the generic right kernel of a polynomial matrix, with
/// denominators cleared and each generator reduced to primitive content.
/// At every point where the matrix attains its generic rank, the evaluated
/// generators span the pointwise kernel. Empty if generically injective.
pub fn symbolic_kernel(m: &PolyMatrix) -> Vec<Vec<MultiPoly>> {
    let nv = m.num_vars;
    let rows = m.rows;
    let cols = m.cols;
    let mut a: Vec<Vec<RatFunc>> = (0..rows)
        .map(|r| {
            (0..cols)
                .map(|c| RatFunc::from_poly(m.get(r, c).clone()))
                .collect()
        })
        .collect();

    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut pr = 0;
    for pc in 0..cols {
        if pr == rows {
            break;
        }
        let Some(sel) = (pr..rows).find(|&r| !a[r][pc].is_zero()) else {
            continue;
        };
        a.swap(pr, sel);
        for r in pr + 1..rows {
            if a[r][pc].is_zero() {
                continue;
            }
            let f = &a[r][pc] / &a[pr][pc];
            let pivot_row = a[pr].clone();
            for (c, entry) in a[r].iter_mut().enumerate().skip(pc) {
                *entry = &*entry - &(&f * &pivot_row[c]);
            }
        }
        pivots.push((pr, pc));
        pr += 1;
    }

    let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut gens = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        // back-substitute over the function field
        let mut u = vec![RatFunc::zero(nv); cols];
        u[free] = RatFunc::one(nv);
        for &(row, col) in pivots.iter().rev() {
            let mut s = RatFunc::zero(nv);
            for c in col + 1..cols {
                if !u[c].is_zero() {
                    s = &s + &(&a[row][c] * &u[c]);
                }
            }
            u[col] = &(-&s) / &a[row][col];
        }
        gens.push(clear_denominators(&u));
    }
    gens
}

/// Multiply a function-field vector by a common denominator and reduce to
/// primitive content with a positive-leading-sign rule.
fn clear_denominators(v: &[RatFunc]) -> Vec<MultiPoly> {
    let nv = v.first().map(|f| f.num().num_vars()).unwrap_or(0);
    let mut common = MultiPoly::one(nv);
    for f in v {
        // extend the common denominator only by the factor still missing
        if common.div_exact(f.den()).is_none() {
            common = &common * f.den();
        }
    }
    let mut cleared: Vec<MultiPoly> = v
        .iter()
        .map(|f| {
            let cofactor = common.div_exact(f.den()).expect("common denominator");
            f.num() * &cofactor
        })
        .collect();
    // primitive content across the whole vector, sign by first nonzero entry
    let mut content: Option<Rat> = None;
    for p in &cleared {
        if p.is_zero() {
            continue;
        }
        let c = p.content();
        content = Some(match content {
            None => c,
            Some(prev) => Rat::new(
                num::integer::gcd(prev.numer() * c.denom(), c.numer() * prev.denom()),
                prev.denom() * c.denom(),
            ),
        });
    }
    if let Some(mut c) = content {
        if let Some(first) = cleared.iter().find(|p| !p.is_zero()) {
            if first.leading_coeff().unwrap().is_negative() {
                c = -c;
            }
        }
        let inv = c.recip();
        for p in cleared.iter_mut() {
            *p = p.scale(&inv);
        }
    }
    cleared
}
