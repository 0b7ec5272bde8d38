//! Bracket-generating flag and pointwise Hormander verification.

use crate::algebra::{QMatrix, Rat};
use crate::symplectic::{lie_bracket, Frame, VectorField};

/// A bracket word over generator indices, e.g. [[1,3],1].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BracketWord {
    Leaf(usize),
    Node(Box<BracketWord>, Box<BracketWord>),
}

impl BracketWord {
    pub fn len(&self) -> usize {
        match self {
            BracketWord::Leaf(_) => 1,
            BracketWord::Node(a, b) => a.len() + b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Generator indices in reading order, 1-based, e.g. "131".
    pub fn label(&self) -> String {
        match self {
            BracketWord::Leaf(i) => (i + 1).to_string(),
            BracketWord::Node(a, b) => format!("{}{}", a.label(), b.label()),
        }
    }
}

/// Flag of evaluated bracket spans at a base point.
#[derive(Clone, Debug)]
pub struct FlagReport {
    pub point: Vec<Rat>,
    /// dims[s-1] = dimension of the span of all brackets of length <= s.
    pub dims: Vec<usize>,
    /// First length achieving the full dimension, if reached within the cap.
    pub step: Option<usize>,
}

/// A bracket word together with its expanded vector field.
#[derive(Clone, Debug)]
pub struct BracketEntry {
    pub word: BracketWord,
    pub field: VectorField,
}

/// All nonzero bracket words up to the given length: the generators, then
/// every previous-level word bracketed with each generator. Identically
/// zero brackets are dropped and not expanded further.
pub fn bracket_words(frame: &Frame, cap: usize) -> Vec<Vec<BracketEntry>> {
    let gens: Vec<BracketEntry> = frame
        .fields()
        .iter()
        .enumerate()
        .map(|(i, f)| BracketEntry {
            word: BracketWord::Leaf(i),
            field: f.clone(),
        })
        .collect();
    let mut levels = vec![gens];
    for _ in 1..cap {
        let prev = levels.last().unwrap();
        let mut next = Vec::new();
        for entry in prev {
            for (j, g) in frame.fields().iter().enumerate() {
                let f = lie_bracket(&entry.field, g).expect("same chart");
                if f.is_zero() {
                    continue;
                }
                next.push(BracketEntry {
                    word: BracketWord::Node(
                        Box::new(entry.word.clone()),
                        Box::new(BracketWord::Leaf(j)),
                    ),
                    field: f,
                });
            }
        }
        let empty = next.is_empty();
        levels.push(next);
        if empty {
            break;
        }
    }
    levels
}

/// Evaluate the bracket flag at a base point up to the cap.
pub fn bracket_flag(frame: &Frame, x: &[Rat], cap: usize) -> FlagReport {
    assert!(cap >= 1);
    let n = frame.base_dim();
    let mut dims = Vec::new();
    let mut step = None;
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    let levels = bracket_words(frame, cap);
    for (idx, level) in levels.iter().enumerate() {
        for entry in level {
            rows.push(entry.field.eval(x));
        }
        let dim = QMatrix::from_rows(rows.clone()).rank();
        dims.push(dim);
        if dim == n {
            step = Some(idx + 1);
            break;
        }
    }
    FlagReport {
        point: x.to_vec(),
        dims,
        step,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, MultiPoly};
    use crate::symplectic::VectorField;

    fn field(n: usize, comps: Vec<MultiPoly>) -> VectorField {
        assert_eq!(comps.len(), n);
        VectorField::new(comps)
    }

    #[test]
    fn heisenberg_flag() {
        let n = 3;
        let zero = || MultiPoly::zero(n);
        let one = || MultiPoly::one(n);
        let f = Frame::new(vec![
            field(n, vec![one(), zero(), zero()]),
            field(n, vec![zero(), one(), MultiPoly::var(n, 0)]),
        ])
        .unwrap();
        let r = bracket_flag(&f, &vec![rat(0); 3], 10);
        assert_eq!(r.dims, vec![2, 3]);
        assert_eq!(r.step, Some(2));
    }

    #[test]
    fn martinet_flag_off_the_surface() {
        let n = 3;
        let zero = || MultiPoly::zero(n);
        let one = || MultiPoly::one(n);
        let f = Frame::new(vec![
            field(n, vec![one(), zero(), zero()]),
            field(n, vec![zero(), one(), MultiPoly::var(n, 0).pow(2)]),
        ])
        .unwrap();
        // at x1 = 1, [X1, X2] = -2 x1 d3 is nonzero: step 2
        let r = bracket_flag(&f, &[rat(1), rat(0), rat(0)], 10);
        assert_eq!(r.dims, vec![2, 3]);
        assert_eq!(r.step, Some(2));
        // at x1 = 0 the length-2 bracket vanishes, step 3
        let r0 = bracket_flag(&f, &vec![rat(0); 3], 10);
        assert_eq!(r0.dims, vec![2, 2, 3]);
        assert_eq!(r0.step, Some(3));
    }

    #[test]
    fn word_labels() {
        let w = BracketWord::Node(
            Box::new(BracketWord::Node(
                Box::new(BracketWord::Leaf(0)),
                Box::new(BracketWord::Leaf(2)),
            )),
            Box::new(BracketWord::Leaf(0)),
        );
        assert_eq!(w.label(), "131");
        assert_eq!(w.len(), 3);
    }
}
