//! Splitting a hyperbolic plane off an even lattice, and root complements in E8.

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{IntLattice, NamedLatticeExpr};
use crate::linalg::{kernel_basis, IntMatrix};

/// Limits for the isotropic-vector search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSearch {
    /// Coefficients range over [−bound, bound].
    pub bound: i64,
    /// Maximum number of coefficient vectors examined.
    pub max_candidates: u64,
}

impl Default for SplitSearch {
    fn default() -> Self {
        SplitSearch { bound: 5, max_candidates: 2_000_000 }
    }
}

/// L = U ⊕ L̃ in the basis `basis` = [e, f, complement...].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct USplit {
    pub e: Vec<BigInt>,
    pub f: Vec<BigInt>,
    pub basis: IntMatrix,
    pub complement: IntLattice,
    pub candidates_tried: u64,
}

/// Searches for a primitive isotropic e with e·L = Z and completes it to a U block.
///
/// Candidates are enumerated by increasing support size. Returns `None` when the
/// lattice is odd or definite, or when the budget runs out.
pub fn split_off_u(l: &IntLattice, opts: SplitSearch) -> Option<USplit> {
    split_off_u_among(l, &IntMatrix::identity(l.rank()), opts)
}

/// Like [`split_off_u`], with candidates drawn from small combinations of the
/// columns of `generators` (coordinates in the lattice basis).
pub fn split_off_u_among(l: &IntLattice, generators: &IntMatrix, opts: SplitSearch) -> Option<USplit> {
    let n = l.rank();
    let sig = l.signature();
    if n < 2 || !l.is_even() || sig.pos == 0 || sig.neg == 0 || generators.rows() != n {
        return None;
    }
    let to_i128 = |m: &IntMatrix| -> Option<Vec<Vec<i128>>> {
        m.to_rows().iter().map(|r| r.iter().map(|x| i128::try_from(x).ok()).collect()).collect()
    };
    let gens = to_i128(&generators.transpose())?;
    let gg = to_i128(&l.gram().congruent(generators))?;
    let images = to_i128(&generators.transpose().mul(l.gram()))?;
    let k = gens.len();
    let mut tried = 0u64;
    for size in 1..=k {
        for support in (0..k).combinations(size) {
            let mut coeffs = vec![1i64; size];
            coeffs[1..].iter_mut().for_each(|c| *c = -opts.bound);
            loop {
                tried += 1;
                if tried > opts.max_candidates {
                    return None;
                }
                if is_isotropic(&gg, &support, &coeffs) {
                    let combine = |rows: &[Vec<i128>]| -> Vec<i128> {
                        (0..n).map(|r| support.iter().zip(&coeffs).map(|(&i, &c)| rows[i][r] * c as i128).sum()).collect()
                    };
                    if let Some(split) = complete(l, &combine(&gens), &combine(&images)) {
                        return Some(USplit { candidates_tried: tried, ..split });
                    }
                }
                if !advance(&mut coeffs, opts.bound) {
                    break;
                }
            }
        }
    }
    None
}

/// Next tuple: first entry in 1..=b, others in ±1..=b.
fn advance(c: &mut [i64], b: i64) -> bool {
    for i in (0..c.len()).rev() {
        let lo = if i == 0 { 1 } else { -b };
        let mut next = c[i] + 1;
        if next == 0 {
            next = 1;
        }
        if next <= b {
            c[i] = next;
            return true;
        }
        c[i] = lo;
    }
    false
}

fn is_isotropic(gg: &[Vec<i128>], support: &[usize], coeffs: &[i64]) -> bool {
    let mut norm = 0i128;
    for (a, &i) in support.iter().enumerate() {
        for (b, &j) in support.iter().enumerate() {
            norm += coeffs[a] as i128 * coeffs[b] as i128 * gg[i][j];
        }
    }
    norm == 0
}

/// Completes isotropic e with w = G·e to a U block, provided gcd(w) = 1.
fn complete(l: &IntLattice, e: &[i128], w: &[i128]) -> Option<USplit> {
    if e.iter().all(|&x| x == 0) || w.iter().fold(0i128, |acc, x| acc.gcd(x)) != 1 {
        return None;
    }
    let n = e.len();
    let e: Vec<BigInt> = e.iter().map(|&x| BigInt::from(x)).collect();
    // f with w·f = 1 by iterated extended gcd.
    let mut f = vec![BigInt::zero(); n];
    let mut acc = BigInt::zero();
    for (k, wk) in w.iter().enumerate() {
        let ext = acc.extended_gcd(&BigInt::from(*wk));
        f.iter_mut().for_each(|x| *x *= &ext.x);
        f[k] += &ext.y;
        acc = ext.gcd;
    }
    if acc.is_negative() {
        f.iter_mut().for_each(|x| *x = -x.clone());
    }
    let half = l.pair(&f, &f) / 2;
    let f: Vec<BigInt> = f.iter().zip(&e).map(|(fi, ei)| fi - &half * ei).collect();
    let constraints = IntMatrix::from_fn(2, n, |r, c| {
        let v = if r == 0 { &e } else { &f };
        (0..n).map(|k| &v[k] * l.gram().get(k, c)).sum()
    });
    let k = kernel_basis(&constraints);
    let basis = IntMatrix::from_fn(n, n, |r, c| match c {
        0 => e[r].clone(),
        1 => f[r].clone(),
        _ => k.get(r, c - 2).clone(),
    });
    debug_assert!(basis.is_unimodular());
    let complement = l.sublattice(&k).ok()?;
    Some(USplit { e, f, basis, complement, candidates_tried: 0 })
}

/// Root sublattices whose orthogonal complement in E8 is computed by [`e8_complement`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum E8Root {
    A1,
    A2,
    A1xA1,
}

/// Orthogonal complement in E8 of a root sublattice spanned by simple roots.
pub fn e8_complement(root: E8Root) -> IntLattice {
    let e8: NamedLatticeExpr = "E8".parse().expect("E8 parses");
    let g = e8.gram();
    // Simple roots α1; α1, α3 (adjacent); α1, α2 (orthogonal), Bourbaki labels.
    let roots: &[usize] = match root {
        E8Root::A1 => &[0],
        E8Root::A2 => &[0, 2],
        E8Root::A1xA1 => &[0, 1],
    };
    let rows = IntMatrix::from_fn(roots.len(), 8, |r, c| g.get(roots[r], c).clone());
    let k = kernel_basis(&rows);
    IntLattice::new(g.congruent(&k)).expect("congruent Gram is symmetric")
}

impl USplit {
    pub fn is_valid_for(&self, l: &IntLattice) -> bool {
        let gram = l.gram().congruent(&self.basis);
        let n = l.rank();
        let u = IntMatrix::from_i64(&[&[0, 1], &[1, 0]]);
        self.basis.is_unimodular()
            && gram.submatrix(&[0, 1], &[0, 1]) == u
            && gram.submatrix(&[0, 1], &(2..n).collect::<Vec<_>>()).is_zero()
            && l.pair(&self.e, &self.f).is_one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::invariants_match;

    fn lat(s: &str) -> IntLattice {
        IntLattice::from_expr(&s.parse().unwrap())
    }

    fn expr(s: &str) -> NamedLatticeExpr {
        s.parse().unwrap()
    }

    #[test]
    fn splits_standard_lattices() {
        for (l, rest) in [("U+E8", "E8"), ("A1+U+E7", "A1+E7"), ("E8+U+E8", "E8^2"), ("U+U", "U")] {
            let l = lat(l);
            let s = split_off_u(&l, SplitSearch::default()).expect("splits");
            assert!(s.is_valid_for(&l));
            assert!(invariants_match(&s.complement, &expr(rest)).unwrap(), "{rest}");
        }
    }

    #[test]
    fn hidden_hyperbolic_plane() {
        // U+A1 in a skewed basis, where no coordinate vector is isotropic.
        let p = IntMatrix::from_i64(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let l = lat("U+A1").sublattice(&p).unwrap();
        let s = split_off_u(&l, SplitSearch::default()).unwrap();
        assert!(s.is_valid_for(&l));
        assert!(invariants_match(&s.complement, &expr("A1")).unwrap());
    }

    #[test]
    fn no_split_for_definite_or_odd() {
        assert!(split_off_u(&lat("E8"), SplitSearch::default()).is_none());
        assert!(split_off_u(&lat("<2>"), SplitSearch::default()).is_none());
        assert!(split_off_u(&lat("<1>+<-1>"), SplitSearch::default()).is_none());
        // <2>+<-2> has isotropic vectors but none pairing to 1 with L.
        assert!(split_off_u(&lat("<2>+<-2>"), SplitSearch::default()).is_none());
        let tiny = SplitSearch { bound: 1, max_candidates: 1 };
        assert!(split_off_u(&lat("A1+U"), tiny).is_none());
    }

    #[test]
    fn e8_root_complements() {
        let c = e8_complement(E8Root::A1);
        assert!(invariants_match(&c, &expr("E7")).unwrap());
        let c = e8_complement(E8Root::A2);
        assert!(invariants_match(&c, &expr("E6")).unwrap());
        let c = e8_complement(E8Root::A1xA1);
        assert!(invariants_match(&c, &expr("D6")).unwrap());
    }
}
