//! Even integral lattices: discriminant forms, Nikulin's primitive-embedding
//! bound, orthogonal pairs in the K3 lattice, basis certificates and U-splitting.

mod certificate;
mod named;
mod split;

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{signature, snf, IntMatrix, Signature};

pub use certificate::{verify_certificate, BasisCertificate, CertificateOutcome, CertificateTarget};
pub use named::{named_gram, Atom, NamedLatticeExpr};
pub use split::{e8_complement, split_off_u, split_off_u_among, E8Root, SplitSearch, USplit};

/// Largest discriminant group handled by the brute-force isometry search.
pub const MAX_FORM_ORDER: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("Gram matrix is not square and symmetric")]
    NotSymmetric,
    #[error("lattice is degenerate (determinant 0)")]
    Degenerate,
    #[error("lattice is odd; discriminant quadratic forms need an even lattice")]
    Odd,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("discriminant group of order {0} is too large for an exhaustive isometry search")]
    FormTooLarge(BigInt),
    #[error("{0}")]
    Parse(String),
}

/// A lattice given by its Gram matrix in some basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IntMatrix", into = "IntMatrix")]
pub struct IntLattice {
    gram: IntMatrix,
}

impl TryFrom<IntMatrix> for IntLattice {
    type Error = LatticeError;

    fn try_from(gram: IntMatrix) -> Result<Self, LatticeError> {
        IntLattice::new(gram)
    }
}

impl From<IntLattice> for IntMatrix {
    fn from(l: IntLattice) -> IntMatrix {
        l.gram
    }
}

impl IntLattice {
    pub fn new(gram: IntMatrix) -> Result<Self, LatticeError> {
        if !gram.is_square() || !gram.is_symmetric() {
            return Err(LatticeError::NotSymmetric);
        }
        Ok(IntLattice { gram })
    }

    pub fn from_expr(expr: &NamedLatticeExpr) -> Self {
        IntLattice { gram: expr.gram() }
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn signature(&self) -> Signature {
        signature(&self.gram)
    }

    pub fn det(&self) -> BigInt {
        self.gram.det().expect("Gram matrices are square")
    }

    pub fn is_even(&self) -> bool {
        self.gram.diag().iter().all(|d| d.is_even())
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.det().is_zero()
    }

    pub fn direct_sum(&self, other: &IntLattice) -> IntLattice {
        IntLattice { gram: IntMatrix::block_diag(&[self.gram.clone(), other.gram.clone()]) }
    }

    /// The sublattice spanned by the columns of `p`, with Gram pᵀGp.
    pub fn sublattice(&self, p: &IntMatrix) -> Result<IntLattice, LatticeError> {
        if p.rows() != self.rank() {
            return Err(LatticeError::DimensionMismatch { expected: self.rank(), found: p.rows() });
        }
        Ok(IntLattice { gram: self.gram.congruent(p) })
    }

    pub fn pair(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                acc += xi * self.gram.get(i, j) * yj;
            }
        }
        acc
    }
}

impl fmt::Display for IntLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.gram)
    }
}

/// Invariant factors of L*/L greater than one.
pub fn discriminant_group(l: &IntLattice) -> Result<Vec<BigInt>, LatticeError> {
    if !l.is_nondegenerate() {
        return Err(LatticeError::Degenerate);
    }
    Ok(snf(&l.gram).invariant_factors().into_iter().map(|d| d.abs()).filter(|d| !d.is_one()).collect())
}

/// Finite quadratic form on a discriminant group, presented on cyclic generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscriminantForm {
    factors: Vec<BigInt>,
    /// q(g_i) reduced into [0, 2).
    q: Vec<BigRational>,
    /// b(g_i, g_j) reduced into [0, 1).
    b: Vec<Vec<BigRational>>,
}

fn reduce(x: &BigRational, modulus: i64) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(modulus));
    let k = (x / &m).floor();
    x - k * m
}

/// The discriminant form of an even nondegenerate lattice.
///
/// With s = u·G·v in Smith form, the columns v_i / s_i for s_i > 1 generate L*/L.
pub fn discriminant_form(l: &IntLattice) -> Result<DiscriminantForm, LatticeError> {
    if !l.is_nondegenerate() {
        return Err(LatticeError::Degenerate);
    }
    if !l.is_even() {
        return Err(LatticeError::Odd);
    }
    let d = snf(&l.gram);
    let gens: Vec<(Vec<BigInt>, BigInt)> = (0..l.rank())
        .map(|i| (d.v.col(i), d.s.get(i, i).abs()))
        .filter(|(_, s)| !s.is_one())
        .collect();
    let factors: Vec<BigInt> = gens.iter().map(|(_, s)| s.clone()).collect();
    let value = |i: usize, j: usize| {
        BigRational::new(l.pair(&gens[i].0, &gens[j].0), &gens[i].1 * &gens[j].1)
    };
    let k = gens.len();
    let q = (0..k).map(|i| reduce(&value(i, i), 2)).collect();
    let b = (0..k).map(|i| (0..k).map(|j| reduce(&value(i, j), 1)).collect()).collect();
    Ok(DiscriminantForm { factors, q, b })
}

impl DiscriminantForm {
    pub fn trivial() -> Self {
        DiscriminantForm { factors: Vec::new(), q: Vec::new(), b: Vec::new() }
    }

    /// Orders of the presenting generators (not necessarily a divisor chain).
    pub fn factors(&self) -> &[BigInt] {
        &self.factors
    }

    pub fn generator_values(&self) -> &[BigRational] {
        &self.q
    }

    pub fn order(&self) -> BigInt {
        self.factors.iter().product()
    }

    /// Invariant factors of the underlying group as a divisor chain.
    pub fn invariants(&self) -> Vec<BigInt> {
        if self.factors.is_empty() {
            return Vec::new();
        }
        snf(&IntMatrix::diagonal(&self.factors)).invariant_factors().into_iter().filter(|d| !d.is_one()).collect()
    }

    /// Minimal number of generators l(A).
    pub fn length(&self) -> usize {
        self.invariants().len()
    }

    pub fn negate(&self) -> Self {
        DiscriminantForm {
            factors: self.factors.clone(),
            q: self.q.iter().map(|x| reduce(&-x, 2)).collect(),
            b: self.b.iter().map(|r| r.iter().map(|x| reduce(&-x, 1)).collect()).collect(),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let (m, n) = (self.factors.len(), other.factors.len());
        let mut b = vec![vec![BigRational::zero(); m + n]; m + n];
        for i in 0..m {
            for j in 0..m {
                b[i][j] = self.b[i][j].clone();
            }
        }
        for i in 0..n {
            for j in 0..n {
                b[m + i][m + j] = other.b[i][j].clone();
            }
        }
        DiscriminantForm {
            factors: self.factors.iter().chain(&other.factors).cloned().collect(),
            q: self.q.iter().chain(&other.q).cloned().collect(),
            b,
        }
    }

    /// q of the element Σ c_i g_i, in [0, 2).
    pub fn value(&self, c: &[i64]) -> BigRational {
        let mut acc = BigRational::zero();
        for i in 0..c.len() {
            if c[i] == 0 {
                continue;
            }
            acc += &self.q[i] * BigInt::from(c[i] * c[i]);
            for j in i + 1..c.len() {
                acc += &self.b[i][j] * BigInt::from(2 * c[i] * c[j]);
            }
        }
        reduce(&acc, 2)
    }

    /// b(Σ c_i g_i, Σ d_j g_j), in [0, 1).
    pub fn pairing(&self, c: &[i64], d: &[i64]) -> BigRational {
        let mut acc = BigRational::zero();
        for (i, ci) in c.iter().enumerate() {
            for (j, dj) in d.iter().enumerate() {
                if *ci != 0 && *dj != 0 {
                    acc += &self.b[i][j] * BigInt::from(ci * dj);
                }
            }
        }
        reduce(&acc, 1)
    }

    fn small_factors(&self) -> Result<Vec<i64>, LatticeError> {
        let order = self.order();
        if order > BigInt::from(MAX_FORM_ORDER) {
            return Err(LatticeError::FormTooLarge(order));
        }
        Ok(self.factors.iter().map(|f| f.to_i64().expect("bounded by the order cap")).collect())
    }
}

impl fmt::Display for DiscriminantForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "trivial");
        }
        let parts: Vec<String> =
            self.factors.iter().zip(&self.q).map(|(n, q)| format!("Z/{n} (q={q})")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    factors: Vec<String>,
    q: Vec<String>,
    b: Vec<Vec<String>>,
}

impl Serialize for DiscriminantForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strs = |v: &[BigRational]| v.iter().map(ToString::to_string).collect::<Vec<_>>();
        FormRepr {
            factors: self.factors.iter().map(ToString::to_string).collect(),
            q: strs(&self.q),
            b: self.b.iter().map(|r| strs(r)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscriminantForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = FormRepr::deserialize(d)?;
        let rat = |x: &String| x.parse::<BigRational>().map_err(D::Error::custom);
        let factors = r.factors.iter().map(|x| x.parse::<BigInt>().map_err(D::Error::custom)).collect::<Result<Vec<_>, _>>()?;
        let q = r.q.iter().map(rat).collect::<Result<Vec<_>, _>>()?;
        let b = r.b.iter().map(|row| row.iter().map(rat).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?;
        let k = factors.len();
        if q.len() != k || b.len() != k || b.iter().any(|row| row.len() != k) {
            return Err(D::Error::custom("discriminant form arrays have inconsistent lengths"));
        }
        Ok(DiscriminantForm { factors, q, b })
    }
}

fn all_elements(factors: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for &n in factors {
        out = out.into_iter().flat_map(|c| (0..n).map(move |x| [c.as_slice(), &[x]].concat())).collect();
    }
    out
}

fn element_order(c: &[i64], factors: &[i64]) -> i64 {
    c.iter().zip(factors).fold(1, |acc, (&x, &n)| acc.lcm(&(n / x.gcd(&n))))
}

/// Whether two discriminant forms are isometric, by exhaustive generator search.
pub fn forms_isomorphic(a: &DiscriminantForm, b: &DiscriminantForm) -> Result<bool, LatticeError> {
    if a.order() != b.order() || a.invariants() != b.invariants() {
        return Ok(false);
    }
    let na = a.small_factors()?;
    let nb = b.small_factors()?;
    if na.is_empty() {
        return Ok(true);
    }
    let elements = all_elements(&nb);
    let orders: Vec<i64> = elements.iter().map(|c| element_order(c, &nb)).collect();
    let values: Vec<BigRational> = elements.iter().map(|c| b.value(c)).collect();
    let candidates: Vec<Vec<usize>> = (0..na.len())
        .map(|i| (0..elements.len()).filter(|&y| orders[y] == na[i] && values[y] == a.q[i]).collect())
        .collect();

    fn search(
        i: usize,
        chosen: &mut Vec<usize>,
        a: &DiscriminantForm,
        b: &DiscriminantForm,
        na: &[i64],
        nb: &[i64],
        elements: &[Vec<i64>],
        candidates: &[Vec<usize>],
    ) -> bool {
        if i == na.len() {
            return is_bijective(chosen, na, nb, elements);
        }
        for &y in &candidates[i] {
            let compatible =
                chosen.iter().enumerate().all(|(j, &x)| b.pairing(&elements[y], &elements[x]) == a.b[i][j]);
            if compatible {
                chosen.push(y);
                if search(i + 1, chosen, a, b, na, nb, elements, candidates) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    Ok(search(0, &mut Vec::new(), a, b, &na, &nb, &elements, &candidates))
}

fn is_bijective(images: &[usize], na: &[i64], nb: &[i64], elements: &[Vec<i64>]) -> bool {
    let mut seen = HashSet::new();
    for c in all_elements(na) {
        let img: Vec<i64> = (0..nb.len())
            .map(|k| c.iter().zip(images).map(|(ci, &y)| ci * elements[y][k]).sum::<i64>().rem_euclid(nb[k]))
            .collect();
        if !seen.insert(img) {
            return false;
        }
    }
    true
}

/// Rank, signature, determinant and (for even lattices) discriminant form agree.
pub fn invariants_match(l: &IntLattice, expr: &NamedLatticeExpr) -> Result<bool, LatticeError> {
    let target = IntLattice::from_expr(expr);
    lattices_equivalent(l, &target)
}

fn lattices_equivalent(l: &IntLattice, m: &IntLattice) -> Result<bool, LatticeError> {
    if l.rank() != m.rank() || l.signature() != m.signature() || l.det() != m.det() || l.is_even() != m.is_even() {
        return Ok(false);
    }
    if !l.is_nondegenerate() {
        return Ok(true);
    }
    if !l.is_even() {
        return Ok(discriminant_group(l)? == discriminant_group(m)?);
    }
    forms_isomorphic(&discriminant_form(l)?, &discriminant_form(m)?)
}

/// Numeric invariants of a lattice: rank, signature, |det| and invariant factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeInvariants {
    pub rank: usize,
    /// (positive, negative) inertia.
    pub signature: [usize; 2],
    pub abs_disc: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<u64>>,
}

impl LatticeInvariants {
    pub fn of(l: &IntLattice) -> Result<Self, LatticeError> {
        let sig = l.signature();
        let factors = discriminant_group(l)?;
        Ok(LatticeInvariants {
            rank: l.rank(),
            signature: [sig.pos, sig.neg],
            abs_disc: l.det().abs().to_u64().unwrap_or(u64::MAX),
            factors: Some(factors.iter().map(|f| f.to_u64().unwrap_or(u64::MAX)).collect()),
        })
    }
}

impl fmt::Display for LatticeInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank {}, signature ({},{}), |disc| {}", self.rank, self.signature[0], self.signature[1], self.abs_disc)?;
        if let Some(fs) = &self.factors {
            let fs: Vec<String> = fs.iter().map(ToString::to_string).collect();
            write!(f, ", factors [{}]", fs.join(","))?;
        }
        Ok(())
    }
}

/// Expected lattice: a named expression, or bare invariants when no name is known.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LatticeSpec {
    Named(NamedLatticeExpr),
    Invariants(LatticeInvariants),
}

impl LatticeSpec {
    pub fn matches(&self, l: &IntLattice) -> Result<bool, LatticeError> {
        match self {
            LatticeSpec::Named(e) => invariants_match(l, e),
            LatticeSpec::Invariants(inv) => {
                let got = LatticeInvariants::of(l)?;
                Ok(got.rank == inv.rank
                    && got.signature == inv.signature
                    && got.abs_disc == inv.abs_disc
                    && inv.factors.as_ref().is_none_or(|f| got.factors.as_ref() == Some(f)))
            }
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            LatticeSpec::Named(e) => e.rank(),
            LatticeSpec::Invariants(inv) => inv.rank,
        }
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeSpec::Named(e) => write!(f, "{}", e.pretty()),
            LatticeSpec::Invariants(inv) => write!(f, "{inv}"),
        }
    }
}

/// Nikulin's sufficient condition for a unique primitive embedding into the K3 lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NikulinReport {
    pub rank: usize,
    pub t_plus: usize,
    pub t_minus: usize,
    pub length: usize,
    /// 19 − t₋.
    pub minus_room: i64,
    /// 3 − t₊.
    pub plus_room: i64,
    /// 22 − rank.
    pub corank: i64,
    pub holds: bool,
}

impl fmt::Display for NikulinReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = if self.corank > self.length as i64 { ">" } else { "≤" };
        write!(
            f,
            "19−t₋={}, 3−t₊={}, 22−rk={}{}{}=l(A)",
            self.minus_room, self.plus_room, self.corank, rel, self.length
        )
    }
}

pub fn nikulin_primitive_check(l: &IntLattice) -> Result<NikulinReport, LatticeError> {
    let sig = l.signature();
    if sig.zero > 0 {
        return Err(LatticeError::Degenerate);
    }
    let length = discriminant_group(l)?.len();
    let minus_room = 19 - sig.neg as i64;
    let plus_room = 3 - sig.pos as i64;
    let corank = 22 - l.rank() as i64;
    Ok(NikulinReport {
        rank: l.rank(),
        t_plus: sig.pos,
        t_minus: sig.neg,
        length,
        minus_room,
        plus_room,
        corank,
        holds: minus_room >= 0 && plus_room >= 0 && corank > length as i64,
    })
}

/// Whether S and T can be mutual orthogonal complements in the even unimodular lattice of signature (3,19).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrthogonalPairReport {
    pub both_even: bool,
    pub rank_sum: usize,
    pub signature_sum: [usize; 2],
    pub forms_anti_isometric: bool,
    pub nikulin: [NikulinReport; 2],
    pub holds: bool,
}

pub fn orthogonal_pair_check(s: &IntLattice, t: &IntLattice) -> Result<OrthogonalPairReport, LatticeError> {
    let (ss, st) = (s.signature(), t.signature());
    let both_even = s.is_even() && t.is_even();
    let forms_anti_isometric = both_even
        && s.is_nondegenerate()
        && t.is_nondegenerate()
        && forms_isomorphic(&discriminant_form(s)?, &discriminant_form(t)?.negate())?;
    let nikulin = [nikulin_primitive_check(s)?, nikulin_primitive_check(t)?];
    let rank_sum = s.rank() + t.rank();
    let signature_sum = [ss.pos + st.pos, ss.neg + st.neg];
    let holds = both_even && rank_sum == 22 && signature_sum == [3, 19] && forms_anti_isometric;
    Ok(OrthogonalPairReport { both_even, rank_sum, signature_sum, forms_anti_isometric, nikulin, holds })
}

/// Named lattices tried when identifying a computed lattice, preferred names first.
pub fn catalog() -> Vec<NamedLatticeExpr> {
    [
        "U", "U+A1", "U+A2", "U+A1^2", "U+A3", "U+D4", "U+E6", "U+E7", "U+E8", "U+A1+E7", "U+A1+E8", "U+A2+E8",
        "U+E6+E8", "U+E7+E8", "U+E8^2", "U+U+E8^2", "U+<-2>+E8^2", "U+<2>+E8^2", "U+<-4>+E8^2", "U+<4>+E8^2",
        "U+A2+E8^2", "<2>", "<4>", "<6>", "gram:[[2,1],[1,-2]]", "A1", "A2", "E6", "E7", "E8", "A1+E7", "A1+E8",
        "A2+E8", "E6+E8", "E7+E8", "E8^2", "<-2>+E8^2", "<-4>+E8^2", "A1+A1+E7", "D4+E8",
    ]
    .iter()
    .map(|s| s.parse().expect("catalog entries parse"))
    .collect()
}

/// The first catalog entry whose invariants match `l`.
pub fn identify(l: &IntLattice) -> Option<NamedLatticeExpr> {
    catalog().into_iter().find(|e| e.rank() == l.rank() && invariants_match(l, e).unwrap_or(false))
}
