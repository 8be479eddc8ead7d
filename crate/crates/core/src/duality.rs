//! Coupling pairs: ingestion from weights and monomials, the end-to-end duality
//! check and the built-in dataset.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{
    discriminant_form, identify, nikulin_primitive_check, orthogonal_pair_check, split_off_u_among, verify_certificate,
    BasisCertificate, CertificateOutcome, CertificateTarget, DiscriminantForm, IntLattice, LatticeError,
    LatticeInvariants, LatticeSpec, NamedLatticeExpr, NikulinReport, OrthogonalPairReport, SplitSearch,
};
use crate::linalg::{kernel_basis, snf, IntCell, IntMatrix, Signature};
use crate::polytope::{LatticePoint3, Polytope3, PolytopeError};
use crate::toric::{mpcp_fan, picard_gram, picard_number_check, Fan3, RestrictedIntersection, ToricError};

const BUILTIN_PAIRS: &str = include_str!("../data/pairs.json");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DualityError {
    #[error("monomial {monomial:?} has weighted degree {found}, expected {degree}")]
    MonomialDegreeMismatch { monomial: [i64; 4], found: i64, degree: i64 },
    #[error("point {point:?} of monomial {monomial:?} is not in the span of the basis")]
    PointNotInBasisSpan { monomial: [i64; 4], point: [i64; 4] },
    #[error("invalid monomial basis: {0}")]
    InvalidBasis(String),
    #[error("invalid polytope spec: {0}")]
    InvalidSide(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Toric(#[from] ToricError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// JSON syntax or schema error with its position.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    /// Dotted path to the offending field, `.` for the document root.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}, at {}: {}", self.line, self.column, self.field, self.message)
    }
}

/// Weights (a0, a1, a2, a3) and degree d, written `[a0, a1, a2, a3, d]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct WeightSystem {
    pub weights: [i64; 4],
    pub degree: i64,
}

impl TryFrom<Vec<i64>> for WeightSystem {
    type Error = String;

    fn try_from(v: Vec<i64>) -> Result<Self, String> {
        let [a0, a1, a2, a3, d]: [i64; 5] =
            v.try_into().map_err(|v: Vec<i64>| format!("expected [a0,a1,a2,a3,d], got {} entries", v.len()))?;
        let ws = WeightSystem { weights: [a0, a1, a2, a3], degree: d };
        if ws.weights.iter().any(|&a| a <= 0) {
            return Err("weights must be positive".into());
        }
        if d <= *ws.weights.iter().max().unwrap() {
            return Err(format!("degree {d} must exceed every weight"));
        }
        Ok(ws)
    }
}

impl From<WeightSystem> for Vec<i64> {
    fn from(w: WeightSystem) -> Vec<i64> {
        vec![w.weights[0], w.weights[1], w.weights[2], w.weights[3], w.degree]
    }
}

impl WeightSystem {
    pub fn degree_of(&self, e: &[i64; 4]) -> i64 {
        self.weights.iter().zip(e).map(|(a, x)| a * x).sum()
    }

    /// Saturated basis of M = {x ∈ Z⁴ : Σ aᵢxᵢ = 0}.
    pub fn kernel_basis(&self) -> [[i64; 4]; 3] {
        let row = IntMatrix::from_rows(&[self.weights.to_vec()]);
        let k = kernel_basis(&row);
        let rows = k.transpose().to_i64_rows().expect("small kernel entries");
        [0, 1, 2].map(|i| [rows[i][0], rows[i][1], rows[i][2], rows[i][3]])
    }
}

impl fmt::Display for WeightSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.weights;
        write!(f, "({a},{b},{c},{d};{})", self.degree)
    }
}

/// Exponent vectors (e0..e3) of W^e0 X^e1 Y^e2 Z^e3, with an optional basis of M.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialSpec {
    pub basis: Option<[[i64; 4]; 3]>,
    pub monomials: Vec<[i64; 4]>,
}

/// One side of a pair: weights and monomials, or the Newton polytope's vertices.
/// `rays` optionally carries a transcribed list of fan rays for auditing and certificates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SideSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightSystem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<[[i64; 4]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monomials: Option<Vec<[i64; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<LatticePoint3>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<Vec<LatticePoint3>>,
}

impl SideSpec {
    pub fn validate(&self) -> Result<(), DualityError> {
        match (&self.weights, &self.monomials, &self.vertices) {
            (_, Some(_), Some(_)) => {
                Err(DualityError::InvalidSide("give either monomials or vertices, not both".into()))
            }
            (None, None, Some(v)) if self.basis.is_none() => {
                if v.is_empty() {
                    return Err(DualityError::InvalidSide("empty vertex list".into()));
                }
                Ok(())
            }
            (Some(ws), Some(m), None) => {
                if m.is_empty() {
                    return Err(DualityError::InvalidSide("empty monomial list".into()));
                }
                for e in m {
                    check_degree(ws, e)?;
                }
                if let Some(b) = &self.basis {
                    check_basis(ws, b)?;
                }
                Ok(())
            }
            _ => Err(DualityError::InvalidSide(
                "expected {weights, monomials[, basis]} or {vertices}".into(),
            )),
        }
    }

    pub fn polytope(&self) -> Result<Polytope3, DualityError> {
        self.validate()?;
        if let Some(v) = &self.vertices {
            return Ok(Polytope3::hull(v)?);
        }
        let ws = self.weights.expect("validated");
        let spec = MonomialSpec { basis: self.basis, monomials: self.monomials.clone().expect("validated") };
        monomials_to_polytope(&ws, &spec)
    }
}

fn check_degree(ws: &WeightSystem, e: &[i64; 4]) -> Result<(), DualityError> {
    let found = ws.degree_of(e);
    if found != ws.degree || e.iter().any(|&x| x < 0) {
        return Err(DualityError::MonomialDegreeMismatch { monomial: *e, found, degree: ws.degree });
    }
    Ok(())
}

fn check_basis(ws: &WeightSystem, b: &[[i64; 4]; 3]) -> Result<(), DualityError> {
    for v in b {
        if ws.degree_of(v) != 0 {
            return Err(DualityError::InvalidBasis(format!("{v:?} is not orthogonal to the weights {ws}")));
        }
    }
    let m = IntMatrix::from_rows(&b.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    let factors = snf(&m).invariant_factors();
    if factors.iter().any(|f| f.abs() != BigInt::from(1)) {
        return Err(DualityError::InvalidBasis(format!("{b:?} does not span a saturated rank-3 lattice")));
    }
    Ok(())
}

/// Newton polytope of the monomials in M-coordinates: W^e0 X^e1 Y^e2 Z^e3 ↦ (e − 1) in the given basis.
pub fn monomials_to_polytope(ws: &WeightSystem, spec: &MonomialSpec) -> Result<Polytope3, DualityError> {
    let basis = match &spec.basis {
        Some(b) => {
            check_basis(ws, b)?;
            *b
        }
        None => ws.kernel_basis(),
    };
    let solver = BasisSolver::new(&basis);
    let mut points = Vec::with_capacity(spec.monomials.len());
    for e in &spec.monomials {
        check_degree(ws, e)?;
        let p = [e[0] - 1, e[1] - 1, e[2] - 1, e[3] - 1];
        let c = solver.solve(&p).ok_or(DualityError::PointNotInBasisSpan { monomial: *e, point: p })?;
        points.push(LatticePoint3(c));
    }
    Ok(Polytope3::hull(&points)?)
}

/// Exact coordinates with respect to three independent vectors in Z⁴.
struct BasisSolver {
    basis: [[i64; 4]; 3],
    rows: [usize; 3],
    det: i128,
}

impl BasisSolver {
    fn new(basis: &[[i64; 4]; 3]) -> Self {
        for rows in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            let det = Self::minor(basis, rows, None);
            if det != 0 {
                return BasisSolver { basis: *basis, rows, det };
            }
        }
        unreachable!("a validated basis has rank 3")
    }

    fn minor(b: &[[i64; 4]; 3], rows: [usize; 3], replace: Option<(usize, &[i64; 4])>) -> i128 {
        let col = |j: usize| -> [i128; 3] {
            let v = match replace {
                Some((k, p)) if k == j => p,
                _ => &b[j],
            };
            rows.map(|r| v[r] as i128)
        };
        let (a, c, d) = (col(0), col(1), col(2));
        a[0] * (c[1] * d[2] - c[2] * d[1]) - c[0] * (a[1] * d[2] - a[2] * d[1]) + d[0] * (a[1] * c[2] - a[2] * c[1])
    }

    fn solve(&self, p: &[i64; 4]) -> Option<[i64; 3]> {
        let mut c = [0i64; 3];
        for (j, cj) in c.iter_mut().enumerate() {
            let num = Self::minor(&self.basis, self.rows, Some((j, p)));
            if num % self.det != 0 {
                return None;
            }
            *cj = i64::try_from(num / self.det).ok()?;
        }
        let back: Vec<i64> = (0..4).map(|r| (0..3).map(|j| c[j] * self.basis[j][r]).sum()).collect();
        (back == p).then_some(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Delta,
    DeltaPrime,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Delta => Side::DeltaPrime,
            Side::DeltaPrime => Side::Delta,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Delta => "Δ",
            Side::DeltaPrime => "Δ′",
        })
    }
}

/// Expected Picard lattices, with the (rank, |disc|) pairs of the printed table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedSpec {
    pub pic_delta: LatticeSpec,
    pub pic_delta_prime: LatticeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_disc_delta: Option<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_disc_delta_prime: Option<[u64; 2]>,
    /// Literal table strings where they differ from `pic_*` (kept for reference only).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub table_text: BTreeMap<String, String>,
}

impl ExpectedSpec {
    pub fn pic(&self, side: Side) -> &LatticeSpec {
        match side {
            Side::Delta => &self.pic_delta,
            Side::DeltaPrime => &self.pic_delta_prime,
        }
    }

    pub fn rank_disc(&self, side: Side) -> Option<[u64; 2]> {
        match side {
            Side::Delta => self.rank_disc_delta,
            Side::DeltaPrime => self.rank_disc_delta_prime,
        }
    }
}

/// A transcribed change of basis: `vectors[k]` is a combination of the divisors D_i
/// (1-based positions in the ray list) whose indices appear in `basis`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub side: Side,
    /// Ray list the indices refer to; defaults to the side's `rays`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<Vec<LatticePoint3>>,
    pub basis: Vec<usize>,
    pub vectors: Vec<String>,
    pub target: CertificateTarget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingPair {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub delta: SideSpec,
    pub delta_prime: SideSpec,
    pub expected: ExpectedSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertificateSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CouplingPair {
    pub fn side(&self, side: Side) -> &SideSpec {
        match side {
            Side::Delta => &self.delta,
            Side::DeltaPrime => &self.delta_prime,
        }
    }

    pub fn validate(&self) -> Result<(), DualityError> {
        self.delta.validate()?;
        self.delta_prime.validate()?;
        if let (Some([r, d]), Some([r2, d2])) = (self.expected.rank_disc_delta, self.expected.rank_disc_delta_prime) {
            if r + r2 != 20 {
                return Err(DualityError::InvariantViolation(format!("{}: expected ranks {r} + {r2} ≠ 20", self.id)));
            }
            if d != d2 {
                return Err(DualityError::InvariantViolation(format!("{}: expected |disc| {d} ≠ {d2}", self.id)));
            }
        }
        for c in &self.certificates {
            if c.basis.len() != c.vectors.len() {
                return Err(DualityError::InvariantViolation(format!(
                    "{}: certificate has {} basis divisors but {} vectors",
                    self.id,
                    c.basis.len(),
                    c.vectors.len()
                )));
            }
            for v in &c.vectors {
                parse_combination(v).map_err(DualityError::InvariantViolation)?;
            }
        }
        Ok(())
    }

    /// The same pair with the roles of Δ and Δ′ exchanged.
    pub fn swapped(&self) -> CouplingPair {
        let e = &self.expected;
        CouplingPair {
            id: format!("{} (swapped)", self.id),
            label: self.label.clone(),
            delta: self.delta_prime.clone(),
            delta_prime: self.delta.clone(),
            expected: ExpectedSpec {
                pic_delta: e.pic_delta_prime.clone(),
                pic_delta_prime: e.pic_delta.clone(),
                rank_disc_delta: e.rank_disc_delta_prime,
                rank_disc_delta_prime: e.rank_disc_delta,
                table_text: BTreeMap::new(),
            },
            certificates: self.certificates.iter().map(|c| CertificateSpec { side: c.side.other(), ..c.clone() }).collect(),
            notes: self.notes.clone(),
        }
    }
}

fn parse_error(err: serde_path_to_error::Error<serde_json::Error>) -> ParseError {
    let field = err.path().to_string();
    let inner = err.into_inner();
    ParseError { line: inner.line(), column: inner.column(), field, message: inner.to_string() }
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ParseError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(parse_error)?;
    de.end().map_err(|e| ParseError { line: e.line(), column: e.column(), field: ".".into(), message: e.to_string() })?;
    Ok(value)
}

/// Parses and validates one pair in the JSON pair format.
pub fn parse_pair(text: &str) -> Result<CouplingPair, DualityError> {
    let pair: CouplingPair = from_json(text)?;
    pair.validate()?;
    Ok(pair)
}

/// Parses and validates a JSON array of pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<CouplingPair>, DualityError> {
    let pairs: Vec<CouplingPair> = from_json(text)?;
    for p in &pairs {
        p.validate()?;
    }
    Ok(pairs)
}

/// Parses and validates a single polytope: `{"vertices": ...}` or `{weights, monomials[, basis]}`.
pub fn parse_side(text: &str) -> Result<SideSpec, DualityError> {
    let side: SideSpec = from_json(text)?;
    side.validate()?;
    Ok(side)
}

fn read(path: &Path) -> Result<String, DualityError> {
    std::fs::read_to_string(path)
        .map_err(|e| DualityError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub fn load_pair(path: impl AsRef<Path>) -> Result<CouplingPair, DualityError> {
    parse_pair(&read(path.as_ref())?)
}

pub fn load_pairs(path: impl AsRef<Path>) -> Result<Vec<CouplingPair>, DualityError> {
    parse_pairs(&read(path.as_ref())?)
}

/// The pair-cases of the lattice duality table, with transcribed ray lists and certificates.
pub fn builtin_pairs() -> Vec<CouplingPair> {
    parse_pairs(BUILTIN_PAIRS).expect("embedded dataset is valid")
}

/// The embedded dataset as JSON text.
pub fn builtin_pairs_text() -> &'static str {
    BUILTIN_PAIRS
}

/// Pairs selected by `query`: an exact id, a row like `15-18`, or a leading number like `15`.
pub fn find_pairs<'a>(pairs: &'a [CouplingPair], query: &str) -> Vec<&'a CouplingPair> {
    if let Some(p) = pairs.iter().find(|p| p.id == query) {
        return vec![p];
    }
    pairs
        .iter()
        .filter(|p| {
            let row = p.id.split('/').next().unwrap_or("");
            row == query || row.split('-').next() == Some(query)
        })
        .collect()
}

/// Hyperbolic-plane splitting of a Picard lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitReport {
    /// Columns e, f, then a basis of the complement.
    pub basis: IntMatrix,
    pub complement_gram: IntMatrix,
    pub complement: LatticeInvariants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complement_name: Option<NamedLatticeExpr>,
    pub complement_nikulin: NikulinReport,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicardReport {
    pub rho: usize,
    pub l0: usize,
    /// Edge-point count of the Newton polytope: the Picard rank of the mirror family.
    pub rho_formula: i64,
    pub rays: usize,
    pub facet_interior_rays: usize,
    pub basis_rays: Vec<LatticePoint3>,
    pub gram: IntMatrix,
    pub signature: Signature,
    pub det: IntCell,
    pub even: bool,
    pub invariants: LatticeInvariants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discriminant_form: Option<DiscriminantForm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<NamedLatticeExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_u: Option<SplitReport>,
    pub nikulin: NikulinReport,
}

impl PicardReport {
    pub fn lattice(&self) -> IntLattice {
        IntLattice::new(self.gram.clone()).expect("Picard Gram is symmetric")
    }

    pub fn rank_disc(&self) -> [u64; 2] {
        [self.rho as u64, self.invariants.abs_disc]
    }

    /// `U⊕E7 (9,2)` or `(10,13)` when unnamed.
    pub fn summary(&self) -> String {
        let [r, d] = self.rank_disc();
        match &self.matched {
            Some(e) => format!("{} ({r},{d})", e.pretty()),
            None => match self.split_u.as_ref().and_then(|s| s.complement_name.as_ref()) {
                Some(c) => format!("U⊕{} ({r},{d})", c.pretty()),
                None if self.split_u.is_some() => format!("U⊕L̃ ({r},{d})"),
                None => format!("L ({r},{d})"),
            },
        }
    }
}

/// Picard lattice of the anticanonical K3 family with Newton polytope `delta`.
pub fn analyze_family(delta: &Polytope3, search: SplitSearch) -> Result<PicardReport, DualityError> {
    if !delta.is_reflexive() {
        return Err(ToricError::NotReflexive.into());
    }
    let l0 = delta.toric_contribution()?;
    if l0 != 0 {
        return Err(ToricError::NontrivialToricContribution(l0).into());
    }
    let fan = mpcp_fan(delta)?;
    let restricted = picard_gram(&fan, delta)?;
    let check = picard_number_check(&fan, delta)?;
    let gram = restricted.gram_basis.clone();
    let lattice = IntLattice::new(gram.clone())?;
    if lattice.rank() != check.rho_rays || gram.rank() != lattice.rank() {
        return Err(DualityError::InvariantViolation(format!(
            "Picard rank {} disagrees with the ray count {}",
            lattice.rank(),
            check.rho_rays
        )));
    }
    let even = lattice.is_even();
    let generators = split_generators(&fan, &restricted);
    let split_u = split_off_u_among(&lattice, &generators, search).map(|s| {
        let complement = LatticeInvariants::of(&s.complement).expect("nondegenerate");
        SplitReport {
            basis: s.basis,
            complement_gram: s.complement.gram().clone(),
            complement,
            complement_name: identify(&s.complement),
            complement_nikulin: nikulin_primitive_check(&s.complement).expect("nondegenerate"),
        }
    });
    Ok(PicardReport {
        rho: lattice.rank(),
        l0,
        rho_formula: check.rho_formula,
        rays: fan.rays().len(),
        facet_interior_rays: restricted.facet_interior.len(),
        basis_rays: restricted.basis_rays().iter().map(|&i| fan.rays()[i]).collect(),
        signature: lattice.signature(),
        det: IntCell(lattice.det()),
        even,
        invariants: LatticeInvariants::of(&lattice)?,
        discriminant_form: if even { Some(discriminant_form(&lattice)?) } else { None },
        matched: identify(&lattice),
        split_u,
        nikulin: nikulin_primitive_check(&lattice)?,
        gram,
    })
}

/// Candidate generators for the U search: fibre classes Σ_{⟨m,v⟩>0} ⟨m,v⟩ D_v for small
/// primitive m, followed by the individual divisor classes, all in basis coordinates.
fn split_generators(fan: &Fan3, restricted: &RestrictedIntersection) -> IntMatrix {
    let coords = restricted.coordinates(fan);
    let rho = coords.rows();
    let mut columns: Vec<Vec<BigInt>> = Vec::new();
    for m in (-2..=2).flat_map(|x| (-2..=2).flat_map(move |y| (-2..=2).map(move |z| LatticePoint3::new(x, y, z)))) {
        if m.is_zero() || m.content() != 1 {
            continue;
        }
        let mut f = vec![BigInt::from(0); rho];
        for (j, &ray) in restricted.rays.iter().enumerate() {
            let k = m.dot(fan.rays()[ray]);
            if k > 0 {
                for (r, x) in f.iter_mut().enumerate() {
                    *x += coords.get(r, j) * k;
                }
            }
        }
        if !columns.contains(&f) {
            columns.push(f);
        }
    }
    columns.extend((0..coords.cols()).map(|j| coords.col(j)));
    IntMatrix::from_fn(rho, columns.len(), |r, c| columns[c][r].clone())
}

/// Parses `2D1-D2+D14` into (index, coefficient) terms.
pub fn parse_combination(s: &str) -> Result<Vec<(usize, i64)>, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bytes = t.as_bytes();
    let mut terms = Vec::new();
    let mut i = 0;
    let bad = || format!("malformed divisor combination '{s}'");
    while i < bytes.len() {
        let mut sign = 1;
        if bytes[i] == b'+' || bytes[i] == b'-' {
            sign = if bytes[i] == b'-' { -1 } else { 1 };
            i += 1;
        } else if !terms.is_empty() {
            return Err(bad());
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let coef: i64 = if i > start { t[start..i].parse().map_err(|_| bad())? } else { 1 };
        if i >= bytes.len() || bytes[i] != b'D' {
            return Err(bad());
        }
        i += 1;
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let idx: usize = t[start..i].parse().map_err(|_| bad())?;
        if idx == 0 {
            return Err(bad());
        }
        terms.push((idx, sign * coef));
    }
    if terms.is_empty() {
        return Err(bad());
    }
    Ok(terms)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateResult {
    pub side: Side,
    pub target: CertificateTarget,
    /// The basis divisors span the whole Picard lattice (|det| agrees with the computed one).
    pub basis_spans: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<CertificateOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub holds: bool,
}

/// Checks a transcribed basis change against the intersection form on its ray list.
pub fn verify_pair_certificate(pair: &CouplingPair, cert: &CertificateSpec) -> CertificateResult {
    let mut result = CertificateResult {
        side: cert.side,
        target: cert.target.clone(),
        basis_spans: false,
        outcome: None,
        error: None,
        holds: false,
    };
    match certificate_lattice(pair, cert) {
        Ok((lattice, p, spans)) => {
            result.basis_spans = spans;
            let bc = BasisCertificate { source: format!("{} {}", pair.id, cert.side), p, target: cert.target.clone() };
            match verify_certificate(&lattice, &bc) {
                Ok(o) => {
                    result.holds = spans && o.holds;
                    result.outcome = Some(o);
                }
                Err(e) => result.error = Some(e.to_string()),
            }
        }
        Err(e) => result.error = Some(e),
    }
    result
}

fn certificate_lattice(pair: &CouplingPair, cert: &CertificateSpec) -> Result<(IntLattice, IntMatrix, bool), String> {
    let rays = cert
        .rays
        .as_ref()
        .or(pair.side(cert.side).rays.as_ref())
        .ok_or_else(|| format!("no ray list for side {}", cert.side))?;
    let mut unique = rays.clone();
    unique.sort();
    unique.dedup();
    let hull = Polytope3::hull(&unique).map_err(|e| format!("ray list: {e}"))?;
    let delta = hull.reflexive_dual().map_err(|e| format!("ray list: {e}"))?;
    let fan = mpcp_fan(&delta).map_err(|e| e.to_string())?;
    let restricted = picard_gram(&fan, &delta).map_err(|e| e.to_string())?;
    let position = |i: usize| -> Result<usize, String> {
        let r = rays.get(i.wrapping_sub(1)).ok_or_else(|| format!("D{i} is out of range"))?;
        let f = fan.ray_index(*r).ok_or_else(|| format!("D{i} = {r} is not a ray of the fan"))?;
        restricted.rays.iter().position(|&x| x == f).ok_or_else(|| format!("D{i} = {r} is facet-interior"))
    };
    let basis: Vec<usize> = cert.basis.iter().map(|&i| position(i)).collect::<Result<_, _>>()?;
    let gram = restricted.gram_full.submatrix(&basis, &basis);
    let n = basis.len();
    let mut p = IntMatrix::zeros(n, cert.vectors.len());
    for (col, v) in cert.vectors.iter().enumerate() {
        for (idx, coef) in parse_combination(v)? {
            let pos = position(idx)?;
            let row = basis.iter().position(|&b| b == pos).ok_or_else(|| format!("D{idx} in '{v}' is not a basis divisor"))?;
            let cur = p.get(row, col).clone();
            p.set(row, col, cur + coef);
        }
    }
    let det = gram.det().map_err(|e| e.to_string())?;
    let pic_det = restricted.gram_basis.det().map_err(|e| e.to_string())?;
    let spans = n == restricted.gram_basis.rows() && det.abs() == pic_det.abs() && det != BigInt::from(0);
    Ok((IntLattice::new(gram).map_err(|e| e.to_string())?, p, spans))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedCheck {
    pub expected: LatticeSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_rank_disc: Option<[u64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub computed_rank_disc: Option<[u64; 2]>,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityVerdict {
    pub id: String,
    pub polytope_dual_ok: bool,
    /// Matrix U with U·v ∈ Δ′ for every vertex v of the polar dual of Δ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gl3z_map: Option<[[i64; 3]; 3]>,
    pub l0_trivial_ok: bool,
    pub l0: [Option<usize>; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pic_delta: Option<PicardReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pic_delta_prime: Option<PicardReport>,
    pub expected_match_ok: bool,
    pub expected: [ExpectedCheck; 2],
    pub lattice_duality_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality: Option<OrthogonalPairReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<CertificateResult>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
    pub passed: bool,
}

/// Runs the whole pipeline on a pair. Failures show up as flags, never as errors.
pub fn check_pair(pair: &CouplingPair, search: SplitSearch) -> DualityVerdict {
    let mut warnings = Vec::new();
    let mut errors = Vec::new();
    let mut polytope = |side: Side| match pair.side(side).polytope() {
        Ok(p) => Some(p),
        Err(e) => {
            errors.push(format!("{side}: {e}"));
            None
        }
    };
    let (delta, delta_p) = (polytope(Side::Delta), polytope(Side::DeltaPrime));

    let mut gl3z_map = None;
    if let (Some(d), Some(dp)) = (&delta, &delta_p) {
        match d.reflexive_dual() {
            Ok(dual) => gl3z_map = dual.iso_gl3z(dp),
            Err(e) => errors.push(format!("Δ: {e}")),
        }
        if !dp.is_reflexive() {
            errors.push("Δ′: polytope is not reflexive".into());
        }
    }
    let polytope_dual_ok = gl3z_map.is_some();

    let l0 = [&delta, &delta_p].map(|p| p.as_ref().and_then(|p| p.toric_contribution().ok()));
    let l0_trivial_ok = l0 == [Some(0), Some(0)];

    let mut analyze = |side: Side, p: &Option<Polytope3>| {
        let p = p.as_ref()?;
        match analyze_family(p, search) {
            Ok(r) => Some(r),
            Err(e) => {
                errors.push(format!("{side}: {e}"));
                None
            }
        }
    };
    let pic_delta = analyze(Side::Delta, &delta);
    let pic_delta_prime = analyze(Side::DeltaPrime, &delta_p);

    let expected = [Side::Delta, Side::DeltaPrime].map(|side| {
        let report = match side {
            Side::Delta => pic_delta.as_ref(),
            Side::DeltaPrime => pic_delta_prime.as_ref(),
        };
        let spec = pair.expected.pic(side).clone();
        let expected_rank_disc = pair.expected.rank_disc(side);
        let computed_rank_disc = report.map(PicardReport::rank_disc);
        let ok = report.is_some_and(|r| {
            expected_rank_disc.is_none_or(|rd| rd == r.rank_disc()) && spec.matches(&r.lattice()).unwrap_or(false)
        });
        ExpectedCheck { expected: spec, expected_rank_disc, computed_rank_disc, ok }
    });
    let expected_match_ok = expected.iter().all(|e| e.ok);

    let duality = match (&pic_delta, &pic_delta_prime) {
        (Some(s), Some(t)) => {
            let u: NamedLatticeExpr = "U".parse().expect("U parses");
            let target = IntLattice::from_expr(&u).direct_sum(&t.lattice());
            match orthogonal_pair_check(&s.lattice(), &target) {
                Ok(r) => Some(r),
                Err(e) => {
                    errors.push(format!("duality: {e}"));
                    None
                }
            }
        }
        _ => None,
    };
    let lattice_duality_ok = duality.as_ref().is_some_and(|d| d.holds);

    let certificates: Vec<CertificateResult> = pair.certificates.iter().map(|c| verify_pair_certificate(pair, c)).collect();
    let certificate_ok = (!certificates.is_empty()).then(|| certificates.iter().all(|c| c.holds));

    for side in [Side::Delta, Side::DeltaPrime] {
        let p = match side {
            Side::Delta => &delta,
            Side::DeltaPrime => &delta_p,
        };
        if let (Some(rays), Some(p)) = (&pair.side(side).rays, p) {
            warnings.extend(audit_rays(side, rays, p));
        }
    }

    let passed = polytope_dual_ok && l0_trivial_ok && expected_match_ok && lattice_duality_ok && certificate_ok != Some(false);
    DualityVerdict {
        id: pair.id.clone(),
        polytope_dual_ok,
        gl3z_map,
        l0_trivial_ok,
        l0,
        pic_delta,
        pic_delta_prime,
        expected_match_ok,
        expected,
        lattice_duality_ok,
        duality,
        certificate_ok,
        certificates,
        warnings,
        errors,
        passed,
    }
}

/// Compares a transcribed ray list with the lattice points of the polar dual of `newton`.
pub fn audit_rays(side: Side, rays: &[LatticePoint3], newton: &Polytope3) -> Vec<String> {
    let mut out = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for r in rays {
        if !seen.insert(*r) {
            out.push(format!("{side} ray list repeats {r}"));
        }
    }
    let unique: Vec<LatticePoint3> = seen.into_iter().collect();
    let Ok(dual) = newton.reflexive_dual() else {
        return out;
    };
    match Polytope3::hull(&unique) {
        Err(e) => out.push(format!("{side} ray list does not span a polytope: {e}")),
        Ok(h) => {
            if h.iso_gl3z(&dual).is_none() {
                out.push(format!("{side} ray list hull is not GL(3,Z)-equivalent to the polar dual of the Newton polytope"));
            }
        }
    }
    out
}

/// One line of the reproduced table, from scratch computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub id: String,
    pub pic_delta_prime: String,
    pub rank_disc_delta_prime: Option<[u64; 2]>,
    pub pic_delta: String,
    pub rank_disc_delta: Option<[u64; 2]>,
    pub passed: bool,
}

impl From<&DualityVerdict> for TableRow {
    fn from(v: &DualityVerdict) -> Self {
        let name = |r: &Option<PicardReport>| r.as_ref().map_or("-".to_string(), |r| {
            let s = r.summary();
            s.rsplit_once(' ').map_or(s.clone(), |(n, _)| n.to_string())
        });
        TableRow {
            id: v.id.clone(),
            pic_delta_prime: name(&v.pic_delta_prime),
            rank_disc_delta_prime: v.pic_delta_prime.as_ref().map(PicardReport::rank_disc),
            pic_delta: name(&v.pic_delta),
            rank_disc_delta: v.pic_delta.as_ref().map(PicardReport::rank_disc),
            passed: v.passed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ws(v: [i64; 5]) -> WeightSystem {
        WeightSystem::try_from(v.to_vec()).unwrap()
    }

    #[test]
    fn quartic_monomials_give_a_simplex() {
        let spec = MonomialSpec {
            basis: Some([[-1, 1, 0, 0], [-1, 0, 1, 0], [-1, 0, 0, 1]]),
            monomials: vec![[4, 0, 0, 0], [0, 4, 0, 0], [0, 0, 4, 0], [0, 0, 0, 4], [1, 1, 1, 1]],
        };
        let p = monomials_to_polytope(&ws([1, 1, 1, 1, 4]), &spec).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!(p.is_reflexive());
        assert!(p.vertices().contains(&LatticePoint3::new(3, -1, -1)));
        assert!(p.vertices().contains(&LatticePoint3::new(-1, -1, -1)));
    }

    #[test]
    fn origin_monomial_maps_to_origin() {
        let w = ws([1, 1, 1, 1, 4]);
        let solver = BasisSolver::new(&w.kernel_basis());
        assert_eq!(solver.solve(&[0, 0, 0, 0]), Some([0, 0, 0]));
    }

    #[test]
    fn ingestion_errors() {
        let w = ws([1, 1, 1, 1, 4]);
        let spec = MonomialSpec { basis: None, monomials: vec![[3, 0, 0, 0]] };
        assert!(matches!(monomials_to_polytope(&w, &spec), Err(DualityError::MonomialDegreeMismatch { .. })));
        let bad_basis = MonomialSpec { basis: Some([[-2, 2, 0, 0], [-1, 0, 1, 0], [-1, 0, 0, 1]]), monomials: vec![[4, 0, 0, 0]] };
        assert!(matches!(monomials_to_polytope(&w, &bad_basis), Err(DualityError::InvalidBasis(_))));
        assert!(WeightSystem::try_from(vec![1, 1, 1, 1]).is_err());
        assert!(WeightSystem::try_from(vec![1, 1, 1, 5, 5]).is_err());
    }

    #[test]
    fn point_outside_span() {
        // Degree 5 with weights summing to 4: e − 1 is never in M.
        let w = ws([1, 1, 1, 1, 5]);
        let spec = MonomialSpec { basis: None, monomials: vec![[5, 0, 0, 0]] };
        assert!(matches!(monomials_to_polytope(&w, &spec), Err(DualityError::PointNotInBasisSpan { .. })));
    }

    #[test]
    fn kernel_basis_is_saturated() {
        for w in [[1, 6, 8, 15], [3, 5, 11, 14], [7, 8, 9, 12]] {
            let w = WeightSystem { weights: w, degree: w.iter().sum() };
            let b = w.kernel_basis();
            check_basis(&w, &b).unwrap();
            let m = IntMatrix::from_rows(&b.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
            assert_eq!(snf(&m).invariant_factors()[2].abs(), BigInt::from(1));
        }
    }

    #[test]
    fn divisor_combinations() {
        assert_eq!(parse_combination("2D1-D2+2D4").unwrap(), vec![(1, 2), (2, -1), (4, 2)]);
        assert_eq!(parse_combination("-D3 + D5 - D12").unwrap(), vec![(3, -1), (5, 1), (12, -1)]);
        assert_eq!(parse_combination("D11-D4").unwrap(), vec![(11, 1), (4, -1)]);
        for bad in ["", "D", "2", "D0", "D1D2", "x"] {
            assert!(parse_combination(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn builtin_dataset_loads() {
        let pairs = builtin_pairs();
        assert_eq!(pairs.len(), 17);
        assert_eq!(find_pairs(&pairs, "15").len(), 1);
        assert_eq!(find_pairs(&pairs, "26").len(), 4);
        assert_eq!(find_pairs(&pairs, "19/c2").len(), 1);
        assert_eq!(find_pairs(&pairs, "38-40").len(), 2);
        assert!(find_pairs(&pairs, "7").is_empty());
        let no50 = find_pairs(&pairs, "50")[0];
        assert_eq!(no50.expected.pic_delta_prime, LatticeSpec::Named("<4>".parse().unwrap()));
        assert_eq!(no50.expected.pic_delta, LatticeSpec::Named("U+<-4>+E8^2".parse().unwrap()));
        for p in find_pairs(&pairs, "26") {
            assert_eq!(p.expected.rank_disc_delta, Some([10, 13]));
            assert_eq!(p.expected.rank_disc_delta_prime, Some([10, 13]));
        }
    }

    #[test]
    fn pair_round_trip_and_diagnostics() {
        let pairs = builtin_pairs();
        let text = serde_json::to_string_pretty(&pairs[0]).unwrap();
        assert_eq!(parse_pair(&text).unwrap(), pairs[0]);
        let err = parse_pair("{\n  \"id\": \"x\",\n  \"delta\": {\"weights\": [1,1,1]}\n}").unwrap_err();
        match err {
            DualityError::Parse(p) => {
                assert_eq!(p.line, 3);
                assert!(p.field.contains("delta.weights"), "{p}");
            }
            e => panic!("{e}"),
        }
        let mut wrong = pairs[0].clone();
        wrong.delta.monomials.as_mut().unwrap()[0] = [0, 0, 0, 3];
        let text = serde_json::to_string(&wrong).unwrap();
        assert!(matches!(parse_pair(&text), Err(DualityError::MonomialDegreeMismatch { .. })));
    }

    #[test]
    fn vertices_input_accepted() {
        let text = r#"{"id":"cube","delta":{"vertices":[[1,1,1],[1,1,-1],[1,-1,1],[1,-1,-1],[-1,1,1],[-1,1,-1],[-1,-1,1],[-1,-1,-1]]},
            "delta_prime":{"vertices":[[1,0,0],[-1,0,0],[0,1,0],[0,-1,0],[0,0,1],[0,0,-1]]},
            "expected":{"pic_delta":"U","pic_delta_prime":"U"}}"#;
        let pair = parse_pair(text).unwrap();
        let v = check_pair(&pair, SplitSearch::default());
        assert!(v.polytope_dual_ok);
        assert!(!v.expected_match_ok);
        assert!(!v.passed);
    }
}
