//! Formal direct sums of standard lattices and their Gram matrices.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::LatticeError;
use crate::linalg::IntMatrix;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// Hyperbolic plane [[0,1],[1,0]].
    U,
    /// Negative-definite root lattice A_n.
    A(usize),
    /// Negative-definite root lattice D_n, n ≥ 4.
    D(usize),
    E6,
    E7,
    E8,
    /// Rank-one lattice ⟨k⟩ with its literal sign.
    Angle(i64),
    Gram(IntMatrix),
}

impl Atom {
    pub fn gram(&self) -> IntMatrix {
        match self {
            Atom::U => IntMatrix::from_i64(&[&[0, 1], &[1, 0]]),
            Atom::A(n) => root_gram(*n, &(1..*n).map(|i| (i - 1, i)).collect::<Vec<_>>()),
            Atom::D(n) => {
                let mut edges: Vec<(usize, usize)> = (1..n - 1).map(|i| (i - 1, i)).collect();
                edges.push((n - 3, n - 1));
                root_gram(*n, &edges)
            }
            Atom::E6 | Atom::E7 | Atom::E8 => {
                let n = self.rank();
                // Bourbaki labelling 1..n: 1-3, 3-4, 4-5, ..., (n-1)-n, and 2-4.
                let mut edges = vec![(0, 2), (1, 3)];
                edges.extend((2..n - 1).map(|i| (i, i + 1)));
                root_gram(n, &edges)
            }
            Atom::Angle(k) => IntMatrix::from_i64(&[&[*k]]),
            Atom::Gram(g) => g.clone(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Atom::U => 2,
            Atom::A(n) | Atom::D(n) => *n,
            Atom::E6 => 6,
            Atom::E7 => 7,
            Atom::E8 => 8,
            Atom::Angle(_) => 1,
            Atom::Gram(g) => g.rows(),
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, pretty: bool) -> fmt::Result {
        match self {
            Atom::U => write!(f, "U"),
            Atom::A(n) => write!(f, "A{n}"),
            Atom::D(n) => write!(f, "D{n}"),
            Atom::E6 => write!(f, "E6"),
            Atom::E7 => write!(f, "E7"),
            Atom::E8 => write!(f, "E8"),
            Atom::Angle(k) if pretty => write!(f, "⟨{k}⟩"),
            Atom::Angle(k) => write!(f, "<{k}>"),
            Atom::Gram(g) => {
                let rows: Vec<String> = g
                    .to_rows()
                    .iter()
                    .map(|r| format!("[{}]", r.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")))
                    .collect();
                write!(f, "gram:[{}]", rows.join(","))
            }
        }
    }
}

/// Negated Cartan matrix of a simply-laced diagram.
fn root_gram(n: usize, edges: &[(usize, usize)]) -> IntMatrix {
    let mut g = IntMatrix::diagonal(&vec![BigInt::from(-2); n]);
    for &(a, b) in edges {
        g.set(a, b, BigInt::from(1));
        g.set(b, a, BigInt::from(1));
    }
    g
}

/// Direct sum of atoms with multiplicities, e.g. `U+A1+E8`, `U+E8^2`, `<2>`, `gram:[[2,1],[1,-2]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NamedLatticeExpr {
    pub terms: Vec<(Atom, usize)>,
}

impl NamedLatticeExpr {
    pub fn gram(&self) -> IntMatrix {
        let blocks: Vec<IntMatrix> =
            self.terms.iter().flat_map(|(a, m)| std::iter::repeat_n(a.gram(), *m)).collect();
        IntMatrix::block_diag(&blocks)
    }

    pub fn rank(&self) -> usize {
        self.terms.iter().map(|(a, m)| a.rank() * m).sum()
    }

    /// Rendering with ⊕ and ⟨k⟩, as in printed tables.
    pub fn pretty(&self) -> String {
        struct P<'a>(&'a NamedLatticeExpr);
        impl fmt::Display for P<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.write(f, true)
            }
        }
        P(self).to_string()
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, pretty: bool) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (atom, mult)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, "{}", if pretty { "⊕" } else { "+" })?;
            }
            atom.write(f, pretty)?;
            if *mult > 1 {
                write!(f, "^{mult}")?;
            }
        }
        Ok(())
    }
}

/// Gram matrix of a named expression.
pub fn named_gram(expr: &NamedLatticeExpr) -> IntMatrix {
    expr.gram()
}

impl fmt::Display for NamedLatticeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, false)
    }
}

fn parse_atom(s: &str) -> Result<Atom, LatticeError> {
    let bad = || LatticeError::Parse(format!("unknown lattice atom '{s}'"));
    if s == "U" {
        return Ok(Atom::U);
    }
    if let Some(body) = s.strip_prefix("gram:") {
        let rows: Vec<Vec<i64>> =
            serde_json::from_str(body).map_err(|e| LatticeError::Parse(format!("bad gram block '{body}': {e}")))?;
        let cols = rows.first().map_or(0, Vec::len);
        let g = IntMatrix::try_from_rows(&rows, cols).map_err(|e| LatticeError::Parse(e.to_string()))?;
        if !g.is_symmetric() || g.rows() == 0 {
            return Err(LatticeError::Parse(format!("gram block '{body}' is not a nonempty symmetric matrix")));
        }
        return Ok(Atom::Gram(g));
    }
    let angle = s.strip_prefix('<').and_then(|t| t.strip_suffix('>'));
    let angle = angle.or_else(|| s.strip_prefix('⟨').and_then(|t| t.strip_suffix('⟩')));
    if let Some(k) = angle {
        let k: i64 = k.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(LatticeError::Parse("⟨0⟩ is degenerate".into()));
        }
        return Ok(Atom::Angle(k));
    }
    let (head, num) = s.split_at(1.min(s.len()));
    let n: usize = num.parse().map_err(|_| bad())?;
    match (head, n) {
        ("A", n) if n >= 1 => Ok(Atom::A(n)),
        ("D", n) if n >= 4 => Ok(Atom::D(n)),
        ("E", 6) => Ok(Atom::E6),
        ("E", 7) => Ok(Atom::E7),
        ("E", 8) => Ok(Atom::E8),
        _ => Err(bad()),
    }
}

impl FromStr for NamedLatticeExpr {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let compact = compact.replace('⊕', "+");
        if compact.is_empty() {
            return Err(LatticeError::Parse("empty lattice expression".into()));
        }
        let mut terms = Vec::new();
        for part in compact.split('+') {
            if part.is_empty() {
                return Err(LatticeError::Parse(format!("empty summand in '{s}'")));
            }
            let (base, mult) = match part.rsplit_once('^') {
                Some((b, m)) if !b.starts_with("gram:") || b.ends_with(']') => {
                    let m: usize = m.parse().map_err(|_| LatticeError::Parse(format!("bad multiplicity in '{part}'")))?;
                    if m == 0 {
                        return Err(LatticeError::Parse(format!("zero multiplicity in '{part}'")));
                    }
                    (b, m)
                }
                _ => (part, 1),
            };
            terms.push((parse_atom(base)?, mult));
        }
        Ok(NamedLatticeExpr { terms })
    }
}

impl Serialize for NamedLatticeExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NamedLatticeExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{signature, Signature};

    fn e(s: &str) -> NamedLatticeExpr {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_prints() {
        for s in ["U+A1+E8", "<2>", "U+U+E8^2", "gram:[[2,1],[1,-2]]", "U+<-4>+E8^2", "D6"] {
            assert_eq!(e(s).to_string(), s);
        }
        assert_eq!(e(" U + E8 ^ 2 "), e("U+E8^2"));
        assert_eq!(e("U⊕⟨−2⟩".replace('−', "-").as_str()), e("U+<-2>"));
        assert_eq!(e("U+<-2>+E8^2").pretty(), "U⊕⟨-2⟩⊕E8^2");
        assert!("U++E8".parse::<NamedLatticeExpr>().is_err());
        assert!("A0".parse::<NamedLatticeExpr>().is_err());
        assert!("<0>".parse::<NamedLatticeExpr>().is_err());
        assert!("F4".parse::<NamedLatticeExpr>().is_err());
        assert!("gram:[[1,2],[3,4]]".parse::<NamedLatticeExpr>().is_err());
    }

    #[test]
    fn standard_grams() {
        let u = named_gram(&e("U"));
        assert_eq!(u, IntMatrix::from_i64(&[&[0, 1], &[1, 0]]));
        assert_eq!(signature(&u), Signature { pos: 1, neg: 1, zero: 0 });
        let a1 = named_gram(&e("A1"));
        assert_eq!(a1, IntMatrix::from_i64(&[&[-2]]));
        assert_eq!(a1.det().unwrap(), BigInt::from(-2));
        let e8 = named_gram(&e("E8"));
        assert_eq!(e8.rows(), 8);
        assert_eq!(e8.det().unwrap(), BigInt::from(1));
        assert_eq!(signature(&e8), Signature { pos: 0, neg: 8, zero: 0 });
        assert_eq!(named_gram(&e("E7")).det().unwrap(), BigInt::from(-2));
        assert_eq!(named_gram(&e("E6")).det().unwrap(), BigInt::from(3));
        assert_eq!(named_gram(&e("A2")).det().unwrap(), BigInt::from(3));
        assert_eq!(named_gram(&e("D6")).det().unwrap(), BigInt::from(4));
        assert_eq!(named_gram(&e("U+E7")).det().unwrap(), BigInt::from(2));
        assert_eq!(e("U+U+E8^2").rank(), 20);
    }
}
