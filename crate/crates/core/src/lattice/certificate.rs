//! Explicit basis changes proving a lattice isometric to a named one.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{IntLattice, LatticeError, LatticeSpec, NamedLatticeExpr};
use crate::linalg::{IntCell, IntMatrix};

/// What a basis change is claimed to produce.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateTarget {
    /// Pᵀ G P equals the Gram of the expression, up to a signed reordering of P's columns.
    Exact(NamedLatticeExpr),
    /// The first two columns span a U block orthogonal to the rest, whose Gram matches the `LatticeSpec`.
    SplitU(LatticeSpec),
}

/// Columns of `p` are the new basis vectors, in the coordinates of the lattice's basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisCertificate {
    pub source: String,
    pub p: IntMatrix,
    pub target: CertificateTarget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateOutcome {
    pub holds: bool,
    pub unimodular: bool,
    pub det_p: IntCell,
    /// Pᵀ G P as computed.
    pub computed: IntMatrix,
    /// The signed reordering used when the Gram does not match as given:
    /// entry i = ±(1 + index of the column of P placed at position i).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reordering: Option<Vec<i64>>,
    pub detail: String,
}

pub fn verify_certificate(l: &IntLattice, cert: &BasisCertificate) -> Result<CertificateOutcome, LatticeError> {
    let n = l.rank();
    if cert.p.rows() != n {
        return Err(LatticeError::DimensionMismatch { expected: n, found: cert.p.rows() });
    }
    if cert.p.cols() != n {
        return Err(LatticeError::DimensionMismatch { expected: n, found: cert.p.cols() });
    }
    let computed = l.gram().congruent(&cert.p);
    let det_p = cert.p.det().expect("square");
    let unimodular = det_p.abs().is_one();
    let mut out = CertificateOutcome {
        holds: false,
        unimodular,
        det_p: IntCell(det_p),
        computed: computed.clone(),
        reordering: None,
        detail: String::new(),
    };
    match &cert.target {
        CertificateTarget::Exact(expr) => {
            let target = expr.gram();
            if target.rows() != n {
                return Err(LatticeError::DimensionMismatch { expected: n, found: target.rows() });
            }
            if computed == target {
                out.holds = unimodular;
                out.detail = format!("PᵀGP = {} exactly", expr.pretty());
            } else if let Some(perm) = signed_reordering(&computed, &target) {
                out.holds = unimodular;
                out.detail = format!("PᵀGP = {} after a signed reordering of P", expr.pretty());
                out.reordering = Some(perm);
            } else {
                out.detail = format!("PᵀGP is not a signed reordering of {}", expr.pretty());
            }
        }
        CertificateTarget::SplitU(spec) => {
            if n < 2 {
                return Err(LatticeError::DimensionMismatch { expected: 2, found: n });
            }
            let u = IntMatrix::from_i64(&[&[0, 1], &[1, 0]]);
            let head: Vec<usize> = vec![0, 1];
            let tail: Vec<usize> = (2..n).collect();
            let u_ok = computed.submatrix(&head, &head) == u;
            let orth = computed.submatrix(&head, &tail).is_zero();
            let rest = IntLattice::new(computed.submatrix(&tail, &tail))?;
            let rest_ok = spec.matches(&rest)?;
            out.holds = unimodular && u_ok && orth && rest_ok;
            out.detail = format!(
                "U block {}, orthogonal {}, complement {} {}",
                if u_ok { "exact" } else { "wrong" },
                if orth { "yes" } else { "no" },
                if rest_ok { "matches" } else { "does not match" },
                spec
            );
        }
    }
    Ok(out)
}

/// Finds π, ε with ε_i ε_j A[π i][π j] = T[i][j].
fn signed_reordering(a: &IntMatrix, t: &IntMatrix) -> Option<Vec<i64>> {
    let n = a.rows();
    let mut pi = Vec::with_capacity(n);
    let mut used = vec![false; n];
    if place(0, a, t, &mut pi, &mut used) {
        let signs = signs_for(a, t, &pi)?;
        return Some(pi.iter().zip(signs).map(|(&p, s)| s * (p as i64 + 1)).collect());
    }
    None
}

fn place(i: usize, a: &IntMatrix, t: &IntMatrix, pi: &mut Vec<usize>, used: &mut [bool]) -> bool {
    let n = a.rows();
    if i == n {
        return signs_for(a, t, pi).is_some();
    }
    for c in 0..n {
        if used[c] || a.get(c, c) != t.get(i, i) {
            continue;
        }
        if (0..i).all(|j| a.get(c, pi[j]).abs() == t.get(i, j).abs()) {
            used[c] = true;
            pi.push(c);
            if place(i + 1, a, t, pi, used) {
                return true;
            }
            pi.pop();
            used[c] = false;
        }
    }
    false
}

/// Propagates the sign constraints along nonzero entries of T.
fn signs_for(a: &IntMatrix, t: &IntMatrix, pi: &[usize]) -> Option<Vec<i64>> {
    let n = pi.len();
    let mut sign = vec![0i64; n];
    for root in 0..n {
        if sign[root] != 0 {
            continue;
        }
        sign[root] = 1;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let tij = t.get(i, j);
                if i == j || tij.is_zero() {
                    continue;
                }
                let need = if *a.get(pi[i], pi[j]) == *tij { sign[i] } else { -sign[i] };
                if sign[j] == 0 {
                    sign[j] = need;
                    stack.push(j);
                } else if sign[j] != need {
                    return None;
                }
            }
        }
    }
    Some(sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn lat(s: &str) -> IntLattice {
        IntLattice::from_expr(&s.parse().unwrap())
    }

    #[test]
    fn identity_certificate() {
        let l = lat("U+A1+E8");
        let cert = BasisCertificate {
            source: "identity".into(),
            p: IntMatrix::identity(11),
            target: CertificateTarget::Exact("U+A1+E8".parse().unwrap()),
        };
        let out = verify_certificate(&l, &cert).unwrap();
        assert!(out.holds && out.reordering.is_none());
    }

    #[test]
    fn reordered_and_negated_columns() {
        // Columns: -e3, e1, e2 of A1+U gives U+A1 after reordering.
        let l = lat("A1+U");
        let p = IntMatrix::from_i64(&[&[0, 1, 0], &[-1, 0, 0], &[0, 0, -1]]);
        let cert = BasisCertificate { source: "t".into(), p, target: CertificateTarget::Exact("U+A1".parse().unwrap()) };
        let out = verify_certificate(&l, &cert).unwrap();
        assert!(out.holds, "{out:?}");
        assert!(out.reordering.is_some());
    }

    #[test]
    fn wrong_target_and_non_unimodular() {
        let l = lat("U+A1");
        let cert = BasisCertificate {
            source: "t".into(),
            p: IntMatrix::identity(3),
            target: CertificateTarget::Exact("U+<2>".parse().unwrap()),
        };
        assert!(!verify_certificate(&l, &cert).unwrap().holds);
        let p = IntMatrix::from_i64(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 2]]);
        let cert = BasisCertificate { source: "t".into(), p, target: CertificateTarget::Exact("U+<-8>".parse().unwrap()) };
        let out = verify_certificate(&l, &cert).unwrap();
        assert!(!out.holds && !out.unimodular);
        let cert = BasisCertificate {
            source: "t".into(),
            p: IntMatrix::identity(2),
            target: CertificateTarget::Exact("U".parse().unwrap()),
        };
        assert!(matches!(verify_certificate(&l, &cert), Err(LatticeError::DimensionMismatch { .. })));
    }

    #[test]
    fn split_u_mode() {
        let l = lat("U+E7+E8");
        let cert = BasisCertificate {
            source: "t".into(),
            p: IntMatrix::identity(17),
            target: CertificateTarget::SplitU(LatticeSpec::Named("E8+E7".parse().unwrap())),
        };
        assert!(verify_certificate(&l, &cert).unwrap().holds);
        let cert = BasisCertificate {
            source: "t".into(),
            p: IntMatrix::identity(17),
            target: CertificateTarget::SplitU(LatticeSpec::Named("A1+E8+D6".parse().unwrap())),
        };
        assert!(!verify_certificate(&l, &cert).unwrap().holds);
    }

    #[test]
    fn e8_in_another_labelling() {
        // Reverse the Bourbaki node order: still E8 after reordering.
        let l = lat("E8");
        let p = IntMatrix::from_fn(8, 8, |i, j| BigInt::from(i64::from(i + j == 7)));
        let cert = BasisCertificate { source: "t".into(), p, target: CertificateTarget::Exact("E8".parse().unwrap()) };
        assert!(verify_certificate(&l, &cert).unwrap().holds);
    }
}
