//! Command implementations behind the `toricdual` binary.
//!
//! Every command produces a [`ReportEnvelope`] plus an exit status. Rendering to
//! text or JSON happens in [`Outcome::render`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use toricdual::duality::{
    builtin_pairs_text, check_pair, find_pairs, parse_pair, parse_pairs, parse_side, verify_pair_certificate,
    CertificateResult, CouplingPair, DualityError, DualityVerdict, PicardReport, Side, SideSpec, TableRow,
};
use toricdual::lattice::SplitSearch;
use toricdual::polytope::{LatticePoint3, Polytope3, PolytopeError};
use toricdual::toric::ToricError;

mod render;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NOT_REFLEXIVE: i32 = 3;
pub const EXIT_NONTRIVIAL_L0: i32 = 4;

/// Environment variable naming a JSON file that replaces the embedded dataset.
pub const DATA_ENV: &str = "TORICDUAL_DATA";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub command: String,
    /// SHA-256 of the input bytes, hex encoded.
    pub inputs_digest: String,
    pub results: serde_json::Value,
    pub warnings: Vec<String>,
    pub exit_status: i32,
}

impl ReportEnvelope {
    /// Pretty JSON with keys sorted at every level.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("envelope serializes");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

/// Output of `dual`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualReport {
    pub vertices: Vec<LatticePoint3>,
    /// Vertices of the polar dual as exact fractions; absent when the origin is not interior.
    pub dual_vertices: Option<Vec<[String; 3]>>,
    pub reflexive: bool,
    pub l0: Option<usize>,
}

/// Output of `verify-cert` for one pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCertificates {
    pub id: String,
    pub results: Vec<CertificateResult>,
}

/// A polytope given directly, or one side of a pair.
#[derive(Clone, Debug, Default)]
pub struct PolytopeInput {
    pub file: Option<PathBuf>,
    pub builtin: Option<String>,
    pub side: Option<Side>,
}

/// One or more pairs: a file, a builtin id, or every builtin.
#[derive(Clone, Debug, Default)]
pub struct PairInput {
    pub file: Option<PathBuf>,
    pub builtin: Option<String>,
    pub all: bool,
}

/// A finished command: the envelope plus the text rendering.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub envelope: ReportEnvelope,
    pub text: String,
    /// Diagnostic for stderr, set when the command could not run.
    pub error: Option<String>,
}

impl Outcome {
    pub fn exit_status(&self) -> i32 {
        self.envelope.exit_status
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            self.envelope.to_json()
        } else {
            self.text.clone()
        }
    }

    fn failure(command: &str, digest: String, status: i32, message: String) -> Outcome {
        Outcome {
            envelope: ReportEnvelope {
                command: command.into(),
                inputs_digest: digest,
                results: serde_json::Value::Null,
                warnings: vec![message.clone()],
                exit_status: status,
            },
            text: String::new(),
            error: Some(message),
        }
    }
}

/// Input text and its digest.
struct Loaded {
    text: String,
    digest: String,
}

fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Dataset text: `TORICDUAL_DATA` when set, else the embedded pairs.
fn dataset() -> Result<Loaded, String> {
    let text = match std::env::var_os(DATA_ENV) {
        Some(path) => read_file(Path::new(&path))?,
        None => builtin_pairs_text().to_string(),
    };
    let digest = digest(&[&text]);
    Ok(Loaded { text, digest })
}

fn builtin_selection(query: Option<&str>) -> Result<(Vec<CouplingPair>, String), (i32, String, String)> {
    let data = dataset().map_err(|e| (EXIT_PARSE, String::new(), e))?;
    let pairs = parse_pairs(&data.text).map_err(|e| (EXIT_PARSE, data.digest.clone(), format!("dataset: {e}")))?;
    let Some(q) = query else {
        return Ok((pairs, data.digest));
    };
    let selected: Vec<CouplingPair> = find_pairs(&pairs, q).into_iter().cloned().collect();
    if selected.is_empty() {
        return Err((EXIT_PARSE, data.digest, format!("no builtin pair matches {q:?}")));
    }
    Ok((selected, digest(&[&data.text, q])))
}

/// Pair file holding either one pair object or an array of pairs.
fn pairs_from_file(path: &Path) -> Result<(Vec<CouplingPair>, String), (i32, String, String)> {
    let text = read_file(path).map_err(|e| (EXIT_PARSE, String::new(), e))?;
    let d = digest(&[&text]);
    let is_array = text.trim_start().starts_with('[');
    let pairs = if is_array { parse_pairs(&text) } else { parse_pair(&text).map(|p| vec![p]) };
    pairs.map(|p| (p, d.clone())).map_err(|e| (status_for(&e), d, format!("{}: {e}", path.display())))
}

fn select_pairs(input: &PairInput) -> Result<(Vec<CouplingPair>, String), (i32, String, String)> {
    match (&input.file, &input.builtin, input.all) {
        (Some(f), None, false) => pairs_from_file(f),
        (None, Some(q), false) => builtin_selection(Some(q)),
        (None, None, true) => builtin_selection(None),
        _ => Err((EXIT_PARSE, String::new(), "give exactly one of FILE, --builtin ID, --all".into())),
    }
}

fn select_polytope(input: &PolytopeInput) -> Result<(SideSpec, String), (i32, String, String)> {
    let side = input.side.unwrap_or(Side::Delta);
    match (&input.file, &input.builtin) {
        (Some(path), None) => {
            let text = read_file(path).map_err(|e| (EXIT_PARSE, String::new(), e))?;
            let d = digest(&[&text]);
            let looks_like_pair = serde_json::from_str::<serde_json::Value>(&text)
                .map(|v| v.get("delta").is_some())
                .unwrap_or(false);
            let spec = if looks_like_pair {
                parse_pair(&text).map(|p| p.side(side).clone())
            } else {
                parse_side(&text)
            };
            spec.map(|s| (s, d.clone())).map_err(|e| (status_for(&e), d, format!("{}: {e}", path.display())))
        }
        (None, Some(q)) => {
            let (pairs, d) = builtin_selection(Some(q))?;
            if pairs.len() > 1 {
                let ids: Vec<&str> = pairs.iter().map(|p| p.id.as_str()).collect();
                return Err((EXIT_PARSE, d, format!("{q:?} is ambiguous: {}", ids.join(", "))));
            }
            let d = digest(&[&d, &side.to_string()]);
            Ok((pairs[0].side(side).clone(), d))
        }
        _ => Err((EXIT_PARSE, String::new(), "give exactly one of FILE or --builtin ID".into())),
    }
}

/// Exit status for a library error.
pub fn status_for(e: &DualityError) -> i32 {
    match e {
        DualityError::Parse(_)
        | DualityError::Io { .. }
        | DualityError::InvalidSide(_)
        | DualityError::InvalidBasis(_)
        | DualityError::MonomialDegreeMismatch { .. }
        | DualityError::PointNotInBasisSpan { .. } => EXIT_PARSE,
        DualityError::Polytope(PolytopeError::NotReflexive | PolytopeError::OriginNotInterior)
        | DualityError::Toric(ToricError::NotReflexive)
        | DualityError::Toric(ToricError::Polytope(PolytopeError::NotReflexive | PolytopeError::OriginNotInterior)) => {
            EXIT_NOT_REFLEXIVE
        }
        DualityError::Toric(ToricError::NontrivialToricContribution(_)) => EXIT_NONTRIVIAL_L0,
        _ => EXIT_FAILED,
    }
}

fn to_value<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("reports serialize")
}

pub fn dual_report(p: &Polytope3) -> DualReport {
    let dual = p.polar_dual().ok();
    let reflexive = p.is_reflexive();
    DualReport {
        vertices: p.vertices().to_vec(),
        dual_vertices: dual.map(|d| d.vertices.iter().map(|v| v.map(|x| x.to_string())).collect()),
        reflexive,
        l0: if reflexive { p.toric_contribution().ok() } else { None },
    }
}

pub fn cmd_dual(input: &PolytopeInput, require_reflexive: bool) -> Outcome {
    let (spec, d) = match select_polytope(input) {
        Ok(x) => x,
        Err((status, d, msg)) => return Outcome::failure("dual", d, status, msg),
    };
    let p = match spec.polytope() {
        Ok(p) => p,
        Err(e) => return Outcome::failure("dual", d, EXIT_PARSE, e.to_string()),
    };
    let report = dual_report(&p);
    let mut warnings = Vec::new();
    let status = if report.reflexive {
        EXIT_OK
    } else {
        warnings.push("polytope is not reflexive".to_string());
        if require_reflexive { EXIT_NOT_REFLEXIVE } else { EXIT_OK }
    };
    Outcome {
        text: render::dual(&report),
        envelope: ReportEnvelope {
            command: "dual".into(),
            inputs_digest: d,
            results: to_value(&report),
            warnings,
            exit_status: status,
        },
        error: None,
    }
}

pub fn cmd_analyze(input: &PolytopeInput, search: SplitSearch) -> Outcome {
    let (spec, d) = match select_polytope(input) {
        Ok(x) => x,
        Err((status, d, msg)) => return Outcome::failure("analyze", d, status, msg),
    };
    let report: Result<PicardReport, DualityError> =
        spec.polytope().and_then(|p| toricdual::duality::analyze_family(&p, search));
    match report {
        Err(e) => Outcome::failure("analyze", d, status_for(&e), e.to_string()),
        Ok(r) => {
            let mut warnings = Vec::new();
            if r.split_u.is_none() {
                warnings.push("no hyperbolic plane split off within the search bound".to_string());
            }
            Outcome {
                text: render::picard(&r),
                envelope: ReportEnvelope {
                    command: "analyze".into(),
                    inputs_digest: d,
                    results: to_value(&r),
                    warnings,
                    exit_status: EXIT_OK,
                },
                error: None,
            }
        }
    }
}

/// Runs `check_pair` concurrently, keeping input order.
pub fn verdicts(pairs: &[CouplingPair], search: SplitSearch) -> Vec<DualityVerdict> {
    pairs.par_iter().map(|p| check_pair(p, search)).collect()
}

pub fn cmd_check_pair(input: &PairInput, search: SplitSearch) -> Outcome {
    let (pairs, d) = match select_pairs(input) {
        Ok(x) => x,
        Err((status, d, msg)) => return Outcome::failure("check-pair", d, status, msg),
    };
    let verdicts = verdicts(&pairs, search);
    let warnings: Vec<String> = verdicts
        .iter()
        .flat_map(|v| v.warnings.iter().chain(&v.errors).map(move |w| format!("{}: {w}", v.id)))
        .collect();
    let status = if verdicts.iter().all(|v| v.passed) { EXIT_OK } else { EXIT_FAILED };
    let text = if verdicts.len() == 1 {
        render::verdict(&verdicts[0])
    } else {
        let mut t = render::table(&verdicts.iter().map(TableRow::from).collect::<Vec<_>>());
        for v in verdicts.iter().filter(|v| !v.passed) {
            t.push('\n');
            t.push_str(&render::verdict(v));
        }
        t
    };
    Outcome {
        text,
        envelope: ReportEnvelope {
            command: "check-pair".into(),
            inputs_digest: d,
            results: to_value(&verdicts),
            warnings,
            exit_status: status,
        },
        error: None,
    }
}

pub fn cmd_verify_cert(input: &PairInput) -> Outcome {
    let (pairs, d) = match select_pairs(input) {
        Ok(x) => x,
        Err((status, d, msg)) => return Outcome::failure("verify-cert", d, status, msg),
    };
    let reports: Vec<PairCertificates> = pairs
        .par_iter()
        .map(|p| PairCertificates {
            id: p.id.clone(),
            results: p.certificates.iter().map(|c| verify_pair_certificate(p, c)).collect(),
        })
        .collect();
    let warnings: Vec<String> =
        reports.iter().filter(|r| r.results.is_empty()).map(|r| format!("{}: no certificates", r.id)).collect();
    let ok = reports.iter().all(|r| r.results.iter().all(|c| c.holds));
    let mut text = String::new();
    for r in &reports {
        text.push_str(&render::certificates(r));
    }
    for w in &warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    Outcome {
        text,
        envelope: ReportEnvelope {
            command: "verify-cert".into(),
            inputs_digest: d,
            results: to_value(&reports),
            warnings,
            exit_status: if ok { EXIT_OK } else { EXIT_FAILED },
        },
        error: None,
    }
}

/// Table rows recomputed from scratch for every selected pair.
pub fn cmd_table(input: &PairInput, search: SplitSearch) -> Outcome {
    let input = if input.file.is_none() && input.builtin.is_none() {
        PairInput { all: true, ..input.clone() }
    } else {
        input.clone()
    };
    let (pairs, d) = match select_pairs(&input) {
        Ok(x) => x,
        Err((status, d, msg)) => return Outcome::failure("table", d, status, msg),
    };
    let verdicts = verdicts(&pairs, search);
    let rows: Vec<TableRow> = verdicts.iter().map(TableRow::from).collect();
    let warnings: Vec<String> =
        verdicts.iter().flat_map(|v| v.errors.iter().map(move |e| format!("{}: {e}", v.id))).collect();
    Outcome {
        text: render::table(&rows),
        envelope: ReportEnvelope {
            command: "table".into(),
            inputs_digest: d,
            results: to_value(&rows),
            warnings,
            exit_status: if rows.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_FAILED },
        },
        error: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_status_mapping() {
        let parse = DualityError::InvalidSide("x".into());
        assert_eq!(status_for(&parse), EXIT_PARSE);
        assert_eq!(status_for(&ToricError::NotReflexive.into()), EXIT_NOT_REFLEXIVE);
        assert_eq!(status_for(&ToricError::NontrivialToricContribution(4).into()), EXIT_NONTRIVIAL_L0);
        assert_eq!(status_for(&DualityError::InvariantViolation("x".into())), EXIT_FAILED);
    }

    #[test]
    fn envelope_round_trip() {
        let env = ReportEnvelope {
            command: "dual".into(),
            inputs_digest: digest(&["abc"]),
            results: serde_json::json!({"z": 1, "a": [1, 2]}),
            warnings: vec!["w".into()],
            exit_status: 0,
        };
        let text = env.to_json();
        assert!(text.find("\"command\"").unwrap() < text.find("\"warnings\"").unwrap());
        assert!(text.find("\"a\"").unwrap() < text.find("\"z\"").unwrap());
        assert_eq!(serde_json::from_str::<ReportEnvelope>(&text).unwrap(), env);
        assert_eq!(env.inputs_digest.len(), 64);
    }

    #[test]
    fn dual_report_of_simplex() {
        let pts: Vec<LatticePoint3> =
            [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]].iter().map(|&[x, y, z]| LatticePoint3::new(x, y, z)).collect();
        let r = dual_report(&Polytope3::hull(&pts).unwrap());
        assert!(r.reflexive);
        assert_eq!(r.l0, Some(0));
        assert!(r.dual_vertices.unwrap().contains(&["3".to_string(), "-1".into(), "-1".into()]));
        let text = render::dual(&dual_report(&Polytope3::hull(&pts).unwrap()));
        assert!(text.contains("reflexive: yes"));
    }

    #[test]
    fn selection_needs_exactly_one_source() {
        let both = PairInput { file: Some("x".into()), builtin: Some("15".into()), all: false };
        assert_eq!(select_pairs(&both).unwrap_err().0, EXIT_PARSE);
        let (pairs, _) = select_pairs(&PairInput { builtin: Some("26".into()), ..Default::default() }).unwrap();
        assert_eq!(pairs.len(), 4);
    }
}
