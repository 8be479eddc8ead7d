//! Plain-text rendering in ⊕ notation.

use std::fmt::Write as _;

use toricdual::duality::{DualityVerdict, PicardReport, TableRow};
use toricdual::linalg::IntMatrix;

use crate::{DualReport, PairCertificates};

fn yes(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn indented(m: &IntMatrix, pad: &str) -> String {
    m.to_string().lines().map(|l| format!("{pad}{l}\n")).collect()
}

fn rank_disc(rd: Option<[u64; 2]>) -> String {
    rd.map_or("-".into(), |[r, d]| format!("({r},{d})"))
}

pub fn dual(r: &DualReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vertices ({}):", r.vertices.len());
    for v in &r.vertices {
        let _ = writeln!(s, "  {v}");
    }
    match &r.dual_vertices {
        Some(dv) => {
            let _ = writeln!(s, "polar dual vertices ({}):", dv.len());
            for v in dv {
                let _ = writeln!(s, "  ({})", v.join(","));
            }
        }
        None => s.push_str("polar dual: origin is not an interior point\n"),
    }
    let _ = writeln!(s, "reflexive: {}", if r.reflexive { "yes" } else { "no" });
    let _ = writeln!(s, "L0: {}", r.l0.map_or("-".into(), |l| l.to_string()));
    s
}

pub fn picard(r: &PicardReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Pic = {}", r.summary());
    let _ = writeln!(
        s,
        "  ρ = {} ({} rays, {} facet-interior), mirror rank from Newton polytope edges {}, L0 = {}",
        r.rho, r.rays, r.facet_interior_rays, r.rho_formula, r.l0
    );
    let rays: Vec<String> = r.basis_rays.iter().map(ToString::to_string).collect();
    let _ = writeln!(s, "  basis rays: {}", rays.join(" "));
    let _ = writeln!(s, "  signature {}, det {}, {}", r.signature, r.det.0, if r.even { "even" } else { "odd" });
    let _ = writeln!(s, "  invariants: {}", r.invariants);
    if let Some(q) = &r.discriminant_form {
        let _ = writeln!(s, "  discriminant form: {q}");
    }
    let _ = writeln!(s, "  Nikulin: {}{}", r.nikulin, if r.nikulin.holds { "" } else { " (not satisfied)" });
    s.push_str("  Gram:\n");
    s.push_str(&indented(&r.gram, "    "));
    match &r.split_u {
        Some(u) => {
            let name = u.complement_name.as_ref().map_or("L̃".into(), |n| n.pretty());
            let _ = writeln!(s, "  U split-off: Pic = U⊕{name}, L̃: {}", u.complement);
            let _ = writeln!(s, "  L̃ Nikulin: {}", u.complement_nikulin);
        }
        None => s.push_str("  U split-off: not found within the search bound\n"),
    }
    s
}

pub fn verdict(v: &DualityVerdict) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "No. {}", v.id);
    let map = v.gl3z_map.map_or(String::new(), |m| format!(" via {m:?}"));
    let _ = writeln!(s, "  polytope duality   {}{map}", yes(v.polytope_dual_ok));
    let l0: Vec<String> = v.l0.iter().map(|l| l.map_or("-".into(), |x| x.to_string())).collect();
    let _ = writeln!(s, "  L0 trivial         {} (Δ {}, Δ′ {})", yes(v.l0_trivial_ok), l0[0], l0[1]);
    for (label, report, exp) in [("Pic Δ ", &v.pic_delta, &v.expected[0]), ("Pic Δ′", &v.pic_delta_prime, &v.expected[1])] {
        let got = report.as_ref().map_or("-".into(), PicardReport::summary);
        let _ = writeln!(
            s,
            "  {label}             {} {got}, expected {} {}",
            yes(exp.ok),
            exp.expected,
            rank_disc(exp.expected_rank_disc)
        );
    }
    let duality = v.duality.as_ref().map_or(String::new(), |d| {
        format!(
            " (rank {}, signature ({},{}), forms anti-isometric: {})",
            d.rank_sum, d.signature_sum[0], d.signature_sum[1], d.forms_anti_isometric
        )
    });
    let _ = writeln!(s, "  lattice duality    {}{duality}", yes(v.lattice_duality_ok));
    match v.certificate_ok {
        None => s.push_str("  certificates       none\n"),
        Some(ok) => {
            let n = v.certificates.iter().filter(|c| c.holds).count();
            let _ = writeln!(s, "  certificates       {} {n}/{}", yes(ok), v.certificates.len());
        }
    }
    for w in &v.warnings {
        let _ = writeln!(s, "  warning: {w}");
    }
    for e in &v.errors {
        let _ = writeln!(s, "  error: {e}");
    }
    let _ = writeln!(s, "  verdict            {}", if v.passed { "PASS" } else { "FAIL" });
    s
}

pub fn table(rows: &[TableRow]) -> String {
    let mut s = String::new();
    let w_id = rows.iter().map(|r| r.id.chars().count()).max().unwrap_or(3).max(3);
    let w_p = rows.iter().map(|r| r.pic_delta_prime.chars().count()).max().unwrap_or(6).max(6);
    let w_d = rows.iter().map(|r| r.pic_delta.chars().count()).max().unwrap_or(5).max(5);
    let pad = |t: &str, w: usize| format!("{t}{}", " ".repeat(w.saturating_sub(t.chars().count())));
    let _ = writeln!(
        s,
        "{}  {}  {}  {}  {}  verdict",
        pad("No.", w_id),
        pad("Pic Δ′", w_p),
        pad("(rk,|disc|)", 11),
        pad("Pic Δ", w_d),
        pad("(rk,|disc|)", 11)
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{}  {}  {}  {}  {}  {}",
            pad(&r.id, w_id),
            pad(&r.pic_delta_prime, w_p),
            pad(&rank_disc(r.rank_disc_delta_prime), 11),
            pad(&r.pic_delta, w_d),
            pad(&rank_disc(r.rank_disc_delta), 11),
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    let passed = rows.iter().filter(|r| r.passed).count();
    let _ = writeln!(s, "{passed}/{} pass", rows.len());
    s
}

pub fn certificates(r: &PairCertificates) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "No. {}", r.id);
    for c in &r.results {
        let target = match &c.target {
            toricdual::lattice::CertificateTarget::Exact(e) => e.pretty(),
            toricdual::lattice::CertificateTarget::SplitU(spec) => format!("U⊕[{spec}]"),
        };
        let _ = writeln!(s, "  {} certificate → {target}: {}", c.side, if c.holds { "pass" } else { "FAIL" });
        if let Some(o) = &c.outcome {
            let _ = writeln!(s, "    |det P| = {}, {}", o.det_p.0.magnitude(), o.detail);
            if !c.basis_spans {
                s.push_str("    basis divisors do not span the Picard lattice\n");
            }
            s.push_str("    PᵀGP =\n");
            s.push_str(&indented(&o.computed, "      "));
        }
        if let Some(e) = &c.error {
            let _ = writeln!(s, "    error: {e}");
        }
    }
    s
}
