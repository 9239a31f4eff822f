//! Plain-text persistence of [`LevelState`].
//!
//! ```text
//! qpc-level-state 1
//! [meta]
//! key = value
//! [pieces]
//! level center lo hi kind data…
//! [report]
//! name<TAB>pass<TAB>hard<TAB>margin<TAB>detail
//! [convergence]
//! [fields]
//! [phi_samples]
//! [end]
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a state read
//! back evaluates bit-for-bit like the one written.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::cheb::ChebSeries;
use crate::hermite::HermitePoly;
use crate::level::{ConvergenceRecord, FieldSamples, LevelState};
use crate::phi::{PhiFunction, Piece, PieceKind};
use crate::profile::BaseProfile;
use crate::report::{Clause, LevelReport};
use crate::{ConstructionError, ConstructionParams};

pub const STATE_MAGIC: &str = "qpc-level-state";
pub const STATE_VERSION: u32 = 1;
/// Equispaced `φ_n` samples stored for inspection and diffing.
pub const PHI_SAMPLES: usize = 4096;

fn floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ")
}

fn write_piece(out: &mut String, p: &Piece) {
    let _ = write!(out, "{} {} {:?} {:?} ", p.level, p.center, p.lo, p.hi);
    match &p.kind {
        PieceKind::Cheb(s) => {
            let _ = writeln!(out, "cheb {:?} {:?} {}", s.a, s.b, floats(&s.coeffs));
        }
        PieceKind::Hermite(h) => {
            let _ = writeln!(out, "hermite {:?} {:?} {}", h.a, h.b, floats(&h.coeffs));
        }
        PieceKind::Phi0 { scale } => {
            let _ = writeln!(out, "phi0 {scale:?}");
        }
        PieceKind::Bumped { level, scale, core } => {
            let _ = write!(out, "bumped {level} {scale:?} {}", core.len());
            for s in core {
                let _ = write!(out, " | {:?} {:?} {} {}", s.a, s.b, s.coeffs.len(), floats(&s.coeffs));
            }
            out.push('\n');
        }
    }
}

/// Serializes a level.
pub fn write_state(state: &LevelState, params: &ConstructionParams) -> String {
    let mut out = format!("{STATE_MAGIC} {STATE_VERSION}\n[meta]\n");
    let b = &state.phi.base;
    let meta: Vec<(&str, String)> = vec![
        ("n", state.n.to_string()),
        ("q_n", state.q_n.to_string()),
        ("big_n", params.big_n.to_string()),
        ("omega", format!("{:?}", params.rot.omega)),
        ("lambda", format!("{:?}", params.lambda)),
        ("lambda_n", format!("{:?}", state.lambda_n)),
        ("mu", format!("{:?}", state.mu)),
        ("returns", format!("{} {}", state.returns.0, state.returns.1)),
        ("mode", b.mode.to_string()),
        ("variant", b.variant.to_string()),
        ("c1", format!("{:?}", b.c1)),
        ("delta0", format!("{:?}", b.delta0)),
        ("delta1", format!("{:?}", b.delta1)),
        ("amplitude", format!("{:?}", b.amplitude)),
        ("winding", state.phi.winding().to_string()),
        ("pass", state.report.pass().to_string()),
    ];
    for (k, v) in meta {
        let _ = writeln!(out, "{k} = {v}");
    }
    out.push_str("[pieces]\n");
    for p in &state.phi.pieces {
        write_piece(&mut out, p);
    }
    out.push_str("[report]\n");
    for c in &state.report.clauses {
        let _ = writeln!(out, "{}\t{}\t{}\t{:?}\t{}", c.name, c.pass, c.hard, c.margin, c.detail.replace(['\t', '\n'], " "));
    }
    out.push_str("[convergence]\n");
    let _ = writeln!(out, "log_sup_core = {:?}", state.convergence.log_sup_core);
    let _ = writeln!(out, "sup_deriv = {}", floats(&state.convergence.sup_deriv));
    out.push_str("[fields]\n");
    out.push_str(FieldSamples::CSV_HEADER);
    out.push('\n');
    let f = &state.fields;
    for i in 0..f.len() {
        let _ = writeln!(
            out,
            "{:?},{},{:?},{:?},{:?},{:?}",
            f.x[i], f.component[i], f.s[i], f.s_prime[i], f.s_bar[i], f.s_bar_prime[i]
        );
    }
    out.push_str("[phi_samples]\n");
    let _ = writeln!(out, "count = {PHI_SAMPLES}");
    for v in state.phi.sample(PHI_SAMPLES) {
        let _ = writeln!(out, "{v:?}");
    }
    out.push_str("[end]\n");
    out
}

fn bad(msg: impl Into<String>) -> ConstructionError {
    ConstructionError::StateFormat(msg.into())
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, ConstructionError> {
    s.trim().parse().map_err(|_| bad(format!("cannot parse {what}: {s:?}")))
}

fn float_list(toks: &[&str], what: &str) -> Result<Vec<f64>, ConstructionError> {
    toks.iter().map(|t| num(t, what)).collect()
}

fn read_piece(line: &str) -> Result<Piece, ConstructionError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() < 5 {
        return Err(bad(format!("short piece line: {line:?}")));
    }
    let level = num(toks[0], "piece level")?;
    let center: usize = num(toks[1], "piece center")?;
    if center > 1 {
        return Err(bad(format!("piece center {center}")));
    }
    let lo = num(toks[2], "piece lo")?;
    let hi = num(toks[3], "piece hi")?;
    let rest = &toks[5..];
    let kind = match toks[4] {
        "cheb" | "hermite" => {
            if rest.len() < 3 {
                return Err(bad("polynomial piece without coefficients"));
            }
            let (a, b) = (num(rest[0], "a")?, num(rest[1], "b")?);
            let coeffs = float_list(&rest[2..], "coefficient")?;
            if toks[4] == "cheb" {
                PieceKind::Cheb(ChebSeries { a, b, coeffs })
            } else {
                PieceKind::Hermite(HermitePoly { a, b, coeffs })
            }
        }
        "phi0" => PieceKind::Phi0 { scale: num(rest.first().copied().unwrap_or(""), "scale")? },
        "bumped" => {
            let groups: Vec<&str> = line.split(" | ").collect();
            let head: Vec<&str> = groups[0].split_whitespace().collect();
            if head.len() != 8 {
                return Err(bad("malformed bumped piece"));
            }
            let count: usize = num(head[7], "core count")?;
            let mut core = Vec::new();
            for g in &groups[1..] {
                let t: Vec<&str> = g.split_whitespace().collect();
                if t.len() < 3 {
                    return Err(bad("malformed bumped core"));
                }
                let len: usize = num(t[2], "core length")?;
                let coeffs = float_list(&t[3..], "coefficient")?;
                if coeffs.len() != len {
                    return Err(bad("core length mismatch"));
                }
                core.push(ChebSeries { a: num(t[0], "a")?, b: num(t[1], "b")?, coeffs });
            }
            if core.len() != count {
                return Err(bad("core count mismatch"));
            }
            PieceKind::Bumped { level: num(head[5], "bump level")?, scale: num(head[6], "scale")?, core }
        }
        k => return Err(bad(format!("unknown piece kind {k:?}"))),
    };
    Ok(Piece { level, center, lo, hi, kind })
}

/// Parses a state written by [`write_state`]; `params` supplies the
/// rotation and must match the stored metadata.
pub fn read_state(text: &str, params: &ConstructionParams) -> Result<LevelState, ConstructionError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty state"))?;
    let mut h = header.split_whitespace();
    if h.next() != Some(STATE_MAGIC) {
        return Err(bad("missing header"));
    }
    let version: u32 = num(h.next().unwrap_or(""), "version")?;
    if version != STATE_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }

    let mut sections: BTreeMap<String, Vec<&str>> = BTreeMap::new();
    let mut current: Option<String> = None;
    let mut ended = false;
    for line in lines {
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if name == "end" {
                ended = true;
                break;
            }
            current = Some(name.to_string());
            sections.entry(name.to_string()).or_default();
        } else if let Some(c) = &current {
            sections.get_mut(c).unwrap().push(line);
        }
    }
    if !ended {
        return Err(bad("truncated state (no [end])"));
    }
    let section = |name: &str| sections.get(name).ok_or_else(|| bad(format!("missing [{name}]")));

    let kv = |name: &str| -> Result<BTreeMap<String, String>, ConstructionError> {
        section(name)?
            .iter()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let (k, v) = l.split_once('=').ok_or_else(|| bad(format!("bad line {l:?}")))?;
                Ok((k.trim().to_string(), v.trim().to_string()))
            })
            .collect()
    };
    let meta = kv("meta")?;
    let get = |k: &str| meta.get(k).map(String::as_str).ok_or_else(|| bad(format!("missing key {k}")));

    let base = BaseProfile {
        mode: get("mode")?.parse()?,
        variant: get("variant")?.parse()?,
        c1: num(get("c1")?, "c1")?,
        delta0: num(get("delta0")?, "delta0")?,
        delta1: num(get("delta1")?, "delta1")?,
        amplitude: num(get("amplitude")?, "amplitude")?,
    };
    let expected = BaseProfile::from_params(params);
    if base != expected {
        return Err(bad(format!("state profile {base:?} does not match the configuration {expected:?}")));
    }
    let lambda: f64 = num(get("lambda")?, "lambda")?;
    let omega: f64 = num(get("omega")?, "omega")?;
    if lambda != params.lambda || omega != params.rot.omega {
        return Err(bad("state lambda/omega do not match the configuration"));
    }

    let pieces = section("pieces")?
        .iter()
        .filter(|l| !l.trim().is_empty())
        .map(|l| read_piece(l))
        .collect::<Result<Vec<_>, _>>()?;

    let n: usize = num(get("n")?, "n")?;
    let mut report = LevelReport::new(n);
    for l in section("report")?.iter().filter(|l| !l.is_empty()) {
        let t: Vec<&str> = l.splitn(5, '\t').collect();
        if t.len() != 5 {
            return Err(bad(format!("bad report line {l:?}")));
        }
        report.push(Clause::new(t[0], num(t[1], "pass")?, num(t[3], "margin")?, num(t[2], "hard")?, t[4].to_string()));
    }

    let conv = kv("convergence")?;
    let convergence = ConvergenceRecord {
        log_sup_core: num(conv.get("log_sup_core").ok_or_else(|| bad("missing log_sup_core"))?, "log_sup_core")?,
        sup_deriv: float_list(
            &conv.get("sup_deriv").map(|s| s.split_whitespace().collect::<Vec<_>>()).unwrap_or_default(),
            "sup_deriv",
        )?,
    };

    let mut fields = FieldSamples::default();
    for l in section("fields")?.iter().skip(1).filter(|l| !l.is_empty()) {
        let t: Vec<&str> = l.split(',').collect();
        if t.len() != 6 {
            return Err(bad(format!("bad field line {l:?}")));
        }
        fields.x.push(num(t[0], "x")?);
        fields.component.push(num(t[1], "component")?);
        fields.s.push(num(t[2], "s")?);
        fields.s_prime.push(num(t[3], "s'")?);
        fields.s_bar.push(num(t[4], "s_bar")?);
        fields.s_bar_prime.push(num(t[5], "s_bar'")?);
    }

    let phi = PhiFunction { base, geometry: params.geometry.clone(), pieces };
    // the stored samples guard against a reader that evaluates differently
    let samples = section("phi_samples")?;
    let count: usize = num(samples.first().and_then(|l| l.split_once('=')).map_or("", |p| p.1), "sample count")?;
    let stored = float_list(&samples[1..].iter().copied().filter(|l| !l.is_empty()).collect::<Vec<_>>(), "sample")?;
    if stored.len() != count {
        return Err(bad("phi sample count mismatch"));
    }
    let fresh = phi.sample(count);
    if let Some(k) = (0..count).find(|&k| fresh[k].to_bits() != stored[k].to_bits()) {
        return Err(bad(format!("phi sample {k} differs after reload: {} vs {}", fresh[k], stored[k])));
    }

    let returns = {
        let t: Vec<&str> = get("returns")?.split_whitespace().collect();
        if t.len() != 2 {
            return Err(bad("returns needs two values"));
        }
        (num(t[0], "r+")?, num(t[1], "r-")?)
    };
    Ok(LevelState {
        n,
        q_n: num(get("q_n")?, "q_n")?,
        phi,
        lambda_n: num(get("lambda_n")?, "lambda_n")?,
        mu: num(get("mu")?, "mu")?,
        returns,
        fields,
        report,
        convergence,
    })
}
