use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qpc_construction::{
    construct, destroy_level, dip_trace, gap_experiment, read_state, write_state, ConstructionParams, LevelReport,
    LevelState, TildeCocycle, Variant,
};
use qpc_schrodinger::{check_phi_bound, TransportRow};
use qpc_sl2::{wrap_half, TWO_PI};

use crate::config::RunConfig;
use crate::suite::{self, Check};
use crate::Failure;

/// Samples per 2π in the `x vs φ_n` plot files.
const PLOT_SAMPLES: usize = 4096;

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots the data files of a qpc run directory. Usage: plot.py RUN_DIR"""
import csv
import pathlib
import sys

import matplotlib.pyplot as plt


def read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def main(run):
    run = pathlib.Path(run)
    for path in sorted((run / "plot").glob("phi_*.csv")):
        head, rows = read(path)
        plt.plot([r[0] for r in rows], [r[1] for r in rows], lw=0.6, label=path.stem)
    plt.xlabel("x (rad)")
    plt.ylabel("phi_n (rad)")
    plt.legend()
    plt.savefig(run / "phi.png", dpi=150)
    plt.clf()
    for path in sorted((run / "plot").glob("fields_*.csv")):
        head, rows = read(path)
        plt.plot([r[0] for r in rows], [r[2] for r in rows], ".", ms=2, label=path.stem)
    plt.xlabel("x (rad)")
    plt.ylabel("s_n - s'_n (rad)")
    plt.legend()
    plt.savefig(run / "fields.png", dpi=150)
    dip = run / "dip.csv"
    if dip.exists():
        plt.clf()
        head, rows = read(dip)
        for col in (1, 2, 3):
            plt.plot([r[0] for r in rows], [r[col] for r in rows], label=head[col])
        plt.xlabel("step j")
        plt.ylabel("log norm (nats)")
        plt.legend()
        plt.savefig(run / "dip.png", dpi=150)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
"#;

/// Files of one command, written together at the end of the pipeline.
#[derive(Default)]
struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    fn add(&mut self, rel: impl Into<PathBuf>, content: String) {
        self.files.push((rel.into(), content));
    }

    fn write(self, root: &Path) -> Result<Vec<PathBuf>, Failure> {
        let mut written = Vec::with_capacity(self.files.len());
        for (rel, content) in self.files {
            let path = root.join(&rel);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).map_err(|e| Failure::other(format!("{}: {e}", dir.display())))?;
            }
            fs::write(&path, content).map_err(|e| Failure::other(format!("{}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn state_file(index: usize) -> String {
    format!("state_{index:02}.txt")
}

fn phi_plot(state: &LevelState) -> String {
    let mut out = String::from("x_rad,phi_rad\n");
    for (k, v) in state.phi.sample(PLOT_SAMPLES).iter().enumerate() {
        let _ = writeln!(out, "{:?},{v:?}", TWO_PI * k as f64 / PLOT_SAMPLES as f64);
    }
    out
}

fn fields_plot(state: &LevelState) -> String {
    let f = &state.fields;
    let mut out = String::from("x_rad,component,s_minus_s_prime_rad\n");
    for k in 0..f.len() {
        let _ = writeln!(out, "{:?},{},{:?}", f.x[k], f.component[k], wrap_half(f.s[k] - f.s_prime[k]));
    }
    out
}

fn levels_csv(states: &[LevelState]) -> String {
    let mut out =
        String::from("index,n,q_n,lambda_n,mu,r_plus,r_minus,pass,first_failure,sup_e_rad,sup_de_rad_per_rad,ln_sup_e_core\n");
    for (i, s) in states.iter().enumerate() {
        let fail = s.report.first_failure().map_or(String::new(), |c| c.name.clone());
        let _ = writeln!(
            out,
            "{i},{},{},{:e},{:e},{},{},{},{fail},{:e},{:e},{:e}",
            s.n,
            s.q_n,
            s.lambda_n,
            s.mu,
            s.returns.0,
            s.returns.1,
            s.report.pass(),
            s.convergence.c0(),
            s.convergence.c1(),
            s.convergence.log_sup_core
        );
    }
    out
}

fn report_csv(reports: impl IntoIterator<Item = LevelReport>) -> String {
    let mut out = format!("{}\n", LevelReport::CSV_HEADER);
    for r in reports {
        out.push_str(&r.csv_rows());
    }
    out
}

/// Runs the construction and writes states, summaries and plot data to
/// `cfg.run.out`. A level failing a hard clause gives exit code 2 after
/// all files are written.
pub fn cmd_construct(cfg: &RunConfig) -> Result<String, Failure> {
    let params = cfg.params()?;
    let t0 = Instant::now();
    let states = construct(&params, cfg.run.levels).map_err(|e| Failure::verify(format!("construction: {e}")))?;
    let mut out = Outputs::default();
    out.add("config_echo.toml", cfg.to_toml());
    out.add("levels.csv", levels_csv(&states));
    out.add("report.csv", report_csv(states.iter().map(|s| s.report.clone())));
    for (i, s) in states.iter().enumerate() {
        out.add(state_file(i), write_state(s, &params));
        out.add(format!("plot/phi_{i:02}.csv"), phi_plot(s));
        if !s.fields.is_empty() {
            out.add(format!("plot/fields_{i:02}.csv"), fields_plot(s));
        }
    }
    out.add("plot/plot.py", PLOT_SCRIPT.to_string());
    out.write(&cfg.run.out)?;

    let mut msg = String::new();
    for s in &states {
        let status = match s.report.first_failure() {
            None => "pass".to_string(),
            Some(c) => format!("FAIL {} ({})", c.name, c.detail),
        };
        let _ = writeln!(msg, "level {:>2} q={:<5} lambda_n={:.4e} {status}", s.n, s.q_n, s.lambda_n);
    }
    let _ = write!(msg, "{} levels in {:.1} s -> {}", states.len(), t0.elapsed().as_secs_f64(), cfg.run.out.display());
    match states.iter().find_map(|s| s.require_pass().err()) {
        None => Ok(msg),
        Some(e) => Err(Failure::verify(format!("{msg}\n{e}"))),
    }
}

/// A run directory read back from its state files.
pub struct LoadedRun {
    pub params: ConstructionParams,
    pub states: Vec<LevelState>,
}

/// Reads `state_00.txt, state_01.txt, …` from `cfg.run.out`.
pub fn load_run(cfg: &RunConfig) -> Result<LoadedRun, Failure> {
    let params = cfg.params()?;
    let dir = &cfg.run.out;
    let mut states = Vec::new();
    loop {
        let path = dir.join(state_file(states.len()));
        let Ok(text) = fs::read_to_string(&path) else { break };
        let s = read_state(&text, &params).map_err(|e| Failure::missing(format!("{}: {e}", path.display())))?;
        states.push(s);
    }
    if states.is_empty() {
        return Err(Failure::missing(format!("no construction run in {} (run `qpc construct` first)", dir.display())));
    }
    Ok(LoadedRun { params, states })
}

fn destroyed(run: &LoadedRun, enabled: bool) -> Result<Vec<TildeCocycle>, Failure> {
    let levels: Vec<&LevelState> = run.states.iter().filter(|s| !s.is_base()).collect();
    if levels.is_empty() {
        return Err(Failure::missing("the run has no construction level beyond the base cocycle".to_string()));
    }
    levels
        .into_iter()
        .map(|s| {
            let t = destroy_level(s, &run.params).map_err(|e| Failure::verify(format!("destruction: {e}")))?;
            Ok(if enabled { t } else { suite::undestroyed(s, &t) })
        })
        .collect()
}

/// Exponents of `A_n` and `Ã_n` per level, and one orbit's partial
/// log-norms through a critical return.
pub fn cmd_gap(cfg: &RunConfig) -> Result<String, Failure> {
    let run = load_run(cfg)?;
    let p = &run.params;
    let tildes = destroyed(&run, cfg.gap.destruction)?;
    let horizon = (cfg.gap.horizon > 0).then_some(cfg.gap.horizon);
    let rows =
        gap_experiment(p, &run.states, &tildes, horizon, cfg.gap.samples).map_err(|e| Failure::verify(e.to_string()))?;
    let mut out = Outputs::default();
    out.add("config_echo_gap.toml", cfg.to_toml());
    let mut csv = format!("{}\n", qpc_construction::GapRow::CSV_HEADER);
    for r in &rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    out.add("gap.csv", csv);

    let t = tildes.last().unwrap();
    let state = run.states.iter().find(|s| s.n == t.n).unwrap();
    let dip = dip_trace(p, state, t).map_err(|e| Failure::verify(format!("dip trace: {e}")))?;
    out.add("dip.csv", dip.csv(p.lambda));
    let mut summary = String::new();
    let _ = writeln!(summary, "level = {}", dip.n);
    let _ = writeln!(summary, "x0 = {:?}", dip.x0);
    let _ = writeln!(summary, "cross = {}", dip.cross);
    let _ = writeln!(summary, "k1 = {}", dip.k1);
    let _ = writeln!(summary, "d3 = {:e}", dip.d3);
    let _ = writeln!(summary, "final_log_norm_A = {:e}", dip.log_norm_a.last().copied().unwrap_or(0.0));
    let _ = writeln!(summary, "final_log_norm_tilde = {:e}", dip.final_tilde());
    let _ = writeln!(summary, "window_bound = {:e}", dip.window_bound);
    let _ = writeln!(summary, "window_bound_d3 = {:e}", dip.window_bound_d3);
    let _ = writeln!(summary, "window_holds = {}", dip.window_holds());
    out.add("dip_summary.txt", summary);
    out.write(&cfg.run.out)?;

    let mut msg = String::new();
    for r in &rows {
        let _ = writeln!(msg, "level {:>2} K={:<6} L(A)={:.6} L(A~)={:.6} gap={:.3e} stderr={:.1e}", r.n, r.k, r.le_a.value, r.le_tilde.value, r.gap, r.stderr());
    }
    let _ = write!(msg, "destruction {}", if cfg.gap.destruction { "on" } else { "off" });
    Ok(msg)
}

/// Reduces the deepest constructed cocycle and its destroyed versions to
/// Schrödinger form and compares the exponents.
pub fn cmd_schrodinger(cfg: &RunConfig) -> Result<String, Failure> {
    if cfg.variant()? != Variant::Homotopic {
        return Err(Failure::config(
            "the Schrodinger reduction needs the identity-homotopic variant (variant = \"hom\")",
        ));
    }
    let run = load_run(cfg)?;
    let p = &run.params;
    let last = run.states.last().unwrap();
    let max_phi = check_phi_bound(&last.phi, 1 << 16).map_err(|e| Failure::config(format!("{e}")))?;
    let tildes = destroyed(&run, cfg.gap.destruction)?;
    let sch = &cfg.schrodinger;
    let res = suite::schrodinger_checks(p, &run.states, &tildes, sch).map_err(|e| Failure::verify(e.to_string()))?;

    let (tr, gaps) = res.transport.as_ref().expect("destroyed levels present");

    let mut out = Outputs::default();
    out.add("config_echo_schrodinger.toml", cfg.to_toml());
    out.add("v.csv", res.conjugation.v.csv());
    for (t, v) in tildes.iter().zip(&tr.potentials) {
        out.add(format!("plot/v_n{:02}.csv", t.n), v.csv());
    }
    out.add("transport.csv", transport_csv(&tr.rows, &tildes, gaps));
    let mut summary = res.conjugation.summary();
    let _ = writeln!(summary, "max_phi = {max_phi:e}");
    for c in &res.checks {
        let _ = writeln!(summary, "{} = {} ({})", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail);
    }
    out.add("conjugation.txt", summary.clone());
    out.write(&cfg.run.out)?;

    let failed: Vec<&Check> = res.checks.iter().filter(|c| !c.pass).collect();
    if failed.is_empty() {
        Ok(summary.trim_end().to_string())
    } else {
        let names: Vec<&str> = failed.iter().map(|c| c.name.as_str()).collect();
        Err(Failure::verify(format!("{summary}failed: {}", names.join(", "))))
    }
}

fn transport_csv(rows: &[TransportRow], tildes: &[TildeCocycle], gaps: &[qpc_construction::GapRow]) -> String {
    let mut out = String::from(
        "n,sup_dv,sup_dv_prime,residual_conj,LE_v,LE_vn,transported_gap_nats_per_step,construction_gap_nats_per_step,K,samples\n",
    );
    for ((r, t), g) in rows.iter().zip(tildes).zip(gaps) {
        let _ = writeln!(
            out,
            "{},{:e},{:e},{:e},{:.12e},{:.12e},{:.12e},{:.12e},{},{}",
            t.n, r.c0, r.c1, r.residual_conj, r.le_v.value, r.le_vn.value, r.gap, g.gap, r.le_v.k, r.le_v.sample_count
        );
    }
    out
}

/// One entry of the verification suite with its wall time.
pub struct Timed {
    pub check: Check,
    pub seconds: f64,
}

fn timed(f: impl FnOnce() -> Check) -> Timed {
    let t0 = Instant::now();
    let check = f();
    Timed { check, seconds: t0.elapsed().as_secs_f64() }
}

/// The property suites of every module, at the sizes in `cfg.verify`.
pub fn verify_suite(cfg: &RunConfig, mut progress: impl FnMut(&Timed)) -> Result<Vec<Timed>, Failure> {
    let v = &cfg.verify;
    let seed = cfg.run.seed;
    let params = cfg.params()?;
    let mut out = Vec::new();
    let mut push = |t: Timed| {
        progress(&t);
        out.push(t);
    };
    push(timed(|| suite::svd_identities(seed, v.svd_samples)));
    push(timed(|| suite::projective_derivative(seed + 1, v.deriv_samples)));
    push(timed(|| suite::contracted_direction_rotation(seed + 2, v.deriv_samples)));
    push(timed(suite::continued_fractions));
    push(timed(|| suite::return_structure(v.return_grid)));
    push(timed(|| suite::nonresonance(v.nonresonance_samples)));
    push(timed(|| suite::cancellation_lemma(seed + 3, v.cancellation_pairs)));
    push(timed(|| suite::decay_lemma(seed + 4, v.decay_blocks)));
    push(timed(|| match construct(&params, cfg.run.levels) {
        Ok(states) => suite::construction_levels("construction_levels", &states),
        Err(e) => Check::new("construction_levels", false, f64::NEG_INFINITY, e.to_string()),
    }));
    let smooth = ConstructionParams::desk_smooth();
    push(timed(|| match construct(&smooth, 3) {
        Ok(states) => suite::construction_levels("smooth_levels", &states),
        Err(e) => Check::new("smooth_levels", false, f64::NEG_INFINITY, e.to_string()),
    }));
    push(timed(|| {
        // the bump estimate is asymptotic: checked where q_n^{1/10} ≥ 2
        let n = smooth.rot.level_with_q_at_least(1500).unwrap();
        let r_max = (smooth.q(n) as f64).powf(0.1).floor() as usize;
        suite::bump_bound(&smooth, n, r_max)
    }));
    push(timed(|| {
        let parts = (smooth.big_n..smooth.big_n + 3).map(|n| suite::phi0_derivative_bound(&smooth, n, 0)).collect();
        Check::all("phi0_value_bound", parts)
    }));
    push(timed(|| suite::cohomology_band_limited(seed + 5)));
    push(timed(|| suite::cohomology_linearity(seed + 6)));
    push(timed(|| {
        let p = ConstructionParams::desk_schrodinger();
        let states = match construct(&p, 3) {
            Ok(s) => s,
            Err(e) => return Check::new("schrodinger_reduction", false, f64::NEG_INFINITY, e.to_string()),
        };
        let sch = crate::config::SchrodingerSection { samples: 100, ..cfg.schrodinger.clone() };
        match suite::schrodinger_checks(&p, &states, &[], &sch) {
            Ok(r) => Check::all("schrodinger_reduction", r.checks),
            Err(e) => Check::new("schrodinger_reduction", false, f64::NEG_INFINITY, e.to_string()),
        }
    }));
    Ok(out)
}

/// Runs [`verify_suite`], writes `verify.csv` and fails with exit code 2
/// unless every property passes.
pub fn cmd_verify(cfg: &RunConfig) -> Result<String, Failure> {
    let results = verify_suite(cfg, |t| {
        let c = &t.check;
        println!("{} {:<30} {:>7.2} s  margin {:>10.3e}", if c.pass { "pass" } else { "FAIL" }, c.name, t.seconds, c.margin);
    })?;
    let mut csv = format!("{}\n", Check::CSV_HEADER);
    for t in &results {
        csv.push_str(&t.check.csv_row());
        csv.push('\n');
    }
    let mut out = Outputs::default();
    out.add("config_echo_verify.toml", cfg.to_toml());
    out.add("verify.csv", csv);
    out.write(&cfg.run.out)?;
    let failed: Vec<&str> = results.iter().filter(|t| !t.check.pass).map(|t| t.check.name.as_str()).collect();
    if failed.is_empty() {
        Ok(format!("{} properties pass", results.len()))
    } else {
        Err(Failure::verify(format!("failed: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scratch(name: &str) -> RunConfig {
        let mut c = RunConfig::default();
        c.run.out = std::env::temp_dir().join(format!("qpc-commands-{}-{name}", std::process::id()));
        let _ = fs::remove_dir_all(&c.run.out);
        c
    }

    #[test]
    fn zero_levels_writes_only_the_base_state() {
        let mut c = scratch("zero");
        c.run.levels = 0;
        cmd_construct(&c).unwrap();
        assert!(c.run.out.join("state_00.txt").exists());
        assert!(!c.run.out.join("state_01.txt").exists());
        assert!(c.run.out.join("config_echo.toml").exists());
        let levels = fs::read_to_string(c.run.out.join("levels.csv")).unwrap();
        assert_eq!(levels.lines().count(), 2);
        // the gap needs a level beyond the base cocycle
        assert_eq!(cmd_gap(&c).unwrap_err().code, crate::EXIT_MISSING);
        fs::remove_dir_all(&c.run.out).unwrap();
    }

    #[test]
    fn missing_run_is_reported() {
        let c = scratch("missing");
        assert_eq!(cmd_gap(&c).unwrap_err().code, crate::EXIT_MISSING);
        assert_eq!(cmd_schrodinger(&c).unwrap_err().code, crate::EXIT_MISSING);
    }

    #[test]
    fn schrodinger_rejects_the_nonhomotopic_variant() {
        let mut c = scratch("nonhom");
        c.construction.variant = "nonhom".into();
        let err = cmd_schrodinger(&c).unwrap_err();
        assert_eq!(err.code, crate::EXIT_CONFIG);
        assert!(err.message.contains("homotopic"), "{}", err.message);
    }

    #[test]
    fn csv_outputs_name_units() {
        let mut c = scratch("units");
        c.run.levels = 1;
        c.gap.samples = 20;
        cmd_construct(&c).unwrap();
        cmd_gap(&c).unwrap();
        for f in ["levels.csv", "gap.csv", "dip.csv", "plot/phi_01.csv", "plot/fields_01.csv"] {
            let text = fs::read_to_string(c.run.out.join(f)).unwrap();
            let header = text.lines().next().unwrap();
            assert!(header.contains('_') && !text.contains('\r'), "{f}: {header}");
        }
        fs::remove_dir_all(&c.run.out).unwrap();
    }
}
