//! Scenario runner: loads configs, runs the requested checks and writes a
//! report directory.
//!
//! Files written per scenario:
//!
//! - `verdicts.txt`: `key=value` lines ending in `status=pass|fail`
//! - `posterior_<z>.csv`, `posterior_ge_<b>.csv`: `w,cdf` on a grid
//! - `posterior_<z>.dist`, `posterior_ge_<b>.dist`: distribution text
//! - `curve.csv`: `cutoff,value,evidence`
//! - `oracle.csv`: Monte Carlo comparison per posterior
//!
//! Numbers in CSV files use 17 significant digits. Every file starts with
//! a `# generated_unix=` line unless timestamps are disabled.

mod builtins;
mod config;

pub use builtins::{builtin_config, list_builtins};
pub use config::{BandMode, Check, DerivativeSign, Expectations, PairMode, Scenario, Settings, SignalMode};

use crate::bayes::{posterior_point, posterior_threshold, posterior_threshold_additive, Posterior};
use crate::dist::{finite_window, fmt_num, Distribution};
use crate::error::{Error, Result};
use crate::kernels::{threshold_transform, ThresholdSignal};
use crate::mc::{oracle_check, sample_conditional, McCondition};
use crate::ordering::{detect_reversals, fosd_compare_grid, screening_curve, ScreeningSignal};
use crate::theorems::{
    check_h_monotone_on, default_step, posterior_z_derivative, reversal_region, ruleout_corollary, ruleout_lemma,
};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Command-line overrides of scenario settings.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub mc_n: Option<usize>,
    pub seed: Option<u64>,
    pub bandwidth: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub timestamp: bool,
    pub dump_samples: bool,
    pub overrides: Overrides,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            out: PathBuf::from("fosd-report"),
            timestamp: true,
            dump_samples: false,
            overrides: Overrides::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub name: String,
    pub dir: PathBuf,
    pub entries: Vec<(String, String)>,
    pub failures: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.put(format!("check.{name}"), if ok { "pass" } else { "fail" });
        if !ok {
            self.failures.push(format!("{name}: {}", detail.into()));
        }
    }
}

/// Loads a builtin by name, or a config file by path.
pub fn load(target: &str) -> Result<Scenario> {
    if let Some(text) = builtin_config(target) {
        return Scenario::parse(text);
    }
    let text = fs::read_to_string(target)
        .map_err(|e| Error::Config(format!("'{target}' is neither a builtin nor a readable config: {e}")))?;
    Scenario::parse(&text)
}

fn csv_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn header(opts: &RunOptions) -> String {
    if opts.timestamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("# generated_unix={secs}\n")
    } else {
        String::new()
    }
}

fn write(dir: &Path, file: &str, body: &str, opts: &RunOptions) -> Result<()> {
    fs::write(dir.join(file), header(opts) + body)?;
    Ok(())
}

/// Finite evaluation window of a distribution.
fn window(d: &Distribution) -> (f64, f64) {
    let (a, b) = d.support();
    let a = if a.is_finite() { a } else { d.quantile(1e-12) };
    let b = if b.is_finite() { b } else { d.quantile(1.0 - 1e-12) };
    finite_window(a, b)
}

fn posterior_csv(d: &Distribution, rows: usize) -> String {
    let (a, b) = window(d);
    let rows = rows.max(1);
    let mut s = String::from("w,cdf\n");
    for i in 0..=rows {
        let w = a + (b - a) * i as f64 / rows as f64;
        writeln!(s, "{},{}", csv_num(w), csv_num(d.cdf(w))).unwrap();
    }
    s
}

fn with_context(name: &str, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("{name}: {m}")),
        Error::Io(m) => Error::Io(format!("{name}: {m}")),
        other => Error::BadParams(format!("scenario {name}: {other}")),
    }
}

/// Runs one scenario and writes its report to `opts.out/<name>/`.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<Report> {
    run_inner(s, opts).map_err(|e| with_context(&s.name, e))
}

fn run_inner(s: &Scenario, opts: &RunOptions) -> Result<Report> {
    let o = &opts.overrides;
    let set = Settings {
        tol: o.tol.unwrap_or(s.settings.tol),
        grid: o.grid.unwrap_or(s.settings.grid),
        mc_n: o.mc_n.unwrap_or(s.settings.mc_n),
        seed: o.seed.unwrap_or(s.settings.seed),
        bandwidth: o.bandwidth.unwrap_or(s.settings.bandwidth),
    };
    let dir = opts.out.join(&s.name);
    fs::create_dir_all(&dir)?;
    let mut r = Report {
        name: s.name.clone(),
        dir: dir.clone(),
        entries: Vec::new(),
        failures: Vec::new(),
    };
    r.put("scenario", &s.name);
    r.put("kernel", s.kernel.name());
    r.put("tol", fmt_num(set.tol));
    r.put("grid", set.grid);
    r.put("seed", set.seed);

    let wants = |c: Check| s.checks.contains(&c);
    let ts: Option<ThresholdSignal> = match (s.signal, s.cutoffs.is_empty()) {
        (SignalMode::Transformed, false) => Some(threshold_transform(&s.kernel)?),
        _ => None,
    };

    let point_posts: Vec<(f64, Posterior)> = s
        .points
        .iter()
        .map(|&z| posterior_point(&s.prior, &s.kernel, z).map(|p| (z, p)))
        .collect::<Result<_>>()?;
    let cut_posts: Vec<(f64, Posterior)> = s
        .cutoffs
        .iter()
        .map(|&b| {
            match &ts {
                Some(ts) => posterior_threshold(&s.prior, ts, b),
                None => posterior_threshold_additive(&s.prior, s.kernel.noise(), b),
            }
            .map(|p| (b, p))
        })
        .collect::<Result<_>>()?;

    for (tag, posts) in [("", &point_posts), ("ge_", &cut_posts)] {
        for (v, p) in posts.iter() {
            let key = format!("posterior.{tag}{}", fmt_num(*v));
            r.put(format!("{key}.evidence"), fmt_num(p.evidence));
            r.put(format!("{key}.mean"), p.dist.mean().map(fmt_num).unwrap_or_else(|_| "inf".into()));
            for a in p.dist.atoms() {
                r.put(format!("{key}.atom.{}", fmt_num(a.at)), fmt_num(a.mass));
            }
            let stem = format!("posterior_{tag}{}", fmt_num(*v));
            write(&dir, &format!("{stem}.csv"), &posterior_csv(&p.dist, set.grid), opts)?;
            if let Ok(text) = p.to_text() {
                write(&dir, &format!("{stem}.dist"), &text, opts)?;
            }
        }
    }

    if wants(Check::Kernel) {
        let (a, b) = window(&s.prior);
        let xs: Vec<f64> = (0..=100).map(|i| a + (b - a) * i as f64 / 100.0).collect();
        match s.kernel.validate(&xs, 1000) {
            Ok(()) => r.check("kernel", true, ""),
            Err(e) => r.check("kernel", false, e.to_string()),
        }
    }

    if wants(Check::Fosd) {
        fosd_pairs(&mut r, "points", &point_posts, s, &set, s.expect.fosd_points.as_deref());
        fosd_pairs(&mut r, "cutoffs", &cut_posts, s, &set, s.expect.fosd_cutoffs.as_deref());
    }

    if wants(Check::Curve) {
        let signal = match &ts {
            Some(ts) => ScreeningSignal::Threshold(ts),
            None => ScreeningSignal::Additive(s.kernel.noise()),
        };
        let c = screening_curve(&s.prior, signal, &s.cutoffs)?;
        let mut csv = String::from("cutoff,value,evidence\n");
        for i in 0..c.cutoffs.len() {
            writeln!(csv, "{},{},{}", csv_num(c.cutoffs[i]), csv_num(c.values[i]), csv_num(c.evidences[i])).unwrap();
        }
        write(&dir, "curve.csv", &csv, opts)?;
        let rev = detect_reversals(&c, set.tol);
        r.put("curve.values", c.values.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" "));
        r.put(
            "curve.reversals",
            rev.iter()
                .map(|(i, j)| format!("{}>{}", fmt_num(c.cutoffs[*i]), fmt_num(c.cutoffs[*j])))
                .collect::<Vec<_>>()
                .join(" "),
        );
        let mut ok = true;
        let mut why = String::new();
        if let Some(want) = s.expect.reversal {
            if want != !rev.is_empty() {
                ok = false;
                why = format!("reversal expected {want}");
            }
        }
        if let Some(want) = &s.expect.curve {
            let worst = want.iter().zip(&c.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            r.put("curve.max_error", fmt_num(worst));
            if !(worst <= s.expect.curve_tol) {
                ok = false;
                why = format!("curve off by {worst}");
            }
        }
        r.check("curve", ok, why);
    }

    if wants(Check::Ruleout) {
        let mut zs = s.points.clone();
        zs.sort_by(|a, b| a.total_cmp(b));
        zs.dedup();
        let mut ok = true;
        for w in zs.windows(2) {
            let v = ruleout_lemma(&s.prior, s.kernel.noise_range(), w[0], w[1])?;
            r.put(format!("ruleout.lemma.{}_{}", fmt_num(w[0]), fmt_num(w[1])), &v);
            if let Some(want) = s.expect.lemma {
                ok &= v.precluded == want;
            }
        }
        let cor = match ruleout_corollary(&s.prior, s.kernel.noise_range()) {
            Ok(v) => {
                r.put("ruleout.corollary", &v);
                v.trigger.as_str().to_string()
            }
            Err(Error::NotAnInterval(m)) => {
                r.put("ruleout.corollary", format!("not_an_interval ({m})"));
                "not_an_interval".to_string()
            }
            Err(e) => return Err(e),
        };
        if let Some(want) = &s.expect.corollary {
            ok &= *want == cor;
        }
        r.check("ruleout", ok, "preclusion verdict differs from expectation");
    }

    if wants(Check::Thm2) {
        thm2(&mut r, s)?;
    }

    if wants(Check::Oracle) {
        let mut conds: Vec<(McCondition, &Distribution)> = Vec::new();
        for (z, p) in &point_posts {
            let c = match s.band {
                BandMode::Symmetric => McCondition::band(*z, set.bandwidth),
                BandMode::Left => McCondition::left_band(*z, set.bandwidth),
            };
            conds.push((c, &p.dist));
        }
        for (b, p) in &cut_posts {
            let c = match &ts {
                Some(ts) => McCondition::Threshold(ts.clone(), *b),
                None => McCondition::SignalAbove(*b),
            };
            conds.push((c, &p.dist));
        }
        let mut csv = String::from("condition,n,statistic,at,band,pass\n");
        let mut ok = true;
        for (i, (c, d)) in conds.iter().enumerate() {
            let seed = set.seed.wrapping_add(i as u64);
            match oracle_check(&s.prior, &s.kernel, c, d, set.mc_n, seed) {
                Ok(chk) => {
                    writeln!(
                        csv,
                        "{},{},{},{},{},{}",
                        chk.condition,
                        chk.n,
                        csv_num(chk.statistic),
                        csv_num(chk.at),
                        csv_num(chk.band),
                        chk.pass
                    )
                    .unwrap();
                    ok &= chk.pass;
                }
                Err(e) => {
                    writeln!(csv, "{},{},nan,nan,nan,false", c.describe(), set.mc_n).unwrap();
                    r.put(format!("oracle.error.{i}"), e);
                    ok = false;
                }
            }
            if opts.dump_samples {
                let emp = sample_conditional(&s.prior, &s.kernel, c, set.mc_n, seed)?;
                let f = fs::File::create(dir.join(format!("oracle_{i}.f64")))?;
                emp.write_le(std::io::BufWriter::new(f))?;
            }
        }
        write(&dir, "oracle.csv", &csv, opts)?;
        r.check("oracle", ok, "empirical cdf outside the DKW band");
    }

    r.put("status", if r.passed() { "pass" } else { "fail" });
    let mut body = String::new();
    for (k, v) in &r.entries {
        writeln!(body, "{k}={v}").unwrap();
    }
    write(&dir, "verdicts.txt", &body, opts)?;
    Ok(r)
}

fn fosd_pairs(
    r: &mut Report,
    label: &str,
    posts: &[(f64, Posterior)],
    s: &Scenario,
    set: &Settings,
    want: Option<&[crate::ordering::Relation]>,
) {
    if posts.len() < 2 {
        return;
    }
    let pairs: Vec<(usize, usize)> = match s.pairs {
        PairMode::Consecutive => (1..posts.len()).map(|i| (i - 1, i)).collect(),
        PairMode::First => (1..posts.len()).map(|i| (0, i)).collect(),
    };
    let mut ok = true;
    for (i, j) in pairs {
        let v = fosd_compare_grid(&posts[i].1.dist, &posts[j].1.dist, set.tol, set.grid);
        let key = format!("fosd.{label}.{}_{}", fmt_num(posts[i].0), fmt_num(posts[j].0));
        r.put(format!("{key}.relation"), v.relation);
        r.put(format!("{key}.max_gap_pos"), fmt_num(v.max_gap_pos));
        r.put(format!("{key}.max_gap_neg"), fmt_num(v.max_gap_neg));
        r.put(
            format!("{key}.witness"),
            v.witness_points.iter().map(|w| fmt_num(*w)).collect::<Vec<_>>().join(" "),
        );
        if let Some(w) = want {
            ok &= w.contains(&v.relation);
        }
    }
    r.check(&format!("fosd.{label}"), ok, "relation outside the expected set");
}

fn thm2(r: &mut Report, s: &Scenario) -> Result<()> {
    if s.points.is_empty() {
        return Err(Error::Config("thm2 check needs points".into()));
    }
    let z1 = s.points.iter().copied().fold(f64::INFINITY, f64::min);
    let z2 = s.points.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = window(&s.prior);
    let xs: Vec<f64> = (0..=100).map(|i| a + (b - a) * i as f64 / 100.0).collect();
    let mut ok = true;
    let mut why = Vec::new();
    match check_h_monotone_on(&s.kernel, z1, z2, 20, &xs) {
        Ok(rep) => {
            r.put("thm2.h_monotone", rep.monotone.as_str());
            r.put(
                "thm2.note",
                format!("slope hypothesis checked at {} signals across [{}, {}]", rep.reports.len(), fmt_num(z1), fmt_num(z2)),
            );
            let skipped: usize = rep.reports.iter().map(|x| x.skipped.len()).sum();
            r.put("thm2.skipped_points", skipped);
            if let Some(want) = s.expect.thm2 {
                if want != rep.monotone {
                    ok = false;
                    why.push(format!("h monotonicity {}", rep.monotone.as_str()));
                }
            }
        }
        Err(e) => {
            r.put("thm2.h_monotone", format!("error ({e})"));
            if s.expect.thm2.is_some() {
                ok = false;
                why.push(e.to_string());
            }
        }
    }
    if s.kernel.p().is_none() && matches!(s.kernel.kind(), crate::kernels::KernelKind::Additive) {
        match reversal_region(&s.prior, s.kernel.noise()) {
            Ok(reg) => {
                r.put("thm2.eps_hat", fmt_num(reg.eps_hat));
                r.put("thm2.zmin", fmt_num(reg.zmin));
                r.put("thm2.region_strict", reg.strict);
                if let Some(want) = s.expect.zmin {
                    if (want - reg.zmin).abs() > 1e-12 {
                        ok = false;
                        why.push(format!("zmin {}", reg.zmin));
                    }
                }
            }
            Err(e) => {
                r.put("thm2.zmin", format!("none ({e})"));
                if s.expect.zmin.is_some() {
                    ok = false;
                    why.push(e.to_string());
                }
            }
        }
    }
    // Probes sit between consecutive signals so that a central difference
    // never straddles the edge of the signal range.
    let ws: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|q| s.prior.quantile(*q)).collect();
    let mut zs = s.points.clone();
    zs.sort_by(|a, b| a.total_cmp(b));
    zs.dedup();
    let mids: Vec<f64> = if zs.len() > 1 { zs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect() } else { zs };
    let step = default_step(&s.kernel);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &z in &mids {
        for &w in &ws {
            let d = posterior_z_derivative(&s.prior, &s.kernel, w, z, step)?;
            lo = lo.min(d);
            hi = hi.max(d);
        }
    }
    r.put("thm2.z_derivative_min", fmt_num(lo));
    r.put("thm2.z_derivative_max", fmt_num(hi));
    match s.expect.z_derivative {
        Some(DerivativeSign::Positive) if !(lo > 0.0) => {
            ok = false;
            why.push(format!("z-derivative {lo} not positive"));
        }
        Some(DerivativeSign::Zero) if !(lo.abs().max(hi.abs()) <= 1e-8) => {
            ok = false;
            why.push("z-derivative not zero".into());
        }
        _ => {}
    }
    r.check("thm2", ok, why.join("; "));
    Ok(())
}

/// Runs several scenarios concurrently; each writes its own directory.
pub fn run_batch(targets: &[String], opts: &RunOptions) -> Vec<(String, Result<Report>)> {
    let loaded: Vec<(String, Result<Scenario>)> = targets.iter().map(|t| (t.clone(), load(t))).collect();
    let mut seen = Vec::new();
    let checked: Vec<(String, Result<Scenario>)> = loaded
        .into_iter()
        .map(|(t, s)| {
            let s = s.and_then(|s| {
                if seen.contains(&s.name) {
                    Err(Error::Config(format!("scenario name '{}' appears twice", s.name)))
                } else {
                    seen.push(s.name.clone());
                    Ok(s)
                }
            });
            (t, s)
        })
        .collect();
    checked
        .into_par_iter()
        .map(|(t, s)| {
            let r = s.and_then(|s| run_scenario(&s, opts));
            (t, r)
        })
        .collect()
}

/// 0 when every scenario passed, 2 on any config error, 1 otherwise.
pub fn exit_code(results: &[(String, Result<Report>)]) -> i32 {
    if results.iter().any(|(_, r)| matches!(r, Err(Error::Config(_)))) {
        2
    } else if results.iter().all(|(_, r)| matches!(r, Ok(rep) if rep.passed())) {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(dir: &Path) -> RunOptions {
        RunOptions {
            out: dir.to_path_buf(),
            timestamp: false,
            dump_samples: false,
            overrides: Overrides {
                mc_n: Some(20_000),
                grid: Some(2_000),
                ..Overrides::default()
            },
        }
    }

    #[test]
    fn nine_builtins_parse() {
        let names = list_builtins();
        assert_eq!(names.len(), 9);
        for n in names {
            let s = load(n).unwrap();
            assert_eq!(s.name, n);
        }
    }

    #[test]
    fn thm1_report() {
        let tmp = tempfile::tempdir().unwrap();
        let rep = run_scenario(&load("thm1").unwrap(), &opts(tmp.path())).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.get("fosd.points.1_2.relation"), Some("strict_dominates"));
        let v = fs::read_to_string(tmp.path().join("thm1/verdicts.txt")).unwrap();
        assert!(v.ends_with("status=pass\n"));
        let csv = fs::read_to_string(tmp.path().join("thm1/posterior_1.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some("w,cdf"));
        assert_eq!(csv.lines().count(), 2_002);
        assert!(tmp.path().join("thm1/oracle.csv").exists());
    }

    #[test]
    fn failed_expectation_sets_exit_code() {
        let tmp = tempfile::tempdir().unwrap();
        let text = builtin_config("thm1").unwrap().replace("fosd_points = strict_dominates", "fosd_points = equal");
        let s = Scenario::parse(&text).unwrap();
        let rep = run_scenario(&s, &opts(tmp.path())).unwrap();
        assert!(!rep.passed());
        assert_eq!(exit_code(&[("x".into(), Ok(rep))]), 1);
        assert_eq!(exit_code(&[("x".into(), Err(Error::Config("bad".into())))]), 2);
    }
}
