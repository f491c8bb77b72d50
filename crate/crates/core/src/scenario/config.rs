//! Scenario config files.
//!
//! Line oriented. `[section]` headers, `key = value` entries, `#` comments.
//! The `[prior]` and `[noise]` sections also accept distribution records
//! (`piece`, `atom`, `tail`, `normalize`) in the schema of
//! [`Distribution::from_text`].
//!
//! ```text
//! [scenario]
//! name = thm1
//! tol = 1e-9          # fosd tolerance
//! grid = 10000        # fosd probe points and csv rows
//! mc_n = 1000000
//! seed = 1
//! bandwidth = 1e-3
//!
//! [prior]
//! family = uniform    # or distribution records
//! params = 0 1
//! truncate = -30 0    # optional
//!
//! [kernel]
//! type = triangle_rectangle | three_piece | additive | evasion
//! iota = 0.1          # three_piece
//! xi = 1              # three_piece
//! noise = exponential 1   # additive / evasion, unless a [noise] section is given
//! p = 0.3             # evasion: constant, or `logistic <k> <midpoint>`
//!
//! [conditioning]
//! points = 1 2
//! cutoffs = 1 2
//! signal = transformed | additive
//! band = symmetric | left
//!
//! [checks]
//! run = fosd curve ruleout thm2 oracle kernel
//! fosd_pairs = consecutive | first
//!
//! [expect]
//! fosd_points = strict_dominates          # accepted relations
//! fosd_cutoffs = weak_dominates dominated incomparable equal
//! reversal = true
//! curve = 0.5833333333333334 0.5
//! curve_tol = 1e-9
//! lemma = precluded | not_precluded
//! corollary = corollary_i | ... | none | not_an_interval
//! thm2 = strictly_decreasing | weakly_decreasing | violated
//! zmin = 1
//! z_derivative = positive | zero
//! ```

use crate::dist::{make_named_prior, Distribution};
use crate::error::{Error, Result};
use crate::kernels::{additive_kernel, evasion_kernel, three_piece_kernel, triangle_rectangle_kernel, PFunction, SignalKernel};
use crate::ordering::Relation;
use crate::theorems::Monotonicity;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    Fosd,
    Curve,
    Ruleout,
    Thm2,
    Oracle,
    Kernel,
}

impl Check {
    pub fn as_str(&self) -> &'static str {
        match self {
            Check::Fosd => "fosd",
            Check::Curve => "curve",
            Check::Ruleout => "ruleout",
            Check::Thm2 => "thm2",
            Check::Oracle => "oracle",
            Check::Kernel => "kernel",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalMode {
    Transformed,
    Additive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandMode {
    Symmetric,
    Left,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairMode {
    Consecutive,
    First,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub grid: usize,
    pub mc_n: usize,
    pub seed: u64,
    pub bandwidth: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tol: crate::ordering::DEFAULT_TOL,
            grid: crate::ordering::DEFAULT_GRID,
            mc_n: crate::mc::DEFAULT_MC_N,
            seed: 1,
            bandwidth: crate::mc::DEFAULT_BANDWIDTH,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeSign {
    Positive,
    Zero,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expectations {
    pub fosd_points: Option<Vec<Relation>>,
    pub fosd_cutoffs: Option<Vec<Relation>>,
    pub reversal: Option<bool>,
    pub curve: Option<Vec<f64>>,
    pub curve_tol: f64,
    pub lemma: Option<bool>,
    pub corollary: Option<String>,
    pub thm2: Option<Monotonicity>,
    pub zmin: Option<f64>,
    pub z_derivative: Option<DerivativeSign>,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub prior: Distribution,
    pub kernel: SignalKernel,
    pub points: Vec<f64>,
    pub cutoffs: Vec<f64>,
    pub signal: SignalMode,
    pub band: BandMode,
    pub checks: Vec<Check>,
    pub pairs: PairMode,
    pub settings: Settings,
    pub expect: Expectations,
}

/// One section: keyed entries plus raw record lines.
#[derive(Default)]
struct Section {
    entries: BTreeMap<String, (usize, String)>,
    records: Vec<String>,
}

fn cfg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    const KNOWN: [&str; 7] = ["scenario", "prior", "noise", "kernel", "conditioning", "checks", "expect"];
    let mut out: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {line}: unterminated section header")))?
                .trim();
            if !KNOWN.contains(&name) {
                return cfg(format!("line {line}: unknown section [{name}]"));
            }
            if out.contains_key(name) {
                return cfg(format!("line {line}: duplicate section [{name}]"));
            }
            out.insert(name.to_string(), Section::default());
            current = Some(name.to_string());
            continue;
        }
        let Some(sec) = current.as_ref() else {
            return cfg(format!("line {line}: entry outside any section"));
        };
        let section = out.get_mut(sec).unwrap();
        match body.split_once('=') {
            Some((k, v)) => {
                let k = k.trim().to_string();
                if section.entries.insert(k.clone(), (line, v.trim().to_string())).is_some() {
                    return cfg(format!("line {line}: duplicate key '{k}'"));
                }
            }
            None if sec == "prior" || sec == "noise" => section.records.push(body.to_string()),
            None => return cfg(format!("line {line}: expected 'key = value'")),
        }
    }
    Ok(out)
}

/// Reads entries from one section and rejects leftovers.
struct Reader<'a> {
    name: &'static str,
    sec: Option<&'a Section>,
    used: Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(map: &'a BTreeMap<String, Section>, name: &'static str) -> Self {
        Reader {
            name,
            sec: map.get(name),
            used: Vec::new(),
        }
    }

    fn get(&mut self, key: &str) -> Option<(usize, &'a str)> {
        self.used.push(key.to_string());
        self.sec?.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn num(&mut self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some((l, v)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {l}: {key} = '{v}' is not a number"))),
        }
    }

    fn nums(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some((l, v)) => v
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Config(format!("line {l}: {key}: '{t}' is not a number")))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    fn int<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some((l, v)) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config(format!("line {l}: {key} = '{v}' is not a nonnegative integer"))),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(sec) = self.sec {
            for (k, (l, _)) in &sec.entries {
                if !self.used.contains(k) {
                    return cfg(format!("line {l}: unknown key '{k}' in [{}]", self.name));
                }
            }
        }
        Ok(())
    }
}

fn relation(tok: &str) -> Result<Relation> {
    Ok(match tok {
        "strict_dominates" => Relation::StrictDominates,
        "weak_dominates" => Relation::WeakDominates,
        "equal" => Relation::Equal,
        "dominated" => Relation::Dominated,
        "incomparable" => Relation::Incomparable,
        other => return cfg(format!("unknown relation '{other}'")),
    })
}

fn monotonicity(tok: &str) -> Result<Monotonicity> {
    Ok(match tok {
        "strictly_decreasing" => Monotonicity::StrictlyDecreasing,
        "weakly_decreasing" => Monotonicity::WeaklyDecreasing,
        "violated" => Monotonicity::Violated,
        other => return cfg(format!("unknown monotonicity '{other}'")),
    })
}

/// `family p1 p2 ...`
fn named(spec: &str, line: usize) -> Result<Distribution> {
    let mut toks = spec.split_whitespace();
    let family = toks
        .next()
        .ok_or_else(|| Error::Config(format!("line {line}: missing distribution family")))?;
    let params = toks
        .map(|t| t.parse::<f64>().map_err(|_| Error::Config(format!("line {line}: '{t}' is not a number"))))
        .collect::<Result<Vec<_>>>()?;
    make_named_prior(family, &params).map_err(|e| Error::Config(format!("line {line}: {e}")))
}

fn distribution_section(map: &BTreeMap<String, Section>, name: &'static str) -> Result<Option<Distribution>> {
    let mut r = Reader::new(map, name);
    if r.sec.is_none() {
        return Ok(None);
    }
    let family = r.get("family");
    let params = r.get("params");
    let truncate = r.nums("truncate")?;
    let records = &r.sec.unwrap().records;
    let d = match (family, records.is_empty()) {
        (Some((l, f)), true) => named(&format!("{f} {}", params.map(|p| p.1).unwrap_or("")), l)?,
        (None, false) => {
            if params.is_some() {
                return cfg(format!("[{name}]: params given without family"));
            }
            Distribution::from_text(&records.join("\n")).map_err(|e| Error::Config(format!("[{name}]: {e}")))?
        }
        (Some(_), false) => return cfg(format!("[{name}]: give either family or distribution records, not both")),
        (None, true) => return cfg(format!("[{name}]: empty distribution")),
    };
    let d = match truncate {
        None => d,
        Some(v) if v.len() == 2 => d.truncate(v[0], v[1]).map_err(|e| Error::Config(format!("[{name}] truncate: {e}")))?,
        Some(_) => return cfg(format!("[{name}]: truncate needs two bounds")),
    };
    r.finish()?;
    Ok(Some(d))
}

fn kernel_section(map: &BTreeMap<String, Section>) -> Result<SignalKernel> {
    let noise_sec = distribution_section(map, "noise")?;
    let mut r = Reader::new(map, "kernel");
    if r.sec.is_none() {
        return cfg("missing [kernel] section");
    }
    let (tl, ty) = r.get("type").ok_or_else(|| Error::Config("[kernel]: missing type".into()))?;
    let noise = |r: &mut Reader| -> Result<Distribution> {
        match (r.get("noise"), &noise_sec) {
            (Some((l, spec)), None) => named(spec, l),
            (None, Some(d)) => Ok(d.clone()),
            (Some(_), Some(_)) => cfg("noise given both inline and in [noise]"),
            (None, None) => cfg("[kernel]: missing noise"),
        }
    };
    let wrap = |e: Error| Error::Config(format!("[kernel]: {e}"));
    let k = match ty {
        "triangle_rectangle" => triangle_rectangle_kernel(),
        "three_piece" => {
            let iota = r.num("iota")?.ok_or_else(|| Error::Config("[kernel]: missing iota".into()))?;
            let xi = r.num("xi")?.unwrap_or(1.0);
            three_piece_kernel(iota, xi).map_err(wrap)?
        }
        "additive" => additive_kernel(noise(&mut r)?),
        "evasion" => {
            let g = noise(&mut r)?;
            let (pl, pv) = r.get("p").ok_or_else(|| Error::Config("[kernel]: missing p".into()))?;
            let toks: Vec<&str> = pv.split_whitespace().collect();
            let bad = || Error::Config(format!("line {pl}: p must be a number or 'logistic <k> <midpoint>'"));
            let p = match toks.as_slice() {
                [c] => PFunction::Constant(c.parse().map_err(|_| bad())?),
                ["logistic", k, m] => PFunction::Logistic {
                    steepness: k.parse().map_err(|_| bad())?,
                    midpoint: m.parse().map_err(|_| bad())?,
                },
                _ => return Err(bad()),
            };
            evasion_kernel(p, g).map_err(wrap)?
        }
        other => return cfg(format!("line {tl}: unknown kernel type '{other}'")),
    };
    r.finish()?;
    Ok(k)
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario> {
        let map = split_sections(text)?;

        let mut r = Reader::new(&map, "scenario");
        let name = r.get("name").map(|v| v.1.to_string()).unwrap_or_else(|| "scenario".into());
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return cfg(format!("scenario name '{name}' must be alphanumeric, '_' or '-'"));
        }
        let d = Settings::default();
        let settings = Settings {
            tol: r.num("tol")?.unwrap_or(d.tol),
            grid: r.int("grid")?.unwrap_or(d.grid),
            mc_n: r.int("mc_n")?.unwrap_or(d.mc_n),
            seed: r.int("seed")?.unwrap_or(d.seed),
            bandwidth: r.num("bandwidth")?.unwrap_or(d.bandwidth),
        };
        r.finish()?;

        let prior = distribution_section(&map, "prior")?.ok_or_else(|| Error::Config("missing [prior] section".into()))?;
        let kernel = kernel_section(&map)?;

        let mut r = Reader::new(&map, "conditioning");
        let points = r.nums("points")?.unwrap_or_default();
        let cutoffs = r.nums("cutoffs")?.unwrap_or_default();
        let signal = match r.get("signal").map(|v| v.1) {
            None | Some("transformed") => SignalMode::Transformed,
            Some("additive") => SignalMode::Additive,
            Some(o) => return cfg(format!("unknown signal '{o}'")),
        };
        let band = match r.get("band").map(|v| v.1) {
            None | Some("symmetric") => BandMode::Symmetric,
            Some("left") => BandMode::Left,
            Some(o) => return cfg(format!("unknown band '{o}'")),
        };
        r.finish()?;
        if points.is_empty() && cutoffs.is_empty() {
            return cfg("[conditioning]: no points or cutoffs");
        }
        if signal == SignalMode::Additive && kernel.p().is_some() {
            return cfg("signal = additive needs an additive kernel");
        }

        let mut r = Reader::new(&map, "checks");
        let checks = r
            .get("run")
            .map(|v| v.1)
            .unwrap_or("")
            .split_whitespace()
            .map(|t| {
                Ok(match t.trim_end_matches(',') {
                    "fosd" => Check::Fosd,
                    "curve" => Check::Curve,
                    "ruleout" => Check::Ruleout,
                    "thm2" => Check::Thm2,
                    "oracle" => Check::Oracle,
                    "kernel" => Check::Kernel,
                    o => return cfg(format!("unknown check '{o}'")),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let pairs = match r.get("fosd_pairs").map(|v| v.1) {
            None | Some("consecutive") => PairMode::Consecutive,
            Some("first") => PairMode::First,
            Some(o) => return cfg(format!("unknown fosd_pairs '{o}'")),
        };
        r.finish()?;
        if checks.is_empty() {
            return cfg("[checks]: at least one check must be requested");
        }
        if checks.contains(&Check::Curve) && cutoffs.is_empty() {
            return cfg("curve check needs cutoffs");
        }

        let mut r = Reader::new(&map, "expect");
        let rels = |r: &mut Reader, key: &str| -> Result<Option<Vec<Relation>>> {
            r.get(key).map(|v| v.1.split_whitespace().map(relation).collect()).transpose()
        };
        let boolean = |v: &str| match v {
            "true" => Ok(true),
            "false" => Ok(false),
            o => cfg(format!("'{o}' is not true|false")),
        };
        let expect = Expectations {
            fosd_points: rels(&mut r, "fosd_points")?,
            fosd_cutoffs: rels(&mut r, "fosd_cutoffs")?,
            reversal: r.get("reversal").map(|v| boolean(v.1)).transpose()?,
            curve: r.nums("curve")?,
            curve_tol: r.num("curve_tol")?.unwrap_or(1e-9),
            lemma: r
                .get("lemma")
                .map(|v| match v.1 {
                    "precluded" => Ok(true),
                    "not_precluded" => Ok(false),
                    o => cfg(format!("'{o}' is not precluded|not_precluded")),
                })
                .transpose()?,
            corollary: r.get("corollary").map(|v| v.1.to_string()),
            thm2: r.get("thm2").map(|v| monotonicity(v.1)).transpose()?,
            zmin: r.num("zmin")?,
            z_derivative: r
                .get("z_derivative")
                .map(|v| match v.1 {
                    "positive" => Ok(DerivativeSign::Positive),
                    "zero" => Ok(DerivativeSign::Zero),
                    o => cfg(format!("'{o}' is not positive|zero")),
                })
                .transpose()?,
        };
        r.finish()?;
        if let Some(c) = &expect.curve {
            if c.len() != cutoffs.len() {
                return cfg("expected curve length differs from the number of cutoffs");
            }
        }

        Ok(Scenario {
            name,
            prior,
            kernel,
            points,
            cutoffs,
            signal,
            band,
            checks,
            pairs,
            settings,
            expect,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[prior]\nfamily = uniform\nparams = 0 1\n[kernel]\ntype = triangle_rectangle\n[conditioning]\npoints = 1 2\n[checks]\nrun = fosd\n";

    #[test]
    fn minimal_and_defaults() {
        let s = Scenario::parse(MINIMAL).unwrap();
        assert_eq!(s.name, "scenario");
        assert_eq!(s.points, vec![1.0, 2.0]);
        assert_eq!(s.checks, vec![Check::Fosd]);
        assert_eq!(s.settings, Settings::default());
        assert_eq!(s.kernel.name(), "triangle_rectangle");
    }

    #[test]
    fn inline_distributions() {
        let text = "[prior]\npiece 0 1 2 -2\n[noise]\npiece 0 1 1\n[kernel]\ntype = additive\n[conditioning]\ncutoffs = 0.5 1\nsignal = additive\n[checks]\nrun = curve\n[expect]\nreversal = false\n";
        let s = Scenario::parse(text).unwrap();
        assert!((s.prior.mean().unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.signal, SignalMode::Additive);
        assert_eq!(s.expect.reversal, Some(false));
    }

    #[test]
    fn errors() {
        for bad in [
            "",
            "points = 1",
            "[nonsense]\n",
            &MINIMAL.replace("run = fosd", "run = magic"),
            &MINIMAL.replace("run = fosd", "run ="),
            &MINIMAL.replace("type = triangle_rectangle", "type = triangle_rectangle\ncolour = red"),
            &MINIMAL.replace("params = 0 1", "params = 0 x"),
            &MINIMAL.replace("params = 0 1", "params = 1 0"),
            &MINIMAL.replace("points = 1 2", "points ="),
            &MINIMAL.replace("[checks]", "[checks]\n[checks]"),
            &(MINIMAL.to_string() + "[expect]\nfosd_points = better\n"),
            &(MINIMAL.to_string() + "[scenario]\nname = a/b\n"),
        ] {
            assert!(matches!(Scenario::parse(bad), Err(Error::Config(_))), "accepted: {bad}");
        }
    }
}
