//! One function per subcommand. Each validates its keys, runs the
//! computation and writes its files under the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use num_rational::BigRational;

use ellipsephic::congruence::{
    self, discrete_integral, mean_value_K, mean_value_U, normalize_k, Integrand, KParams, MeanValueSpec, Mode,
    WeightAssignment,
};
use ellipsephic::digit_core::{et_star_report, rep_profile, DigitSource};
use ellipsephic::export::{self, Schema};
use ellipsephic::lifting::{carry_decomposition, g_d, lifting_chain, solutions_mod};
use ellipsephic::meanvalue::{
    brute_force_count, fit_exponent, mitm_count, multiplicity_histogram, CountOptions, FitPoint, Poly, PolySystem,
    SpacedSystem,
};
use ellipsephic::scalar::Real;
use ellipsephic::{waring, DigitSet, Error, Result};

use crate::config::ExperimentConfig;

const COMMON: &[&str] = &["output", "budget_tuples", "budget_memory"];

/// Where results go, and the header every file carries.
pub struct Sink {
    dir: PathBuf,
    header: String,
    stem: String,
    written: Vec<PathBuf>,
}

impl Sink {
    fn new(dir: &Path, cfg: &ExperimentConfig, default_name: &str) -> Result<Self> {
        let name = cfg.raw("output").unwrap_or(default_name);
        if name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(Error::InvalidParameter(format!(
                "output={name}: expected a plain file name"
            )));
        }
        let stem = name.strip_suffix(".csv").unwrap_or(name).to_string();
        Ok(Sink {
            dir: dir.to_path_buf(),
            header: cfg.to_string(),
            stem,
            written: Vec::new(),
        })
    }

    fn csv(&mut self, suffix: &str, schema: &Schema, rows: Vec<Vec<String>>) -> Result<()> {
        let mut buf = Vec::new();
        export::write_csv(&mut buf, &self.header, schema, rows)?;
        self.put(&format!("{}{suffix}.csv", self.stem), &buf)
    }

    fn json(&mut self, body: &str) -> Result<()> {
        let mut buf = Vec::new();
        export::write_json(&mut buf, &self.header, body)?;
        self.put(&format!("{}.json", self.stem), &buf)
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Runs a subcommand and returns the sink holding the written paths plus
/// summary lines for stdout.
pub fn run(command: &str, cfg: &ExperimentConfig, dir: &Path) -> Result<(Sink, Vec<String>)> {
    let mut sink = Sink::new(dir, cfg, &format!("{command}.csv"))?;
    let notes = match command {
        "enumerate" => enumerate(cfg, &mut sink)?,
        "etstar" => etstar(cfg, &mut sink)?,
        "count" => count(cfg, &mut sink)?,
        "congruence" => congruence(cfg, &mut sink)?,
        "lift" => lift(cfg, &mut sink)?,
        "waring" => waring_cmd(cfg, &mut sink)?,
        "fit" => fit(cfg, &mut sink)?,
        _ => return Err(Error::InvalidParameter(format!("unknown subcommand {command}"))),
    };
    Ok((sink, notes))
}

fn keys(cfg: &ExperimentConfig, own: &[&str]) -> Result<()> {
    let all: Vec<&str> = own.iter().chain(COMMON).copied().collect();
    cfg.check_keys(&all)
}

fn power(set: &DigitSet, e: u32) -> Result<u64> {
    set.power(e)
        .ok_or_else(|| Error::InvalidParameter(format!("{}^{e} does not fit in 64 bits", set.base())))
}

fn enumerate(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<String>> {
    keys(cfg, &["digit_set", "X"])?;
    let set = cfg.digit_set()?;
    let x: u64 = cfg.parse("X")?;
    let budget = cfg.budget()?;
    let y = set.count_members(x)?;
    if y as u128 > budget.tuples {
        return Err(Error::Budget {
            what: "enumerated members",
            needed: y as u128,
            limit: budget.tuples,
        });
    }
    let e = set.enumerate(x)?;
    let rows = e.members.iter().map(|n| vec![n.to_string()]).collect();
    sink.csv("", &export::MEMBERS, rows)?;
    Ok(vec![format!("Y={}", e.len())])
}

fn etstar(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<String>> {
    keys(cfg, &["source", "t", "N"])?;
    let source: DigitSource = cfg.parse_or("source", DigitSource::Squares)?;
    let t: u32 = cfg.parse("t")?;
    let n: u64 = cfg.parse("N")?;
    let profile = rep_profile(&source, t, n, &cfg.budget()?)?;
    let report = et_star_report(&profile)?;
    let rows = report
        .windows
        .iter()
        .map(|w| {
            vec![
                w.j.to_string(),
                w.start.to_string(),
                w.end.to_string(),
                w.max.to_string(),
            ]
        })
        .collect();
    sink.csv("", &export::ETSTAR, rows)?;
    let slope = report.slope.map_or("none".to_string(), |s| s.to_string());
    Ok(vec![format!(
        "max={} argmax={} slope={slope}",
        report.max_count, report.argmax
    )])
}

fn count(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<String>> {
    keys(
        cfg,
        &["digit_set", "k", "s", "X", "method", "modulus", "timing", "histogram"],
    )?;
    let set = cfg.digit_set()?;
    let k: u32 = cfg.parse("k")?;
    let system = vinogradov(k)?;
    let s_list = cfg.list("s")?;
    let xs = cfg.list("X")?;
    let method = cfg.choice("method", &["mitm", "brute"])?;
    let timing = cfg.flag("timing")?;
    let histogram = cfg.flag("histogram")?;
    let opts = CountOptions {
        budget: cfg.budget()?,
        modulus: cfg.parse_opt("modulus")?,
        key_bound: None,
    };
    let mut rows = Vec::new();
    for &s in &s_list {
        for &x in &xs {
            let members = set.enumerate(x)?.members;
            let result = match method {
                "brute" => brute_force_count(&system, s as usize, &members, &opts)?,
                _ => mitm_count(&system, s as usize, &members, &opts)?,
            };
            rows.push(export::count_row(x, &result, timing));
            if histogram {
                let hist = multiplicity_histogram(&system, s as usize, &members, &opts)?;
                let hist_rows = hist.iter().map(export::histogram_row).collect();
                sink.csv(&format!("_hist_s{s}_X{x}"), &export::HISTOGRAM, hist_rows)?;
            }
        }
    }
    let n = rows.len();
    sink.csv("", &export::COUNT_SERIES, rows)?;
    Ok(vec![format!("rows={n}")])
}

fn vinogradov(k: u32) -> Result<PolySystem> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    PolySystem::powers(&(1..=k).collect::<Vec<_>>())
}

fn congruence(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<String>> {
    keys(
        cfg,
        &[
            "digit_set",
            "k",
            "s",
            "B",
            "X",
            "sweep",
            "method",
            "weights",
            "t",
            "r",
            "a",
            "b",
            "nu",
            "delta",
            "h",
        ],
    )?;
    let sweep = cfg.choice("sweep", &["lambda", "k"])?;
    let grid = cfg.choice("method", &["count", "grid"])? == "grid";
    if sweep == "lambda" {
        for key in ["t", "r", "a", "b", "nu", "delta", "h"] {
            if cfg.raw(key).is_some() {
                return Err(Error::InvalidParameter(format!("{key} only applies to sweep=k")));
            }
        }
    }
    let set = cfg.digit_set()?;
    let k: usize = cfg.parse("k")?;
    let s: usize = cfg.parse("s")?;
    let bs = cfg.list("B")?;
    let mut rows = Vec::new();
    for &b in &bs {
        let b = u32::try_from(b).map_err(|_| Error::InvalidParameter(format!("B={b} too large")))?;
        let spec = build_spec(cfg, &set, k, s, b)?;
        if grid {
            let spec = float_spec(&spec)?;
            match sweep {
                "lambda" => rows.extend(lambda_rows_grid(&spec)?),
                _ => rows.extend(k_rows(cfg, &spec, true)?),
            }
        } else {
            match sweep {
                "lambda" => rows.extend(lambda_rows(&spec)?),
                _ => rows.extend(k_rows(cfg, &spec, false)?),
            }
        }
    }
    let n = rows.len();
    let schema = if sweep == "lambda" {
        export::LAMBDA
    } else {
        export::K_SWEEP
    };
    sink.csv("", &schema, rows)?;
    Ok(vec![format!("rows={n}")])
}

fn build_spec(
    cfg: &ExperimentConfig,
    set: &DigitSet,
    k: usize,
    s: usize,
    b: u32,
) -> Result<MeanValueSpec<BigRational>> {
    let x = cfg.parse_or("X", power(set, b)?)?;
    let members = set.enumerate(x)?.members;
    let mut weights = WeightAssignment::<BigRational>::unit(&members)?;
    if cfg.choice("weights", &["unit", "single"])? == "single" {
        weights = weights.single_class(set.base(), b.div_ceil(k as u32))?;
    }
    let system = SpacedSystem::pure_powers(set.base(), k)?;
    let mut spec = MeanValueSpec::new(set.clone(), system, weights, s, b, 0)?;
    spec.budget = cfg.budget()?;
    Ok(spec)
}

fn float_spec(spec: &MeanValueSpec<BigRational>) -> Result<MeanValueSpec<f64>> {
    let support = spec.weights().support().iter().map(|(x, w)| (*x, w.to_f64())).collect();
    let mut out = MeanValueSpec::new(
        spec.digit_set().clone(),
        spec.system().clone(),
        WeightAssignment::new(support)?,
        spec.s,
        spec.b,
        spec.h,
    )?;
    out.budget = spec.budget;
    Ok(out)
}

/// Two rows per `B`, one per normaliser. `H = ⌈B/k⌉` is both the class
/// level and the exponent of `q`.
fn lambda_rows_for(
    spec_b: u32,
    h: u32,
    s: usize,
    k: usize,
    values: (String, String),
    ratios: [Option<f64>; 2],
) -> Vec<Vec<String>> {
    ratios
        .iter()
        .zip(["q^H", "classes"])
        .map(|(ratio, label)| {
            vec![
                spec_b.to_string(),
                h.to_string(),
                h.to_string(),
                s.to_string(),
                k.to_string(),
                values.0.clone(),
                values.1.clone(),
                ratio.map_or(String::new(), |r| r.to_string()),
                label.to_string(),
            ]
        })
        .collect()
}

fn lambda_rows(spec: &MeanValueSpec<BigRational>) -> Result<Vec<Vec<String>>> {
    let l = congruence::lambda_ratio(spec)?;
    let values = (l.u_b.to_count_value().to_string(), l.u_bh.to_count_value().to_string());
    Ok(lambda_rows_for(
        l.b,
        l.h,
        l.s,
        l.k,
        values,
        [Some(l.ratio_q), l.ratio_classes],
    ))
}

fn lambda_rows_grid(spec: &MeanValueSpec<f64>) -> Result<Vec<Vec<String>>> {
    let k = spec.k();
    let h = spec.b.div_ceil(k as u32);
    let u_b = discrete_integral(spec, &Integrand::U { h: 0 }, Mode::Grid)?;
    let u_bh = discrete_integral(spec, &Integrand::U { h }, Mode::Grid)?;
    if u_bh.is_nan() || u_bh <= 0.0 {
        return Err(Error::Degenerate("U^{B,H} vanishes".into()));
    }
    let q = spec.digit_set().r() as f64;
    let classes = spec.norms(h)?.len() as f64;
    let log_ratio = (u_b / u_bh).ln();
    let ratio_q = log_ratio / (h as f64 * q.ln());
    let ratio_classes = (classes > 1.0).then(|| log_ratio / classes.ln());
    let values = (u_b.to_string(), u_bh.to_string());
    Ok(lambda_rows_for(
        spec.b,
        h,
        spec.s,
        k,
        values,
        [Some(ratio_q), ratio_classes],
    ))
}

fn k_rows<W: Real>(cfg: &ExperimentConfig, spec: &MeanValueSpec<W>, grid: bool) -> Result<Vec<Vec<String>>> {
    let k = spec.k();
    let t: usize = cfg.parse("t")?;
    let nu = match cfg.raw("nu") {
        None | Some("none") => None,
        Some(_) => Some(cfg.parse::<u32>("nu")?),
    };
    let delta: f64 = cfg.parse_or("delta", 0.0)?;
    let h: u32 = cfg.parse_or("h", spec.b.div_ceil(k as u32))?;
    let u_bh = mean_value_U(&spec.with_h(h)?)?.to_f64();
    let q_h = spec.norms(h)?.len() as f64;
    let mut rows = Vec::new();
    for r in cfg.list("r")? {
        for a in cfg.list("a")? {
            for b in cfg.list("b")? {
                let params = KParams {
                    t,
                    r: r as usize,
                    a: a as u32,
                    b: b as u32,
                    nu,
                };
                let value = if grid {
                    let v = discrete_integral(spec, &Integrand::K { params, pair: None }, Mode::Grid)?;
                    (v.to_string(), v)
                } else {
                    let v = mean_value_K(spec, &params, None)?;
                    (v.to_count_value().to_string(), v.to_f64())
                };
                let tilde = if k >= 2 && (1..k).contains(&params.r) {
                    normalize_k(value.1, delta, params.r, k, u_bh, q_h)?.to_string()
                } else {
                    String::new()
                };
                rows.push(vec![
                    a.to_string(),
                    b.to_string(),
                    r.to_string(),
                    nu.map_or("none".to_string(), |n| n.to_string()),
                    value.0,
                    tilde,
                    delta.to_string(),
                ]);
            }
        }
    }
    Ok(rows)
}

fn lift(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<String>> {
    match cfg.choice("mode", &["carry", "chain"])? {
        "carry" => carry(cfg, sink),
        _ => chain(cfg, sink),
    }
}

fn carry(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<String>> {
    keys(cfg, &["mode", "digit_set", "t", "d", "X"])?;
    let set = cfg.digit_set()?;
    let t: usize = cfg.parse("t")?;
    let d: u32 = cfg.parse("d")?;
    let budget = cfg.budget()?;
    let x = cfg.parse_or("X", power(&set, d)?)?;
    let weights: Vec<(u64, BigUint)> = set
        .enumerate(x)?
        .members
        .into_iter()
        .map(|m| (m, BigUint::from(1u32)))
        .collect();
    let decomposition = carry_decomposition(&set, t, d, &weights, &budget)?;
    let direct = g_d(&set, t, d, &weights, &budget)?;
    if direct.count != decomposition.total {
        return Err(Error::Invariant(format!(
            "carry contributions sum to {} but g_d = {}",
            decomposition.total, direct.count
        )));
    }
    let rows = decomposition
        .entries
        .iter()
        .map(|(lambda, c)| vec![lambda.to_string(), c.to_string()])
        .collect();
    sink.csv("", &export::CARRY, rows)?;
    Ok(vec![format!("g_d={}", decomposition.total)])
}

fn chain(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<String>> {
    keys(cfg, &["mode", "digit_set", "t", "c", "B", "psi", "X"])?;
    let set = cfg.digit_set()?;
    let t: usize = cfg.parse("t")?;
    let c: u32 = cfg.parse("c")?;
    let b: u32 = cfg.parse("B")?;
    let psi = cfg.raw("psi").unwrap_or("0,0,1");
    let coeffs = psi
        .split(',')
        .map(str::parse)
        .collect::<std::result::Result<Vec<i64>, _>>()
        .map_err(|_| Error::InvalidParameter(format!("psi={psi}: expected comma-separated coefficients")))?;
    let system = SpacedSystem::linear(set.base(), c, &Poly::new(coeffs))?;
    let modulus = power(&set, b)?;
    let x = cfg.parse_or("X", modulus)?;
    let members = set.enumerate(x)?.members;
    let pairs = solutions_mod(&system, &members, t, modulus, &cfg.budget()?)?;
    let report = lifting_chain(&system, b, &pairs)?;
    let rows = report
        .steps
        .iter()
        .map(|s| vec![s.j.to_string(), s.c_j.to_string(), s.verified.to_string()])
        .collect();
    sink.csv("", &export::CHAIN, rows)?;
    Ok(vec![format!("j_star={} solutions={}", report.j_star, pairs.len())])
}

fn waring_cmd(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<String>> {
    keys(cfg, &["digit_set", "s", "k", "X"])?;
    let set = cfg.digit_set()?;
    let table = waring::representation_table(&set, cfg.parse("s")?, cfg.parse("k")?, cfg.parse("X")?, &cfg.budget()?)?;
    if !table.reconciles() {
        return Err(Error::Invariant("representation counts do not reconcile".into()));
    }
    let check = waring::cauchy_bound_check(&table);
    if !check.holds {
        return Err(Error::Invariant("Cauchy inequality fails".into()));
    }
    let rows = table.rows().map(|(n, r)| vec![n.to_string(), r.to_string()]).collect();
    sink.csv("", &export::WARING, rows)?;
    let summary = waring::summary(&table);
    sink.json(&export::waring_json(&summary))?;
    Ok(vec![format!("N={} sumR2={}", summary.n, summary.sum_r2)])
}

fn fit(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Vec<String>> {
    let series = match cfg.raw("input") {
        Some(path) => {
            keys(cfg, &["input"])?;
            series_from_file(Path::new(path))?
        }
        None => {
            keys(cfg, &["digit_set", "k", "s", "X", "method"])?;
            series_from_counts(cfg)?
        }
    };
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (s, points) in &series {
        let f = fit_exponent(points)?;
        notes.push(format!("s={s} slope={}", f.slope));
        rows.push(vec![
            s.to_string(),
            points.len().to_string(),
            f.slope.to_string(),
            f.intercept.to_string(),
            f.residual.to_string(),
        ]);
    }
    sink.csv("", &export::FIT, rows)?;
    Ok(notes)
}

fn series_from_file(path: &Path) -> Result<BTreeMap<u64, Vec<FitPoint>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let parsed = export::parse_csv(&text)?;
    if parsed.schema != export::COUNT_SERIES {
        return Err(Error::Parse(format!("{} is not a count series", path.display())));
    }
    let num = |col: &str, v: &str| -> Result<f64> {
        v.parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad {col} value {v:?}")))
    };
    let (xs, ys, ss, counts) = (
        parsed.column("X").unwrap_or_default(),
        parsed.column("Y").unwrap_or_default(),
        parsed.column("s").unwrap_or_default(),
        parsed.column("count").unwrap_or_default(),
    );
    let mut series: BTreeMap<u64, Vec<FitPoint>> = BTreeMap::new();
    for i in 0..parsed.rows.len() {
        let s = num("s", ss[i])? as u64;
        series.entry(s).or_default().push(FitPoint {
            x: num("X", xs[i])? as u64,
            y: num("Y", ys[i])? as u64,
            count: num("count", counts[i])?,
        });
    }
    Ok(series)
}

fn series_from_counts(cfg: &ExperimentConfig) -> Result<BTreeMap<u64, Vec<FitPoint>>> {
    let set = cfg.digit_set()?;
    let system = vinogradov(cfg.parse("k")?)?;
    let brute = cfg.choice("method", &["mitm", "brute"])? == "brute";
    let opts = CountOptions {
        budget: cfg.budget()?,
        ..Default::default()
    };
    let xs = cfg.list("X")?;
    let mut series = BTreeMap::new();
    for s in cfg.list("s")? {
        let mut points = Vec::new();
        for &x in &xs {
            let members = set.enumerate(x)?.members;
            let r = if brute {
                brute_force_count(&system, s as usize, &members, &opts)?
            } else {
                mitm_count(&system, s as usize, &members, &opts)?
            };
            points.push(r.fit_point(x));
        }
        series.insert(s, points);
    }
    Ok(series)
}
