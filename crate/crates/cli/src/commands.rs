use std::fmt::Write as _;
use std::fs;

use ptex_core::risk::{CompoundDistribution, SeverityModel};
use ptex_core::{
    aic, chi_square, compound_pmf_discrete, fit_mle, fit_moments, fit_poisson, fit_poisson_baseline,
    fit_proportion_moment, fit_regression, loglik, ChiSquareReport, CoefficientRow, CountDataset,
    FitResult, Grouping, PteParams, RngStream,
};
use serde_json::{json, Value};

use crate::args::{Baseline, FitArgs, GofArgs, MethodArg, MomentsArgs, Params, RegressArgs, RiskArgs, SampleArgs};
use crate::error::{CliError, CliResult};
use crate::format::{num, opt, Table};
use crate::ingest::{load_counts, load_regression, load_severity};
use crate::record::{dataset_digest, ModelRecord};

/// Rendering settings shared by every command.
pub struct Style {
    pub json: bool,
    pub digits: usize,
    pub color: bool,
}

/// What a command prints: the report on stdout, notes on stderr.
#[derive(Default)]
pub struct Output {
    pub stdout: String,
    pub warnings: Vec<String>,
}

impl Output {
    fn json(v: Value) -> Self {
        Self { stdout: serde_json::to_string_pretty(&v).expect("json") + "\n", warnings: Vec::new() }
    }
}

fn params(p: &Params) -> CliResult<PteParams> {
    Ok(PteParams::new(p.alpha, p.theta)?)
}

fn grouping(data: &CountDataset, closed: bool) -> Grouping {
    if closed {
        Grouping::closed(data.max_value())
    } else {
        Grouping::default_for(data)
    }
}

fn fit_one(method: MethodArg, data: &CountDataset) -> CliResult<FitResult> {
    Ok(match method {
        MethodArg::Mle => fit_mle(data, None),
        MethodArg::Moments => fit_moments(data)?,
        MethodArg::Proportion => fit_proportion_moment(data)?,
        MethodArg::All => unreachable!("expanded by caller"),
    })
}

fn chi_json(r: &ChiSquareReport) -> Value {
    json!({ "statistic": r.statistic, "df": r.df, "p_value": r.p_value, "cells": r.cells })
}

pub fn fit(args: &FitArgs, style: &Style) -> CliResult<Output> {
    let data = load_counts(&args.data)?;
    let mut methods: Vec<MethodArg> = Vec::new();
    for &m in &args.method {
        let expand = if m == MethodArg::All {
            vec![MethodArg::Mle, MethodArg::Moments, MethodArg::Proportion]
        } else {
            vec![m]
        };
        for e in expand {
            if !methods.contains(&e) {
                methods.push(e);
            }
        }
    }
    if args.save.is_some() && methods.len() != 1 {
        return Err(CliError::usage("--save needs exactly one method"));
    }
    let fits: Vec<FitResult> = methods.iter().map(|&m| fit_one(m, &data)).collect::<CliResult<_>>()?;
    let group = grouping(&data, args.closed_tail);
    let chis: Vec<ChiSquareReport> =
        fits.iter().map(|f| chi_square(&f.params, &data, &group)).collect::<Result<_, _>>()?;
    let poisson = match args.baseline {
        Some(Baseline::Poisson) => {
            let p = fit_poisson(&data)?;
            let c = chi_square(&p.model, &data, &group)?;
            Some((p, c))
        }
        None => None,
    };

    let mut warnings = Vec::new();
    for f in &fits {
        if !f.converged {
            warnings.push(format!("{} did not converge after {} iterations", f.method, f.iterations));
        }
        if f.at_boundary {
            warnings.push(format!("{} estimate is on the parameter boundary; no standard errors", f.method));
        }
    }
    if let Some(path) = &args.save {
        let rec = ModelRecord::from_fit(&fits[0], &data);
        fs::write(path, rec.to_json() + "\n").map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    }

    if style.json {
        let fits_json: Vec<Value> = fits
            .iter()
            .zip(&chis)
            .map(|(f, c)| {
                json!({
                    "method": f.method,
                    "alpha": f.params.alpha(),
                    "theta": f.params.theta(),
                    "se_alpha": f.se.map(|s| s[0]),
                    "se_theta": f.se.map(|s| s[1]),
                    "loglik": f.loglik,
                    "aic": aic(f.loglik, 2),
                    "converged": f.converged,
                    "at_boundary": f.at_boundary,
                    "iterations": f.iterations,
                    "chi_square": chi_json(c),
                })
            })
            .collect();
        let mut v = json!({
            "dataset": { "source": args.data, "n": data.n(), "digest": dataset_digest(&data) },
            "fits": fits_json,
        });
        if let Some((p, c)) = &poisson {
            v["baseline"] = json!({ "poisson": {
                "lambda": p.model.lambda,
                "loglik": p.loglik,
                "aic": aic(p.loglik, 1),
                "chi_square": chi_json(c),
            }});
        }
        let mut out = Output::json(v);
        out.warnings = warnings;
        return Ok(out);
    }

    let d = style.digits;
    let mut s = format!("dataset {} (n = {})\n\n", args.data, data.n());
    let mut t = Table::new(["model", "alpha", "se(alpha)", "theta", "se(theta)", "loglik", "AIC", "chi-square", "df", "p-value"]);
    for (f, c) in fits.iter().zip(&chis) {
        t.row([
            format!("PTE {}", f.method),
            num(f.params.alpha(), d),
            opt(f.se.map(|s| s[0]), d),
            num(f.params.theta(), d),
            opt(f.se.map(|s| s[1]), d),
            num(f.loglik, d),
            num(aic(f.loglik, 2), d),
            num(c.statistic, d),
            c.df.map_or("-".into(), |v| v.to_string()),
            opt(c.p_value, d),
        ]);
    }
    if let Some((p, c)) = &poisson {
        t.row([
            format!("Poisson (lambda = {})", num(p.model.lambda, d)),
            "-".into(),
            "-".into(),
            "-".into(),
            "-".into(),
            num(p.loglik, d),
            num(aic(p.loglik, 1), d),
            num(c.statistic, d),
            c.df.map_or("-".into(), |v| v.to_string()),
            opt(c.p_value, d),
        ]);
    }
    s.push_str(&t.render(style.color));

    let mut header = vec!["x".to_string(), "observed".into()];
    header.extend(fits.iter().map(|f| format!("PTE {}", f.method)));
    if poisson.is_some() {
        header.push("Poisson".into());
    }
    let mut e = Table::new(header);
    for (k, cell) in chis[0].cells.iter().enumerate() {
        let mut row = vec![cell.label.clone(), cell.observed.to_string()];
        row.extend(chis.iter().map(|c| num(c.cells[k].expected, d)));
        if let Some((_, c)) = &poisson {
            row.push(num(c.cells[k].expected, d));
        }
        e.row(row);
    }
    s.push_str("\nexpected frequencies\n");
    s.push_str(&e.render(style.color));
    Ok(Output { stdout: s, warnings })
}

pub fn sample(args: &SampleArgs) -> CliResult<Output> {
    let p = params(&args.params)?;
    if args.n == 0 {
        return Err(CliError::usage("-n must be at least 1"));
    }
    let draws = p.sample(args.n, &mut RngStream::new(args.seed));
    let mut text = String::with_capacity(args.n * 3);
    for x in draws {
        writeln!(text, "{x}").expect("string write");
    }
    match &args.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
            Ok(Output::default())
        }
        None => Ok(Output { stdout: text, warnings: Vec::new() }),
    }
}

/// `exp:RATE`, `erlang2:RATE` or `discrete:PATH`.
pub fn parse_severity_spec(spec: &str) -> CliResult<SeverityModel> {
    let bad = || CliError::usage(format!("malformed severity '{spec}'; expected exp:RATE, erlang2:RATE or discrete:PATH"));
    let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
    let rate = || arg.parse::<f64>().map_err(|_| bad());
    match kind {
        "exp" => SeverityModel::exponential(rate()?).map_err(|e| CliError::usage(e.to_string())),
        "erlang2" => SeverityModel::erlang2(rate()?).map_err(|e| CliError::usage(e.to_string())),
        "discrete" if !arg.is_empty() => Ok(SeverityModel::Discrete(load_severity(arg)?)),
        _ => Err(bad()),
    }
}

/// `lo:hi:step` with `0 <= lo <= hi`, `step > 0`.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::usage(format!("malformed grid '{spec}'; expected lo:hi:step"));
    let parts: Vec<f64> = spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    if !(lo >= 0.0 && hi >= lo && step > 0.0 && hi.is_finite()) {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    if count > 1_000_000 {
        return Err(CliError::usage("grid has more than a million points"));
    }
    Ok((0..=count).map(|k| lo + k as f64 * step).collect())
}

pub fn risk(args: &RiskArgs, style: &Style) -> CliResult<Output> {
    let freq = params(&args.params)?;
    let severity = parse_severity_spec(&args.severity)?;
    let model = CompoundDistribution::new(freq, severity);
    let stop_loss = args.stop_loss.map(|d| model.stop_loss(d)).transpose()?;
    let d = style.digits;

    if let SeverityModel::Discrete(h) = &model.severity {
        let pmf = compound_pmf_discrete(&freq, h, args.s_max)?;
        if style.json {
            return Ok(Output::json(json!({
                "atom0": model.atom0(),
                "mean": model.mean(),
                "pmf": pmf,
                "stop_loss": stop_loss,
            })));
        }
        let mut t = Table::new(["s", "f_S(s)", "F_S(s)"]);
        let mut acc = 0.0;
        for (s, p) in pmf.iter().enumerate() {
            acc += p;
            t.row([s.to_string(), num(*p, d), num(acc, d)]);
        }
        let mut s = t.render(style.color);
        if let (Some(v), Some(dd)) = (stop_loss, args.stop_loss) {
            writeln!(s, "\nstop-loss E[(S - {})+] = {}", num(dd, d), num(v, d)).expect("string write");
        }
        return Ok(Output { stdout: s, warnings: Vec::new() });
    }

    let grid = parse_grid(&args.grid)?;
    // at y = 0 report the right limit of the density
    let density = |y: f64| model.density(if y > 0.0 { y } else { f64::MIN_POSITIVE }).unwrap_or(0.0);
    if style.json {
        let points: Vec<Value> = grid.iter().map(|&y| json!({ "y": y, "density": density(y) })).collect();
        return Ok(Output::json(json!({
            "atom0": model.atom0(),
            "mean": model.mean(),
            "points": points,
            "stop_loss": stop_loss,
        })));
    }
    let mut s = format!("atom at 0: P(S = 0) = {}\n\n", num(model.atom0(), d));
    let mut t = Table::new(["y", "f_S(y)"]);
    for &y in &grid {
        t.row([num(y, d), num(density(y), d)]);
    }
    s.push_str(&t.render(style.color));
    if let (Some(v), Some(dd)) = (stop_loss, args.stop_loss) {
        writeln!(s, "\nstop-loss E[(S - {})+] = {}", num(dd, d), num(v, d)).expect("string write");
    }
    Ok(Output { stdout: s, warnings: Vec::new() })
}

fn coef_table(rows: &[CoefficientRow], d: usize, color: bool) -> String {
    let mut t = Table::new(["term", "estimate", "std.error", "t", "p-value"]);
    for r in rows {
        t.row([r.name.clone(), num(r.estimate, d), opt(r.se, d), opt(r.t, d), opt(r.p, d)]);
    }
    t.render(color)
}

pub fn regress(args: &RegressArgs, style: &Style) -> CliResult<Output> {
    let data = load_regression(&args.data, &args.response, &args.covariates)?;
    let base = fit_poisson_baseline(&data)?;
    let fit = fit_regression(&data, None)?;
    let mut warnings = Vec::new();
    if !fit.converged {
        warnings.push(format!("PTE regression did not converge after {} iterations", fit.iterations));
    }
    if fit.clamped {
        warnings.push("a linear predictor reached the +/-700 clamp".into());
    }
    if fit.at_boundary {
        warnings.push("nu is on the boundary of [1, 3]; no standard errors".into());
    }
    if style.json {
        let mut out = Output::json(json!({
            "n": data.n(),
            "pte": fit,
            "poisson": base,
        }));
        out.warnings = warnings;
        return Ok(out);
    }
    let d = style.digits;
    let mut s = format!("PTE regression (n = {}, response {})\n", data.n(), args.response);
    s.push_str(&coef_table(&fit.rows, d, style.color));
    s.push_str("\nPoisson regression\n");
    s.push_str(&coef_table(&base.rows, d, style.color));
    let mut t = Table::new(["model", "loglik", "AIC", "converged"]);
    t.row(["PTE".into(), num(fit.loglik, d), num(fit.aic, d), if fit.converged { "yes" } else { "no" }.to_string()]);
    t.row(["Poisson".into(), num(base.loglik, d), num(base.aic, d), "yes".to_string()]);
    s.push('\n');
    s.push_str(&t.render(style.color));
    Ok(Output { stdout: s, warnings })
}

pub fn gof(args: &GofArgs, style: &Style) -> CliResult<Output> {
    let text = fs::read_to_string(&args.model).map_err(|e| CliError::data(format!("{}: {e}", args.model.display())))?;
    let rec = ModelRecord::from_json(&text)?;
    let p = rec.params()?;
    let data = load_counts(&args.data)?;
    let mut warnings = Vec::new();
    let digest = dataset_digest(&data);
    if digest != rec.dataset_digest {
        warnings.push("dataset digest differs from the one stored in the model record".into());
    }
    let ll = loglik(&p, &data);
    let chi = chi_square(&p, &data, &grouping(&data, args.closed_tail))?;
    if style.json {
        let mut out = Output::json(json!({
            "method": rec.method,
            "alpha": p.alpha(),
            "theta": p.theta(),
            "n": data.n(),
            "loglik": ll,
            "aic": aic(ll, 2),
            "digest_match": digest == rec.dataset_digest,
            "chi_square": chi_json(&chi),
        }));
        out.warnings = warnings;
        return Ok(out);
    }
    let d = style.digits;
    let mut s = format!(
        "model {} (alpha = {}, theta = {}) on {} (n = {})\n",
        rec.method,
        num(p.alpha(), d),
        num(p.theta(), d),
        args.data,
        data.n()
    );
    writeln!(s, "loglik = {}  AIC = {}", num(ll, d), num(aic(ll, 2), d)).expect("string write");
    writeln!(
        s,
        "chi-square = {}  df = {}  p-value = {}\n",
        num(chi.statistic, d),
        chi.df.map_or("-".into(), |v| v.to_string()),
        opt(chi.p_value, d)
    )
    .expect("string write");
    let mut t = Table::new(["x", "observed", "expected"]);
    for c in &chi.cells {
        t.row([c.label.clone(), c.observed.to_string(), num(c.expected, d)]);
    }
    s.push_str(&t.render(style.color));
    Ok(Output { stdout: s, warnings })
}

pub fn moments(args: &MomentsArgs, style: &Style) -> CliResult<Output> {
    let p = params(&args.params)?;
    let m = p.moments();
    let raw: Vec<f64> = (1..=args.raw).map(|r| p.raw_moment(r)).collect::<Result<_, _>>()?;
    let mode = p.mode().values();
    if style.json {
        return Ok(Output::json(json!({
            "alpha": p.alpha(),
            "theta": p.theta(),
            "summary": m,
            "raw_moments": raw,
            "mode": mode,
            "p0": p.pmf(0),
        })));
    }
    let d = style.digits;
    let mut t = Table::new(["quantity", "value"]);
    t.row(["mean".to_string(), num(m.mean, d)]);
    t.row(["variance".to_string(), num(m.variance, d)]);
    t.row(["skewness".to_string(), num(m.skewness, d)]);
    t.row(["kurtosis".to_string(), num(m.kurtosis, d)]);
    t.row(["cv".to_string(), num(m.cv, d)]);
    t.row(["P(X = 0)".to_string(), num(p.pmf(0), d)]);
    t.row(["mode".to_string(), mode.iter().map(u64::to_string).collect::<Vec<_>>().join(", ")]);
    for (r, v) in raw.iter().enumerate() {
        t.row([format!("E[X^{}]", r + 1), num(*v, d)]);
    }
    Ok(Output { stdout: t.render(style.color), warnings: Vec::new() })
}
