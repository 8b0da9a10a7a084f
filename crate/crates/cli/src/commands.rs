use cfcoef::bounds::{
    bound_d, c_intermediates, classify, lower_bound_c, lower_bound_d, tong_k, upper_bound_c, upper_bound_d, witness,
    BoundError,
};
use cfcoef::cf::{coefficients, convergents, expand_exact};
use cfcoef::frequency::{
    compare_with_reference, density_h, dist_h, monte_carlo_cdf, monte_carlo_cells, monte_carlo_frequency,
    total_frequency_with, CellGroup, DigitRange, Event, FrequencyReport, Method, MonteCarloConfig, REFERENCE_R,
};
use cfcoef::natural_extension::CurveConfig;
use cfcoef::{BoundKind, BoundResult, Rational};
use serde_json::{json, Value};

use crate::args::{BoundArgs, Command, ExpandArgs, FreqArgs, VerifyArgs};
use crate::output::{Cell, Table};
use crate::sweep::{sweep, SweepConfig};
use crate::{EXIT_EMPTY_REGION, EXIT_OK, EXIT_VERIFICATION};

/// Tolerance used to match computed cells against the published table.
pub const PUBLISHED_TOLERANCE: f64 = 0.002;

pub struct Outcome {
    pub results: Value,
    pub table: Table,
    pub exit: i32,
    /// Shown on stderr when `exit` is nonzero.
    pub message: Option<String>,
}

impl Outcome {
    fn ok(results: Value, table: Table) -> Self {
        Outcome {
            results,
            table,
            exit: EXIT_OK,
            message: None,
        }
    }
}

pub fn dispatch(command: &Command) -> Result<Outcome, String> {
    match command {
        Command::Expand(a) => expand(a),
        Command::Bound(a) => bound(a),
        Command::Freq(a) => freq(a),
        Command::Verify(a) => verify(a),
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn require<T: Copy>(x: Option<T>, name: &str, what: &str) -> Result<T, String> {
    x.ok_or_else(|| format!("--{name} is required {what}"))
}

// ---------------------------------------------------------------- expand

fn expand(args: &ExpandArgs) -> Result<Outcome, String> {
    let d = expand_exact(&args.x);
    let len = d.len();
    let last = args.n.map_or(len, |n| n.min(len));
    let conv = convergents(&d, last).map_err(|e| e.to_string())?;
    let x = d.value();
    let mut rows = Vec::with_capacity(last + 1);
    let mut table = Table::new(&["n", "a", "p", "q", "theta", "C", "D"]);
    for (n, pq) in conv.iter().enumerate() {
        let a = if n == 0 { d.a0().to_string() } else { d.digits()[n - 1].to_string() };
        let q = Rational::from_integer(pq.q.clone());
        let theta = (&x - &pq.value()).abs() * &q * &q;
        // C_n and D_n live at index n + 1 of the future/past pair, which
        // needs t_{n+1} != 0
        let (c, dn) = if n + 2 <= len {
            let co = coefficients(&d, n + 1).map_err(|e| e.to_string())?;
            (co.c_prev, co.d_prev)
        } else {
            (None, None)
        };
        table.push(vec![
            n.into(),
            a.clone().into(),
            pq.p.to_string().into(),
            pq.q.to_string().into(),
            theta.to_f64().into(),
            c.as_ref().map(Rational::to_f64).into(),
            dn.as_ref().map(Rational::to_f64).into(),
        ]);
        rows.push(json!({
            "n": n,
            "a": a,
            "p": pq.p.to_string(),
            "q": pq.q.to_string(),
            "theta": theta,
            "theta_value": theta.to_f64(),
            "C": c,
            "C_value": c.as_ref().map(Rational::to_f64),
            "D": dn,
            "D_value": dn.as_ref().map(Rational::to_f64),
        }));
    }
    let results = json!({
        "x": args.x,
        "digits": d.to_string(),
        "sequence": d,
        "rows": rows,
    });
    Ok(Outcome::ok(results, table))
}

// ---------------------------------------------------------------- bound

enum Thresholds {
    D { r: f64, big_r: f64 },
    C { t: f64, big_t: f64 },
}

fn thresholds(args: &BoundArgs) -> Result<Thresholds, String> {
    match args.kind {
        BoundKind::LowerD | BoundKind::UpperD => Ok(Thresholds::D {
            r: require(args.r, "r", "for D-bounds")?,
            big_r: require(args.big_r, "R", "for D-bounds")?,
        }),
        BoundKind::LowerC | BoundKind::UpperC => Ok(Thresholds::C {
            t: require(args.t, "t", "for C-bounds")?,
            big_t: require(args.big_t, "T", "for C-bounds")?,
        }),
    }
}

fn compute(kind: BoundKind, a: u64, b: u64, th: &Thresholds) -> Result<BoundResult, BoundError> {
    match (kind, th) {
        (BoundKind::LowerD, Thresholds::D { r, big_r }) => lower_bound_d(a, b, *r, *big_r),
        (BoundKind::UpperD, Thresholds::D { r, big_r }) => upper_bound_d(a, b, *r, *big_r),
        (BoundKind::LowerC, Thresholds::C { t, big_t }) => lower_bound_c(a, b, *t, *big_t),
        (BoundKind::UpperC, Thresholds::C { t, big_t }) => upper_bound_c(a, b, *t, *big_t),
        _ => unreachable!("thresholds() matches the kind"),
    }
}

const BOUND_COLUMNS: [&str; 5] = ["a", "b", "case", "bound", "tong_bound"];

fn bound_row(res: &BoundResult) -> Vec<Cell> {
    vec![
        res.a.into(),
        res.b.into(),
        res.case_label.as_str().into(),
        res.value.into(),
        res.tong_value.into(),
    ]
}

fn empty_row(a: u64, b: u64, label: &str) -> Vec<Cell> {
    vec![a.into(), b.into(), label.into(), "empty".into(), Cell::Empty]
}

fn empty_region_value(kind: BoundKind, a: u64, b: u64, r: f64, big_r: f64) -> Value {
    json!({
        "a": a,
        "b": b,
        "r": r,
        "R": big_r,
        "kind": kind,
        "label": classify(a, b, r, big_r),
        "empty_region": true,
    })
}

fn bound(args: &BoundArgs) -> Result<Outcome, String> {
    let th = thresholds(args)?;
    if args.table {
        return bound_table(args, &th);
    }
    let a = require(args.a, "a", "without --table")?;
    let b = require(args.b, "b", "without --table")?;
    let mut table = Table::new(&BOUND_COLUMNS);
    match compute(args.kind, a, b, &th) {
        Ok(res) => {
            table.push(bound_row(&res));
            let extra = match th {
                Thresholds::D { r, big_r } => json!({ "curves": CurveConfig::new(a, b, r, big_r) }),
                Thresholds::C { t, big_t } => json!({ "intermediates": c_intermediates(a, b, t, big_t) }),
            };
            let mut results = to_value(&res);
            merge(&mut results, extra);
            Ok(Outcome::ok(results, table))
        }
        Err(e @ BoundError::EmptyRegion { kind, a, b, r, big_r }) => {
            table.push(empty_row(a, b, classify(a, b, r, big_r).as_str()));
            Ok(Outcome {
                results: empty_region_value(kind, a, b, r, big_r),
                table,
                exit: EXIT_EMPTY_REGION,
                message: Some(e.to_string()),
            })
        }
        Err(e) => Err(e.to_string()),
    }
}

fn merge(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn bound_table(args: &BoundArgs, th: &Thresholds) -> Result<Outcome, String> {
    if args.a_max == 0 || args.b_max == 0 {
        return Err("--a-max and --b-max must be at least 1".into());
    }
    let mut table = Table::new(&BOUND_COLUMNS);
    let mut rows = Vec::new();
    for a in 1..=args.a_max {
        for b in 1..=args.b_max {
            match compute(args.kind, a, b, th) {
                Ok(res) => {
                    table.push(bound_row(&res));
                    rows.push(to_value(&res));
                }
                Err(BoundError::EmptyRegion { kind, r, big_r, .. }) => {
                    let value = empty_region_value(kind, a, b, r, big_r);
                    table.push(empty_row(a, b, classify(a, b, r, big_r).as_str()));
                    rows.push(value);
                }
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    let params = match *th {
        Thresholds::D { r, big_r } => json!({ "r": r, "R": big_r }),
        Thresholds::C { t, big_t } => json!({ "t": t, "T": big_t }),
    };
    let mut results = json!({ "kind": args.kind, "a_max": args.a_max, "b_max": args.b_max, "rows": rows });
    merge(&mut results, params);
    Ok(Outcome::ok(results, table))
}

// ---------------------------------------------------------------- freq

fn mc_config(args: &FreqArgs) -> MonteCarloConfig {
    let mut cfg = MonteCarloConfig::new(args.samples, args.orbit, args.seed);
    cfg.burn_in = args.burn_in;
    cfg
}

fn freq(args: &FreqArgs) -> Result<Outcome, String> {
    if !args.dist.is_empty() {
        return freq_dist(args);
    }
    let r = require(args.r, "r", "unless --dist is given")?;
    let big_r = require(args.big_r, "R", "unless --dist is given")?;
    if args.compare {
        return freq_compare(args, r, big_r);
    }
    match args.method {
        Method::ClosedForm | Method::Quadrature => {
            let report = total_frequency_with(r, big_r, args.event, args.method).map_err(|e| e.to_string())?;
            let mut table = Table::new(&["a", "b", "case", "frequency"]);
            for g in &report.per_cell {
                table.push(vec![
                    g.a.to_string().into(),
                    g.b.to_string().into(),
                    g.case_label.map(|l| l.as_str()).unwrap_or("").into(),
                    g.measure.value.into(),
                ]);
            }
            Ok(Outcome::ok(to_value(&report), table))
        }
        Method::MonteCarlo => {
            let cfg = mc_config(args);
            let groups = closed_groups(r, big_r, args.event)?;
            let ranges: Vec<(DigitRange, DigitRange)> = groups.iter().map(|g| (g.a, g.b)).collect();
            let total = monte_carlo_frequency(r, big_r, args.event, cfg).map_err(|e| e.to_string())?;
            let cells = monte_carlo_cells(r, big_r, args.event, cfg, &ranges).map_err(|e| e.to_string())?;
            let mut table = Table::new(&["a", "b", "case", "frequency", "stderr"]);
            let mut per_cell = Vec::new();
            for (g, m) in groups.iter().zip(&cells) {
                table.push(vec![
                    g.a.to_string().into(),
                    g.b.to_string().into(),
                    g.case_label.map(|l| l.as_str()).unwrap_or("").into(),
                    m.value.into(),
                    m.stderr.into(),
                ]);
                per_cell.push(json!({ "a": g.a, "b": g.b, "case_label": g.case_label, "measure": m }));
            }
            table.push(vec!["all".into(), "all".into(), "".into(), total.value.into(), total.stderr.into()]);
            let results = json!({
                "r": r,
                "R": big_r,
                "event": args.event,
                "method": Method::MonteCarlo,
                "monte_carlo": cfg,
                "per_cell": per_cell,
                "total": total,
            });
            Ok(Outcome::ok(results, table))
        }
    }
}

fn closed_groups(r: f64, big_r: f64, event: Event) -> Result<Vec<CellGroup>, String> {
    Ok(total_frequency_with(r, big_r, event, Method::ClosedForm)
        .map_err(|e| e.to_string())?
        .per_cell)
}

fn freq_dist(args: &FreqArgs) -> Result<Outcome, String> {
    let mut rows = Vec::new();
    let mc = args.method == Method::MonteCarlo;
    let empirical = if mc {
        Some(monte_carlo_cdf(&args.dist, mc_config(args)).map_err(|e| e.to_string())?)
    } else {
        None
    };
    let mut table = if mc {
        Table::new(&["R", "dist_h", "density_h", "empirical", "stderr"])
    } else {
        Table::new(&["R", "dist_h", "density_h"])
    };
    for (i, &x) in args.dist.iter().enumerate() {
        let h = dist_h(x).map_err(|e| e.to_string())?;
        let dens = density_h(x).map_err(|e| e.to_string())?;
        let mut row = vec![x.into(), h.into(), dens.into()];
        let mut value = json!({ "R": x, "dist_h": h, "density_h": dens });
        if let Some(emp) = &empirical {
            let m = &emp[i].empirical;
            row.push(m.value.into());
            row.push(m.stderr.into());
            merge(&mut value, json!({ "empirical": m }));
        }
        table.push(row);
        rows.push(value);
    }
    let mut results = json!({ "points": rows });
    if mc {
        merge(&mut results, json!({ "monte_carlo": mc_config(args) }));
    }
    Ok(Outcome::ok(results, table))
}

fn freq_compare(args: &FreqArgs, r: f64, big_r: f64) -> Result<Outcome, String> {
    let closed = total_frequency_with(r, big_r, args.event, Method::ClosedForm).map_err(|e| e.to_string())?;
    let quad = total_frequency_with(r, big_r, args.event, Method::Quadrature).map_err(|e| e.to_string())?;
    let cfg = mc_config(args);
    let ranges: Vec<(DigitRange, DigitRange)> = closed.per_cell.iter().map(|g| (g.a, g.b)).collect();
    let mc_cells = monte_carlo_cells(r, big_r, args.event, cfg, &ranges).map_err(|e| e.to_string())?;
    let mc_total = monte_carlo_frequency(r, big_r, args.event, cfg).map_err(|e| e.to_string())?;
    let published = published_rows(&closed);

    let mut table = Table::new(&[
        "a",
        "b",
        "case",
        "closed",
        "quadrature",
        "mc",
        "mc_stderr",
        "published",
        "delta",
        "interpretation",
    ]);
    let mut rows = Vec::new();
    for (i, g) in closed.per_cell.iter().enumerate() {
        let q = quad_value(&quad, g);
        let m = &mc_cells[i];
        let p = published.as_ref().and_then(|rows| {
            rows.iter()
                .find(|c| c.a == g.a.to_string() && c.b == g.b.to_string())
                .cloned()
        });
        let (pub_value, delta, interp) = match &p {
            Some(c) => {
                let delta = match c.interpretation {
                    cfcoef::frequency::Interpretation::Scaled => c.delta_scaled,
                    _ => c.delta_frequency,
                };
                (Some(c.reference), Some(delta), Some(c.interpretation))
            }
            None => (None, None, None),
        };
        table.push(vec![
            g.a.to_string().into(),
            g.b.to_string().into(),
            g.case_label.map(|l| l.as_str()).unwrap_or("").into(),
            g.measure.value.into(),
            q.into(),
            m.value.into(),
            m.stderr.into(),
            pub_value.into(),
            delta.into(),
            interp.map(interp_str).into(),
        ]);
        rows.push(json!({
            "a": g.a,
            "b": g.b,
            "case_label": g.case_label,
            "closed": g.measure.value,
            "quadrature": q,
            "mc": m.value,
            "mc_stderr": m.stderr,
            "published": p,
        }));
    }
    let pub_total = published.is_some().then_some(cfcoef::frequency::REFERENCE_TOTAL);
    table.push(vec![
        "all".into(),
        "all".into(),
        "".into(),
        closed.total.into(),
        quad.total.into(),
        mc_total.value.into(),
        mc_total.stderr.into(),
        pub_total.into(),
        pub_total.map(|p| closed.total - p).into(),
        Cell::Empty,
    ]);
    let results = json!({
        "r": r,
        "R": big_r,
        "event": args.event,
        "monte_carlo": cfg,
        "rows": rows,
        "total": {
            "closed": closed.total,
            "quadrature": quad.total,
            "mc": mc_total.value,
            "mc_stderr": mc_total.stderr,
            "published": pub_total,
        },
        "conditional_mtong": {
            "closed": closed.conditional_mtong,
            "quadrature": quad.conditional_mtong,
            "published": published.is_some().then_some(cfcoef::frequency::REFERENCE_CONDITIONAL),
        },
    });
    Ok(Outcome::ok(results, table))
}

fn interp_str(i: cfcoef::frequency::Interpretation) -> &'static str {
    match i {
        cfcoef::frequency::Interpretation::Frequency => "frequency",
        cfcoef::frequency::Interpretation::Scaled => "scaled",
        cfcoef::frequency::Interpretation::Neither => "deviates",
    }
}

fn published_rows(report: &FrequencyReport) -> Option<Vec<cfcoef::frequency::ComparisonRow>> {
    if report.event != Event::BothGreater || (report.r, report.big_r) != REFERENCE_R {
        return None;
    }
    compare_with_reference(report, PUBLISHED_TOLERANCE).ok()
}

fn quad_value(quad: &FrequencyReport, g: &CellGroup) -> f64 {
    quad.per_cell
        .iter()
        .find(|q| q.a == g.a && q.b == g.b)
        .map_or(f64::NAN, |q| q.measure.value)
}

// ---------------------------------------------------------------- verify

fn verify(args: &VerifyArgs) -> Result<Outcome, String> {
    if args.counterexample_tong_c {
        return counterexample(args);
    }
    if args.sharpness {
        return sharpness(args);
    }
    let cfg = SweepConfig {
        r: args.r,
        big_r: args.big_r,
        samples: args.samples,
        orbit: args.orbit,
        seed: args.seed,
        bits: args.bits,
        tolerance: args.tolerance,
    };
    let report = sweep(&cfg)?;
    let mut table = Table::new(&["item", "checked", "violations", "min_relative_slack"]);
    for c in &report.checks {
        table.push(vec![
            to_value(&c.check).as_str().unwrap_or("").to_string().into(),
            c.checked.into(),
            c.violations.into(),
            Cell::Empty,
        ]);
    }
    for s in &report.slack {
        table.push(vec![
            format!("{} case {}", s.kind, s.case).into(),
            s.count.into(),
            Cell::Empty,
            s.min_relative_slack.into(),
        ]);
    }
    let passed = report.passed();
    let message = (!passed).then(|| format!("{} violation(s); see results.violations for x and n", report.total_violations));
    let mut results = to_value(&report);
    merge(&mut results, json!({ "sweep": cfg, "passed": passed }));
    Ok(Outcome {
        results,
        table,
        exit: if passed { EXIT_OK } else { EXIT_VERIFICATION },
        message,
    })
}

fn counterexample(args: &VerifyArgs) -> Result<Outcome, String> {
    let a = args.a.unwrap_or(1);
    let b = args.b.unwrap_or(1);
    let t = args.t.unwrap_or(1.1);
    let big_t = args.big_t.unwrap_or(1.4);
    let corrected = upper_bound_c(a, b, t, big_t).map_err(|e| e.to_string())?;
    let k = tong_k(a, b, t, big_t);
    let inter = c_intermediates(a, b, t, big_t);
    let outside = !(k > 1.0 && k < 2.0);
    let mut table = Table::new(&["a", "b", "t", "T", "tong_k", "corrected_bound", "F_prime", "G_prime", "L_prime"]);
    table.push(vec![
        a.into(),
        b.into(),
        t.into(),
        big_t.into(),
        k.into(),
        corrected.value.into(),
        inter.f_prime.into(),
        inter.g_prime.into(),
        inter.l_prime.into(),
    ]);
    let results = json!({
        "a": a,
        "b": b,
        "t": t,
        "T": big_t,
        "tong_k": k,
        "range": [1.0, 2.0],
        "tong_k_outside_range": outside,
        "corrected": corrected,
        "intermediates": inter,
    });
    Ok(Outcome::ok(results, table))
}

fn sharpness(args: &VerifyArgs) -> Result<Outcome, String> {
    let a = require(args.a, "a", "with --sharpness")?;
    let b = require(args.b, "b", "with --sharpness")?;
    let mut table = Table::new(&["a", "b", "n", "D_prev", "bound", "relative_gap", "digits"]);
    match witness(a, b, args.r, args.big_r, args.direction, args.eps) {
        Ok(w) => {
            table.push(vec![
                a.into(),
                b.into(),
                w.n.into(),
                w.d_prev.to_f64().into(),
                w.bound.value.into(),
                w.relative_gap.into(),
                w.digits.to_string().into(),
            ]);
            let mut results = to_value(&w);
            merge(
                &mut results,
                json!({
                    "digits_text": w.digits.to_string(),
                    "D_prev_value": w.d_prev.to_f64(),
                    "eps": args.eps,
                }),
            );
            Ok(Outcome::ok(results, table))
        }
        Err(e @ BoundError::EmptyRegion { kind, a, b, r, big_r }) => Ok(Outcome {
            results: empty_region_value(kind, a, b, r, big_r),
            table,
            exit: EXIT_EMPTY_REGION,
            message: Some(e.to_string()),
        }),
        Err(e @ BoundError::UnreachableEps { .. }) => {
            let bound = bound_d(args.direction, a, b, args.r, args.big_r).ok();
            Ok(Outcome {
                results: json!({ "error": e.to_string(), "bound": bound, "eps": args.eps }),
                table,
                exit: EXIT_VERIFICATION,
                message: Some(e.to_string()),
            })
        }
        Err(e) => Err(e.to_string()),
    }
}
