//! Flat CSV views of reports for external plotting.

use crate::error::CliError;
use crate::report::{CheckStatus, Report};

fn num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| "null".into())
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn status(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "fail",
        CheckStatus::Skipped => "skipped",
    }
}

/// Header and rows for the sections present in `report`.
pub fn rows(report: &Report) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let system = report.system_id.clone().unwrap_or_default();
    if let Some(systems) = &report.systems {
        let header = vec!["system", "equations", "dimensions", "conservative", "pair", "convexity", "compatible"];
        let mut rows = Vec::new();
        for s in systems {
            let dims = s.dimensions.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" ");
            let base = vec![s.id.clone(), s.equations.clone(), dims, s.conservative.to_string()];
            if s.pairs.is_empty() {
                rows.push([base.clone(), vec![String::new(), String::new(), String::new()]].concat());
            }
            for p in &s.pairs {
                let conv = serde_json::to_value(p.convexity).ok().and_then(|v| v.as_str().map(String::from));
                rows.push([base.clone(), vec![p.id.clone(), conv.unwrap_or_default(), p.compatible.to_string()]].concat());
            }
        }
        return (header, rows);
    }
    if let Some(checks) = &report.checks {
        let header = vec!["check", "system", "pair", "status", "states_tested", "max_residual", "threshold", "detail"];
        let rows = checks
            .iter()
            .map(|c| {
                let (tested, resid, thr, detail) = match (&c.report, &c.search) {
                    (Some(r), _) => (r.states_tested.to_string(), num(r.max_residual), num(r.threshold), String::new()),
                    (_, Some(s)) => {
                        let v = serde_json::to_value(s.verdict).ok().and_then(|v| v.as_str().map(String::from));
                        (s.states_tested.to_string(), String::new(), String::new(), v.unwrap_or_default())
                    }
                    _ => (String::new(), String::new(), String::new(), c.reason.clone().unwrap_or_default()),
                };
                vec![
                    c.check.clone(),
                    system.clone(),
                    c.pair_id.clone().unwrap_or_default(),
                    status(c.status).into(),
                    tested,
                    resid,
                    thr,
                    detail,
                ]
            })
            .collect();
        return (header, rows);
    }
    if let Some(entries) = &report.riemann {
        let header = vec!["field", "curve", "kind", "x0", "speed", "exact"];
        let mut rows = Vec::new();
        for e in entries {
            for (i, c) in e.description.curves.iter().enumerate() {
                let kind = serde_json::to_value(c.kind).ok().and_then(|v| v.as_str().map(String::from));
                rows.push(vec![e.label.clone(), i.to_string(), kind.unwrap_or_default(), num(c.x0), num(c.speed), c.exact.to_string()]);
            }
        }
        return (header, rows);
    }
    if report.actions.is_some() || report.variations.is_some() {
        let header = vec!["field", "pair", "quantity", "t1", "t2", "a", "b", "value", "secondary"];
        let mut rows = Vec::new();
        for a in report.actions.iter().flatten() {
            let w = &a.report.window;
            rows.push(vec![
                a.field.clone(),
                a.report.pair_id.clone(),
                "action".into(),
                num(w.t1),
                num(w.t2),
                num(w.a),
                num(w.b),
                num(a.report.total),
                opt(a.report.boundary_route),
            ]);
        }
        for v in report.variations.iter().flatten() {
            for (e, d) in v.variation.epsilons.iter().zip(&v.variation.deltas) {
                rows.push(vec![
                    v.field.clone(),
                    v.pair_id.clone(),
                    "first_variation".into(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    num(*d),
                    num(*e),
                ]);
            }
        }
        return (header, rows);
    }
    if let Some(r) = &report.ranking {
        let header = vec!["label", "rate", "shock_rate", "smooth_rate", "selected"];
        let rows = r
            .rates
            .iter()
            .map(|c| {
                vec![c.label.clone(), num(c.rate), num(c.shock_rate), num(c.smooth_rate), r.selected.contains(&c.label).to_string()]
            })
            .collect();
        return (header, rows);
    }
    if let Some(products) = &report.products {
        let header = vec!["product", "kind", "path", "value", "error_estimate", "max_spread"];
        let mut rows = Vec::new();
        for p in products {
            for a in &p.probe.amplitudes {
                rows.push(vec![
                    p.index.to_string(),
                    p.kind.clone(),
                    a.path_id.clone(),
                    num(a.value),
                    num(a.error_estimate),
                    num(p.probe.max_spread),
                ]);
            }
        }
        return (header, rows);
    }
    (vec!["status"], vec![vec![if report.failed() { "failed".into() } else { "ok".into() }]])
}

pub fn render(report: &Report) -> Result<String, CliError> {
    let (header, rows) = rows(report);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
