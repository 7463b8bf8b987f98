//! Scenario execution for each subcommand.

use std::sync::Arc;

use entrolab_core::action::{
    action_interior, first_variation, weak_residual, ActionOptions, Stationarity, DEFAULT_SCHEDULE, ROUTE_TOL,
};
use entrolab_core::checks::{
    check_convexity, check_entropy_pair, check_godunov_potentials, check_homogeneity, check_symmetrizer,
    default_lambda_grid, symmetrizer_search, CheckReport, SearchVerdict,
};
use entrolab_core::dlm::{
    make_path, perfect_derivative_probe, production_probe, shock_entropy_production, Path, PathFamily, PathVerdict,
};
use entrolab_core::entropy::{Convexity, EntropyPair};
use entrolab_core::field::{
    make_expansion_shock, solve_riemann_euler_with, solve_riemann_scalar, Piece, PiecewiseField, StarState,
    WaveChoice,
};
use entrolab_core::selection::{rank_global, rank_local_maxent, Candidate};
use entrolab_core::system::registry::{build_pair, build_system, catalog};
use entrolab_core::system::{sample_states, Euler, ScalarFlux, System};
use entrolab_core::{Error, Matrix, State};
use rayon::prelude::*;

use crate::error::CliError;
use crate::report::*;
use crate::scenario::*;

type Result<T> = std::result::Result<T, CliError>;

/// A scenario resolved against the registry.
pub struct Context {
    pub scenario: Scenario,
    pub system: Arc<dyn System>,
    pub pairs: Vec<(String, Arc<dyn EntropyPair>)>,
    pub seed: u64,
    pub options: ActionOptions,
}

fn param(system: &dyn System, key: &str) -> Option<f64> {
    system.params().into_iter().find(|(k, _)| *k == key).map(|(_, v)| v)
}

impl Context {
    pub fn new(scenario: Scenario, seed: Option<u64>, quad_order: Option<usize>) -> Result<Self> {
        let system = build_system(&scenario.system.id, &scenario.system.params)?;
        let pairs = scenario
            .pairs
            .iter()
            .map(|p| Ok((p.id.clone(), build_pair(&system, &p.id, &p.params, p.shift.as_deref())?)))
            .collect::<Result<Vec<_>>>()?;
        let mut options = ActionOptions::default();
        if let Some(n) = quad_order.or(scenario.output.quad_order) {
            if n < 2 {
                return Err(CliError::Input(format!("quadrature order must be at least 2, got {n}")));
            }
            options.space_time_order = n;
            options.shock_time_order = n;
            options.path_order = n;
        }
        let seed = seed.unwrap_or(scenario.seed);
        Ok(Self { scenario, system, pairs, seed, options })
    }

    pub fn report(&self, command: &str) -> Report {
        let mut r = Report::new(command);
        r.description = self.scenario.description.clone();
        r.system_id = Some(self.system.id().to_string());
        r.seed = Some(self.seed);
        r
    }

    fn pair(&self, id: Option<&str>) -> Result<Arc<dyn EntropyPair>> {
        match id {
            None => self.pairs.first().map(|(_, p)| p.clone()).ok_or_else(|| {
                CliError::Input("/pairs: at least one entropy pair is required for this command".into())
            }),
            Some(id) => self.pairs.iter().find(|(k, _)| k == id).map(|(_, p)| p.clone()).ok_or_else(|| {
                CliError::Input(format!("pair '{id}' is not declared in /pairs"))
            }),
        }
    }

    fn states(&self) -> Result<Vec<State>> {
        let mut states = sample_states(self.system.as_ref(), self.scenario.states.count, self.seed);
        for (i, s) in self.scenario.states.explicit.iter().enumerate() {
            states.push(self.state(s, false, &format!("/states/explicit/{i}"))?);
        }
        Ok(states)
    }

    fn euler(&self) -> Result<Euler> {
        if self.system.id() != "euler" {
            return Err(CliError::Input(format!("primitive states require the euler system, not '{}'", self.system.id())));
        }
        let gamma = param(self.system.as_ref(), "gamma").unwrap_or(1.4);
        Ok(Euler::new(gamma, self.system.dimension())?)
    }

    /// Conserved state from scenario values; `(rho, v.., p)` when `primitive`.
    fn state(&self, values: &[f64], primitive: bool, at: &str) -> Result<State> {
        let n = self.system.equations();
        if values.len() != n {
            return Err(CliError::Input(format!("{at}: expected {n} components, got {}", values.len())));
        }
        if primitive {
            let e = self.euler()?;
            return Ok(e.conserved(values[0], &values[1..n - 1], values[n - 1]));
        }
        Ok(State::from_column_slice(values))
    }

    fn scalar_flux(&self) -> Option<ScalarFlux> {
        match self.system.id() {
            "burgers" => Some(ScalarFlux::Quadratic { a: 1.0 }),
            "scalar_exp" => Some(ScalarFlux::Exponential { k: param(self.system.as_ref(), "k").unwrap_or(1.0) }),
            _ => None,
        }
    }

    fn riemann(&self, l: &State, r: &State, x0: f64, waves: [WaveChoice; 2]) -> Result<(PiecewiseField, Option<StarState>)> {
        if let Some(flux) = self.scalar_flux() {
            let f = if waves[0] == WaveChoice::Discontinuous && l[0] < r[0] {
                make_expansion_shock(flux, l[0], r[0], x0)?
            } else {
                solve_riemann_scalar(flux, l[0], r[0], x0)?
            };
            return Ok((f, None));
        }
        if self.system.id() == "euler" && self.system.dimension() == 1 {
            return Ok(solve_riemann_euler_with(&self.euler()?, l, r, x0, waves)?);
        }
        Err(CliError::Input(format!(
            "Riemann solutions are available for burgers, scalar_exp and one-dimensional euler, not '{}'",
            self.system.id()
        )))
    }

    pub fn field(&self, index: usize) -> Result<(PiecewiseField, Option<StarState>)> {
        let spec = &self.scenario.fields[index];
        let at = format!("/fields/{index}/field");
        let (field, star) = match &spec.field {
            FieldKind::Riemann { left, right, x0, primitive, waves } => {
                let l = self.state(left, *primitive, &format!("{at}/left"))?;
                let r = self.state(right, *primitive, &format!("{at}/right"))?;
                self.riemann(&l, &r, *x0, *waves)?
            }
            FieldKind::ExpansionShock { left, right, x0, primitive } => {
                let l = self.state(left, *primitive, &format!("{at}/left"))?;
                let r = self.state(right, *primitive, &format!("{at}/right"))?;
                self.riemann(&l, &r, *x0, [WaveChoice::Discontinuous; 2])?
            }
            FieldKind::Constant { state, primitive } => {
                let u = self.state(state, *primitive, &format!("{at}/state"))?;
                (PiecewiseField::new(self.system.clone(), Vec::new(), vec![Piece::Constant(u)], 0.0, f64::INFINITY)?, None)
            }
            FieldKind::CustomPiecewise { curves, pieces, t_start, t_end } => {
                let pieces = pieces
                    .iter()
                    .enumerate()
                    .map(|(i, p)| self.piece(p, &format!("{at}/pieces/{i}")))
                    .collect::<Result<Vec<_>>>()?;
                let t_end = t_end.unwrap_or(f64::INFINITY);
                (PiecewiseField::new(self.system.clone(), curves.clone(), pieces, *t_start, t_end)?, None)
            }
        };
        match &spec.bump {
            Some(b) => Ok((field.perturb(b)?, star)),
            None => Ok((field, star)),
        }
    }

    fn piece(&self, spec: &PieceSpec, at: &str) -> Result<Piece> {
        Ok(match spec {
            PieceSpec::Constant { state } => Piece::Constant(self.state(state, false, &format!("{at}/state"))?),
            PieceSpec::ScalarFan { t0, x0, xi } => {
                let flux = self
                    .scalar_flux()
                    .ok_or_else(|| CliError::Input(format!("{at}: scalar fans need a scalar system")))?;
                Piece::ScalarFan { flux, t0: *t0, x0: *x0, xi: (xi[0], xi[1]) }
            }
            PieceSpec::Travelling { base, component, speed, amplitude, wavenumber } => {
                if *component >= self.system.equations() {
                    return Err(CliError::Input(format!("{at}/component: index {component} out of range")));
                }
                Piece::Travelling {
                    base: self.state(base, false, &format!("{at}/base"))?,
                    component: *component,
                    speed: *speed,
                    amplitude: *amplitude,
                    wavenumber: *wavenumber,
                }
            }
        })
    }

    fn field_index(&self, label: &str) -> Result<usize> {
        self.scenario
            .fields
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| CliError::Input(format!("field '{label}' is not declared in /fields")))
    }

    fn fields(&self) -> Result<Vec<PiecewiseField>> {
        (0..self.scenario.fields.len()).into_par_iter().map(|i| Ok(self.field(i)?.0)).collect()
    }
}

pub fn systems() -> Report {
    let mut r = Report::new("systems");
    r.systems = Some(catalog());
    r
}

enum CheckTask {
    PerPair(CheckSpec, usize),
    Homogeneity(Vec<f64>, Option<usize>),
    Search,
}

fn default_checks() -> Vec<CheckSpec> {
    vec![
        CheckSpec::EntropyPair,
        CheckSpec::Symmetrizer,
        CheckSpec::Convexity { lambda_scan: false },
        CheckSpec::GodunovPotentials,
        CheckSpec::SymmetrizerSearch,
    ]
}

/// Non-finite residuals and metrics cannot be represented in JSON; they are
/// replaced and noted.
fn scrub(mut rep: CheckReport) -> CheckReport {
    if !rep.max_residual.is_finite() {
        rep.notes.push(format!("non-finite residual {} reported as f64::MAX", rep.max_residual));
        rep.max_residual = f64::MAX;
    }
    let bad: Vec<String> = rep.metrics.iter().filter(|(_, v)| !v.is_finite()).map(|(k, _)| k.clone()).collect();
    for k in bad {
        rep.notes.push(format!("metric {k} is non-finite and was dropped"));
        rep.metrics.remove(&k);
    }
    for w in &mut rep.witnesses {
        if !w.residual.is_finite() {
            w.residual = f64::MAX;
        }
    }
    rep
}

fn entry(check: &str, pair_id: Option<String>, outcome: entrolab_core::Result<CheckReport>) -> Result<CheckEntry> {
    match outcome {
        Ok(rep) => {
            let rep = scrub(rep);
            let status = if rep.passed() { CheckStatus::Pass } else { CheckStatus::Fail };
            Ok(CheckEntry { check: check.into(), pair_id, status, reason: None, report: Some(rep), search: None })
        }
        Err(
            e @ (Error::NotStrictlyConvex(_)
            | Error::HessianUnavailable(_)
            | Error::PairNotCompatible(_)
            | Error::NonConservative(_)),
        ) => Ok(CheckEntry {
            check: check.into(),
            pair_id,
            status: CheckStatus::Skipped,
            reason: Some(e.to_string()),
            report: None,
            search: None,
        }),
        Err(e) => Err(e.into()),
    }
}

pub fn check(ctx: &Context) -> Result<Report> {
    let mut report = ctx.report("check");
    let specs = if ctx.scenario.checks.is_empty() { default_checks() } else { ctx.scenario.checks.clone() };
    let mut tasks = Vec::new();
    for spec in specs {
        match spec {
            CheckSpec::SymmetrizerSearch => tasks.push(CheckTask::Search),
            CheckSpec::Homogeneity { scalings } => {
                tasks.push(CheckTask::Homogeneity(scalings.clone(), None));
                for (i, (_, p)) in ctx.pairs.iter().enumerate() {
                    if p.homogeneity_degree().is_some() {
                        tasks.push(CheckTask::Homogeneity(scalings.clone(), Some(i)));
                    }
                }
            }
            other => {
                if ctx.pairs.is_empty() {
                    return Err(CliError::Input(format!("/checks: '{}' needs at least one pair", other.id())));
                }
                for i in 0..ctx.pairs.len() {
                    tasks.push(CheckTask::PerPair(other.clone(), i));
                }
            }
        }
    }
    let states = ctx.states()?;
    let sys = ctx.system.as_ref();
    let grid = default_lambda_grid();
    let entries = tasks
        .par_iter()
        .map(|task| match task {
            CheckTask::PerPair(spec, i) => {
                let pair = ctx.pairs[*i].1.as_ref();
                let out = match spec {
                    CheckSpec::EntropyPair => check_entropy_pair(sys, pair, &states),
                    CheckSpec::Symmetrizer => check_symmetrizer(sys, pair, &states),
                    CheckSpec::GodunovPotentials => check_godunov_potentials(sys, pair, &states),
                    CheckSpec::Convexity { lambda_scan } => {
                        check_convexity(sys, pair, &states, lambda_scan.then_some(grid.as_slice()))
                    }
                    _ => unreachable!("per-pair tasks hold per-pair checks"),
                };
                entry(spec.id(), Some(pair.id()), out)
            }
            CheckTask::Homogeneity(scalings, i) => {
                let pair = i.map(|i| ctx.pairs[i].1.as_ref());
                entry("homogeneity", pair.map(|p| p.id()), check_homogeneity(sys, pair, &states, scalings))
            }
            CheckTask::Search => {
                let registered: Vec<&dyn EntropyPair> = ctx
                    .pairs
                    .iter()
                    .map(|(_, p)| p.as_ref())
                    .filter(|p| p.convexity() == Convexity::Strict)
                    .collect();
                let mut search = symmetrizer_search(sys, &states, &registered)?;
                if !search.min_curl_singular_value.is_finite() {
                    search.min_curl_singular_value = f64::MAX;
                }
                let status = match ctx.scenario.expect.classification {
                    Some(want) if want != search.verdict => CheckStatus::Fail,
                    _ => CheckStatus::Pass,
                };
                Ok(CheckEntry {
                    check: "symmetrizer_search".into(),
                    pair_id: None,
                    status,
                    reason: None,
                    report: None,
                    search: Some(search),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    for e in &entries {
        if e.status != CheckStatus::Fail {
            continue;
        }
        let pair = e.pair_id.as_deref().unwrap_or("-");
        match (&e.report, &e.search) {
            (Some(r), _) => report.fail(format!(
                "{} [{}]: max residual {:e} exceeds {:e}",
                e.check, pair, r.max_residual, r.threshold
            )),
            (_, Some(s)) => report.fail(format!(
                "symmetrizer_search: verdict {} contradicts asserted {}",
                verdict_name(s.verdict),
                verdict_name(ctx.scenario.expect.classification.unwrap_or(s.verdict))
            )),
            _ => {}
        }
    }
    if ctx.scenario.expect.classification.is_some() && !entries.iter().any(|e| e.search.is_some()) {
        return Err(CliError::Input("/expect/classification needs a symmetrizer_search check".into()));
    }
    report.checks = Some(entries);
    Ok(report)
}

fn verdict_name(v: SearchVerdict) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn sample_time(field: &PiecewiseField) -> f64 {
    let t_end = field.t_end();
    if t_end.is_finite() {
        0.5 * (field.t_start() + t_end)
    } else {
        field.t_start() + 1.0
    }
}

pub fn riemann(ctx: &Context) -> Result<Report> {
    if ctx.scenario.fields.is_empty() {
        return Err(CliError::Input("/fields: riemann needs at least one field".into()));
    }
    let mut report = ctx.report("riemann");
    let entries = (0..ctx.scenario.fields.len())
        .into_par_iter()
        .map(|i| {
            let (field, star) = ctx.field(i)?;
            let t = sample_time(&field);
            Ok(RiemannEntry {
                label: ctx.scenario.fields[i].label.clone(),
                description: field.describe(),
                star,
                t,
                shocks: field.shock_data(t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    report.riemann = Some(entries);
    Ok(report)
}

pub fn action(ctx: &Context) -> Result<Report> {
    let sc = &ctx.scenario;
    if sc.windows.is_empty() && sc.variations.is_empty() {
        return Err(CliError::Input("/windows: action needs windows or variations".into()));
    }
    if !sc.windows.is_empty() && (sc.fields.is_empty() || ctx.pairs.is_empty()) {
        return Err(CliError::Input("action windows need at least one field and one pair".into()));
    }
    let mut report = ctx.report("action");
    let fields = ctx.fields()?;
    let mut jobs = Vec::new();
    for f in 0..fields.len() {
        for w in 0..sc.windows.len() {
            for p in 0..ctx.pairs.len() {
                jobs.push((f, w, p));
            }
        }
    }
    let actions = jobs
        .par_iter()
        .map(|&(f, w, p)| {
            let rep = action_interior(ctx.pairs[p].1.as_ref(), &fields[f], &sc.windows[w], &ctx.options)?;
            Ok(ActionEntry { field: sc.fields[f].label.clone(), report: rep })
        })
        .collect::<Result<Vec<_>>>()?;
    for a in &actions {
        if let Some(d) = a.report.route_discrepancy {
            if d > ROUTE_TOL {
                report.fail(format!("action [{} / {}]: route discrepancy {d:e} exceeds {ROUTE_TOL:e}", a.field, a.report.pair_id));
            }
        }
    }
    if ctx.system.is_conservative() {
        let mut residuals = Vec::new();
        for (f, field) in fields.iter().enumerate() {
            for w in &sc.windows {
                let residual = weak_residual(field, w)?;
                if let Some(tol) = sc.expect.max_weak_residual {
                    let worst = residual.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
                    if worst > tol || worst.is_nan() {
                        report.fail(format!("weak residual [{}]: {worst:e} exceeds {tol:e}", sc.fields[f].label));
                    }
                }
                residuals.push(ResidualEntry { field: sc.fields[f].label.clone(), window: *w, residual });
            }
        }
        report.weak_residuals = Some(residuals);
    } else if sc.expect.max_weak_residual.is_some() {
        return Err(CliError::Input("/expect/max_weak_residual: the system is not in conservation form".into()));
    }
    if !sc.variations.is_empty() {
        let variations = sc
            .variations
            .par_iter()
            .map(|v| {
                let f = ctx.field_index(&v.field)?;
                let pair = ctx.pair(v.pair.as_deref())?;
                let schedule = v.schedule.clone().unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec());
                let fv = first_variation(pair.as_ref(), &fields[f], &v.bump, &schedule, &v.window, &ctx.options)?;
                Ok(VariationEntry { field: v.field.clone(), pair_id: pair.id(), variation: fv })
            })
            .collect::<Result<Vec<_>>>()?;
        for (v, spec) in variations.iter().zip(&sc.variations) {
            if let Some(want) = spec.expect {
                let got = v.variation.classification;
                if got != want {
                    report.fail(format!(
                        "first variation [{}]: classified {} but {} was asserted",
                        v.field,
                        stationarity_name(got),
                        stationarity_name(want)
                    ));
                }
            }
        }
        report.variations = Some(variations);
    }
    if !sc.windows.is_empty() {
        report.actions = Some(actions);
    }
    Ok(report)
}

fn stationarity_name(s: Stationarity) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

pub fn compare(ctx: &Context) -> Result<Report> {
    let spec = ctx
        .scenario
        .comparison
        .as_ref()
        .ok_or_else(|| CliError::Input("/comparison: compare needs a comparison section".into()))?;
    let labels: Vec<String> = if spec.candidates.is_empty() {
        ctx.scenario.fields.iter().map(|f| f.label.clone()).collect()
    } else {
        spec.candidates.clone()
    };
    if labels.is_empty() {
        return Err(CliError::Input("/fields: compare needs at least one candidate".into()));
    }
    let candidates = labels
        .par_iter()
        .map(|l| Ok(Candidate::new(l.clone(), ctx.field(ctx.field_index(l)?)?.0)))
        .collect::<Result<Vec<_>>>()?;
    let pair = ctx.pair(spec.pair.as_deref())?;
    let ranking = match spec.mode {
        RankMode::Local => {
            let [a, b] = spec
                .domain
                .ok_or_else(|| CliError::Input("/comparison/domain: local ranking needs a domain".into()))?;
            rank_local_maxent(pair.as_ref(), &candidates, spec.t, (a, b), &ctx.options)?
        }
        RankMode::Global => rank_global(pair.as_ref(), &candidates, spec.t, &ctx.options)?,
    };
    let mut report = ctx.report("compare");
    if let Some(want) = &spec.expect_selected {
        let (mut got, mut want) = (ranking.selected.clone(), want.clone());
        got.sort();
        want.sort();
        if got != want {
            report.fail(format!("ranking: selected {got:?} but {want:?} was asserted"));
        }
    }
    report.ranking = Some(ranking);
    Ok(report)
}

fn paths(ctx: &Context, a: &State, b: &State, system: Option<&dyn System>) -> Result<Vec<Path>> {
    let families = if ctx.scenario.paths.is_empty() { vec![PathFamily::Straight] } else { ctx.scenario.paths.clone() };
    Ok(families.iter().map(|f| make_path(f, a, b, system)).collect::<entrolab_core::Result<Vec<_>>>()?)
}

fn raw(values: &[f64]) -> State {
    State::from_column_slice(values)
}

pub fn path_product(ctx: &Context) -> Result<Report> {
    let sc = &ctx.scenario;
    if sc.products.is_empty() {
        return Err(CliError::Input("/products: path-product needs at least one product".into()));
    }
    let order = ctx.options.path_order;
    let entries = sc
        .products
        .par_iter()
        .enumerate()
        .map(|(index, spec)| {
            let at = format!("/products/{index}");
            Ok(match spec {
                ProductSpec::Linear { matrix, left, right } => {
                    let n = left.len();
                    if right.len() != n || matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                        return Err(CliError::Input(format!("{at}: matrix must be {n}x{n} to match the states")));
                    }
                    let m = Matrix::from_fn(n, n, |i, j| matrix[i][j]);
                    let ps = paths(ctx, &raw(left), &raw(right), None)?;
                    let probe = perfect_derivative_probe(|u: &State| Ok(&m * u), &ps, order)?;
                    ProductEntry { index, kind: "linear".into(), probe, productions: Vec::new() }
                }
                ProductSpec::EntropyGradient { left, right, pair } => {
                    let pair = ctx.pair(pair.as_deref())?;
                    let (a, b) = (ctx.state(left, false, &format!("{at}/left"))?, ctx.state(right, false, &format!("{at}/right"))?);
                    let ps = paths(ctx, &a, &b, Some(ctx.system.as_ref()))?;
                    let probe = perfect_derivative_probe(|u: &State| pair.grad(u), &ps, order)?;
                    ProductEntry { index, kind: "entropy_gradient".into(), probe, productions: Vec::new() }
                }
                ProductSpec::ShockProduction { left, right, sigma, normal, pair } => {
                    let pair = ctx.pair(pair.as_deref())?;
                    let (a, b) = (ctx.state(left, false, &format!("{at}/left"))?, ctx.state(right, false, &format!("{at}/right"))?);
                    let sys = ctx.system.as_ref();
                    let ps = paths(ctx, &a, &b, Some(sys))?;
                    let probe = production_probe(sys, pair.as_ref(), normal, *sigma, &ps, order)?;
                    let productions = ps
                        .iter()
                        .map(|p| shock_entropy_production(sys, pair.as_ref(), normal, *sigma, p, order))
                        .collect::<entrolab_core::Result<Vec<_>>>()?;
                    ProductEntry { index, kind: "shock_production".into(), probe, productions }
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = ctx.report("path-product");
    if let Some(want) = sc.expect.path_independent {
        for e in &entries {
            let got = e.probe.verdict == PathVerdict::PathIndependent;
            if got != want {
                report.fail(format!(
                    "product {} ({}): spread {:e} is {} but path independence = {want} was asserted",
                    e.index,
                    e.kind,
                    e.probe.max_spread,
                    if got { "path independent" } else { "path dependent" }
                ));
            }
        }
    }
    report.products = Some(entries);
    Ok(report)
}
