//! One function per subcommand: resolve parameters, run rows, collect checks.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde_json::{json, Value};

use qtorus::algebra::{QtElement, Theta};
use qtorus::hardy::{
    bmo_norm, convexity_check, default_r_grid, duality_ratio, g_norm, g_square, garsia_equivalence_check,
    lusin_square_experiment, mixed_hardy, BmoReport, BmoRow, BmoVariant, HardySide, LusinParams, LusinReport,
    MatrixTrigPoly, GARSIA_LOWER, GARSIA_UPPER,
};
use qtorus::kernels::{circular_poisson_kernel, TorusPoint, Truncation};
use qtorus::lattice::{folner_overlap, FolnerBox, MultiIndex};
use qtorus::matrix::{folner_compress, represent};
use qtorus::random::{random_complex, random_element, random_theta, rng};
use qtorus::schur::{anticommuting_probe, fs_identity_check, toeplitz_lift};
use qtorus::summation::{
    bochner_riesz_symbol, br_recurrence_sides, circular_poisson_symbol, critical_index, fejer_symbol,
    mean_convergence_table, square_poisson_symbol, stein_index_sweep, Method, MultiplierSymbol, PhiFunction,
};

use crate::config::{check_exponent, each, field_error, grid, monotone, ExperimentConfig, Format, MethodName, ThetaPreset};
use crate::report::{input_hash, run_rows, Cell, CliError, Check, Report, Table};

type Outcome = Result<Report, CliError>;

/// Tolerances asserted by the subcommands.
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const BR_TOL: f64 = 1e-8;
pub const STEIN_TOL: f64 = 1e-2;
pub const FS_TOL: f64 = 1e-13;
pub const LIFT_TOL: f64 = 1e-15;
pub const ANTICOMMUTE_TOL: f64 = 1e-12;
pub const PSD_FLOOR: f64 = -1e-10;
pub const SHIFT_TOL: f64 = 1e-10;
pub const OVERLAP_TOL: f64 = 1e-14;

fn default_n_rep(d: usize) -> u32 {
    if d <= 2 { 4 } else { 2 }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn min_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(f64::INFINITY, f64::min)
}

fn count(cfg_value: Option<usize>, name: &str, default: usize) -> Result<usize, CliError> {
    let v = cfg_value.unwrap_or(default);
    if v == 0 {
        return Err(field_error(name, "must be at least 1").into());
    }
    Ok(v)
}

fn element_echo(theta: &Theta, x: &QtElement) -> Value {
    json!({"d": theta.dim(), "theta": theta.upper_entries(), "input_hash": input_hash(x), "terms": x.len()})
}

fn default_schedule(method: MethodName) -> Vec<f64> {
    match method {
        MethodName::Fejer => (1..=64).map(f64::from).collect(),
        MethodName::SquarePoisson | MethodName::CircularPoisson => vec![0.5, 0.75, 0.9, 0.95, 0.99, 0.995, 0.999],
        MethodName::BochnerRiesz => vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        MethodName::Heat => vec![1.0, 0.1, 0.01, 1e-3, 1e-4],
        MethodName::PhiEps => vec![1.0, 0.5, 0.1, 0.05, 0.01, 5e-3, 1e-3],
    }
}

pub fn converge(cfg: &ExperimentConfig) -> Outcome {
    let d = cfg.dim(2, 1, 3)?;
    let theta = cfg.theta(d, ThetaPreset::Golden)?;
    let x = cfg.element(&theta)?;
    let n_rep = cfg.n_rep(default_n_rep(d))?;
    let p = cfg.exponent(2.0)?;
    let name = cfg.method.unwrap_or(MethodName::Fejer);
    let alpha = cfg.alpha.unwrap_or(d as f64);
    let method = match name {
        MethodName::Fejer => Method::Fejer,
        MethodName::SquarePoisson => Method::SquarePoisson,
        MethodName::CircularPoisson => Method::CircularPoisson,
        MethodName::BochnerRiesz => {
            if !(alpha >= 0.0) {
                return Err(field_error("alpha", format!("{alpha} is negative")).into());
            }
            Method::BochnerRiesz { alpha: c(alpha) }
        }
        MethodName::Heat => Method::Heat,
        MethodName::PhiEps => Method::PhiEps(PhiFunction::poisson(d)),
    };
    let schedule = grid("schedule", &cfg.schedule, || default_schedule(name))?;
    match name {
        MethodName::Fejer => each("schedule", &schedule, |v| v >= 0.0 && v.fract() == 0.0, "nonnegative integers")?,
        MethodName::SquarePoisson | MethodName::CircularPoisson => {
            each("schedule", &schedule, |v| (0.0..1.0).contains(&v), "[0, 1)")?
        }
        _ => each("schedule", &schedule, |v| v > 0.0, "(0, ∞)")?,
    }
    monotone("schedule", &schedule, method.increasing())?;

    let rows = run_rows(schedule.len(), cfg.seed(), |i, _| {
        mean_convergence_table(&x, &method, p, &schedule[i..=i], n_rep).map(|mut t| t.remove(0))
    })?;
    let mut table = Table::new(["param", "error", "exact_error", "defect"]);
    for r in rows.ok() {
        table.push(vec![r.param.into(), r.error.into(), r.exact_error.into(), r.defect.into()]);
    }
    let mut checks = Vec::new();
    if p == 2.0 {
        checks.push(Check::at_most(
            "error matches the p = 2 closed form",
            max_of(rows.ok().filter_map(|r| r.defect)),
            CLOSED_FORM_TOL,
        ));
    }
    let mut parameters = json!({
        "element": element_echo(&theta, &x),
        "method": name,
        "p": p,
        "schedule": schedule,
        "n_rep": n_rep,
    });
    if name == MethodName::BochnerRiesz {
        let critical = critical_index(d, p);
        parameters["alpha"] = json!(alpha);
        parameters["critical_index"] = json!(critical);
        parameters["above_critical"] = json!(alpha > critical);
    }
    Ok(Report {
        command: "converge",
        parameters,
        table,
        document: None,
        default_format: Format::Csv,
        checks,
        rows: rows.meta,
    })
}

pub fn kernel(cfg: &ExperimentConfig) -> Outcome {
    let d = cfg.dim(2, 1, 3)?;
    let r_grid = grid("r_grid", &cfg.r_grid, || vec![0.3, 0.5, 0.7, 0.9])?;
    each("r_grid", &r_grid, |r| r > 0.0 && r < 1.0, "(0, 1)")?;
    let points = count(cfg.points, "points", 20)?;
    let tol = cfg.tol.unwrap_or(1e-6);
    if !(tol > 0.0) {
        return Err(field_error("tol", format!("{tol} is not positive")).into());
    }
    let rows = run_rows(r_grid.len() * points, cfg.seed(), |i, seed| {
        let r = r_grid[i / points];
        let mut g = rng(seed);
        let s: Vec<f64> = (0..d).map(|_| g.random::<f64>()).collect();
        let paths = circular_poisson_kernel(r, &TorusPoint::new(s.clone()), Truncation::Auto, tol)?;
        Ok((r, s, paths))
    })?;
    let mut header = vec!["r".to_string()];
    header.extend((1..=d).map(|j| format!("s{j}")));
    header.extend(["value_path_a", "value_path_b", "bound", "gap"].map(String::from));
    let mut table = Table::new(header);
    for (r, s, k) in rows.ok() {
        let mut row: Vec<Cell> = vec![(*r).into()];
        row.extend(s.iter().map(|&v| Cell::Num(v)));
        row.extend([k.fourier.into(), k.lattice.into(), k.bound().into(), k.gap().into()]);
        table.push(row);
    }
    let excess = max_of(rows.ok().map(|(_, _, k)| k.gap() - k.bound()));
    let worst_gap = max_of(rows.ok().map(|(_, _, k)| k.gap()));
    Ok(Report {
        command: "kernel",
        parameters: json!({"d": d, "r_grid": r_grid, "points": points, "tol": tol}),
        table,
        document: None,
        default_format: Format::Csv,
        checks: vec![Check::new(
            "paths agree within their bounds",
            excess <= 0.0,
            format!("largest gap {worst_gap:e}"),
        )],
        rows: rows.meta,
    })
}

pub fn br_check(cfg: &ExperimentConfig) -> Outcome {
    let beta = Complex64::new(cfg.beta.unwrap_or(2.0), cfg.beta_im.unwrap_or(0.0));
    let delta = cfg.delta.unwrap_or(0.25);
    if !(beta.re > 0.0) {
        return Err(field_error("beta", format!("real part {} is not positive", beta.re)).into());
    }
    if !(delta > -0.5) {
        return Err(field_error("delta", format!("{delta} is not above -1/2")).into());
    }
    let n = cfg.grid.unwrap_or(64);
    if n < 2 {
        return Err(field_error("grid", "needs at least 2 points").into());
    }
    let v_grid: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let rows = run_rows(n, cfg.seed(), |i, _| {
        let (l, r) = br_recurrence_sides(beta, delta, v_grid[i])?;
        Ok((v_grid[i], l, r))
    })?;
    let mut table = Table::new(["v", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "defect"]);
    for (v, l, r) in rows.ok() {
        table.push(vec![(*v).into(), l.re.into(), l.im.into(), r.re.into(), r.im.into(), (l - r).norm().into()]);
    }
    let worst = max_of(rows.ok().map(|(_, l, r)| (l - r).norm()));
    Ok(Report {
        command: "br-check",
        parameters: json!({"beta": [beta.re, beta.im], "delta": delta, "grid": n}),
        table,
        document: None,
        default_format: Format::Csv,
        checks: vec![Check::at_most("recurrence defect", worst, BR_TOL)],
        rows: rows.meta,
    })
}

pub fn stein_sweep(cfg: &ExperimentConfig) -> Outcome {
    let d = cfg.dim(3, 1, 3)?;
    let theta = cfg.theta(d, ThetaPreset::Golden)?;
    let x = cfg.element(&theta)?;
    let n_rep = cfg.n_rep(default_n_rep(d))?;
    let p_grid = grid("p_grid", &cfg.p_grid, || vec![1.1, 1.5, 2.0, 3.0, 4.0])?;
    for (i, &p) in p_grid.iter().enumerate() {
        check_exponent(&format!("p_grid[{i}]"), p)?;
    }
    let alpha_grid = grid("alpha_grid", &cfg.alpha_grid, || vec![0.0, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0])?;
    each("alpha_grid", &alpha_grid, |a| a >= 0.0, "[0, ∞)")?;
    let radius = cfg.radius.unwrap_or(64.0);
    if !(radius > 0.0) {
        return Err(field_error("radius", format!("{radius} is not positive")).into());
    }
    let na = alpha_grid.len();
    let rows = run_rows(p_grid.len() * na, cfg.seed(), |i, _| {
        stein_index_sweep(&x, &p_grid[i / na..=i / na], &alpha_grid[i % na..=i % na], radius, n_rep)
            .map(|mut t| t.remove(0))
    })?;
    let mut table = Table::new(["p", "alpha", "critical", "above_critical", "radius", "final_error"]);
    for r in rows.ok() {
        table.push(vec![
            r.p.into(),
            r.alpha.into(),
            r.critical.into(),
            r.above_critical.into(),
            r.radius.into(),
            r.final_error.into(),
        ]);
    }
    let above: Vec<_> = rows.ok().filter(|r| r.above_critical).collect();
    let worst = max_of(above.iter().map(|r| r.final_error));
    Ok(Report {
        command: "stein-sweep",
        parameters: json!({
            "element": element_echo(&theta, &x),
            "p_grid": p_grid,
            "alpha_grid": alpha_grid,
            "radius": radius,
            "n_rep": n_rep,
        }),
        table,
        document: None,
        default_format: Format::Csv,
        checks: vec![Check::new(
            "final error below 1e-2 above the critical index",
            above.iter().all(|r| r.final_error < STEIN_TOL),
            format!("{} rows above critical, max error {worst:e}", above.len()),
        )],
        rows: rows.meta,
    })
}

fn random_symbol<R: Rng>(d: usize, g: &mut R) -> qtorus::error::Result<(&'static str, f64, MultiplierSymbol)> {
    Ok(match g.random_range(0..4) {
        0 => {
            let n = g.random_range(0..=4u32);
            ("fejer", n as f64, fejer_symbol(n, d))
        }
        1 => {
            let r = g.random_range(0.0..0.99);
            ("square-poisson", r, square_poisson_symbol(r, d)?)
        }
        2 => {
            let r = g.random_range(0.0..0.99);
            ("circular-poisson", r, circular_poisson_symbol(r, d)?)
        }
        _ => {
            let radius = g.random_range(1.0..4.0);
            ("bochner-riesz", radius, bochner_riesz_symbol(c(g.random_range(0.0..2.0)), radius, d)?)
        }
    })
}

pub fn schur_check(cfg: &ExperimentConfig) -> Outcome {
    let trials = count(cfg.trials, "trials", 100)?;
    let fixed_d = cfg.d.map(|_| cfg.dim(1, 1, 3)).transpose()?;
    let fixed_n = cfg.n;
    if let Some(n) = fixed_n {
        if !(1..=6).contains(&n) {
            return Err(field_error("n", format!("{n} is outside 1..=6")).into());
        }
    }
    let rows = run_rows(trials, cfg.seed(), |_, seed| {
        let mut g = rng(seed);
        let d = fixed_d.unwrap_or_else(|| g.random_range(1..=3));
        let n = fixed_n.unwrap_or_else(|| g.random_range(1..=4));
        let theta = Arc::new(random_theta(d, &mut g));
        let x = random_element(&theta, 2, 0.6, &mut g);
        let (label, param, phi) = random_symbol(d, &mut g)?;
        let (_, _, psi) = random_symbol(d, &mut g)?;
        let fs = fs_identity_check(&phi, &x, n)?;
        let b = FolnerBox::new(n, d);
        let lhs = toeplitz_lift(&phi.product(&psi)?).matrix(&b);
        let rhs = toeplitz_lift(&phi).matrix(&b).component_mul(&toeplitz_lift(&psi).matrix(&b));
        let lift = max_of((lhs - rhs).iter().map(|z| z.norm()));
        Ok((d, n, label, param, fs, lift))
    })?;
    let mut table = Table::new(["trial", "d", "N", "symbol", "param", "fs_defect", "lift_defect"]);
    for (i, (d, n, label, param, fs, lift)) in rows.ok().enumerate() {
        table.push(vec![i.into(), (*d).into(), (*n).into(), (*label).into(), (*param).into(), (*fs).into(), (*lift).into()]);
    }
    let fs = max_of(rows.ok().map(|r| r.4));
    let lift = max_of(rows.ok().map(|r| r.5));
    let document = json!({
        "trials": trials,
        "max_fs_defect": fs,
        "max_lift_defect": lift,
        "rows": table.to_json(),
    });
    Ok(Report {
        command: "schur-check",
        parameters: json!({"trials": trials, "d": fixed_d, "N": fixed_n}),
        table,
        document: Some(document),
        default_format: Format::Json,
        checks: vec![
            Check::at_most("Fourier-Schur identity", fs, FS_TOL),
            Check::at_most("lift is multiplicative", lift, LIFT_TOL),
        ],
        rows: rows.meta,
    })
}

pub fn anticommute(cfg: &ExperimentConfig) -> Outcome {
    let trials = count(cfg.trials, "trials", 20)?;
    let n = cfg.n.unwrap_or(3);
    if n > 6 {
        return Err(field_error("n", format!("{n} exceeds 6")).into());
    }
    if let Some(k) = cfg.k {
        if !(2..=5).contains(&k) {
            return Err(field_error("k", format!("{k} is outside 2..=5")).into());
        }
    }
    let rows = run_rows(trials, cfg.seed(), |_, seed| {
        let mut g = rng(seed);
        let k = cfg.k.unwrap_or_else(|| g.random_range(2..=3));
        let alpha: Vec<Complex64> = (0..k).map(|_| random_complex(&mut g)).collect();
        anticommuting_probe(&alpha, n)
    })?;
    let mut table = Table::new([
        "trial",
        "K",
        "N",
        "alpha_norm",
        "identity_defect",
        "op_norm",
        "lower",
        "upper",
        "sandwich_holds",
    ]);
    for (i, r) in rows.ok().enumerate() {
        table.push(vec![
            i.into(),
            r.k.into(),
            r.radius.into(),
            r.alpha_norm.into(),
            r.identity_defect.into(),
            r.op_norm.into(),
            r.alpha_norm.into(),
            (std::f64::consts::SQRT_2 * r.alpha_norm).into(),
            r.sandwich_holds.into(),
        ]);
    }
    let defect = max_of(rows.ok().map(|r| r.identity_defect));
    let sandwich = rows.ok().all(|r| r.sandwich_holds);
    let document = json!({
        "trials": trials,
        "max_identity_defect": defect,
        "sandwich_holds": sandwich,
        "rows": table.to_json(),
    });
    Ok(Report {
        command: "anticommute",
        parameters: json!({"trials": trials, "N": n, "K": cfg.k}),
        table,
        document: Some(document),
        default_format: Format::Json,
        checks: vec![
            Check::at_most("x*x + xx* = 2|α|²", defect, ANTICOMMUTE_TOL),
            Check::new("|α| ≤ op_norm ≤ √2|α|", sandwich, format!("{} trials", rows.ok().count())),
        ],
        rows: rows.meta,
    })
}

/// `|‖G_c(x + c)‖₂ - ‖G_c(x)‖₂|` on both sides.
fn hardy_shift_defect(x: &QtElement, n_rep: u32) -> qtorus::error::Result<f64> {
    let shifted = x.try_add(&QtElement::unit(x.theta()).scale(c(1.5)))?;
    let col = (g_norm(&shifted, 2.0, n_rep)? - g_norm(x, 2.0, n_rep)?).abs();
    let row = (g_norm(&shifted.adjoint(), 2.0, n_rep)? - g_norm(&x.adjoint(), 2.0, n_rep)?).abs();
    Ok(col.max(row))
}

pub fn hardy(cfg: &ExperimentConfig) -> Outcome {
    let d = cfg.dim(2, 1, 3)?;
    let theta = cfg.theta(d, ThetaPreset::Golden)?;
    let x = cfg.element(&theta)?;
    let n_rep = cfg.n_rep(default_n_rep(d).min(3))?;
    let p_grid = grid("p_grid", &cfg.p_grid, || vec![1.0, 1.5, 2.0, 3.0, 4.0])?;
    for (i, &p) in p_grid.iter().enumerate() {
        check_exponent(&format!("p_grid[{i}]"), p)?;
    }
    let rows = run_rows(p_grid.len(), cfg.seed(), |i, _| mixed_hardy(&x, p_grid[i], n_rep))?;
    let lib = CliError::Parameters;
    let gs = g_square(&x);
    let psd = represent(&gs, n_rep).and_then(|r| r.min_eigenvalue()).map_err(lib)?;
    let hermitian = gs.max_coeff_diff(&gs.adjoint());
    let shift = hardy_shift_defect(&x, n_rep).map_err(lib)?;
    let mut sorted: Vec<_> = rows.ok().copied().collect();
    sorted.sort_by(|a, b| a.p.total_cmp(&b.p));
    let drop = max_of(sorted.windows(2).map(|w| (w[0].column - w[1].column).max(w[0].row - w[1].row)));

    let label = |upper: bool| if upper { "upper bound: min(column, row)" } else { "exact: max(column, row)" };
    let mut table = Table::new(["p", "column", "row", "mixed", "mixed_kind"]);
    let mut norms = Vec::new();
    for m in rows.ok() {
        table.push(vec![m.p.into(), m.column.into(), m.row.into(), m.value.into(), label(m.upper_bound_only).into()]);
        norms.push(json!({
            "p": m.p,
            "column": m.column,
            "row": m.row,
            "mixed": {"value": m.value, "upper_bound_only": m.upper_bound_only, "label": label(m.upper_bound_only)},
        }));
    }
    let document = json!({
        "input_hash": input_hash(&x),
        "norms": norms,
        "grid": {"p": p_grid, "n_rep": n_rep},
        "defects": {
            "g_square_min_eigenvalue": psd,
            "g_square_hermitian_defect": hermitian,
            "constant_shift": shift,
            "p_monotonicity_drop": drop,
        },
    });
    Ok(Report {
        command: "hardy",
        parameters: json!({"element": element_echo(&theta, &x), "p_grid": p_grid, "n_rep": n_rep}),
        table,
        document: Some(document),
        default_format: Format::Json,
        checks: vec![
            Check::at_least("G_c(x)² is positive", psd, PSD_FLOOR),
            Check::at_most("constants do not move G_c", shift, SHIFT_TOL),
            Check::at_most("norms nondecreasing in p", drop, SHIFT_TOL),
        ],
        rows: rows.meta,
    })
}

fn r_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    let g = grid("r_grid", &cfg.r_grid, default_r_grid)?;
    each("r_grid", &g, |r| (0.0..1.0).contains(&r), "[0, 1)")?;
    Ok(g)
}

const VARIANTS: [BmoVariant; 2] = [BmoVariant::Standard, BmoVariant::Garsia];

fn variant_name(v: BmoVariant) -> &'static str {
    match v {
        BmoVariant::Standard => "standard",
        BmoVariant::Garsia => "garsia",
    }
}

/// Aggregate of per-r rows, as `bmo_norm` would report it.
fn summarize(x: &QtElement, rows: &[&BmoRow]) -> Value {
    let top = rows.iter().fold(None::<&BmoRow>, |best, r| match best {
        Some(b) if b.op_norm >= r.op_norm => Some(b),
        _ => Some(r),
    });
    match top {
        Some(t) => json!({
            "norm": x.trace().norm().max(t.op_norm.sqrt()),
            "sup": t.op_norm,
            "argmax_r": t.r,
            "min_eigenvalue": min_of(rows.iter().map(|r| r.min_eigenvalue)),
        }),
        None => Value::Null,
    }
}

fn bmo_rows(
    cfg: &ExperimentConfig,
    x: &QtElement,
    grid: &[f64],
    n_rep: u32,
) -> Result<crate::report::Rows<(BmoVariant, BmoRow)>, CliError> {
    let n = grid.len();
    run_rows(2 * n, cfg.seed(), |i, _| {
        let v = VARIANTS[i / n];
        let rep: BmoReport = bmo_norm(x, v, &grid[i % n..=i % n], n_rep)?;
        Ok((v, rep.rows[0]))
    })
}

pub fn bmo(cfg: &ExperimentConfig) -> Outcome {
    let d = cfg.dim(2, 1, 3)?;
    let theta = cfg.theta(d, ThetaPreset::Golden)?;
    let x = cfg.element(&theta)?;
    let n_rep = cfg.n_rep(default_n_rep(d).min(3))?;
    let grid = r_grid(cfg)?;
    let rows = bmo_rows(cfg, &x, &grid, n_rep)?;
    let mut table = Table::new(["variant", "r", "op_norm", "min_eigenvalue"]);
    for (v, r) in rows.ok() {
        table.push(vec![variant_name(*v).into(), r.r.into(), r.op_norm.into(), r.min_eigenvalue.into()]);
    }
    let of = |v: BmoVariant| rows.ok().filter(|(w, _)| *w == v).map(|(_, r)| r).collect::<Vec<_>>();
    let (std_rows, gar_rows) = (of(BmoVariant::Standard), of(BmoVariant::Garsia));
    let shifted = x.try_add(&QtElement::unit(&theta).scale(c(1.5))).map_err(CliError::Parameters)?;
    let shift = bmo_norm(&shifted, BmoVariant::Standard, &grid, n_rep)
        .map(|r| (r.sup - max_of(std_rows.iter().map(|r| r.op_norm))).abs())
        .map_err(CliError::Parameters)?;
    let std_min = min_of(std_rows.iter().map(|r| r.min_eigenvalue));
    let gar_min = min_of(gar_rows.iter().map(|r| r.min_eigenvalue));
    let document = json!({
        "input_hash": input_hash(&x),
        "norms": {"standard": summarize(&x, &std_rows), "garsia": summarize(&x, &gar_rows)},
        "grid": {"r": grid, "n_rep": n_rep, "kind": "grid sup in the truncated representation"},
        "defects": {
            "standard_min_eigenvalue": std_min,
            "garsia_min_eigenvalue": gar_min,
            "constant_shift": shift,
        },
    });
    Ok(Report {
        command: "bmo",
        parameters: json!({"element": element_echo(&theta, &x), "r_grid": grid, "n_rep": n_rep}),
        table,
        document: Some(document),
        default_format: Format::Json,
        checks: vec![
            Check::at_least("standard inner element is positive", std_min, PSD_FLOOR),
            Check::at_least("Garsia inner element is positive", gar_min, PSD_FLOOR),
            Check::at_most("constants do not move the sup", shift, SHIFT_TOL),
        ],
        rows: rows.meta,
    })
}

pub fn garsia(cfg: &ExperimentConfig) -> Outcome {
    let d = cfg.dim(2, 1, 3)?;
    let theta = cfg.theta(d, ThetaPreset::Golden)?;
    let x = cfg.element(&theta)?;
    let n_rep = cfg.n_rep(default_n_rep(d).min(3))?;
    let grid = r_grid(cfg)?;
    let bmo = bmo_rows(cfg, &x, &grid, n_rep)?;
    let convexity = run_rows(grid.len(), cfg.seed(), |i, _| convexity_check(&x, grid[i], n_rep))?;
    let check = garsia_equivalence_check(&x, &grid, n_rep).map_err(CliError::Parameters)?;

    let n = grid.len();
    let mut table = Table::new([
        "r",
        "standard_op_norm",
        "garsia_op_norm",
        "standard_min_eigenvalue",
        "garsia_min_eigenvalue",
        "convexity_min_eigenvalue",
    ]);
    for (i, &r) in grid.iter().enumerate() {
        let cell = |j: usize, f: fn(&BmoRow) -> f64| -> Cell { bmo.values[j].as_ref().map(|(_, b)| f(b)).into() };
        table.push(vec![
            r.into(),
            cell(i, |b| b.op_norm),
            cell(n + i, |b| b.op_norm),
            cell(i, |b| b.min_eigenvalue),
            cell(n + i, |b| b.min_eigenvalue),
            convexity.values[i].into(),
        ]);
    }
    let conv_min = min_of(convexity.ok().copied());
    let psd_min = min_of(bmo.ok().map(|(_, b)| b.min_eigenvalue));
    let document = json!({
        "input_hash": input_hash(&x),
        "norms": {
            "standard_sup": check.standard_sup,
            "garsia_sup": check.garsia_sup,
            "garsia_over_standard": check.ratio_low,
            "garsia_over_standard_bound": GARSIA_LOWER,
            "standard_over_garsia": check.ratio_high,
            "standard_over_garsia_bound": GARSIA_UPPER,
            "holds": check.holds,
        },
        "grid": {"r": grid, "n_rep": n_rep},
        "defects": {"convexity_min_eigenvalue": conv_min, "inner_min_eigenvalue": psd_min},
    });
    let mut meta = bmo.meta;
    meta.extend(convexity.meta.into_iter().map(|mut m| {
        m.index += 2 * n;
        m
    }));
    Ok(Report {
        command: "garsia",
        parameters: json!({"element": element_echo(&theta, &x), "r_grid": grid, "n_rep": n_rep}),
        table,
        document: Some(document),
        default_format: Format::Json,
        checks: vec![
            Check::new(
                "two-sided Garsia bounds",
                check.holds,
                format!("ratios {:.4} and {:.4}", check.ratio_low, check.ratio_high),
            ),
            Check::at_least("convexity defect is positive", conv_min, PSD_FLOOR),
            Check::at_least("inner elements are positive", psd_min, PSD_FLOOR),
        ],
        rows: meta,
    })
}

pub fn lusin(cfg: &ExperimentConfig) -> Outcome {
    let d = cfg.dim(1, 1, 2)?;
    let theta = cfg.theta(d, ThetaPreset::Zero)?;
    let x = cfg.element(&theta)?;
    let base = LusinParams::default();
    let params = LusinParams {
        beta: cfg.beta.unwrap_or(base.beta),
        p: cfg.exponent(base.p)?,
        eps0: cfg.eps0.unwrap_or(base.eps0),
        layers: cfg.layers.unwrap_or(base.layers),
        ratio: cfg.ratio.unwrap_or(base.ratio),
        nodes: cfg.nodes.unwrap_or(base.nodes),
        samples: cfg.samples.unwrap_or(base.samples),
        max_evals: cfg.max_evals.unwrap_or(base.max_evals),
    };
    for (name, ok) in [
        ("beta", params.beta > 0.0),
        ("eps0", params.eps0 > 0.0),
        ("ratio", params.ratio > 0.0 && params.ratio < 1.0),
        ("layers", params.layers > 0),
        ("nodes", params.nodes > 0),
        ("samples", params.samples > 0),
    ] {
        if !ok {
            return Err(field_error(name, "outside its domain").into());
        }
    }
    let terms: Vec<(MultiIndex, Complex64)> = x.terms().map(|(m, v)| (m.clone(), *v)).collect();
    let f = MatrixTrigPoly::scalar(d, &terms).map_err(CliError::Parameters)?;
    let levels = [params, params.refined()];
    let rows = run_rows(2, cfg.seed(), |i, _| lusin_square_experiment(&f, &levels[i]))?;

    let mut table = Table::new([
        "level",
        "layers",
        "ratio",
        "nodes",
        "samples",
        "g_norm",
        "s_norm",
        "s_over_g",
        "evaluations",
    ]);
    for (i, (lv, rep)) in levels.iter().zip(&rows.values).enumerate() {
        let r: Option<&LusinReport> = rep.as_ref();
        table.push(vec![
            (if i == 0 { "coarse" } else { "fine" }).into(),
            lv.layers.into(),
            lv.ratio.into(),
            lv.nodes.into(),
            lv.samples.into(),
            r.map(|r| r.g_norm).into(),
            r.map(|r| r.s_norm).into(),
            r.and_then(|r| r.ratio).into(),
            r.map_or(Cell::Empty, |r| r.evaluations.into()),
        ]);
    }
    let ratio = |i: usize| rows.values[i].as_ref().and_then(|r| r.ratio);
    let change = match (ratio(0), ratio(1)) {
        (Some(a), Some(b)) => Some((b / a - 1.0).abs()),
        _ => None,
    };
    let document = json!({
        "input_hash": input_hash(&x),
        "norms": {"coarse": rows.values[0], "fine": rows.values[1]},
        "grid": {"coarse": levels[0], "fine": levels[1]},
        "defects": {
            "relative_change": change,
            "within_10_percent": change.map(|c| c <= 0.1),
        },
        "experimental": true,
    });
    Ok(Report {
        command: "lusin",
        parameters: json!({"element": element_echo(&theta, &x), "coarse": levels[0], "fine": levels[1]}),
        table,
        document: Some(document),
        default_format: Format::Json,
        checks: Vec::new(),
        rows: rows.meta,
    })
}

pub fn folner(cfg: &ExperimentConfig) -> Outcome {
    let d = cfg.dim(2, 1, 3)?;
    let theta = cfg.theta(d, ThetaPreset::Golden)?;
    let radii = grid("schedule", &cfg.schedule, || vec![1.0, 2.0, 3.0, 4.0])?;
    each("schedule", &radii, |v| (0.0..=6.0).contains(&v) && v.fract() == 0.0, "{0, …, 6}")?;
    let jobs: Vec<(u32, MultiIndex)> = radii
        .iter()
        .flat_map(|&n| {
            let n = n as u32;
            FolnerBox::new(2 * n, d).iter().map(move |k| (n, k)).collect::<Vec<_>>()
        })
        .collect();
    let rows = run_rows(jobs.len(), cfg.seed(), |i, _| {
        let (n, k) = &jobs[i];
        let u = QtElement::monomial(&theta, k.clone(), c(1.0))?;
        let got = folner_compress(&represent(&u, *n)?).coeff(k);
        Ok(got)
    })?;
    let mut table = Table::new([
        "N",
        "k",
        "coefficient_re",
        "coefficient_im",
        "overlap",
        "overlap_value",
        "defect",
        "rational_match",
    ]);
    let (mut worst, mut all_match) = (0.0f64, true);
    for ((n, k), got) in jobs.iter().zip(&rows.values) {
        let Some(got) = got else { continue };
        let want = folner_overlap(*n, k);
        let (num, den) = (*want.numer() as u128, *want.denom() as u128);
        let wf = num as f64 / den as f64;
        let boxed = (2 * *n as u128 + 1).pow(d as u32);
        let scaled = (got.re * boxed as f64).round() as u128;
        let matched = got.im == 0.0 && scaled * den == num * boxed;
        let defect = (got - c(wf)).norm();
        worst = worst.max(defect);
        all_match &= matched;
        table.push(vec![
            (*n).into(),
            k.to_string().into(),
            got.re.into(),
            got.im.into(),
            format!("{num}/{den}").into(),
            wf.into(),
            defect.into(),
            matched.into(),
        ]);
    }
    Ok(Report {
        command: "folner",
        parameters: json!({"d": d, "theta": theta.upper_entries(), "radii": radii}),
        table,
        document: None,
        default_format: Format::Csv,
        checks: vec![
            Check::at_most("compression matches the overlap", worst, OVERLAP_TOL),
            Check::new("rounded coefficient is the rational overlap", all_match, format!("{} shifts", jobs.len())),
        ],
        rows: rows.meta,
    })
}

pub fn duality(cfg: &ExperimentConfig) -> Outcome {
    let d = cfg.dim(2, 1, 3)?;
    let theta = cfg.theta(d, ThetaPreset::Golden)?;
    let trials = count(cfg.trials, "trials", 5)?;
    let degree = cfg.degree.unwrap_or(1);
    let density = cfg.density.unwrap_or(1.0);
    if degree > 4 {
        return Err(field_error("degree", format!("{degree} exceeds 4")).into());
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(field_error("density", format!("{density} is outside (0, 1]")).into());
    }
    let n_rep = cfg.n_rep(2)?;
    let grid = r_grid(cfg)?;
    let rows = run_rows(trials, cfg.seed(), |_, seed| {
        let mut g = rng(seed);
        let x = random_element(&theta, degree, density, &mut g);
        let y = random_element(&theta, degree, density, &mut g);
        duality_ratio(&x, &y, &grid, n_rep)
    })?;
    let mut table = Table::new(["trial", "pairing", "hardy", "bmo", "ratio"]);
    for (i, r) in rows.ok().enumerate() {
        table.push(vec![i.into(), r.pairing.into(), r.hardy.into(), r.bmo.into(), r.ratio.into()]);
    }
    Ok(Report {
        command: "duality",
        parameters: json!({
            "d": d,
            "theta": theta.upper_entries(),
            "trials": trials,
            "degree": degree,
            "density": density,
            "r_grid": grid,
            "n_rep": n_rep,
            "sides": [HardySide::Column],
        }),
        table,
        document: None,
        default_format: Format::Csv,
        checks: Vec::new(),
        rows: rows.meta,
    })
}
