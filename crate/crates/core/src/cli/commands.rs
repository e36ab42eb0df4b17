use super::output::{line_chart, Csv, Series};
use super::{grid_from, params_from, Cli, CliError, Config, RunManifest};
use crate::angular::AngularFunction;
use crate::csv_row;
use crate::experiments::{self, Session};
use crate::fields::asyf::{read_fields, write_fields};
use crate::fields::{AsymptoticField, AsymptoticPart, AsymptoticTerm, Grid, RemainderGrid, SpaceParams};
use crate::fit::geomspace;
use crate::heat::{heat_field, shift_scan, smoothing_probes, smoothing_scan};
use crate::laplace::{sectorial_probes, sectorial_scan, ScanResult};
use crate::navier_stokes::{
    ball_radius, build_datum, constants_seeded, picard_solve, solve_complex_ray, verify_invariants, Blob, ConstantEstimates,
    DatumSpec, InitialIterate, NsError, SolveConfig, Trajectory,
};
use num_complex::Complex64 as C64;
use serde_json::json;
use std::f64::consts::PI;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

const DEFAULT_PARAMS: SpaceParams = SpaceParams { m: 2, n: 0, big_n: 2, ell: 0, gamma0: SpaceParams::DEFAULT_GAMMA0 };

fn write_asyf(path: &Path, fields: &[&AsymptoticField]) -> Result<(), CliError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    write_fields(&mut w, fields)?;
    Ok(())
}

fn values_csv(fields: &[&AsymptoticField]) -> Csv {
    let mut csv = Csv::new(&["component", "x", "y", "re", "im"]);
    for (c, f) in fields.iter().enumerate() {
        for (p, v) in f.grid().points().iter().zip(f.grid_values()) {
            csv_row!(csv, c, p.x, p.y, v.re, v.im);
        }
    }
    csv
}

fn push_terms(csv: &mut Csv, label: &str, part: &AsymptoticPart) {
    for (k, l, a) in part.iter() {
        let m = a.cutoff() as i64;
        for j in -m..=m {
            let c = a.mode(j);
            if c != C64::new(0.0, 0.0) {
                csv_row!(csv, label, k, l, j, c.re, c.im);
            }
        }
    }
}

fn integer(line: usize, section: &str, key: &str, v: f64, what: &str) -> Result<u32, CliError> {
    if v.fract() != 0.0 || !(0.0..=64.0).contains(&v) {
        return Err(Config::at_line(line, section, key, format!("{what} must be a whole number in 0..=64, got {v}")).into());
    }
    Ok(v as u32)
}

fn blobs(cfg: &Config, section: &str) -> Result<Vec<Blob>, CliError> {
    cfg.all_floats(section, "blob")
        .into_iter()
        .map(|(line, v)| {
            if v[2] <= 0.0 {
                return Err(Config::at_line(line, section, "blob", "width must be positive").into());
            }
            Ok(Blob { x: v[0], y: v[1], width: v[2], amp: v[3] })
        })
        .collect()
}

fn heat_input(cfg: &Config, grid: &Arc<Grid>, params: SpaceParams) -> Result<AsymptoticField, CliError> {
    let amp = cfg.float("field", "amplitude").unwrap_or(1.0);
    match cfg.require_word("field", "kind")? {
        "gaussian" => {
            let s = cfg.float("field", "gaussian_s").unwrap_or(4.0);
            if s <= 0.0 {
                return Err(cfg.invalid("field", "gaussian_s", "must be positive").into());
            }
            Ok(AsymptoticField::from_fn(grid.clone(), params, move |x, y| C64::from(amp * (-(x * x + y * y) / s).exp())))
        }
        _ => {
            let mut terms = AsymptoticPart::new();
            for (line, v) in cfg.all_floats("field", "term") {
                let k = integer(line, "field", "term", v[0], "k")?;
                let l = integer(line, "field", "term", v[1], "l")?;
                let j = integer(line, "field", "term", v[2], "j")? as usize;
                if k < params.n || k > params.big_n || (l as i64) > k as i64 + params.ell as i64 {
                    return Err(Config::at_line(line, "field", "term", format!("(k, l) = ({k}, {l}) is outside the space {params:?}")).into());
                }
                let a = if j == 0 { AngularFunction::constant(v[3]) } else { AngularFunction::cos(j, v[3]).add(&AngularFunction::sin(j, v[4])) };
                terms.push(AsymptoticTerm::new(k, l, a.scale(amp)));
            }
            let bl = blobs(cfg, "field")?;
            let rem = RemainderGrid::from_fn(grid.clone(), |x, y| {
                C64::from(amp * bl.iter().map(|b| b.amp * (-((x - b.x).powi(2) + (y - b.y).powi(2)) / (b.width * b.width)).exp()).sum::<f64>())
            });
            Ok(AsymptoticField::new(params, terms, rem))
        }
    }
}

pub fn heat(cli: &Cli, cfg: &Config) -> Result<(), CliError> {
    let start = Instant::now();
    let grid = grid_from(cfg, cli)?;
    let params = params_from(cfg, DEFAULT_PARAMS)?;
    let nu = cfg.require_float("heat", "nu")?;
    if nu <= 0.0 {
        return Err(cfg.invalid("heat", "nu", "must be positive").into());
    }
    let times = cfg.require_floats("heat", "times")?;
    if times.is_empty() || times.iter().any(|t| *t < 0.0) {
        return Err(cfg.invalid("heat", "times", "need at least one non-negative time").into());
    }
    let phase = cfg.float("heat", "phase").unwrap_or(0.0);
    if phase.abs() >= PI / 2.0 {
        return Err(cfg.invalid("heat", "phase", "must lie strictly inside (−π/2, π/2)").into());
    }
    let u = heat_input(cfg, &grid, params)?;
    let out = &cli.out;
    write_asyf(&out.join("input.asyf"), &[&u])?;
    let mut coeffs = Csv::new(&["time_index", "k", "l", "j", "re", "im"]);
    let mut closed = Csv::new(&["t", "sup_error"]);
    let gaussian = cfg.word("field", "kind") == Some("gaussian");
    let s = cfg.float("field", "gaussian_s").unwrap_or(4.0);
    let amp = cfg.float("field", "amplitude").unwrap_or(1.0);
    let mut edge: f64 = 0.0;
    let mut errors = vec![];
    let mut history: Vec<(f64, AsymptoticPart)> = vec![];
    for (i, &t) in times.iter().enumerate() {
        let z = C64::from_polar(t, phase);
        let v = heat_field(&u, z, nu).map_err(|e| CliError::Usage(e.to_string()))?;
        write_asyf(&out.join(format!("heat_{i:03}.asyf")), &[&v])?;
        values_csv(&[&v]).write(&out.join(format!("heat_{i:03}.csv")))?;
        push_terms(&mut coeffs, &i.to_string(), v.terms());
        edge = edge.max(v.rem().boundary_max());
        history.push((t, v.terms().clone()));
        if gaussian {
            let hw = grid.half_width() / 2.0;
            let mut err: f64 = 0.0;
            let d = s + 4.0 * nu * z;
            for (p, val) in grid.points().iter().zip(v.grid_values()) {
                if p.x.abs() <= hw && p.y.abs() <= hw {
                    let exact = amp * s / d * (-(p.r * p.r) / d).exp();
                    err = err.max((val - exact).norm());
                }
            }
            csv_row!(closed, t, err);
            errors.push(err);
        }
    }
    coeffs.write(&out.join("coefficients.csv"))?;
    if gaussian {
        closed.write(&out.join("closed_form.csv"))?;
    }
    if cfg.word("heat", "svg") == Some("yes") {
        let mut keys: Vec<(u32, u32)> = history.iter().flat_map(|(_, p)| p.iter().map(|(k, l, _)| (k, l))).collect();
        keys.sort_unstable();
        keys.dedup();
        let series: Vec<Series> = keys
            .iter()
            .map(|&(k, l)| Series {
                label: format!("k={k} l={l}"),
                points: history.iter().map(|(t, p)| (*t, p.get(k, l).map(|a| a.max_abs()).unwrap_or(0.0))).collect(),
            })
            .collect();
        std::fs::write(out.join("terms.svg"), line_chart("term magnitudes", "t", "max |a_k^l|", &series, false, true))?;
    }
    let mut m = RunManifest::new("heat", cfg, cli.seed);
    m.grid = Some(grid.spec);
    m.params = Some(params);
    m.box_edge_remainder = Some(edge);
    m.results = json!({ "times": times, "phase": phase, "nu": nu, "closed_form_sup_error": errors });
    m.wall_clock_seconds = start.elapsed().as_secs_f64();
    m.write(out)?;
    println!("heat: {} snapshot(s) written to {}", times.len(), out.display());
    Ok(())
}

fn datum_from(cfg: &Config) -> Result<DatumSpec, CliError> {
    let mut d = match cfg.require_word("datum", "preset")? {
        "zero" => DatumSpec::zero(),
        "short_range" => DatumSpec::short_range(),
        _ => DatumSpec::default(),
    };
    if let Some(c) = cfg.floats("datum", "constant") {
        d.constant = [c[0], c[1]];
    }
    if let Some(v) = cfg.float("datum", "swirl") {
        d.swirl = v;
    }
    if let Some(v) = cfg.float("datum", "circulation") {
        d.circulation = v;
    }
    if let Some(c) = cfg.floats("datum", "dipole") {
        d.dipole = [c[0], c[1]];
    }
    if let Some(c) = cfg.floats("datum", "log_dipole") {
        d.log_dipole = [c[0], c[1]];
    }
    let extra = blobs(cfg, "datum")?;
    if !extra.is_empty() {
        d.blobs = extra;
    }
    Ok(d)
}

fn solve_config(cfg: &Config) -> Result<(SolveConfig, f64), CliError> {
    let base = SolveConfig::default();
    let nu = cfg.require_float("solve", "nu")?;
    let t0 = cfg.require_float("solve", "t0")?;
    let count = |key: &str, d: usize| -> Result<usize, CliError> { Ok(cfg.count("solve", key)?.unwrap_or(d)) };
    let constants = cfg.floats("solve", "constants").map(|c| ConstantEstimates { big_m: c[0], c: c[1], kappa: c[2] });
    let sc = SolveConfig {
        nu,
        t0,
        theta: cfg.float("solve", "theta").unwrap_or(base.theta),
        rho: cfg.float("solve", "rho"),
        n_time: count("n_time", base.n_time)?,
        quad_nodes: count("quad_nodes", base.quad_nodes)?,
        tol: cfg.float("solve", "tol").unwrap_or(base.tol),
        max_iter: count("max_iter", base.max_iter)?,
        max_restarts: count("max_restarts", base.max_restarts as usize)? as u32,
        initial: match cfg.word("solve", "initial") {
            Some("datum") => InitialIterate::Datum,
            _ => InitialIterate::Heat,
        },
        t_override: cfg.float("solve", "t_end"),
        constants,
    };
    if let Some(c) = constants {
        if !(c.big_m >= 1.0 && c.c > 0.0 && c.kappa >= 0.0) {
            return Err(cfg.invalid("solve", "constants", "need M ≥ 1, C > 0 and κ ≥ 0").into());
        }
    }
    if let Some(t) = sc.t_override {
        if t <= 0.0 {
            return Err(cfg.invalid("solve", "t_end", "must be positive").into());
        }
    }
    if let Err(NsError::Config(msg)) = sc.validate() {
        let key = ["nu", "t0", "theta", "tol", "rho", "n_time", "quad_nodes", "max_iter"]
            .into_iter()
            .find(|k| msg.to_lowercase().starts_with(&k.to_lowercase()) || msg.contains(k))
            .unwrap_or("nu");
        return Err(cfg.invalid("solve", key, msg).into());
    }
    let phi = cfg.float("solve", "phi").unwrap_or(0.0);
    if phi.abs() >= sc.theta {
        return Err(cfg.invalid("solve", "phi", format!("|phi| = {} must be below theta = {}", phi.abs(), sc.theta)).into());
    }
    Ok((sc, phi))
}

fn ns_error(e: NsError, cfg: &Config) -> CliError {
    match e {
        NsError::NoContraction { .. } => CliError::NoContraction(e.to_string()),
        NsError::OutsideBall { .. } => cfg.invalid("solve", "rho", e.to_string()).into(),
        NsError::NotDivergenceFree(_) => CliError::Usage(e.to_string()),
        NsError::Config(m) => CliError::Usage(m),
        other => CliError::Io(other.to_string()),
    }
}

fn trajectory_outputs(dir: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let comps: Vec<&AsymptoticField> = traj.fields.iter().flat_map(|f| f.comps.iter()).collect();
    write_asyf(&dir.join("trajectory.asyf"), &comps)?;
    let mut nodes = Csv::new(&["index", "t_re", "t_im", "a_norm"]);
    for (i, (z, f)) in traj.nodes().iter().zip(&traj.fields).enumerate() {
        csv_row!(nodes, i, z.re, z.im, f.a_norm());
    }
    nodes.write(&dir.join("nodes.csv"))?;
    let mut log = Csv::new(&["iteration", "sup_difference", "ratio"]);
    for r in &traj.contraction_log {
        csv_row!(log, r.iteration, r.diff, r.ratio);
    }
    log.write(&dir.join("contraction.csv"))?;
    let mut rs = Csv::new(&["restart", "rejected_t", "iteration", "ratio"]);
    for (i, r) in traj.restarts.iter().enumerate() {
        csv_row!(rs, i + 1, r.t_rejected, r.iteration, r.ratio);
    }
    rs.write(&dir.join("restarts.csv"))?;
    Ok(())
}

pub fn solve(cli: &Cli, cfg: &Config) -> Result<(), CliError> {
    let start = Instant::now();
    let grid = grid_from(cfg, cli)?;
    let params = params_from(cfg, DEFAULT_PARAMS)?;
    let spec = datum_from(cfg)?;
    let (sc, phi) = solve_config(cfg)?;
    let u0 = build_datum(&grid, params, &spec).map_err(|e| ns_error(e, cfg))?;
    let mut manifest = RunManifest::new("solve", cfg, cli.seed);
    manifest.grid = Some(grid.spec);
    manifest.params = Some(params);
    let finish = |mut m: RunManifest, err: Option<CliError>| -> Result<(), CliError> {
        m.exit_code = err.as_ref().map(|e| e.exit_code()).unwrap_or(0);
        m.wall_clock_seconds = start.elapsed().as_secs_f64();
        m.write(&cli.out)?;
        err.map_or(Ok(()), Err)
    };
    let rho = ball_radius(&u0, &sc);
    let constants = match constants_seeded(&u0, &sc, rho, cli.seed) {
        Ok(c) => c,
        Err(e) => return finish(manifest, Some(ns_error(e, cfg))),
    };
    manifest.constants = Some(constants);
    let sc = SolveConfig { constants: Some(constants), ..sc };
    let result = if phi == 0.0 { picard_solve(&u0, &sc) } else { solve_complex_ray(&u0, phi, &sc) };
    let traj = match result {
        Ok(t) => t,
        Err(e) => {
            if let NsError::NoContraction { rejected, .. } = &e {
                for r in rejected {
                    manifest.ledger.push(format!("restart: T = {:.6e} rejected at iteration {} (ratio {:.3e})", r.t_rejected, r.iteration, r.ratio));
                }
            }
            let err = ns_error(e, cfg);
            manifest.ledger.push(err.to_string());
            return finish(manifest, Some(err));
        }
    };
    for r in &traj.restarts {
        manifest.ledger.push(format!("restart: T = {:.6e} rejected at iteration {} (ratio {:.3e})", r.t_rejected, r.iteration, r.ratio));
    }
    if !traj.converged {
        manifest.ledger.push(format!("iteration stopped at max_iter = {} before reaching tol", sc.max_iter));
    }
    trajectory_outputs(&cli.out, &traj)?;
    let mut conj_diff = None;
    if phi != 0.0 {
        let mirror_cfg = SolveConfig { t_override: Some(traj.t_end), ..sc.clone() };
        match solve_complex_ray(&u0, -phi, &mirror_cfg) {
            Ok(mirror) => {
                let mut csv = Csv::new(&["index", "t_re", "t_im", "conjugation_difference"]);
                let mut worst: f64 = 0.0;
                for (i, (z, (a, b))) in traj.nodes().iter().zip(traj.fields.iter().zip(&mirror.fields)).enumerate() {
                    let d = a.conj().sub(b).map_err(|e| CliError::Io(e.to_string()))?.a_norm();
                    worst = worst.max(d);
                    csv_row!(csv, i, z.re, z.im, d);
                }
                csv.write(&cli.out.join("conjugation.csv"))?;
                conj_diff = Some(worst);
            }
            Err(e) => manifest.ledger.push(format!("mirror ray failed: {e}")),
        }
    }
    let report = verify_invariants(&traj).map_err(|e| ns_error(e, cfg))?;
    let mut inv = Csv::new(&["t", "max_div", "div_relative", "a0_drift", "decay_exponent", "residual"]);
    for n in &report.nodes {
        csv_row!(inv, n.t, n.max_div, n.div_relative, n.a0_drift, n.decay_exponent, n.residual);
    }
    inv.write(&cli.out.join("invariants.csv"))?;
    manifest.box_edge_remainder = Some(traj.fields.iter().flat_map(|f| f.comps.iter()).map(|c| c.rem().boundary_max()).fold(0.0, f64::max));
    manifest.results = json!({
        "phi": phi,
        "t_end": traj.t_end,
        "rho": traj.rho,
        "alpha": traj.alpha,
        "max_ratio": traj.max_ratio(),
        "iterations": traj.iterations(),
        "converged": traj.converged,
        "conjugation_difference": conj_diff,
        "all_invariants_ok": report.all_ok(),
    });
    let ok = report.all_ok() && traj.converged && traj.max_ratio() <= traj.alpha && conj_diff.is_none_or(|d| d <= 1e-10);
    manifest.invariants = Some(report);
    println!(
        "solve: T = {:.4e}, alpha = {:.4e}, {} iteration(s), invariants {}",
        traj.t_end,
        traj.alpha,
        traj.iterations(),
        if ok { "ok" } else { "VIOLATED" }
    );
    let err = (!ok).then(|| CliError::Tolerance("solver checks failed; see manifest.json".into()));
    finish(manifest, err)
}

struct ScanRow {
    alpha: (u32, u32),
    tau: u32,
    result: ScanResult,
    expected: f64,
    tolerance: f64,
}

pub fn scan(cli: &Cli, cfg: &Config, kind_arg: Option<&str>) -> Result<(), CliError> {
    let start = Instant::now();
    let kind = match kind_arg {
        Some(k) if k == "smoothing" || k == "sectorial" => k.to_string(),
        Some(k) => return Err(CliError::Usage(format!("unknown scan kind `{k}` (expected smoothing or sectorial)"))),
        None => cfg.require_word("scan", "kind")?.to_string(),
    };
    let lo = cfg.require_float("scan", "radius_min")?;
    let hi = cfg.require_float("scan", "radius_max")?;
    let count = cfg.count("scan", "radius_count")?.ok_or_else(|| CliError::from(cfg.require_int("scan", "radius_count").unwrap_err()))?;
    if count < 2 {
        return Err(cfg.invalid("scan", "radius_count", format!("empty radius sweep: need at least 2 radii, got {count}")).into());
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(cfg.invalid("scan", "radius_max", format!("need 0 < radius_min < radius_max, got {lo} and {hi}")).into());
    }
    let radii = geomspace(lo, hi, count);
    let smoothing = kind == "smoothing";
    let angle = cfg.float("scan", "angle").unwrap_or(if smoothing { 0.0 } else { 3.0 * PI / 4.0 });
    let nu = cfg.float("scan", "nu").unwrap_or(1.0);
    let mut alphas = vec![];
    for (line, v) in cfg.all_floats("scan", "alpha") {
        alphas.push((integer(line, "scan", "alpha", v[0], "α₁")?, integer(line, "scan", "alpha", v[1], "α₂")?));
    }
    if alphas.is_empty() {
        alphas = vec![(0, 0), (1, 0), (2, 0), (1, 1)];
    }
    if let Some(&(a, b)) = alphas.iter().find(|(a, b)| a + b > 2) {
        return Err(cfg.invalid("scan", "alpha", format!("|α| ≤ 2 required, got ({a}, {b})")).into());
    }
    let map_err = |e: crate::fields::FieldError| CliError::Usage(e.to_string());
    let mut rows = vec![];
    let base = SpaceParams::new(0, 0, 0, 0);
    if smoothing {
        if angle.abs() >= PI / 2.0 {
            return Err(cfg.invalid("scan", "angle", "smoothing rays need |angle| < π/2").into());
        }
        let probes = smoothing_probes(base);
        for &a in &alphas {
            let result = smoothing_scan(&probes, a, angle, &radii, nu).map_err(map_err)?;
            rows.push(ScanRow { alpha: a, tau: 0, result, expected: -((a.0 + a.1) as f64) / 2.0, tolerance: 0.15 });
        }
        let shifts = cfg.floats("scan", "shifts").unwrap_or(vec![1.0, 2.0]);
        for tau in shifts {
            let line = cfg.line_of("scan", "shifts").unwrap_or(0);
            let tau = integer(line, "scan", "shifts", tau, "τ")?;
            let probes = smoothing_probes(SpaceParams::new(0, tau, tau, 0));
            let result = shift_scan(&probes, tau, angle, &radii, nu).map_err(map_err)?;
            rows.push(ScanRow { alpha: (0, 0), tau, result, expected: -(tau as f64) / 2.0, tolerance: 0.15 });
        }
    } else {
        let probes = sectorial_probes(base);
        for &a in &alphas {
            let result = sectorial_scan(&probes, angle, &radii, a).map_err(map_err)?;
            rows.push(ScanRow { alpha: a, tau: 0, result, expected: -(1.0 - (a.0 + a.1) as f64 / 2.0), tolerance: 0.1 });
        }
    }
    let mut table = Csv::new(&["kind", "alpha_x", "alpha_y", "tau", "slope", "stderr", "ci_low", "ci_high", "expected", "tolerance", "pass"]);
    let mut data = Csv::new(&["series", "radius", "ratio"]);
    let mut series = vec![];
    let mut all_pass = true;
    for r in &rows {
        let f = &r.result.fit;
        let pass = (f.slope - r.expected).abs() <= r.tolerance;
        all_pass &= pass;
        csv_row!(table, kind.as_str(), r.alpha.0, r.alpha.1, r.tau, f.slope, f.slope_stderr, f.slope - 2.0 * f.slope_stderr, f.slope + 2.0 * f.slope_stderr, r.expected, r.tolerance, pass);
        let label = if r.tau > 0 { format!("tau={}", r.tau) } else { format!("alpha=({},{})", r.alpha.0, r.alpha.1) };
        for (x, y) in r.result.abscissa.iter().zip(&r.result.ratio) {
            csv_row!(data, label.as_str(), *x, *y);
        }
        series.push(Series { label, points: r.result.abscissa.iter().copied().zip(r.result.ratio.iter().copied()).collect() });
    }
    table.write(&cli.out.join("scan.csv"))?;
    data.write(&cli.out.join("scan_data.csv"))?;
    let x_label = if smoothing { "|z|" } else { "|λ|" };
    std::fs::write(cli.out.join("scan.svg"), line_chart(&format!("{kind} scan"), x_label, "ratio", &series, true, true))?;
    let mut m = RunManifest::new("scan", cfg, cli.seed);
    m.results = json!({
        "kind": kind,
        "angle": angle,
        "slopes": rows.iter().map(|r| json!({"alpha": [r.alpha.0, r.alpha.1], "tau": r.tau, "slope": r.result.fit.slope, "expected": r.expected})).collect::<Vec<_>>(),
    });
    m.exit_code = if all_pass { 0 } else { 4 };
    m.wall_clock_seconds = start.elapsed().as_secs_f64();
    m.write(&cli.out)?;
    for r in &rows {
        println!("scan {kind}: alpha {:?} tau {} slope {:.4} (expected {})", r.alpha, r.tau, r.result.fit.slope, r.expected);
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Tolerance("fitted slopes outside tolerance; see scan.csv".into()))
    }
}

pub fn verify(cli: &Cli, cfg: &Config, criteria: &[String]) -> Result<(), CliError> {
    let start = Instant::now();
    let ids: Vec<String> = if criteria.is_empty() { experiments::ALL.iter().map(|s| s.to_string()).collect() } else { criteria.iter().map(|c| c.to_uppercase()).collect() };
    if let Some(bad) = ids.iter().find(|id| !experiments::ALL.contains(&id.as_str())) {
        return Err(CliError::Usage(format!("unknown criterion `{bad}` (expected A1..A10)")));
    }
    let mut session = Session::new(cli.seed);
    let mut csv = Csv::new(&["id", "passed", "seconds", "detail"]);
    let mut outcomes = vec![];
    for id in &ids {
        let o = session.run(id);
        println!("{}", o.line());
        csv_row!(csv, o.id.as_str(), o.passed, o.seconds, format!("\"{}\"", o.detail.replace('"', "'")).as_str());
        outcomes.push(o);
    }
    csv.write(&cli.out.join("acceptance.csv"))?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.as_str()).collect();
    let mut m = RunManifest::new("verify", cfg, cli.seed);
    m.results = serde_json::to_value(&outcomes).map_err(|e| CliError::Io(e.to_string()))?;
    m.exit_code = if failed.is_empty() { 0 } else { 4 };
    m.wall_clock_seconds = start.elapsed().as_secs_f64();
    m.write(&cli.out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!("failed: {}", failed.join(", "))))
    }
}

pub fn export(cli: &Cli, input: &Path) -> Result<(), CliError> {
    let bytes = std::fs::read(input)?;
    let fields = read_fields(&mut bytes.as_slice()).map_err(|e| CliError::Usage(format!("{}: {e}", input.display())))?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("field").to_string();
    let refs: Vec<&AsymptoticField> = fields.iter().collect();
    write_asyf(&cli.out.join(format!("{stem}.asyf")), &refs)?;
    values_csv(&refs).write(&cli.out.join(format!("{stem}_values.csv")))?;
    let mut terms = Csv::new(&["component", "k", "l", "j", "re", "im"]);
    for (i, f) in fields.iter().enumerate() {
        push_terms(&mut terms, &i.to_string(), f.terms());
    }
    terms.write(&cli.out.join(format!("{stem}_terms.csv")))?;
    println!("export: {} component(s) from {}", fields.len(), input.display());
    Ok(())
}
