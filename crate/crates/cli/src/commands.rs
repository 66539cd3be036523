use grasscurve::families::{family_d2n, family_dn};
use grasscurve::gauge::{apply_mobius, canonicalize_a1};
use grasscurve::invariants::{
    curvature_at, det_a1_sq, gauss_slack, lemma_q, ramification, tail_probe, DEFAULT_DEGENERACY_TOL,
};
use grasscurve::parse::parse_complex;
use grasscurve::solver::{feasibility_scan, search, ScanRow, SearchProblem};
use grasscurve::{Complex64, Curve, Mobius};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::output::{
    csv_rows, deliver, emit, emit_curve, json_report, load_curve, text_report, write_file, Failure,
};
use crate::{Cli, Command, FamilyKind, Format, Global};

/// Runs one command; `Ok(false)` is a domain-level "no".
pub fn run(cli: &Cli) -> Result<bool, Failure> {
    let g = &cli.global;
    if !(g.tol > 0.0 && g.tol.is_finite()) {
        return Err(Failure::input(format!("--tol must be positive and finite, got {}", g.tol)));
    }
    match &cli.command {
        Command::Verify { path } => verify(g, path),
        Command::Sample { path, grid, extent } => sample(g, path, *grid, *extent),
        Command::Family { kind, n } => family(g, *kind, *n),
        Command::Search { n, d, max_iters, save_curve } => run_search(g, *n, *d, *max_iters, save_curve.as_deref()),
        Command::Scan { n, d_min, d_max, max_iters } => scan(g, *n, *d_min, *d_max, *max_iters),
        Command::Mobius { path, a, b, c, d, random } => mobius(g, path, [a, b, c, d], *random),
        Command::Canon { path } => {
            let c = load_curve(path)?;
            emit_curve(g, "canon", &canonicalize_a1(&c)?)?;
            Ok(true)
        }
        Command::Probe { path } => {
            let c = load_curve(path)?;
            let probe = tail_probe(&c, g.tol)?;
            emit(g, "probe", &probe)?;
            Ok(probe.dim_bound_ok)
        }
        Command::LemmaQ { trials, bound } => lemma_q_trials(g, *trials, *bound),
    }
}

#[derive(Serialize)]
struct VerifyOut {
    n: usize,
    d: usize,
    passed: bool,
    is_cc: bool,
    is_full: bool,
    degree_ok: bool,
    degree_consistent: bool,
    max_residual: f64,
    fullness_rank: usize,
    /// Absent when d < 2.
    degenerate: Option<bool>,
    /// Absent for degenerate curves.
    r_index: Option<i64>,
}

fn verify(g: &Global, path: &str) -> Result<bool, Failure> {
    let c = load_curve(path)?;
    let rep = c.verify(g.tol);
    let ram = ramification(&c, DEFAULT_DEGENERACY_TOL).ok();
    let out = VerifyOut {
        n: c.n(),
        d: c.d(),
        passed: rep.passed(),
        is_cc: rep.is_cc,
        is_full: rep.is_full,
        degree_ok: rep.degree_ok,
        degree_consistent: rep.degree_consistent,
        max_residual: rep.max_residual,
        fullness_rank: rep.fullness_rank,
        degenerate: ram.as_ref().map(|r| r.degenerate),
        r_index: ram.and_then(|r| r.r_index),
    };
    emit(g, "verify", &out)?;
    Ok(out.passed)
}

#[derive(Serialize)]
struct SampleRow {
    x: f64,
    y: f64,
    #[serde(rename = "K")]
    k: Option<f64>,
    det_a1_sq: Option<f64>,
    gauss_slack: Option<f64>,
    flag: String,
}

#[derive(Serialize)]
struct SampleOut<'a> {
    n: usize,
    d: usize,
    rows: &'a [SampleRow],
}

fn sample_point(c: &Curve, x: f64, y: f64) -> SampleRow {
    let z = Complex64::new(x, y);
    let mut flags = Vec::new();
    let mut keep = |r: grasscurve::Result<f64>, name: &str| match r {
        Ok(v) => Some(v),
        Err(e) => {
            flags.push(format!("{name}: {e}"));
            None
        }
    };
    let k = keep(curvature_at(c, z), "K");
    let det = keep(det_a1_sq(c, z), "det_a1_sq");
    let slack = keep(gauss_slack(c, z), "gauss_slack");
    let flag = if flags.is_empty() { "ok".to_string() } else { flags.join("; ") };
    SampleRow { x, y, k, det_a1_sq: det, gauss_slack: slack, flag }
}

fn sample(g: &Global, path: &str, grid: usize, extent: f64) -> Result<bool, Failure> {
    if grid == 0 || grid > 10_000 {
        return Err(Failure::input(format!("--grid must be in 1..=10000, got {grid}")));
    }
    if !(extent >= 0.0 && extent.is_finite()) {
        return Err(Failure::input(format!("--extent must be finite and non-negative, got {extent}")));
    }
    let c = load_curve(path)?;
    let coord = |i: usize| if grid == 1 { 0.0 } else { -extent + 2.0 * extent * i as f64 / (grid - 1) as f64 };
    let mut rows = Vec::with_capacity(grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            rows.push(sample_point(&c, coord(j), coord(i)));
        }
    }
    let body = match g.format {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => json_report("sample", &SampleOut { n: c.n(), d: c.d(), rows: &rows })?,
        Format::Text => {
            let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.12}"));
            let mut s = format!("sample: n = {}, d = {}\n", c.n(), c.d());
            s.push_str(&format!(
                "{:>10} {:>10} {:>16} {:>16} {:>16}  flag\n",
                "x", "y", "K", "det_a1_sq", "gauss_slack"
            ));
            for r in &rows {
                s.push_str(&format!(
                    "{:>10.4} {:>10.4} {:>16} {:>16} {:>16}  {}\n",
                    r.x,
                    r.y,
                    cell(r.k),
                    cell(r.det_a1_sq),
                    cell(r.gauss_slack),
                    r.flag
                ));
            }
            s
        }
    };
    deliver(g, &body)?;
    Ok(true)
}

fn family(g: &Global, kind: FamilyKind, n: usize) -> Result<bool, Failure> {
    let c = match kind {
        FamilyKind::Dn => family_dn(n),
        FamilyKind::D2n => family_d2n(n),
    }
    .map_err(Failure::input)?;
    emit_curve(g, "family", &c)?;
    Ok(true)
}

fn problem(g: &Global, n: usize, d: usize, max_iters: usize) -> SearchProblem {
    SearchProblem { restarts: g.restarts, max_iters, tol_feasible: g.tol, rng_seed: g.seed, ..SearchProblem::new(n, d) }
}

#[derive(Serialize)]
struct SearchSummary {
    n: usize,
    d: usize,
    feasible: bool,
    best_residual: Option<f64>,
    best_residual_any: f64,
    fullness_rank: usize,
    restarts_to_hit: Option<usize>,
    restarts_run: usize,
    wall_time: f64,
    verdict: String,
}

fn run_search(
    g: &Global,
    n: usize,
    d: usize,
    max_iters: usize,
    save: Option<&std::path::Path>,
) -> Result<bool, Failure> {
    let p = problem(g, n, d, max_iters);
    p.validate().map_err(Failure::input)?;
    let rep = search(&p)?;
    if let (Some(path), Some(c)) = (save, &rep.best_curve) {
        write_file(path, &(c.to_json_pretty() + "\n"))?;
    }
    match g.format {
        Format::Text => {
            let summary = SearchSummary {
                n: rep.n,
                d: rep.d,
                feasible: rep.feasible,
                best_residual: rep.best_residual,
                best_residual_any: rep.best_residual_any,
                fullness_rank: rep.fullness_rank,
                restarts_to_hit: rep.restarts_to_hit,
                restarts_run: rep.restarts_run,
                wall_time: rep.wall_time,
                verdict: rep.verdict.clone(),
            };
            deliver(g, &text_report("search", &summary)?)?;
        }
        _ => emit(g, "search", &rep)?,
    }
    Ok(rep.feasible)
}

#[derive(Serialize)]
struct ScanOut<'a> {
    n: usize,
    rows: &'a [ScanRow],
}

fn scan(g: &Global, n: usize, d_min: usize, d_max: usize, max_iters: usize) -> Result<bool, Failure> {
    if d_min == 0 || d_min > d_max {
        return Err(Failure::input(format!("need 1 <= d-min <= d-max, got {d_min}..={d_max}")));
    }
    let template = problem(g, n, d_min, max_iters);
    for d in d_min..=d_max {
        SearchProblem { d, ..template.clone() }.validate().map_err(Failure::input)?;
    }
    let reports = feasibility_scan(n, d_min..=d_max, &template)?;
    let rows: Vec<ScanRow> = reports.iter().map(ScanRow::from).collect();
    let body = match g.format {
        Format::Json => json_report("scan", &ScanOut { n, rows: &rows })?,
        Format::Csv => csv_rows(&rows)?,
        Format::Text => {
            let mut s = format!("scan: n = {n}, {} restarts, seed {}\n", g.restarts, g.seed);
            s.push_str(&format!("{:>4} {:>9} {:>14} {:>14} {:>6}  verdict\n", "d", "feasible", "best_full", "best_any", "hit"));
            for r in &rows {
                let best = r.best_residual.map_or("-".to_string(), |v| format!("{v:.3e}"));
                let hit = r.restarts_to_hit.map_or("-".to_string(), |v| v.to_string());
                s.push_str(&format!(
                    "{:>4} {:>9} {:>14} {:>14.3e} {:>6}  {}\n",
                    r.d, r.feasible, best, r.best_residual_any, hit, r.verdict
                ));
            }
            s
        }
    };
    deliver(g, &body)?;
    Ok(true)
}

fn mobius(g: &Global, path: &str, entries: [&String; 4], random: bool) -> Result<bool, Failure> {
    let c = load_curve(path)?;
    let m = if random {
        Mobius::random_rotation(&mut ChaCha8Rng::seed_from_u64(g.seed))
    } else {
        let mut z = [Complex64::new(0.0, 0.0); 4];
        for (slot, (text, name)) in z.iter_mut().zip(entries.iter().zip(["a", "b", "c", "d"])) {
            *slot = parse_complex(text).map_err(|e| Failure::input(format!("--{name}: {e}")))?;
        }
        Mobius::new(z[0], z[1], z[2], z[3]).map_err(Failure::input)?
    };
    let moved = apply_mobius(&c, &m)?;
    emit_curve(g, "mobius", &moved)?;
    Ok(true)
}

#[derive(Serialize)]
struct LemmaQOut {
    trials: usize,
    max_relative_q: f64,
    bound: f64,
    passed: bool,
}

fn cplx(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn lemma_q_trials(g: &Global, trials: usize, bound: f64) -> Result<bool, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    'outer: while count < trials {
        for d in 3..=9 {
            for rho in 1..=d {
                if count >= trials {
                    break 'outer;
                }
                let n = 2 + count % 3;
                let a1: Vec<Vec<Complex64>> = (0..d).map(|_| (0..n).map(|_| cplx(&mut rng)).collect()).collect();
                let lambda: Vec<Complex64> = (0..=d).map(|_| cplx(&mut rng)).collect();
                let amax = a1.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
                let lmax = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
                let q = lemma_q(d, rho, &lambda, &a1)?.norm_sqr().sqrt();
                worst = worst.max(q / (lmax * amax * amax));
                count += 1;
            }
        }
    }
    let out = LemmaQOut { trials: count, max_relative_q: worst, bound, passed: worst <= bound };
    emit(g, "lemma-q", &out)?;
    Ok(out.passed)
}
