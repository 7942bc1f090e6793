use magflow::hodograph::{
    algebraic_residual, closed_form_abzero, continuation_solve, hodograph_pde_residual_fd,
    magnetic_from_fg, newton_solve, reconstruct_fields, HodographConstants, QuadraticSolutionPoint,
    NEWTON_MAX_ITER, NEWTON_TOL,
};
use serde::Serialize;

use super::{failed, tuple, Check, Checks};
use crate::error::{CliError, CliResult};
use crate::output::{out_path, write_json, Csv};
use crate::Globals;

const CONTINUATION_STEP: f64 = 0.02;
const RESIDUAL_MAX: f64 = 1e-10;
const ORACLE_MAX: f64 = 1e-10;
/// Step of the Richardson-extrapolated field derivative.
const OMEGA_STEP: f64 = 1e-3;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    zeta: Option<f64>,
    /// x-range lo,hi.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// y-range lo,hi.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y: Option<Vec<f64>>,
    /// Grid nodes nx,ny.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// FD step of the PDE residual.
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    constants: HodographConstants,
    points: usize,
    failed_points: usize,
    h: f64,
    checks: Checks,
    pass: bool,
}

struct Row {
    values: [f64; 10],
    oracle_diff: Option<f64>,
}

fn field(k: &HodographConstants, f: f64, g: f64) -> QuadraticSolutionPoint {
    let (lambda, u0) = reconstruct_fields(k, f, g);
    QuadraticSolutionPoint { f, g, lambda, u0 }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn solve_point(k: &HodographConstants, x: f64, y: f64, h: f64) -> magflow::Result<Row> {
    let sol = continuation_solve(k, x, y, CONTINUATION_STEP)?;
    let pt = field(k, sol.f, sol.g);
    let (r1, r2) = algebraic_residual(k, x, y, pt.f, pt.g);
    let sampler = |xs: f64, ys: f64| {
        let s = newton_solve(k, xs, ys, (sol.f, sol.g), NEWTON_TOL, NEWTON_MAX_ITER)?;
        Ok(field(k, s.f, s.g))
    };
    let coarse = magnetic_from_fg(sampler, x, y, OMEGA_STEP)?;
    let fine = magnetic_from_fg(sampler, x, y, 0.5 * OMEGA_STEP)?;
    let omega = (4.0 * fine - coarse) / 3.0;
    let pde = hodograph_pde_residual_fd(sampler, x, y, h)?;
    let pde_inf = pde.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let oracle_diff = if k.alpha == 0.0 && k.beta == 0.0 {
        let (cf, cf_omega) = closed_form_abzero(k, x, y)?;
        Some(
            [
                rel(pt.f, cf.f),
                rel(pt.g, cf.g),
                rel(pt.lambda, cf.lambda),
                rel(pt.u0, cf.u0),
                rel(omega, cf_omega),
            ]
            .into_iter()
            .fold(0.0, f64::max),
        )
    } else {
        None
    };
    Ok(Row {
        values: [x, y, pt.f, pt.g, pt.lambda, pt.u0, omega, r1, r2, pde_inf],
        oracle_diff,
    })
}

pub fn run(g: &Globals, args: Args) -> CliResult<()> {
    let sec = &g.config.hodograph;
    let zeta = args.zeta.or(sec.zeta).unwrap_or(2.0);
    if zeta == 0.0 {
        return Err(CliError::Config(
            "zeta must be nonzero: for zeta = 0 the hodograph system has only trivial solutions"
                .into(),
        ));
    }
    let k = HodographConstants::new(
        args.alpha.or(sec.alpha).unwrap_or(0.0),
        args.beta.or(sec.beta).unwrap_or(0.0),
        args.gamma.or(sec.gamma).unwrap_or(0.0),
        args.delta.or(sec.delta).unwrap_or(0.0),
        args.epsilon.or(sec.epsilon).unwrap_or(0.0),
        zeta,
    )?;
    let xr = tuple(args.x, "x")?.or(sec.x).unwrap_or([0.5, 1.5]);
    let yr = tuple(args.y, "y")?.or(sec.y).unwrap_or([0.5, 1.5]);
    let n = tuple(args.n, "n")?.or(sec.n).unwrap_or([20, 20]);
    let h = args.h.or(sec.h).unwrap_or(1e-4);
    if n[0] < 1 || n[1] < 1 || !(h > 0.0) || !(xr[1] >= xr[0]) || !(yr[1] >= yr[0]) {
        return Err(CliError::Config(
            "grid needs n >= 1, lo <= hi and h > 0".into(),
        ));
    }
    let node = |r: [f64; 2], i: usize, m: usize| {
        if m == 1 {
            0.5 * (r[0] + r[1])
        } else {
            r[0] + (r[1] - r[0]) * i as f64 / (m - 1) as f64
        }
    };

    let header: Vec<String> = [
        "x",
        "y",
        "f",
        "g",
        "Lambda",
        "u0",
        "Omega",
        "res1",
        "res2",
        "pde41_inf",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut csv = Csv::new(&header);
    let (mut res_max, mut pde_max, mut oracle_max, mut failures) = (0.0f64, 0.0f64, 0.0f64, 0usize);
    for i in 0..n[0] {
        for j in 0..n[1] {
            let (x, y) = (node(xr, i, n[0]), node(yr, j, n[1]));
            match solve_point(&k, x, y, h) {
                Ok(row) => {
                    let v = row.values;
                    res_max = res_max.max(v[7].abs()).max(v[8].abs());
                    pde_max = pde_max.max(v[9]);
                    if let Some(d) = row.oracle_diff {
                        oracle_max = oracle_max.max(d);
                    }
                    csv.row(&v);
                }
                Err(e) => {
                    eprintln!("({x}, {y}): {e}");
                    failures += 1;
                    let mut v = [f64::NAN; 10];
                    v[0] = x;
                    v[1] = y;
                    csv.row(&v);
                }
            }
        }
    }

    let mut checks = Checks::new();
    checks.insert("failed_points".into(), Check::equal(failures as f64, 0.0));
    checks.insert(
        "algebraic_residual_max".into(),
        Check::at_most(res_max, RESIDUAL_MAX),
    );
    checks.insert("pde_residual_max".into(), Check::at_most(pde_max, g.tol));
    if k.alpha == 0.0 && k.beta == 0.0 {
        checks.insert(
            "closed_form_rel_diff_max".into(),
            Check::at_most(oracle_max, ORACLE_MAX),
        );
    }
    let bad = failed(&checks);
    let report = Report {
        constants: k,
        points: n[0] * n[1],
        failed_points: failures,
        h,
        pass: bad.is_empty(),
        checks,
    };
    let csv_path = out_path(&g.out_dir, "hodograph.csv");
    csv.write(&csv_path)?;
    let json_path = out_path(&g.out_dir, "hodograph_report.json");
    write_json(&json_path, &report)?;
    for (name, c) in &report.checks {
        println!(
            "{} {name} = {:e} ({} {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.value,
            c.bound,
            c.threshold
        );
    }
    println!("{}\n{}", csv_path.display(), json_path.display());
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(bad.join(", ")))
    }
}
