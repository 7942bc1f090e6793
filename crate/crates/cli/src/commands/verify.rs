use std::collections::BTreeMap;

use magflow::catalog::{get_example_with, list_examples, CatalogEntry};
use magflow::flow::{conservation_drift, integrate, TrajectoryConfig};
use magflow::geometry::{gaussian_curvature_fd, hamiltonian, random_phases_on_level};
use magflow::integrals::{
    functional_independence_rank, level_set_bracket_scan, BracketScanConfig, FirstIntegral,
    LevelValidity, ResidualReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{failed, Check, Checks, ParamArgs};
use crate::error::{CliError, CliResult};
use crate::output::{out_path, write_json};
use crate::Globals;

/// Lower bound on the bracket away from the level of a fixed-level integral.
const OFF_LEVEL_MIN: f64 = 1e-3;
const FLAT_MAX: f64 = 1e-6;
const CURVED_MIN: f64 = 1e-3;
const FD_STEP: f64 = 1e-5;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Catalog entry name, or `all`.
    #[arg(long)]
    example: Option<String>,
    /// Replace every integral by a perturbed copy (negative control).
    #[arg(long)]
    corrupt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Random phases per independence-rank check.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Serialize)]
struct Report {
    seed: u64,
    tol: f64,
    corrupt: Option<f64>,
    examples: BTreeMap<String, Checks>,
    pass: bool,
}

fn scan_value(r: &ResidualReport) -> f64 {
    if r.count == 0 {
        f64::INFINITY
    } else {
        r.max
    }
}

fn verify_entry(
    e: &CatalogEntry,
    integrals: &[FirstIntegral],
    tol: f64,
    t_end: f64,
    samples: usize,
    seed: u64,
) -> CliResult<Checks> {
    let mut checks = Checks::new();
    let sys = &e.system;
    let c = e.energy_constant();
    let scan = BracketScanConfig::default();

    for f in integrals {
        let on = level_set_bracket_scan(sys, f, c, &scan)?;
        checks.insert(
            format!("{}.bracket_on_level", f.name),
            Check::at_most(scan_value(&on), tol),
        );
        match f.validity {
            LevelValidity::AllLevels => {
                for (tag, level) in [("half", 0.5 * c), ("double", 2.0 * c)] {
                    let r = level_set_bracket_scan(sys, f, level, &scan)?;
                    checks.insert(
                        format!("{}.bracket_level_{tag}", f.name),
                        Check::at_most(scan_value(&r), tol),
                    );
                }
            }
            LevelValidity::FixedLevel(c0) => {
                let off = level_set_bracket_scan(sys, f, 2.0 * c0, &scan)?;
                checks.insert(
                    format!("{}.bracket_off_level", f.name),
                    Check::above(off.max, OFF_LEVEL_MIN),
                );
            }
        }
    }

    let cfg = TrajectoryConfig::adaptive(t_end, 1e-11, 1e-13);
    let mut reached = 1.0f64;
    let mut drift_h = 0.0f64;
    let mut drifts = vec![0.0f64; integrals.len()];
    for ph in &e.sample_phases {
        let traj = integrate(sys, ph, &cfg)?;
        reached = reached.min(traj.final_time() / t_end);
        drift_h = drift_h.max(conservation_drift(&traj, |p| hamiltonian(sys, p))?.max_abs_drift);
        for (d, f) in drifts.iter_mut().zip(integrals) {
            let rep = conservation_drift(&traj, |p| f.eval(p));
            *d = d.max(rep.map(|r| r.max_abs_drift).unwrap_or(f64::INFINITY));
        }
    }
    checks.insert("orbits_complete".into(), Check::equal(reached, 1.0));
    checks.insert("H.drift".into(), Check::at_most(drift_h, tol));
    for (d, f) in drifts.iter().zip(integrals) {
        checks.insert(format!("{}.drift", f.name), Check::at_most(*d, tol));
    }

    let curved = matches!(e.name.as_str(), "ex3" | "ex5" | "ex6");
    let flat = matches!(e.name.as_str(), "ex1" | "ex4");
    if curved || flat {
        let n = if curved { 8 } else { 6 };
        let (mut k1, mut k2) = (0.0f64, 0.0f64);
        for q in e.verified_domain.sample_grid(n, n) {
            let k = gaussian_curvature_fd(sys, q, 1e-3)?;
            if k.abs() > k1.abs() {
                k1 = k;
                k2 = gaussian_curvature_fd(sys, q, 5e-4)?;
            }
        }
        if curved {
            checks.insert(
                "curvature_max_abs".into(),
                Check::above(k1.abs(), CURVED_MIN),
            );
            let stable = if k1 == 0.0 {
                f64::INFINITY
            } else {
                (k1 - k2).abs() / k1.abs()
            };
            checks.insert(
                "curvature_halving_rel_change".into(),
                Check::at_most(stable, 1e-6),
            );
        } else {
            checks.insert(
                "curvature_max_abs".into(),
                Check::at_most(k1.abs(), FLAT_MAX),
            );
        }
    }

    let h = FirstIntegral::hamiltonian(sys);
    let mut fns = vec![&h];
    fns.extend(integrals.iter());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ranks = Vec::new();
    for ph in random_phases_on_level(sys, c, 10 * samples, &mut rng)? {
        if ranks.len() == samples {
            break;
        }
        if fns.iter().any(|f| f.eval(&ph).is_err()) {
            continue;
        }
        if let Ok(r) = functional_independence_rank(&fns, &ph, FD_STEP) {
            ranks.push(r);
        }
    }
    let rank = if ranks.len() < samples {
        0
    } else {
        ranks.into_iter().min().unwrap_or(0)
    };
    checks.insert(
        "independence_rank".into(),
        Check::equal(rank as f64, fns.len() as f64),
    );
    Ok(checks)
}

pub fn run(g: &Globals, args: Args) -> CliResult<()> {
    let sec = &g.config.verify;
    let which = args
        .example
        .or_else(|| sec.example.clone())
        .unwrap_or_else(|| "all".into());
    let names: Vec<String> = if which == "all" {
        list_examples().into_iter().map(String::from).collect()
    } else {
        vec![which]
    };
    let corrupt = args.corrupt.or(sec.corrupt);
    if corrupt.is_some_and(|eps| !eps.is_finite()) {
        return Err(CliError::Config("corrupt must be finite".into()));
    }
    let t_end = args.t_end.or(sec.t_end).unwrap_or(10.0);
    if !(t_end > 0.0) {
        return Err(CliError::Config("t_end must be positive".into()));
    }
    let samples = args.samples.or(sec.samples).unwrap_or(20).max(1);
    let params = args.params.resolve(&g.config)?;

    let mut examples = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        let e = get_example_with(name, &params)?;
        let integrals: Vec<FirstIntegral> = match corrupt {
            Some(eps) => e.integrals.iter().map(|f| f.corrupted(eps)).collect(),
            None => e.integrals.clone(),
        };
        let checks = verify_entry(
            &e,
            &integrals,
            g.tol,
            t_end,
            samples,
            g.seed.wrapping_add(i as u64),
        )?;
        examples.insert(name.clone(), checks);
    }
    let bad: Vec<String> = examples
        .iter()
        .flat_map(|(n, cs)| failed(cs).into_iter().map(move |k| format!("{n}.{k}")))
        .collect();
    let report = Report {
        seed: g.seed,
        tol: g.tol,
        corrupt,
        examples,
        pass: bad.is_empty(),
    };
    let path = out_path(&g.out_dir, "verify.json");
    write_json(&path, &report)?;
    for (n, cs) in &report.examples {
        for (k, c) in cs {
            println!(
                "{} {n}.{k} = {:e} ({} {:e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.value,
                c.bound,
                c.threshold
            );
        }
    }
    println!("{}", path.display());
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(bad.join(", ")))
    }
}
