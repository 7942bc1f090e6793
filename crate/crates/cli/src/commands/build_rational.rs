use std::path::PathBuf;

use magflow::catalog::{ex5_formulas, ex6_formulas};
use magflow::geometry::PhasePoint;
use magflow::integrals::{level_set_bracket_scan, BracketScanConfig};
use magflow::legendre::{
    condition_d, family_pde_residual, BundleDescriptor, RationalFlowBundle, ZFamily, D_MIN,
};
use magflow::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{failed, tuple, Check, Checks};
use crate::error::{CliError, CliResult};
use crate::output::{out_path, read_file, write_json};
use crate::Globals;

const PDE_MAX: f64 = 1e-10;
const MATCH_MAX: f64 = 1e-10;
const PDE_SAMPLES: usize = 200;
const MATCH_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum FamilyName {
    PolynomialCos,
    LogRadial,
    LogNu1,
    EllipticHalf,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Bundle descriptor JSON; replaces the family flags.
    #[arg(long, conflicts_with = "family")]
    descriptor: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    /// Degree of the polynomial family.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    psi0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    amplitude: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    gamma: f64,
    /// Energy constant C (level H = C/2).
    #[arg(long = "c", default_value_t = 1.0)]
    c: f64,
    /// rho-range lo,hi.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rho: Option<Vec<f64>>,
    /// psi-range lo,hi; defaults to one period.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    psi: Option<Vec<f64>>,
    #[arg(long)]
    name: Option<String>,
}

#[derive(Serialize)]
struct Report {
    descriptor: BundleDescriptor,
    psi_period: f64,
    checks: Checks,
    pass: bool,
}

fn descriptor_from(g: &Globals, args: &Args) -> CliResult<BundleDescriptor> {
    if let Some(path) = &args.descriptor {
        let text = read_file(path)?;
        return BundleDescriptor::from_json(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())));
    }
    let Some(family) = args.family else {
        return g.config.build_rational.clone().ok_or_else(|| {
            CliError::Config("build-rational needs --family or --descriptor".into())
        });
    };
    let amplitude = args.amplitude;
    let family = match family {
        FamilyName::PolynomialCos => ZFamily::PolynomialCos {
            k: args.k,
            psi0: args.psi0,
            amplitude,
        },
        FamilyName::LogRadial => ZFamily::LogRadial { amplitude },
        FamilyName::LogNu1 => ZFamily::LogNu1 { amplitude },
        FamilyName::EllipticHalf => ZFamily::EllipticHalf { amplitude },
    };
    let rho = tuple(args.rho.clone(), "rho")?.unwrap_or(match family {
        ZFamily::LogNu1 { .. } => [0.2, 3.0],
        _ => [0.1, 3.0],
    });
    Ok(BundleDescriptor {
        name: args.name.clone().unwrap_or_else(|| family.tag()),
        family,
        gamma: args.gamma,
        c: args.c,
        rho,
        psi: tuple(args.psi.clone(), "psi")?,
    })
}

type Explicit = (
    fn(f64, f64, f64, f64) -> [f64; 3],
    fn(f64, f64, f64) -> f64,
    fn(f64, f64, f64, f64, f64) -> (f64, f64),
    fn(f64, f64, f64, f64) -> (f64, f64),
    fn(f64, f64) -> bool,
);

/// The catalog entry whose explicit formulas this family reproduces, if any.
fn explicit_twin(family: &ZFamily) -> Option<(&'static str, Explicit)> {
    match *family {
        ZFamily::PolynomialCos {
            k: 2,
            psi0,
            amplitude,
        } if psi0 == 0.0 && amplitude == 1.0 => Some((
            "ex5",
            (
                ex5_formulas::metric,
                ex5_formulas::omega,
                ex5_formulas::integral_parts,
                ex5_formulas::momenta,
                ex5_formulas::in_domain,
            ),
        )),
        ZFamily::LogNu1 { amplitude: 1.0 } => Some((
            "ex6",
            (
                ex6_formulas::metric,
                ex6_formulas::omega,
                ex6_formulas::integral_parts,
                ex6_formulas::momenta,
                ex6_formulas::in_domain,
            ),
        )),
        _ => None,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn explicit_diff(
    b: &RationalFlowBundle,
    explicit: Explicit,
    rng: &mut ChaCha8Rng,
) -> CliResult<f64> {
    let (metric, omega, parts, momenta, in_domain) = explicit;
    let (gamma, c) = (b.gamma, b.c);
    let (rlo, rhi) = b.bbox.q1;
    let (plo, phi_) = b.bbox.q2;
    let mut worst = 0.0f64;
    let mut compared = 0;
    let mut attempts = 0;
    while compared < MATCH_SAMPLES {
        attempts += 1;
        if attempts > 1000 * MATCH_SAMPLES {
            return Ok(f64::INFINITY);
        }
        let (r, p, a) = (
            rng.gen_range(rlo..rhi),
            rng.gen_range(plo..phi_),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        if !in_domain(r, p)
            || !b
                .system
                .domain
                .contains(magflow::geometry::ChartPoint::new(r, p))
        {
            continue;
        }
        let gb = b.metric_at(r, p)?;
        let gp = metric(r, p, gamma, c);
        let scale = 1.0 + gp[0].abs().max(gp[2].abs());
        let dm = [gb.g11 - gp[0], gb.g12 - gp[1], gb.g22 - gp[2]]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            / scale;
        worst = worst
            .max(dm)
            .max(rel(b.omega_at(r, p)?, omega(r, p, gamma)));
        let (pr, pp) = momenta(r, p, a, gamma);
        let (n, d) = parts(r, p, pr, pp, gamma);
        if d.abs() <= 1e-3 {
            continue;
        }
        match b.integral.eval(&PhasePoint::new(r, p, pr, pp)) {
            Ok(v) => worst = worst.max(rel(v, n / d)),
            Err(Error::NearPole { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
        compared += 1;
    }
    Ok(worst)
}

fn scan(g: &Globals, desc: &BundleDescriptor) -> CliResult<Checks> {
    desc.family.validate()?;
    let bbox = desc.bbox();
    let mut checks = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);

    let mut pde_max = 0.0f64;
    for _ in 0..PDE_SAMPLES {
        let (r, p) = (
            rng.gen_range(bbox.q1.0..bbox.q1.1),
            rng.gen_range(bbox.q2.0..bbox.q2.1),
        );
        pde_max = pde_max.max(
            family_pde_residual(&desc.family, r, p)
                .map(f64::abs)
                .unwrap_or(f64::INFINITY),
        );
    }
    checks.insert("pde_residual_max".into(), Check::at_most(pde_max, PDE_MAX));

    let mut d_min = f64::INFINITY;
    for q in bbox.grid(30, 30) {
        d_min = d_min.min(
            condition_d(&desc.family, q.q1, q.q2)
                .map(f64::abs)
                .unwrap_or(0.0),
        );
    }
    checks.insert("condition_d_min_abs".into(), Check::above(d_min, D_MIN));

    let bundle = match desc.build() {
        Ok(b) => b,
        Err(Error::DegenerateD { .. }) => return Ok(checks),
        Err(e @ (Error::Domain { .. } | Error::InvalidConfig(_))) => {
            return Err(CliError::Config(format!("bundle '{}': {e}", desc.name)))
        }
        Err(e) => return Err(e.into()),
    };
    let r = level_set_bracket_scan(
        &bundle.system,
        &bundle.integral,
        bundle.c,
        &BracketScanConfig::default(),
    )?;
    let value = if r.count == 0 { f64::INFINITY } else { r.max };
    checks.insert("bracket_on_level".into(), Check::at_most(value, g.tol));

    if let Some((twin, explicit)) = explicit_twin(&desc.family) {
        let diff = explicit_diff(&bundle, explicit, &mut rng)?;
        checks.insert(format!("matches_{twin}"), Check::at_most(diff, MATCH_MAX));
    }
    Ok(checks)
}

pub fn run(g: &Globals, args: Args) -> CliResult<()> {
    let mut desc = descriptor_from(g, &args)?;
    desc.psi.get_or_insert([0.0, desc.family.psi_period()]);
    let checks = scan(g, &desc)?;
    let bad = failed(&checks);
    let report = Report {
        psi_period: desc.family.psi_period(),
        descriptor: desc.clone(),
        pass: bad.is_empty(),
        checks,
    };
    let bundle_path = out_path(&g.out_dir, "bundle.json");
    write_json(&bundle_path, &desc)?;
    let report_path = out_path(&g.out_dir, "bundle_report.json");
    write_json(&report_path, &report)?;
    for (name, c) in &report.checks {
        println!(
            "{} {name} = {:e} ({} {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.value,
            c.bound,
            c.threshold
        );
    }
    println!("psi period = {}", report.psi_period);
    println!("{}\n{}", bundle_path.display(), report_path.display());
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(bad.join(", ")))
    }
}
