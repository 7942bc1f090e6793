use magflow::catalog::get_example_with;
use magflow::flow::{integrate, TrajectoryConfig};
use magflow::geometry::{hamiltonian, phase_on_level, ChartPoint, PhasePoint};
use magflow::Error;

use super::{tuple, ParamArgs};
use crate::config::MethodName;
use crate::error::{CliError, CliResult};
use crate::output::{out_path, Csv};
use crate::Globals;

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    example: Option<String>,
    /// Start point q1,q2,p1,p2.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["q", "phi"])]
    phase: Option<Vec<f64>>,
    /// Base point q1,q2; momenta are put on the energy level at angle --phi.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    q: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodName>,
    /// Step of the fixed-step method.
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    record_every: Option<usize>,
    #[command(flatten)]
    params: ParamArgs,
}

fn bad_start(e: Error) -> CliError {
    match e {
        Error::Domain { .. } | Error::SingularMetric { .. } | Error::Guard(_) => {
            CliError::BadStart(e.to_string())
        }
        other => CliError::Core(other),
    }
}

pub fn run(g: &Globals, args: Args) -> CliResult<()> {
    let sec = &g.config.simulate;
    let name = args
        .example
        .or_else(|| sec.example.clone())
        .ok_or_else(|| CliError::Config("simulate needs --example".into()))?;
    let entry = get_example_with(&name, &args.params.resolve(&g.config)?)?;
    let system = &entry.system;

    let phase = tuple(args.phase, "phase")?.or(sec.phase);
    let q = tuple(args.q, "q")?.or(sec.q);
    let start = match (phase, q) {
        (Some(p), _) => {
            let ph = PhasePoint::from_array(p);
            system.metric_checked(ph.q).map_err(bad_start)?;
            ph
        }
        (None, Some(q)) => {
            let phi = args.phi.or(sec.phi).unwrap_or(0.0);
            phase_on_level(
                system,
                ChartPoint::new(q[0], q[1]),
                phi,
                entry.energy_constant(),
            )
            .map_err(bad_start)?
        }
        (None, None) => entry.sample_phases[0],
    };
    if !start.is_finite() {
        return Err(CliError::BadStart("start point is not finite".into()));
    }

    let t_end = args.t_end.or(sec.t_end).unwrap_or(10.0);
    let method = args.method.or(sec.method).unwrap_or(MethodName::Rk45);
    let cfg = match method {
        MethodName::Rk4 => TrajectoryConfig::fixed(t_end, args.step.or(sec.step).unwrap_or(1e-3)),
        MethodName::Rk45 => TrajectoryConfig::adaptive(
            t_end,
            args.rel_tol.or(sec.rel_tol).unwrap_or(1e-11),
            args.abs_tol.or(sec.abs_tol).unwrap_or(1e-13),
        ),
    }
    .record_every(args.record_every.or(sec.record_every).unwrap_or(1));
    cfg.validate()?;
    let traj = integrate(system, &start, &cfg).map_err(bad_start)?;

    let mut header: Vec<String> = ["t", "q1", "q2", "p1", "p2", "H"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(entry.integrals.iter().map(|f| f.name.clone()));
    let mut csv = Csv::new(&header);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![
            *t,
            s.q.q1,
            s.q.q2,
            s.p1,
            s.p2,
            hamiltonian(system, s).unwrap_or(f64::NAN),
        ];
        row.extend(
            entry
                .integrals
                .iter()
                .map(|f| f.eval(s).unwrap_or(f64::NAN)),
        );
        csv.row(&row);
    }
    let path = out_path(&g.out_dir, &format!("simulate_{name}.csv"));
    csv.write(&path)?;
    println!(
        "{}: {} rows, t_final = {}",
        path.display(),
        traj.times.len(),
        traj.final_time()
    );
    if let Some(exit) = &traj.exit {
        println!("domain exit at t = {}", exit.t);
        if exit.t < 0.5 * t_end {
            return Err(CliError::Partial {
                t: exit.t,
                half: 0.5 * t_end,
            });
        }
    }
    Ok(())
}
