use std::path::PathBuf;

use magflow::catalog::{get_example, list_examples};
use magflow::integrals::{FirstIntegral, IntegralKind, LevelValidity};
use magflow::legendre::BundleDescriptor;

use crate::error::{CliError, CliResult};
use crate::output::read_file;
use crate::Globals;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Bundle descriptor JSON to load alongside the catalog (repeatable).
    #[arg(long)]
    bundle: Vec<PathBuf>,
}

fn kind_name(k: IntegralKind) -> &'static str {
    match k {
        IntegralKind::Linear => "linear",
        IntegralKind::Quadratic => "quadratic",
        IntegralKind::Rational => "rational",
        IntegralKind::Transcendental => "transcendental",
    }
}

fn describe(integrals: &[&FirstIntegral]) -> String {
    integrals
        .iter()
        .map(|f| {
            let level = match f.validity {
                LevelValidity::AllLevels => "all levels",
                LevelValidity::FixedLevel(_) => "fixed level",
            };
            format!("{}:{} ({level})", f.name, kind_name(f.kind))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

pub fn load_bundle(path: &std::path::Path) -> CliResult<magflow::legendre::RationalFlowBundle> {
    let text = read_file(path)?;
    let desc = BundleDescriptor::from_json(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    desc.build()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn run(g: &Globals, args: Args) -> CliResult<()> {
    let mut rows = Vec::new();
    for name in list_examples() {
        let e = get_example(name)?;
        let fs: Vec<&FirstIntegral> = e.integrals.iter().collect();
        rows.push([
            e.name.clone(),
            e.chart.clone(),
            format!("{}", 0.5 * e.energy_constant()),
            describe(&fs),
        ]);
    }
    for path in g.config.bundles.iter().chain(&args.bundle) {
        let b = load_bundle(path)?;
        rows.push([
            b.name.clone(),
            "rho,psi".into(),
            format!("{}", 0.5 * b.c),
            describe(&[&b.integral]),
        ]);
    }
    let header = ["name", "chart", "H level", "integrals"];
    let widths: Vec<usize> = (0..3)
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: [&str; 4]| {
        format!(
            "{:w0$}  {:w1$}  {:w2$}  {}",
            cells[0],
            cells[1],
            cells[2],
            cells[3],
            w0 = widths[0],
            w1 = widths[1],
            w2 = widths[2]
        )
    };
    println!("{}", line(header));
    for r in &rows {
        println!("{}", line([&r[0], &r[1], &r[2], &r[3]]));
    }
    Ok(())
}
