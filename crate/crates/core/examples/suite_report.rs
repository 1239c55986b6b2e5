//! A small suite assembled in code and rendered as markdown.

use finsler::harness::{run_with, NamedMetric, RunConfig};
use finsler::metric::FinslerStructure;

fn main() -> finsler::Result<()> {
    let metrics = vec![
        NamedMetric { name: "quartic2".into(), structure: FinslerStructure::quartic(2) },
        NamedMetric { name: "randers2".into(), structure: FinslerStructure::randers(&[0.5, 0.0])? },
    ];
    let config = RunConfig {
        sigmas: vec!["0.1*x1".into()],
        theorems: vec!["barthel-change,landsberg-criterion".into()],
        predicates: vec!["riemannian,landsberg,berwald".into()],
        propositions: vec!["p.6".into()],
        samples: 6,
        ..Default::default()
    };
    let report = run_with(&metrics, &config)?;
    print!("{}", report.to_markdown());
    std::process::exit(report.exit_code());
}
