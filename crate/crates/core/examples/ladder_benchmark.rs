//! Times the streamlined solver against a dense solve over a ladder of group counts.
//!
//! Pass `full` to run the full ladder up to 1600 groups with ten replications.

use mlsparse::bench::{run_bench, Arm, BenchConfig};
use mlsparse::GenSpec;

fn main() -> Result<(), mlsparse::Error> {
    let full = std::env::args().any(|a| a == "full");
    let (ladder, replications) = if full { (vec![100, 200, 400, 800, 1600], 10) } else { (vec![25, 50, 100, 200], 3) };
    let config = BenchConfig {
        spec: GenSpec::two_level(1, 2, 2, (30, 60), 20150101),
        ladder,
        replications,
        arms: vec![Arm::Streamlined, Arm::Naive],
        ceiling: 802,
        check: true,
        parallel: false,
    };
    let outcome = run_bench(&config, |note| eprintln!("{note}"))?;
    print!("{}", outcome.report.render());
    for note in &outcome.notices {
        println!("# {note}");
    }
    Ok(())
}
