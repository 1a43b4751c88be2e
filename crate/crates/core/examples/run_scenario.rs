//! Runs a scenario file, or a built-in suite, through the library and prints
//! the verdicts. Artifacts go to a temporary directory unless one is given.
//!
//! `cargo run --example run_scenario -- scenarios/samples/pauli-matrix.json [out]`
//! `cargo run --example run_scenario -- --suite equilibria [out]`

use synclab::cli::{run, suite, RunOptions};

fn main() -> synclab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = std::env::temp_dir().join("synclab-example");
    match args.as_slice() {
        [flag, name, rest @ ..] if flag == "--suite" => {
            let opts = RunOptions::new(rest.first().map_or(out, Into::into));
            let summary = suite(name, &opts)?;
            print!("{}", summary.table());
        }
        [path, rest @ ..] => {
            let opts = RunOptions::new(rest.first().map_or(out, Into::into));
            let outcome = run(path, &opts)?;
            println!("{}: {}", outcome.id, if outcome.passed { "pass" } else { "fail" });
            for d in &outcome.drift {
                println!("  {:<14} rel dev {:.2e}  {}", d.name, d.max_rel_dev, d.verdict.as_str());
            }
            for a in &outcome.analyses {
                println!("  {:<14} {}", a.name, if a.passed { "pass" } else { "fail" });
            }
            println!("artifacts in {}", opts.out_dir.join(&outcome.id).display());
        }
        [] => eprintln!("usage: run_scenario <scenario.json> [out] | --suite <name> [out]"),
    }
    Ok(())
}
