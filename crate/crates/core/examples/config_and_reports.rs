//! Config overrides, a lemma battery and the CSV/JSON report it writes.

use cgo_stab::harness::{run_lemma_suite, Config, Lemma};

fn main() -> cgo_stab::Result<()> {
    let text = "\
# smaller Neumann-tail run
lemma4.n_radial = 64
lemma4.n_angular = 256
lemma4.lambdas = 10, 20
";
    let config = Config::parse_with_defaults(text)?;
    let report = run_lemma_suite(Lemma::Lemma4, &config, 0)?;
    print!("{}", report.summary());

    let dir = std::env::temp_dir().join("cgo-stab-example-report");
    for path in report.write(&dir, &config, 0)? {
        println!("wrote {}", path.display());
    }
    print!("{}", report.tables[0].to_csv(&report.subcommand)?);

    match Config::parse_with_defaults("lemma4.lambdas = 10\nlemma9.x = 1\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
