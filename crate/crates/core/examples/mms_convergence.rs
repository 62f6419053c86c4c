//! Convergence study on the manufactured solution.
//!
//! ```text
//! cargo run --release --example mms_convergence -- [k] [levels]
//! ```

use dps_hdg::driver::{run_mms, PartialConfig, Scenario};
use dps_hdg::mms::TABLE_LAYOUTS;

fn main() -> dps_hdg::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let k = args.next().unwrap_or(2);
    let levels = args.next().unwrap_or(4);
    let out = std::env::temp_dir().join("dps-hdg-mms");
    std::fs::create_dir_all(&out).map_err(|e| dps_hdg::Error::Config(e.to_string()))?;

    let config = PartialConfig {
        scenario: Some(Scenario::Mms),
        k: Some(k),
        levels: Some(levels),
        out: Some(out),
        ..Default::default()
    }
    .resolve()?;
    let outcome = run_mms(&config)?;

    let table = outcome.rates.as_ref().expect("at least one level");
    for (name, norms) in TABLE_LAYOUTS {
        println!("# {name}");
        print!("{}", table.to_csv(norms));
    }
    println!("status: {:?}", outcome.status);
    for f in &outcome.failures {
        println!("  {f}");
    }
    Ok(())
}
