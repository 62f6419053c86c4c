//! Horizontal wellbore with an L-shaped free-flow channel, written to VTK.

use dps_hdg::driver::{run, PartialConfig, Scenario};

fn main() -> dps_hdg::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(32, |a| a.parse().expect("n"));
    let config = PartialConfig {
        scenario: Some(Scenario::WellboreHorizontal),
        n: Some(n),
        out: Some(std::env::temp_dir().join("dps-hdg-horizontal")),
        ..Default::default()
    }
    .resolve()?;
    let outcome = run(&config)?;
    let level = &outcome.levels[0];
    println!(
        "{} cells, {} unknowns, {} after condensation, residual {:.1e}",
        level.cells, level.unknowns, level.global_unknowns, level.relative_residual
    );
    print!("{}", outcome.conservation[0].to_csv(dps_hdg::postproc::CONSERVATION_TOLERANCE));
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
