//! Vertical open-hole wellbore for the three shape factors. The mean speed
//! drops as sigma decreases.

use dps_hdg::driver::{run_wellbore, PartialConfig, Scenario};

fn main() -> dps_hdg::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(16, |a| a.parse().expect("n"));
    for sigma in [0.9, 0.5, 0.1] {
        let out = std::env::temp_dir().join(format!("dps-hdg-vertical-{sigma}"));
        std::fs::create_dir_all(&out).map_err(|e| dps_hdg::Error::Config(e.to_string()))?;
        let config = PartialConfig {
            scenario: Some(Scenario::WellboreVertical),
            n: Some(n),
            sigma: Some(sigma),
            out: Some(out),
            ..Default::default()
        }
        .resolve()?;
        let outcome = run_wellbore(&config)?;
        let c = &outcome.conservation[0];
        println!(
            "sigma {sigma}: mean speed {:.6e}  div {:.1e}  fracture {:.1e}  matrix {:.1e}  {:?}",
            outcome.mean_speed.unwrap_or(f64::NAN),
            c.stokes_divergence,
            c.fracture_balance,
            c.matrix_balance,
            outcome.status
        );
    }
    Ok(())
}
