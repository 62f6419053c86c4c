use dps_hdg::driver::{random_permeability, run_random_perm, PartialConfig, Scenario};

fn main() -> dps_hdg::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(42, |a| a.parse().expect("seed"));

    let (kf, km) = random_permeability(8, [1e-2, 1.0], [1e-6, 1e-4], seed);
    println!("first draws, seed {seed}");
    for (f, m) in kf.iter().zip(&km) {
        println!("  kappa_f {f:.4e}  kappa_m {m:.4e}");
    }

    let out = std::env::temp_dir().join("dps-hdg-random");
    std::fs::create_dir_all(&out).map_err(|e| dps_hdg::Error::Config(e.to_string()))?;
    let config = PartialConfig {
        scenario: Some(Scenario::RandomPerm),
        n: Some(16),
        seed: Some(seed),
        out: Some(out),
        ..Default::default()
    }
    .resolve()?;
    let a = run_random_perm(&config)?;
    let b = run_random_perm(&config)?;
    println!("status {:?}, repeat identical: {}", a.status, a.conservation == b.conservation);
    for (name, v, t) in a.conservation[0].checks(dps_hdg::postproc::CONSERVATION_TOLERANCE) {
        println!("  {name:<18} {v:.2e}  (limit {t:.2e})");
    }
    Ok(())
}
