//! Acceptance checks, one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

mod oracle;

use std::process::ExitCode;

use dps_hdg::driver::{self, PartialConfig, RunConfig, RunOutcome, Scenario, Status};
use dps_hdg::forms::{assemble, condense, PhysicalParams, Problem, SourceSet};
use dps_hdg::mesh::{build_structured, Geometry, Mesh};
use dps_hdg::mms::{self, derivative_mismatch, interpolate, MmsParams, Norm, RateTable};
use dps_hdg::postproc::CONSERVATION_TOLERANCE;
use dps_hdg::spaces::{BoundaryConditionSet, DiscretizationParams, DofLayout};

const RATE_BAND: f64 = 0.15;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict { pass, detail }
    }
}

fn config(scenario: Scenario, out: &std::path::Path, edit: impl FnOnce(&mut PartialConfig)) -> RunConfig {
    let mut p = PartialConfig {
        scenario: Some(scenario),
        out: Some(out.join(format!("{scenario}-{}", next_id()))),
        ..Default::default()
    };
    edit(&mut p);
    p.resolve().expect("valid config")
}

fn next_id() -> usize {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    NEXT.fetch_add(1, Ordering::Relaxed)
}

fn run(config: &RunConfig) -> RunOutcome {
    driver::run(config).expect("run completes")
}

fn final_rate(table: &RateTable, norm: Norm) -> f64 {
    table.final_rate(norm).unwrap_or(f64::NAN)
}

/// `(norm, target, lower band, upper band)` for the convergence criteria.
fn rate_targets(k: usize) -> Vec<(Norm, f64, f64, f64)> {
    let k = k as f64;
    let b = RATE_BAND;
    let stokes_p_upper = if k == 2.0 { f64::INFINITY } else { b };
    vec![
        (Norm::StokesU, k + 1.0, b, b),
        (Norm::FractureU, k + 1.0, b, b),
        (Norm::MatrixU, k + 1.0, b, b),
        (Norm::StokesP, k, if k == 2.0 { 0.0 } else { b }, stokes_p_upper),
        (Norm::FractureP, k, b, b),
        (Norm::MatrixP, k, b, b),
        (Norm::StokesGradU, k, b, b),
        (Norm::FractureDivU, k, b, b),
        (Norm::MatrixDivU, k, b, b),
    ]
}

fn check_rates(outcome: &RunOutcome) -> Verdict {
    let k = outcome.config.k;
    let Some(table) = outcome.rates.as_ref().filter(|t| t.levels.len() == 5) else {
        return Verdict::new(false, format!("k={k}: run incomplete: {:?}", outcome.failures));
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (norm, target, lo, hi) in rate_targets(k) {
        let r = final_rate(table, norm);
        let ok = r >= target - lo && r <= target + hi;
        pass &= ok;
        parts.push(format!("{}={r:.2}{}", norm.name(), if ok { "" } else { "!" }));
    }
    Verdict::new(pass, format!("k={k} final rates {}", parts.join(" ")))
}

/// Reference errors on the finest (8192-cell) mesh.
fn reference_errors(k: usize) -> [(Norm, f64); 6] {
    match k {
        2 => [
            (Norm::StokesU, 1.4e-7),
            (Norm::StokesP, 5.9e-5),
            (Norm::FractureU, 5.3e-7),
            (Norm::FractureP, 2.6e-5),
            (Norm::MatrixU, 4.3e-6),
            (Norm::MatrixP, 4.2e-5),
        ],
        _ => [
            (Norm::StokesU, 4.0e-10),
            (Norm::StokesP, 2.7e-7),
            (Norm::FractureU, 1.4e-9),
            (Norm::FractureP, 1.1e-7),
            (Norm::MatrixU, 2.9e-8),
            (Norm::MatrixP, 4.4e-7),
        ],
    }
}

fn check_magnitudes(runs: &[&RunOutcome]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for outcome in runs {
        let k = outcome.config.k;
        let Some(table) = &outcome.rates else {
            return Verdict::new(false, format!("k={k}: no errors"));
        };
        let finest = table.finest();
        if finest.cells != 8192 {
            return Verdict::new(false, format!("k={k}: finest mesh has {} cells", finest.cells));
        }
        let mut worst: f64 = 1.0;
        for (norm, reference) in reference_errors(k) {
            let ratio = finest.get(norm) / reference;
            let ok = (1.0 / 3.0..=3.0).contains(&ratio);
            pass &= ok;
            worst = if (ratio.ln()).abs() > worst.ln().abs() { ratio } else { worst };
            if !ok {
                parts.push(format!("k={k} {} ratio {ratio:.2}", norm.name()));
            }
        }
        parts.push(format!("k={k} worst ratio {worst:.2}"));
    }
    Verdict::new(pass, parts.join(", "))
}

fn check_conservation(runs: &[&RunOutcome]) -> Verdict {
    let mut pass = true;
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for outcome in runs {
        if outcome.status == Status::SolverFailure || outcome.conservation.len() != outcome.levels.len() {
            pass = false;
            failures.push(format!("{}: {:?}", outcome.config.scenario, outcome.failures));
            continue;
        }
        for c in &outcome.conservation {
            for (name, v, t) in c.checks(CONSERVATION_TOLERANCE) {
                worst = worst.max(v / t);
                if v > t {
                    pass = false;
                    failures.push(format!("{} {name} {v:.2e} > {t:.2e}", outcome.config.scenario));
                }
            }
            checked += 1;
        }
    }
    Verdict::new(
        pass,
        format!(
            "{checked} solutions, largest value/threshold {worst:.2e}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn zero_solution(mesh: &Mesh, params: &PhysicalParams, bcs: &BoundaryConditionSet, k: usize) -> f64 {
    let disc = DiscretizationParams::new(k).unwrap();
    let layout = DofLayout::build(mesh, &disc, bcs).unwrap();
    let sources = SourceSet::default();
    let problem = Problem {
        mesh,
        layout: &layout,
        disc: &disc,
        params,
        sources: &sources,
    };
    let mut worst: f64 = 0.0;
    for condensed in [true, false] {
        let solved = driver::solve(&problem, condensed).expect("zero data solves");
        worst = worst.max(solved.solution.values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    worst
}

fn symmetry(mesh: &Mesh, params: &PhysicalParams, bcs: &BoundaryConditionSet, sources: &SourceSet, k: usize) -> (f64, f64) {
    let disc = DiscretizationParams::new(k).unwrap();
    let layout = DofLayout::build(mesh, &disc, bcs).unwrap();
    let problem = Problem {
        mesh,
        layout: &layout,
        disc: &disc,
        params,
        sources,
    };
    let full = assemble(&problem).unwrap().matrix.symmetry_defect();
    let schur = condense(&problem).unwrap().matrix.symmetry_defect();
    (full, schur)
}

fn check_well_posedness(factorization_runs: &[&RunOutcome]) -> Verdict {
    let (exact, sources) = mms::example1(MmsParams::default());
    let mms_params = mms::physical_params(&exact);
    let square = build_structured(Geometry::UnitSquareSplit, 8).unwrap();
    let wellbore = RunConfig {
        n: 16,
        fracture_pressure: 0.0,
        matrix_pressure: 0.0,
        ..RunConfig::defaults(Scenario::WellboreVertical)
    };
    let (well_mesh, well_params, well_zero) = driver::wellbore_setup(&wellbore).unwrap();
    let mut zero: f64 = 0.0;
    let mut sym: f64 = 0.0;
    let mut schur_sym: f64 = 0.0;
    for k in 1..=3 {
        zero = zero.max(zero_solution(&square, &mms_params, &BoundaryConditionSet::homogeneous(), k));
        zero = zero.max(zero_solution(&well_mesh, &well_params, &well_zero, k));
        let (a, b) = symmetry(&square, &mms_params, &mms::boundary_conditions(&exact), &sources, k);
        let (c, d) = symmetry(&well_mesh, &well_params, &BoundaryConditionSet::wellbore(1e4, 5e4), &SourceSet::default(), k);
        sym = sym.max(a).max(c);
        schur_sym = schur_sym.max(b).max(d);
    }
    let mut factored = 0;
    let mut failed = Vec::new();
    for outcome in factorization_runs {
        for level in &outcome.levels {
            if level.relative_residual <= dps_hdg::linalg::RESIDUAL_TOLERANCE {
                factored += 1;
            }
        }
        if outcome.status == Status::SolverFailure {
            failed.push(format!("{} k={}: {:?}", outcome.config.scenario, outcome.config.k, outcome.failures));
        }
    }
    let pass = zero <= 1e-10 && sym <= 1e-12 && failed.is_empty();
    Verdict::new(
        pass,
        format!(
            "zero data max |x| {zero:.1e}, symmetry defect {sym:.1e} (condensed {schur_sym:.1e}), {factored} factorizations{}",
            if failed.is_empty() { String::new() } else { format!(", failed: {}", failed.join("; ")) }
        ),
    )
}

/// RMS of `b - A x_I` over the free rows, with `x_I` the projection of the
/// exact solution.
fn consistency_residual(k: usize, n: usize) -> (f64, f64) {
    let (exact, sources) = mms::example1(MmsParams::default());
    let params = mms::physical_params(&exact);
    let bcs = mms::boundary_conditions(&exact);
    let mesh = build_structured(Geometry::UnitSquareSplit, n).unwrap();
    let disc = DiscretizationParams::new(k).unwrap();
    let layout = DofLayout::build(&mesh, &disc, &bcs).unwrap();
    let problem = Problem {
        mesh: &mesh,
        layout: &layout,
        disc: &disc,
        params: &params,
        sources: &sources,
    };
    let sys = assemble(&problem).unwrap();
    let x = interpolate(&exact, &mesh, &layout).unwrap().to_free(&layout);
    let ax = sys.matrix.matvec(&x);
    let sq: f64 = ax.iter().zip(&sys.rhs).map(|(a, b)| (b - a).powi(2)).sum();
    ((sq / x.len() as f64).sqrt(), mesh.h_max)
}

fn check_consistency() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in 1..=3 {
        let levels: Vec<(f64, f64)> = [4, 8, 16, 32].iter().map(|&n| consistency_residual(k, n)).collect();
        let rates: Vec<f64> = levels
            .windows(2)
            .map(|w| (w[0].0 / w[1].0).ln() / (w[0].1 / w[1].1).ln())
            .collect();
        let ok = rates.iter().all(|&r| r >= k as f64);
        pass &= ok;
        let shown: Vec<String> = rates.iter().map(|r| format!("{r:.2}")).collect();
        parts.push(format!("k={k} rates {}", shown.join("/")));
    }
    Verdict::new(pass, format!("RMS residual of the projected exact solution: {}", parts.join(", ")))
}

fn check_kernels() -> Verdict {
    let (worst, compared) = oracle::kernel_oracle(20, 2024);
    Verdict::new(worst <= 1e-12, format!("{compared} local systems on 20 random cell pairs, max relative mismatch {worst:.1e}"))
}

fn check_condensation() -> Verdict {
    let (exact, sources) = mms::example1(MmsParams::default());
    let params = mms::physical_params(&exact);
    let bcs = mms::boundary_conditions(&exact);
    let disc = DiscretizationParams::new(2).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [4, 8, 16] {
        let mesh = build_structured(Geometry::UnitSquareSplit, n).unwrap();
        let layout = DofLayout::build(&mesh, &disc, &bcs).unwrap();
        let problem = Problem {
            mesh: &mesh,
            layout: &layout,
            disc: &disc,
            params: &params,
            sources: &sources,
        };
        let c = driver::solve(&problem, true).unwrap();
        let m = driver::solve(&problem, false).unwrap();
        let scale = m.solution.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let diff = c
            .solution
            .values
            .iter()
            .zip(&m.solution.values)
            .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()))
            / scale;
        let ok = c.condensed && !m.condensed && diff <= 1e-8 && c.global_unknowns < m.global_unknowns;
        pass &= ok;
        parts.push(format!("n={n} diff {diff:.1e} ({} vs {} unknowns)", c.global_unknowns, m.global_unknowns));
    }
    Verdict::new(pass, parts.join(", "))
}

fn check_derivatives() -> Verdict {
    let exact = mms::ExactSolution::new(MmsParams::default());
    let worst = derivative_mismatch(&exact, 100, 7);
    Verdict::new(worst <= 1e-6, format!("100 points, max finite-difference mismatch {worst:.1e}"))
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let out = dir.path();

    let mms: Vec<RunOutcome> = (1..=3)
        .map(|k| run(&config(Scenario::Mms, out, |p| p.k = Some(k))))
        .collect();
    let mut wellbores = Vec::new();
    for k in 1..=3 {
        for s in [Scenario::WellboreVertical, Scenario::WellboreHorizontal, Scenario::RandomPerm] {
            wellbores.push(run(&config(s, out, |p| p.k = Some(k))));
        }
    }
    let low_exchange = run(&config(Scenario::WellboreVertical, out, |p| p.sigma = Some(0.1)));

    let k2 = &mms[1];
    let k3 = &mms[2];
    let mut conserved: Vec<&RunOutcome> = vec![k2, k3];
    conserved.extend(wellbores.iter().filter(|o| o.config.k == 2));
    conserved.push(&low_exchange);
    let mut factored: Vec<&RunOutcome> = mms.iter().collect();
    factored.extend(wellbores.iter());

    let verdicts: Vec<(&str, Verdict)> = vec![
        ("k=2 convergence rates", check_rates(k2)),
        ("k=3 convergence rates", check_rates(k3)),
        ("error magnitudes within 3x of the reference values", check_magnitudes(&[k2, k3])),
        ("local conservation", check_conservation(&conserved)),
        ("zero data, symmetry and factorization", check_well_posedness(&factored)),
        ("consistency of the projected exact solution", check_consistency()),
        ("element kernels against an independent oracle", check_kernels()),
        ("static condensation against the monolithic solve", check_condensation()),
        ("manufactured-solution derivatives", check_derivatives()),
    ];

    let mut all = true;
    for (i, (name, v)) in verdicts.iter().enumerate() {
        all &= v.pass;
        println!("{} criterion {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
