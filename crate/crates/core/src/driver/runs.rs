use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{RunConfig, Scenario};
use crate::error::{Error, Result};
use crate::forms::{assemble, condense, Coefficient, PhysicalParams, Problem, SourceSet};
use crate::linalg::{solve_direct, SolveReport};
use crate::mesh::{build_structured, Geometry, Mesh};
use crate::mms::{self, compute_errors, rates, ErrorReport, Norm, RateTable, TABLE_LAYOUTS};
use crate::postproc::{
    cell_means, conservation, export_fields, ConservationReport, CONSERVATION_TOLERANCE,
};
use crate::spaces::{BoundaryConditionSet, DiscretizationParams, DofLayout, FieldSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    ThresholdFailure,
    SolverFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::ThresholdFailure => 2,
            Status::SolverFailure => 3,
        }
    }
}

/// Solver statistics of one mesh.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub n: usize,
    pub cells: usize,
    pub unknowns: usize,
    /// Size of the system handed to the sparse solver.
    pub global_unknowns: usize,
    pub condensed: bool,
    pub relative_residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub status: Status,
    /// One line per failed check or solver error.
    pub failures: Vec<String>,
    pub levels: Vec<LevelSummary>,
    pub rates: Option<RateTable>,
    pub conservation: Vec<ConservationReport>,
    /// Area-weighted mean of the cellwise mean speed (wellbore scenarios).
    pub mean_speed: Option<f64>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    fn new(config: &RunConfig) -> Self {
        RunOutcome {
            config: config.clone(),
            status: Status::Pass,
            failures: Vec::new(),
            levels: Vec::new(),
            rates: None,
            conservation: Vec::new(),
            mean_speed: None,
            files: Vec::new(),
        }
    }

    fn fail(&mut self, status: Status, msg: String) {
        if status == Status::SolverFailure || self.status == Status::Pass {
            self.status = status;
        }
        self.failures.push(msg);
    }
}

/// A solved discrete problem.
#[derive(Debug, Clone)]
pub struct Solved {
    pub solution: FieldSolution,
    pub report: SolveReport,
    pub global_unknowns: usize,
    pub condensed: bool,
}

fn is_solver_error(e: &Error) -> bool {
    matches!(
        e,
        Error::SingularMatrix(_) | Error::ResidualTooLarge { .. } | Error::SingularCellBlock { .. }
    )
}

/// Solves through the condensed trace system or the monolithic system. A
/// singular local block falls back to the monolithic path.
pub fn solve(problem: &Problem, condensed: bool) -> Result<Solved> {
    if condensed {
        match condense(problem) {
            Ok(sys) => {
                let (x, report) = solve_direct(&sys.matrix, &sys.rhs)?;
                return Ok(Solved {
                    solution: sys.recover(&x)?,
                    report,
                    global_unknowns: sys.n_exterior(),
                    condensed: true,
                });
            }
            Err(Error::SingularCellBlock { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let sys = assemble(problem)?;
    let (x, report) = solve_direct(&sys.matrix, &sys.rhs)?;
    Ok(Solved {
        solution: FieldSolution::from_free(problem.layout, &x)?,
        report,
        global_unknowns: sys.rhs.len(),
        condensed: false,
    })
}

/// Per-cell permeabilities, `log10 kappa` uniform on the log of each range.
/// Draws all `kappa_f` values first, then all `kappa_m` values, from
/// `ChaCha8Rng::seed_from_u64(seed)`.
pub fn random_permeability(cells: usize, kappa_f: [f64; 2], kappa_m: [f64; 2], seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |[lo, hi]: [f64; 2]| -> Vec<f64> {
        let (a, b) = (lo.log10(), hi.log10());
        (0..cells)
            .map(|_| {
                let t: f64 = rng.random();
                10f64.powf(a + (b - a) * t).clamp(lo, hi)
            })
            .collect()
    };
    let f = draw(kappa_f);
    let m = draw(kappa_m);
    (f, m)
}

/// Mesh, material parameters and boundary data of a wellbore scenario.
pub fn wellbore_setup(config: &RunConfig) -> Result<(Mesh, PhysicalParams, BoundaryConditionSet)> {
    let geometry = match config.scenario {
        Scenario::WellboreVertical => Geometry::VerticalWellbore,
        Scenario::WellboreHorizontal | Scenario::RandomPerm => Geometry::HorizontalWellbore,
        Scenario::Mms => return Err(Error::Config("mms is not a wellbore scenario".into())),
    };
    let mesh = build_structured(geometry, config.n)?;
    let (kappa_f, kappa_m) = if config.scenario == Scenario::RandomPerm {
        let (f, m) = random_permeability(mesh.num_cells(), config.kappa_f_range, config.kappa_m_range, config.seed);
        (Coefficient::PerCell(f), Coefficient::PerCell(m))
    } else {
        (Coefficient::Constant(config.kappa_f), Coefficient::Constant(config.kappa_m))
    };
    let params = PhysicalParams {
        mu: config.mu,
        kappa_f,
        kappa_m,
        sigma: config.sigma,
        alpha: config.alpha,
    };
    let bcs = BoundaryConditionSet::wellbore(config.fracture_pressure, config.matrix_pressure);
    Ok((mesh, params, bcs))
}

/// Area-weighted mean over all cells of the cell-mean speed of `u_h`.
pub fn mean_speed(solution: &FieldSolution, mesh: &Mesh, layout: &DofLayout) -> Result<f64> {
    let means = cell_means(solution, mesh, layout)?;
    let total: f64 = means
        .iter()
        .map(|r| mesh.cell_area(r.cell) * r.ux.hypot(r.uy))
        .sum();
    Ok(total / mesh.total_area())
}

fn write(path: &Path, text: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    files.push(path.to_path_buf());
    Ok(())
}

fn conservation_csv(rows: &[(usize, ConservationReport)]) -> String {
    let mut out = String::from("cells,quantity,value,threshold,pass\n");
    for (cells, r) in rows {
        for (name, v, t) in r.checks(CONSERVATION_TOLERANCE) {
            let _ = writeln!(out, "{cells},{name},{v:.6e},{t:.6e},{}", v <= t);
        }
    }
    out
}

fn check_conservation(outcome: &mut RunOutcome, cells: usize, report: &ConservationReport) {
    for (name, v, t) in report.checks(CONSERVATION_TOLERANCE) {
        if !(v <= t) {
            outcome.fail(
                Status::ThresholdFailure,
                format!("{cells} cells: {name} = {v:.3e} exceeds {t:.3e}"),
            );
        }
    }
}

/// Lower bounds on the final observed rates for degree `k`.
pub fn rate_thresholds(k: usize) -> Vec<(Norm, f64)> {
    let k = k as f64;
    vec![
        (Norm::StokesU, k + 0.8),
        (Norm::FractureU, k + 0.8),
        (Norm::MatrixU, k + 0.8),
        (Norm::StokesP, k - 0.2),
        (Norm::FractureP, k - 0.2),
        (Norm::MatrixP, k - 0.2),
        (Norm::StokesGradU, k - 0.1),
        (Norm::FractureDivU, k - 0.1),
        (Norm::MatrixDivU, k - 0.1),
    ]
}

/// Smallest number of levels for which rates are checked.
pub const MIN_RATE_LEVELS: usize = 3;

/// Refinement sequence on the manufactured solution, `n = n0 * 2^i`.
pub fn run_mms(config: &RunConfig) -> Result<RunOutcome> {
    let mut outcome = RunOutcome::new(config);
    let (exact, sources) = mms::example1(config.mms_params());
    let params = mms::physical_params(&exact);
    let bcs = mms::boundary_conditions(&exact);
    let disc = DiscretizationParams::with_penalty(config.k, config.beta)?;
    let mut reports: Vec<ErrorReport> = Vec::new();
    let mut balance = Vec::new();
    let mut finest = None;
    for level in 0..config.levels {
        let n = config.n << level;
        let mesh = build_structured(Geometry::UnitSquareSplit, n)?;
        let layout = DofLayout::build(&mesh, &disc, &bcs)?;
        let problem = Problem {
            mesh: &mesh,
            layout: &layout,
            disc: &disc,
            params: &params,
            sources: &sources,
        };
        let start = Instant::now();
        let solved = match solve(&problem, config.condense) {
            Ok(s) => s,
            Err(e) if is_solver_error(&e) => {
                outcome.fail(
                    Status::SolverFailure,
                    format!("level {level} (n = {n}, {} cells): {e}", mesh.num_cells()),
                );
                break;
            }
            Err(e) => return Err(e),
        };
        outcome.levels.push(summary(n, &mesh, &layout, &solved, start));
        reports.push(compute_errors(&solved.solution, &exact, &mesh, &layout)?);
        let c = conservation(&solved.solution, &mesh, &layout, &params, &sources)?;
        check_conservation(&mut outcome, mesh.num_cells(), &c);
        balance.push((mesh.num_cells(), c));
        outcome.conservation.push(c);
        finest = Some((mesh, layout, solved.solution));
    }

    let out = &config.out;
    if !reports.is_empty() {
        let table = rates(&reports)?;
        for (name, norms) in TABLE_LAYOUTS {
            write(&out.join(format!("rates_{name}.csv")), &table.to_csv(norms), &mut outcome.files)?;
        }
        write(&out.join("errors.csv"), &table.errors_csv(), &mut outcome.files)?;
        if reports.len() >= MIN_RATE_LEVELS && outcome.status != Status::SolverFailure {
            for (norm, min) in rate_thresholds(config.k) {
                match table.final_rate(norm) {
                    Some(r) if r >= min => {}
                    r => outcome.fail(
                        Status::ThresholdFailure,
                        format!("final {} rate {r:?} below {min}", norm.name()),
                    ),
                }
            }
        }
        outcome.rates = Some(table);
    }
    write(&out.join("conservation.csv"), &conservation_csv(&balance), &mut outcome.files)?;
    if let Some((mesh, layout, solution)) = finest {
        let (vtk, csv) = export_fields(&solution, &mesh, &layout, &out.join("fields_mms"))?;
        outcome.files.extend([vtk, csv]);
    }
    Ok(outcome)
}

fn summary(n: usize, mesh: &Mesh, layout: &DofLayout, solved: &Solved, start: Instant) -> LevelSummary {
    LevelSummary {
        n,
        cells: mesh.num_cells(),
        unknowns: layout.n_free(),
        global_unknowns: solved.global_unknowns,
        condensed: solved.condensed,
        relative_residual: solved.report.relative_residual,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Single solve of a wellbore scenario, including random permeabilities.
pub fn run_wellbore(config: &RunConfig) -> Result<RunOutcome> {
    let mut outcome = RunOutcome::new(config);
    let (mesh, params, bcs) = wellbore_setup(config)?;
    let disc = DiscretizationParams::with_penalty(config.k, config.beta)?;
    let layout = DofLayout::build(&mesh, &disc, &bcs)?;
    let sources = SourceSet::default();
    let problem = Problem {
        mesh: &mesh,
        layout: &layout,
        disc: &disc,
        params: &params,
        sources: &sources,
    };
    let start = Instant::now();
    let solved = match solve(&problem, config.condense) {
        Ok(s) => s,
        Err(e) if is_solver_error(&e) => {
            outcome.fail(Status::SolverFailure, format!("{} cells: {e}", mesh.num_cells()));
            return Ok(outcome);
        }
        Err(e) => return Err(e),
    };
    outcome.levels.push(summary(config.n, &mesh, &layout, &solved, start));
    let c = conservation(&solved.solution, &mesh, &layout, &params, &sources)?;
    check_conservation(&mut outcome, mesh.num_cells(), &c);
    outcome.conservation.push(c);
    outcome.mean_speed = Some(mean_speed(&solved.solution, &mesh, &layout)?);

    let out = &config.out;
    write(
        &out.join("conservation.csv"),
        &conservation_csv(&[(mesh.num_cells(), c)]),
        &mut outcome.files,
    )?;
    let base = out.join(format!("fields_{}", config.scenario.name()));
    let (vtk, csv) = export_fields(&solved.solution, &mesh, &layout, &base)?;
    outcome.files.extend([vtk, csv]);
    Ok(outcome)
}

/// Random-permeability run: the horizontal wellbore with per-cell
/// permeabilities drawn from the seeded generator.
pub fn run_random_perm(config: &RunConfig) -> Result<RunOutcome> {
    if config.scenario != Scenario::RandomPerm {
        return Err(Error::Config(format!("expected random-perm, got {}", config.scenario)));
    }
    run_wellbore(config)
}
