use std::fmt::Write as _;

use super::errors::{ErrorReport, Norm};
use crate::error::{Error, Result};

/// Observed order between two levels, `log(e_c / e_f) / log(h_c / h_f)`.
/// `None` when the coarse or fine error is zero or not finite.
pub fn observed_rate(coarse: f64, fine: f64, h_coarse: f64, h_fine: f64) -> Option<f64> {
    if coarse > 0.0 && fine > 0.0 && coarse.is_finite() && fine.is_finite() {
        Some((coarse / fine).ln() / (h_coarse / h_fine).ln())
    } else {
        None
    }
}

/// Errors of a refinement sequence with rates between consecutive levels.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub levels: Vec<ErrorReport>,
}

/// Column layouts of the three tables: three rated norms and one unrated
/// diagnostic each.
pub const TABLE_LAYOUTS: [(&str, [Norm; 4]); 3] = [
    ("stokes", [Norm::StokesU, Norm::StokesP, Norm::StokesGradU, Norm::StokesDivUh]),
    ("fracture", [Norm::FractureU, Norm::FractureP, Norm::FractureDivU, Norm::Phi]),
    ("matrix", [Norm::MatrixU, Norm::MatrixP, Norm::MatrixDivU, Norm::PhiM]),
];

pub fn rates(reports: &[ErrorReport]) -> Result<RateTable> {
    if reports.is_empty() {
        return Err(Error::Config("no error reports to tabulate".into()));
    }
    if let Some(w) = reports.windows(2).find(|w| !(w[1].h_max < w[0].h_max)) {
        return Err(Error::Config(format!(
            "levels must refine: h = {} followed by {}",
            w[0].h_max, w[1].h_max
        )));
    }
    Ok(RateTable {
        levels: reports.to_vec(),
    })
}

impl RateTable {
    /// Rates of one norm; entry `i` compares level `i` with level `i + 1`.
    pub fn rates(&self, norm: Norm) -> Vec<Option<f64>> {
        self.levels
            .windows(2)
            .map(|w| observed_rate(w[0].get(norm), w[1].get(norm), w[0].h_max, w[1].h_max))
            .collect()
    }

    /// Rate over the last refinement, `None` with fewer than two levels.
    pub fn final_rate(&self, norm: Norm) -> Option<f64> {
        self.rates(norm).last().copied().flatten()
    }

    pub fn finest(&self) -> &ErrorReport {
        self.levels.last().expect("table is non-empty")
    }

    /// One table in the layout `cells,e1,rate,e2,rate,e3,rate,diag`; the rate
    /// of the first level is `-`.
    pub fn to_csv(&self, norms: [Norm; 4]) -> String {
        let mut out = String::from("cells");
        for n in &norms[..3] {
            let _ = write!(out, ",{},rate", n.name());
        }
        let _ = writeln!(out, ",{}", norms[3].name());
        let rates: Vec<Vec<Option<f64>>> = norms[..3].iter().map(|&n| self.rates(n)).collect();
        for (i, r) in self.levels.iter().enumerate() {
            let _ = write!(out, "{}", r.cells);
            for (j, &n) in norms[..3].iter().enumerate() {
                let rate = match i.checked_sub(1).and_then(|k| rates[j][k]) {
                    Some(v) => format!("{v:.2}"),
                    None => "-".into(),
                };
                let _ = write!(out, ",{:.2e},{rate}", r.get(n));
            }
            let _ = writeln!(out, ",{:.2e}", r.get(norms[3]));
        }
        out
    }

    /// All norms of all levels, one row per level.
    pub fn errors_csv(&self) -> String {
        let mut out = ErrorReport::csv_header();
        out.push('\n');
        for r in &self.levels {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}
