//! Conservation diagnostics and field export.

mod conservation;
mod export;

pub use conservation::{conservation, ConservationReport, CONSERVATION_TOLERANCE};
pub(crate) use conservation::project;
pub use export::{cell_means, export_fields, CellRecord, CELL_CSV_HEADER};
