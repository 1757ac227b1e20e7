//! Brjuno-type series, majorant sequences and certification of coefficient
//! bounds for linearizations.

mod majorant;
mod report;
mod series;

pub use majorant::{
    alpha_growth, alpha_seq, certify_coefficients, counting_check, delta_map, BoundRow, CertificateReport, CountingReport,
    CountingViolation, DeltaEntry, DeltaMap, MajorantData,
};
pub use report::{BrjunoReport, VariantReport};
pub use series::{
    series_comparison, b_partials, r_gamma_partials, russmann_check, schedule_partial_sum, series_partial_sum,
    SeriesComparison, RussmannCheck, Series,
};
