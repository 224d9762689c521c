//! Are the observed indicators distinguishable from a linear process?

mod scan;
mod surrogate;

pub use scan::{
    contour_segments, log2_spaced, sensitivity_scan, ContourSegment, ScanConfig, SensitivityGrid,
    CONTOUR_LEVELS,
};
pub use surrogate::{
    surrogate_test, tail_percentile, MatchedLinear, Statistic, SurrogateConfig, SurrogateReport,
    SurrogateTest,
};
