//! Recorder channel schema, CSV ingestion, multi-rate alignment and cruise segmentation.

mod align;
mod cruise;
mod mach;
mod raw;
mod schema;
mod segment;

pub use align::align_and_convert;
pub use cruise::{detect_cruise_segments, CruiseCriteria};
pub use mach::{derive_mach, GAMMA_AIR, R_AIR};
pub use raw::{load_segment, parse_raw_csv, RawTable, Series};
pub use schema::{
    code, rate_from_hz, ChannelSpec, Rate, Schema, SourceUnit, CELSIUS_OFFSET, KNOTS_TO_MPS,
    LBS_TO_KG, STANDARD_GRAVITY,
};
pub use segment::{FlightSegment, MeasuredSample, ALPHA_LIMIT, MIN_SEGMENT_LEN};
