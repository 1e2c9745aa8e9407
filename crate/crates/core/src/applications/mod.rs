//! Gap filling and extrapolation, polygon recovery from moments, and
//! spectral-line quantification.

pub mod gap;
pub mod shape;
pub mod spectral;

pub use gap::{extrapolate, interpolate_gap, Extrapolation, GapFill};
pub use shape::{
    moments_from_polygon, order_by_angle, shape_series, vertex_weights, vertices_from_moments, vertices_from_series,
    MomentSequence, Polygon,
};
pub use spectral::{area_ratios, demodulation_frequency, lines_from_model, passband_filter, SpectralLine};
