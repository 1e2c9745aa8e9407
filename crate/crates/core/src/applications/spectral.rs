use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::model::{ExponentialModel, SignalSeries};

/// Frequency (cycles per input sample) removed from the band before
/// decimation. Without decimation nothing is shifted.
pub fn demodulation_frequency(f_lo: f64, f_hi: f64, decimate: usize) -> f64 {
    if decimate > 1 {
        (f_lo + f_hi) / 2.0
    } else {
        0.0
    }
}

/// Keeps DFT bins with normalized frequency in `[f_lo, f_hi)`, transforms
/// back, shifts the band centre to zero when decimating, and keeps every
/// `decimate`-th sample starting at 0. The noise level shrinks with the
/// retained bandwidth and the sampling interval grows by `decimate`.
pub fn passband_filter(series: &SignalSeries, f_lo: f64, f_hi: f64, decimate: usize) -> Result<SignalSeries> {
    if !(0.0 <= f_lo && f_lo < f_hi && f_hi <= 1.0) {
        return Err(Error::InvalidParameter(format!("band must satisfy 0 <= f_lo < f_hi <= 1, got [{f_lo}, {f_hi})")));
    }
    let n = series.len();
    if decimate == 0 || !n.is_multiple_of(decimate) {
        return Err(Error::Decimation { decimate, len: n });
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = series.samples().to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    let mut kept = 0usize;
    for (k, v) in buf.iter_mut().enumerate() {
        let f = k as f64 / n as f64;
        if (f_lo..f_hi).contains(&f) {
            kept += 1;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let shift = demodulation_frequency(f_lo, f_hi, decimate);
    let samples = buf
        .iter()
        .enumerate()
        .step_by(decimate)
        .map(|(t, v)| v / n as f64 * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * shift * t as f64))
        .collect();
    let sigma = series.sigma() * (kept as f64 / n as f64).sqrt();
    SignalSeries::with_dt(samples, sigma, series.dt() * decimate as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralLine {
    pub frequency_hz: f64,
    /// Per second; the Lorentzian half width at half maximum in rad/s.
    pub decay_rate: f64,
    pub area: f64,
    pub phase: f64,
    pub mode_ppm: Option<f64>,
}

impl SpectralLine {
    /// Full width at half maximum in Hz.
    pub fn fwhm_hz(&self) -> f64 {
        self.decay_rate / std::f64::consts::PI
    }
}

pub fn lines_from_model(model: &ExponentialModel, dt: f64, reference_hz: Option<f64>) -> Result<Vec<SpectralLine>> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    model
        .terms()
        .iter()
        .map(|t| {
            if t.node.norm() == 0.0 {
                return Err(Error::NodeAtOrigin);
            }
            let frequency_hz = t.node.arg() / (2.0 * std::f64::consts::PI * dt);
            Ok(SpectralLine {
                frequency_hz,
                decay_rate: -t.node.norm().ln() / dt,
                area: t.weight.norm(),
                phase: t.weight.arg(),
                mode_ppm: reference_hz.map(|r| frequency_hz / r * 1e6),
            })
        })
        .collect()
}

/// Areas divided by the smallest one, in input order.
pub fn area_ratios(lines: &[SpectralLine]) -> Result<Vec<f64>> {
    let min = lines.iter().map(|l| l.area).fold(f64::INFINITY, f64::min);
    if lines.is_empty() {
        return Err(Error::InvalidParameter("no lines".into()));
    }
    if min.is_nan() || min <= 0.0 {
        return Err(Error::ZeroArea);
    }
    Ok(lines.iter().map(|l| l.area / min).collect())
}
