use super::config::PulseShape;
use std::f64::consts::PI;

/// Sampled chip pulse. Chip `j` contributes `taps[m]` at sample
/// `j * spc + m - lead` of its rail.
#[derive(Debug, Clone)]
pub struct Pulse {
    pub taps: Vec<f64>,
    pub lead: usize,
    /// Sum of squared taps.
    pub energy: f64,
}

impl Pulse {
    pub fn new(shape: PulseShape, spc: usize) -> Self {
        let span = 2 * spc;
        let (taps, lead) = match shape {
            PulseShape::HalfSine => {
                ((0..span).map(|m| (PI * m as f64 / span as f64).sin()).collect(), 0)
            }
            PulseShape::Rect => (vec![1.0; span], 0),
            PulseShape::RaisedCosine(beta) => {
                // centred where the half-sine peaks, truncated to +-4 chip
                // periods, period of one rail symbol (two chips)
                let half = 4 * spc as isize;
                let period = span as f64;
                let mut taps: Vec<f64> = (-half..=half)
                    .map(|d| raised_cosine(d as f64 / period, beta))
                    .collect();
                // same energy as the half-sine pulse (spc)
                let e: f64 = taps.iter().map(|t| t * t).sum();
                let scale = (spc as f64 / e).sqrt();
                taps.iter_mut().for_each(|t| *t *= scale);
                (taps, 3 * spc)
            }
        };
        let energy = taps.iter().map(|t| t * t).sum();
        Pulse { taps, lead, energy }
    }
}

/// Raised-cosine impulse response at `x` symbol periods from the centre.
fn raised_cosine(x: f64, beta: f64) -> f64 {
    let sinc = |v: f64| if v == 0.0 { 1.0 } else { (PI * v).sin() / (PI * v) };
    let denom = 1.0 - (2.0 * beta * x).powi(2);
    if denom.abs() < 1e-12 {
        PI / 4.0 * sinc(1.0 / (2.0 * beta))
    } else {
        sinc(x) * (PI * beta * x).cos() / denom
    }
}
