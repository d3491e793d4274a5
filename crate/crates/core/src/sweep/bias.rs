//! Search for the flux bias that maximizes the resonant conversion efficiency.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Grid;
use crate::error::{Error, Result};
use crate::flux::{decay_rates, diagonalize, ChargeTruncation, CircuitParams, Eigensolver, LossModel};
use crate::scattering::ConversionChannel;

/// Golden-section refinement stops once the bracket is narrower than this.
pub const BIAS_TOLERANCE: f64 = 1e-5;
/// Efficiency threshold of the reported working band.
pub const EFFICIENCY_BAND: f64 = 0.9;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalBias {
    pub flux: f64,
    pub efficiency: f64,
    /// (f, efficiency) on the coarse grid.
    pub samples: Vec<(f64, f64)>,
    /// Interpolated edges of the region around the optimum where the
    /// efficiency exceeds [`EFFICIENCY_BAND`]; a window edge stands in for a
    /// crossing outside the window.
    pub band: Option<(f64, f64)>,
}

fn efficiency(
    base: &CircuitParams,
    f: f64,
    channel: &dyn ConversionChannel,
    loss: &LossModel,
    trunc: &ChargeTruncation,
    solver: &dyn Eigensolver,
) -> Result<f64> {
    let p = base.with_flux(f)?;
    let s = diagonalize(&p, trunc, solver)?;
    let rates = decay_rates(&p, &s).emitter_rates(loss)?;
    Ok(channel.resonant_efficiency(&rates))
}

fn crossing(a: (f64, f64), b: (f64, f64), level: f64) -> f64 {
    a.0 + (level - a.1) * (b.0 - a.0) / (b.1 - a.1)
}

/// Grid argmax over `window` at spacing `step`, refined by golden-section search.
pub fn find_optimal_bias(
    base: &CircuitParams,
    window: (f64, f64),
    step: f64,
    channel: &dyn ConversionChannel,
    loss: &LossModel,
    trunc: &ChargeTruncation,
    solver: &dyn Eigensolver,
) -> Result<OptimalBias> {
    let (lo, hi) = window;
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
        return Err(Error::InvalidGrid(format!("flux window [{lo}, {hi}] must lie within [0, 1]")));
    }
    if !(step > 0.0) || step > hi - lo {
        return Err(Error::InvalidGrid(format!("flux step {step} does not fit the window")));
    }
    let points = ((hi - lo) / step).round() as usize + 1;
    let fs = Grid::new(lo, hi, points)?.values();
    let effs: Vec<f64> = fs
        .par_iter()
        .map(|&f| efficiency(base, f, channel, loss, trunc, solver))
        .collect::<Result<_>>()?;
    let samples: Vec<(f64, f64)> = fs.iter().copied().zip(effs.iter().copied()).collect();

    let k = (0..samples.len())
        .max_by(|&a, &b| samples[a].1.total_cmp(&samples[b].1).then(b.cmp(&a)))
        .expect("at least two samples");
    let eval = |f: f64| efficiency(base, f, channel, loss, trunc, solver);
    let (mut a, mut b) = (fs[k.saturating_sub(1)], fs[(k + 1).min(fs.len() - 1)]);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while b - a > BIAS_TOLERANCE {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d)?;
        }
    }
    let (mut flux, mut best) = if fc >= fd { (c, fc) } else { (d, fd) };
    if samples[k].1 > best {
        (flux, best) = samples[k];
    }

    let band = (best > EFFICIENCY_BAND).then(|| {
        let left = (0..k)
            .rev()
            .find(|&j| samples[j].1 <= EFFICIENCY_BAND)
            .map_or(lo, |j| crossing(samples[j], samples[j + 1], EFFICIENCY_BAND));
        let right = (k + 1..samples.len())
            .find(|&j| samples[j].1 <= EFFICIENCY_BAND)
            .map_or(hi, |j| crossing(samples[j - 1], samples[j], EFFICIENCY_BAND));
        (left, right)
    });

    Ok(OptimalBias {
        flux,
        efficiency: best,
        samples,
        band,
    })
}
