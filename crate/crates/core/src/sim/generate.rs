use crate::error::{Error, Result};
use crate::model::{GroundTruth, ObservationVector};
use crate::rng::{bernoulli, std_normal, StreamRng};
use crate::Real;

use super::{SimulationSetting, Standardize};

const TAG_INDICATOR: u64 = 1;
const TAG_SLAB: u64 = 2;
const TAG_NOISE: u64 = 3;
const TAG_SHARED: u64 = 4;
// A draw with zero spread among the signals is redrawn from the next slab
// substream at most this many times.
const MAX_SLAB_REDRAWS: u64 = 16;

fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Spike-and-slab means rescaled to sample sd `snr`.
fn signal_vector<T: Real>(setting: &SimulationSetting<T>, seed: u64) -> Result<Vec<T>> {
    let m = setting.m;
    let s = setting.s.to_f64_lossy();
    let mut rng = StreamRng::new(seed, &[TAG_INDICATOR]);
    let theta: Vec<bool> = (0..m).map(|_| bernoulli(s, &mut rng)).collect();
    let nonzero = theta.iter().filter(|&&t| t).count();
    if nonzero == 0 {
        return Ok(vec![T::zero(); m]);
    }
    let psi = setting.psi.to_f64_lossy();
    let snr = setting.snr.to_f64_lossy();
    for redraw in 0..MAX_SLAB_REDRAWS {
        let mut rng = StreamRng::new(seed, &[TAG_SLAB, redraw]);
        let beta: Vec<f64> = theta
            .iter()
            .map(|&t| {
                let z: f64 = std_normal(&mut rng);
                if t { psi * z } else { 0.0 }
            })
            .collect();
        let sd = match setting.standardize {
            Standardize::All => sample_sd(&beta),
            Standardize::Nonzero if nonzero >= 2 => {
                let nz: Vec<f64> = beta.iter().copied().filter(|&b| b != 0.0).collect();
                sample_sd(&nz)
            }
            // A lone signal has no sample spread; scale it to magnitude 1.
            Standardize::Nonzero => beta.iter().map(|b| b.abs()).fold(0.0, f64::max),
        };
        if sd > 0.0 && sd.is_finite() {
            return Ok(beta.into_iter().map(|b| T::lit(b / sd * snr)).collect());
        }
    }
    Err(Error::Estimation("slab draws have zero spread".into()))
}

fn noise_vector(m: usize, rho: f64, seed: u64) -> Vec<f64> {
    let mut rng = StreamRng::new(seed, &[TAG_NOISE]);
    let shared: f64 = std_normal(&mut StreamRng::new(seed, &[TAG_SHARED]));
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    (0..m)
        .map(|_| {
            let z: f64 = std_normal(&mut rng);
            a * shared + b * z
        })
        .collect()
}

fn assemble<T: Real>(beta: Vec<T>, noise: Vec<f64>, rho: Option<T>) -> Result<(ObservationVector<T>, GroundTruth<T>)> {
    let y = beta.iter().zip(noise).map(|(&b, e)| b + T::lit(e)).collect();
    Ok((ObservationVector::with_rho(y, rho)?, GroundTruth::from_beta(beta)))
}

/// `y = β + ε` with iid standard normal noise.
pub fn generate_independent<T: Real>(
    setting: &SimulationSetting<T>,
    seed: u64,
) -> Result<(ObservationVector<T>, GroundTruth<T>)> {
    setting.validate()?;
    let beta = signal_vector(setting, seed)?;
    assemble(beta, noise_vector(setting.m, 0.0, seed), None)
}

/// `y = β + ε` with `ε_j = √ρ z₀ + √(1−ρ) z_j`. At ρ = 0 the draws coincide
/// with [`generate_independent`].
pub fn generate_equicorrelated<T: Real>(
    setting: &SimulationSetting<T>,
    seed: u64,
) -> Result<(ObservationVector<T>, GroundTruth<T>)> {
    setting.validate()?;
    let beta = signal_vector(setting, seed)?;
    assemble(beta, noise_vector(setting.m, setting.rho.to_f64_lossy(), seed), Some(setting.rho))
}

/// Dispatches on `setting.rho`.
pub fn generate<T: Real>(setting: &SimulationSetting<T>, seed: u64) -> Result<(ObservationVector<T>, GroundTruth<T>)> {
    if setting.rho > T::zero() {
        generate_equicorrelated(setting, seed)
    } else {
        generate_independent(setting, seed)
    }
}
