//! Offline multichannel weighted-prediction-error dereverberation and the main/support
//! RIR evaluation protocol.

mod eval;
mod groups;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use eval::{
    builtin_metric, direct_path_rir, direct_peak_index, run_dereverb_eval, run_dereverb_eval_with,
    DereverbEvalConfig, EstoiMetric, Metric, SiSdrMetric, SpeechCorpus, DIRECT_WINDOW_S,
    ONSET_SEARCH_S, ONSET_THRESHOLD,
};
pub use groups::{build_eval_groups, EvalGroup, GroupFilter, SUPPORT_RANGE};

use crate::dsp::{istft, stft, AudioBuffer, MultiChannelBuffer, StftFrame, StftSpec};
use crate::error::{Error, Result};

/// Relative diagonal loading of the normal equations: `delta * trace / dim`.
pub const DIAGONAL_LOADING: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WpeConfig {
    /// Prediction filter length in frames.
    pub taps: usize,
    /// Prediction delay in frames.
    pub delay: usize,
    pub iterations: usize,
    /// Floor of the signal power estimate, relative to the bin's peak observed power.
    pub psd_floor: f64,
    pub stft: StftSpec,
}

impl Default for WpeConfig {
    fn default() -> Self {
        Self {
            taps: 10,
            delay: 3,
            iterations: 3,
            psd_floor: 1e-10,
            stft: StftSpec::default(),
        }
    }
}

impl WpeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.taps == 0 || self.delay == 0 || self.iterations == 0 {
            return Err(Error::InvalidArgument(
                "WPE taps, delay and iterations must be >= 1".into(),
            ));
        }
        if !(self.psd_floor > 0.0) {
            return Err(Error::InvalidArgument(
                "WPE psd_floor must be positive".into(),
            ));
        }
        self.stft.check_cola()
    }
}

/// `a * b^H` for complex matrices, evaluated as one real product of the stacked
/// `[Re; Im]` blocks so that the optimized real kernel does the work.
fn gram(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let split = |m: &DMatrix<Complex64>| {
        let (r, c) = m.shape();
        DMatrix::<f64>::from_fn(2 * r, c, |i, j| {
            if i < r {
                m[(i, j)].re
            } else {
                m[(i - r, j)].im
            }
        })
    };
    let (ra, rb) = (a.nrows(), b.nrows());
    let g = split(a) * split(b).transpose();
    // (Ar + i Ai)(Br - i Bi)^T = (Ar Br^T + Ai Bi^T) + i (Ai Br^T - Ar Bi^T)
    DMatrix::from_fn(ra, rb, |i, j| {
        Complex64::new(
            g[(i, j)] + g[(ra + i, rb + j)],
            g[(ra + i, j)] - g[(i, rb + j)],
        )
    })
}

/// Dereverberates one frequency bin in place. `y[d][t]` holds channel `d`, frame `t`.
///
/// Each iteration estimates the power `lambda_t` from the current estimate, solves the
/// `1/lambda`-weighted normal equations for the delayed linear prediction filters over
/// frames `t - delay - taps + 1 ..= t - delay` of every channel, and subtracts the
/// prediction from the observation.
fn wpe_bin(y: &[Vec<Complex64>], config: &WpeConfig) -> Result<Vec<Vec<Complex64>>> {
    let d = y.len();
    let t_len = y[0].len();
    let (k, delta) = (config.taps, config.delay);
    let dim = d * k;
    // Delayed observation stack: row (k_i * d + ch), column t -> y[ch][t - delta - k_i].
    let mut stack = DMatrix::<Complex64>::zeros(dim, t_len);
    for ki in 0..k {
        for ch in 0..d {
            for t in (delta + ki)..t_len {
                stack[(ki * d + ch, t)] = y[ch][t - delta - ki];
            }
        }
    }
    let stack_t = stack.transpose();
    let obs = DMatrix::<Complex64>::from_fn(t_len, d, |t, ch| y[ch][t]);
    let power = |m: &DMatrix<Complex64>, t: usize| {
        (0..d).map(|ch| m[(t, ch)].norm_sqr()).sum::<f64>() / d as f64
    };
    let peak = (0..t_len).map(|t| power(&obs, t)).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Ok(y.to_vec());
    }
    let floor = config.psd_floor * peak;
    let mut est = obs.clone();
    for _ in 0..config.iterations {
        let root_w: Vec<f64> = (0..t_len)
            .map(|t| power(&est, t).max(floor).sqrt().recip())
            .collect();
        let mut ws = stack.clone();
        let mut wy = obs.transpose();
        for (t, w) in root_w.iter().enumerate() {
            ws.column_mut(t).scale_mut(*w);
            wy.column_mut(t).scale_mut(*w);
        }
        // R = sum_t x_t x_t^H / lambda_t, P = sum_t x_t y_t^H / lambda_t
        let mut r = gram(&ws, &ws);
        let p = gram(&ws, &wy);
        let trace: f64 = (0..dim).map(|i| r[(i, i)].re).sum();
        let load = DIAGONAL_LOADING * trace / dim as f64;
        if !(load > 0.0) || !load.is_finite() {
            // Nothing to predict from (silent bin).
            return Ok(y.to_vec());
        }
        for i in 0..dim {
            r[(i, i)] += Complex64::new(load, 0.0);
        }
        let g = r
            .cholesky()
            .ok_or_else(|| {
                Error::Numerical("WPE normal equations are not positive definite".into())
            })?
            .solve(&p);
        // x_t = y_t - G^H stack_t
        let pred = gram(&stack_t, &g.transpose());
        est = &obs - pred;
    }
    if est.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Numerical("WPE produced non-finite values".into()));
    }
    Ok((0..d)
        .map(|ch| est.column(ch).iter().cloned().collect())
        .collect())
}

/// Dereverberates the first channel of `input` using all channels.
///
/// Returns the inverse STFT of the final first-channel estimate, trimmed to the input length.
pub fn wpe_dereverb(input: &MultiChannelBuffer, config: &WpeConfig) -> Result<AudioBuffer> {
    config.validate()?;
    let d = input.num_channels();
    if d < 2 {
        return Err(Error::InvalidArgument(format!(
            "WPE needs at least 2 channels, got {d}"
        )));
    }
    let len = input.channels[0].len();
    if let Some(c) = input.channels.iter().find(|c| c.len() != len) {
        return Err(Error::LengthMismatch(len, c.len()));
    }
    if input.channels.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "WPE input contains non-finite samples".into(),
        ));
    }
    if input.channels.iter().flatten().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("WPE input is all zero".into()));
    }
    let frames: Vec<StftFrame> = (0..d)
        .map(|ch| stft(&input.channel(ch), config.stft))
        .collect::<Result<_>>()?;
    let n_frames = frames[0].num_frames();
    let n_bins = frames[0].num_bins();
    let per_bin: Vec<Vec<Complex64>> = (0..n_bins)
        .into_par_iter()
        .map(|f| {
            let y: Vec<Vec<Complex64>> = frames
                .iter()
                .map(|fr| (0..n_frames).map(|t| fr.data[t][f]).collect())
                .collect();
            wpe_bin(&y, config).map(|mut x| x.swap_remove(0))
        })
        .collect::<Result<_>>()?;
    let mut out = frames[0].clone();
    for (f, col) in per_bin.iter().enumerate() {
        for (t, v) in col.iter().enumerate() {
            out.data[t][f] = *v;
        }
    }
    let mut audio = istft(&out)?;
    audio.samples.truncate(len);
    Ok(audio)
}
