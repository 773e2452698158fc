//! WAV I/O. Reads PCM16, PCM24 and float32; writes float32.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::{AudioBuffer, MultiChannelBuffer};
use crate::error::{Error, Result};

fn wav_err(path: &Path) -> impl FnOnce(hound::Error) -> Error + '_ {
    move |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads every channel of a WAV file as `f64` in [-1, 1] (integer formats) or raw floats.
pub fn read_wav_multi(path: impl AsRef<Path>) -> Result<MultiChannelBuffer> {
    let path = path.as_ref();
    let mut reader = WavReader::open(path).map_err(wav_err(path))?;
    let spec = reader.spec();
    let nch = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err(path))?,
        (SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err(path))?
        }
        (fmt, bits) => {
            return Err(Error::parse(
                path,
                format!("unsupported WAV sample format {fmt:?} with {bits} bits"),
            ))
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / nch.max(1)); nch];
    for (i, x) in interleaved.into_iter().enumerate() {
        channels[i % nch].push(x);
    }
    Ok(MultiChannelBuffer::new(channels, spec.sample_rate as f64))
}

/// Reads a mono WAV file; multichannel files are rejected.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let path = path.as_ref();
    let mut multi = read_wav_multi(path)?;
    if multi.num_channels() != 1 {
        return Err(Error::parse(
            path,
            format!(
                "expected mono audio, found {} channels",
                multi.num_channels()
            ),
        ));
    }
    Ok(AudioBuffer::new(
        multi.channels.remove(0),
        multi.sample_rate,
    ))
}

/// Writes mono float32. The sample rate must be a whole number of Hz.
pub fn write_wav(path: impl AsRef<Path>, audio: &AudioBuffer) -> Result<()> {
    write_wav_multi(
        path,
        &MultiChannelBuffer::new(vec![audio.samples.clone()], audio.sample_rate),
    )
}

pub fn write_wav_multi(path: impl AsRef<Path>, audio: &MultiChannelBuffer) -> Result<()> {
    let path = path.as_ref();
    if audio.sample_rate.fract() != 0.0 || audio.sample_rate <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "WAV needs an integer sample rate, got {}",
            audio.sample_rate
        )));
    }
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let spec = WavSpec {
        channels: audio.num_channels() as u16,
        sample_rate: audio.sample_rate as u32,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut w = WavWriter::create(path, spec).map_err(wav_err(path))?;
    for n in 0..audio.len() {
        for ch in &audio.channels {
            w.write_sample(ch[n] as f32).map_err(wav_err(path))?;
        }
    }
    w.finalize().map_err(wav_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.wav");
        let x = AudioBuffer::new(vec![0.0, 0.5, -0.25, 1.0], 16000.0);
        write_wav(&p, &x).unwrap();
        assert_eq!(read_wav(&p).unwrap(), x);
    }

    #[test]
    fn reads_pcm16_and_pcm24() {
        let dir = tempfile::tempdir().unwrap();
        for bits in [16u16, 24] {
            let p = dir.path().join(format!("p{bits}.wav"));
            let spec = WavSpec {
                channels: 1,
                sample_rate: 8000,
                bits_per_sample: bits,
                sample_format: SampleFormat::Int,
            };
            let mut w = WavWriter::create(&p, spec).unwrap();
            let half = 1i32 << (bits - 2);
            w.write_sample(half).unwrap();
            w.write_sample(-half).unwrap();
            w.finalize().unwrap();
            let a = read_wav(&p).unwrap();
            assert_eq!(a.samples, vec![0.5, -0.5]);
            assert_eq!(a.sample_rate, 8000.0);
        }
    }
}
