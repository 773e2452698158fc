//! SI-SDR, ESTOI and distance error on a clean signal, a scaled copy, added noise and
//! an echo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roomeval::demo::speech_like;
use roomeval::dsp::{convolve, AudioBuffer};
use roomeval::metrics::{distance_error, estoi, si_sdr};

fn main() -> roomeval::Result<()> {
    let fs = 16000.0;
    let clean = speech_like(1, 3.0, fs);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let map = |f: &mut dyn FnMut(usize, f64) -> f64| {
        AudioBuffer::new(
            clean
                .samples
                .iter()
                .enumerate()
                .map(|(i, &v)| f(i, v))
                .collect(),
            fs,
        )
    };
    let scaled = map(&mut |_, v| -3.0 * v);
    let noisy = map(&mut |_, v| v + 0.02 * rng.gen_range(-1.0..1.0));
    let mut echo = vec![0.0; 1601];
    echo[0] = 1.0;
    echo[1600] = 0.6;
    let mut e = convolve(&clean.samples, &echo);
    e.truncate(clean.len());
    let echoed = AudioBuffer::new(e, fs);

    println!("{:<8} {:>10} {:>7}", "signal", "SI-SDR", "ESTOI");
    for (name, x) in [
        ("clean", &clean),
        ("scaled", &scaled),
        ("noisy", &noisy),
        ("echo", &echoed),
    ] {
        let s = si_sdr(x, &clean)?;
        println!(
            "{name:<8} {:>10} {:>7.3}",
            format!("{:.2}", s.value),
            estoi(&clean, x)?.value
        );
    }
    println!(
        "distance error |2.1 - 3.4| = {:.2} m",
        distance_error(2.1, 3.4)?.value
    );
    Ok(())
}
