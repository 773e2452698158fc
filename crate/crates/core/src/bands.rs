//! Octave-band layout shared by materials, the geometrical engines and the filterbank.
//!
//! Six octave bands centred at 125 Hz .. 4 kHz. Content below the first band and
//! above the last band takes the value of the nearest edge band.

/// Number of octave bands carried by materials and echograms.
pub const NUM_BANDS: usize = 6;

/// Nominal octave-band centre frequencies in Hz.
pub const BAND_CENTERS_HZ: [f64; NUM_BANDS] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0];

/// Per-band values, one per octave band.
pub type BandValues = [f64; NUM_BANDS];

/// Crossover frequencies between adjacent bands (`NUM_BANDS - 1` entries), at `fc * sqrt(2)`.
pub fn crossover_frequencies() -> [f64; NUM_BANDS - 1] {
    let mut out = [0.0; NUM_BANDS - 1];
    for (i, f) in out.iter_mut().enumerate() {
        *f = BAND_CENTERS_HZ[i] * std::f64::consts::SQRT_2;
    }
    out
}

/// Upper edge of the highest octave band (4 kHz * sqrt(2) ~ 5657 Hz).
pub fn upper_band_edge() -> f64 {
    BAND_CENTERS_HZ[NUM_BANDS - 1] * std::f64::consts::SQRT_2
}

/// Atmospheric attenuation in dB/m following the ISO 9613-1 pure-tone formula.
pub fn air_attenuation_db_per_m(freq_hz: f64, temperature_c: f64, relative_humidity: f64) -> f64 {
    const T0: f64 = 293.15;
    const T01: f64 = 273.16;
    let t = temperature_c + 273.15;
    let pa_rel = 1.0; // ambient pressure / reference pressure
    let c = -6.8346 * (T01 / t).powf(1.261) + 4.6151;
    let psat_rel = 10f64.powf(c);
    let h = relative_humidity * psat_rel / pa_rel;
    let fr_o = pa_rel * (24.0 + 4.04e4 * h * (0.02 + h) / (0.391 + h));
    let fr_n = pa_rel
        * (t / T0).powf(-0.5)
        * (9.0 + 280.0 * h * (-4.170 * ((t / T0).powf(-1.0 / 3.0) - 1.0)).exp());
    let f2 = freq_hz * freq_hz;
    8.686
        * f2
        * (1.84e-11 / pa_rel * (t / T0).sqrt()
            + (t / T0).powf(-2.5)
                * (0.01275 * (-2239.1 / t).exp() / (fr_o + f2 / fr_o)
                    + 0.1068 * (-3352.0 / t).exp() / (fr_n + f2 / fr_n)))
}

/// Air attenuation per octave band at 20 degC and 50 % relative humidity, in dB/m.
pub fn air_attenuation_table() -> BandValues {
    let mut out = [0.0; NUM_BANDS];
    for (o, &f) in out.iter_mut().zip(BAND_CENTERS_HZ.iter()) {
        *o = air_attenuation_db_per_m(f, 20.0, 50.0);
    }
    out
}

/// Index of the band whose octave contains `freq_hz`, with edge extension.
pub fn band_of(freq_hz: f64) -> usize {
    crossover_frequencies()
        .iter()
        .position(|&edge| freq_hz < edge)
        .unwrap_or(NUM_BANDS - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossovers_sit_between_centres() {
        let x = crossover_frequencies();
        for i in 0..NUM_BANDS - 1 {
            assert!(x[i] > BAND_CENTERS_HZ[i] && x[i] < BAND_CENTERS_HZ[i + 1]);
        }
        assert!((upper_band_edge() - 5656.85).abs() < 0.01);
    }

    #[test]
    fn air_attenuation_magnitudes() {
        // ISO 9613-1 tables give roughly 5 dB/km at 1 kHz and ~30 dB/km at 4 kHz (20 degC, 50 %).
        let t = air_attenuation_table();
        assert!(t[3] > 4.0e-3 && t[3] < 6.0e-3, "{}", t[3]);
        assert!(t[5] > 2.0e-2 && t[5] < 4.0e-2, "{}", t[5]);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn band_lookup_extends_edges() {
        assert_eq!(band_of(20.0), 0);
        assert_eq!(band_of(1000.0), 3);
        assert_eq!(band_of(7000.0), 5);
    }
}
