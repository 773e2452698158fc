use roomeval::bands::NUM_BANDS;
use roomeval::dsp::octave_filterbank;
use roomeval::raytrace::{
    diffuse_rain, echogram_to_rir, trace, trace_with_stats, DirectArrival, Echogram, Geometry, Hit,
    RtConfig,
};
use roomeval::scene::{Directivity, InteriorBox, Material, RoomScene, Vec3};

fn room(alpha: f64, s: f64) -> RoomScene {
    RoomScene::shoebox(Vec3::new(7.0, 4.5, 2.5), Material::uniform("w", alpha, s))
}

fn cfg(n_rays: usize, seed: u64) -> RtConfig {
    RtConfig {
        n_rays,
        seed,
        max_time: 0.6,
        ..RtConfig::default()
    }
}

#[test]
fn full_absorption_leaves_only_the_direct_bin() {
    let s = room(1.0, 0.3)
        .with_source("s", Vec3::new(1.0, 1.0, 1.0), Directivity::omni())
        .with_receiver("a", Vec3::new(2.0, 3.0, 1.5))
        .with_receiver("b", Vec3::new(5.0, 2.0, 1.2));
    for eg in trace(&s, 0, &cfg(5000, 1)).unwrap() {
        let direct = eg.direct.unwrap();
        let k = eg.bin_of(direct.time);
        for band in &eg.energy {
            for (i, &e) in band.iter().enumerate() {
                if i == k {
                    assert!(e > 0.0);
                } else {
                    assert_eq!(e, 0.0);
                }
            }
        }
    }
}

#[test]
fn direct_energy_follows_inverse_square_and_cardioid() {
    let s = room(1.0, 0.0)
        .with_source(
            "s",
            Vec3::new(3.0, 2.0, 1.2),
            Directivity::cardioid(Vec3::X),
        )
        .with_receiver("front", Vec3::new(5.0, 2.0, 1.2))
        .with_receiver("back", Vec3::new(1.0, 2.0, 1.2));
    let eg = trace(&s, 0, &cfg(100, 0)).unwrap();
    let front = eg[0].direct.unwrap();
    assert!((front.energy[0] - 0.25).abs() < 1e-12);
    assert!((front.time - 2.0 / 343.0).abs() < 1e-15);
    assert_eq!(eg[1].direct.unwrap().energy, [0.0; NUM_BANDS]);
    assert_eq!(eg[1].total_energy(), 0.0);
}

#[test]
fn occluded_receiver_has_no_direct_sound() {
    let mut s = room(0.3, 0.2)
        .with_source("s", Vec3::new(1.0, 2.0, 0.5), Directivity::omni())
        .with_receiver("r", Vec3::new(5.0, 2.0, 0.5));
    s.boxes.push(InteriorBox {
        min: Vec3::new(2.8, 1.5, 0.0),
        max: Vec3::new(3.2, 2.5, 1.5),
        material: "w".into(),
    });
    let eg = trace(&s, 0, &cfg(2000, 3)).unwrap();
    assert!(eg[0].direct.is_none());
    assert!(eg[0].total_energy() > 0.0);
}

#[test]
fn energy_bookkeeping_balances() {
    let mut s = room(0.2, 0.4)
        .with_source(
            "s",
            Vec3::new(1.2, 1.5, 1.3),
            Directivity::cardioid(Vec3::X),
        )
        .with_receiver("r", Vec3::new(4.0, 3.0, 1.4));
    let m = Material {
        name: "w".into(),
        absorption: [0.1, 0.15, 0.2, 0.3, 0.4, 0.5],
        scattering: [0.05, 0.1, 0.3, 0.5, 0.7, 0.9],
        impedance: None,
    };
    s.add_material(m);
    s.boxes.push(InteriorBox {
        min: Vec3::new(2.0, 0.3, 0.0),
        max: Vec3::new(2.4, 0.7, 1.0),
        material: "w".into(),
    });
    let (_, stats) = trace_with_stats(&s, 0, &cfg(20_000, 9)).unwrap();
    assert!(stats.balance_error() < 1e-6, "{}", stats.balance_error());
    let emitted: f64 = stats.emitted.iter().sum();
    // Cardioid: 4 pi / 3 per band.
    assert!((emitted - 6.0 * 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-9);
    assert_eq!(stats.escaped_rays, 0);
}

#[test]
fn t60_near_eyring_in_a_diffuse_lab_room() {
    let s = room(0.3, 0.5)
        .with_source("s", Vec3::new(1.2, 1.5, 1.3), Directivity::omni())
        .with_receiver("r", Vec3::new(4.9, 3.0, 1.4));
    let eg = trace(
        &s,
        0,
        &RtConfig {
            n_rays: 100_000,
            ..RtConfig::default()
        },
    )
    .unwrap();
    let fitted = eg[0].t60().unwrap();
    let eyring = 0.161 * 78.75 / (120.5 * -(0.7f64).ln());
    assert!((eyring - 0.295).abs() < 5e-4);
    assert!((fitted - eyring).abs() / eyring < 0.15, "fitted {fitted}");
}

#[test]
fn identical_results_for_any_thread_count() {
    let s = RoomScene::lab_room_with_bricks(0.25);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| trace(&s, 1, &cfg(5000, 42)).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn seeds_give_distinct_echograms() {
    let s = room(0.3, 0.3)
        .with_source("s", Vec3::new(1.2, 1.5, 1.3), Directivity::omni())
        .with_receiver("r", Vec3::new(4.9, 3.0, 1.4));
    let a = trace(&s, 0, &cfg(3000, 1)).unwrap();
    let b = trace(&s, 0, &cfg(3000, 2)).unwrap();
    assert_ne!(a, b);
}

#[test]
fn more_rays_reduce_bin_variance() {
    let s = room(0.3, 0.3)
        .with_source("s", Vec3::new(1.2, 1.5, 1.3), Directivity::omni())
        .with_receiver("r", Vec3::new(4.9, 3.0, 1.4));
    let spread = |n_rays: usize| -> f64 {
        let runs: Vec<Vec<f64>> = (0..10)
            .map(|seed| trace(&s, 0, &cfg(n_rays, 100 + seed)).unwrap()[0].broadband())
            .collect();
        let bins = runs[0].len();
        let mut vars: Vec<f64> = (20..bins.min(300))
            .map(|k| {
                let m = runs.iter().map(|r| r[k]).sum::<f64>() / 10.0;
                runs.iter().map(|r| (r[k] - m).powi(2)).sum::<f64>() / 9.0
            })
            .collect();
        vars.sort_by(f64::total_cmp);
        vars[vars.len() / 2]
    };
    let (v4, v5) = (spread(10_000), spread(100_000));
    assert!(v5 < v4, "median variance {v5} not below {v4}");
}

fn rain_geometry() -> (Geometry, RoomScene) {
    let mut s = room(0.3, 1.0);
    s.boxes.push(InteriorBox {
        min: Vec3::new(3.0, 1.0, 0.0),
        max: Vec3::new(3.5, 2.0, 1.0),
        material: "w".into(),
    });
    (Geometry::new(&s).unwrap(), s)
}

fn floor_hit(x: f64, y: f64) -> Hit {
    Hit {
        point: Vec3::new(x, y, 0.0),
        normal: Vec3::Z,
        time: 0.01,
        diffuse_energy: [1.0; NUM_BANDS],
    }
}

#[test]
fn rain_follows_inverse_square_above_the_hit() {
    let (g, _) = rain_geometry();
    let hit = floor_hit(1.0, 3.0);
    let d = diffuse_rain(
        &hit,
        &[Vec3::new(1.0, 3.0, 0.5), Vec3::new(1.0, 3.0, 1.0)],
        &g,
        343.0,
        0.01,
    );
    let (near, far) = (d[0].unwrap(), d[1].unwrap());
    assert!((near.energy[0] / far.energy[0] - 4.0).abs() < 1e-12);
    // Lambert: E cos / (pi r^2) with cos = 1.
    assert!((near.energy[2] - 1.0 / (std::f64::consts::PI * 0.25)).abs() < 1e-12);
    assert!((near.time - (0.01 + 0.5 / 343.0)).abs() < 1e-15);
}

#[test]
fn rain_is_zero_for_occluded_grazing_and_rear_receivers() {
    let (g, _) = rain_geometry();
    let hit = floor_hit(2.0, 1.5);
    let receivers = [
        Vec3::new(4.5, 1.5, 0.5),  // behind the box
        Vec3::new(6.0, 1.5, 1e-9), // grazing
        Vec3::new(2.0, 3.5, 0.8),  // visible
    ];
    let d = diffuse_rain(&hit, &receivers, &g, 343.0, 0.01);
    assert!(d[0].is_none());
    assert!(d[1].is_none_or(|x| x.energy[0] < 1e-9));
    assert!(d[2].unwrap().energy[0] > 0.0);
    let ceiling = Hit {
        point: Vec3::new(1.0, 1.0, 2.5),
        normal: -Vec3::Z,
        ..hit
    };
    // Receiver above the ceiling plane is behind the surface.
    assert!(diffuse_rain(&ceiling, &[Vec3::new(1.0, 1.0, 2.6)], &g, 343.0, 0.01)[0].is_none());
}

fn bin_energy(samples: &[f64], k: usize, fs: f64, bw: f64) -> f64 {
    let s = (k as f64 * bw * fs).round() as usize;
    let e = ((k + 1) as f64 * bw * fs).round() as usize;
    samples[s..e].iter().map(|v| v * v).sum()
}

#[test]
fn single_bin_energy_is_reproduced() {
    let mut eg = Echogram::zeros("r", 200, 1e-3);
    for (b, row) in eg.energy.iter_mut().enumerate() {
        row[120] = 0.01 * (b + 1) as f64;
    }
    let rir = echogram_to_rir(&eg, 7, 16000.0).unwrap();
    // Oracle weights: energy of each band's response to a unit impulse.
    let bank = octave_filterbank(16000.0).unwrap();
    let mut delta = vec![0.0; 2 * bank.len()];
    delta[bank.len()] = 1.0;
    let w: Vec<f64> = (0..6)
        .map(|b| bank.filter_band(&delta, b).iter().map(|v| v * v).sum())
        .collect();
    let sum_w: f64 = w.iter().sum();
    let want: f64 = (0..6).map(|b| 0.01 * (b + 1) as f64 * w[b] / sum_w).sum();
    let got = bin_energy(&rir.samples, 120, 16000.0, 1e-3);
    assert!((got / want - 1.0).abs() < 0.01, "{got} vs {want}");
    let total: f64 = rir.samples.iter().map(|v| v * v).sum();
    assert!((total / want - 1.0).abs() < 1e-9);
}

#[test]
fn uniform_single_bin_entry_is_the_bin_energy() {
    let mut eg = Echogram::zeros("r", 200, 1e-3);
    eg.energy.iter_mut().for_each(|row| row[80] = 0.02);
    let rir = echogram_to_rir(&eg, 2, 16000.0).unwrap();
    let got = bin_energy(&rir.samples, 80, 16000.0, 1e-3);
    assert!((got / 0.02 - 1.0).abs() < 0.01, "{got}");
}

#[test]
fn doubling_energy_scales_rir_by_sqrt_two() {
    let mut eg = Echogram::zeros("r", 100, 1e-3);
    for k in 10..100 {
        for b in 0..NUM_BANDS {
            eg.energy[b][k] = 1e-3 * (-(k as f64) / 20.0).exp() * (b + 1) as f64;
        }
    }
    let direct = DirectArrival {
        time: 0.0104,
        energy: [0.5; NUM_BANDS],
    };
    for b in 0..NUM_BANDS {
        eg.energy[b][10] += 0.5;
    }
    eg.direct = Some(direct);
    let a = echogram_to_rir(&eg, 3, 16000.0).unwrap();
    let mut doubled = eg.clone();
    doubled.energy.iter_mut().flatten().for_each(|e| *e *= 2.0);
    doubled.direct = Some(DirectArrival {
        energy: [1.0; NUM_BANDS],
        ..direct
    });
    let b = echogram_to_rir(&doubled, 3, 16000.0).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert!((y - std::f64::consts::SQRT_2 * x).abs() < 1e-12);
    }
    // Direct pulse peaks at its arrival sample.
    assert_eq!(a.peak_index(), (0.0104f64 * 16000.0).round() as usize);
}
