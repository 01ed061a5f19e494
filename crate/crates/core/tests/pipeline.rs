//! Cross-module checks: the Monte Carlo estimators against enumeration, and
//! reproducibility of the disorder streams shared by both.

use potts_glass::bounds::{sk_constant, SK_GROUND_STATE_ENERGY};
use potts_glass::exact::ExactLab;
use potts_glass::glass::{energy, in_sector, ColorProfile, DisorderSample, ModelParams};
use potts_glass::mc::{estimate_sector_max, quenched_thermo_integrate, sk_ground_state, LadderConfig, System};
use potts_glass::rng::derive_seed;

#[test]
fn annealed_sk_energy_near_parisi_constant() {
    let schedule = LadderConfig::default_anneal();
    let n = 200;
    let mut total = 0.0;
    for i in 0..10u64 {
        let disorder = DisorderSample::generate(n, derive_seed(2024, i));
        let (spins, e) = sk_ground_state(&disorder, &schedule, 20, i).unwrap();
        assert_eq!(spins.len(), n);
        total += e / n as f64;
    }
    let mean = total / 10.0;
    let floor = 0.95 * std::f64::consts::SQRT_2 * SK_GROUND_STATE_ENERGY;
    assert!((floor - 1.025).abs() < 1e-3);
    assert!(mean >= floor, "mean {mean} below {floor}");
    // Twice the improved slope is the same constant.
    assert!((2.0 * sk_constant() - std::f64::consts::SQRT_2 * SK_GROUND_STATE_ENERGY).abs() < 1e-15);
}

#[test]
fn quenched_estimators_share_disorders() {
    let params = ModelParams::new(6, 3, 0.8).unwrap();
    let ladder = LadderConfig::hybrid(0.8, 16).unwrap().with_sweeps(8000, 800).unwrap();
    let exact = ExactLab::new().quenched_free_energy(&params, 6, 99, None).unwrap();
    let mc = quenched_thermo_integrate(&params, &ladder, 6, 99).unwrap();
    assert_eq!(exact.num_disorder_samples, mc.num_disorder_samples);
    // Same disorders, so the difference is pure Monte Carlo error, far below
    // the disorder spread.
    assert!((exact.mean - mc.mean).abs() < 0.01, "{} vs {}", exact.mean, mc.mean);
    assert!((exact.std_error - mc.std_error).abs() < 0.01);
}

#[test]
fn quenched_estimate_is_thread_independent() {
    let params = ModelParams::new(7, 2, 1.5).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ExactLab::new().quenched_free_energy(&params, 40, 5, None).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one.mean.to_bits(), four.mean.to_bits());
    assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
}

#[test]
fn sector_search_stays_in_sector_and_below_exact() {
    let profile = ColorProfile::new(vec![0.5, 0.25, 0.25], 0.01).unwrap();
    let lab = ExactLab::new();
    for i in 0..5u64 {
        let params = ModelParams::new(8, 3, 0.0).unwrap();
        let disorder = DisorderSample::generate(8, derive_seed(31, i));
        let (best, exact) = lab.exact_ground_state(&params, &disorder, Some(&profile)).unwrap();
        assert!(in_sector(&best, &profile).unwrap());
        let system = System::new(params, &disorder).unwrap();
        let (found, e) = estimate_sector_max(&system, &profile, &LadderConfig::default_anneal(), 4, i).unwrap();
        assert!(in_sector(&found, &profile).unwrap());
        assert!(e <= exact + 1e-9);
        assert!((energy(&params, &disorder, &found).unwrap() - e).abs() < 1e-12);
    }
}

#[test]
fn disorder_bytes_round_trip() {
    let d = DisorderSample::generate(9, 77);
    let back = DisorderSample::from_bytes(&d.to_bytes()).unwrap();
    assert_eq!(d, back);
    let mut csv = Vec::new();
    d.write_csv(&mut csv).unwrap();
    let rows: Vec<Vec<f64>> = String::from_utf8(csv)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(DisorderSample::from_rows(&rows).unwrap().as_slice(), d.as_slice());
}
