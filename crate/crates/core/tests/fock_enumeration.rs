use chi2fc::{
    brute_force_fock_correlators, input_g1, input_g2, input_rate, ModeGrid, PulseTrainSpec,
    TimeGrid,
};

fn windows(spec: &PulseTrainSpec) -> ModeGrid {
    let grids: Vec<TimeGrid> = (1..=spec.n_pulses)
        .map(|j| TimeGrid::centered(spec.center(j), 7.0 * spec.sigma_t, 29).unwrap())
        .collect();
    ModeGrid::windows(&grids).unwrap()
}

#[test]
fn enumeration_matches_closed_forms() {
    for n in 1..=3 {
        let spec = PulseTrainSpec::new(n, 16.0, 1.0).unwrap();
        let grid = windows(&spec);
        let fc = brute_force_fock_correlators(&spec, &grid).unwrap();
        assert!((fc.raw_norm - 1.0).abs() < 1e-6, "norm {}", fc.raw_norm);

        let peak = spec.peak_rate();
        let mut worst: f64 = 0.0;
        for (a, &ta) in fc.times.iter().enumerate() {
            worst = worst.max((fc.rate[a] - input_rate(&spec, ta)).abs() / peak);
            for (b, &tb) in fc.times.iter().enumerate() {
                let g1 = input_g1(&spec, ta, tb - ta);
                worst = worst.max((fc.g1[a][b] - g1).norm() / peak);
                let g2 = input_g2(&spec, ta, tb - ta);
                worst = worst.max((fc.g2[a][b] - g2).abs() / (peak * peak));
            }
        }
        assert!(worst <= 1e-6, "n = {n}: worst relative deviation {worst:e}");
    }
}

#[test]
fn enumeration_rejects_four_pulses() {
    let spec = PulseTrainSpec::new(4, 16.0, 1.0).unwrap();
    assert!(brute_force_fock_correlators(&spec, &windows(&spec)).is_err());
}
