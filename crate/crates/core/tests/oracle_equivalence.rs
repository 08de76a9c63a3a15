use dynkin_core::{
    brute_force_value, make_discounted, solve, strategy_enumeration_value, DiscountedPayoffs, GameOptionSpec,
    GridParams, OptionKind, VolatilityInterval,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn spec(kind: OptionKind) -> DiscountedPayoffs {
    make_discounted(&GameOptionSpec::new(kind, 100.0, 5.0, 1.0, 0.06).unwrap())
}

#[test]
fn put_three_steps_matches_tree() {
    let p = GridParams::new(0.0, 0.5, 3, 100.0).unwrap();
    let iv = VolatilityInterval::new(0.0, 0.4).unwrap();
    let put = spec(OptionKind::Put);
    let lattice = solve(&p, &put, &iv).unwrap().root();
    let tree = brute_force_value(&p, &put, &iv, 101).unwrap().value;
    assert!((lattice - tree).abs() <= 1e-12, "{lattice} vs {tree}");
}

#[test]
fn enumeration_small_cases() {
    let iv = VolatilityInterval::new(0.0, 0.4).unwrap();
    let put = spec(OptionKind::Put);
    let p1 = GridParams::new(0.0, 0.5, 1, 100.0).unwrap();
    let lattice = solve(&p1, &put, &iv).unwrap().root();
    let e = strategy_enumeration_value(&p1, &put, &iv, 101).unwrap().value;
    assert!((lattice - e).abs() <= 1e-12);

    let call = spec(OptionKind::Call);
    let p2 = GridParams::new(0.0, 0.5, 2, 80.0).unwrap();
    let lattice = solve(&p2, &call, &iv).unwrap().root();
    let e = strategy_enumeration_value(&p2, &call, &iv, 2).unwrap().value;
    assert!((lattice - e).abs() <= 1e-12);

    let tie = DiscountedPayoffs::from_fns(|_, x| (x - 95.0f64).abs(), |_, x| (x - 95.0f64).abs(), |_, _| 0.0);
    let a = solve(&p1, &tie, &iv).unwrap().root();
    let b = brute_force_value(&p1, &tie, &iv, 11).unwrap().value;
    let c = strategy_enumeration_value(&p1, &tie, &iv, 11).unwrap().value;
    assert!((a - b).abs() <= 1e-12 && (a - c).abs() <= 1e-12);
}

#[test]
fn coarse_and_fine_p_grids_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let hi = rng.gen_range(0.1..0.6);
        let iv = VolatilityInterval::new(rng.gen_range(0.0..hi), hi).unwrap();
        let kind = if rng.gen_bool(0.5) { OptionKind::Put } else { OptionKind::Call };
        let payoffs = make_discounted(&GameOptionSpec::new(kind, 100.0, 4.0, 1.0, 0.05).unwrap());
        let p = GridParams::new(0.0, 1.0, 4, rng.gen_range(70.0..130.0)).unwrap();
        let fine = brute_force_value(&p, &payoffs, &iv, 101).unwrap().value;
        let coarse = brute_force_value(&p, &payoffs, &iv, 2).unwrap().value;
        assert!((fine - coarse).abs() <= 1e-12, "{fine} vs {coarse}");
    }
}

#[test]
fn running_payoff_matches_tree() {
    // exercises the h term, which the built-in specs never use
    let payoffs = DiscountedPayoffs::from_fns(
        |t, x| (100.0 - x).max(0.0) * (1.0 - 0.1 * t),
        |t, x| (100.0 - x).max(0.0) * (1.0 - 0.1 * t) + 3.0,
        |t, x| 0.5 + 0.01 * x * (1.0 + t),
    );
    let iv = VolatilityInterval::new(0.1, 0.5).unwrap();
    for n in 1..=4 {
        let p = GridParams::new(0.1, 1.1, n, 97.0).unwrap();
        let lattice = solve(&p, &payoffs, &iv).unwrap().root();
        let tree = brute_force_value(&p, &payoffs, &iv, 51).unwrap().value;
        assert!((lattice - tree).abs() <= 1e-12);
        if n <= 2 {
            let e = strategy_enumeration_value(&p, &payoffs, &iv, 3).unwrap().value;
            assert!((lattice - e).abs() <= 1e-12);
        }
    }
}
