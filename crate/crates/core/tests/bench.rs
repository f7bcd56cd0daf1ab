use epda_core::bench::{instrumentation_overhead, run_bench, write_csv, Fixture, Stage};
use epda_core::counters::OpCounters;
use epda_core::pairing_suite::{Bls12, ToyTypeA};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[test]
fn counting_costs_at_most_five_percent() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let fixture = Fixture::<Bls12>::new(10, &mut rng);
    let ratio = instrumentation_overhead(&fixture, 10, 100, &mut rng);
    assert!(ratio <= 1.05, "counted/plain = {ratio:.3}");
}

#[test]
fn toy_bench_rows_carry_exact_counts() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let results = run_bench::<ToyTypeA, _>(&[1, 4, 9], 30, &mut rng).unwrap();
    assert_eq!(results.len(), 9);
    for r in &results {
        let n = r.n as u64;
        let expected = match r.stage {
            Stage::Keygen => OpCounters::new(1, 4, 0, 1),
            Stage::Sign => OpCounters::new(1, 2 * n - 1, 1, 1),
            Stage::Verify => OpCounters::new(n, 0, 1, 1),
        };
        assert_eq!(r.counters, expected, "n={n} {}", r.stage);
        assert!(r.mean_ns > 0.0 && r.stddev_ns >= 0.0);
    }
    let mut csv = Vec::new();
    write_csv(&results, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.lines().nth(1).unwrap().starts_with("1,keygen,30,"));
}
