use std::collections::HashSet;

use epda_core::clrs::{IDENTITY_TAG, MESSAGE_TAG};
use epda_core::counters::NoRecord;
use epda_core::pairing_suite::{
    g1_bytes, g2_bytes, hash_to_scalar, scalar_bytes, Bls12, DecodeError, FieldScalar, PairingSuite, ToyTypeA,
};
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn scalar<S: PairingSuite>(seed: u64) -> S::Scalar {
    S::Scalar::random(&mut ChaCha20Rng::seed_from_u64(seed))
}

fn bilinear<S: PairingSuite>(a: S::Scalar, b: S::Scalar) {
    let p = S::generator();
    let g = S::pairing(&p, &p);
    let lhs = S::pairing(&S::g1_mul(&a, &p), &S::g1_mul(&b, &p));
    assert_eq!(lhs, S::g2_exp(&g, &(a * b)));
    // and in each argument separately
    let q = S::g1_mul(&b, &p);
    assert_eq!(S::pairing(&S::g1_mul(&a, &p), &q), S::g2_exp(&S::pairing(&p, &q), &a));
}

fn round_trips<S: PairingSuite>(k: S::Scalar) {
    let p = S::g1_mul(&k, &S::generator());
    let z = S::pairing(&p, &S::generator());
    let profile = S::profile();
    let (kb, pb, zb) = (scalar_bytes::<S>(&k), g1_bytes::<S>(&p), g2_bytes::<S>(&z));
    assert_eq!((kb.len(), pb.len(), zb.len()), (profile.scalar_len, profile.g1_len, profile.g2_len));
    assert_eq!(S::decode_scalar(&kb).unwrap(), k);
    assert_eq!(S::decode_g1(&pb).unwrap(), p);
    assert_eq!(S::decode_g2(&zb).unwrap(), z);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bls_is_bilinear(a in any::<u64>(), b in any::<u64>()) {
        bilinear::<Bls12>(scalar::<Bls12>(a), scalar::<Bls12>(b));
    }

    #[test]
    fn toy_is_bilinear(a in 0u64..8191, b in 0u64..8191) {
        bilinear::<ToyTypeA>(FieldScalar::from_u64(a), FieldScalar::from_u64(b));
    }

    #[test]
    fn bls_encodings_round_trip(seed in any::<u64>()) {
        round_trips::<Bls12>(scalar::<Bls12>(seed));
    }

    #[test]
    fn toy_encodings_round_trip(k in 0u64..8191) {
        round_trips::<ToyTypeA>(FieldScalar::from_u64(k));
    }

    #[test]
    fn scalar_field_laws(a in any::<u64>(), b in any::<u64>()) {
        let (a, b) = (scalar::<Bls12>(a), scalar::<Bls12>(b));
        prop_assert_eq!(a + b - b, a);
        prop_assert_eq!(a + (-a), <Bls12 as PairingSuite>::Scalar::zero());
        if !a.is_zero() {
            prop_assert_eq!(a * a.invert().unwrap(), <Bls12 as PairingSuite>::Scalar::one());
        }
    }
}

fn order_is_q<S: PairingSuite>() {
    // q ≡ 0, so (q − 1)·P = −P and q·P = O
    let minus_one = -S::Scalar::one();
    let p = S::generator();
    assert_eq!(S::g1_mul(&minus_one, &p), S::g1_neg(&p));
    assert!(S::g1_is_identity(&S::g1_add(&S::g1_mul(&minus_one, &p), &p)));
    let g = S::pairing(&p, &p);
    assert_ne!(g, S::g2_identity());
    assert_eq!(S::g2_mul(&S::g2_exp(&g, &minus_one), &g), S::g2_identity());
}

#[test]
fn generators_have_order_q() {
    order_is_q::<Bls12>();
    order_is_q::<ToyTypeA>();
}

#[test]
fn toy_hash_is_never_zero_over_100k_inputs() {
    // q = 8191 makes a raw zero reduction likely within this many inputs
    for i in 0u32..100_000 {
        let k = hash_to_scalar::<ToyTypeA>(MESSAGE_TAG, &i.to_be_bytes(), &mut NoRecord);
        assert!(!k.is_zero());
    }
}

#[test]
fn domain_tags_separate_hash_outputs() {
    let mut seen = HashSet::new();
    for i in 0u32..10_000 {
        let payload = i.to_be_bytes();
        let a = hash_to_scalar::<Bls12>(IDENTITY_TAG, &payload, &mut NoRecord);
        let b = hash_to_scalar::<Bls12>(MESSAGE_TAG, &payload, &mut NoRecord);
        assert_ne!(a, b, "tags collide on payload {i}");
        assert!(seen.insert(scalar_bytes::<Bls12>(&a)));
        assert!(seen.insert(scalar_bytes::<Bls12>(&b)));
    }
}

#[test]
fn tag_boundary_is_unambiguous() {
    // (tag "ab", payload "c") and (tag "a", payload "bc") hash differently
    let x = hash_to_scalar::<Bls12>(b"ab", b"c", &mut NoRecord);
    let y = hash_to_scalar::<Bls12>(b"a", b"bc", &mut NoRecord);
    assert_ne!(x, y);
}

#[test]
fn random_scalars_do_not_repeat() {
    let mut rng = rand_core::OsRng;
    let draws: HashSet<Vec<u8>> =
        (0..1000).map(|_| scalar_bytes::<Bls12>(&<Bls12 as PairingSuite>::Scalar::random(&mut rng))).collect();
    assert_eq!(draws.len(), 1000);
}

#[test]
fn toy_x_mutations_are_caught_by_the_curve_check() {
    type S = ToyTypeA;
    let p = S::g1_mul(&FieldScalar::from_u64(1234), &S::generator());
    let enc = g1_bytes::<S>(&p);
    let mut not_on_curve = 0;
    for delta in 1u32..200 {
        let mut bad = enc.clone();
        let x = u32::from_be_bytes(bad[1..5].try_into().unwrap()) + delta;
        bad[1..5].copy_from_slice(&x.to_be_bytes());
        match S::decode_g1(&bad) {
            Err(DecodeError::NotOnCurve) => not_on_curve += 1,
            // the toy group is dense enough that some shifts land on
            // another valid point
            Err(DecodeError::WrongSubgroup) | Ok(_) => {}
            Err(e) => panic!("unexpected {e:?}"),
        }
    }
    // about half of all x have x³ + x a non-residue
    assert!(not_on_curve > 50);
}

#[test]
fn bls_byte_mutations_never_decode_to_a_different_point() {
    let mut rng = ChaCha20Rng::seed_from_u64(99);
    let p = Bls12::g1_mul(&<Bls12 as PairingSuite>::Scalar::random(&mut rng), &Bls12::generator());
    let enc = g1_bytes::<Bls12>(&p);
    let mut not_on_curve = 0;
    for i in 0..enc.len() {
        let mut bad = enc.clone();
        bad[i] ^= 0x10;
        match Bls12::decode_g1(&bad) {
            Ok(q) => assert_eq!(q, p, "byte {i}"),
            Err(DecodeError::NotOnCurve) => not_on_curve += 1,
            Err(_) => {}
        }
    }
    assert!(not_on_curve > 0);
}

#[test]
fn wrong_lengths_are_malformed() {
    for len in [0, 1, 143, 145] {
        assert!(matches!(Bls12::decode_g1(&vec![0u8; len]), Err(DecodeError::MalformedEncoding(_))));
    }
    assert!(matches!(ToyTypeA::decode_g2(&[0u8; 7]), Err(DecodeError::MalformedEncoding(_))));
}
