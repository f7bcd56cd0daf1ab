//! Default profile over BLS12-381, backed by `blstrs`.
//!
//! BLS12-381 has an asymmetric pairing `G1_bls × G2_bls → Gt`. The scheme
//! needs a symmetric one, so its source group is realised as the diagonal
//!
//! ```text
//!     G1 := { (k·P1, k·P2) : k ∈ Z_q } ⊂ G1_bls × G2_bls
//! ```
//!
//! with generator `P = (P1, P2)` (the standard BLS generators) and pairing
//! `e((a1, a2), (b1, b2)) := e_bls(a1, b2)`. On the diagonal this is
//! symmetric, bilinear and non-degenerate, with `e(P, P) = e_bls(P1, P2)`.
//! The target group is `Gt`.
//!
//! A scalar multiplication therefore costs one BLS `G1` and one BLS `G2`
//! multiplication; decoding checks both halves for curve and subgroup
//! membership and then checks that they share a discrete log with a
//! two-term pairing product.
//!
//! Encodings (big-endian throughout):
//! * scalar: 32 bytes, canonical;
//! * G1: `compress(P1) ‖ compress(P2)`, 48 + 96 bytes in the usual
//!   BLS12-381 compressed layout (compression, infinity and sign flags in the
//!   top three bits);
//! * G2: a flag byte (`0x00` element, `0x01` identity) followed by the
//!   288-byte torus compression of the `Gt` element, all zero for the
//!   identity.

use blstrs::{
    Bls12 as Engine, Compress, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt, Scalar,
};
use group::ff::Field;
use group::prime::PrimeCurveAffine;
use group::{Curve, Group};
use pairing::{MillerLoopResult, MultiMillerLoop};
use rand_core::RngCore;

use super::{DecodeError, DivisionByZero, FieldScalar, PairingSuite, SuiteProfile};

const G1_HALF_LEN: usize = 48;
const G2_HALF_LEN: usize = 96;
const FP_LEN: usize = 48;
const GT_COMPRESSED_LEN: usize = 6 * FP_LEN;

const GT_FLAG_ELEMENT: u8 = 0x00;
const GT_FLAG_IDENTITY: u8 = 0x01;

const FLAG_COMPRESSED: u8 = 0x80;
const FLAG_INFINITY: u8 = 0x40;
const FLAG_SIGN: u8 = 0x20;

/// Base field modulus of BLS12-381, big-endian.
const FIELD_MODULUS: [u8; FP_LEN] = [
    0x1a, 0x01, 0x11, 0xea, 0x39, 0x7f, 0xe6, 0x9a, 0x4b, 0x1b, 0xa7, 0xb6, 0x43, 0x4b, 0xac, 0xd7,
    0x64, 0x77, 0x4b, 0x84, 0xf3, 0x85, 0x12, 0xbf, 0x67, 0x30, 0xd2, 0xa0, 0xf6, 0xb0, 0xf6, 0x24,
    0x1e, 0xab, 0xff, 0xfe, 0xb1, 0x53, 0xff, 0xff, 0xb9, 0xfe, 0xff, 0xff, 0xff, 0xff, 0xaa, 0xab,
];

static PROFILE: SuiteProfile = SuiteProfile {
    name: "bls12-381-diagonal-v1",
    security_level_bits: 254,
    order_hex: "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001",
    scalar_len: 32,
    g1_len: G1_HALF_LEN + G2_HALF_LEN,
    g2_len: 1 + GT_COMPRESSED_LEN,
};

/// Marker type for the default profile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Bls12;

/// Element of the diagonal source group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagonalPoint {
    p1: G1Projective,
    p2: G2Projective,
}

impl DiagonalPoint {
    pub fn g1_half(&self) -> &G1Projective {
        &self.p1
    }

    pub fn g2_half(&self) -> &G2Projective {
        &self.p2
    }

    /// Builds a pair without the diagonal check. Only for tests that need
    /// off-diagonal inputs.
    #[doc(hidden)]
    pub fn from_halves_unchecked(p1: G1Projective, p2: G2Projective) -> Self {
        Self { p1, p2 }
    }
}

impl FieldScalar for Scalar {
    fn zero() -> Self {
        Scalar::ZERO
    }

    fn one() -> Self {
        Scalar::ONE
    }

    fn from_u64(v: u64) -> Self {
        Scalar::from(v)
    }

    fn is_zero(&self) -> bool {
        bool::from(Field::is_zero(self))
    }

    fn invert(&self) -> Result<Self, DivisionByZero> {
        Option::from(Field::invert(self)).ok_or(DivisionByZero)
    }

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        <Scalar as Field>::random(rng)
    }
}

/// Rejects bad flag combinations and unreduced coordinates so that a failing
/// uncompress afterwards can only mean "not on the curve".
fn check_compressed_layout(bytes: &[u8], coords: usize) -> Result<(), DecodeError> {
    let flags = bytes[0] & 0xe0;
    if flags & FLAG_COMPRESSED == 0 {
        return Err(DecodeError::MalformedEncoding("compression flag not set"));
    }
    if flags & FLAG_INFINITY != 0 {
        let rest_zero = bytes[0] & 0x1f == 0 && bytes[1..].iter().all(|&b| b == 0);
        if flags & FLAG_SIGN != 0 || !rest_zero {
            return Err(DecodeError::MalformedEncoding("non-canonical infinity"));
        }
        return Ok(());
    }
    for i in 0..coords {
        let mut coord = [0u8; FP_LEN];
        coord.copy_from_slice(&bytes[i * FP_LEN..(i + 1) * FP_LEN]);
        if i == 0 {
            coord[0] &= 0x1f;
        }
        if coord >= FIELD_MODULUS {
            return Err(DecodeError::MalformedEncoding("coordinate not reduced"));
        }
    }
    Ok(())
}

fn decode_g1_half(bytes: &[u8; G1_HALF_LEN]) -> Result<G1Affine, DecodeError> {
    check_compressed_layout(bytes, 1)?;
    let p: G1Affine =
        Option::from(G1Affine::from_compressed_unchecked(bytes)).ok_or(DecodeError::NotOnCurve)?;
    if !bool::from(p.is_on_curve()) {
        return Err(DecodeError::NotOnCurve);
    }
    if !bool::from(p.is_torsion_free()) {
        return Err(DecodeError::WrongSubgroup);
    }
    Ok(p)
}

fn decode_g2_half(bytes: &[u8; G2_HALF_LEN]) -> Result<G2Affine, DecodeError> {
    check_compressed_layout(bytes, 2)?;
    let p: G2Affine =
        Option::from(G2Affine::from_compressed_unchecked(bytes)).ok_or(DecodeError::NotOnCurve)?;
    if !bool::from(p.is_on_curve()) {
        return Err(DecodeError::NotOnCurve);
    }
    if !bool::from(p.is_torsion_free()) {
        return Err(DecodeError::WrongSubgroup);
    }
    Ok(p)
}

/// `e(a1, G2) == e(G1, a2)`, i.e. both halves carry the same discrete log.
fn is_diagonal(a1: &G1Affine, a2: &G2Affine) -> bool {
    let g2 = G2Prepared::from(G2Affine::generator());
    let a2 = G2Prepared::from(*a2);
    let neg_g1 = -G1Affine::generator();
    Engine::multi_miller_loop(&[(a1, &g2), (&neg_g1, &a2)])
        .final_exponentiation()
        .is_identity()
        .into()
}

impl PairingSuite for Bls12 {
    type Scalar = Scalar;
    type G1 = DiagonalPoint;
    type G2 = Gt;

    fn profile() -> &'static SuiteProfile {
        &PROFILE
    }

    fn generator() -> DiagonalPoint {
        DiagonalPoint { p1: G1Projective::generator(), p2: G2Projective::generator() }
    }

    fn g1_identity() -> DiagonalPoint {
        DiagonalPoint { p1: G1Projective::identity(), p2: G2Projective::identity() }
    }

    fn g1_add(a: &DiagonalPoint, b: &DiagonalPoint) -> DiagonalPoint {
        DiagonalPoint { p1: a.p1 + b.p1, p2: a.p2 + b.p2 }
    }

    fn g1_neg(a: &DiagonalPoint) -> DiagonalPoint {
        DiagonalPoint { p1: -a.p1, p2: -a.p2 }
    }

    fn g1_mul(k: &Scalar, p: &DiagonalPoint) -> DiagonalPoint {
        DiagonalPoint { p1: p.p1 * k, p2: p.p2 * k }
    }

    fn pairing(a: &DiagonalPoint, b: &DiagonalPoint) -> Gt {
        blstrs::pairing(&a.p1.to_affine(), &b.p2.to_affine())
    }

    fn multi_pairing(terms: &[(DiagonalPoint, DiagonalPoint)]) -> Gt {
        let lhs: Vec<G1Affine> = terms.iter().map(|(a, _)| a.p1.to_affine()).collect();
        let rhs: Vec<G2Prepared> =
            terms.iter().map(|(_, b)| G2Prepared::from(b.p2.to_affine())).collect();
        let refs: Vec<(&G1Affine, &G2Prepared)> = lhs.iter().zip(rhs.iter()).collect();
        Engine::multi_miller_loop(&refs).final_exponentiation()
    }

    fn g2_identity() -> Gt {
        Gt::identity()
    }

    fn g2_mul(a: &Gt, b: &Gt) -> Gt {
        a + b
    }

    fn g2_exp(base: &Gt, k: &Scalar) -> Gt {
        base * k
    }

    fn encode_scalar(k: &Scalar, out: &mut Vec<u8>) {
        out.extend_from_slice(&k.to_bytes_be());
    }

    fn decode_scalar(bytes: &[u8]) -> Result<Scalar, DecodeError> {
        let raw: &[u8; 32] =
            bytes.try_into().map_err(|_| DecodeError::MalformedEncoding("scalar length"))?;
        Option::from(Scalar::from_bytes_be(raw))
            .ok_or(DecodeError::MalformedEncoding("scalar not reduced"))
    }

    fn encode_g1(p: &DiagonalPoint, out: &mut Vec<u8>) {
        out.extend_from_slice(&p.p1.to_affine().to_compressed());
        out.extend_from_slice(&p.p2.to_affine().to_compressed());
    }

    fn decode_g1(bytes: &[u8]) -> Result<DiagonalPoint, DecodeError> {
        if bytes.len() != PROFILE.g1_len {
            return Err(DecodeError::MalformedEncoding("G1 length"));
        }
        let (h1, h2) = bytes.split_at(G1_HALF_LEN);
        let a1 = decode_g1_half(h1.try_into().expect("split length"))?;
        let a2 = decode_g2_half(h2.try_into().expect("split length"))?;
        if !is_diagonal(&a1, &a2) {
            return Err(DecodeError::WrongSubgroup);
        }
        Ok(DiagonalPoint { p1: a1.into(), p2: a2.into() })
    }

    fn encode_g2(z: &Gt, out: &mut Vec<u8>) {
        if bool::from(z.is_identity()) {
            out.push(GT_FLAG_IDENTITY);
            out.extend_from_slice(&[0u8; GT_COMPRESSED_LEN]);
            return;
        }
        out.push(GT_FLAG_ELEMENT);
        let mut le = Vec::with_capacity(GT_COMPRESSED_LEN);
        z.write_compressed(&mut le).expect("non-identity Gt element compresses");
        for limb in le.chunks(FP_LEN) {
            out.extend(limb.iter().rev());
        }
    }

    fn decode_g2(bytes: &[u8]) -> Result<Gt, DecodeError> {
        if bytes.len() != PROFILE.g2_len {
            return Err(DecodeError::MalformedEncoding("G2 length"));
        }
        let body = &bytes[1..];
        match bytes[0] {
            GT_FLAG_IDENTITY if body.iter().all(|&b| b == 0) => return Ok(Gt::identity()),
            GT_FLAG_ELEMENT => {}
            _ => return Err(DecodeError::MalformedEncoding("G2 flag byte")),
        }
        let mut le = Vec::with_capacity(GT_COMPRESSED_LEN);
        for limb in body.chunks(FP_LEN) {
            if limb >= &FIELD_MODULUS[..] {
                return Err(DecodeError::MalformedEncoding("F_p coefficient not reduced"));
            }
            le.extend(limb.iter().rev());
        }
        Gt::read_compressed(le.as_slice()).map_err(|_| DecodeError::WrongSubgroup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing_suite::{g1_bytes, g2_bytes};

    type S = super::Bls12;

    #[test]
    fn generator_pairing_matches_backend() {
        let g = S::pairing(&S::generator(), &S::generator());
        assert_eq!(g, blstrs::pairing(&G1Affine::generator(), &G2Affine::generator()));
        assert!(!bool::from(g.is_identity()));
    }

    #[test]
    fn off_diagonal_pair_is_rejected() {
        let k = Scalar::from(7u64);
        let bad = DiagonalPoint::from_halves_unchecked(
            G1Projective::generator() * k,
            G2Projective::generator() * (k + Scalar::ONE),
        );
        assert_eq!(S::decode_g1(&g1_bytes::<S>(&bad)), Err(DecodeError::WrongSubgroup));
    }

    #[test]
    fn identity_round_trips_in_both_groups() {
        let o = S::g1_identity();
        assert_eq!(S::decode_g1(&g1_bytes::<S>(&o)), Ok(o));
        let one = S::g2_identity();
        let enc = g2_bytes::<S>(&one);
        assert_eq!(enc.len(), PROFILE.g2_len);
        assert_eq!(S::decode_g2(&enc), Ok(one));
    }

    #[test]
    fn uncompressed_flag_is_malformed() {
        let mut enc = g1_bytes::<S>(&S::generator());
        enc[0] &= !FLAG_COMPRESSED;
        assert!(matches!(S::decode_g1(&enc), Err(DecodeError::MalformedEncoding(_))));
    }

    #[test]
    fn unreduced_gt_coefficient_is_malformed() {
        let mut enc = g2_bytes::<S>(&S::pairing(&S::generator(), &S::generator()));
        enc[1..1 + FP_LEN].fill(0xff);
        assert!(matches!(S::decode_g2(&enc), Err(DecodeError::MalformedEncoding(_))));
    }

    #[test]
    fn gt_element_outside_subgroup_is_rejected() {
        let mut enc = g2_bytes::<S>(&S::pairing(&S::generator(), &S::generator()));
        enc[GT_COMPRESSED_LEN] ^= 1;
        assert_eq!(S::decode_g2(&enc), Err(DecodeError::WrongSubgroup));
    }
}
