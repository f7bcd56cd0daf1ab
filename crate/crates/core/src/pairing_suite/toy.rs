//! Toy Type-A profile: `y² = x³ + x` over `F_p`, `p = 163819`.
//!
//! `p ≡ 3 (mod 4)` makes the curve supersingular with `p + 1 = 20·8191`
//! points, so the order-`q` subgroup (`q = 8191`) has embedding degree 2. The
//! pairing is the reduced Tate pairing composed with the distortion map
//! `(x, y) ↦ (−x, i·y)`, which makes it symmetric and non-degenerate on the
//! subgroup. The target group is the order-`q` subgroup of `F_{p²}^*`.
//!
//! Nothing here is constant-time. The profile exists so that discrete logs
//! can be brute-forced in tests.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use rand_core::RngCore;

use super::{DecodeError, DivisionByZero, FieldScalar, PairingSuite, SuiteProfile};

/// Field characteristic.
pub const FIELD_PRIME: u64 = 163_819;
/// Prime subgroup order.
pub const GROUP_ORDER: u64 = 8_191;
/// `(p + 1) / q`.
pub const COFACTOR: u64 = 20;

const FLAG_EVEN: u8 = 0x00;
const FLAG_ODD: u8 = 0x01;
const FLAG_INFINITY: u8 = 0x02;

static PROFILE: SuiteProfile = SuiteProfile {
    name: "toy-typea-q8191-v1",
    security_level_bits: 12,
    order_hex: "1fff",
    scalar_len: 2,
    g1_len: 5,
    g2_len: 8,
};

/// Marker type for the toy profile.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ToyTypeA;

/// Residue modulo [`GROUP_ORDER`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyScalar(u64);

impl ToyScalar {
    pub fn new(v: u64) -> Self {
        Self(v % GROUP_ORDER)
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

impl Add for ToyScalar {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self((self.0 + rhs.0) % GROUP_ORDER)
    }
}

impl Sub for ToyScalar {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self((self.0 + GROUP_ORDER - rhs.0) % GROUP_ORDER)
    }
}

impl Mul for ToyScalar {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0 % GROUP_ORDER)
    }
}

impl Neg for ToyScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self((GROUP_ORDER - self.0) % GROUP_ORDER)
    }
}

impl FieldScalar for ToyScalar {
    fn zero() -> Self {
        Self(0)
    }

    fn one() -> Self {
        Self(1)
    }

    fn from_u64(v: u64) -> Self {
        Self::new(v)
    }

    fn is_zero(&self) -> bool {
        self.0 == 0
    }

    fn invert(&self) -> Result<Self, DivisionByZero> {
        if self.0 == 0 {
            return Err(DivisionByZero);
        }
        Ok(Self(pow_mod(self.0, GROUP_ORDER - 2, GROUP_ORDER)))
    }

    fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        // Rejection sampling over 13-bit draws keeps the distribution uniform.
        loop {
            let v = u64::from(rng.next_u32() & 0x1fff);
            if v < GROUP_ORDER {
                return Self(v);
            }
        }
    }
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

mod fp {
    use super::{pow_mod, FIELD_PRIME as P};

    pub fn add(a: u64, b: u64) -> u64 {
        (a + b) % P
    }
    pub fn sub(a: u64, b: u64) -> u64 {
        (a + P - b) % P
    }
    pub fn mul(a: u64, b: u64) -> u64 {
        a * b % P
    }
    pub fn neg(a: u64) -> u64 {
        (P - a) % P
    }
    pub fn inv(a: u64) -> u64 {
        debug_assert!(a != 0);
        pow_mod(a, P - 2, P)
    }
    pub fn is_square(a: u64) -> bool {
        a == 0 || pow_mod(a, (P - 1) / 2, P) == 1
    }
    /// Valid for `p ≡ 3 (mod 4)` when `a` is a square.
    pub fn sqrt(a: u64) -> u64 {
        pow_mod(a, (P + 1) / 4, P)
    }
}

/// `a + b·i` in `F_{p²} = F_p[i]/(i² + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp2 {
    pub re: u64,
    pub im: u64,
}

impl Fp2 {
    pub const ONE: Fp2 = Fp2 { re: 1, im: 0 };

    fn mul(self, rhs: Fp2) -> Fp2 {
        let re = fp::sub(fp::mul(self.re, rhs.re), fp::mul(self.im, rhs.im));
        let im = fp::add(fp::mul(self.re, rhs.im), fp::mul(self.im, rhs.re));
        Fp2 { re, im }
    }

    fn pow(self, mut exp: u64) -> Fp2 {
        let mut acc = Fp2::ONE;
        let mut base = self;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            exp >>= 1;
        }
        acc
    }

    fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }
}

/// Affine point on `y² = x³ + x`, or the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToyPoint {
    Infinity,
    Affine { x: u64, y: u64 },
}

impl ToyPoint {
    fn rhs(x: u64) -> u64 {
        fp::add(fp::mul(fp::mul(x, x), x), x)
    }

    pub fn is_on_curve(&self) -> bool {
        match *self {
            ToyPoint::Infinity => true,
            ToyPoint::Affine { x, y } => {
                x < FIELD_PRIME && y < FIELD_PRIME && fp::mul(y, y) == Self::rhs(x)
            }
        }
    }

    fn neg(self) -> Self {
        match self {
            ToyPoint::Infinity => ToyPoint::Infinity,
            ToyPoint::Affine { x, y } => ToyPoint::Affine { x, y: fp::neg(y) },
        }
    }

    fn add(self, rhs: Self) -> Self {
        let (x1, y1, x2, y2) = match (self, rhs) {
            (ToyPoint::Infinity, q) => return q,
            (p, ToyPoint::Infinity) => return p,
            (ToyPoint::Affine { x: x1, y: y1 }, ToyPoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        if x1 == x2 && fp::add(y1, y2) == 0 {
            return ToyPoint::Infinity;
        }
        let lambda = if x1 == x2 {
            tangent_slope(x1, y1)
        } else {
            fp::mul(fp::sub(y2, y1), fp::inv(fp::sub(x2, x1)))
        };
        let x3 = fp::sub(fp::sub(fp::mul(lambda, lambda), x1), x2);
        let y3 = fp::sub(fp::mul(lambda, fp::sub(x1, x3)), y1);
        ToyPoint::Affine { x: x3, y: y3 }
    }

    /// Double-and-add over an arbitrary `u64` multiplier.
    pub fn mul_u64(self, mut k: u64) -> Self {
        let mut acc = ToyPoint::Infinity;
        let mut base = self;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.add(base);
            }
            base = base.add(base);
            k >>= 1;
        }
        acc
    }
}

fn tangent_slope(x: u64, y: u64) -> u64 {
    // curve coefficient a = 1
    fp::mul(fp::add(fp::mul(3, fp::mul(x, x)), 1), fp::inv(fp::add(y, y)))
}

/// Line through `T` with slope `λ`, evaluated at the distorted point
/// `φ(Q) = (−x_Q, i·y_Q)`: `i·y_Q − y_T − λ(−x_Q − x_T)`.
fn line_at_distorted(lambda: u64, xt: u64, yt: u64, xq: u64, yq: u64) -> Fp2 {
    Fp2 {
        re: fp::sub(fp::mul(lambda, fp::add(xq, xt)), yt),
        im: yq,
    }
}

/// Reduced Tate pairing `f_{q,P}(φ(Q))^((p²−1)/q)`.
///
/// Vertical lines evaluate into `F_p` and vanish under the final
/// exponentiation, so they are skipped.
fn tate(p: ToyPoint, q: ToyPoint) -> Fp2 {
    let (ToyPoint::Affine { x: xp, y: yp }, ToyPoint::Affine { x: xq, y: yq }) = (p, q) else {
        return Fp2::ONE;
    };
    let mut f = Fp2::ONE;
    let mut t = p;
    let bits = 64 - GROUP_ORDER.leading_zeros();
    for i in (0..bits - 1).rev() {
        if let ToyPoint::Affine { x: xt, y: yt } = t {
            let lambda = tangent_slope(xt, yt);
            f = f.mul(f).mul(line_at_distorted(lambda, xt, yt, xq, yq));
            t = t.add(t);
        }
        if (GROUP_ORDER >> i) & 1 == 1 {
            if let ToyPoint::Affine { x: xt, y: yt } = t {
                if xt != xp {
                    let lambda = fp::mul(fp::sub(yp, yt), fp::inv(fp::sub(xp, xt)));
                    f = f.mul(line_at_distorted(lambda, xt, yt, xq, yq));
                } else if yt == yp {
                    f = f.mul(line_at_distorted(tangent_slope(xt, yt), xt, yt, xq, yq));
                }
            }
            t = t.add(p);
        }
    }
    debug_assert_eq!(t, ToyPoint::Infinity);
    f.pow((FIELD_PRIME * FIELD_PRIME - 1) / GROUP_ORDER)
}

fn generator() -> ToyPoint {
    static GEN: OnceLock<ToyPoint> = OnceLock::new();
    *GEN.get_or_init(|| {
        (1..FIELD_PRIME)
            .filter(|&x| fp::is_square(ToyPoint::rhs(x)))
            .map(|x| {
                let y = fp::sqrt(ToyPoint::rhs(x));
                ToyPoint::Affine { x, y: y.min(fp::neg(y)) }.mul_u64(COFACTOR)
            })
            .find(|g| *g != ToyPoint::Infinity)
            .expect("curve has points of order q")
    })
}

impl PairingSuite for ToyTypeA {
    type Scalar = ToyScalar;
    type G1 = ToyPoint;
    type G2 = Fp2;

    fn profile() -> &'static SuiteProfile {
        &PROFILE
    }

    fn generator() -> ToyPoint {
        generator()
    }

    fn g1_identity() -> ToyPoint {
        ToyPoint::Infinity
    }

    fn g1_add(a: &ToyPoint, b: &ToyPoint) -> ToyPoint {
        a.add(*b)
    }

    fn g1_neg(a: &ToyPoint) -> ToyPoint {
        a.neg()
    }

    fn g1_mul(k: &ToyScalar, p: &ToyPoint) -> ToyPoint {
        p.mul_u64(k.0)
    }

    fn pairing(a: &ToyPoint, b: &ToyPoint) -> Fp2 {
        tate(*a, *b)
    }

    fn g2_identity() -> Fp2 {
        Fp2::ONE
    }

    fn g2_mul(a: &Fp2, b: &Fp2) -> Fp2 {
        a.mul(*b)
    }

    fn g2_exp(base: &Fp2, k: &ToyScalar) -> Fp2 {
        base.pow(k.0)
    }

    fn encode_scalar(k: &ToyScalar, out: &mut Vec<u8>) {
        out.extend_from_slice(&(k.0 as u16).to_be_bytes());
    }

    fn decode_scalar(bytes: &[u8]) -> Result<ToyScalar, DecodeError> {
        let raw: [u8; 2] = bytes
            .try_into()
            .map_err(|_| DecodeError::MalformedEncoding("scalar length"))?;
        let v = u64::from(u16::from_be_bytes(raw));
        if v >= GROUP_ORDER {
            return Err(DecodeError::MalformedEncoding("scalar not reduced"));
        }
        Ok(ToyScalar(v))
    }

    fn encode_g1(p: &ToyPoint, out: &mut Vec<u8>) {
        match *p {
            ToyPoint::Infinity => {
                out.push(FLAG_INFINITY);
                out.extend_from_slice(&[0; 4]);
            }
            ToyPoint::Affine { x, y } => {
                out.push(if y & 1 == 1 { FLAG_ODD } else { FLAG_EVEN });
                out.extend_from_slice(&(x as u32).to_be_bytes());
            }
        }
    }

    fn decode_g1(bytes: &[u8]) -> Result<ToyPoint, DecodeError> {
        let raw: [u8; 5] = bytes
            .try_into()
            .map_err(|_| DecodeError::MalformedEncoding("G1 length"))?;
        let x = u64::from(u32::from_be_bytes([raw[1], raw[2], raw[3], raw[4]]));
        let want_odd = match raw[0] {
            FLAG_INFINITY if x == 0 => return Ok(ToyPoint::Infinity),
            FLAG_EVEN => false,
            FLAG_ODD => true,
            _ => return Err(DecodeError::MalformedEncoding("G1 flag byte")),
        };
        if x >= FIELD_PRIME {
            return Err(DecodeError::MalformedEncoding("x coordinate not reduced"));
        }
        let rhs = ToyPoint::rhs(x);
        if !fp::is_square(rhs) {
            return Err(DecodeError::NotOnCurve);
        }
        let mut y = fp::sqrt(rhs);
        if (y & 1 == 1) != want_odd {
            y = fp::neg(y);
        }
        if (y & 1 == 1) != want_odd {
            // y = 0 has no odd representative
            return Err(DecodeError::NotOnCurve);
        }
        let p = ToyPoint::Affine { x, y };
        if p.mul_u64(GROUP_ORDER) != ToyPoint::Infinity {
            return Err(DecodeError::WrongSubgroup);
        }
        Ok(p)
    }

    fn encode_g2(z: &Fp2, out: &mut Vec<u8>) {
        out.extend_from_slice(&(z.re as u32).to_be_bytes());
        out.extend_from_slice(&(z.im as u32).to_be_bytes());
    }

    fn decode_g2(bytes: &[u8]) -> Result<Fp2, DecodeError> {
        let raw: [u8; 8] = bytes
            .try_into()
            .map_err(|_| DecodeError::MalformedEncoding("G2 length"))?;
        let re = u64::from(u32::from_be_bytes([raw[0], raw[1], raw[2], raw[3]]));
        let im = u64::from(u32::from_be_bytes([raw[4], raw[5], raw[6], raw[7]]));
        if re >= FIELD_PRIME || im >= FIELD_PRIME {
            return Err(DecodeError::MalformedEncoding("F_p2 coefficient not reduced"));
        }
        let z = Fp2 { re, im };
        if z.is_zero() || z.pow(GROUP_ORDER) != Fp2::ONE {
            return Err(DecodeError::WrongSubgroup);
        }
        Ok(z)
    }
}
