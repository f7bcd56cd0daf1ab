//! Independent model of the toy profile: its own curve and F_p² arithmetic,
//! its own hash reduction, and discrete logarithms by exhaustive tables.
//! Only byte encodings are shared with the library.

use std::collections::HashMap;

use num_bigint::BigUint;
use sha2::{Digest, Sha512};

pub const P: u64 = 163_819;
pub const Q: u64 = 8_191;

fn mul(a: u64, b: u64) -> u64 {
    a * b % P
}

fn pow(mut b: u64, mut e: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(acc, b);
        }
        b = mul(b, b);
        e >>= 1;
    }
    acc
}

fn inv(a: u64) -> u64 {
    pow(a, P - 2)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Pt {
    Inf,
    A(u64, u64),
}

fn add(a: Pt, b: Pt) -> Pt {
    match (a, b) {
        (Pt::Inf, x) | (x, Pt::Inf) => x,
        (Pt::A(x1, y1), Pt::A(x2, y2)) => {
            let lambda = if x1 == x2 {
                if (y1 + y2) % P == 0 {
                    return Pt::Inf;
                }
                mul((3 * mul(x1, x1) + 1) % P, inv(2 * y1 % P))
            } else {
                mul((y2 + P - y1) % P, inv((x2 + P - x1) % P))
            };
            let x3 = (mul(lambda, lambda) + 2 * P - x1 - x2) % P;
            let y3 = (mul(lambda, (x1 + P - x3) % P) + P - y1) % P;
            Pt::A(x3, y3)
        }
    }
}

fn encode(p: Pt) -> [u8; 5] {
    match p {
        Pt::Inf => [2, 0, 0, 0, 0],
        Pt::A(x, y) => {
            let xb = (x as u32).to_be_bytes();
            [(y & 1) as u8, xb[0], xb[1], xb[2], xb[3]]
        }
    }
}

fn decode(bytes: &[u8]) -> Pt {
    let x = u64::from(u32::from_be_bytes(bytes[1..5].try_into().unwrap()));
    if bytes[0] == 2 {
        return Pt::Inf;
    }
    let rhs = (mul(mul(x, x), x) + x) % P;
    let y = pow(rhs, (P + 1) / 4);
    assert_eq!(mul(y, y), rhs, "oracle decode: not on curve");
    let y = if y & 1 == u64::from(bytes[0]) { y } else { P - y };
    Pt::A(x, y)
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct Fp2(u64, u64);

impl Fp2 {
    fn mul(self, o: Fp2) -> Fp2 {
        Fp2(
            (mul(self.0, o.0) + P - mul(self.1, o.1)) % P,
            (mul(self.0, o.1) + mul(self.1, o.0)) % P,
        )
    }

    fn encode(self) -> [u8; 8] {
        let mut out = [0; 8];
        out[..4].copy_from_slice(&(self.0 as u32).to_be_bytes());
        out[4..].copy_from_slice(&(self.1 as u32).to_be_bytes());
        out
    }

    fn decode(b: &[u8]) -> Fp2 {
        Fp2(
            u64::from(u32::from_be_bytes(b[..4].try_into().unwrap())),
            u64::from(u32::from_be_bytes(b[4..8].try_into().unwrap())),
        )
    }
}

/// `SHA-512(len(tag) ‖ tag ‖ payload ‖ counter)` as a big integer mod `q`,
/// retrying on zero.
pub fn hash(tag: &[u8], payload: &[u8]) -> u64 {
    for counter in 0u32.. {
        let mut h = Sha512::new();
        h.update((tag.len() as u32).to_be_bytes());
        h.update(tag);
        h.update(payload);
        h.update(counter.to_be_bytes());
        let k = BigUint::from_bytes_be(&h.finalize()) % BigUint::from(Q);
        let k = k.to_u64_digits().first().copied().unwrap_or(0);
        if k != 0 {
            return k;
        }
    }
    unreachable!()
}

/// `d` with `d·(s + q_ID) ≡ 1`, found by trying every scalar.
pub fn inverse_by_search(a: u64) -> Option<u64> {
    (1..Q).find(|d| d * (a % Q) % Q == 1)
}

pub struct Oracle {
    g1_log: HashMap<[u8; 5], u64>,
    gt_log: HashMap<[u8; 8], u64>,
}

impl Oracle {
    /// Tabulates `k·P` and `g^k` for every `k < q`, checking that both
    /// generators have order exactly `q`.
    pub fn new(generator: &[u8], g: &[u8]) -> Self {
        let base = decode(generator);
        let mut g1_log = HashMap::with_capacity(Q as usize);
        let mut acc = Pt::Inf;
        for k in 0..Q {
            assert!(g1_log.insert(encode(acc), k).is_none(), "generator order below q");
            acc = add(acc, base);
        }
        assert_eq!(acc, Pt::Inf, "generator order is not q");

        let gbase = Fp2::decode(g);
        let mut gt_log = HashMap::with_capacity(Q as usize);
        let mut acc = Fp2(1, 0);
        for k in 0..Q {
            assert!(gt_log.insert(acc.encode(), k).is_none(), "g has order below q");
            acc = acc.mul(gbase);
        }
        assert!(acc == Fp2(1, 0), "g does not have order q");
        Self { g1_log, gt_log }
    }

    pub fn log_g1(&self, enc: &[u8]) -> u64 {
        self.g1_log[<&[u8; 5]>::try_from(enc).unwrap()]
    }

    pub fn log_gt(&self, enc: &[u8]) -> u64 {
        self.gt_log[<&[u8; 8]>::try_from(enc).unwrap()]
    }

    /// Accepts iff `h + log u ≡ Σ log V_i · log IND_i (mod q)`, with `h`
    /// recomputed from scratch over the canonically sorted ring.
    pub fn verify(&self, ring: &[(Vec<u8>, Vec<u8>)], data: &[u8], t: u64, u: &[u8], v: &[Vec<u8>]) -> bool {
        let mut sorted: Vec<&(Vec<u8>, Vec<u8>)> = ring.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        if v.len() != sorted.len() {
            return false;
        }
        let mut payload = Vec::new();
        payload.extend_from_slice(&(data.len() as u64).to_be_bytes());
        payload.extend_from_slice(data);
        payload.extend_from_slice(&t.to_be_bytes());
        payload.extend_from_slice(u);
        payload.extend_from_slice(&(sorted.len() as u32).to_be_bytes());
        for (id, ind) in &sorted {
            payload.extend_from_slice(&(id.len() as u32).to_be_bytes());
            payload.extend_from_slice(id);
            payload.extend_from_slice(ind);
        }
        let h = hash(b"EPDA-v1/message", &payload);
        let lhs = (h + self.log_gt(u)) % Q;
        let rhs = sorted
            .iter()
            .zip(v)
            .map(|((_, ind), vi)| self.log_g1(vi) * self.log_g1(ind) % Q)
            .sum::<u64>()
            % Q;
        lhs == rhs
    }
}
