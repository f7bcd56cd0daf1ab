//! Operation counting and timing for key generation, signing and
//! verification across ring sizes.

use std::fmt;
use std::io;
use std::str::FromStr;
use std::time::Instant;

use rand_core::{CryptoRng, OsRng, RngCore};
use serde::Serialize;
use thiserror::Error;

use crate::clrs::{
    client_keygen, extract_partial_key, setup, sign, verify, ClientKeyMaterial, Identity, NmSecret,
    PartialKey, Ring, RingSignature, SystemParams,
};
use crate::counters::{NoRecord, OpCounters, Recorder};
use crate::pairing_suite::{FieldScalar, PairingSuite};

/// Fewer trials than this give no reportable mean.
pub const MIN_TRIALS: usize = 30;

const BENCH_DATA: &[u8] = b"bench payload: 32 bytes of data.";
const BENCH_TIME: u64 = 1_700_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Keygen,
    Sign,
    Verify,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Keygen, Stage::Sign, Stage::Verify];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Keygen => "keygen",
            Stage::Sign => "sign",
            Stage::Verify => "verify",
        })
    }
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keygen" => Ok(Stage::Keygen),
            "sign" => Ok(Stage::Sign),
            "verify" => Ok(Stage::Verify),
            other => Err(format!("unknown stage {other:?}")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(usize),
    #[error("ring size must be at least 1")]
    EmptyRing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub n: usize,
    pub stage: Stage,
    pub trials: usize,
    pub mean_ns: f64,
    pub stddev_ns: f64,
    pub median_of_means_ns: f64,
    pub counters: OpCounters,
}

/// Registered clients sharing one set of system parameters. Rings of any
/// size up to `keys.len()` are prefixes of `keys`.
pub struct Fixture<S: PairingSuite> {
    pub params: SystemParams<S>,
    pub nm: NmSecret<S>,
    pub partials: Vec<PartialKey<S>>,
    pub keys: Vec<ClientKeyMaterial<S>>,
}

impl<S: PairingSuite> Fixture<S> {
    pub fn new<R: RngCore + CryptoRng + ?Sized>(size: usize, rng: &mut R) -> Self {
        let (params, nm) = setup::<S, _>(rng);
        let mut partials = Vec::with_capacity(size);
        let mut keys = Vec::with_capacity(size);
        // the toy group has a 1/q chance per identity of hitting -s; skip those
        let ids = (0..).map(|i| Identity::from(format!("client-{i:04}")));
        for d in ids.filter_map(|id| extract_partial_key(&nm, &params, &id, &mut NoRecord).ok()).take(size) {
            keys.push(client_keygen(&params, &d, rng, &mut NoRecord).expect("fresh partial key is valid"));
            partials.push(d);
        }
        Self { params, nm, partials, keys }
    }

    /// The first `n` clients as a ring.
    pub fn ring(&self, n: usize) -> Ring<S> {
        Ring::new(self.keys[..n].iter().map(|k| (k.id.clone(), k.index))).expect("fixture ring")
    }

    /// Signs as the last of the first `n` clients.
    pub fn sign<R: RngCore + CryptoRng + ?Sized>(
        &self,
        ring: &Ring<S>,
        n: usize,
        rng: &mut R,
        rec: &mut impl Recorder,
    ) -> RingSignature<S> {
        let key = &self.keys[n - 1];
        let pos = ring.position(&key.id).expect("signer in ring");
        sign(&self.params, ring, pos, key, BENCH_DATA, BENCH_TIME, rng, rec).expect("sign")
    }

    /// Runs one stage once against a ring of `n`, recording into `rec`.
    fn run_stage<R: RngCore + CryptoRng + ?Sized>(
        &self,
        stage: Stage,
        ring: &Ring<S>,
        sig: &RingSignature<S>,
        n: usize,
        rng: &mut R,
        rec: &mut impl Recorder,
    ) {
        match stage {
            Stage::Keygen => {
                client_keygen(&self.params, &self.partials[n - 1], rng, rec).expect("keygen");
            }
            Stage::Sign => {
                self.sign(ring, n, rng, rec);
            }
            Stage::Verify => {
                verify(&self.params, ring, BENCH_DATA, sig, rec).expect("bench signature verifies");
            }
        }
    }
}

/// Exact counts for one execution of `stage` with a ring of `n`.
pub fn count_ops<S: PairingSuite>(stage: Stage, n: usize) -> Result<OpCounters, BenchError> {
    if n == 0 {
        return Err(BenchError::EmptyRing);
    }
    let fixture = Fixture::<S>::new(n, &mut OsRng);
    Ok(count_ops_with(&fixture, stage, n, &mut OsRng))
}

/// As [`count_ops`], reusing a fixture with at least `n` clients.
pub fn count_ops_with<S, R>(fixture: &Fixture<S>, stage: Stage, n: usize, rng: &mut R) -> OpCounters
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    let ring = fixture.ring(n);
    let sig = fixture.sign(&ring, n, rng, &mut NoRecord);
    let mut counters = OpCounters::default();
    fixture.run_stage(stage, &ring, &sig, n, rng, &mut counters);
    counters
}

/// Mean, sample standard deviation and median of five group means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub stddev: f64,
    pub median_of_means: f64,
}

pub fn summarize(samples: &[f64]) -> Summary {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let groups = samples.len().clamp(1, 5);
    let size = samples.len() / groups;
    let mut means: Vec<f64> = samples
        .chunks(size.max(1))
        .take(groups)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let median_of_means = if means.len() % 2 == 1 {
        means[means.len() / 2]
    } else {
        (means[means.len() / 2 - 1] + means[means.len() / 2]) / 2.0
    };
    Summary { mean, stddev: var.sqrt(), median_of_means }
}

/// Times `f` `trials` times after `trials / 10` (at least one) discarded
/// warm-up runs. Returns nanoseconds per run.
pub fn time_runs(trials: usize, mut f: impl FnMut()) -> Vec<f64> {
    for _ in 0..(trials / 10).max(1) {
        f();
    }
    (0..trials)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_nanos() as f64
        })
        .collect()
}

/// Times one stage at ring size `n` using `fixture`.
pub fn bench_stage<S, R>(
    fixture: &Fixture<S>,
    stage: Stage,
    n: usize,
    trials: usize,
    rng: &mut R,
) -> Result<BenchResult, BenchError>
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    if trials < MIN_TRIALS {
        return Err(BenchError::TooFewTrials(trials));
    }
    if n == 0 {
        return Err(BenchError::EmptyRing);
    }
    let counters = count_ops_with(fixture, stage, n, rng);
    let s = summarize(&sample_stage(fixture, stage, n, trials, rng));
    Ok(BenchResult {
        n,
        stage,
        trials,
        mean_ns: s.mean,
        stddev_ns: s.stddev,
        median_of_means_ns: s.median_of_means,
        counters,
    })
}

/// Raw per-run wall times for one stage at ring size `n`, without the trial
/// floor. Useful for interleaving short blocks across ring sizes.
pub fn sample_stage<S, R>(fixture: &Fixture<S>, stage: Stage, n: usize, trials: usize, rng: &mut R) -> Vec<f64>
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    let ring = fixture.ring(n);
    let sig = fixture.sign(&ring, n, rng, &mut NoRecord);
    time_runs(trials, || fixture.run_stage(stage, &ring, &sig, n, rng, &mut NoRecord))
}

/// Every stage at every ring size, in that order.
pub fn run_bench<S, R>(n_values: &[usize], trials: usize, rng: &mut R) -> Result<Vec<BenchResult>, BenchError>
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    if trials < MIN_TRIALS {
        return Err(BenchError::TooFewTrials(trials));
    }
    let max_n = n_values.iter().copied().max().unwrap_or(0);
    if n_values.contains(&0) {
        return Err(BenchError::EmptyRing);
    }
    let fixture = Fixture::<S>::new(max_n, rng);
    let mut results = Vec::with_capacity(n_values.len() * Stage::ALL.len());
    for &n in n_values {
        for stage in Stage::ALL {
            let r = bench_stage(&fixture, stage, n, trials, rng)?;
            log::info!("n={n} {stage}: mean {:.0} ns, sd {:.0} ns", r.mean_ns, r.stddev_ns);
            results.push(r);
        }
    }
    Ok(results)
}

#[derive(Serialize)]
struct CsvRow {
    n: usize,
    stage: Stage,
    trials: usize,
    mean_ns: u64,
    stddev_ns: u64,
    bp: u64,
    sm: u64,
    exp: u64,
    hash: u64,
}

/// Columns: `n,stage,trials,mean_ns,stddev_ns,bp,sm,exp,hash`.
pub fn write_csv(results: &[BenchResult], out: impl io::Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(CsvRow {
            n: r.n,
            stage: r.stage,
            trials: r.trials,
            mean_ns: r.mean_ns.round() as u64,
            stddev_ns: r.stddev_ns.round() as u64,
            bp: r.counters.bp,
            sm: r.counters.sm,
            exp: r.counters.exp,
            hash: r.counters.hash,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Ordinary least squares `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "a fit needs two points");
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - (slope * x + intercept)).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    LinearFit { slope, intercept, r_squared }
}

/// Standard deviation over mean.
pub fn coefficient_of_variation(xs: &[f64]) -> f64 {
    let s = summarize(xs);
    s.stddev / s.mean
}

/// Mean cost of one counted scalar multiplication, in nanoseconds.
pub fn measure_scalar_mul<S, R>(trials: usize, rng: &mut R) -> f64
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    let base = S::g1_mul(&S::Scalar::random(rng), &S::generator());
    let scalars: Vec<S::Scalar> = (0..trials + trials / 10 + 1).map(|_| S::Scalar::random(rng)).collect();
    let mut i = 0;
    let mut sink = S::g1_identity();
    let samples = time_runs(trials, || {
        sink = S::g1_mul(&scalars[i], &base);
        i += 1;
    });
    std::hint::black_box(sink);
    summarize(&samples).mean
}

/// Ratio of counted to uncounted signing time at ring size `n`, from
/// interleaved runs. Values near 1.0 mean counting is free.
pub fn instrumentation_overhead<S, R>(fixture: &Fixture<S>, n: usize, trials: usize, rng: &mut R) -> f64
where
    S: PairingSuite,
    R: RngCore + CryptoRng + ?Sized,
{
    let ring = fixture.ring(n);
    let mut plain = Vec::with_capacity(trials);
    let mut counted = Vec::with_capacity(trials);
    for _ in 0..(trials / 10).max(1) {
        fixture.sign(&ring, n, rng, &mut NoRecord);
    }
    for _ in 0..trials {
        let start = Instant::now();
        fixture.sign(&ring, n, rng, &mut NoRecord);
        plain.push(start.elapsed().as_nanos() as f64);
        let mut c = OpCounters::default();
        let start = Instant::now();
        fixture.sign(&ring, n, rng, &mut c);
        counted.push(start.elapsed().as_nanos() as f64);
    }
    summarize(&counted).median_of_means / summarize(&plain).median_of_means
}
