use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::TcpListener;
use std::path::Path;
use std::sync::Arc;

use epda_core::bench::{run_bench, write_csv, BenchError};
use epda_core::clrs::{self, client_keygen, extract_partial_key, setup, sign, verify, Identity, Ring, RingSignature};
use epda_core::counters::NoRecord;
use epda_core::pairing_suite::PairingSuite;
use epda_core::protocol::{
    fetch_roster, register, select_ring, serve_tcp, unix_now, ClientError, Decision, FreshnessPolicy, Message,
    NetworkManager, RosterPush, RosterSnapshot, RosterStore, SensingReport, ServiceProvider, TcpTransport,
    Transport,
};
use rand_core::OsRng;
use serde_json::{json, Value};

use crate::files::{self, io_failure, NM_SECRET_FILE, PARAMS_FILE};
use crate::{Command, Failure, Outcome};

pub fn run<S: PairingSuite>(command: Command) -> Outcome {
    match command {
        Command::Setup { out, .. } => cmd_setup::<S>(&out),
        Command::Register { keys, id, endpoint, roster, .. } => {
            cmd_register::<S>(&keys, &id, endpoint.as_deref(), roster.as_deref())
        }
        Command::Sign { keys, id, roster, ring, n, data, sig, endpoint, .. } => {
            cmd_sign::<S>(&keys, &id, roster.as_deref(), ring, n, &data, &sig, endpoint.as_deref())
        }
        Command::Verify { keys, roster, ring, data, sig, window, .. } => {
            cmd_verify::<S>(&keys, &roster, ring, &data, &sig, window)
        }
        Command::ServeNm { keys, endpoint, push, .. } => cmd_serve_nm::<S>(&keys, &endpoint, &push),
        Command::ServeSp { keys, endpoint, roster, window, .. } => {
            cmd_serve_sp::<S>(&keys, &endpoint, &roster, window)
        }
        Command::Bench { n, trials, out, .. } => cmd_bench::<S>(&n, trials, &out),
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        match e {
            ClientError::Transport(e) => Failure::Io(e.to_string()),
            ClientError::Rejected(r) => Failure::Reject(r.to_string()),
            ClientError::Scheme(e) => Failure::Crypto(e.to_string()),
            ClientError::RosterTooSmall { .. } | ClientError::NotOnRoster => Failure::Usage(e.to_string()),
            ClientError::UnexpectedReply(_) => Failure::Io(e.to_string()),
        }
    }
}

fn cmd_setup<S: PairingSuite>(out: &Path) -> Outcome {
    files::ensure_dir(out)?;
    let secret_path = out.join(NM_SECRET_FILE);
    if secret_path.exists() {
        return Err(Failure::Usage(format!("{} already exists; refusing to overwrite", secret_path.display())));
    }
    let (params, secret) = setup::<S, _>(&mut OsRng);
    let params_path = out.join(PARAMS_FILE);
    files::write_secret(&secret_path, &secret.to_bytes())?;
    files::write_public(&params_path, &params.to_bytes())?;
    Ok(json!({
        "result": "ok",
        "profile": S::profile().name,
        "params": params_path,
        "secret": secret_path,
    }))
}

fn cmd_register<S: PairingSuite>(
    keys: &Path,
    id: &str,
    endpoint: Option<&str>,
    roster_path: Option<&Path>,
) -> Outcome {
    if id.is_empty() {
        return Err(Failure::Usage("identity must not be empty".into()));
    }
    let params = files::load_params::<S>(keys)?;
    let key_path = files::key_path(keys, id);
    if key_path.exists() {
        return Err(Failure::Usage(format!("{} already exists", key_path.display())));
    }
    let identity = Identity::from(id);
    let key = match endpoint {
        Some(addr) => {
            if roster_path.is_some() {
                return Err(Failure::Usage("--roster is only used without --endpoint".into()));
            }
            register::<S, _>(&TcpTransport::new(addr), &params, &identity, &mut OsRng)?
        }
        None => {
            let secret = files::load_nm_secret::<S>(keys)?;
            let mut store = match roster_path {
                Some(path) => {
                    let (store, roster) = RosterStore::open::<S>(path)?;
                    if roster.get(&identity).is_some() {
                        return Err(Failure::Reject(format!("identity {id} already registered")));
                    }
                    Some((store, roster))
                }
                None => None,
            };
            let partial = extract_partial_key(&secret, &params, &identity, &mut NoRecord)
                .map_err(|e| Failure::Reject(e.to_string()))?;
            let key = client_keygen(&params, &partial, &mut OsRng, &mut NoRecord)?;
            if let Some((store, roster)) = store.as_mut() {
                let push = RosterPush { id: identity.clone(), index: key.index };
                let version = roster
                    .apply(&push)
                    .map_err(|r| Failure::Reject(r.to_string()))?
                    .expect("identity was absent");
                store.record(version, &push, roster)?;
                store.write_snapshot(roster)?;
            }
            key
        }
    };
    let public_path = files::public_key_path(keys, id);
    files::write_secret(&key_path, &key.to_secret_bytes())?;
    files::write_public(&public_path, &key.public().to_bytes())?;
    Ok(json!({ "result": "ok", "id": id, "key": key_path, "public": public_path }))
}

/// Resolves `ids` against the roster, or takes the whole roster.
fn ring_from_roster<S: PairingSuite>(roster: &RosterSnapshot<S>, ids: Option<Vec<String>>) -> Result<Ring<S>, Failure> {
    let members: Vec<(Identity, S::G1)> = match ids {
        Some(ids) => ids
            .into_iter()
            .map(|id| {
                let identity = Identity::from(id.as_str());
                roster
                    .get(&identity)
                    .map(|ind| (identity, *ind))
                    .ok_or_else(|| Failure::Usage(format!("ring member {id} is not on the roster")))
            })
            .collect::<Result<_, _>>()?,
        None => roster.entries.clone(),
    };
    Ring::new(members).map_err(|e| Failure::Usage(e.to_string()))
}

fn ring_ids<S: PairingSuite>(ring: &Ring<S>) -> Vec<String> {
    ring.identities().map(ToString::to_string).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_sign<S: PairingSuite>(
    keys: &Path,
    id: &str,
    roster_path: Option<&Path>,
    ring_ids_arg: Option<Vec<String>>,
    n: Option<usize>,
    data_path: &Path,
    sig_path: &Path,
    endpoint: Option<&str>,
) -> Outcome {
    let params = files::load_params::<S>(keys)?;
    let key = files::load_client_key::<S>(keys, id, &params)?;
    let data = files::read(data_path)?;
    let sp = endpoint.map(TcpTransport::new);
    let roster = match (roster_path, &sp) {
        (Some(path), _) => files::load_roster::<S>(path)?.snapshot(),
        (None, Some(sp)) => fetch_roster::<S>(sp)?,
        (None, None) => return Err(Failure::Usage("sign needs --roster or --endpoint".into())),
    };
    let ring = match (ring_ids_arg, n) {
        (Some(_), Some(_)) => return Err(Failure::Usage("--ring and --n are mutually exclusive".into())),
        (None, Some(n)) => select_ring(&roster, &key, n, &mut OsRng)?,
        (ids, None) => ring_from_roster(&roster, ids)?,
    };
    let pos = ring
        .position(&key.id)
        .ok_or_else(|| Failure::Usage(format!("signer {id} is not in the ring")))?;
    let t = unix_now();
    let signature = sign(&params, &ring, pos, &key, &data, t, &mut OsRng, &mut NoRecord)?;
    files::write_public(sig_path, &signature.to_bytes())?;

    let mut out = json!({ "result": "ok", "sig": sig_path, "t": t, "n": ring.len(), "ring": ring_ids(&ring) });
    if let Some(sp) = sp {
        let report = SensingReport { ring, data, signature };
        let reply = sp.exchange(&Message::Upload(report).to_frame()).map_err(ClientError::from)?;
        match Message::<S>::from_frame(&reply).map_err(ClientError::from)? {
            Message::Decision(Decision::Accept) => out["result"] = json!("accept"),
            Message::Decision(Decision::Reject(r)) => return Err(Failure::Reject(r.to_string())),
            _ => return Err(ClientError::UnexpectedReply("expected a decision").into()),
        }
    }
    Ok(out)
}

fn cmd_verify<S: PairingSuite>(
    keys: &Path,
    roster_path: &Path,
    ring_ids_arg: Option<Vec<String>>,
    data_path: &Path,
    sig_path: &Path,
    window: Option<u64>,
) -> Outcome {
    let params = files::load_params::<S>(keys)?;
    let roster = files::load_roster::<S>(roster_path)?.snapshot();
    let ring = ring_from_roster(&roster, ring_ids_arg)?;
    let data = files::read(data_path)?;
    let sig = RingSignature::<S>::from_bytes(&files::read(sig_path)?)?;
    if let Some(window) = window {
        if window == 0 {
            return Err(Failure::Usage("--window must be positive".into()));
        }
        if !FreshnessPolicy::new(window).is_fresh(sig.t, unix_now()) {
            return Err(Failure::Reject(format!("timestamp {} is outside the {window}s window", sig.t)));
        }
    }
    match verify(&params, &ring, &data, &sig, &mut NoRecord) {
        Ok(()) => Ok(json!({ "result": "accept", "n": ring.len(), "t": sig.t })),
        Err(e @ (clrs::Error::BadSignature | clrs::Error::LengthMismatch { .. })) => Err(Failure::Reject(e.to_string())),
        Err(e) => Err(e.into()),
    }
}

fn listen(endpoint: &str) -> Result<TcpListener, Failure> {
    TcpListener::bind(endpoint).map_err(|e| Failure::Io(format!("bind {endpoint}: {e}")))
}

/// Announces the bound address before blocking, since a port of 0 is only
/// known after binding.
fn announce(command: &str, listener: &TcpListener, extra: Value) -> Result<(), Failure> {
    let addr = listener.local_addr().map_err(|e| Failure::Io(e.to_string()))?;
    let mut line = json!({ "command": command, "result": "listening", "endpoint": addr.to_string() });
    if let (Value::Object(line), Value::Object(extra)) = (&mut line, extra) {
        line.extend(extra);
    }
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{line}").and_then(|_| stdout.flush()).map_err(|e| Failure::Io(e.to_string()))
}

fn cmd_serve_nm<S: PairingSuite>(keys: &Path, endpoint: &str, push: &[String]) -> Outcome {
    let params = files::load_params::<S>(keys)?;
    let secret = files::load_nm_secret::<S>(keys)?;
    let nm = Arc::new(NetworkManager::new(params, secret));
    for sp in push {
        nm.subscribe(Arc::new(TcpTransport::new(sp.clone())));
    }
    let listener = listen(endpoint)?;
    announce("serve-nm", &listener, json!({ "push": push }))?;
    serve_tcp(listener, nm).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(json!({ "result": "stopped" }))
}

fn cmd_serve_sp<S: PairingSuite>(keys: &Path, endpoint: &str, roster: &Path, window: u64) -> Outcome {
    if window == 0 {
        return Err(Failure::Usage("--window must be positive".into()));
    }
    let params = files::load_params::<S>(keys)?;
    let sp = ServiceProvider::new(params, FreshnessPolicy::new(window)).with_store(roster)?;
    let version = sp.roster_version();
    let listener = listen(endpoint)?;
    announce("serve-sp", &listener, json!({ "roster_version": version, "window": window }))?;
    serve_tcp(listener, Arc::new(sp)).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(json!({ "result": "stopped" }))
}

fn cmd_bench<S: PairingSuite>(n_values: &[usize], trials: usize, out: &Path) -> Outcome {
    let results = run_bench::<S, _>(n_values, trials, &mut OsRng).map_err(|e| match e {
        BenchError::TooFewTrials(_) | BenchError::EmptyRing => Failure::Usage(e.to_string()),
    })?;
    let file = File::create(out).map_err(|e| io_failure(out, e))?;
    write_csv(&results, BufWriter::new(file)).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    Ok(json!({
        "result": "ok",
        "profile": S::profile().name,
        "out": out,
        "rows": results.len(),
        "results": results,
    }))
}
