use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use serde_json::Value;

fn epda(dir: &Path, args: &[&str]) -> (i32, Value) {
    let Output { status, stdout, .. } =
        Command::new(env!("CARGO_BIN_EXE_epda")).current_dir(dir).args(args).output().expect("spawn epda");
    let text = String::from_utf8(stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1, "expected one JSON line, got {text:?}");
    (status.code().unwrap(), serde_json::from_str(lines[0]).unwrap())
}

fn enroll(dir: &Path, profile: &str, ids: &[&str]) {
    assert_eq!(epda(dir, &["setup", "--profile", profile, "--out", "keys"]).0, 0);
    for id in ids {
        let (code, out) = epda(dir, &["register", "--profile", profile, "--keys", "keys", "--id", id, "--roster", "roster.bin"]);
        assert_eq!(code, 0, "{out}");
    }
}

#[test]
fn setup_sign_verify_round_trip_and_flipped_byte() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    enroll(d, "default", &["alice", "bob", "carol", "dave"]);
    fs::write(d.join("data.bin"), b"pm2.5=12;lat=51.5;lon=-0.12").unwrap();

    let (code, out) = epda(d, &[
        "sign", "--keys", "keys", "--id", "carol", "--roster", "roster.bin", "--ring", "alice,carol,dave",
        "--data", "data.bin", "--sig", "sig.bin",
    ]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out["n"], 3);

    let verify = ["verify", "--keys", "keys", "--roster", "roster.bin", "--ring", "dave,alice,carol", "--data", "data.bin", "--sig", "sig.bin", "--window", "60"];
    let (code, out) = epda(d, &verify);
    assert_eq!((code, out["result"].as_str()), (0, Some("accept")));

    let mut data = fs::read(d.join("data.bin")).unwrap();
    data[3] ^= 0x01;
    fs::write(d.join("data.bin"), &data).unwrap();
    let (code, out) = epda(d, &verify);
    assert_eq!((code, out["result"].as_str()), (1, Some("reject")));
}

#[test]
fn wrong_ring_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    enroll(d, "toy", &["a", "b", "c"]);
    fs::write(d.join("m"), b"m").unwrap();
    let sign = ["sign", "--profile", "toy", "--keys", "keys", "--id", "a", "--roster", "roster.bin", "--ring", "a,b", "--data", "m", "--sig", "s"];
    assert_eq!(epda(d, &sign).0, 0);
    let verify = |ring: &str| {
        epda(d, &["verify", "--profile", "toy", "--keys", "keys", "--roster", "roster.bin", "--ring", ring, "--data", "m", "--sig", "s"]).0
    };
    assert_eq!(verify("a,b"), 0);
    assert_eq!(verify("a,c"), 1);
    assert_eq!(verify("a,b,c"), 1);
}

#[test]
fn exit_codes_classify_failures() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    enroll(d, "default", &["alice"]);
    fs::write(d.join("m"), b"m").unwrap();

    // missing file
    let (code, out) = epda(d, &["verify", "--keys", "keys", "--roster", "nowhere.bin", "--data", "m", "--sig", "s"]);
    assert_eq!((code, out["result"].as_str()), (3, Some("io")));

    // profile mismatch on otherwise valid material
    let (code, out) = epda(d, &["register", "--profile", "toy", "--keys", "keys", "--id", "x", "--roster", "roster.bin"]);
    assert_eq!((code, out["result"].as_str()), (4, Some("crypto")));

    // garbage signature file
    fs::write(d.join("s"), b"not a signature").unwrap();
    let (code, _) = epda(d, &["verify", "--keys", "keys", "--roster", "roster.bin", "--data", "m", "--sig", "s"]);
    assert_eq!(code, 4);

    // usage: missing flags, unknown subcommand, too few trials
    assert_eq!(epda(d, &["verify", "--keys", "keys"]).0, 2);
    assert_eq!(epda(d, &["frobnicate"]).0, 2);
    assert_eq!(epda(d, &["bench", "--n", "2", "--trials", "5", "--out", "b.csv"]).0, 2);

    // duplicate registration
    fs::remove_file(d.join("keys/alice.key")).unwrap();
    assert_eq!(epda(d, &["register", "--keys", "keys", "--id", "alice", "--roster", "roster.bin"]).0, 1);
}

#[cfg(unix)]
#[test]
fn secrets_are_written_owner_only() {
    use std::os::unix::fs::PermissionsExt;
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    enroll(d, "toy", &["alice"]);
    let mode = |p: &str| fs::metadata(d.join(p)).unwrap().permissions().mode() & 0o777;
    assert_eq!(mode("keys/nm.secret"), 0o600);
    assert_eq!(mode("keys/alice.key"), 0o600);
}

#[test]
fn bench_writes_nine_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, out) = epda(d, &["bench", "--n", "10,20,50", "--trials", "100", "--out", "bench.csv"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out["rows"], 9);
    let csv = fs::read_to_string(d.join("bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,stage,trials,mean_ns,stddev_ns,bp,sm,exp,hash");
    assert_eq!(lines.len() - 1, 9);
    assert!(lines.iter().any(|l| l.starts_with("50,verify,100,") && l.ends_with(",50,0,1,1")));
    assert!(lines.iter().any(|l| l.starts_with("10,sign,100,") && l.ends_with(",1,19,1,1")));
}

struct Daemon(Child);

impl Drop for Daemon {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn spawn(dir: &Path, args: &[&str]) -> (Daemon, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_epda"))
        .current_dir(dir)
        .args(args)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let v: Value = serde_json::from_str(&line).unwrap();
    assert_eq!(v["result"], "listening");
    (Daemon(child), v["endpoint"].as_str().unwrap().to_owned())
}

#[test]
fn daemons_register_and_accept_uploads_over_tcp() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(epda(d, &["setup", "--out", "nm"]).0, 0);
    fs::create_dir(d.join("client")).unwrap();
    fs::copy(d.join("nm/params.bin"), d.join("client/params.bin")).unwrap();

    let (_sp, sp) = spawn(d, &["serve-sp", "--keys", "nm", "--endpoint", "127.0.0.1:0", "--roster", "sp.roster"]);
    let (_nm, nm) = spawn(d, &["serve-nm", "--keys", "nm", "--endpoint", "127.0.0.1:0", "--push", &sp]);

    for id in ["u1", "u2", "u3", "u4", "u5"] {
        let (code, out) = epda(d, &["register", "--keys", "client", "--id", id, "--endpoint", &nm]);
        assert_eq!(code, 0, "{out}");
    }
    fs::write(d.join("reading"), b"noise=41dB").unwrap();
    let (code, out) = epda(d, &["sign", "--keys", "client", "--id", "u2", "--endpoint", &sp, "--n", "4", "--data", "reading", "--sig", "sig"]);
    assert_eq!((code, out["result"].as_str()), (0, Some("accept")), "{out}");

    // the provider's persisted roster verifies the same signature offline
    let ring = out["ring"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect::<Vec<_>>().join(",");
    let (code, _) = epda(d, &["verify", "--keys", "client", "--roster", "sp.roster", "--ring", &ring, "--data", "reading", "--sig", "sig"]);
    assert_eq!(code, 0);

    // unreachable provider is an I/O failure, not a reject
    drop(_sp);
    let (code, _) = epda(d, &["sign", "--keys", "client", "--id", "u2", "--endpoint", &sp, "--n", "2", "--data", "reading", "--sig", "sig2"]);
    assert_eq!(code, 3);
}
