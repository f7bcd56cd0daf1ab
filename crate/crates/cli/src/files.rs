use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use epda_core::clrs::{self, ClientKeyMaterial, NmSecret, SystemParams};
use epda_core::codec::CodecError;
use epda_core::pairing_suite::PairingSuite;
use epda_core::protocol::{RosterStore, SpRoster, StoreError};

use crate::Failure;

pub const PARAMS_FILE: &str = "params.bin";
pub const NM_SECRET_FILE: &str = "nm.secret";

impl From<clrs::Error> for Failure {
    fn from(e: clrs::Error) -> Self {
        Failure::Crypto(e.to_string())
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        Failure::Crypto(e.to_string())
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Io(e) => Failure::Io(format!("roster: {e}")),
            StoreError::Corrupt(e) => Failure::Crypto(format!("roster: {e}")),
        }
    }
}

pub fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

pub fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| io_failure(path, e))
}

pub fn write_public(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

/// Writes with owner-only permissions, tightening them if the file already
/// existed.
pub fn write_secret(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let mut opts = OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::{OpenOptionsExt, PermissionsExt};
        opts.mode(0o600);
        let mut f = opts.open(path).map_err(|e| io_failure(path, e))?;
        f.set_permissions(fs::Permissions::from_mode(0o600)).map_err(|e| io_failure(path, e))?;
        f.write_all(bytes).map_err(|e| io_failure(path, e))
    }
    #[cfg(not(unix))]
    {
        let mut f = opts.open(path).map_err(|e| io_failure(path, e))?;
        f.write_all(bytes).map_err(|e| io_failure(path, e))
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

/// File stem for an identity: itself when it is plain ASCII, hex otherwise.
fn stem(id: &str) -> String {
    let plain = !id.is_empty()
        && !id.starts_with('.')
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b"._-@".contains(&b));
    if plain {
        id.to_owned()
    } else {
        id.bytes().map(|b| format!("{b:02x}")).collect::<String>() + ".hex"
    }
}

pub fn key_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{}.key", stem(id)))
}

pub fn public_key_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{}.pub", stem(id)))
}

pub fn load_params<S: PairingSuite>(dir: &Path) -> Result<SystemParams<S>, Failure> {
    Ok(SystemParams::from_bytes(&read(&dir.join(PARAMS_FILE))?)?)
}

pub fn load_nm_secret<S: PairingSuite>(dir: &Path) -> Result<NmSecret<S>, Failure> {
    Ok(NmSecret::from_bytes(&read(&dir.join(NM_SECRET_FILE))?)?)
}

pub fn load_client_key<S: PairingSuite>(
    dir: &Path,
    id: &str,
    params: &SystemParams<S>,
) -> Result<ClientKeyMaterial<S>, Failure> {
    Ok(ClientKeyMaterial::from_secret_bytes(&read(&key_path(dir, id))?, params)?)
}

/// A roster file must exist for reading; a store opened for writing is
/// created on demand.
pub fn load_roster<S: PairingSuite>(path: &Path) -> Result<SpRoster<S>, Failure> {
    if !path.exists() {
        return Err(io_failure(path, io::ErrorKind::NotFound.into()));
    }
    Ok(RosterStore::load::<S>(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_identities_get_hex_file_names() {
        assert_eq!(stem("alice"), "alice");
        assert_eq!(stem("dev-01.x@site"), "dev-01.x@site");
        assert_eq!(stem("../etc"), "2e2e2f657463.hex");
        assert_eq!(stem(""), ".hex");
    }

    #[cfg(unix)]
    #[test]
    fn secrets_are_owner_only() {
        use std::os::unix::fs::PermissionsExt;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s");
        fs::write(&path, b"old").unwrap();
        write_secret(&path, b"new").unwrap();
        assert_eq!(fs::metadata(&path).unwrap().permissions().mode() & 0o777, 0o600);
        assert_eq!(fs::read(&path).unwrap(), b"new");
    }
}
