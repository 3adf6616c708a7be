//! Flat binary databases: `M`, `beta`, `|X|` as little-endian `u32`, then the
//! `M * beta` symbol bytes, file 1 first.

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;
use wpir_core::{Database, DatabaseError};

/// ChaCha stream used for database generation. Trial streams count up from
/// zero, so this one never collides with them.
pub const DATABASE_STREAM: u64 = u64::MAX;

const HEADER_LEN: usize = 12;

#[derive(Debug, Error)]
pub enum DatabaseIoError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("database file is {0} bytes, shorter than its 12-byte header")]
    Truncated(usize),
    #[error("invalid database: {0}")]
    Invalid(#[from] DatabaseError),
}

pub fn encode_database(db: &Database) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + db.symbols().len());
    for v in [db.num_files() as u32, db.file_size() as u32, db.alphabet_size()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(db.symbols());
    out
}

pub fn decode_database(bytes: &[u8]) -> Result<Database, DatabaseIoError> {
    if bytes.len() < HEADER_LEN {
        return Err(DatabaseIoError::Truncated(bytes.len()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().expect("4 bytes"));
    let (m, beta, x) = (word(0) as usize, word(1) as usize, word(2));
    Ok(Database::new(m, beta, x, bytes[HEADER_LEN..].to_vec())?)
}

pub fn read_database(path: &Path) -> Result<Database, DatabaseIoError> {
    let bytes = fs::read(path).map_err(|source| DatabaseIoError::Io { path: path.display().to_string(), source })?;
    decode_database(&bytes)
}

pub fn write_database(path: &Path, db: &Database) -> Result<(), DatabaseIoError> {
    fs::write(path, encode_database(db)).map_err(|source| DatabaseIoError::Io { path: path.display().to_string(), source })
}

/// Uniform symbols from ChaCha8 seeded with `seed` on [`DATABASE_STREAM`].
pub fn generate_database(num_files: usize, file_size: usize, alphabet_size: u32, seed: u64) -> Result<Database, DatabaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DATABASE_STREAM);
    let bound = alphabet_size.max(1);
    Database::generate(num_files, file_size, alphabet_size, || rng.random_range(0..bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let db = generate_database(3, 4, 5, 11).unwrap();
        let bytes = encode_database(&db);
        assert_eq!(&bytes[..12], &[3, 0, 0, 0, 4, 0, 0, 0, 5, 0, 0, 0]);
        assert_eq!(decode_database(&bytes).unwrap(), db);
        assert_eq!(generate_database(3, 4, 5, 11).unwrap(), db);
        assert_ne!(generate_database(3, 4, 5, 12).unwrap(), db);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(decode_database(&[1, 0, 0]), Err(DatabaseIoError::Truncated(3))));
        let mut bytes = encode_database(&generate_database(2, 2, 2, 0).unwrap());
        bytes.pop();
        assert!(matches!(decode_database(&bytes), Err(DatabaseIoError::Invalid(DatabaseError::Length { .. }))));
    }
}
