use alloc::vec::Vec;
use core::fmt;

/// `M` files of `beta` symbols each, symbols drawn from `0..alphabet_size`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Database {
    num_files: usize,
    file_size: usize,
    alphabet_size: u32,
    symbols: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatabaseError {
    NoFiles,
    TooManyFiles(usize),
    EmptyFiles,
    /// Symbols are stored as bytes, so `2 <= |X| <= 256`.
    AlphabetSize(u32),
    Length { expected: usize, found: usize },
    Symbol { file: usize, position: usize, symbol: u8 },
}

impl fmt::Display for DatabaseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoFiles => write!(f, "database must hold at least one file"),
            Self::TooManyFiles(m) => write!(f, "{m} files exceeds the limit of {}", crate::MAX_FILES),
            Self::EmptyFiles => write!(f, "file size must be positive"),
            Self::AlphabetSize(x) => write!(f, "alphabet size {x} outside [2, 256]"),
            Self::Length { expected, found } => {
                write!(f, "expected {expected} symbols, found {found}")
            }
            Self::Symbol { file, position, symbol } => write!(
                f,
                "symbol {symbol} at file {}, position {position} is outside the alphabet",
                file + 1
            ),
        }
    }
}

impl core::error::Error for DatabaseError {}

impl Database {
    /// `symbols` holds the files back to back, file 0 first.
    pub fn new(
        num_files: usize,
        file_size: usize,
        alphabet_size: u32,
        symbols: Vec<u8>,
    ) -> Result<Self, DatabaseError> {
        if num_files == 0 {
            return Err(DatabaseError::NoFiles);
        }
        if num_files > crate::MAX_FILES {
            return Err(DatabaseError::TooManyFiles(num_files));
        }
        if file_size == 0 {
            return Err(DatabaseError::EmptyFiles);
        }
        if !(2..=256).contains(&alphabet_size) {
            return Err(DatabaseError::AlphabetSize(alphabet_size));
        }
        let expected = num_files * file_size;
        if symbols.len() != expected {
            return Err(DatabaseError::Length { expected, found: symbols.len() });
        }
        if let Some(i) = symbols.iter().position(|&s| u32::from(s) >= alphabet_size) {
            return Err(DatabaseError::Symbol {
                file: i / file_size,
                position: i % file_size,
                symbol: symbols[i],
            });
        }
        Ok(Self { num_files, file_size, alphabet_size, symbols })
    }

    /// Builds a database from a symbol generator called `M * beta` times.
    pub fn generate(
        num_files: usize,
        file_size: usize,
        alphabet_size: u32,
        mut next_symbol: impl FnMut() -> u32,
    ) -> Result<Self, DatabaseError> {
        let symbols = (0..num_files * file_size)
            .map(|_| (next_symbol() % alphabet_size.max(1)) as u8)
            .collect();
        Self::new(num_files, file_size, alphabet_size, symbols)
    }

    pub fn num_files(&self) -> usize {
        self.num_files
    }

    pub fn file_size(&self) -> usize {
        self.file_size
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn file(&self, m: usize) -> &[u8] {
        &self.symbols[m * self.file_size..(m + 1) * self.file_size]
    }
}
