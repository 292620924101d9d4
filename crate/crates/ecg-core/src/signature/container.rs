//! Binary container for collections of encoded beats.
//!
//! The on-disk layout is fixed and explicit so files can be compared byte
//! for byte between runs.  All multi-byte integers are little-endian.
//!
//! Header:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ECGS"
//! 4       2     format version (currently 1)
//! 6       1     grid rows
//! 7       1     grid columns
//! 8       4     beat count
//! ```
//!
//! followed by one variable-length entry per beat:
//!
//! ```text
//! record id  u16  numeric record name (e.g. 100)
//! sample     u32  beat position, in native samples
//! label      u8   raw annotation code
//! nonzeros   u16  number of stored cells
//! cells      nonzeros x (row u8, col u8, value f32)
//! ```

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{SignatureEntry, SparseSignature};

/// First four bytes of every signature container.
pub const SIGNATURE_MAGIC: &[u8; 4] = b"ECGS";

/// Current container format version.
pub const SIGNATURE_VERSION: u16 = 1;

/// Failures while reading or writing a signature container.
#[derive(Debug, Error)]
pub enum ContainerError {
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// The file does not start with the container magic.
    #[error("not a signature container (bad magic)")]
    BadMagic,

    /// The file uses a format version this build does not understand.
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u16),

    /// The file ended in the middle of the named field.
    #[error("container truncated while reading {0}")]
    Truncated(&'static str),

    /// A stored cell lies outside the grid declared in the header.
    #[error("cell ({row}, {col}) outside the {rows} x {cols} grid")]
    CellOutOfRange { row: u8, col: u8, rows: u8, cols: u8 },

    /// A beat has more cells than the 16-bit count field can describe.
    #[error("beat {index} has {count} cells, too many for the format")]
    TooManyCells { index: usize, count: usize },

    /// The collection has more beats than the 32-bit count field allows.
    #[error("collection of {0} beats is too large for the format")]
    TooManyBeats(usize),
}

/// One encoded beat: where it came from plus its sparse signature.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedBeat {
    /// Numeric record name the beat was taken from.
    pub record_id: u16,
    /// Beat position in the record, in native samples.
    pub sample: u32,
    /// Raw annotation code (ground truth) or detector-assigned label.
    pub label: u8,
    /// The beat's sparse time–frequency signature.
    pub signature: SparseSignature,
}

/// A collection of encoded beats sharing one grid geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureDataset {
    /// Grid height shared by every signature.
    pub grid_rows: u8,
    /// Grid width shared by every signature.
    pub grid_cols: u8,
    /// The encoded beats, in file order.
    pub beats: Vec<EncodedBeat>,
}

impl SignatureDataset {
    /// Creates an empty collection with the given grid geometry.
    pub fn new(grid_rows: u8, grid_cols: u8) -> Self {
        SignatureDataset {
            grid_rows,
            grid_cols,
            beats: Vec::new(),
        }
    }

    /// Flat input width for the classifier (`grid_rows * grid_cols`).
    pub fn input_len(&self) -> usize {
        self.grid_rows as usize * self.grid_cols as usize
    }
}

/// Writes a collection to `path` in the container format.
pub fn write_dataset(path: &Path, dataset: &SignatureDataset) -> Result<(), ContainerError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_dataset_to(&mut out, dataset)?;
    out.flush()?;
    Ok(())
}

/// Writes a collection to an arbitrary sink in the container format.
pub fn write_dataset_to<W: Write>(
    out: &mut W,
    dataset: &SignatureDataset,
) -> Result<(), ContainerError> {
    let count =
        u32::try_from(dataset.beats.len()).map_err(|_| ContainerError::TooManyBeats(dataset.beats.len()))?;
    out.write_all(SIGNATURE_MAGIC)?;
    out.write_all(&SIGNATURE_VERSION.to_le_bytes())?;
    out.write_all(&[dataset.grid_rows, dataset.grid_cols])?;
    out.write_all(&count.to_le_bytes())?;
    for (index, beat) in dataset.beats.iter().enumerate() {
        let nonzeros = u16::try_from(beat.signature.entries.len()).map_err(|_| {
            ContainerError::TooManyCells {
                index,
                count: beat.signature.entries.len(),
            }
        })?;
        out.write_all(&beat.record_id.to_le_bytes())?;
        out.write_all(&beat.sample.to_le_bytes())?;
        out.write_all(&[beat.label])?;
        out.write_all(&nonzeros.to_le_bytes())?;
        for entry in &beat.signature.entries {
            out.write_all(&[entry.row, entry.col])?;
            out.write_all(&entry.value.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a collection from `path`, validating structure and cell positions.
pub fn read_dataset(path: &Path) -> Result<SignatureDataset, ContainerError> {
    read_dataset_from(&mut BufReader::new(File::open(path)?))
}

/// Reads a collection from an arbitrary source.
pub fn read_dataset_from<R: Read>(input: &mut R) -> Result<SignatureDataset, ContainerError> {
    let magic: [u8; 4] = read_array(input, "magic")?;
    if &magic != SIGNATURE_MAGIC {
        return Err(ContainerError::BadMagic);
    }
    let version = u16::from_le_bytes(read_array(input, "version")?);
    if version != SIGNATURE_VERSION {
        return Err(ContainerError::UnsupportedVersion(version));
    }
    let [grid_rows, grid_cols] = read_array(input, "grid dimensions")?;
    let count = u32::from_le_bytes(read_array(input, "beat count")?);

    let mut beats = Vec::with_capacity(count.min(1 << 20) as usize);
    for _ in 0..count {
        let record_id = u16::from_le_bytes(read_array(input, "record id")?);
        let sample = u32::from_le_bytes(read_array(input, "beat sample")?);
        let [label] = read_array(input, "beat label")?;
        let nonzeros = u16::from_le_bytes(read_array(input, "cell count")?);
        let mut entries = Vec::with_capacity(nonzeros as usize);
        for _ in 0..nonzeros {
            let [row, col] = read_array(input, "cell position")?;
            if row >= grid_rows || col >= grid_cols {
                return Err(ContainerError::CellOutOfRange {
                    row,
                    col,
                    rows: grid_rows,
                    cols: grid_cols,
                });
            }
            let value = f32::from_le_bytes(read_array(input, "cell value")?);
            entries.push(SignatureEntry { row, col, value });
        }
        beats.push(EncodedBeat {
            record_id,
            sample,
            label,
            signature: SparseSignature { entries },
        });
    }
    Ok(SignatureDataset {
        grid_rows,
        grid_cols,
        beats,
    })
}

/// Reads exactly `N` bytes, reporting which field was cut short on EOF.
fn read_array<R: Read, const N: usize>(
    input: &mut R,
    what: &'static str,
) -> Result<[u8; N], ContainerError> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            ContainerError::Truncated(what)
        } else {
            ContainerError::Io(e)
        }
    })?;
    Ok(buf)
}
