//! Binary persistence for trained classifiers.
//!
//! The on-disk layout is fixed and explicit so model files can be compared
//! byte for byte between runs.  All multi-byte integers are little-endian
//! and every parameter is stored as an `f32`.
//!
//! Header:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "ECGM"
//! 4       2     format version (currently 1)
//! 6       2     weight-layer count L
//! 8       4*(L+1)  layer widths as u32, input width first
//! ```
//!
//! followed, for each layer in input-to-output order, by the row-major
//! `output x input` weight matrix and then the `output` biases, all as
//! consecutive `f32` values.
//!
//! In-memory parameters are `f64`; saving rounds each to the nearest `f32`.
//! Loading widens losslessly, so load -> save reproduces a file exactly, and
//! a freshly-initialised model (whose parameters already sit on the `f32`
//! grid) round-trips with bit-identical outputs.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::{Layer, MlpModel};

/// First four bytes of every model file.
pub const MODEL_MAGIC: &[u8; 4] = b"ECGM";

/// Current model file format version.
pub const MODEL_VERSION: u16 = 1;

/// Upper bound on stored parameters (arbitrary but generous); guards
/// against allocating absurd buffers for corrupt headers.
const MAX_PARAMS: usize = 1 << 28;

/// Failures while reading or writing a model file.
#[derive(Debug, Error)]
pub enum ModelIoError {
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    /// The file does not start with the model magic.
    #[error("not a model file (bad magic)")]
    BadMagic,

    /// The file uses a format version this build does not understand.
    #[error("unsupported model version {0}")]
    UnsupportedVersion(u16),

    /// The file ended in the middle of the named field.
    #[error("model file truncated while reading {0}")]
    Truncated(&'static str),

    /// The declared shape is unusable (zero widths, zero layers, or a
    /// parameter count beyond [`MAX_PARAMS`]).
    #[error("model file declares an invalid shape: {0}")]
    BadShape(&'static str),

    /// Extra bytes follow the last parameter.
    #[error("model file has trailing data after the last parameter")]
    TrailingData,
}

/// Saves a model to `path`.
pub fn save_model(path: &Path, model: &MlpModel) -> Result<(), ModelIoError> {
    let mut out = BufWriter::new(File::create(path)?);
    save_model_to(&mut out, model)?;
    out.flush()?;
    Ok(())
}

/// Saves a model to an arbitrary sink.
pub fn save_model_to<W: Write>(out: &mut W, model: &MlpModel) -> Result<(), ModelIoError> {
    let dims = model.dims();
    let layer_count =
        u16::try_from(model.layers.len()).map_err(|_| ModelIoError::BadShape("layer count"))?;
    out.write_all(MODEL_MAGIC)?;
    out.write_all(&MODEL_VERSION.to_le_bytes())?;
    out.write_all(&layer_count.to_le_bytes())?;
    for dim in &dims {
        let dim = u32::try_from(*dim).map_err(|_| ModelIoError::BadShape("layer width"))?;
        out.write_all(&dim.to_le_bytes())?;
    }
    for layer in &model.layers {
        for &w in &layer.weights {
            out.write_all(&(w as f32).to_le_bytes())?;
        }
        for &b in &layer.biases {
            out.write_all(&(b as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

/// Loads a model from `path`, validating the header and exact length.
pub fn load_model(path: &Path) -> Result<MlpModel, ModelIoError> {
    load_model_from(&mut BufReader::new(File::open(path)?))
}

/// Loads a model from an arbitrary source.
pub fn load_model_from<R: Read>(input: &mut R) -> Result<MlpModel, ModelIoError> {
    let magic: [u8; 4] = read_array(input, "magic")?;
    if &magic != MODEL_MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let version = u16::from_le_bytes(read_array(input, "version")?);
    if version != MODEL_VERSION {
        return Err(ModelIoError::UnsupportedVersion(version));
    }
    let layer_count = u16::from_le_bytes(read_array(input, "layer count")?) as usize;
    if layer_count == 0 {
        return Err(ModelIoError::BadShape("zero layers"));
    }
    let mut dims = Vec::with_capacity(layer_count + 1);
    for _ in 0..=layer_count {
        let dim = u32::from_le_bytes(read_array(input, "layer width")?) as usize;
        if dim == 0 {
            return Err(ModelIoError::BadShape("zero-width layer"));
        }
        dims.push(dim);
    }
    let mut total_params = 0usize;
    for pair in dims.windows(2) {
        let n = pair[0]
            .checked_mul(pair[1])
            .and_then(|n| n.checked_add(pair[1]))
            .ok_or(ModelIoError::BadShape("parameter count overflow"))?;
        total_params = total_params
            .checked_add(n)
            .ok_or(ModelIoError::BadShape("parameter count overflow"))?;
    }
    if total_params > MAX_PARAMS {
        return Err(ModelIoError::BadShape("model too large"));
    }

    let mut layers = Vec::with_capacity(layer_count);
    for pair in dims.windows(2) {
        let (input_len, output_len) = (pair[0], pair[1]);
        let weights = read_f32s(input, input_len * output_len, "weights")?;
        let biases = read_f32s(input, output_len, "biases")?;
        layers.push(Layer {
            weights,
            biases,
            input_len,
            output_len,
        });
    }

    // The shape fully determines the length; anything extra is corruption.
    let mut probe = [0u8; 1];
    match input.read(&mut probe) {
        Ok(0) => Ok(MlpModel { layers }),
        Ok(_) => Err(ModelIoError::TrailingData),
        Err(e) => Err(ModelIoError::Io(e)),
    }
}

/// Reads `count` little-endian `f32`s, widening to `f64`.
fn read_f32s<R: Read>(
    input: &mut R,
    count: usize,
    what: &'static str,
) -> Result<Vec<f64>, ModelIoError> {
    let mut bytes = vec![0u8; count * 4];
    input.read_exact(&mut bytes).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            ModelIoError::Truncated(what)
        } else {
            ModelIoError::Io(e)
        }
    })?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect())
}

/// Reads exactly `N` bytes, reporting which field was cut short on EOF.
fn read_array<R: Read, const N: usize>(
    input: &mut R,
    what: &'static str,
) -> Result<[u8; N], ModelIoError> {
    let mut buf = [0u8; N];
    input.read_exact(&mut buf).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            ModelIoError::Truncated(what)
        } else {
            ModelIoError::Io(e)
        }
    })?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlp::{SparseVector, TrainConfig};
    use crate::rng::DetRng;

    #[test]
    fn fresh_model_round_trips_with_identical_outputs() {
        let mut rng = DetRng::new(0x10ad);
        let model = MlpModel::new(&[20, 8, 5], &mut rng).unwrap();
        let mut bytes = Vec::new();
        save_model_to(&mut bytes, &model).unwrap();
        let loaded = load_model_from(&mut bytes.as_slice()).unwrap();
        // Fresh parameters sit on the f32 grid, so nothing may change.
        assert_eq!(loaded, model);
        let input: SparseVector = vec![(0, 1.0), (7, -0.5), (19, 0.25)];
        let a = model.forward_sparse(&input).unwrap();
        let b = loaded.forward_sparse(&input).unwrap();
        assert_eq!(a, b, "outputs drifted across save/load");
    }

    #[test]
    fn trained_model_files_are_bit_stable() {
        let mut rng = DetRng::new(0x7e57);
        let mut model = MlpModel::new(&[10, 6, 3], &mut rng).unwrap();
        let inputs: Vec<SparseVector> = (0..12)
            .map(|_| {
                (0..3)
                    .map(|_| (rng.next_below(10) as usize, rng.next_range(-1.0, 1.0)))
                    .collect()
            })
            .collect();
        let labels: Vec<usize> = (0..12).map(|i| i % 3).collect();
        let config = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        model.train(&inputs, &labels, &config, &mut rng).unwrap();

        // Training takes parameters off the f32 grid; the file is the f32
        // rounding, and load -> save must reproduce it byte for byte.
        let mut first = Vec::new();
        save_model_to(&mut first, &model).unwrap();
        let loaded = load_model_from(&mut first.as_slice()).unwrap();
        let mut second = Vec::new();
        save_model_to(&mut second, &loaded).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn header_layout_is_fixed() {
        let mut rng = DetRng::new(1);
        let model = MlpModel::new(&[3, 2], &mut rng).unwrap();
        let mut bytes = Vec::new();
        save_model_to(&mut bytes, &model).unwrap();
        assert_eq!(&bytes[0..4], b"ECGM");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(u16::from_le_bytes([bytes[6], bytes[7]]), 1);
        assert_eq!(u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]), 3);
        assert_eq!(u32::from_le_bytes([bytes[12], bytes[13], bytes[14], bytes[15]]), 2);
        // Header + (3*2 weights + 2 biases) * 4 bytes.
        assert_eq!(bytes.len(), 16 + 8 * 4);
    }

    #[test]
    fn rejects_corrupt_files() {
        let mut rng = DetRng::new(2);
        let model = MlpModel::new(&[4, 3, 2], &mut rng).unwrap();
        let mut bytes = Vec::new();
        save_model_to(&mut bytes, &model).unwrap();

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'Z';
        assert!(matches!(
            load_model_from(&mut bad_magic.as_slice()),
            Err(ModelIoError::BadMagic)
        ));

        let mut bad_version = bytes.clone();
        bad_version[4] = 2;
        assert!(matches!(
            load_model_from(&mut bad_version.as_slice()),
            Err(ModelIoError::UnsupportedVersion(2))
        ));

        let mut truncated = bytes.clone();
        truncated.truncate(bytes.len() - 5);
        assert!(matches!(
            load_model_from(&mut truncated.as_slice()),
            Err(ModelIoError::Truncated(_))
        ));

        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(matches!(
            load_model_from(&mut trailing.as_slice()),
            Err(ModelIoError::TrailingData)
        ));

        let mut zero_width = bytes;
        zero_width[8..12].copy_from_slice(&0u32.to_le_bytes());
        assert!(matches!(
            load_model_from(&mut zero_width.as_slice()),
            Err(ModelIoError::BadShape(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ecgm");
        let mut rng = DetRng::new(3);
        let model = MlpModel::new(&[6, 4, 3], &mut rng).unwrap();
        save_model(&path, &model).unwrap();
        assert_eq!(load_model(&path).unwrap(), model);
    }
}
