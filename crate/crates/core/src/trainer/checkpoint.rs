//! Frequency-tagged network snapshots and the "PNUP" file format.
//!
//! The file stores layer shapes, frequency, activation scale, encoding band
//! count, stage seed, all weights/biases as f64 little-endian, and an
//! optional Adam block. The coordinate normalization is not part of the
//! format; it is supplied on load (it follows from the training domain).

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use crate::io as bin;
use crate::network::{
    AdamState, CoordScale, DenseLayer, NetworkError, NetworkParams, PEConfig,
};

use super::TrainError;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"PNUP";
pub const CHECKPOINT_VERSION: u16 = 1;

/// The unit passed along the frequency ladder: parameters, the frequency they
/// were trained at, optional optimizer state and the stage seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: NetworkParams,
    pub frequency_hz: f64,
    pub adam: Option<AdamState>,
    pub seed: u64,
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<(), TrainError> {
    let params = &ckpt.params;
    if params.flatten().iter().any(|v| !v.is_finite()) {
        return Err(TrainError::NonFiniteParams);
    }
    if !params.pe.include_raw {
        return Err(TrainError::UnsupportedEncoding(
            "checkpoint format assumes the raw coordinate term".into(),
        ));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    bin::write_u16(&mut w, CHECKPOINT_VERSION)?;
    bin::write_u32(&mut w, params.layers().len() as u32)?;
    for layer in params.layers() {
        bin::write_u32(&mut w, layer.rows() as u32)?;
        bin::write_u32(&mut w, layer.cols() as u32)?;
    }
    bin::write_f64(&mut w, ckpt.frequency_hz)?;
    bin::write_f64(&mut w, params.w0)?;
    bin::write_u32(&mut w, params.pe.num_bands)?;
    bin::write_u64(&mut w, ckpt.seed)?;
    for layer in params.layers() {
        for &v in layer.weights() {
            bin::write_f64(&mut w, v)?;
        }
        for &v in layer.biases() {
            bin::write_f64(&mut w, v)?;
        }
    }
    match &ckpt.adam {
        None => bin::write_u8(&mut w, 0)?,
        Some(adam) => {
            bin::write_u8(&mut w, 1)?;
            bin::write_u64(&mut w, adam.step_count())?;
            bin::write_f64(&mut w, adam.beta1)?;
            bin::write_f64(&mut w, adam.beta2)?;
            bin::write_f64(&mut w, adam.epsilon)?;
            for &v in adam.first_moments() {
                bin::write_f64(&mut w, v)?;
            }
            for &v in adam.second_moments() {
                bin::write_f64(&mut w, v)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Loads a checkpoint, reattaching the coordinate normalization of the
/// domain it will be evaluated on.
pub fn load_checkpoint(path: &Path, coord_scale: CoordScale) -> Result<Checkpoint, TrainError> {
    let mut r = BufReader::new(File::open(path)?);
    bin::read_magic(&mut r, CHECKPOINT_MAGIC)?;
    let version = bin::read_u16(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(TrainError::Io(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("unsupported checkpoint version {version}"),
        )));
    }
    let layer_count = bin::read_u32(&mut r)? as usize;
    if layer_count == 0 || layer_count > 64 {
        return Err(TrainError::Io(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("implausible layer count {layer_count}"),
        )));
    }
    let mut shapes = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let rows = bin::read_u32(&mut r)? as usize;
        let cols = bin::read_u32(&mut r)? as usize;
        shapes.push((rows, cols));
    }
    let frequency_hz = bin::read_f64(&mut r)?;
    let w0 = bin::read_f64(&mut r)?;
    let num_bands = bin::read_u32(&mut r)?;
    let seed = bin::read_u64(&mut r)?;

    let pe = PEConfig {
        num_bands,
        include_raw: true,
        coord_scale,
    };
    let mut layers = Vec::with_capacity(layer_count);
    for &(rows, cols) in &shapes {
        let mut w = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            w.push(bin::read_f64(&mut r)?);
        }
        let mut b = Vec::with_capacity(rows);
        for _ in 0..rows {
            b.push(bin::read_f64(&mut r)?);
        }
        layers.push(DenseLayer::new(rows, cols, w, b).map_err(invalid_shape)?);
    }
    let params = NetworkParams::from_layers(layers, pe, w0).map_err(invalid_shape)?;

    let adam = match bin::read_u8(&mut r)? {
        0 => None,
        1 => {
            let t = bin::read_u64(&mut r)?;
            let beta1 = bin::read_f64(&mut r)?;
            let beta2 = bin::read_f64(&mut r)?;
            let epsilon = bin::read_f64(&mut r)?;
            let count = params.param_count();
            let mut m = Vec::with_capacity(count);
            for _ in 0..count {
                m.push(bin::read_f64(&mut r)?);
            }
            let mut v = Vec::with_capacity(count);
            for _ in 0..count {
                v.push(bin::read_f64(&mut r)?);
            }
            Some(AdamState::from_parts(m, v, t, beta1, beta2, epsilon).map_err(invalid_shape)?)
        }
        flag => {
            return Err(TrainError::Io(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("bad optimizer presence flag {flag}"),
            )))
        }
    };
    bin::expect_eof(&mut r)?;
    Ok(Checkpoint {
        params,
        frequency_hz,
        adam,
        seed,
    })
}

fn invalid_shape(e: NetworkError) -> TrainError {
    TrainError::Io(io::Error::new(io::ErrorKind::InvalidData, e.to_string()))
}
