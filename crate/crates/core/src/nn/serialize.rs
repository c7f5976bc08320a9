//! Binary model files. Parameters are stored as little-endian `f64` bits,
//! so a save/load round trip reproduces the model exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::nn::mlp::{Activation, MlpConfig, MlpModel};

const MAGIC: &[u8; 4] = b"MLPM";
const VERSION: u32 = 1;
/// Sanity caps applied when reading untrusted files.
const MAX_LAYERS: u64 = 1024;
const MAX_WIDTH: u64 = 1 << 24;

/// Writes `model` to `path`, creating parent directories as needed.
pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);

    w.write_all(MAGIC).map_err(io_err)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    let activation_tag: u8 = match model.config().activation {
        Activation::Relu => 0,
    };
    w.write_all(&[activation_tag]).map_err(io_err)?;
    w.write_all(&model.config().seed.to_le_bytes()).map_err(io_err)?;
    let sizes = &model.config().layer_sizes;
    w.write_all(&(sizes.len() as u32).to_le_bytes()).map_err(io_err)?;
    for &s in sizes {
        w.write_all(&(s as u64).to_le_bytes()).map_err(io_err)?;
    }
    for l in 0..model.n_layers() {
        for v in model.weights()[l].data() {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
        for v in &model.biases()[l] {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Reads a model written by [`save_model`].
pub fn load_model(path: &Path) -> Result<MlpModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let corrupt = |what: &str| {
        Error::Data(format!("corrupt model file {}: {what}", path.display()))
    };

    let mut magic = [0u8; 4];
    read_bytes(&mut r, &mut magic, path)?;
    if &magic != MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = read_u32(&mut r, path)?;
    if version != VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let mut tag = [0u8; 1];
    read_bytes(&mut r, &mut tag, path)?;
    let activation = match tag[0] {
        0 => Activation::Relu,
        t => return Err(corrupt(&format!("unknown activation tag {t}"))),
    };
    let seed = read_u64(&mut r, path)?;
    let n_sizes = read_u32(&mut r, path)? as u64;
    if n_sizes < 2 || n_sizes > MAX_LAYERS {
        return Err(corrupt(&format!("implausible layer count {n_sizes}")));
    }
    let mut layer_sizes = Vec::with_capacity(n_sizes as usize);
    for _ in 0..n_sizes {
        let s = read_u64(&mut r, path)?;
        if s == 0 || s > MAX_WIDTH {
            return Err(corrupt(&format!("implausible layer width {s}")));
        }
        layer_sizes.push(s as usize);
    }

    let mut weights = Vec::with_capacity(layer_sizes.len() - 1);
    let mut biases = Vec::with_capacity(layer_sizes.len() - 1);
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let mut w = Matrix::zeros(fan_out, fan_in);
        for v in w.data_mut() {
            *v = read_f64(&mut r, path)?;
        }
        weights.push(w);
        let mut b = vec![0.0; fan_out];
        for v in &mut b {
            *v = read_f64(&mut r, path)?;
        }
        biases.push(b);
    }
    let mut trailing = [0u8; 1];
    match r.read(&mut trailing) {
        Ok(0) => {}
        Ok(_) => return Err(corrupt("trailing bytes")),
        Err(e) => return Err(Error::io(path, e)),
    }

    let config = MlpConfig { layer_sizes, activation, seed };
    MlpModel::from_parts(config, weights, biases)
}

fn read_bytes<R: Read>(r: &mut R, buf: &mut [u8], path: &Path) -> Result<()> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == std::io::ErrorKind::UnexpectedEof {
            Error::Data(format!("corrupt model file {}: truncated", path.display()))
        } else {
            Error::io(path, e)
        }
    })
}

fn read_u32<R: Read>(r: &mut R, path: &Path) -> Result<u32> {
    let mut buf = [0u8; 4];
    read_bytes(r, &mut buf, path)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R, path: &Path) -> Result<u64> {
    let mut buf = [0u8; 8];
    read_bytes(r, &mut buf, path)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R, path: &Path) -> Result<f64> {
    let mut buf = [0u8; 8];
    read_bytes(r, &mut buf, path)?;
    Ok(f64::from_le_bytes(buf))
}
