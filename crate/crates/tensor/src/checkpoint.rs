//! Checkpoint container: named parameters plus a config header.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   b"WFCP"
//! version u16
//! config  u32 length + UTF-8 bytes (caller-defined, typically JSON)
//! count   u32
//! entry*  name (u16 length + UTF-8), dtype u8 (0 = f32, 1 = f64),
//!         rank u8, dims u32 each, raw little-endian values
//! ```

use crate::error::{Error, Result};
use crate::params::Params;
use crate::tensor::{Dtype, Real, Tensor};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"WFCP";
const VERSION: u16 = 1;

pub fn save_checkpoint<T: Real>(path: &Path, config: &str, params: &Params<T>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let cfg = config.as_bytes();
    w.write_all(&(cfg.len() as u32).to_le_bytes())?;
    w.write_all(cfg)?;
    w.write_all(&(params.len() as u32).to_le_bytes())?;
    for (name, tensor) in params.iter() {
        let nb = name.as_bytes();
        if nb.len() > u16::MAX as usize {
            return Err(Error::Format(format!("parameter name too long: {name}")));
        }
        w.write_all(&(nb.len() as u16).to_le_bytes())?;
        w.write_all(nb)?;
        w.write_all(&[match T::DTYPE {
            Dtype::F32 => 0u8,
            Dtype::F64 => 1u8,
        }])?;
        w.write_all(&[tensor.rank() as u8])?;
        for &d in tensor.shape() {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        match T::DTYPE {
            Dtype::F32 => {
                for &v in tensor.data() {
                    w.write_all(&(v.to_f64_val() as f32).to_le_bytes())?;
                }
            }
            Dtype::F64 => {
                for &v in tensor.data() {
                    w.write_all(&v.to_f64_val().to_le_bytes())?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Load a checkpoint, converting stored values to `T` if the dtypes
/// differ. Returns the config string and the parameters.
pub fn load_checkpoint<T: Real>(path: &Path) -> Result<(String, Params<T>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, not a checkpoint file".into()));
    }
    let version = read_u16(&mut r)?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported checkpoint version {version}, expected {VERSION}"
        )));
    }
    let cfg_len = read_u32(&mut r)? as usize;
    let mut cfg = vec![0u8; cfg_len];
    r.read_exact(&mut cfg)?;
    let config =
        String::from_utf8(cfg).map_err(|_| Error::Format("config is not UTF-8".into()))?;

    let count = read_u32(&mut r)? as usize;
    let mut params = Params::new();
    for _ in 0..count {
        let name_len = read_u16(&mut r)? as usize;
        let mut nb = vec![0u8; name_len];
        r.read_exact(&mut nb)?;
        let name =
            String::from_utf8(nb).map_err(|_| Error::Format("name is not UTF-8".into()))?;
        let dtype = match read_u8(&mut r)? {
            0 => Dtype::F32,
            1 => Dtype::F64,
            d => return Err(Error::Format(format!("unknown dtype tag {d}"))),
        };
        let rank = read_u8(&mut r)? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(read_u32(&mut r)? as usize);
        }
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        match dtype {
            Dtype::F32 => {
                let mut buf = [0u8; 4];
                for _ in 0..n {
                    r.read_exact(&mut buf)?;
                    data.push(T::from_f64_val(f32::from_le_bytes(buf) as f64));
                }
            }
            Dtype::F64 => {
                let mut buf = [0u8; 8];
                for _ in 0..n {
                    r.read_exact(&mut buf)?;
                    data.push(T::from_f64_val(f64::from_le_bytes(buf)));
                }
            }
        }
        params.insert(name, Tensor::from_vec(&shape, data)?);
    }
    Ok((config, params))
}

fn read_u8(r: &mut impl Read) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u16(r: &mut impl Read) -> Result<u16> {
    let mut b = [0u8; 2];
    r.read_exact(&mut b)?;
    Ok(u16::from_le_bytes(b))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_values_and_config() {
        let dir = std::env::temp_dir().join("wf-ckpt-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.wfcp");

        let mut params = Params::<f32>::new();
        params.insert("a.w", Tensor::from_vec(&[2, 3], vec![1.0, -2.5, 3.25, 0.0, 9.5, -7.0]).unwrap());
        params.insert("a.b", Tensor::zeros(&[3]));
        save_checkpoint(&path, r#"{"d_model":16}"#, &params).unwrap();

        let (cfg, loaded) = load_checkpoint::<f32>(&path).unwrap();
        assert_eq!(cfg, r#"{"d_model":16}"#);
        assert_eq!(loaded.get("a.w").unwrap(), params.get("a.w").unwrap());
        assert_eq!(loaded.get("a.b").unwrap(), params.get("a.b").unwrap());
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn rejects_wrong_magic() {
        let dir = std::env::temp_dir().join("wf-ckpt-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("junk.bin");
        std::fs::write(&path, b"NOPE....").unwrap();
        assert!(matches!(load_checkpoint::<f32>(&path), Err(Error::Format(_))));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn f64_checkpoint_loads_into_f32() {
        let dir = std::env::temp_dir().join("wf-ckpt-test3");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("wide.wfcp");
        let mut params = Params::<f64>::new();
        params.insert("w", Tensor::from_vec(&[2], vec![0.5, -0.25]).unwrap());
        save_checkpoint(&path, "", &params).unwrap();
        let (_, loaded) = load_checkpoint::<f32>(&path).unwrap();
        assert_eq!(loaded.get("w").unwrap().data(), &[0.5f32, -0.25]);
        std::fs::remove_file(&path).unwrap();
    }
}
