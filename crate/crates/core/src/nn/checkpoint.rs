//! Versioned binary checkpoint: magic "SGLAB1", integer metadata, then one
//! record per array with dtype tag, shape, and little-endian f64 contents.

use super::net::ScoreNet;
use crate::error::{Result, SgError};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 6] = b"SGLAB1";
const DTYPE_F64_LE: u8 = 1;

fn write_u32<W: Write>(w: &mut W, v: u32) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn write_str<W: Write>(w: &mut W, s: &str) -> std::io::Result<()> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_str<R: Read>(r: &mut R) -> std::io::Result<String> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

pub fn save_checkpoint(net: &ScoreNet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| SgError::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| SgError::io(path.display().to_string(), e);

    w.write_all(MAGIC).map_err(io_err)?;
    let mut meta: Vec<(String, i64)> = vec![
        ("dim".into(), net.dim() as i64),
        ("time_embed".into(), net.time_embed() as i64),
        ("vocab".into(), net.vocab() as i64),
        ("hidden_count".into(), net.hidden().len() as i64),
    ];
    for (i, h) in net.hidden().iter().enumerate() {
        meta.push((format!("hidden_{i}"), *h as i64));
    }
    write_u32(&mut w, meta.len() as u32).map_err(io_err)?;
    for (k, v) in &meta {
        write_str(&mut w, k).map_err(io_err)?;
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    write_u32(&mut w, net.params().len() as u32).map_err(io_err)?;
    for p in net.params() {
        write_str(&mut w, &p.name).map_err(io_err)?;
        w.write_all(&[DTYPE_F64_LE]).map_err(io_err)?;
        write_u32(&mut w, 2).map_err(io_err)?;
        write_u64(&mut w, p.rows as u64).map_err(io_err)?;
        write_u64(&mut w, p.cols as u64).map_err(io_err)?;
        for v in &p.data {
            w.write_all(&v.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn load_checkpoint(path: &Path) -> Result<ScoreNet> {
    let file = File::open(path).map_err(|e| SgError::io(path.display().to_string(), e))?;
    let mut r = BufReader::new(file);
    let io_err = |e| SgError::io(path.display().to_string(), e);

    let mut magic = [0u8; 6];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(SgError::Checkpoint(format!(
            "{}: bad magic {:?}, expected {:?}",
            path.display(),
            magic,
            MAGIC
        )));
    }
    let meta_count = read_u32(&mut r).map_err(io_err)? as usize;
    let mut meta = std::collections::BTreeMap::new();
    for _ in 0..meta_count {
        let key = read_str(&mut r).map_err(io_err)?;
        let mut buf = [0u8; 8];
        r.read_exact(&mut buf).map_err(io_err)?;
        meta.insert(key, i64::from_le_bytes(buf));
    }
    let need = |k: &str| -> Result<usize> {
        meta.get(k)
            .map(|&v| v as usize)
            .ok_or_else(|| SgError::Checkpoint(format!("missing metadata key {k}")))
    };
    let dim = need("dim")?;
    let time_embed = need("time_embed")?;
    let vocab = need("vocab")?;
    let hidden_count = need("hidden_count")?;
    let mut hidden = Vec::with_capacity(hidden_count);
    for i in 0..hidden_count {
        hidden.push(need(&format!("hidden_{i}"))?);
    }
    let mut net = ScoreNet::zeros(dim, time_embed, hidden, vocab)?;

    let array_count = read_u32(&mut r).map_err(io_err)? as usize;
    if array_count != net.params().len() {
        return Err(SgError::Checkpoint(format!(
            "expected {} arrays, found {array_count}",
            net.params().len()
        )));
    }
    for i in 0..array_count {
        let name = read_str(&mut r).map_err(io_err)?;
        let mut dtype = [0u8; 1];
        r.read_exact(&mut dtype).map_err(io_err)?;
        if dtype[0] != DTYPE_F64_LE {
            return Err(SgError::Checkpoint(format!("array {name}: unsupported dtype {}", dtype[0])));
        }
        let ndim = read_u32(&mut r).map_err(io_err)?;
        if ndim != 2 {
            return Err(SgError::Checkpoint(format!("array {name}: expected 2 dims, got {ndim}")));
        }
        let rows = read_u64(&mut r).map_err(io_err)? as usize;
        let cols = read_u64(&mut r).map_err(io_err)? as usize;
        let p = &mut net.params_mut()[i];
        if p.name != name || p.rows != rows || p.cols != cols {
            return Err(SgError::Checkpoint(format!(
                "array {i} is {name} ({rows}x{cols}), expected {} ({}x{})",
                p.name, p.rows, p.cols
            )));
        }
        for v in &mut p.data {
            let mut buf = [0u8; 8];
            r.read_exact(&mut buf).map_err(io_err)?;
            *v = f64::from_le_bytes(buf);
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_preserves_parameters() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.sglab");
        let net = ScoreNet::default_arch(2, 3, 11);
        save_checkpoint(&net, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(net.dim(), loaded.dim());
        assert_eq!(net.hidden(), loaded.hidden());
        for (a, b) in net.params().iter().zip(loaded.params()) {
            assert_eq!(a.name, b.name);
            assert_eq!(a.data, b.data, "bit-exact parameter round trip");
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"NOTSGL___").unwrap();
        let err = load_checkpoint(&path).unwrap_err().to_string();
        assert!(err.contains("bad magic"), "{err}");
    }
}
