//! Binary index image.
//!
//! Little-endian layout:
//!
//! ```text
//! header    magic "DKHNSWIX", version u32, scalar tag u8, dim u32,
//!           m u32, m0 u32, ef_construction u32, level_scale f64, seed u64,
//!           node count u64, entry node u32 (u32::MAX if empty), max level u32
//! ids       per node: byte length u32, UTF-8 bytes
//! vectors   node count * dim scalars
//! levels    per node: u32
//! links     per node, per layer 0..=level: count u32, neighbor ids u32
//! trailer   "DKEND\0\0\0"
//! ```

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::builder::EntryPoint;
use super::index::HnswIndex;
use super::params::HnswParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 8] = b"DKHNSWIX";
const TRAILER: &[u8; 8] = b"DKEND\0\0\0";
pub const FORMAT_VERSION: u32 = 1;
const NO_ENTRY: u32 = u32::MAX;
const MAX_ID_BYTES: u32 = 1 << 20;

struct CountingWriter<W> {
    inner: W,
    written: u64,
}

impl<W: Write> Write for CountingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.written += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn corrupt(section: &'static str, detail: impl Into<String>) -> Error {
    Error::CorruptIndex { section, detail: detail.into() }
}

/// Runs a read step, reporting EOF as a corrupt-index error for `section`.
fn read_section<T>(section: &'static str, step: impl FnOnce() -> io::Result<T>) -> Result<T> {
    step().map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => corrupt(section, "truncated"),
        io::ErrorKind::InvalidData => corrupt(section, e.to_string()),
        _ => Error::Io(e),
    })
}

impl<S: Scalar> HnswIndex<S> {
    /// Writes the image and returns the number of bytes written.
    pub fn save<W: Write>(&self, sink: W) -> Result<u64> {
        let mut w = CountingWriter { inner: sink, written: 0 };
        let p = &self.params;
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u8(S::TYPE_TAG)?;
        w.write_u32::<LittleEndian>(self.dim as u32)?;
        w.write_u32::<LittleEndian>(p.m as u32)?;
        w.write_u32::<LittleEndian>(p.m0 as u32)?;
        w.write_u32::<LittleEndian>(p.ef_construction as u32)?;
        w.write_f64::<LittleEndian>(p.level_scale)?;
        w.write_u64::<LittleEndian>(p.seed)?;
        w.write_u64::<LittleEndian>(self.ids.len() as u64)?;
        let (entry, max_level) = match self.entry {
            Some(ep) => (ep.node, ep.level as u32),
            None => (NO_ENTRY, 0),
        };
        w.write_u32::<LittleEndian>(entry)?;
        w.write_u32::<LittleEndian>(max_level)?;

        for id in &self.ids {
            w.write_u32::<LittleEndian>(id.len() as u32)?;
            w.write_all(id.as_bytes())?;
        }
        for &v in &self.vectors {
            v.write_le(&mut w)?;
        }
        for &level in &self.levels {
            w.write_u32::<LittleEndian>(level)?;
        }
        for node in 0..self.ids.len() as u32 {
            for layer in 0..=self.levels[node as usize] as usize {
                let list = self.neighbor_slice(node, layer);
                w.write_u32::<LittleEndian>(list.len() as u32)?;
                for &n in list {
                    w.write_u32::<LittleEndian>(n)?;
                }
            }
        }
        w.write_all(TRAILER)?;
        w.flush()?;
        Ok(w.written)
    }

    pub fn save_to_path(&self, path: impl AsRef<Path>) -> Result<u64> {
        let file = File::create(path)?;
        self.save(BufWriter::new(file))
    }

    /// Reads and validates an image written by [`HnswIndex::save`].
    pub fn load<R: Read>(source: R) -> Result<Self> {
        let mut r = source;

        let mut magic = [0u8; 8];
        read_section("magic", || r.read_exact(&mut magic))?;
        if &magic != MAGIC {
            return Err(corrupt("magic", "not an index image"));
        }
        let version = read_section("header", || r.read_u32::<LittleEndian>())?;
        if version != FORMAT_VERSION {
            return Err(corrupt("version", format!("unsupported format version {version}")));
        }
        let (tag, dim, m, m0, efc, level_scale, seed, count, entry, max_level) =
            read_section("header", || {
                Ok((
                    r.read_u8()?,
                    r.read_u32::<LittleEndian>()? as usize,
                    r.read_u32::<LittleEndian>()? as usize,
                    r.read_u32::<LittleEndian>()? as usize,
                    r.read_u32::<LittleEndian>()? as usize,
                    r.read_f64::<LittleEndian>()?,
                    r.read_u64::<LittleEndian>()?,
                    r.read_u64::<LittleEndian>()?,
                    r.read_u32::<LittleEndian>()?,
                    r.read_u32::<LittleEndian>()? as usize,
                ))
            })?;
        if tag != S::TYPE_TAG {
            return Err(corrupt("header", format!("scalar tag {tag} does not match {}", S::TYPE_TAG)));
        }
        if dim == 0 {
            return Err(corrupt("header", "zero dimension"));
        }
        let params = HnswParams { m, m0, ef_construction: efc, level_scale, seed };
        params.validate().map_err(|e| corrupt("params", e.to_string()))?;
        if count >= u32::MAX as u64 {
            return Err(corrupt("header", format!("node count {count} out of range")));
        }
        let count = count as usize;
        let entry = match (entry, count) {
            (NO_ENTRY, 0) => None,
            (NO_ENTRY, _) => return Err(corrupt("header", "non-empty index without entry point")),
            (node, _) if node as usize >= count => {
                return Err(corrupt("header", format!("entry point {node} out of range")))
            }
            (node, _) => Some(EntryPoint { node, level: max_level }),
        };

        let mut ids = Vec::new();
        let mut seen = HashSet::new();
        for _ in 0..count {
            let len = read_section("ids", || r.read_u32::<LittleEndian>())?;
            if len == 0 || len > MAX_ID_BYTES {
                return Err(corrupt("ids", format!("bad id length {len}")));
            }
            let mut bytes = Vec::new();
            read_section("ids", || {
                (&mut r).take(len as u64).read_to_end(&mut bytes)?;
                if bytes.len() < len as usize {
                    return Err(io::ErrorKind::UnexpectedEof.into());
                }
                Ok(())
            })?;
            let id = String::from_utf8(bytes).map_err(|_| corrupt("ids", "id is not UTF-8"))?;
            if !seen.insert(id.clone()) {
                return Err(corrupt("ids", format!("duplicate id `{id}`")));
            }
            ids.push(id);
        }
        drop(seen);

        let mut vectors = Vec::new();
        for _ in 0..count * dim {
            let v = read_section("vectors", || S::read_le(&mut r))?;
            if !v.is_finite() {
                return Err(corrupt("vectors", "non-finite component"));
            }
            vectors.push(v);
        }

        let mut levels = Vec::new();
        for _ in 0..count {
            let level = read_section("levels", || r.read_u32::<LittleEndian>())?;
            if level as usize > max_level {
                return Err(corrupt("levels", format!("level {level} above max level {max_level}")));
            }
            levels.push(level);
        }
        if let Some(ep) = entry {
            if levels[ep.node as usize] as usize != max_level {
                return Err(corrupt("levels", "entry point is not on the top layer"));
            }
        }

        let mut links = Vec::with_capacity(count);
        for node in 0..count {
            let mut node_links = Vec::with_capacity(levels[node] as usize + 1);
            for layer in 0..=levels[node] as usize {
                let cap = if layer == 0 { m0 } else { m };
                let len = read_section("links", || r.read_u32::<LittleEndian>())? as usize;
                if len > cap {
                    return Err(corrupt("links", format!("node {node} layer {layer}: {len} neighbors exceeds cap {cap}")));
                }
                let mut list = Vec::with_capacity(len);
                for _ in 0..len {
                    let n = read_section("links", || r.read_u32::<LittleEndian>())?;
                    if n as usize >= count || (levels[n as usize] as usize) < layer {
                        return Err(corrupt("links", format!("node {node} layer {layer}: bad neighbor {n}")));
                    }
                    list.push(n);
                }
                node_links.push(list);
            }
            links.push(node_links);
        }

        let mut trailer = [0u8; 8];
        read_section("trailer", || r.read_exact(&mut trailer))?;
        if &trailer != TRAILER {
            return Err(corrupt("trailer", "bad trailer"));
        }
        let mut extra = [0u8; 1];
        if read_section("trailer", || r.read(&mut extra))? != 0 {
            return Err(corrupt("trailer", "trailing bytes after image"));
        }

        Ok(HnswIndex::from_parts(params, dim, ids, vectors, levels, &links, entry))
    }

    pub fn load_from_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = File::open(path)?;
        Self::load(BufReader::new(file))
    }
}
