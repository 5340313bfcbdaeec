//! Scalar abstraction shared by the vector math, flat and graph indexes.

use std::fmt::{Debug, Display};
use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real-valued vector component: `f32` (the wire and index default) or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Tag written into index images so an `f32` image is never read as `f64`.
    const TYPE_TAG: u8;
    /// Encoded width in bytes.
    const WIDTH: usize;

    fn write_le<W: Write>(self, out: &mut W) -> io::Result<()>;
    fn read_le<R: Read>(input: &mut R) -> io::Result<Self>;
}

impl Scalar for f32 {
    const TYPE_TAG: u8 = 4;
    const WIDTH: usize = 4;

    fn write_le<W: Write>(self, out: &mut W) -> io::Result<()> {
        out.write_f32::<LittleEndian>(self)
    }

    fn read_le<R: Read>(input: &mut R) -> io::Result<Self> {
        input.read_f32::<LittleEndian>()
    }
}

impl Scalar for f64 {
    const TYPE_TAG: u8 = 8;
    const WIDTH: usize = 8;

    fn write_le<W: Write>(self, out: &mut W) -> io::Result<()> {
        out.write_f64::<LittleEndian>(self)
    }

    fn read_le<R: Read>(input: &mut R) -> io::Result<Self> {
        input.read_f64::<LittleEndian>()
    }
}
