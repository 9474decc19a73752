//! Classic libpcap capture files.
//!
//! The on-disk layout is a 24-byte global header followed by records, each a
//! 16-byte record header and `incl_len` bytes of captured frame data:
//!
//! ```text
//! magic u32 | version_major u16 | version_minor u16 | thiszone i32 |
//! sigfigs u32 | snaplen u32 | linktype u32
//! ts_sec u32 | ts_frac u32 | incl_len u32 | orig_len u32 | data[incl_len]
//! ```
//!
//! Every integer field uses the byte order announced by the magic number.
//! pcapng files are detected and rejected with their own error.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

/// Microsecond-resolution magic, as read in native order.
pub const MAGIC_MICROS: u32 = 0xA1B2_C3D4;
/// Nanosecond-resolution magic, as read in native order.
pub const MAGIC_NANOS: u32 = 0xA1B2_3C4D;
/// First block type of a pcapng file (section header block).
const PCAPNG_SHB: u32 = 0x0A0D_0D0A;

pub const GLOBAL_HEADER_LEN: usize = 24;
pub const RECORD_HEADER_LEN: usize = 16;

#[derive(Debug, Error)]
pub enum PcapError {
    #[error("bad magic number {0:#010x}: not a classic pcap file")]
    BadMagic(u32),
    #[error("pcapng files are not supported, convert to classic pcap first")]
    Pcapng,
    #[error("truncated capture: {what} at byte offset {offset} (needed {needed} bytes, got {got})")]
    Truncated {
        what: &'static str,
        offset: u64,
        needed: usize,
        got: usize,
    },
    #[error("record {index} at byte offset {offset}: incl_len {incl_len} exceeds snaplen {snaplen}")]
    OversizeRecord {
        index: usize,
        offset: u64,
        incl_len: u32,
        snaplen: u32,
    },
    #[error("snaplen must be positive")]
    ZeroSnaplen,
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByteOrder {
    /// Fields are little-endian (the magic reads as `a1b2c3d4` in LE).
    Native,
    /// Fields are big-endian.
    Swapped,
}

impl ByteOrder {
    fn u32(self, b: [u8; 4]) -> u32 {
        match self {
            ByteOrder::Native => u32::from_le_bytes(b),
            ByteOrder::Swapped => u32::from_be_bytes(b),
        }
    }

    fn u16(self, b: [u8; 2]) -> u16 {
        match self {
            ByteOrder::Native => u16::from_le_bytes(b),
            ByteOrder::Swapped => u16::from_be_bytes(b),
        }
    }

    fn put_u32(self, v: u32) -> [u8; 4] {
        match self {
            ByteOrder::Native => v.to_le_bytes(),
            ByteOrder::Swapped => v.to_be_bytes(),
        }
    }

    fn put_u16(self, v: u16) -> [u8; 2] {
        match self {
            ByteOrder::Native => v.to_le_bytes(),
            ByteOrder::Swapped => v.to_be_bytes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcapHeader {
    /// Magic value normalized to host interpretation: [`MAGIC_MICROS`] or [`MAGIC_NANOS`].
    pub magic: u32,
    pub version_major: u16,
    pub version_minor: u16,
    pub thiszone: i32,
    pub sigfigs: u32,
    pub snaplen: u32,
    pub linktype: u32,
    pub byte_order: ByteOrder,
}

impl PcapHeader {
    /// Ethernet header with the usual 2.4 version and a 256 KiB snaplen.
    pub fn ethernet(byte_order: ByteOrder) -> Self {
        PcapHeader {
            magic: MAGIC_MICROS,
            version_major: 2,
            version_minor: 4,
            thiszone: 0,
            sigfigs: 0,
            snaplen: 262_144,
            linktype: 1,
            byte_order,
        }
    }

    pub fn is_nanosecond(&self) -> bool {
        self.magic == MAGIC_NANOS
    }

    pub fn parse(buf: &[u8; GLOBAL_HEADER_LEN]) -> Result<Self, PcapError> {
        let raw = [buf[0], buf[1], buf[2], buf[3]];
        let le = u32::from_le_bytes(raw);
        let be = u32::from_be_bytes(raw);
        let (magic, byte_order) = match (le, be) {
            (MAGIC_MICROS | MAGIC_NANOS, _) => (le, ByteOrder::Native),
            (_, MAGIC_MICROS | MAGIC_NANOS) => (be, ByteOrder::Swapped),
            (PCAPNG_SHB, _) => return Err(PcapError::Pcapng),
            _ => return Err(PcapError::BadMagic(le)),
        };
        let o = byte_order;
        let snaplen = o.u32([buf[16], buf[17], buf[18], buf[19]]);
        if snaplen == 0 {
            return Err(PcapError::ZeroSnaplen);
        }
        Ok(PcapHeader {
            magic,
            version_major: o.u16([buf[4], buf[5]]),
            version_minor: o.u16([buf[6], buf[7]]),
            thiszone: o.u32([buf[8], buf[9], buf[10], buf[11]]) as i32,
            sigfigs: o.u32([buf[12], buf[13], buf[14], buf[15]]),
            snaplen,
            linktype: o.u32([buf[20], buf[21], buf[22], buf[23]]),
            byte_order,
        })
    }

    pub fn to_bytes(&self) -> [u8; GLOBAL_HEADER_LEN] {
        let o = self.byte_order;
        let mut out = [0u8; GLOBAL_HEADER_LEN];
        out[0..4].copy_from_slice(&o.put_u32(self.magic));
        out[4..6].copy_from_slice(&o.put_u16(self.version_major));
        out[6..8].copy_from_slice(&o.put_u16(self.version_minor));
        out[8..12].copy_from_slice(&o.put_u32(self.thiszone as u32));
        out[12..16].copy_from_slice(&o.put_u32(self.sigfigs));
        out[16..20].copy_from_slice(&o.put_u32(self.snaplen));
        out[20..24].copy_from_slice(&o.put_u32(self.linktype));
        out
    }
}

/// One captured packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcapRecord {
    pub ts_sec: u32,
    /// Microseconds or nanoseconds, depending on the header magic.
    pub ts_frac: u32,
    pub incl_len: u32,
    pub orig_len: u32,
    pub data: Vec<u8>,
}

impl PcapRecord {
    pub fn new(ts_sec: u32, ts_frac: u32, data: Vec<u8>) -> Self {
        let len = data.len() as u32;
        PcapRecord {
            ts_sec,
            ts_frac,
            incl_len: len,
            orig_len: len,
            data,
        }
    }
}

/// Reads as many bytes as are available up to `buf.len()`. Returns the count.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Streaming reader over a classic pcap byte source.
///
/// The global header is consumed by [`PcapReader::new`]; records are then
/// yielded in file order by the [`Iterator`] impl. After the first error the
/// iterator is fused.
pub struct PcapReader<R> {
    inner: R,
    header: PcapHeader,
    offset: u64,
    index: usize,
    done: bool,
}

impl PcapReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, PcapError> {
        Self::new(BufReader::new(File::open(path)?))
    }
}

impl<R: Read> PcapReader<R> {
    pub fn new(mut inner: R) -> Result<Self, PcapError> {
        let mut buf = [0u8; GLOBAL_HEADER_LEN];
        let got = read_full(&mut inner, &mut buf)?;
        if got >= 4 {
            // pcapng and foreign files are reported as such even when short.
            let magic = u32::from_le_bytes([buf[0], buf[1], buf[2], buf[3]]);
            let known = [MAGIC_MICROS, MAGIC_NANOS, MAGIC_MICROS.swap_bytes(), MAGIC_NANOS.swap_bytes()];
            if magic == PCAPNG_SHB {
                return Err(PcapError::Pcapng);
            }
            if !known.contains(&magic) {
                return Err(PcapError::BadMagic(magic));
            }
        }
        if got < GLOBAL_HEADER_LEN {
            return Err(PcapError::Truncated {
                what: "global header",
                offset: 0,
                needed: GLOBAL_HEADER_LEN,
                got,
            });
        }
        let header = PcapHeader::parse(&buf)?;
        Ok(PcapReader {
            inner,
            header,
            offset: GLOBAL_HEADER_LEN as u64,
            index: 0,
            done: false,
        })
    }

    pub fn header(&self) -> &PcapHeader {
        &self.header
    }

    /// Byte offset of the next unread record header.
    pub fn offset(&self) -> u64 {
        self.offset
    }

    fn read_record(&mut self) -> Result<Option<PcapRecord>, PcapError> {
        let mut hdr = [0u8; RECORD_HEADER_LEN];
        let got = read_full(&mut self.inner, &mut hdr)?;
        if got == 0 {
            return Ok(None);
        }
        if got < RECORD_HEADER_LEN {
            return Err(PcapError::Truncated {
                what: "record header",
                offset: self.offset,
                needed: RECORD_HEADER_LEN,
                got,
            });
        }
        let o = self.header.byte_order;
        let field = |i: usize| o.u32([hdr[i], hdr[i + 1], hdr[i + 2], hdr[i + 3]]);
        let (ts_sec, ts_frac, incl_len, orig_len) = (field(0), field(4), field(8), field(12));
        if incl_len > self.header.snaplen {
            return Err(PcapError::OversizeRecord {
                index: self.index,
                offset: self.offset,
                incl_len,
                snaplen: self.header.snaplen,
            });
        }
        let mut data = vec![0u8; incl_len as usize];
        let got = read_full(&mut self.inner, &mut data)?;
        if got < data.len() {
            return Err(PcapError::Truncated {
                what: "record body",
                offset: self.offset + RECORD_HEADER_LEN as u64,
                needed: data.len(),
                got,
            });
        }
        self.offset += (RECORD_HEADER_LEN + data.len()) as u64;
        self.index += 1;
        Ok(Some(PcapRecord {
            ts_sec,
            ts_frac,
            incl_len,
            orig_len,
            data,
        }))
    }
}

impl<R: Read> Iterator for PcapReader<R> {
    type Item = Result<PcapRecord, PcapError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.read_record() {
            Ok(Some(rec)) => Some(Ok(rec)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Parses a whole capture held in any byte source.
pub fn parse_pcap<R: Read>(stream: R) -> Result<(PcapHeader, Vec<PcapRecord>), PcapError> {
    let mut reader = PcapReader::new(stream)?;
    let records = reader.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok((reader.header, records))
}

pub fn read_pcap_file(path: impl AsRef<Path>) -> Result<(PcapHeader, Vec<PcapRecord>), PcapError> {
    parse_pcap(BufReader::new(File::open(path)?))
}

/// Serializes a capture in the header's byte order.
pub fn write_pcap<W: Write>(mut out: W, header: &PcapHeader, records: &[PcapRecord]) -> io::Result<()> {
    out.write_all(&header.to_bytes())?;
    let o = header.byte_order;
    for rec in records {
        out.write_all(&o.put_u32(rec.ts_sec))?;
        out.write_all(&o.put_u32(rec.ts_frac))?;
        out.write_all(&o.put_u32(rec.incl_len))?;
        out.write_all(&o.put_u32(rec.orig_len))?;
        out.write_all(&rec.data)?;
    }
    out.flush()
}

/// A contiguous window of the concatenated packet byte stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub source_id: String,
    pub index: usize,
    /// Offset of the first byte within the concatenated record payloads.
    pub offset: u64,
    pub bytes: Vec<u8>,
}

impl Chunk {
    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// Concatenates the captured bytes of `records` and cuts them into
/// consecutive `chunk_size` windows. The final window may be short.
/// Record headers are not part of the stream.
///
/// # Panics
///
/// Panics if `chunk_size` is zero.
pub fn chunk_stream<'a, I>(source_id: &str, records: I, chunk_size: usize) -> Vec<Chunk>
where
    I: IntoIterator<Item = &'a PcapRecord>,
{
    let mut chunker = Chunker::new(source_id, chunk_size);
    let mut out = Vec::new();
    for rec in records {
        chunker.push(&rec.data, |c| out.push(c));
    }
    out.extend(chunker.finish());
    out
}

/// Incremental form of [`chunk_stream`] for captures too large to hold.
pub struct Chunker {
    source_id: String,
    chunk_size: usize,
    buf: Vec<u8>,
    index: usize,
    offset: u64,
}

impl Chunker {
    pub fn new(source_id: &str, chunk_size: usize) -> Self {
        assert!(chunk_size >= 1, "chunk_size must be at least 1");
        Chunker {
            source_id: source_id.to_owned(),
            chunk_size,
            buf: Vec::with_capacity(chunk_size),
            index: 0,
            offset: 0,
        }
    }

    fn emit(&mut self) -> Chunk {
        let bytes = std::mem::replace(&mut self.buf, Vec::with_capacity(self.chunk_size));
        let chunk = Chunk {
            source_id: self.source_id.clone(),
            index: self.index,
            offset: self.offset,
            bytes,
        };
        self.index += 1;
        self.offset += chunk.bytes.len() as u64;
        chunk
    }

    pub fn push(&mut self, mut data: &[u8], mut sink: impl FnMut(Chunk)) {
        while !data.is_empty() {
            let take = (self.chunk_size - self.buf.len()).min(data.len());
            self.buf.extend_from_slice(&data[..take]);
            data = &data[take..];
            if self.buf.len() == self.chunk_size {
                sink(self.emit());
            }
        }
    }

    pub fn finish(mut self) -> Option<Chunk> {
        (!self.buf.is_empty()).then(|| self.emit())
    }
}
