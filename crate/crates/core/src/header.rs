//! Fixed 20-byte TCP header codec.
//!
//! Layout (all multi-byte fields big-endian):
//!
//! ```text
//!  0..2   source port
//!  2..4   destination port
//!  4..8   sequence number
//!  8..12  acknowledgment number
//!  12     data offset (4) | reserved (3, link-mode bit first) | unused flag bit
//!  13     unused (2) | URG | ACK | PSH | RST | SYN | FIN
//!  14..16 window
//!  16..18 checksum
//!  18..20 urgent pointer
//! ```
//!
//! The most significant reserved bit carries the link mode: 0 for wired,
//! 1 for wireless. The other two reserved bits must be zero.

use thiserror::Error;

/// Encoded header length. Options are not supported.
pub const HEADER_LEN: usize = 20;

/// The only data offset this codec emits (five 32-bit words).
pub const DATA_OFFSET_WORDS: u8 = 5;

/// Link-mode bit inside the 3-bit reserved field.
const RESERVED_LINK_MODE: u8 = 0b100;
/// Reserved bits that must stay clear.
const RESERVED_MUST_BE_ZERO: u8 = 0b011;

/// Bit 0 of byte 12 plus bits 7..6 of byte 13 are not modelled (they are the
/// later ECN/nonce bits); encode writes zero and decode rejects them.
const BYTE12_UNUSED_FLAG: u8 = 0b0000_0001;
const BYTE13_UNUSED_FLAGS: u8 = 0b1100_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum HeaderError {
    #[error("data offset {0} is not supported (only {DATA_OFFSET_WORDS} words, no options)")]
    InvalidDataOffset(u8),
    #[error("reserved bits {0:#05b} set outside the link-mode bit")]
    ReservedBitsSet(u8),
    #[error("flag bits outside URG/ACK/PSH/RST/SYN/FIN are set")]
    UnsupportedFlagBits,
    #[error("header truncated: {len} bytes, need {HEADER_LEN}")]
    Truncated { len: usize },
}

/// Link type advertised in the reserved field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LinkMode {
    #[default]
    Wired,
    Wireless,
}

impl LinkMode {
    pub fn bit(self) -> bool {
        matches!(self, LinkMode::Wireless)
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            LinkMode::Wireless
        } else {
            LinkMode::Wired
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TcpFlags {
    pub urg: bool,
    pub ack: bool,
    pub psh: bool,
    pub rst: bool,
    pub syn: bool,
    pub fin: bool,
}

impl TcpFlags {
    fn to_bits(self) -> u8 {
        (self.urg as u8) << 5
            | (self.ack as u8) << 4
            | (self.psh as u8) << 3
            | (self.rst as u8) << 2
            | (self.syn as u8) << 1
            | self.fin as u8
    }

    fn from_bits(bits: u8) -> Self {
        TcpFlags {
            urg: bits & 0x20 != 0,
            ack: bits & 0x10 != 0,
            psh: bits & 0x08 != 0,
            rst: bits & 0x04 != 0,
            syn: bits & 0x02 != 0,
            fin: bits & 0x01 != 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TcpHeader {
    pub source_port: u16,
    pub dest_port: u16,
    pub seq_number: u32,
    pub ack_number: u32,
    /// Header length in 32-bit words.
    pub data_offset: u8,
    /// The 3-bit reserved field, most significant bit is the link-mode bit.
    pub reserved: u8,
    pub flags: TcpFlags,
    pub window: u16,
    pub checksum: u16,
    pub urgent_pointer: u16,
}

impl Default for TcpHeader {
    fn default() -> Self {
        TcpHeader {
            source_port: 0,
            dest_port: 0,
            seq_number: 0,
            ack_number: 0,
            data_offset: DATA_OFFSET_WORDS,
            reserved: 0,
            flags: TcpFlags::default(),
            window: 0,
            checksum: 0,
            urgent_pointer: 0,
        }
    }
}

impl TcpHeader {
    pub fn link_mode(&self) -> LinkMode {
        LinkMode::from_bit(self.reserved & RESERVED_LINK_MODE != 0)
    }

    /// True when reserved bits other than the link-mode bit are set. Only
    /// possible on decoded input; such headers cannot be re-encoded.
    pub fn has_foreign_reserved_bits(&self) -> bool {
        self.reserved & RESERVED_MUST_BE_ZERO != 0
    }

    pub fn validate(&self) -> Result<(), HeaderError> {
        if self.data_offset != DATA_OFFSET_WORDS {
            return Err(HeaderError::InvalidDataOffset(self.data_offset));
        }
        if self.reserved & !RESERVED_LINK_MODE != 0 {
            return Err(HeaderError::ReservedBitsSet(self.reserved));
        }
        Ok(())
    }
}

/// Returns a copy of `h` with the link-mode bit reflecting `mode`.
pub fn set_link_mode(h: TcpHeader, mode: LinkMode) -> TcpHeader {
    let reserved = if mode.bit() {
        h.reserved | RESERVED_LINK_MODE
    } else {
        h.reserved & !RESERVED_LINK_MODE
    };
    TcpHeader { reserved, ..h }
}

pub fn encode_header(h: &TcpHeader) -> Result<[u8; HEADER_LEN], HeaderError> {
    h.validate()?;
    let mut out = [0u8; HEADER_LEN];
    write_fields(h, &mut out);
    Ok(out)
}

fn write_fields(h: &TcpHeader, out: &mut [u8; HEADER_LEN]) {
    out[0..2].copy_from_slice(&h.source_port.to_be_bytes());
    out[2..4].copy_from_slice(&h.dest_port.to_be_bytes());
    out[4..8].copy_from_slice(&h.seq_number.to_be_bytes());
    out[8..12].copy_from_slice(&h.ack_number.to_be_bytes());
    out[12] = (h.data_offset << 4) | ((h.reserved & 0b111) << 1);
    out[13] = h.flags.to_bits();
    out[14..16].copy_from_slice(&h.window.to_be_bytes());
    out[16..18].copy_from_slice(&h.checksum.to_be_bytes());
    out[18..20].copy_from_slice(&h.urgent_pointer.to_be_bytes());
}

/// Decodes the first 20 bytes of `bytes`.
///
/// Foreign reserved bits are kept in [`TcpHeader::reserved`] for inspection
/// (see [`TcpHeader::has_foreign_reserved_bits`]) rather than rejected.
pub fn decode_header(bytes: &[u8]) -> Result<TcpHeader, HeaderError> {
    if bytes.len() < HEADER_LEN {
        return Err(HeaderError::Truncated { len: bytes.len() });
    }
    let be16 = |i: usize| u16::from_be_bytes([bytes[i], bytes[i + 1]]);
    let be32 = |i: usize| u32::from_be_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);

    let data_offset = bytes[12] >> 4;
    if data_offset != DATA_OFFSET_WORDS {
        return Err(HeaderError::InvalidDataOffset(data_offset));
    }
    if bytes[12] & BYTE12_UNUSED_FLAG != 0 || bytes[13] & BYTE13_UNUSED_FLAGS != 0 {
        return Err(HeaderError::UnsupportedFlagBits);
    }
    Ok(TcpHeader {
        source_port: be16(0),
        dest_port: be16(2),
        seq_number: be32(4),
        ack_number: be32(8),
        data_offset,
        reserved: (bytes[12] >> 1) & 0b111,
        flags: TcpFlags::from_bits(bytes[13]),
        window: be16(14),
        checksum: be16(16),
        urgent_pointer: be16(18),
    })
}

fn ones_complement_sum(mut acc: u32, data: &[u8]) -> u32 {
    let mut chunks = data.chunks_exact(2);
    for pair in &mut chunks {
        acc += u32::from(u16::from_be_bytes([pair[0], pair[1]]));
    }
    if let [last] = chunks.remainder() {
        acc += u32::from(*last) << 8;
    }
    acc
}

fn fold(mut acc: u32) -> u16 {
    while acc > 0xFFFF {
        acc = (acc & 0xFFFF) + (acc >> 16);
    }
    acc as u16
}

// Segments are summed separately so every part starts on a word boundary;
// an odd-length part is zero-padded on its own.
fn sum_parts(parts: &[&[u8]]) -> u16 {
    let acc = parts.iter().fold(0u32, |acc, part| {
        fold(ones_complement_sum(acc, part)) as u32
    });
    fold(acc)
}

/// Internet checksum over pseudo-header, header (checksum field zeroed) and
/// payload.
pub fn compute_checksum(h: &TcpHeader, payload: &[u8], pseudo_header: &[u8]) -> u16 {
    let mut bytes = [0u8; HEADER_LEN];
    write_fields(&TcpHeader { checksum: 0, ..*h }, &mut bytes);
    !sum_parts(&[pseudo_header, &bytes, payload])
}

/// Checks an encoded header (checksum included) against its payload.
pub fn verify_checksum(header_bytes: &[u8], payload: &[u8], pseudo_header: &[u8]) -> bool {
    sum_parts(&[pseudo_header, header_bytes, payload]) == 0xFFFF
}

/// Encodes `h` with its checksum field filled in.
pub fn encode_with_checksum(
    h: &TcpHeader,
    payload: &[u8],
    pseudo_header: &[u8],
) -> Result<[u8; HEADER_LEN], HeaderError> {
    h.validate()?;
    let checksum = compute_checksum(h, payload, pseudo_header);
    encode_header(&TcpHeader { checksum, ..*h })
}

/// IPv4-style pseudo-header with zero addresses: the simulator has no IP
/// layer, so only protocol and segment length contribute.
pub fn pseudo_header(segment_len: u16) -> [u8; 12] {
    let mut ph = [0u8; 12];
    ph[9] = 6;
    ph[10..12].copy_from_slice(&segment_len.to_be_bytes());
    ph
}
