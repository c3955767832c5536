//! MSB-first bit streams.
//!
//! [`BitStream`] owns a byte buffer plus an exact bit length; the unused tail
//! of the last byte is always zero so streams can be compared byte-for-byte.
//! [`BitReader`] walks a borrowed stream with a bit cursor.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("bit count {0} outside 1..=64")]
    InvalidWidth(u32),
    #[error("value {value:#x} does not fit in {nbits} bits")]
    ValueTooWide { value: u64, nbits: u32 },
    #[error("truncated stream: need {needed} bits at offset {cursor}, only {available} available")]
    Truncated {
        cursor: usize,
        needed: usize,
        available: usize,
    },
    #[error("bit length {bit_length} exceeds buffer of {bytes} bytes")]
    BadLength { bit_length: usize, bytes: usize },
}

/// A prefix codeword: the low `length` bits of `bits`, emitted MSB first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codeword {
    pub bits: u64,
    pub length: u8,
}

impl Codeword {
    pub fn new(bits: u64, length: u8) -> Result<Self, BitError> {
        if !(1..=64).contains(&length) {
            return Err(BitError::InvalidWidth(length as u32));
        }
        if length < 64 && bits >> length != 0 {
            return Err(BitError::ValueTooWide {
                value: bits,
                nbits: length as u32,
            });
        }
        Ok(Codeword { bits, length })
    }

    /// True if `self` is a prefix of `other` (or equal to it).
    pub fn is_prefix_of(&self, other: &Codeword) -> bool {
        self.length <= other.length && other.bits >> (other.length - self.length) == self.bits
    }
}

impl std::fmt::Display for Codeword {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in (0..self.length).rev() {
            f.write_str(if (self.bits >> i) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitStream {
    buffer: Vec<u8>,
    bit_length: usize,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity_bits(bits: usize) -> Self {
        BitStream {
            buffer: Vec::with_capacity(bits.div_ceil(8)),
            bit_length: 0,
        }
    }

    /// Wraps raw bytes holding `bit_length` valid bits. Padding bits are cleared.
    pub fn from_bytes(mut buffer: Vec<u8>, bit_length: usize) -> Result<Self, BitError> {
        if bit_length > buffer.len() * 8 {
            return Err(BitError::BadLength {
                bit_length,
                bytes: buffer.len(),
            });
        }
        buffer.truncate(bit_length.div_ceil(8));
        let rem = bit_length % 8;
        if rem != 0 {
            if let Some(last) = buffer.last_mut() {
                *last &= 0xFFu8 << (8 - rem);
            }
        }
        Ok(BitStream { buffer, bit_length })
    }

    pub fn bit_length(&self) -> usize {
        self.bit_length
    }

    pub fn is_empty(&self) -> bool {
        self.bit_length == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buffer
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buffer
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader::new(self)
    }

    pub fn write_bit(&mut self, bit: bool) {
        let off = self.bit_length % 8;
        if off == 0 {
            self.buffer.push(0);
        }
        if bit {
            *self.buffer.last_mut().expect("pushed above") |= 0x80 >> off;
        }
        self.bit_length += 1;
    }

    /// Appends the low `nbits` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, nbits: u32) -> Result<(), BitError> {
        if !(1..=64).contains(&nbits) {
            return Err(BitError::InvalidWidth(nbits));
        }
        if nbits < 64 && value >> nbits != 0 {
            return Err(BitError::ValueTooWide { value, nbits });
        }
        let mut remaining = nbits;
        while remaining > 0 {
            let off = (self.bit_length % 8) as u32;
            if off == 0 {
                self.buffer.push(0);
            }
            let room = 8 - off;
            let take = room.min(remaining);
            let chunk = ((value >> (remaining - take)) & ((1u64 << take) - 1)) as u8;
            *self.buffer.last_mut().expect("non-empty") |= chunk << (room - take);
            self.bit_length += take as usize;
            remaining -= take;
        }
        Ok(())
    }

    pub fn write_codeword(&mut self, cw: Codeword) {
        self.write_bits(cw.bits, cw.length as u32)
            .expect("codeword invariants checked at construction");
    }

    /// Appends every bit of `other`.
    pub fn append(&mut self, other: &BitStream) {
        let mut r = other.reader();
        while r.remaining() >= 64 {
            let v = r.read_bits(64).expect("remaining checked");
            self.write_bits(v, 64).expect("64-bit chunk");
        }
        let rest = r.remaining() as u32;
        if rest > 0 {
            let v = r.read_bits(rest).expect("remaining checked");
            self.write_bits(v, rest).expect("short chunk");
        }
    }
}

/// Sequential reader over a [`BitStream`] or a raw byte slice.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit_length: usize,
    cursor: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(stream: &'a BitStream) -> Self {
        BitReader {
            bytes: &stream.buffer,
            bit_length: stream.bit_length,
            cursor: 0,
        }
    }

    /// Reader over all `bytes.len() * 8` bits of a slice.
    pub fn from_slice(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            bit_length: bytes.len() * 8,
            cursor: 0,
        }
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.bit_length - self.cursor
    }

    pub fn seek(&mut self, cursor: usize) -> Result<(), BitError> {
        if cursor > self.bit_length {
            return Err(BitError::Truncated {
                cursor,
                needed: 0,
                available: self.bit_length,
            });
        }
        self.cursor = cursor;
        Ok(())
    }

    pub fn read_bit(&mut self) -> Result<bool, BitError> {
        if self.cursor >= self.bit_length {
            return Err(self.truncated(1));
        }
        let byte = self.bytes[self.cursor / 8];
        let bit = (byte >> (7 - self.cursor % 8)) & 1 == 1;
        self.cursor += 1;
        Ok(bit)
    }

    pub fn read_bits(&mut self, nbits: u32) -> Result<u64, BitError> {
        if !(1..=64).contains(&nbits) {
            return Err(BitError::InvalidWidth(nbits));
        }
        if self.remaining() < nbits as usize {
            return Err(self.truncated(nbits as usize));
        }
        let mut value = 0u64;
        let mut remaining = nbits;
        while remaining > 0 {
            let off = (self.cursor % 8) as u32;
            let avail = 8 - off;
            let take = avail.min(remaining);
            let byte = self.bytes[self.cursor / 8] as u64;
            let chunk = (byte >> (avail - take)) & ((1u64 << take) - 1);
            value = (value << take) | chunk;
            self.cursor += take as usize;
            remaining -= take;
        }
        Ok(value)
    }

    fn truncated(&self, needed: usize) -> BitError {
        BitError::Truncated {
            cursor: self.cursor,
            needed,
            available: self.bit_length,
        }
    }
}

/// Reads `nbits` at `cursor` and returns the value with the advanced cursor.
pub fn read_bits_at(stream: &BitStream, cursor: usize, nbits: u32) -> Result<(u64, usize), BitError> {
    let mut r = stream.reader();
    r.seek(cursor)?;
    let v = r.read_bits(nbits)?;
    Ok((v, r.cursor()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_msb_first() {
        let mut s = BitStream::new();
        s.write_bits(5, 3).unwrap();
        assert_eq!(s.bit_length(), 3);
        assert_eq!(s.as_bytes(), &[0b1010_0000]);

        let mut z = BitStream::new();
        z.write_bits(0, 1).unwrap();
        assert_eq!(z.bit_length(), 1);
        assert_eq!(z.as_bytes(), &[0]);
    }

    #[test]
    fn read_back_and_truncation() {
        let mut s = BitStream::new();
        s.write_bits(5, 3).unwrap();
        assert_eq!(read_bits_at(&s, 0, 3).unwrap(), (5, 3));
        assert!(matches!(
            read_bits_at(&s, 3, 1),
            Err(BitError::Truncated { .. })
        ));
    }

    #[test]
    fn mixed_widths() {
        let mut s = BitStream::new();
        s.write_bits(0xAB, 8).unwrap();
        s.write_bits(0x3, 2).unwrap();
        assert_eq!(s.bit_length(), 10);
        let mut r = s.reader();
        assert_eq!(r.read_bits(8).unwrap(), 0xAB);
        assert_eq!(r.read_bits(2).unwrap(), 0x3);
        assert_eq!(r.remaining(), 0);
    }

    #[test]
    fn full_width_values() {
        let mut s = BitStream::new();
        s.write_bit(true);
        s.write_bits(u64::MAX, 64).unwrap();
        s.write_bits(0x8000_0000_0000_0001, 64).unwrap();
        let mut r = s.reader();
        assert!(r.read_bit().unwrap());
        assert_eq!(r.read_bits(64).unwrap(), u64::MAX);
        assert_eq!(r.read_bits(64).unwrap(), 0x8000_0000_0000_0001);
    }

    #[test]
    fn rejects_bad_writes() {
        let mut s = BitStream::new();
        assert_eq!(s.write_bits(1, 0), Err(BitError::InvalidWidth(0)));
        assert_eq!(s.write_bits(1, 65), Err(BitError::InvalidWidth(65)));
        assert!(matches!(
            s.write_bits(8, 3),
            Err(BitError::ValueTooWide { .. })
        ));
        assert_eq!(s.bit_length(), 0);
    }

    #[test]
    fn from_bytes_clears_padding() {
        let s = BitStream::from_bytes(vec![0xFF, 0xFF], 9).unwrap();
        assert_eq!(s.as_bytes(), &[0xFF, 0x80]);
        assert!(BitStream::from_bytes(vec![0], 9).is_err());
    }

    #[test]
    fn codeword_prefix_relation() {
        let a = Codeword::new(0b10, 2).unwrap();
        let b = Codeword::new(0b101, 3).unwrap();
        let c = Codeword::new(0b111, 3).unwrap();
        assert!(a.is_prefix_of(&b));
        assert!(!a.is_prefix_of(&c));
        assert!(!b.is_prefix_of(&a));
        assert_eq!(b.to_string(), "101");
        assert!(Codeword::new(4, 2).is_err());
        assert!(Codeword::new(0, 0).is_err());
    }

    fn field() -> impl Strategy<Value = (u64, u32)> {
        (1u32..=64).prop_flat_map(|n| {
            let max = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
            (0..=max, Just(n))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip(fields in prop::collection::vec(field(), 0..40)) {
            let mut s = BitStream::new();
            for &(v, n) in &fields {
                s.write_bits(v, n).unwrap();
            }
            let total: usize = fields.iter().map(|f| f.1 as usize).sum();
            prop_assert_eq!(s.bit_length(), total);
            prop_assert!(s.bit_length() <= s.as_bytes().len() * 8);
            if total % 8 != 0 {
                let last = *s.as_bytes().last().unwrap();
                prop_assert_eq!(last & (0xFF >> (total % 8)), 0);
            }
            let mut r = s.reader();
            for &(v, n) in &fields {
                prop_assert_eq!(r.read_bits(n).unwrap(), v);
            }
            prop_assert_eq!(r.remaining(), 0);
        }

        #[test]
        fn concatenation_keeps_prefix(a in prop::collection::vec(field(), 0..10),
                                      b in prop::collection::vec(field(), 0..10)) {
            let mut sa = BitStream::new();
            for &(v, n) in &a { sa.write_bits(v, n).unwrap(); }
            let mut sb = BitStream::new();
            for &(v, n) in &b { sb.write_bits(v, n).unwrap(); }
            let mut joined = sa.clone();
            joined.append(&sb);
            prop_assert_eq!(joined.bit_length(), sa.bit_length() + sb.bit_length());
            let mut r = joined.reader();
            let mut ra = sa.reader();
            for _ in 0..sa.bit_length() {
                prop_assert_eq!(r.read_bit().unwrap(), ra.read_bit().unwrap());
            }
        }
    }
}
