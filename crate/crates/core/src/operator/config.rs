use std::fmt;

use crate::error::{Error, Result};

/// Ordered tuple `(l_0, ..., l_{L-1})` of LUT usage bits.
///
/// `l_i = 1` keeps removable LUT `i`; `l_i = 0` removes it. The UINT
/// encoding is `sum(l_i * 2^i)`, so `l_0` is the least significant bit.
/// Bitstrings are written most significant first, `l_{L-1} ... l_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxoConfig {
    bits: u64,
    len: u8,
}

impl AxoConfig {
    pub const MAX_LEN: usize = 64;

    pub fn from_uint(value: u64, len: usize) -> Result<Self> {
        if len == 0 || len > Self::MAX_LEN {
            return Err(Error::InvalidParam(format!("configuration length {len} outside 1..=64")));
        }
        if len < 64 && value >> len != 0 {
            return Err(Error::ConfigRange { value, len });
        }
        Ok(Self { bits: value, len: len as u8 })
    }

    /// Builds a configuration from `(l_0, l_1, ...)`; every entry must be 0 or 1.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let mut value = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => value |= 1 << i,
                _ => return Err(Error::InvalidParam(format!("bit {i} is {b}, not 0/1"))),
            }
        }
        Self::from_uint(value, bits.len())
    }

    pub fn all_ones(len: usize) -> Result<Self> {
        let value = if len >= 64 { u64::MAX } else { (1u64 << len) - 1 };
        Self::from_uint(value, len)
    }

    pub fn zeros(len: usize) -> Result<Self> {
        Self::from_uint(0, len)
    }

    pub fn to_uint(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, index: usize) -> bool {
        index < self.len() && (self.bits >> index) & 1 == 1
    }

    pub fn with_bit(mut self, index: usize, value: bool) -> Self {
        assert!(index < self.len(), "bit {index} outside {}-bit configuration", self.len);
        if value {
            self.bits |= 1 << index;
        } else {
            self.bits &= !(1 << index);
        }
        self
    }

    /// Number of LUTs kept.
    pub fn popcount(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_all_zeros(&self) -> bool {
        self.bits == 0
    }

    /// `(l_0, ..., l_{L-1})` as 0/1 bytes.
    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len()).map(|i| self.bit(i) as u8).collect()
    }

    pub fn hamming(&self, other: &AxoConfig) -> usize {
        (self.bits ^ other.bits).count_ones() as usize
    }

    /// Parses a bitstring written `l_{L-1} ... l_0`.
    pub fn parse_bitstring(s: &str) -> Result<Self> {
        let bits = parse_bitstring(s)?;
        Self::from_bits(&bits)
    }

    pub fn to_bitstring(&self) -> String {
        format_bitstring(&self.to_bits())
    }
}

impl fmt::Display for AxoConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// Formats a bit vector indexed from 0 as a string with index 0 rightmost.
pub fn format_bitstring(bits: &[u8]) -> String {
    bits.iter().rev().map(|&b| if b == 1 { '1' } else { '0' }).collect()
}

/// Inverse of [`format_bitstring`].
pub fn parse_bitstring(s: &str) -> Result<Vec<u8>> {
    if s.is_empty() {
        return Err(Error::InvalidParam("empty bitstring".into()));
    }
    s.chars()
        .rev()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::InvalidParam(format!("invalid character '{c}' in bitstring '{s}'"))),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uint_encoding_is_lsb_first() {
        let c = AxoConfig::from_uint(5, 4).unwrap();
        assert_eq!(c.to_bits(), vec![1, 0, 1, 0]);
        assert_eq!(AxoConfig::from_bits(&[1, 1, 1]).unwrap().to_uint(), 7);
        assert_eq!(c.to_bitstring(), "0101");
    }

    #[test]
    fn round_trip_small() {
        for u in 0..16 {
            assert_eq!(AxoConfig::from_uint(u, 4).unwrap().to_uint(), u);
        }
    }

    #[test]
    fn out_of_range_value() {
        assert!(matches!(AxoConfig::from_uint(16, 4), Err(Error::ConfigRange { value: 16, len: 4 })));
    }

    #[test]
    fn malformed_bitstring() {
        assert!(AxoConfig::parse_bitstring("10x1").is_err());
    }

    proptest! {
        #[test]
        fn bitstring_round_trip(len in 1usize..=64, raw in any::<u64>()) {
            let value = if len == 64 { raw } else { raw & ((1u64 << len) - 1) };
            let c = AxoConfig::from_uint(value, len).unwrap();
            prop_assert_eq!(AxoConfig::parse_bitstring(&c.to_bitstring()).unwrap(), c);
            prop_assert_eq!(AxoConfig::from_bits(&c.to_bits()).unwrap(), c);
        }
    }
}
