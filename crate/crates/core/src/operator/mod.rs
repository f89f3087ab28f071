//! Approximate operators: accurate LUT/carry-chain netlists plus a binary
//! configuration selecting which removable LUTs stay in the circuit.

mod config;
mod netlist;
mod sim;

use std::fmt;
use std::str::FromStr;

pub use config::{format_bitstring, parse_bitstring, AxoConfig};
pub use netlist::{CellKind, Net, NetlistCell, OperatorNetlist};
pub use sim::Simulator;

use crate::error::{Error, Result};

/// Largest configuration length that may be enumerated exhaustively.
pub const MAX_ENUMERATION_LENGTH: usize = 24;

/// Operator families supported by the netlist generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    UnsignedAdder,
    SignedMultiplier,
}

/// An operator family at a fixed operand width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorKind {
    family: Family,
    width: usize,
}

impl OperatorKind {
    pub fn new(family: Family, width: usize) -> Result<Self> {
        match family {
            Family::UnsignedAdder if (1..=62).contains(&width) => {}
            Family::UnsignedAdder => return Err(Error::InvalidOperator(format!("adder width {width} outside 1..=62"))),
            Family::SignedMultiplier if !width.is_multiple_of(2) => {
                return Err(Error::InvalidOperator(format!("signed multiplier width {width} must be even")))
            }
            // N(N+1)/2 must fit in a 64-bit configuration word.
            Family::SignedMultiplier if (2..=10).contains(&width) => {}
            Family::SignedMultiplier => {
                return Err(Error::InvalidOperator(format!("signed multiplier width {width} outside 2..=10")))
            }
        }
        Ok(Self { family, width })
    }

    pub fn adder(width: usize) -> Result<Self> {
        Self::new(Family::UnsignedAdder, width)
    }

    pub fn multiplier(width: usize) -> Result<Self> {
        Self::new(Family::SignedMultiplier, width)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Operand width N in bits.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of removable LUTs, i.e. the configuration length L.
    pub fn config_length(&self) -> usize {
        match self.family {
            Family::UnsignedAdder => self.width,
            Family::SignedMultiplier => self.width * (self.width + 1) / 2,
        }
    }

    /// Number of result bits.
    pub fn output_width(&self) -> usize {
        match self.family {
            Family::UnsignedAdder => self.width + 1,
            Family::SignedMultiplier => 2 * self.width,
        }
    }

    /// Inclusive operand range.
    pub fn operand_range(&self) -> (i64, i64) {
        match self.family {
            Family::UnsignedAdder => (0, (1i64 << self.width) - 1),
            Family::SignedMultiplier => {
                let half = 1i64 << (self.width - 1);
                (-half, half - 1)
            }
        }
    }

    pub fn check_operand(&self, value: i64) -> Result<()> {
        let (min, max) = self.operand_range();
        if value < min || value > max {
            return Err(Error::OperandOutOfRange { value, min, max });
        }
        Ok(())
    }

    /// Exact result of the accurate operator.
    pub fn exact(&self, a: i64, b: i64) -> i64 {
        match self.family {
            Family::UnsignedAdder => a + b,
            Family::SignedMultiplier => a * b,
        }
    }

    /// Short identifier of the family as used in file preambles.
    pub fn family_token(&self) -> &'static str {
        match self.family {
            Family::UnsignedAdder => "adder",
            Family::SignedMultiplier => "mul",
        }
    }
}

impl fmt::Display for OperatorKind {
    /// Formats as `adder:u8` or `mul:s4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.family {
            Family::UnsignedAdder => 'u',
            Family::SignedMultiplier => 's',
        };
        write!(f, "{}:{}{}", self.family_token(), sign, self.width)
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    /// Accepts `adder:u8`, `adder:8`, `mul:s4`, `mul:4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidOperator(format!("cannot parse operator '{s}'"));
        let (family, width) = s.trim().split_once(':').ok_or_else(bad)?;
        let (family, sign) = match family.to_ascii_lowercase().as_str() {
            "adder" | "add" => (Family::UnsignedAdder, 'u'),
            "mul" | "multiplier" => (Family::SignedMultiplier, 's'),
            _ => return Err(bad()),
        };
        let digits = width.strip_prefix(sign).unwrap_or(width);
        let width = digits.parse::<usize>().map_err(|_| bad())?;
        Self::new(family, width)
    }
}

/// Every configuration of `kind` in ascending UINT order.
pub fn enumerate_configs(kind: OperatorKind, include_all_zeros: bool) -> Result<Vec<AxoConfig>> {
    let len = kind.config_length();
    if len > MAX_ENUMERATION_LENGTH {
        return Err(Error::Capacity(format!(
            "refusing to enumerate 2^{len} configurations of {kind} (limit 2^{MAX_ENUMERATION_LENGTH})"
        )));
    }
    let start = if include_all_zeros { 0 } else { 1 };
    (start..(1u64 << len)).map(|u| AxoConfig::from_uint(u, len)).collect()
}
