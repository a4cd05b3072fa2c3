//! Simulated reduced-precision binary floating-point arithmetic.
//!
//! Values of every format are carried as `f64` numbers that are exactly
//! representable in the target format. Rounding is round-to-nearest,
//! ties-to-even, with gradual underflow onto the subnormal grid and
//! overflow to infinity.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// An IEEE-style binary floating-point format with `exponent_bits` exponent
/// bits and `mantissa_bits` stored fraction bits (implicit leading bit not
/// counted).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FloatFormat {
    name: &'static str,
    exponent_bits: u32,
    mantissa_bits: u32,
}

pub const BFLOAT16: FloatFormat = FloatFormat::new_unchecked("bfloat16", 8, 7);
pub const FP16: FloatFormat = FloatFormat::new_unchecked("fp16", 5, 10);
pub const FP32: FloatFormat = FloatFormat::new_unchecked("fp32", 8, 23);
pub const FP64: FloatFormat = FloatFormat::new_unchecked("fp64", 11, 52);

/// Built-in formats, highest precision first.
pub const BUILTIN_FORMATS: [FloatFormat; 4] = [FP64, FP32, FP16, BFLOAT16];

impl FloatFormat {
    const fn new_unchecked(name: &'static str, exponent_bits: u32, mantissa_bits: u32) -> Self {
        Self {
            name,
            exponent_bits,
            mantissa_bits,
        }
    }

    /// Defines a custom format. The exponent field must fit inside binary64's
    /// range (2..=11 bits) and the fraction must be at most 52 bits wide.
    pub fn custom(
        name: &'static str,
        exponent_bits: u32,
        mantissa_bits: u32,
    ) -> Result<Self, Error> {
        if !(2..=11).contains(&exponent_bits) || !(1..=52).contains(&mantissa_bits) {
            return Err(Error::InvalidFormat {
                exponent_bits,
                mantissa_bits,
            });
        }
        Ok(Self::new_unchecked(name, exponent_bits, mantissa_bits))
    }

    /// Looks up one of the built-in formats by its exact name.
    pub fn from_name(name: &str) -> Result<Self, Error> {
        BUILTIN_FORMATS
            .iter()
            .copied()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::UnknownFormat(name.to_string()))
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn has_subnormals(&self) -> bool {
        true
    }

    fn bias(&self) -> i32 {
        (1 << (self.exponent_bits - 1)) - 1
    }

    /// Exponent of the smallest normal number.
    pub fn emin(&self) -> i32 {
        1 - self.bias()
    }

    /// Exponent of the largest finite number.
    pub fn emax(&self) -> i32 {
        self.bias()
    }

    /// `2^-(mantissa_bits + 1)`.
    pub fn unit_roundoff(&self) -> f64 {
        pow2(-(self.mantissa_bits as i32) - 1)
    }

    pub fn min_normal(&self) -> f64 {
        pow2(self.emin())
    }

    pub fn min_subnormal(&self) -> f64 {
        pow2(self.emin() - self.mantissa_bits as i32)
    }

    pub fn max_finite(&self) -> f64 {
        let m = self.mantissa_bits as i32;
        // (2 - 2^-m) * 2^emax, assembled without overflowing for binary64.
        (2.0 - pow2(-m)) * pow2(self.emax())
    }

    pub fn is_binary64(&self) -> bool {
        self.exponent_bits == 11 && self.mantissa_bits == 52
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

impl FromStr for FloatFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_name(s)
    }
}

/// Exact power of two for exponents in the binary64 range, subnormals
/// included.
pub(crate) fn pow2(k: i32) -> f64 {
    debug_assert!((-1074..=1023).contains(&k));
    if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// `floor(log2(a))` for positive normal `a`; anything below the binary64
/// normal range reports -1023.
fn binary_exponent(a: f64) -> i32 {
    ((a.to_bits() >> 52) & 0x7ff) as i32 - 1023
}

/// Rounds `x` to the nearest value of `fmt` (ties to even).
pub fn round_to_format(x: f64, fmt: FloatFormat) -> f64 {
    if fmt.is_binary64() || !x.is_finite() || x == 0.0 {
        return x;
    }
    let a = x.abs();
    let e = binary_exponent(a).max(fmt.emin());
    if e > fmt.emax() {
        return f64::INFINITY.copysign(x);
    }
    // Spacing of the target grid around `a`. Below 2^emin this is the fixed
    // subnormal spacing. Scaling by a power of two is exact here.
    let quantum = pow2(e - fmt.mantissa_bits as i32);
    let rounded = (a / quantum).round_ties_even() * quantum;
    if rounded > fmt.max_finite() {
        f64::INFINITY.copysign(x)
    } else {
        rounded.copysign(x)
    }
}

/// Elementwise [`round_to_format`].
pub fn round_vector(v: &[f64], fmt: FloatFormat) -> Vec<f64> {
    v.iter().map(|&x| round_to_format(x, fmt)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

/// One arithmetic operation in `fmt`: the binary64 result, rounded to `fmt`.
///
/// For formats with at most 24 fraction bits (bfloat16, fp16, fp32) this is
/// the correctly rounded result in `fmt`: binary64 carries 53 significand
/// bits and 53 >= 2p + 2 for p <= 25, so rounding the exact result first to
/// binary64 and then to `fmt` cannot differ from a single rounding.
#[inline]
pub fn fl(op: Op, a: f64, b: f64, fmt: FloatFormat) -> f64 {
    let exact = match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Mul => a * b,
        Op::Div => a / b,
    };
    round_to_format(exact, fmt)
}
