//! Exact summation of `f64` values.
//!
//! A sum is held as a two's-complement fixed-point integer in units of `2^-1074` (the
//! smallest subnormal), wide enough for every finite double plus ~78 bits of carry room.
//! Adding and subtracting are exact and reversible, and [`ExactSum::round`] returns the
//! correctly rounded (half-to-even) double. Two sums that hold the same real value therefore
//! round to the same bits no matter in which order their terms arrived.

const LIMBS: usize = 34;
const MANT_BITS: u32 = 52;

#[derive(Clone, PartialEq, Eq)]
pub struct ExactSum {
    limbs: [u64; LIMBS],
}

impl std::fmt::Debug for ExactSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ExactSum({:e})", self.round())
    }
}

impl Default for ExactSum {
    fn default() -> Self {
        Self::zero()
    }
}

/// `(m, shift)` with `|x| = m · 2^(shift − 1074)`.
fn decompose(x: f64) -> (u64, u32) {
    let bits = x.to_bits();
    let exp = ((bits >> MANT_BITS) & 0x7ff) as u32;
    let mant = bits & ((1u64 << MANT_BITS) - 1);
    if exp == 0 {
        (mant, 0)
    } else {
        (mant | (1u64 << MANT_BITS), exp - 1)
    }
}

impl ExactSum {
    pub fn zero() -> Self {
        Self { limbs: [0; LIMBS] }
    }

    pub fn from_f64(x: f64) -> Self {
        let mut s = Self::zero();
        s.add(x);
        s
    }

    fn is_negative(&self) -> bool {
        self.limbs[LIMBS - 1] >> 63 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    fn add_magnitude(&mut self, m: u64, shift: u32) {
        let idx = (shift / 64) as usize;
        let off = shift % 64;
        let wide = (m as u128) << off;
        let mut carry = wide;
        let mut i = idx;
        while carry != 0 && i < LIMBS {
            let sum = self.limbs[i] as u128 + (carry & u64::MAX as u128);
            self.limbs[i] = sum as u64;
            carry = (carry >> 64) + (sum >> 64);
            i += 1;
        }
    }

    fn sub_magnitude(&mut self, m: u64, shift: u32) {
        let idx = (shift / 64) as usize;
        let off = shift % 64;
        let wide = (m as u128) << off;
        let mut borrow = wide;
        let mut i = idx;
        while borrow != 0 && i < LIMBS {
            let take = borrow & u64::MAX as u128;
            let (res, under) = self.limbs[i].overflowing_sub(take as u64);
            self.limbs[i] = res;
            borrow = (borrow >> 64) + under as u128;
            i += 1;
        }
    }

    /// Adds a finite `x` exactly.
    pub fn add(&mut self, x: f64) {
        debug_assert!(x.is_finite());
        let (m, shift) = decompose(x);
        if m == 0 {
            return;
        }
        if x.is_sign_negative() {
            self.sub_magnitude(m, shift);
        } else {
            self.add_magnitude(m, shift);
        }
    }

    /// Subtracts a finite `x` exactly.
    pub fn sub(&mut self, x: f64) {
        self.add(-x);
    }

    pub fn add_sum(&mut self, other: &ExactSum) {
        let mut carry = 0u128;
        for (a, b) in self.limbs.iter_mut().zip(other.limbs.iter()) {
            let s = *a as u128 + *b as u128 + carry;
            *a = s as u64;
            carry = s >> 64;
        }
    }

    fn negated_limbs(&self) -> [u64; LIMBS] {
        let mut out = [0u64; LIMBS];
        let mut carry = 1u128;
        for (o, l) in out.iter_mut().zip(self.limbs.iter()) {
            let s = (!*l) as u128 + carry;
            *o = s as u64;
            carry = s >> 64;
        }
        out
    }

    pub fn negate(&mut self) {
        self.limbs = self.negated_limbs();
    }

    /// Correctly rounded value (round half to even).
    pub fn round(&self) -> f64 {
        let negative = self.is_negative();
        let mag = if negative {
            self.negated_limbs()
        } else {
            self.limbs
        };
        let v = round_magnitude(&mag);
        if negative {
            -v
        } else {
            v
        }
    }
}

fn bit(mag: &[u64; LIMBS], pos: u32) -> u64 {
    (mag[(pos / 64) as usize] >> (pos % 64)) & 1
}

/// Bits `[pos, pos + len)` with `len ≤ 64`.
fn bits(mag: &[u64; LIMBS], pos: u32, len: u32) -> u64 {
    let idx = (pos / 64) as usize;
    let off = pos % 64;
    let lo = mag[idx] as u128;
    let hi = if idx + 1 < LIMBS { mag[idx + 1] as u128 } else { 0 };
    let wide = (lo | (hi << 64)) >> off;
    let mask = if len == 64 { u64::MAX as u128 } else { (1u128 << len) - 1 };
    (wide & mask) as u64
}

fn any_below(mag: &[u64; LIMBS], pos: u32) -> bool {
    let idx = (pos / 64) as usize;
    if mag[..idx].iter().any(|&l| l != 0) {
        return true;
    }
    let off = pos % 64;
    off > 0 && mag[idx] & ((1u64 << off) - 1) != 0
}

fn round_magnitude(mag: &[u64; LIMBS]) -> f64 {
    let Some(top) = (0..LIMBS).rev().find(|&i| mag[i] != 0) else {
        return 0.0;
    };
    let p = top as u32 * 64 + 63 - mag[top].leading_zeros();
    if p <= MANT_BITS {
        // Fits in the significand; the bit pattern is the value itself.
        return f64::from_bits(mag[0]);
    }
    let drop = p - MANT_BITS;
    let mut q = bits(mag, drop, MANT_BITS + 1);
    let half = bit(mag, drop - 1) == 1;
    if half && (any_below(mag, drop - 1) || q & 1 == 1) {
        q += 1;
    }
    let mut p = p;
    if q == 1u64 << (MANT_BITS + 1) {
        q >>= 1;
        p += 1;
    }
    let biased = p as u64 - 51;
    if biased >= 0x7ff {
        return f64::INFINITY;
    }
    f64::from_bits((biased << MANT_BITS) | (q & ((1u64 << MANT_BITS) - 1)))
}

/// A vector of exact sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactVector {
    coords: Vec<ExactSum>,
}

impl ExactVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            coords: vec![ExactSum::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn add(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.coords.len());
        for (c, &x) in self.coords.iter_mut().zip(v) {
            c.add(x);
        }
    }

    pub fn sub(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.coords.len());
        for (c, &x) in self.coords.iter_mut().zip(v) {
            c.sub(x);
        }
    }

    pub fn round(&self) -> Vec<f64> {
        self.coords.iter().map(ExactSum::round).collect()
    }

    /// Rounds `−self` without modifying it.
    pub fn round_negated(&self) -> Vec<f64> {
        self.coords.iter().map(|c| -c.round()).collect()
    }
}
