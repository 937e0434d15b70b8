// SPDX-License-Identifier: Apache-2.0

//! Bit-level scalar semantics shared by constant folding, the reference
//! interpreter, the CDFG evaluator and the FSMD simulator.
//!
//! Values are carried as `u64` bit patterns masked to their width.

use crate::frontend::typed::{TBinOp, TUnOp};
use crate::frontend::types::ScalarType;

#[inline]
pub fn mask(width: u8) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Sign-extends the low `width` bits of `v` to an `i64`.
#[inline]
pub fn sext(v: u64, width: u8) -> i64 {
    if width >= 64 {
        v as i64
    } else {
        let sh = 64 - width as u32;
        ((v << sh) as i64) >> sh
    }
}

pub fn add(a: u64, b: u64, w: u8) -> u64 {
    a.wrapping_add(b) & mask(w)
}

pub fn sub(a: u64, b: u64, w: u8) -> u64 {
    a.wrapping_sub(b) & mask(w)
}

pub fn mul(a: u64, b: u64, w: u8) -> u64 {
    a.wrapping_mul(b) & mask(w)
}

/// Truncating division; a zero divisor yields all ones and `MIN / -1` wraps.
pub fn div(a: u64, b: u64, w: u8, signed: bool) -> u64 {
    let (a, b) = (a & mask(w), b & mask(w));
    if b == 0 {
        return mask(w);
    }
    if signed {
        (sext(a, w).wrapping_div(sext(b, w)) as u64) & mask(w)
    } else {
        a / b
    }
}

/// Remainder with the sign of the dividend; a zero divisor yields the dividend.
pub fn rem(a: u64, b: u64, w: u8, signed: bool) -> u64 {
    let (a, b) = (a & mask(w), b & mask(w));
    if b == 0 {
        return a;
    }
    if signed {
        (sext(a, w).wrapping_rem(sext(b, w)) as u64) & mask(w)
    } else {
        a % b
    }
}

/// Shift amounts are unsigned; amounts of at least the width shift everything out.
pub fn shl(a: u64, amt: u64, w: u8) -> u64 {
    if amt >= w as u64 {
        0
    } else {
        (a << amt) & mask(w)
    }
}

pub fn shr(a: u64, amt: u64, w: u8, arith: bool) -> u64 {
    let a = a & mask(w);
    if arith {
        // shifting by width-1 already fills with the sign
        (sext(a, w) >> amt.min(w as u64 - 1)) as u64 & mask(w)
    } else if amt >= w as u64 {
        0
    } else {
        a >> amt
    }
}

pub fn lt(a: u64, b: u64, w: u8, signed: bool) -> bool {
    if signed {
        sext(a, w) < sext(b, w)
    } else {
        (a & mask(w)) < (b & mask(w))
    }
}

/// Converts between widths: extension by the source signedness, or truncation.
pub fn resize(v: u64, from: u8, signed: bool, to: u8) -> u64 {
    let x = if signed { sext(v, from) as u64 } else { v & mask(from) };
    x & mask(to)
}

/// Applies a typed binary operator. For shifts `lt` is the left operand type and
/// `rt` the amount type; otherwise both operands have type `lt`.
pub fn eval_binary(op: TBinOp, a: u64, b: u64, lt_: ScalarType, rt: ScalarType) -> u64 {
    let w = lt_.width();
    let s = lt_.signed();
    let b_ = b & mask(rt.width());
    match op {
        TBinOp::Add => add(a, b, w),
        TBinOp::Sub => sub(a, b, w),
        TBinOp::Mul => mul(a, b, w),
        TBinOp::Div => div(a, b, w, s),
        TBinOp::Rem => rem(a, b, w, s),
        TBinOp::Shl => shl(a, b_, w),
        TBinOp::Shr => shr(a, b_, w, s),
        TBinOp::And => a & b & mask(w),
        TBinOp::Or => (a | b) & mask(w),
        TBinOp::Xor => (a ^ b) & mask(w),
        TBinOp::Eq => (a & mask(w) == b & mask(w)) as u64,
        TBinOp::Ne => (a & mask(w) != b & mask(w)) as u64,
        TBinOp::Lt => lt(a, b, w, s) as u64,
        TBinOp::Le => (!lt(b, a, w, s)) as u64,
        TBinOp::Gt => lt(b, a, w, s) as u64,
        TBinOp::Ge => (!lt(a, b, w, s)) as u64,
        TBinOp::LAnd => (a != 0 && b != 0) as u64,
        TBinOp::LOr => (a != 0 || b != 0) as u64,
    }
}

pub fn eval_unary(op: TUnOp, a: u64, ty: ScalarType) -> u64 {
    let w = ty.width();
    match op {
        TUnOp::Neg => a.wrapping_neg() & mask(w),
        TUnOp::BitNot => !a & mask(w),
        TUnOp::LNot => (a & mask(w) == 0) as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_conventions() {
        assert_eq!(div(7, 0, 8, false), 0xff);
        assert_eq!(rem(7, 0, 8, true), 7);
        assert_eq!(div(0x80, 0xff, 8, true), 0x80);
        assert_eq!(div(u64::MAX - 6, 2, 64, true) as i64, -3);
        assert_eq!(rem(0xf9, 2, 8, true), 0xff);
    }

    #[test]
    fn shift_conventions() {
        assert_eq!(shl(1, 8, 8), 0);
        assert_eq!(shr(0x80, 9, 8, true), 0xff);
        assert_eq!(shr(0x40, 9, 8, true), 0);
        assert_eq!(shr(0x80, 7, 8, true), 0xff);
        assert_eq!(shr(0x80, 3, 8, false), 0x10);
        assert_eq!(shr(1 << 63, 100, 64, true), u64::MAX);
    }

    #[test]
    fn wraps() {
        let t = ScalarType::I32;
        let r = eval_binary(TBinOp::Add, 0x7fff_ffff, 1, t, t);
        assert_eq!(sext(r, 32), i32::MIN as i64);
    }
}
