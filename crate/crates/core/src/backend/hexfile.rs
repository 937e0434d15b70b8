// SPDX-License-Identifier: Apache-2.0

//! Memory-image text files: one byte per line as two lowercase hex digits;
//! the address is implicit in the line number.

use crate::rtlsim::MemoryImage;

/// Bytes `[base, base + len)` of `m`.
pub fn to_hex(m: &MemoryImage, base: u32, len: u32) -> String {
    let mut s = String::with_capacity(len as usize * 3);
    for k in 0..len {
        s.push_str(&format!("{:02x}\n", m.read_u8(base.wrapping_add(k))));
    }
    s
}

/// Parses a hex image into an image whose first byte sits at `base`.
pub fn from_hex(text: &str, base: u32) -> Result<MemoryImage, String> {
    let mut m = MemoryImage::new();
    for (k, line) in text.lines().map(str::trim).filter(|l| !l.is_empty()).enumerate() {
        if line.len() != 2 {
            return Err(format!("line {}: expected two hex digits, got '{line}'", k + 1));
        }
        let b = u8::from_str_radix(line, 16).map_err(|_| format!("line {}: bad hex byte '{line}'", k + 1))?;
        m.write_u8(base.wrapping_add(k as u32), b);
    }
    Ok(m)
}

/// Number of bytes in a hex image.
pub fn hex_len(text: &str) -> usize {
    text.lines().filter(|l| !l.trim().is_empty()).count()
}
