//! Bit-vector helpers.
//!
//! Keys, words and syndromes are stored unpacked, one `u8` per bit holding
//! `0` or `1`. Packing is only used on the wire.

/// Packs `bits` MSB-first into bytes. The tail of the last byte is zero.
pub fn pack(bits: &[u8]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (i, &b) in bits.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 8] |= 0x80 >> (i % 8);
        }
    }
    out
}

/// Unpacks the first `len` bits of `bytes` (MSB-first).
///
/// Returns `None` when `bytes` is too short to hold `len` bits.
pub fn unpack(bytes: &[u8], len: usize) -> Option<Vec<u8>> {
    if bytes.len() * 8 < len {
        return None;
    }
    Some((0..len).map(|i| (bytes[i / 8] >> (7 - i % 8)) & 1).collect())
}

/// Number of positions where `a` and `b` differ.
pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

/// Parses a string of `0`/`1` characters, ignoring ASCII whitespace.
pub fn parse_bitstring(s: &str) -> Option<Vec<u8>> {
    s.chars()
        .filter(|c| !c.is_ascii_whitespace())
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect()
}

pub fn to_bitstring(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pack_layout_is_msb_first() {
        assert_eq!(pack(&[1, 0, 0, 0, 0, 0, 0, 1, 1]), vec![0x81, 0x80]);
        assert_eq!(unpack(&[0x81], 9), None);
    }

    #[test]
    fn bitstring_rejects_other_chars() {
        assert_eq!(parse_bitstring("10 1\n"), Some(vec![1, 0, 1]));
        assert_eq!(parse_bitstring("102"), None);
    }

    proptest! {
        #[test]
        fn pack_unpack_roundtrip(bits in proptest::collection::vec(0u8..2, 0..200)) {
            prop_assert_eq!(unpack(&pack(&bits), bits.len()).unwrap(), bits);
        }
    }
}
