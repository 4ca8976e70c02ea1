//! Reference 3-user networks used across tests, the CLI and the docs.

use crate::model::ChannelMatrix;

/// 3-user network whose TINA region is
/// `d1<=2, d2<=1, d3<=1.5, d1+d2<=2.3, d2+d3<=1.5, d1+d3<=2.4, d1+d2+d3<=2.5`.
pub fn fix_a() -> ChannelMatrix {
    ChannelMatrix::new(vec![
        vec![2.0, 0.5, 0.1],
        vec![0.2, 1.0, 0.5],
        vec![1.0, 0.5, 1.5],
    ])
    .expect("valid fixture")
}

/// 3-user network satisfying the relaxed strength condition everywhere while the
/// GNAJ condition fails for users 1 and 2; its optimal matching uses the zero link 1->3.
pub fn fix_b() -> ChannelMatrix {
    ChannelMatrix::new(vec![
        vec![1.0, 0.3, 0.0],
        vec![0.6, 1.0, 0.1],
        vec![0.8, 0.6, 1.0],
    ])
    .expect("valid fixture")
}

/// FNV-1a digest of a matrix's bit pattern, printed by `--version`.
pub fn checksum(alpha: &ChannelMatrix) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for x in alpha.as_slice() {
        for b in x.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}
