// Copyright 2026 The noonforge Developers
// SPDX-License-Identifier: Apache-2.0

//! Number formatting shared by every CSV writer.

/// Formats `x` with 17 significant digits in scientific notation.
///
/// Seventeen digits round-trip any `f64` exactly, so dumps written twice
/// from the same values compare equal byte for byte.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
