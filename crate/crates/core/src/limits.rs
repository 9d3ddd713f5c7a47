/// Size envelopes for the expensive paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Cap on `order^(k+1)` for the cube-parameterised sums.
    pub cube_terms: u128,
    /// Cap on `order^(2k)` for the brute-force octahedral integral.
    pub definition_terms: u128,
    /// Cap on the number of entries of a multi-variable table.
    pub table_entries: u128,
    /// Cap on the number of phases in an enumerated dictionary.
    pub dictionary: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            cube_terms: 100_000_000,
            definition_terms: 100_000_000,
            table_entries: 10_000_000,
            dictionary: 1_000_000,
        }
    }
}

/// `base^exp`, saturating.
pub(crate) fn pow_u128(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

pub(crate) fn ensure(what: &'static str, size: u128, cap: u128) -> crate::Result<()> {
    if size > cap {
        return Err(crate::HofaError::SizeCap { what, size, cap });
    }
    Ok(())
}
