use crate::error::{Error, Result};
use crate::field::{Basis, Field};

/// Solution operator of `−w'' + w = u` on `(0, π)` with zero boundary values.
pub fn elliptic_apply(u: &Field) -> Result<Field> {
    let Basis::Sine1d { modes } = *u.basis() else {
        return Err(Error::BasisMismatch {
            expected: "sine-1d".into(),
            found: u.basis().to_string(),
        });
    };
    let coeffs = u
        .coeffs()
        .iter()
        .zip(elliptic_symbol(modes))
        .map(|(c, s)| c * s)
        .collect();
    Field::new(*u.basis(), coeffs)
}

/// Diagonal `1/(1 + k²)`, `k = 1..=modes`.
pub fn elliptic_symbol(modes: usize) -> Vec<f64> {
    (1..=modes).map(|k| 1.0 / (1.0 + (k * k) as f64)).collect()
}
