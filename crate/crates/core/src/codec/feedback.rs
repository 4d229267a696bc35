use serde::{Deserialize, Serialize};

use super::Symbol;
use crate::{Error, Result};

/// `g_f(y^N)`: lexicographic rank of `y^N` (first symbol most significant)
/// modulo `s_size`.
pub fn key_from_feedback(y_prev: &[Symbol], ny: usize, s_size: usize) -> Result<usize> {
    if s_size == 0 || ny == 0 {
        return Err(Error::Parameter("key and output alphabets must be nonempty".into()));
    }
    let n = i32::try_from(y_prev.len()).unwrap_or(i32::MAX);
    if (ny as f64).powi(n) < s_size as f64 - 0.5 {
        return Err(Error::Parameter(format!(
            "|Y|^N = {ny}^{} is smaller than the key space {s_size}",
            y_prev.len()
        )));
    }
    let (ny, s) = (ny as u128, s_size as u128);
    let mut r: u128 = 0;
    for &y in y_prev {
        if y as u128 >= ny {
            return Err(Error::Parameter(format!("output symbol {y} outside alphabet of size {ny}")));
        }
        r = (r * ny + y as u128) % s;
    }
    Ok(r as usize)
}

fn check_range(name: &str, x: usize, modulus: usize) -> Result<()> {
    if x >= modulus {
        return Err(Error::Parameter(format!("{name} = {x} outside 0..{modulus}")));
    }
    Ok(())
}

/// `(s + k) mod modulus`
pub fn encrypt(s: usize, key: usize, modulus: usize) -> Result<usize> {
    check_range("message", s, modulus)?;
    check_range("key", key, modulus)?;
    Ok((s + key) % modulus)
}

/// `(c - k) mod modulus`
pub fn decrypt(c: usize, key: usize, modulus: usize) -> Result<usize> {
    check_range("ciphertext", c, modulus)?;
    check_range("key", key, modulus)?;
    Ok((c + modulus - key) % modulus)
}

/// Key state carried from one block to the next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackSession {
    block_index: usize,
    s_size: usize,
    ny: usize,
    key: Option<usize>,
    carried_y: Option<Vec<Symbol>>,
}

impl FeedbackSession {
    pub fn new(s_size: usize, ny: usize) -> Self {
        Self { block_index: 1, s_size, ny, key: None, carried_y: None }
    }

    /// 1-based index of the block about to be sent.
    pub fn block_index(&self) -> usize {
        self.block_index
    }

    /// Key for the current block; absent in block 1.
    pub fn key(&self) -> Option<usize> {
        self.key
    }

    pub fn carried_y(&self) -> Option<&[Symbol]> {
        self.carried_y.as_deref()
    }

    /// Close the current block with its channel-1 output.
    pub fn advance(&mut self, y: Vec<Symbol>) -> Result<()> {
        self.key = Some(key_from_feedback(&y, self.ny, self.s_size)?);
        self.carried_y = Some(y);
        self.block_index += 1;
        Ok(())
    }
}
