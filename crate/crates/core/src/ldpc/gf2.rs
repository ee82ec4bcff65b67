//! Dense GF(2) helpers used for encoder setup and rank computation.

/// A dense bit-packed row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            words: vec![0; len.div_ceil(64)],
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Parity of `self AND other`.
    pub fn dot(&self, other: &BitRow) -> u8 {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        (ones & 1) as u8
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut row = BitRow::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                row.set(i);
            }
        }
        row
    }
}

/// Result of reducing a parity-check matrix to reduced row-echelon form.
pub(crate) struct Echelon {
    /// `(pivot column, reduced row)` pairs.
    pub pivots: Vec<(usize, BitRow)>,
}

/// Gauss–Jordan elimination over GF(2). Pivot columns are searched from the
/// right so that for `H = [A | T]` with invertible `T` the pivots fall in `T`.
pub(crate) fn reduce(mut rows: Vec<BitRow>, n_cols: usize) -> Echelon {
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut next = 0;
    for col in (0..n_cols).rev() {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(next, found);
        let pivot_row = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push((col, next));
        next += 1;
    }
    let pivots = pivots
        .into_iter()
        .map(|(col, r)| (col, rows[r].clone()))
        .collect();
    Echelon { pivots }
}
