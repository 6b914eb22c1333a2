use crate::error::{param, Result};
use serde::Serialize;

pub const MAX_CODE_BITS: usize = 24;

/// Binary code over `h`-bit words, stored as integers (bit `i` is coordinate `i`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinaryCode {
    pub h: usize,
    pub words: Vec<u32>,
    /// Designed minimum distance.
    pub min_distance: usize,
}

impl BinaryCode {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Coordinates of word `w` as 0/1 entries.
    pub fn bits(&self, w: u32) -> Vec<usize> {
        (0..self.h).map(|i| (w >> i & 1) as usize).collect()
    }

    /// True minimum pairwise Hamming distance (`usize::MAX` for fewer than two words).
    pub fn exact_min_distance(&self) -> usize {
        let w = &self.words;
        let mut best = usize::MAX;
        for i in 0..w.len() {
            for j in (i + 1)..w.len() {
                best = best.min((w[i] ^ w[j]).count_ones() as usize);
            }
        }
        best
    }

    /// Exhaustive check that no two codewords are closer than `d`.
    pub fn verify_distance(&self, d: usize) -> bool {
        let pairs = self.words.len() * self.words.len() / 2;
        let ball = ball_masks(self.h, d.saturating_sub(1));
        if pairs <= ball.len() * self.words.len() {
            return self.exact_min_distance() >= d;
        }
        let mut member = vec![0u64; (1usize << self.h).div_ceil(64)];
        for &w in &self.words {
            member[w as usize / 64] |= 1 << (w % 64);
        }
        self.words.iter().all(|&w| {
            ball.iter().skip(1).all(|&m| {
                let x = (w ^ m) as usize;
                member[x / 64] >> (x % 64) & 1 == 0
            })
        })
    }
}

pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -(x * x.log2() + (1.0 - x) * (1.0 - x).log2())
}

/// All masks of weight at most `r`, the zero mask first.
fn ball_masks(h: usize, r: usize) -> Vec<u32> {
    let mut out = vec![0u32];
    let mut frontier = vec![0u32];
    for _ in 0..r.min(h) {
        let mut next = Vec::new();
        for &m in &frontier {
            let top = 32 - m.leading_zeros() as usize;
            for b in top..h {
                next.push(m | 1 << b);
            }
        }
        out.extend_from_slice(&next);
        frontier = next;
    }
    out
}

/// Greedy lexicographic code with minimum distance `max(1, ⌈αh⌉)`.
pub fn gv_code(h: usize, alpha: f64) -> Result<BinaryCode> {
    if h == 0 || h > MAX_CODE_BITS {
        return param(format!("word length must lie in 1..={MAX_CODE_BITS}, got {h}"));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return param(format!("alpha must lie in (0, 0.5), got {alpha}"));
    }
    let d = ((alpha * h as f64 - 1e-9).ceil() as usize).max(1);
    let ball = ball_masks(h, d - 1);
    let total = 1usize << h;
    let mut forbidden = vec![0u64; total.div_ceil(64)];
    let mut words = Vec::new();
    for w in 0..total {
        if forbidden[w / 64] >> (w % 64) & 1 == 1 {
            continue;
        }
        words.push(w as u32);
        for &m in &ball {
            let x = w ^ m as usize;
            forbidden[x / 64] |= 1 << (x % 64);
        }
    }
    Ok(BinaryCode {
        h,
        words,
        min_distance: d,
    })
}
