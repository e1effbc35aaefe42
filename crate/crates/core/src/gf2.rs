//! Dense linear algebra over GF(2) on packed rows.

use crate::pauli::{get_bit, word_count};

/// Row-reduces `rows` (each `cols` bits wide) in place and returns the pivot
/// column of every nonzero row, in row order. Rows past the rank become zero.
/// `companion` receives the same row operations, which lets callers track the
/// combination that produced each reduced row.
pub(crate) fn rref(rows: &mut [Vec<u64>], cols: usize, companion: &mut [Vec<u64>]) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| get_bit(&rows[i], c)) else {
            continue;
        };
        rows.swap(r, p);
        companion.swap(r, p);
        for i in 0..rows.len() {
            if i != r && get_bit(&rows[i], c) {
                let (src, dst) = pick(rows, r, i);
                xor_into(dst, src);
                let (src, dst) = pick(companion, r, i);
                xor_into(dst, src);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

fn pick(rows: &mut [Vec<u64>], src: usize, dst: usize) -> (&Vec<u64>, &mut Vec<u64>) {
    if src < dst {
        let (a, b) = rows.split_at_mut(dst);
        (&a[src], &mut b[0])
    } else {
        let (a, b) = rows.split_at_mut(src);
        (&b[0], &mut a[dst])
    }
}

pub(crate) fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

/// Identity companion for `k` rows.
pub(crate) fn identity_rows(k: usize) -> Vec<Vec<u64>> {
    let w = word_count(k.max(1));
    (0..k)
        .map(|i| {
            let mut v = vec![0u64; w];
            v[i >> 6] |= 1 << (i & 63);
            v
        })
        .collect()
}
