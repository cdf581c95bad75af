//! In-place application of small dense matrices to amplitude arrays.
//!
//! Qubit 0 is the most significant bit of the amplitude index. A matrix
//! acting on targets `[t0, .., tk-1]` uses `t0` as the most significant bit
//! of its local index.

use crate::C64;

#[inline]
fn bit_pos(n_qubits: usize, qubit: usize) -> usize {
    n_qubits - 1 - qubit
}

/// Spreads `i` so that zero bits sit at every position in `sorted_pos`
/// (ascending).
#[inline]
fn insert_zeros(mut i: usize, sorted_pos: &[usize]) -> usize {
    for &p in sorted_pos {
        let low = i & ((1usize << p) - 1);
        i = ((i >> p) << (p + 1)) | low;
    }
    i
}

/// Applies a `2^k x 2^k` row-major matrix to the amplitudes of `targets`.
///
/// Callers validate `targets`; this only debug-asserts.
pub fn apply_matrix(amps: &mut [C64], n_qubits: usize, matrix: &[C64], targets: &[usize]) {
    debug_assert_eq!(amps.len(), 1usize << n_qubits);
    debug_assert_eq!(matrix.len(), 1usize << (2 * targets.len()));
    match targets.len() {
        1 => apply_1q(amps, n_qubits, matrix, targets[0]),
        2 => apply_2q(amps, n_qubits, matrix, targets[0], targets[1]),
        _ => apply_kq(amps, n_qubits, matrix, targets),
    }
}

/// Multiplies amplitudes by a diagonal given as the `2^k` diagonal entries.
pub fn apply_diagonal(amps: &mut [C64], n_qubits: usize, diag: &[C64], targets: &[usize]) {
    match targets {
        [t] => diag_1q(amps, n_qubits, [diag[0], diag[1]], *t),
        [t0, t1] => diag_2q(amps, n_qubits, diag, *t0, *t1),
        _ => diag_kq(amps, n_qubits, diag, targets),
    }
}

#[inline]
fn scale(block: &mut [C64], d: C64) {
    if d != C64::new(1.0, 0.0) {
        block.iter_mut().for_each(|a| *a *= d);
    }
}

fn diag_1q(amps: &mut [C64], n_qubits: usize, d: [C64; 2], target: usize) {
    let stride = 1usize << bit_pos(n_qubits, target);
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        scale(lo, d[0]);
        scale(hi, d[1]);
    }
}

fn diag_2q(amps: &mut [C64], n_qubits: usize, diag: &[C64], t0: usize, t1: usize) {
    let (p0, p1) = (bit_pos(n_qubits, t0), bit_pos(n_qubits, t1));
    // outer loop over the higher bit; local index is (bit t0, bit t1)
    let (hi_pos, lo_pos, hi_is_t0) = if p0 > p1 { (p0, p1, true) } else { (p1, p0, false) };
    let (sh, sl) = (1usize << hi_pos, 1usize << lo_pos);
    let entry = |bh: usize, bl: usize| if hi_is_t0 { diag[2 * bh + bl] } else { diag[2 * bl + bh] };
    for outer in amps.chunks_exact_mut(2 * sh) {
        for (bh, half) in outer.chunks_exact_mut(sh).enumerate() {
            for inner in half.chunks_exact_mut(2 * sl) {
                let (lo, hi) = inner.split_at_mut(sl);
                scale(lo, entry(bh, 0));
                scale(hi, entry(bh, 1));
            }
        }
    }
}

fn diag_kq(amps: &mut [C64], n_qubits: usize, diag: &[C64], targets: &[usize]) {
    let pos: Vec<usize> = targets.iter().map(|&t| bit_pos(n_qubits, t)).collect();
    for (i, a) in amps.iter_mut().enumerate() {
        let mut local = 0usize;
        for &p in &pos {
            local = (local << 1) | ((i >> p) & 1);
        }
        *a *= diag[local];
    }
}

fn real_2x2(m: &[C64]) -> Option<[f64; 4]> {
    m.iter().all(|c| c.im == 0.0).then(|| [m[0].re, m[1].re, m[2].re, m[3].re])
}

fn apply_1q(amps: &mut [C64], n_qubits: usize, m: &[C64], target: usize) {
    let stride = 1usize << bit_pos(n_qubits, target);
    if let Some([r00, r01, r10, r11]) = real_2x2(m) {
        for block in amps.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x * r00 + y * r01;
                *b = x * r10 + y * r11;
            }
        }
        return;
    }
    let (m00, m01, m10, m11) = (m[0], m[1], m[2], m[3]);
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m00 * x + m01 * y;
            *b = m10 * x + m11 * y;
        }
    }
}

/// `[[I, 0], [0, V]]` with `V` returned row-major.
fn controlled_block(m: &[C64]) -> Option<[C64; 4]> {
    let one = C64::new(1.0, 0.0);
    let zero_at = [1, 2, 3, 4, 6, 7, 8, 9, 12, 13];
    (m[0] == one && m[5] == one && zero_at.iter().all(|&i| m[i] == C64::new(0.0, 0.0)))
        .then(|| [m[10], m[11], m[14], m[15]])
}

fn apply_2q(amps: &mut [C64], n_qubits: usize, m: &[C64], t0: usize, t1: usize) {
    let p0 = bit_pos(n_qubits, t0);
    let p1 = bit_pos(n_qubits, t1);
    let sorted = if p0 < p1 { [p0, p1] } else { [p1, p0] };
    let (s0, s1) = (1usize << p0, 1usize << p1);
    if let Some(v) = controlled_block(m) {
        if let Some([r00, r01, r10, r11]) = real_2x2(&v) {
            for i in 0..amps.len() / 4 {
                let base = insert_zeros(i, &sorted) | s0;
                let (x, y) = (amps[base], amps[base | s1]);
                amps[base] = x * r00 + y * r01;
                amps[base | s1] = x * r10 + y * r11;
            }
            return;
        }
        let [v00, v01, v10, v11] = v;
        for i in 0..amps.len() / 4 {
            let base = insert_zeros(i, &sorted) | s0;
            let (x, y) = (amps[base], amps[base | s1]);
            amps[base] = v00 * x + v01 * y;
            amps[base | s1] = v10 * x + v11 * y;
        }
        return;
    }
    for i in 0..amps.len() / 4 {
        let base = insert_zeros(i, &sorted);
        let idx = [base, base | s1, base | s0, base | s0 | s1];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (r, &out) in idx.iter().enumerate() {
            let row = &m[4 * r..4 * r + 4];
            amps[out] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
    }
}

fn apply_kq(amps: &mut [C64], n_qubits: usize, m: &[C64], targets: &[usize]) {
    let k = targets.len();
    let local_dim = 1usize << k;
    let pos: Vec<usize> = targets.iter().map(|&t| bit_pos(n_qubits, t)).collect();
    let mut sorted = pos.clone();
    sorted.sort_unstable();
    // offsets[local] = global bits set by local index `local`
    let offsets: Vec<usize> = (0..local_dim)
        .map(|local| {
            pos.iter()
                .enumerate()
                .filter(|(j, _)| (local >> (k - 1 - j)) & 1 == 1)
                .fold(0usize, |acc, (_, &p)| acc | (1 << p))
        })
        .collect();
    let mut buf = vec![C64::new(0.0, 0.0); local_dim];
    for i in 0..amps.len() >> k {
        let base = insert_zeros(i, &sorted);
        for (b, &off) in buf.iter_mut().zip(&offsets) {
            *b = amps[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let row = &m[r * local_dim..(r + 1) * local_dim];
            amps[base | off] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
        }
    }
}
