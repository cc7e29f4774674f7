//! Three stride-2 convolutions, global average pooling and a dense head.
//!
//! Activations are stored position-major with channels last, so a batch of
//! `b` sequences of length `l` with `c` channels is a `(b * l) x c` row-major
//! matrix. Convolutions run as im2col followed by a GEMM.

use rand::Rng;

use super::tensor::{CHANNELS, SEQ_LEN};

pub(crate) const KERNEL: usize = 3;
pub(crate) const CONV_CHANNELS: [usize; 4] = [CHANNELS, 32, 64, 96];
pub(crate) const LENGTHS: [usize; 4] = [SEQ_LEN, 52, 26, 13];
const STRIDE: usize = 2;
const PAD: usize = 1;

/// Offsets of one weight matrix and its bias inside the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct LayerSlots {
    pub rows: usize,
    pub cols: usize,
    pub weight: usize,
    pub bias: usize,
}

impl LayerSlots {
    pub fn weight_len(&self) -> usize {
        self.rows * self.cols
    }
}

pub(crate) fn layout(classes: usize) -> [LayerSlots; 4] {
    let mut slots = [LayerSlots {
        rows: 0,
        cols: 0,
        weight: 0,
        bias: 0,
    }; 4];
    let mut offset = 0;
    for (l, slot) in slots.iter_mut().enumerate() {
        let (rows, cols) = if l < 3 {
            (KERNEL * CONV_CHANNELS[l], CONV_CHANNELS[l + 1])
        } else {
            (CONV_CHANNELS[3], classes)
        };
        *slot = LayerSlots {
            rows,
            cols,
            weight: offset,
            bias: offset + rows * cols,
        };
        offset += rows * cols + cols;
    }
    slots
}

pub(crate) fn param_count(classes: usize) -> usize {
    let last = layout(classes)[3];
    last.bias + last.cols
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Network {
    pub classes: usize,
    pub params: Vec<f64>,
}

/// Forward-pass intermediates kept for backpropagation.
pub(crate) struct Trace {
    pub batch: usize,
    /// im2col matrices, one per conv layer.
    cols: Vec<Vec<f64>>,
    /// Pre-activation outputs, one per conv layer.
    pre: Vec<Vec<f64>>,
    pooled: Vec<f64>,
    pub logits: Vec<f64>,
}

impl Network {
    pub fn zeros(classes: usize) -> Self {
        Self {
            classes,
            params: vec![0.0; param_count(classes)],
        }
    }

    /// He-uniform weights, zero biases.
    pub fn init<R: Rng>(classes: usize, rng: &mut R) -> Self {
        let mut net = Self::zeros(classes);
        for slot in layout(classes) {
            let bound = (6.0 / slot.rows as f64).sqrt();
            for w in &mut net.params[slot.weight..slot.weight + slot.weight_len()] {
                *w = rng.gen_range(-bound..bound);
            }
        }
        net
    }

    fn weight(&self, slot: &LayerSlots) -> &[f64] {
        &self.params[slot.weight..slot.weight + slot.weight_len()]
    }

    fn bias(&self, slot: &LayerSlots) -> &[f64] {
        &self.params[slot.bias..slot.bias + slot.cols]
    }

    /// `input` holds `batch` tensors of `SEQ_LEN x CHANNELS` values each.
    pub fn forward(&self, input: &[f64], batch: usize) -> Trace {
        debug_assert_eq!(input.len(), batch * SEQ_LEN * CHANNELS);
        let slots = layout(self.classes);
        let mut cols = Vec::with_capacity(3);
        let mut pre = Vec::with_capacity(3);
        let mut act: Vec<f64> = input.to_vec();
        for l in 0..3 {
            let (c_in, c_out) = (CONV_CHANNELS[l], CONV_CHANNELS[l + 1]);
            let (l_in, l_out) = (LENGTHS[l], LENGTHS[l + 1]);
            let col = im2col(&act, batch, l_in, l_out, c_in);
            let rows = batch * l_out;
            let mut out = broadcast_rows(self.bias(&slots[l]), rows);
            gemm(rows, KERNEL * c_in, c_out, &col, false, self.weight(&slots[l]), false, &mut out, 1.0);
            act = out.iter().map(|&v| v.max(0.0)).collect();
            cols.push(col);
            pre.push(out);
        }

        let (l_last, c_last) = (LENGTHS[3], CONV_CHANNELS[3]);
        let mut pooled = vec![0.0; batch * c_last];
        for b in 0..batch {
            let dst = &mut pooled[b * c_last..(b + 1) * c_last];
            for t in 0..l_last {
                let row = &act[(b * l_last + t) * c_last..(b * l_last + t + 1) * c_last];
                for (d, v) in dst.iter_mut().zip(row) {
                    *d += v;
                }
            }
            for d in dst.iter_mut() {
                *d /= l_last as f64;
            }
        }

        let mut logits = broadcast_rows(self.bias(&slots[3]), batch);
        gemm(batch, c_last, self.classes, &pooled, false, self.weight(&slots[3]), false, &mut logits, 1.0);

        Trace {
            batch,
            cols,
            pre,
            pooled,
            logits,
        }
    }

    /// Backpropagates `dlogits` (`batch x classes`).
    ///
    /// Parameter gradients are accumulated into `grad` when given; the input
    /// gradient (same layout as the forward input) is returned when
    /// `want_input` is set.
    pub fn backward(
        &self,
        trace: &Trace,
        dlogits: &[f64],
        mut grad: Option<&mut [f64]>,
        want_input: bool,
    ) -> Option<Vec<f64>> {
        let batch = trace.batch;
        let slots = layout(self.classes);
        let k = self.classes;
        let (l_last, c_last) = (LENGTHS[3], CONV_CHANNELS[3]);

        if let Some(g) = grad.as_deref_mut() {
            let s = slots[3];
            gemm(c_last, batch, k, &trace.pooled, true, dlogits, false, &mut g[s.weight..s.weight + s.weight_len()], 1.0);
            accumulate_colsum(dlogits, k, &mut g[s.bias..s.bias + k]);
        }
        let mut dpooled = vec![0.0; batch * c_last];
        gemm(batch, k, c_last, dlogits, false, self.weight(&slots[3]), true, &mut dpooled, 0.0);

        // average pooling spreads the gradient evenly over positions
        let mut dact = vec![0.0; batch * l_last * c_last];
        for b in 0..batch {
            let src = &dpooled[b * c_last..(b + 1) * c_last];
            for t in 0..l_last {
                let row = &mut dact[(b * l_last + t) * c_last..(b * l_last + t + 1) * c_last];
                for (d, s) in row.iter_mut().zip(src) {
                    *d = s / l_last as f64;
                }
            }
        }

        for l in (0..3).rev() {
            let (c_in, c_out) = (CONV_CHANNELS[l], CONV_CHANNELS[l + 1]);
            let (l_in, l_out) = (LENGTHS[l], LENGTHS[l + 1]);
            let rows = batch * l_out;
            let mut dpre = dact;
            for (d, &p) in dpre.iter_mut().zip(&trace.pre[l]) {
                if p <= 0.0 {
                    *d = 0.0;
                }
            }
            if let Some(g) = grad.as_deref_mut() {
                let s = slots[l];
                gemm(KERNEL * c_in, rows, c_out, &trace.cols[l], true, &dpre, false, &mut g[s.weight..s.weight + s.weight_len()], 1.0);
                accumulate_colsum(&dpre, c_out, &mut g[s.bias..s.bias + c_out]);
            }
            if l == 0 && !want_input {
                return None;
            }
            let mut dcols = vec![0.0; rows * KERNEL * c_in];
            gemm(rows, c_out, KERNEL * c_in, &dpre, false, self.weight(&slots[l]), true, &mut dcols, 0.0);
            dact = col2im(&dcols, batch, l_in, l_out, c_in);
        }
        Some(dact)
    }

    /// Sign pattern of every conv pre-activation (true when positive).
    pub fn relu_pattern(&self, input: &[f64]) -> Vec<bool> {
        let trace = self.forward(input, 1);
        trace.pre.iter().flatten().map(|&v| v > 0.0).collect()
    }
}

fn broadcast_rows(bias: &[f64], rows: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * bias.len());
    for _ in 0..rows {
        out.extend_from_slice(bias);
    }
    out
}

fn accumulate_colsum(m: &[f64], cols: usize, out: &mut [f64]) {
    for row in m.chunks_exact(cols) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v;
        }
    }
}

/// Input row `(b, t)` feeds output row `(b, o)` at kernel tap `j` when
/// `t = STRIDE * o + j - PAD`.
fn im2col(input: &[f64], batch: usize, l_in: usize, l_out: usize, c: usize) -> Vec<f64> {
    let width = KERNEL * c;
    let mut cols = vec![0.0; batch * l_out * width];
    for b in 0..batch {
        for o in 0..l_out {
            let dst = &mut cols[(b * l_out + o) * width..(b * l_out + o + 1) * width];
            for j in 0..KERNEL {
                let t = (STRIDE * o + j) as isize - PAD as isize;
                if t < 0 || t as usize >= l_in {
                    continue;
                }
                let src = (b * l_in + t as usize) * c;
                dst[j * c..(j + 1) * c].copy_from_slice(&input[src..src + c]);
            }
        }
    }
    cols
}

fn col2im(cols: &[f64], batch: usize, l_in: usize, l_out: usize, c: usize) -> Vec<f64> {
    let width = KERNEL * c;
    let mut out = vec![0.0; batch * l_in * c];
    for b in 0..batch {
        for o in 0..l_out {
            let src = &cols[(b * l_out + o) * width..(b * l_out + o + 1) * width];
            for j in 0..KERNEL {
                let t = (STRIDE * o + j) as isize - PAD as isize;
                if t < 0 || t as usize >= l_in {
                    continue;
                }
                let dst = &mut out[(b * l_in + t as usize) * c..(b * l_in + t as usize + 1) * c];
                for (d, s) in dst.iter_mut().zip(&src[j * c..(j + 1) * c]) {
                    *d += s;
                }
            }
        }
    }
    out
}

/// `c = op(a) * op(b) + beta * c` on row-major matrices, where `op(a)` is
/// `m x k` and `op(b)` is `k x n`. A transposed operand is stored with its
/// dimensions swapped.
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: &[f64], ta: bool, b: &[f64], tb: bool, c: &mut [f64], beta: f64) {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    assert_eq!(c.len(), m * n);
    let (rsa, csa) = if ta { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if tb { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the asserts above bound every index the kernel touches.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gemm_transposes() {
        // a = [[1,2],[3,4]], b = [[5,6],[7,8]]
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [5.0, 6.0, 7.0, 8.0];
        let mut c = [0.0; 4];
        gemm(2, 2, 2, &a, false, &b, false, &mut c, 0.0);
        assert_eq!(c, [19.0, 22.0, 43.0, 50.0]);
        gemm(2, 2, 2, &a, true, &b, false, &mut c, 0.0);
        assert_eq!(c, [26.0, 30.0, 38.0, 44.0]);
        gemm(2, 2, 2, &a, false, &b, true, &mut c, 0.0);
        assert_eq!(c, [17.0, 23.0, 39.0, 53.0]);
    }

    #[test]
    fn conv_matches_direct_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Network::init(4, &mut rng);
        let input: Vec<f64> = (0..SEQ_LEN * CHANNELS).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let trace = net.forward(&input, 1);

        let slots = layout(4);
        let w = net.weight(&slots[0]);
        let bias = net.bias(&slots[0]);
        for o in [0, 1, 25, 51] {
            for co in [0, 7, 31] {
                let mut acc = bias[co];
                for j in 0..KERNEL {
                    let t = (2 * o + j) as isize - 1;
                    if t < 0 || t as usize >= SEQ_LEN {
                        continue;
                    }
                    for ci in 0..CHANNELS {
                        acc += input[t as usize * CHANNELS + ci] * w[(j * CHANNELS + ci) * 32 + co];
                    }
                }
                assert!((trace.pre[0][o * 32 + co] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn batch_rows_are_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Network::init(3, &mut rng);
        let a: Vec<f64> = (0..SEQ_LEN * CHANNELS).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..SEQ_LEN * CHANNELS).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let both: Vec<f64> = a.iter().chain(&b).copied().collect();
        let joint = net.forward(&both, 2).logits;
        let single_b = net.forward(&b, 1).logits;
        for (x, y) in joint[3..].iter().zip(&single_b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = Network::init(3, &mut rng);
        let input: Vec<f64> = (0..2 * SEQ_LEN * CHANNELS).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // objective: weighted sum of logits
        let weights: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let objective = |n: &Network| -> f64 {
            n.forward(&input, 2).logits.iter().zip(&weights).map(|(a, b)| a * b).sum()
        };
        let trace = net.forward(&input, 2);
        let mut grad = vec![0.0; net.params.len()];
        net.backward(&trace, &weights, Some(&mut grad), false);

        let h = 1e-6;
        let mut checked = 0;
        for idx in (0..net.params.len()).step_by(97) {
            let mut plus = net.clone();
            plus.params[idx] += h;
            let mut minus = net.clone();
            minus.params[idx] -= h;
            if plus.relu_pattern(&input[..SEQ_LEN * CHANNELS]) != minus.relu_pattern(&input[..SEQ_LEN * CHANNELS])
                || plus.relu_pattern(&input[SEQ_LEN * CHANNELS..]) != minus.relu_pattern(&input[SEQ_LEN * CHANNELS..])
            {
                continue;
            }
            let fd = (objective(&plus) - objective(&minus)) / (2.0 * h);
            let scale = fd.abs().max(grad[idx].abs()).max(1e-6);
            assert!((fd - grad[idx]).abs() / scale < 1e-5, "param {idx}: fd {fd} vs {}", grad[idx]);
            checked += 1;
        }
        assert!(checked > 200);
    }

    #[test]
    fn parameter_count() {
        // 9*32+32 + 96*64+64 + 192*96+96 + 96*5+5
        assert_eq!(param_count(5), 320 + 6208 + 18528 + 485);
    }
}
