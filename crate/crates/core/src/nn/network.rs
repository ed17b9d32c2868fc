use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{matmul, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    /// Linear action values.
    Q,
    /// Softmax action probabilities.
    Policy,
    /// Single linear state value.
    Value,
}

impl HeadKind {
    pub fn code(self) -> u8 {
        match self {
            HeadKind::Q => 0,
            HeadKind::Policy => 1,
            HeadKind::Value => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(HeadKind::Q),
            1 => Some(HeadKind::Policy),
            2 => Some(HeadKind::Value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub channels: usize,
    pub kernel: usize,
    pub stride: usize,
}

/// Valid-padding conv stack, flatten, append side features, ReLU dense stack,
/// then one head.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub in_channels: usize,
    pub height: usize,
    pub width: usize,
    pub convs: Vec<ConvSpec>,
    pub side_inputs: usize,
    pub dense: Vec<usize>,
    pub head: HeadKind,
    pub n_outputs: usize,
}

impl NetworkSpec {
    /// The production architecture over 3×24×60 grids plus 12 signal flags.
    pub fn standard(head: HeadKind, n_actions: usize) -> Self {
        NetworkSpec {
            in_channels: 3,
            height: 24,
            width: 60,
            convs: vec![
                ConvSpec { channels: 16, kernel: 4, stride: 2 },
                ConvSpec { channels: 32, kernel: 2, stride: 1 },
            ],
            side_inputs: 12,
            dense: vec![512, 256, 128, 64],
            head,
            n_outputs: if head == HeadKind::Value { 1 } else { n_actions },
        }
    }

    /// `(channels, height, width)` after each conv layer.
    pub fn conv_shapes(&self) -> Vec<(usize, usize, usize)> {
        let (mut h, mut w) = (self.height, self.width);
        self.convs
            .iter()
            .map(|c| {
                assert!(h >= c.kernel && w >= c.kernel, "kernel larger than feature map");
                h = (h - c.kernel) / c.stride + 1;
                w = (w - c.kernel) / c.stride + 1;
                (c.channels, h, w)
            })
            .collect()
    }

    pub fn image_len(&self) -> usize {
        self.in_channels * self.height * self.width
    }

    pub fn flat_len(&self) -> usize {
        match self.conv_shapes().last() {
            Some(&(c, h, w)) => c * h * w,
            None => self.image_len(),
        }
    }

    pub fn dense_input_len(&self) -> usize {
        self.flat_len() + self.side_inputs
    }

    /// Parameter tensor shapes in storage order: per conv `[out, in, k, k]`
    /// and `[out]`, then per dense layer (head last) `[out, in]` and `[out]`.
    pub fn param_shapes(&self) -> Vec<Vec<usize>> {
        let mut shapes = Vec::new();
        let mut ch = self.in_channels;
        for c in &self.convs {
            shapes.push(vec![c.channels, ch, c.kernel, c.kernel]);
            shapes.push(vec![c.channels]);
            ch = c.channels;
        }
        let mut width = self.dense_input_len();
        for &d in self.dense.iter().chain(std::iter::once(&self.n_outputs)) {
            shapes.push(vec![d, width]);
            shapes.push(vec![d]);
            width = d;
        }
        shapes
    }
}

/// Activations kept from a forward pass for the matching backward pass.
#[derive(Debug, Clone)]
pub struct Cache<T> {
    batch: usize,
    /// Per conv layer, per sample: im2col matrix `[in·k·k, oh·ow]`.
    cols: Vec<Vec<Vec<T>>>,
    /// Per conv layer: post-ReLU output `[batch, c, h, w]`.
    conv_out: Vec<Vec<T>>,
    /// Input to each dense layer, head included: `[batch, width]`.
    dense_in: Vec<Vec<T>>,
    /// Head output (probabilities for a policy head).
    pub output: Vec<T>,
}

impl<T: Scalar> Cache<T> {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// On/off state of every hidden ReLU unit, in layer order.
    pub fn relu_pattern(&self) -> Vec<bool> {
        let hidden = &self.dense_in[1..];
        self.conv_out
            .iter()
            .chain(hidden)
            .flatten()
            .map(|&v| v > T::zero())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    pub spec: NetworkSpec,
    pub params: Vec<Vec<T>>,
}

fn im2col<T: Scalar>(x: &[T], c: usize, h: usize, w: usize, k: usize, s: usize, cols: &mut Vec<T>) {
    let oh = (h - k) / s + 1;
    let ow = (w - k) / s + 1;
    let p = oh * ow;
    cols.clear();
    cols.resize(c * k * k * p, T::zero());
    for ci in 0..c {
        for ki in 0..k {
            for kj in 0..k {
                let row = (ci * k + ki) * k + kj;
                let dst = &mut cols[row * p..(row + 1) * p];
                for oy in 0..oh {
                    let src = &x[(ci * h + oy * s + ki) * w..];
                    for ox in 0..ow {
                        dst[oy * ow + ox] = src[ox * s + kj];
                    }
                }
            }
        }
    }
}

fn col2im<T: Scalar>(cols: &[T], c: usize, h: usize, w: usize, k: usize, s: usize, dx: &mut [T]) {
    let oh = (h - k) / s + 1;
    let ow = (w - k) / s + 1;
    let p = oh * ow;
    for ci in 0..c {
        for ki in 0..k {
            for kj in 0..k {
                let row = (ci * k + ki) * k + kj;
                let src = &cols[row * p..(row + 1) * p];
                for oy in 0..oh {
                    let base = (ci * h + oy * s + ki) * w;
                    for ox in 0..ow {
                        dx[base + ox * s + kj] = dx[base + ox * s + kj] + src[oy * ow + ox];
                    }
                }
            }
        }
    }
}

fn relu_in_place<T: Scalar>(x: &mut [T]) {
    for v in x {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

fn relu_mask<T: Scalar>(grad: &mut [T], out: &[T]) {
    for (g, &o) in grad.iter_mut().zip(out) {
        if o <= T::zero() {
            *g = T::zero();
        }
    }
}

/// Row-wise softmax with max subtraction.
pub(crate) fn softmax_rows<T: Scalar>(z: &mut [T], n: usize) {
    for row in z.chunks_mut(n) {
        let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum = sum + *v;
        }
        for v in row.iter_mut() {
            *v = *v / sum;
        }
    }
}

impl<T: Scalar> Network<T> {
    pub fn zeros(spec: NetworkSpec) -> Self {
        let params = spec
            .param_shapes()
            .iter()
            .map(|s| vec![T::zero(); s.iter().product()])
            .collect();
        Network { spec, params }
    }

    /// He-uniform weights, zero biases.
    pub fn init(spec: NetworkSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Self::zeros(spec);
        let shapes = net.spec.param_shapes();
        let head_weights = shapes.len() - 2;
        for (i, (p, shape)) in net.params.iter_mut().zip(&shapes).enumerate() {
            if shape.len() == 1 {
                continue;
            }
            let fan_in: usize = shape[1..].iter().product();
            let mut limit = (6.0 / fan_in as f64).sqrt();
            // near-uniform initial policy
            if i == head_weights && net.spec.head == HeadKind::Policy {
                limit *= 0.01;
            }
            for v in p.iter_mut() {
                *v = T::of(rng.random_range(-limit..limit));
            }
        }
        net
    }

    pub fn n_params(&self) -> usize {
        self.params.iter().map(Vec::len).sum()
    }

    pub fn zero_grads(&self) -> Vec<Vec<T>> {
        self.params.iter().map(|p| vec![T::zero(); p.len()]).collect()
    }

    /// Forward pass over a batch. `images` is `[batch, c, h, w]`, `side` is
    /// `[batch, side_inputs]`. Returns the head output `[batch, n_outputs]`
    /// inside the cache.
    pub fn forward(&self, images: &[T], side: &[T], batch: usize) -> Cache<T> {
        let spec = &self.spec;
        assert_eq!(images.len(), batch * spec.image_len(), "image batch shape");
        assert_eq!(side.len(), batch * spec.side_inputs, "side input shape");

        let mut cols = Vec::with_capacity(spec.convs.len());
        let mut conv_out: Vec<Vec<T>> = Vec::with_capacity(spec.convs.len());
        let (mut c, mut h, mut w) = (spec.in_channels, spec.height, spec.width);
        for (li, (conv, &(oc, oh, ow))) in spec.convs.iter().zip(&spec.conv_shapes()).enumerate() {
            let input: &[T] = if li == 0 { images } else { &conv_out[li - 1] };
            let (wt, bias) = (&self.params[2 * li], &self.params[2 * li + 1]);
            let p = oh * ow;
            let rows = c * conv.kernel * conv.kernel;
            let mut out = vec![T::zero(); batch * oc * p];
            let mut layer_cols = Vec::with_capacity(batch);
            for b in 0..batch {
                let mut col = Vec::new();
                im2col(&input[b * c * h * w..(b + 1) * c * h * w], c, h, w, conv.kernel, conv.stride, &mut col);
                let o = &mut out[b * oc * p..(b + 1) * oc * p];
                matmul(o, wt, &col, oc, rows, p, false, false, false);
                for (ch, row) in o.chunks_mut(p).enumerate() {
                    for v in row {
                        *v = *v + bias[ch];
                    }
                }
                layer_cols.push(col);
            }
            relu_in_place(&mut out);
            cols.push(layer_cols);
            conv_out.push(out);
            (c, h, w) = (oc, oh, ow);
        }

        let flat = spec.flat_len();
        let width = spec.dense_input_len();
        let mut x = vec![T::zero(); batch * width];
        let conv_flat: &[T] = conv_out.last().map_or(images, |v| v);
        for b in 0..batch {
            x[b * width..b * width + flat].copy_from_slice(&conv_flat[b * flat..(b + 1) * flat]);
            x[b * width + flat..(b + 1) * width]
                .copy_from_slice(&side[b * spec.side_inputs..(b + 1) * spec.side_inputs]);
        }

        let n_conv = spec.convs.len();
        let n_dense = spec.dense.len() + 1;
        let mut dense_in = Vec::with_capacity(n_dense);
        let mut in_w = width;
        for li in 0..n_dense {
            let (wt, bias) = (&self.params[2 * (n_conv + li)], &self.params[2 * (n_conv + li) + 1]);
            let out_w = bias.len();
            let mut y = vec![T::zero(); batch * out_w];
            matmul(&mut y, &x, wt, batch, in_w, out_w, false, true, false);
            for row in y.chunks_mut(out_w) {
                for (v, &bb) in row.iter_mut().zip(bias) {
                    *v = *v + bb;
                }
            }
            if li + 1 < n_dense {
                relu_in_place(&mut y);
            }
            dense_in.push(std::mem::replace(&mut x, y));
            in_w = out_w;
        }
        if spec.head == HeadKind::Policy {
            softmax_rows(&mut x, spec.n_outputs);
        }
        Cache { batch, cols, conv_out, dense_in, output: x }
    }

    /// Accumulates into `grads` the parameter gradient of a loss whose
    /// gradient with respect to the head output is `d_out`.
    pub fn backward(&self, cache: &Cache<T>, d_out: &[T], grads: &mut [Vec<T>]) {
        let spec = &self.spec;
        let batch = cache.batch;
        let n_out = spec.n_outputs;
        assert_eq!(d_out.len(), batch * n_out, "output gradient shape");

        let mut d: Vec<T> = d_out.to_vec();
        if spec.head == HeadKind::Policy {
            for (g, p) in d.chunks_mut(n_out).zip(cache.output.chunks(n_out)) {
                let dot = g.iter().zip(p).fold(T::zero(), |acc, (&gi, &pi)| acc + gi * pi);
                for (gi, &pi) in g.iter_mut().zip(p) {
                    *gi = pi * (*gi - dot);
                }
            }
        }

        let n_conv = spec.convs.len();
        let n_dense = spec.dense.len() + 1;
        for li in (0..n_dense).rev() {
            let pi = 2 * (n_conv + li);
            let wt = &self.params[pi];
            let out_w = self.params[pi + 1].len();
            let input = &cache.dense_in[li];
            let in_w = input.len() / batch;
            if li + 1 < n_dense {
                relu_mask(&mut d, &cache.dense_in[li + 1]);
            }
            matmul(&mut grads[pi], &d, input, out_w, batch, in_w, true, false, true);
            for row in d.chunks(out_w) {
                for (g, &v) in grads[pi + 1].iter_mut().zip(row) {
                    *g = *g + v;
                }
            }
            if li == 0 && n_conv == 0 {
                return;
            }
            let mut dx = vec![T::zero(); batch * in_w];
            matmul(&mut dx, &d, wt, batch, out_w, in_w, false, false, false);
            d = dx;
        }

        // drop side-input columns
        let flat = spec.flat_len();
        let width = spec.dense_input_len();
        let mut dconv: Vec<T> = (0..batch)
            .flat_map(|b| d[b * width..b * width + flat].to_vec())
            .collect();

        let shapes = spec.conv_shapes();
        for li in (0..n_conv).rev() {
            let conv = spec.convs[li];
            let (oc, oh, ow) = shapes[li];
            let (c, h, w) = if li == 0 {
                (spec.in_channels, spec.height, spec.width)
            } else {
                shapes[li - 1]
            };
            let p = oh * ow;
            let rows = c * conv.kernel * conv.kernel;
            relu_mask(&mut dconv, &cache.conv_out[li]);
            let mut dprev = if li > 0 { vec![T::zero(); batch * c * h * w] } else { Vec::new() };
            let mut dcols = vec![T::zero(); rows * p];
            for b in 0..batch {
                let db = &dconv[b * oc * p..(b + 1) * oc * p];
                let col = &cache.cols[li][b];
                matmul(&mut grads[2 * li], db, col, oc, p, rows, false, true, true);
                for (ch, row) in db.chunks(p).enumerate() {
                    let s = row.iter().fold(T::zero(), |a, &v| a + v);
                    grads[2 * li + 1][ch] = grads[2 * li + 1][ch] + s;
                }
                if li > 0 {
                    matmul(&mut dcols, &self.params[2 * li], db, rows, oc, p, true, false, false);
                    col2im(&dcols, c, h, w, conv.kernel, conv.stride, &mut dprev[b * c * h * w..(b + 1) * c * h * w]);
                }
            }
            dconv = dprev;
        }
    }

    /// Copies all parameters from `other`, which must share the spec.
    pub fn copy_from(&mut self, other: &Network<T>) {
        assert_eq!(self.spec, other.spec, "spec mismatch");
        for (a, b) in self.params.iter_mut().zip(&other.params) {
            a.copy_from_slice(b);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().flatten().all(|v| v.is_finite())
    }
}
