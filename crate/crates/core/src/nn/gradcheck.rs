//! Finite-difference gradient checking on random small networks (f64).

use super::{ConvSpec, HeadKind, Network, NetworkSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const H: f64 = 1e-3;
pub const TOL: f64 = 1e-4;
/// Relative error is measured against at least this magnitude, so that
/// gradients near zero are compared absolutely.
pub const DENOM_FLOOR: f64 = 1e-4;

pub struct Instance {
    pub net: Network<f64>,
    pub images: Vec<f64>,
    pub side: Vec<f64>,
    pub batch: usize,
    /// Loss = Σ coef·y + ½ Σ y².
    pub coef: Vec<f64>,
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let head = [HeadKind::Q, HeadKind::Policy, HeadKind::Value][rng.random_range(0..3)];
    let n_convs = rng.random_range(0..3);
    let mut convs = Vec::new();
    let (mut h, mut w) = (rng.random_range(5..9), rng.random_range(5..10));
    let (h0, w0) = (h, w);
    for _ in 0..n_convs {
        let kernel = rng.random_range(2..4usize);
        let stride = rng.random_range(1..3usize);
        if h < kernel || w < kernel {
            break;
        }
        convs.push(ConvSpec { channels: rng.random_range(1..4), kernel, stride });
        h = (h - kernel) / stride + 1;
        w = (w - kernel) / stride + 1;
    }
    let dense = (0..rng.random_range(0..3)).map(|_| rng.random_range(2..7)).collect();
    let spec = NetworkSpec {
        in_channels: rng.random_range(1..4),
        height: h0,
        width: w0,
        convs,
        side_inputs: rng.random_range(0..4),
        dense,
        head,
        n_outputs: if head == HeadKind::Value { 1 } else { rng.random_range(2..6) },
    };
    let mut net = Network::<f64>::init(spec.clone(), seed ^ 0x5eed);
    for p in net.params.iter_mut().flatten() {
        *p += rng.random_range(-0.1..0.1);
    }
    let batch = rng.random_range(1..4);
    let images = (0..batch * spec.image_len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let side = (0..batch * spec.side_inputs).map(|_| rng.random_range(-1.0..1.0)).collect();
    let coef = (0..batch * spec.n_outputs).map(|_| rng.random_range(-1.0..1.0)).collect();
    Instance { net, images, side, batch, coef }
}

fn loss(inst: &Instance, net: &Network<f64>) -> (f64, Vec<bool>) {
    let cache = net.forward(&inst.images, &inst.side, inst.batch);
    let l = cache
        .output
        .iter()
        .zip(&inst.coef)
        .map(|(y, c)| c * y + 0.5 * y * y)
        .sum();
    (l, cache.relu_pattern())
}

pub struct CheckResult {
    pub max_rel_err: f64,
    pub checked: usize,
    /// Coordinates where a ReLU switched inside [θ−h, θ+h], so the central
    /// difference straddles a kink and is not a derivative estimate.
    pub kinks: usize,
}

/// Compares backward-pass gradients with central differences for every
/// parameter of the instance.
pub fn check(inst: &Instance) -> CheckResult {
    let net = &inst.net;
    let cache = net.forward(&inst.images, &inst.side, inst.batch);
    let pattern = cache.relu_pattern();
    let d_out: Vec<f64> = cache.output.iter().zip(&inst.coef).map(|(y, c)| c + y).collect();
    let mut grads = net.zero_grads();
    net.backward(&cache, &d_out, &mut grads);

    let mut probe = net.clone();
    let mut res = CheckResult { max_rel_err: 0.0, checked: 0, kinks: 0 };
    for t in 0..net.params.len() {
        for i in 0..net.params[t].len() {
            let orig = net.params[t][i];
            probe.params[t][i] = orig + H;
            let (lp, pp) = loss(inst, &probe);
            probe.params[t][i] = orig - H;
            let (lm, pm) = loss(inst, &probe);
            probe.params[t][i] = orig;
            if pp != pattern || pm != pattern {
                res.kinks += 1;
                continue;
            }
            let numeric = (lp - lm) / (2.0 * H);
            let analytic = grads[t][i];
            let denom = analytic.abs().max(numeric.abs()).max(DENOM_FLOOR);
            res.max_rel_err = res.max_rel_err.max((analytic - numeric).abs() / denom);
            res.checked += 1;
        }
    }
    res
}

/// Runs `check` over instances `seeds`, returning the worst relative error,
/// the total coordinates and the kink count.
pub fn suite(seeds: std::ops::Range<u64>) -> (f64, usize, usize) {
    let mut worst = 0.0f64;
    let (mut total, mut kinks) = (0, 0);
    for seed in seeds {
        let r = check(&random_instance(seed));
        worst = worst.max(r.max_rel_err);
        total += r.checked + r.kinks;
        kinks += r.kinks;
    }
    (worst, total, kinks)
}
