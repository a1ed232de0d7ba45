use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spec::MlpParams;

/// Per-feature affine map to zero mean and unit variance, fitted on the
/// training inputs. Constant features keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let p = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mean: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale = (0..p)
            .map(|j| {
                let sd = (x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn identity(p: usize) -> Self {
        Standardizer {
            mean: vec![0.0; p],
            scale: vec![1.0; p],
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

/// One fully connected layer; `weights[i][j]` connects input `i` to
/// output `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Dense {
    fn glorot<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Self {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weights = (0..fan_in)
            .map(|_| (0..fan_out).map(|_| rng.random_range(-bound..bound)).collect())
            .collect();
        let bias = (0..fan_out).map(|_| rng.random_range(-bound..bound)).collect();
        Dense { weights, bias }
    }

    fn forward(&self, input: &[f64]) -> Vec<f64> {
        let mut out = self.bias.clone();
        for (a, row) in input.iter().zip(&self.weights) {
            if *a != 0.0 {
                for (o, w) in out.iter_mut().zip(row) {
                    *o += a * w;
                }
            }
        }
        out
    }

    fn n_params(&self) -> usize {
        self.weights.len() * self.bias.len() + self.bias.len()
    }
}

/// ReLU hidden layers and a softmax output trained on cross-entropy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub standardizer: Standardizer,
    pub layers: Vec<Dense>,
    /// Mean training loss per epoch.
    pub loss_curve: Vec<f64>,
}

fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

impl Mlp {
    /// Glorot-uniform initialisation of a network with the given layer
    /// sizes between `n_inputs` and `n_outputs`.
    pub fn initialise<R: Rng>(n_inputs: usize, hidden: &[usize], n_outputs: usize, rng: &mut R) -> Self {
        let mut sizes = vec![n_inputs];
        sizes.extend_from_slice(hidden);
        sizes.push(n_outputs);
        let layers = sizes.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect();
        Mlp {
            standardizer: Standardizer::identity(n_inputs),
            layers,
            loss_curve: Vec::new(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Dense::n_params).sum()
    }

    /// Parameters flattened layer by layer: weights row-major, then bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for layer in &self.layers {
            layer.weights.iter().for_each(|row| out.extend(row));
            out.extend(&layer.bias);
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        let mut it = flat.iter();
        for layer in &mut self.layers {
            for w in layer.weights.iter_mut().flatten().chain(layer.bias.iter_mut()) {
                *w = *it.next().expect("parameter vector too short");
            }
        }
    }

    /// Pre-activations and activations of every layer for an already
    /// standardised input. The last entry holds the output logits.
    fn forward_all(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = layer.forward(acts.last().expect("input layer"));
            if l < last {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        acts
    }

    /// Mean cross-entropy plus `0.5 * alpha * ||W||^2 / batch` over a batch
    /// of network inputs (after standardisation), and its gradient in
    /// [`Mlp::params`] order.
    pub fn loss_and_gradient(&self, x: &[Vec<f64>], y: &[usize], alpha: f64) -> (f64, Vec<f64>) {
        let b = x.len() as f64;
        let mut grads: Vec<Dense> = self
            .layers
            .iter()
            .map(|l| Dense {
                weights: vec![vec![0.0; l.bias.len()]; l.weights.len()],
                bias: vec![0.0; l.bias.len()],
            })
            .collect();
        let mut loss = 0.0;
        for (xi, &yi) in x.iter().zip(y) {
            let acts = self.forward_all(xi);
            let logp = log_softmax(acts.last().expect("output layer"));
            loss -= logp[yi];
            let mut delta: Vec<f64> = logp.iter().map(|v| v.exp()).collect();
            delta[yi] -= 1.0;
            for l in (0..self.layers.len()).rev() {
                let input = &acts[l];
                let g = &mut grads[l];
                for (a, grow) in input.iter().zip(g.weights.iter_mut()) {
                    if *a != 0.0 {
                        for (gw, d) in grow.iter_mut().zip(&delta) {
                            *gw += a * d;
                        }
                    }
                }
                for (gb, d) in g.bias.iter_mut().zip(&delta) {
                    *gb += d;
                }
                if l > 0 {
                    delta = self.layers[l]
                        .weights
                        .iter()
                        .zip(input)
                        .map(|(row, a)| {
                            if *a > 0.0 {
                                row.iter().zip(&delta).map(|(w, d)| w * d).sum()
                            } else {
                                0.0
                            }
                        })
                        .collect();
                }
            }
        }
        let sq: f64 = self.layers.iter().flat_map(|l| l.weights.iter().flatten()).map(|w| w * w).sum();
        loss = loss / b + 0.5 * alpha * sq / b;

        let mut flat = Vec::with_capacity(self.n_params());
        for (g, layer) in grads.iter().zip(&self.layers) {
            for (grow, wrow) in g.weights.iter().zip(&layer.weights) {
                flat.extend(grow.iter().zip(wrow).map(|(gw, w)| (gw + alpha * w) / b));
            }
            flat.extend(g.bias.iter().map(|gb| gb / b));
        }
        (loss, flat)
    }

    /// Mini-batch Adam on standardised inputs. Training stops after
    /// `max_iter` epochs, or once the epoch loss has failed to improve on
    /// the best so far by `tol` for more than `n_iter_no_change` epochs.
    pub fn fit(x: &[Vec<f64>], y: &[usize], n_classes: usize, params: &MlpParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_features = x.first().map_or(0, Vec::len);
        let mut net = Mlp::initialise(n_features, &params.hidden_layer_sizes, n_classes, &mut rng);
        net.standardizer = Standardizer::fit(x);
        let xs: Vec<Vec<f64>> = x.iter().map(|r| net.standardizer.apply(r)).collect();

        let n = xs.len();
        let batch = params.batch_size.resolve(n);
        let mut order: Vec<usize> = (0..n).collect();
        let mut theta = net.params();
        let mut m = vec![0.0; theta.len()];
        let mut v = vec![0.0; theta.len()];
        let mut t = 0i32;
        let mut best = f64::INFINITY;
        let mut stale = 0;
        let (b1, b2) = (params.beta_1, params.beta_2);
        let mut bx = Vec::with_capacity(batch);
        let mut by = Vec::with_capacity(batch);
        for _ in 0..params.max_iter {
            if params.shuffle {
                order.shuffle(&mut rng);
            }
            let mut total = 0.0;
            for chunk in order.chunks(batch) {
                bx.clear();
                by.clear();
                bx.extend(chunk.iter().map(|&i| xs[i].clone()));
                by.extend(chunk.iter().map(|&i| y[i]));
                let (loss, grad) = net.loss_and_gradient(&bx, &by, params.alpha);
                total += loss * chunk.len() as f64;
                t += 1;
                let lr = params.learning_rate_init * (1.0 - b2.powi(t)).sqrt() / (1.0 - b1.powi(t));
                for (((p, g), mi), vi) in theta.iter_mut().zip(&grad).zip(&mut m).zip(&mut v) {
                    *mi = b1 * *mi + (1.0 - b1) * g;
                    *vi = b2 * *vi + (1.0 - b2) * g * g;
                    *p -= lr * *mi / (vi.sqrt() + params.epsilon);
                }
                net.set_params(&theta);
            }
            let epoch_loss = total / n as f64;
            net.loss_curve.push(epoch_loss);
            if epoch_loss > best - params.tol {
                stale += 1;
            } else {
                stale = 0;
            }
            best = best.min(epoch_loss);
            if stale > params.n_iter_no_change {
                break;
            }
        }
        net
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let acts = self.forward_all(&self.standardizer.apply(x));
        log_softmax(acts.last().expect("output layer")).iter().map(|v| v.exp()).collect()
    }

    pub(crate) fn is_well_formed(&self, n_features: usize, n_classes: usize) -> bool {
        let mut fan_in = n_features;
        for layer in &self.layers {
            if layer.weights.len() != fan_in || layer.weights.iter().any(|r| r.len() != layer.bias.len()) {
                return false;
            }
            fan_in = layer.bias.len();
        }
        fan_in == n_classes
            && self.standardizer.mean.len() == n_features
            && self.standardizer.scale.len() == n_features
            && self.params().iter().all(|v| v.is_finite())
    }
}
