//! Fully connected generator with hand-written backpropagation.
//!
//! Hidden layers apply the activation; the output layer is affine. Weights
//! are stored row-major as `(out_dim, in_dim)`. Parameters flatten layer by
//! layer, weights before biases; gradients use the same layout.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::drift::{SampleRole, SampleSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            other => Err(Error::Parse(format!("unknown activation `{other}`"))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Dense {
    in_dim: usize,
    out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl Dense {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Dense {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    fn len(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// `out[b] = W in[b] + bias` for every row `b`.
    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        let batch = input.len() / self.in_dim;
        out.clear();
        out.reserve(batch * self.out_dim);
        for x in input.chunks_exact(self.in_dim) {
            for (row, b) in self.weights.chunks_exact(self.in_dim).zip(&self.bias) {
                let dot: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum();
                out.push(dot + b);
            }
        }
    }
}

/// Multilayer perceptron mapping `R^widths[0]` to `R^widths[last]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNet {
    layers: Vec<Dense>,
    activation: Activation,
}

/// Layer inputs recorded during a forward pass; `inputs[l]` feeds layer `l`
/// and the final entry is the network output.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    inputs: Vec<Vec<f64>>,
    batch: usize,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.inputs.last().expect("cache has the network output")
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

fn check_widths(widths: &[usize]) -> Result<()> {
    if widths.len() < 2 || widths.contains(&0) {
        return Err(Error::invalid("layer widths", format!("{widths:?}")));
    }
    Ok(())
}

impl GeneratorNet {
    /// All parameters zero.
    pub fn zeros(widths: &[usize], activation: Activation) -> Result<Self> {
        check_widths(widths)?;
        Ok(GeneratorNet {
            layers: widths
                .windows(2)
                .map(|w| Dense::zeros(w[0], w[1]))
                .collect(),
            activation,
        })
    }

    /// Weights `N(0, 1 / fan_in)`, zero biases.
    pub fn random<R: Rng + ?Sized>(
        widths: &[usize],
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Self::zeros(widths, activation)?;
        for layer in &mut net.layers {
            let scale = (1.0 / layer.in_dim as f64).sqrt();
            for w in &mut layer.weights {
                let z: f64 = StandardNormal.sample(rng);
                *w = scale * z;
            }
        }
        Ok(net)
    }

    /// A single affine layer computing the identity on `R^dim`.
    pub fn identity(dim: usize) -> Result<Self> {
        let mut net = Self::zeros(&[dim, dim], Activation::Tanh)?;
        for i in 0..dim {
            net.layers[0].weights[i * dim + i] = 1.0;
        }
        Ok(net)
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].in_dim];
        w.extend(self.layers.iter().map(|l| l.out_dim));
        w
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").out_dim
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(Dense::len).sum()
    }

    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.num_parameters());
        for l in &self.layers {
            p.extend_from_slice(&l.weights);
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_parameters() {
            return Err(Error::DimensionMismatch {
                expected: self.num_parameters(),
                got: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("network parameters"));
        }
        let mut rest = params;
        for l in &mut self.layers {
            let (w, tail) = rest.split_at(l.weights.len());
            let (b, tail) = tail.split_at(l.bias.len());
            l.weights.copy_from_slice(w);
            l.bias.copy_from_slice(b);
            rest = tail;
        }
        Ok(())
    }

    /// `params -= step * grad`, in the flat layout.
    pub fn apply_update(&mut self, grad: &[f64], step: f64) -> Result<()> {
        if grad.len() != self.num_parameters() {
            return Err(Error::DimensionMismatch {
                expected: self.num_parameters(),
                got: grad.len(),
            });
        }
        let mut g = grad.iter();
        for l in &mut self.layers {
            for p in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *p -= step * g.next().expect("length checked");
            }
        }
        Ok(())
    }

    /// Forward pass on row-major inputs, keeping what backpropagation needs.
    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache> {
        let d = self.input_dim();
        if input.is_empty() || input.len() % d != 0 {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: input.len() % d,
            });
        }
        let batch = input.len() / d;
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        inputs.push(input.to_vec());
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.affine(inputs.last().expect("non-empty"), &mut out);
            if i != last {
                out.iter_mut().for_each(|z| *z = self.activation.apply(*z));
            }
            inputs.push(out);
        }
        Ok(ForwardCache { inputs, batch })
    }

    /// `f_theta(z)` for every point of `z`; the result has role
    /// `GeneratedQ`.
    pub fn forward(&self, z: &SampleSet) -> Result<SampleSet> {
        if z.dim() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: z.dim(),
            });
        }
        let cache = self.forward_cached(z.as_flat())?;
        let out = cache.inputs.into_iter().last().expect("output present");
        SampleSet::from_flat(self.output_dim(), out, SampleRole::GeneratedQ)
    }

    /// Gradient of a scalar loss with respect to all parameters, given
    /// `dL/d(output)` in row-major layout.
    pub fn backward(&self, cache: &ForwardCache, grad_output: &[f64]) -> Result<Vec<f64>> {
        if grad_output.len() != cache.batch * self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: cache.batch * self.output_dim(),
                got: grad_output.len(),
            });
        }
        let mut grads: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        let mut delta = grad_output.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let input = &cache.inputs[l];
            let mut gw = vec![0.0; layer.weights.len()];
            let mut gb = vec![0.0; layer.bias.len()];
            for (d_row, x) in delta
                .chunks_exact(layer.out_dim)
                .zip(input.chunks_exact(layer.in_dim))
            {
                for (o, &d) in d_row.iter().enumerate() {
                    gb[o] += d;
                    let row = &mut gw[o * layer.in_dim..(o + 1) * layer.in_dim];
                    row.iter_mut().zip(x).for_each(|(g, xi)| *g += d * xi);
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; cache.batch * layer.in_dim];
                for ((p_row, d_row), a_row) in prev
                    .chunks_exact_mut(layer.in_dim)
                    .zip(delta.chunks_exact(layer.out_dim))
                    .zip(input.chunks_exact(layer.in_dim))
                {
                    for (o, &d) in d_row.iter().enumerate() {
                        let w_row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                        p_row.iter_mut().zip(w_row).for_each(|(p, w)| *p += d * w);
                    }
                    p_row
                        .iter_mut()
                        .zip(a_row)
                        .for_each(|(p, a)| *p *= self.activation.derivative_from_output(*a));
                }
                delta = prev;
            }
            gw.extend_from_slice(&gb);
            grads.push(gw);
        }
        grads.reverse();
        Ok(grads.concat())
    }
}

/// `sum_j |out_j - target_j|^2 / batch` and its gradient in the outputs.
pub fn mse_loss(output: &[f64], target: &[f64], dim: usize) -> (f64, Vec<f64>) {
    let batch = (output.len() / dim) as f64;
    let mut loss = 0.0;
    let grad = output
        .iter()
        .zip(target)
        .map(|(o, t)| {
            let r = o - t;
            loss += r * r;
            2.0 * r / batch
        })
        .collect();
    (loss / batch, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, streams};

    #[test]
    fn zero_net_outputs_zero() {
        let net = GeneratorNet::zeros(&[2, 8, 2], Activation::Tanh).unwrap();
        let z = SampleSet::new(vec![vec![1.0, -2.0], vec![0.3, 0.4]], SampleRole::TargetP).unwrap();
        let out = net.forward(&z).unwrap();
        assert!(out.as_flat().iter().all(|v| *v == 0.0));
        assert_eq!(out.role(), SampleRole::GeneratedQ);
    }

    #[test]
    fn identity_net() {
        let net = GeneratorNet::identity(2).unwrap();
        let z = SampleSet::new(vec![vec![1.0, -2.0], vec![0.3, 0.4]], SampleRole::TargetP).unwrap();
        assert_eq!(net.forward(&z).unwrap().as_flat(), z.as_flat());
    }

    #[test]
    fn parameter_round_trip_and_validation() {
        let mut r = rng::stream(1, streams::INIT);
        let mut net = GeneratorNet::random(&[2, 5, 3, 2], Activation::Relu, &mut r).unwrap();
        assert_eq!(net.num_parameters(), 2 * 5 + 5 + 5 * 3 + 3 + 3 * 2 + 2);
        let p = net.parameters();
        let mut q = p.clone();
        q[3] += 1.0;
        net.set_parameters(&q).unwrap();
        assert_eq!(net.parameters()[3], p[3] + 1.0);
        assert!(net.set_parameters(&p[1..]).is_err());
        assert!(GeneratorNet::zeros(&[2], Activation::Tanh).is_err());
        assert!(GeneratorNet::zeros(&[2, 0, 2], Activation::Tanh).is_err());
        let bad = SampleSet::new(vec![vec![1.0, 2.0, 3.0]], SampleRole::TargetP).unwrap();
        assert!(net.forward(&bad).is_err());
    }

    fn loss_at(net: &GeneratorNet, z: &[f64], target: &[f64]) -> f64 {
        let cache = net.forward_cached(z).unwrap();
        mse_loss(cache.output(), target, net.output_dim()).0
    }

    #[test]
    fn backprop_matches_finite_differences() {
        for (seed, act) in [(3, Activation::Tanh), (4, Activation::Relu)] {
            let mut r = rng::stream(seed, streams::INIT);
            let net = GeneratorNet::random(&[2, 6, 5, 2], act, &mut r).unwrap();
            let z: Vec<f64> = (0..14).map(|_| r.random_range(-2.0..2.0)).collect();
            let target: Vec<f64> = (0..14).map(|_| r.random_range(-2.0..2.0)).collect();
            let cache = net.forward_cached(&z).unwrap();
            let (_, g_out) = mse_loss(cache.output(), &target, 2);
            let grad = net.backward(&cache, &g_out).unwrap();

            let base = net.parameters();
            let h = 1e-5;
            for i in 0..base.len() {
                let mut probe = net.clone();
                let mut p = base.clone();
                p[i] = base[i] + h;
                probe.set_parameters(&p).unwrap();
                let up = loss_at(&probe, &z, &target);
                p[i] = base[i] - h;
                probe.set_parameters(&p).unwrap();
                let down = loss_at(&probe, &z, &target);
                let fd = (up - down) / (2.0 * h);
                let err = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-3);
                assert!(err < 1e-5, "{act} param {i}: fd {fd} vs {}", grad[i]);
            }
        }
    }

    #[test]
    fn mse_known_value() {
        let (l, g) = mse_loss(&[1.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 1.0], 2);
        assert_eq!(l, (1.0 + 4.0 + 1.0) / 2.0);
        assert_eq!(g, vec![1.0, 2.0, 0.0, -1.0]);
    }
}
