//! Nonlinear filtration: a map `φ` from the linearly filtered return vector
//! to the next observed return vector, fitted either by per-coordinate
//! polynomial least squares or by a backpropagation-trained perceptron.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eigen::{jacobi_eigen, JacobiConfig, SymmetricMatrix};
use crate::math;
use crate::Matrix;

/// Gram-matrix condition number above which a ridge term is added.
pub const RIDGE_CONDITION_LIMIT: f64 = 1e12;

/// Central-difference step used by [`gradient_check`].
pub const GRADIENT_CHECK_STEP: f64 = 1e-5;

/// Gradient magnitude, relative to the loss, below which central differences
/// at [`GRADIENT_CHECK_STEP`] are dominated by rounding in the loss itself.
pub const GRADIENT_CHECK_NOISE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NonlinearError {
    #[error("too few samples: need {needed}, have {available}")]
    TooFewSamples { needed: usize, available: usize },
    #[error("coordinate {0} takes a single value; cannot fit a slope")]
    DegenerateDesign(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training loss became non-finite at epoch {0}")]
    NonFiniteLoss(usize),
    #[error("invalid network: {0}")]
    InvalidNetwork(&'static str),
    #[error("invalid training config: {0}")]
    InvalidConfig(&'static str),
    #[error("empty dataset")]
    EmptyDataset,
}

/// Per-coordinate polynomial `φ_j(x) = Σ_k c_jk · z_j^k`, `z_j = (x_j − shift_j) / scale_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFilter {
    pub degree: usize,
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
    /// `dim × (degree + 1)`, lowest power first, in the normalized variable.
    pub coeffs: Vec<Vec<f64>>,
    /// Coordinates that needed a ridge term.
    pub ridged: Vec<bool>,
}

impl PolyFilter {
    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, NonlinearError> {
        if x.len() != self.dim() {
            return Err(NonlinearError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok((0..self.dim())
            .map(|j| {
                let z = (x[j] - self.shift[j]) / self.scale[j];
                horner(&self.coeffs[j], z)
            })
            .collect())
    }

    /// Coefficients of coordinate `j` in powers of the raw input `x_j`.
    pub fn raw_coefficients(&self, j: usize) -> Vec<f64> {
        let c = &self.coeffs[j];
        let (mu, s) = (self.shift[j], self.scale[j]);
        let mut raw = vec![0.0; c.len()];
        // Σ_k c_k ((x − μ)/s)^k expanded binomially.
        for (k, ck) in c.iter().enumerate() {
            let factor = ck / math::powi(s, k as u32);
            let mut binom = 1.0;
            for (m, r) in raw.iter_mut().enumerate().take(k + 1) {
                *r += factor * binom * math::powi(-mu, (k - m) as u32);
                binom = binom * (k - m) as f64 / (m + 1) as f64;
            }
        }
        raw
    }
}

fn horner(c: &[f64], z: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ck| acc * z + ck)
}

/// Least-squares fit of one polynomial per output coordinate, using only the
/// matching input coordinate.
pub fn polyfit<X, Y>(inputs: &[X], targets: &[Y], degree: usize) -> Result<PolyFilter, NonlinearError>
where
    X: AsRef<[f64]>,
    Y: AsRef<[f64]>,
{
    if inputs.len() != targets.len() {
        return Err(NonlinearError::DimensionMismatch {
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    if inputs.len() < degree + 1 {
        return Err(NonlinearError::TooFewSamples {
            needed: degree + 1,
            available: inputs.len(),
        });
    }
    let dim = inputs[0].as_ref().len();
    for (x, t) in inputs.iter().zip(targets) {
        for got in [x.as_ref().len(), t.as_ref().len()] {
            if got != dim {
                return Err(NonlinearError::DimensionMismatch { expected: dim, got });
            }
        }
    }
    let n = inputs.len() as f64;
    let mut filter = PolyFilter {
        degree,
        shift: Vec::with_capacity(dim),
        scale: Vec::with_capacity(dim),
        coeffs: Vec::with_capacity(dim),
        ridged: Vec::with_capacity(dim),
    };
    for j in 0..dim {
        let xs: Vec<f64> = inputs.iter().map(|x| x.as_ref()[j]).collect();
        let ts: Vec<f64> = targets.iter().map(|t| t.as_ref()[j]).collect();
        let mean = xs.iter().sum::<f64>() / n;
        let spread = xs.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
        if degree >= 1 && spread == 0.0 {
            return Err(NonlinearError::DegenerateDesign(j));
        }
        let scale = if spread == 0.0 { 1.0 } else { spread };
        let design: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| {
                let z = (x - mean) / scale;
                (0..=degree).map(|k| math::powi(z, k as u32)).collect()
            })
            .collect();
        let (coeffs, ridged) = solve_least_squares(&design, &ts);
        filter.shift.push(mean);
        filter.scale.push(scale);
        filter.coeffs.push(coeffs);
        filter.ridged.push(ridged);
    }
    Ok(filter)
}

/// Normal equations with a ridge fallback for ill-conditioned Gram matrices.
fn solve_least_squares(design: &[Vec<f64>], targets: &[f64]) -> (Vec<f64>, bool) {
    let p = design[0].len();
    let gram = SymmetricMatrix::from_upper(p, |a, b| design.iter().map(|row| row[a] * row[b]).sum());
    let rhs: Vec<f64> = (0..p)
        .map(|a| design.iter().zip(targets).map(|(row, t)| row[a] * t).sum())
        .collect();
    let spectrum = jacobi_eigen(&gram, &JacobiConfig::precise()).ok();
    let (largest, smallest) = spectrum
        .as_ref()
        .map(|e| (e.values[0].abs(), e.values.last().copied().unwrap_or(0.0)))
        .unwrap_or((1.0, 0.0));
    let condition = if smallest > 0.0 {
        largest / smallest
    } else {
        f64::INFINITY
    };
    let mut system = gram.into_matrix();
    let ridged = condition > RIDGE_CONDITION_LIMIT;
    if ridged {
        let alpha = largest.max(f64::MIN_POSITIVE) / RIDGE_CONDITION_LIMIT;
        for a in 0..p {
            system[(a, a)] += alpha;
        }
    }
    (cholesky_solve(&system, &rhs), ridged)
}

/// Solves `A x = b` for symmetric positive definite `A`.
fn cholesky_solve(a: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                l[(i, i)] = math::sqrt(sum.max(f64::MIN_POSITIVE));
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (b[i] - s) / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[(k, i)] * x[k]).sum();
        x[i] = (y[i] - s) / l[(i, i)];
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
    /// Linear hidden units.
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => math::tanh(z),
            Activation::Sigmoid => 1.0 / (1.0 + math::exp(-z)),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation value `a = f(z)`.
    #[inline]
    fn derivative(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer; `weights` is `outputs × inputs` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let w = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.biases[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }
}

/// Feedforward network: hidden layers use `activation`, the output is linear.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    pub layers: Vec<Dense>,
    pub activation: Activation,
}

impl MlpNetwork {
    /// Network with every parameter zero. `sizes` lists input, hidden and output widths.
    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self, NonlinearError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(NonlinearError::InvalidNetwork(
                "need at least input and output layers of nonzero width",
            ));
        }
        Ok(Self {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            activation,
        })
    }

    /// Weights uniform in `±1/√fan_in`, biases zero, drawn from `seed`.
    pub fn seeded(sizes: &[usize], activation: Activation, seed: u64) -> Result<Self, NonlinearError> {
        let mut net = Self::zeros(sizes, activation)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut net.layers {
            let bound = 1.0 / math::sqrt(layer.inputs as f64);
            for w in &mut layer.weights {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    /// Validates shapes and finiteness of externally supplied layers.
    pub fn from_layers(layers: Vec<Dense>, activation: Activation) -> Result<Self, NonlinearError> {
        if layers.is_empty() {
            return Err(NonlinearError::InvalidNetwork("no layers"));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.inputs == 0 || l.outputs == 0 {
                return Err(NonlinearError::InvalidNetwork("zero-width layer"));
            }
            if l.weights.len() != l.inputs * l.outputs || l.biases.len() != l.outputs {
                return Err(NonlinearError::InvalidNetwork("parameter count does not match shape"));
            }
            if i > 0 && layers[i - 1].outputs != l.inputs {
                return Err(NonlinearError::InvalidNetwork("consecutive layer widths differ"));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(NonlinearError::InvalidNetwork("non-finite parameter"));
            }
        }
        Ok(Self { layers, activation })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(|l| l.outputs));
        s
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NonlinearError> {
        self.check_input(x)?;
        Ok(self.activations(x).pop().unwrap())
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NonlinearError> {
        if x.len() != self.input_dim() {
            return Err(NonlinearError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Outputs of every layer, starting with the input itself.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.affine(&acts[i]);
            if i != last {
                for v in &mut z {
                    *v = self.activation.apply(*v);
                }
            }
            acts.push(z);
        }
        acts
    }

    fn check_dataset<X: AsRef<[f64]>, Y: AsRef<[f64]>>(
        &self,
        inputs: &[X],
        targets: &[Y],
    ) -> Result<(), NonlinearError> {
        if inputs.is_empty() {
            return Err(NonlinearError::EmptyDataset);
        }
        if inputs.len() != targets.len() {
            return Err(NonlinearError::DimensionMismatch {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        for (x, t) in inputs.iter().zip(targets) {
            self.check_input(x.as_ref())?;
            if t.as_ref().len() != self.output_dim() {
                return Err(NonlinearError::DimensionMismatch {
                    expected: self.output_dim(),
                    got: t.as_ref().len(),
                });
            }
        }
        Ok(())
    }

    /// Mean squared error (averaged over samples and outputs) plus
    /// `l2/2 · Σ w²` over weights, and its gradient.
    pub fn loss_and_gradient<X: AsRef<[f64]>, Y: AsRef<[f64]>>(
        &self,
        inputs: &[X],
        targets: &[Y],
        l2_penalty: f64,
    ) -> Result<(f64, Gradient), NonlinearError> {
        self.check_dataset(inputs, targets)?;
        let mut grad = Gradient {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        };
        let norm = 1.0 / (inputs.len() * self.output_dim()) as f64;
        let mut loss = 0.0;
        let last = self.layers.len() - 1;
        for (x, t) in inputs.iter().zip(targets) {
            let acts = self.activations(x.as_ref());
            let out = &acts[last + 1];
            let mut delta: Vec<f64> = out
                .iter()
                .zip(t.as_ref())
                .map(|(o, t)| {
                    loss += (o - t) * (o - t) * norm;
                    2.0 * (o - t) * norm
                })
                .collect();
            for i in (0..=last).rev() {
                let layer = &self.layers[i];
                let g = &mut grad.layers[i];
                let prev = &acts[i];
                for (o, d) in delta.iter().enumerate() {
                    g.biases[o] += d;
                    let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                    for (gw, a) in row.iter_mut().zip(prev) {
                        *gw += d * a;
                    }
                }
                if i > 0 {
                    delta = (0..layer.inputs)
                        .map(|k| {
                            let back: f64 = (0..layer.outputs)
                                .map(|o| layer.weights[o * layer.inputs + k] * delta[o])
                                .sum();
                            back * self.activation.derivative(prev[k])
                        })
                        .collect();
                }
            }
        }
        if l2_penalty > 0.0 {
            for (layer, g) in self.layers.iter().zip(&mut grad.layers) {
                for (w, gw) in layer.weights.iter().zip(&mut g.weights) {
                    loss += 0.5 * l2_penalty * w * w;
                    *gw += l2_penalty * w;
                }
            }
        }
        Ok((loss, grad))
    }

    fn parameters_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.biases.iter_mut()))
    }

    fn parameters(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }
}

/// Gradient laid out like the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<Dense>,
}

impl Gradient {
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(l.biases.iter()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Seed for weight initialization.
    pub seed: u64,
    pub l2_penalty: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            learning_rate: 0.05,
            seed: 42,
            l2_penalty: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NonlinearError> {
        if self.epochs == 0 {
            return Err(NonlinearError::InvalidConfig("epochs must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NonlinearError::InvalidConfig("learning rate must be positive"));
        }
        if !(self.l2_penalty >= 0.0) {
            return Err(NonlinearError::InvalidConfig("l2 penalty must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub network: MlpNetwork,
    pub final_loss: f64,
    /// Loss before each update, then the final loss.
    pub losses: Vec<f64>,
}

/// Full-batch gradient descent on [`MlpNetwork::loss_and_gradient`].
pub fn mlp_train<X: AsRef<[f64]>, Y: AsRef<[f64]>>(
    net: &MlpNetwork,
    inputs: &[X],
    targets: &[Y],
    cfg: &TrainConfig,
) -> Result<Trained, NonlinearError> {
    cfg.validate()?;
    let mut net = net.clone();
    let mut losses = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..cfg.epochs {
        let (loss, grad) = net.loss_and_gradient(inputs, targets, cfg.l2_penalty)?;
        if !loss.is_finite() {
            return Err(NonlinearError::NonFiniteLoss(epoch));
        }
        losses.push(loss);
        for (p, g) in net.parameters_mut().zip(grad.values()) {
            *p -= cfg.learning_rate * g;
        }
    }
    let (final_loss, _) = net.loss_and_gradient(inputs, targets, cfg.l2_penalty)?;
    if !final_loss.is_finite() || net.parameters().any(|p| !p.is_finite()) {
        return Err(NonlinearError::NonFiniteLoss(cfg.epochs));
    }
    losses.push(final_loss);
    Ok(Trained {
        network: net,
        final_loss,
        losses,
    })
}

/// Largest relative discrepancy between the backpropagated gradient of the
/// single-sample loss and central finite differences over every parameter.
///
/// The relative error of one parameter is `|a − f| / max(|a|, |f|, floor)`
/// with `floor = GRADIENT_CHECK_NOISE_FLOOR · loss`, since a difference
/// quotient cannot resolve gradients much smaller than `ε_mach · loss / h`.
/// Entries where both magnitudes are below `1e-10` count as agreeing.
pub fn gradient_check(net: &MlpNetwork, x: &[f64], target: &[f64]) -> Result<f64, NonlinearError> {
    let (loss, grad) = net.loss_and_gradient(&[x], &[target], 0.0)?;
    let floor = GRADIENT_CHECK_NOISE_FLOOR * loss.abs();
    let analytic: Vec<f64> = grad.values().copied().collect();
    let loss_at = |n: &MlpNetwork| -> f64 {
        let out = n.activations(x).pop().unwrap();
        let norm = 1.0 / out.len() as f64;
        out.iter().zip(target).map(|(o, t)| (o - t) * (o - t) * norm).sum()
    };
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (idx, a) in analytic.iter().enumerate() {
        let original = *probe.parameters_mut().nth(idx).unwrap();
        *probe.parameters_mut().nth(idx).unwrap() = original + GRADIENT_CHECK_STEP;
        let up = loss_at(&probe);
        *probe.parameters_mut().nth(idx).unwrap() = original - GRADIENT_CHECK_STEP;
        let down = loss_at(&probe);
        *probe.parameters_mut().nth(idx).unwrap() = original;
        let numeric = (up - down) / (2.0 * GRADIENT_CHECK_STEP);
        let scale = a.abs().max(numeric.abs());
        if scale < 1e-10 {
            continue;
        }
        worst = worst.max((a - numeric).abs() / scale.max(floor));
    }
    Ok(worst)
}

/// A fitted `φ`.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearFilter {
    Poly(PolyFilter),
    Mlp(MlpNetwork),
}

/// `y_{n+1} = φ(y_n)`.
pub fn nonlinear_forecast(filter: &NonlinearFilter, y_now: &[f64]) -> Result<Vec<f64>, NonlinearError> {
    match filter {
        NonlinearFilter::Poly(p) => p.eval(y_now),
        NonlinearFilter::Mlp(n) => n.forward(y_now),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyfit_identity() {
        let xs: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.3 - 0.7, (i * i) as f64]).collect();
        let f = polyfit(&xs, &xs, 1).unwrap();
        for j in 0..2 {
            let raw = f.raw_coefficients(j);
            assert!(raw[0].abs() < 1e-10, "{raw:?}");
            assert!((raw[1] - 1.0).abs() < 1e-10, "{raw:?}");
        }
    }

    #[test]
    fn polyfit_exact_line() {
        let xs = [[0.0], [1.0], [2.0]];
        let ys = [[1.0], [3.0], [5.0]];
        let f = polyfit(&xs, &ys, 1).unwrap();
        let raw = f.raw_coefficients(0);
        assert!((raw[0] - 1.0).abs() < 1e-12 && (raw[1] - 2.0).abs() < 1e-12);
        let out = nonlinear_forecast(&NonlinearFilter::Poly(f), &[3.0]).unwrap();
        assert!((out[0] - 7.0).abs() < 1e-12);
    }

    #[test]
    fn polyfit_errors() {
        assert_eq!(
            polyfit(&[[0.0], [1.0]], &[[0.0], [1.0]], 3),
            Err(NonlinearError::TooFewSamples {
                needed: 4,
                available: 2
            })
        );
        assert_eq!(
            polyfit(&[[2.0], [2.0], [2.0]], &[[0.0], [1.0], [2.0]], 1),
            Err(NonlinearError::DegenerateDesign(0))
        );
        assert!(matches!(
            polyfit(&[[0.0, 1.0], [1.0, 2.0]], &[[0.0], [1.0]], 1),
            Err(NonlinearError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn polyfit_recovers_quadratic() {
        let xs: Vec<[f64; 1]> = (0..9).map(|i| [i as f64 * 1e-4]).collect();
        let ys: Vec<[f64; 1]> = xs.iter().map(|x| [2.0 - 3.0 * x[0] + 5e3 * x[0] * x[0]]).collect();
        let f = polyfit(&xs, &ys, 2).unwrap();
        assert!(!f.ridged[0]);
        let raw = f.raw_coefficients(0);
        assert!((raw[0] - 2.0).abs() < 1e-9);
        assert!((raw[1] + 3.0).abs() < 1e-6);
        assert!((raw[2] - 5e3).abs() < 1e-3);
    }

    #[test]
    fn forward_zero_network() {
        let net = MlpNetwork::zeros(&[3, 4, 2], Activation::Tanh).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(
            net.forward(&[1.0]),
            Err(NonlinearError::DimensionMismatch { expected: 3, got: 1 })
        );
    }

    #[test]
    fn forward_single_hidden_unit() {
        let mut net = MlpNetwork::zeros(&[1, 1, 1], Activation::Tanh).unwrap();
        net.layers[0].weights[0] = 1.0;
        net.layers[1].weights[0] = 1.0;
        let out = net.forward(&[0.1]).unwrap();
        assert!((out[0] - 0.1f64.tanh()).abs() < 1e-15);
        assert!((out[0] - 0.09967).abs() < 1e-5);
    }

    #[test]
    fn seeded_init_is_bounded_and_deterministic() {
        let a = MlpNetwork::seeded(&[4, 8, 8, 2], Activation::Tanh, 7).unwrap();
        let b = MlpNetwork::seeded(&[4, 8, 8, 2], Activation::Tanh, 7).unwrap();
        assert_eq!(a, b);
        for l in &a.layers {
            let bound = 1.0 / (l.inputs as f64).sqrt();
            assert!(l.weights.iter().all(|w| w.abs() <= bound));
        }
        assert_ne!(a, MlpNetwork::seeded(&[4, 8, 8, 2], Activation::Tanh, 8).unwrap());
    }

    #[test]
    fn from_layers_validates() {
        let bad = Dense {
            inputs: 2,
            outputs: 1,
            weights: vec![0.0],
            biases: vec![0.0],
        };
        assert!(MlpNetwork::from_layers(vec![bad], Activation::Tanh).is_err());
    }

    #[test]
    fn gradient_check_zero_network() {
        let net = MlpNetwork::zeros(&[2, 3, 1], Activation::Tanh).unwrap();
        assert_eq!(gradient_check(&net, &[0.0, 0.0], &[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn divergence_is_reported() {
        let net = MlpNetwork::seeded(&[2, 4, 1], Activation::Tanh, 1).unwrap();
        let xs = [[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let ys = [[1.0], [1.0], [0.0]];
        let cfg = TrainConfig {
            epochs: 1000,
            learning_rate: 1e6,
            ..TrainConfig::default()
        };
        assert!(matches!(
            mlp_train(&net, &xs, &ys, &cfg),
            Err(NonlinearError::NonFiniteLoss(_))
        ));
    }

    #[test]
    fn zero_targets_loss_decreases() {
        let net = MlpNetwork::seeded(&[2, 4, 1], Activation::Tanh, 3).unwrap();
        let xs = [[0.5, -0.2], [0.1, 0.9], [-0.7, 0.3], [0.2, 0.2]];
        let ys = [[0.0]; 4];
        let cfg = TrainConfig {
            epochs: 300,
            learning_rate: 0.05,
            ..TrainConfig::default()
        };
        let t = mlp_train(&net, &xs, &ys, &cfg).unwrap();
        assert!(t.losses.windows(2).all(|w| w[1] <= w[0]));
        assert!(t.final_loss < t.losses[0]);
    }
}
