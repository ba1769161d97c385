//! The two structured architectures: GAMnet and xNN.
//!
//! Both are sums of ridge functions feeding a weighted combination layer.
//! An xNN ridge reads a learned linear projection `beta_k . x`; a GAMnet
//! ridge reads covariate `k` directly (one ridge per covariate). Each ridge
//! is a small ReLU network with a single bias-free linear output unit, so
//! every ridge's contribution to the prediction is exactly attributable —
//! that is what makes the effect decomposition exact.
//!
//! Gradients are hand-derived (there are only these two architectures) and
//! checked against central finite differences in the tests.

use crate::error::{Error, Result};
use crate::init::{glorot_uniform, init_layer};
use crate::matrix::{gemm, Matrix};
use crate::rng::Rng;
use serde::{Deserialize, Serialize};

/// Architecture of one ridge subnetwork: ReLU hidden layers, then a single
/// bias-free linear output unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubnetSpec {
    /// Hidden layer widths; depth = length. Must be non-empty, widths >= 1.
    pub hidden: Vec<usize>,
}

impl SubnetSpec {
    pub fn new(hidden: Vec<usize>) -> Self {
        SubnetSpec { hidden }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden.is_empty() {
            return Err(Error::InvalidArchitecture(
                "subnet must have at least one hidden layer".into(),
            ));
        }
        if self.hidden.iter().any(|&w| w == 0) {
            return Err(Error::InvalidArchitecture(format!(
                "subnet hidden widths must be >= 1, got {:?}",
                self.hidden
            )));
        }
        Ok(())
    }

    /// Trainable parameters in one ridge subnet (input dim is always 1).
    fn num_params(&self) -> usize {
        let mut n = 0;
        let mut fan_in = 1;
        for &w in &self.hidden {
            n += fan_in * w + w;
            fan_in = w;
        }
        n + fan_in // bias-free output unit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Gamnet,
    Xnn,
}

impl std::fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LearnerKind::Gamnet => write!(f, "gamnet"),
            LearnerKind::Xnn => write!(f, "xnn"),
        }
    }
}

/// Architecture of one base learner. All ridges share the same subnet spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    /// Number of ridge functions K. For GAMnet this must equal the number of
    /// covariates (one ridge per covariate).
    pub num_ridges: usize,
    pub subnet: SubnetSpec,
}

impl LearnerSpec {
    pub fn gamnet(num_features: usize, hidden: Vec<usize>) -> Self {
        LearnerSpec {
            kind: LearnerKind::Gamnet,
            num_ridges: num_features,
            subnet: SubnetSpec::new(hidden),
        }
    }

    pub fn xnn(num_ridges: usize, hidden: Vec<usize>) -> Self {
        LearnerSpec {
            kind: LearnerKind::Xnn,
            num_ridges,
            subnet: SubnetSpec::new(hidden),
        }
    }

    pub fn validate(&self, num_features: usize) -> Result<()> {
        self.subnet.validate()?;
        if num_features == 0 {
            return Err(Error::InvalidArchitecture(
                "learner needs at least one covariate".into(),
            ));
        }
        match self.kind {
            LearnerKind::Gamnet if self.num_ridges != num_features => {
                Err(Error::InvalidArchitecture(format!(
                    "GAMnet must have one ridge per covariate: K={} but P={}",
                    self.num_ridges, num_features
                )))
            }
            _ if self.num_ridges == 0 => Err(Error::InvalidArchitecture(
                "learner must have at least one ridge".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Total trainable parameter count for `r(h)` and tie-breaking.
    pub fn num_params(&self, num_features: usize) -> usize {
        let proj = match self.kind {
            LearnerKind::Xnn => self.num_ridges * num_features,
            LearnerKind::Gamnet => 0,
        };
        proj + self.num_ridges * self.subnet.num_params() + self.num_ridges + 1
    }
}

/// One dense layer stored as `(in_dim x out_dim)` weights. The bias vector is
/// empty for the ridge output unit (it has none).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// One ridge subnetwork: hidden ReLU layers then the bias-free output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeNet {
    pub layers: Vec<DenseLayer>,
}

/// A trained (or in-training) GAMnet or xNN base learner.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseLearner {
    pub spec: LearnerSpec,
    num_features: usize,
    /// K x P projection matrix; `None` for GAMnet (ridge k reads covariate k).
    pub projections: Option<Matrix>,
    pub ridges: Vec<RidgeNet>,
    pub combination_weights: Vec<f64>,
    pub combination_bias: f64,
    /// Ensemble mixture weight `w_j`; zero until the ensemble assigns it.
    pub mixture_weight: f64,
}

/// Gradients for every parameter of a learner, in the learner's own shapes.
#[derive(Debug, Clone)]
pub struct LearnerGrads {
    pub projections: Option<Matrix>,
    pub ridges: Vec<RidgeNet>,
    pub combination_weights: Vec<f64>,
    pub combination_bias: f64,
}

impl BaseLearner {
    /// Fresh learner with He-normal hidden layers, Glorot-uniform linear
    /// layers, zero biases, and mixture weight 0.
    pub fn new(spec: LearnerSpec, num_features: usize, rng: &mut Rng) -> Result<Self> {
        spec.validate(num_features)?;
        let k = spec.num_ridges;
        let projections = match spec.kind {
            LearnerKind::Xnn => {
                // Each projection row is a P -> 1 linear map.
                let limit = (6.0 / (num_features + 1) as f64).sqrt();
                Some(Matrix::from_fn(k, num_features, |_, _| {
                    rng.uniform_in(-limit, limit)
                }))
            }
            LearnerKind::Gamnet => None,
        };
        let mut ridges = Vec::with_capacity(k);
        for _ in 0..k {
            let mut layers = Vec::with_capacity(spec.subnet.hidden.len() + 1);
            let mut fan_in = 1;
            for &w in &spec.subnet.hidden {
                let (weights, bias) = init_layer(fan_in, w, rng)?;
                layers.push(DenseLayer { weights, bias });
                fan_in = w;
            }
            let out = glorot_uniform(fan_in, 1, rng)?;
            layers.push(DenseLayer {
                weights: out,
                bias: Vec::new(),
            });
            ridges.push(RidgeNet { layers });
        }
        // Zero combination weights make a fresh learner output exactly zero,
        // so it enters an ensemble as a no-op and trains as a pure residual
        // fitter. The weights break symmetry on the first update because each
        // ridge output differs.
        let combination_weights = vec![0.0; k];
        Ok(BaseLearner {
            spec,
            num_features,
            projections,
            ridges,
            combination_weights,
            combination_bias: 0.0,
            mixture_weight: 0.0,
        })
    }

    /// Assemble a learner from explicit parts, validating every shape against
    /// the spec. Used by model deserialization and by tests that construct
    /// learners with pinned parameters.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        spec: LearnerSpec,
        num_features: usize,
        projections: Option<Matrix>,
        ridges: Vec<RidgeNet>,
        combination_weights: Vec<f64>,
        combination_bias: f64,
        mixture_weight: f64,
    ) -> Result<Self> {
        spec.validate(num_features)
            .map_err(|e| Error::InvariantViolation(e.to_string()))?;
        let k = spec.num_ridges;
        let bad = |msg: String| Err(Error::InvariantViolation(msg));
        match (&spec.kind, &projections) {
            (LearnerKind::Xnn, Some(beta)) => {
                if beta.rows() != k || beta.cols() != num_features {
                    return bad(format!(
                        "projection matrix is {}x{}, expected {}x{}",
                        beta.rows(),
                        beta.cols(),
                        k,
                        num_features
                    ));
                }
            }
            (LearnerKind::Xnn, None) => return bad("xNN learner lacks projections".into()),
            (LearnerKind::Gamnet, Some(_)) => {
                return bad("GAMnet learner must not carry projections".into())
            }
            (LearnerKind::Gamnet, None) => {}
        }
        if ridges.len() != k {
            return bad(format!("{} ridges for K = {}", ridges.len(), k));
        }
        if combination_weights.len() != k {
            return bad(format!(
                "{} combination weights for K = {}",
                combination_weights.len(),
                k
            ));
        }
        let depth = spec.subnet.hidden.len();
        for (kk, ridge) in ridges.iter().enumerate() {
            if ridge.layers.len() != depth + 1 {
                return bad(format!(
                    "ridge {} has {} layers, spec wants {} hidden + output",
                    kk + 1,
                    ridge.layers.len(),
                    depth
                ));
            }
            let mut fan_in = 1;
            for (l, layer) in ridge.layers.iter().enumerate() {
                let fan_out = if l < depth { spec.subnet.hidden[l] } else { 1 };
                let bias_len = if l < depth { fan_out } else { 0 };
                if layer.weights.rows() != fan_in
                    || layer.weights.cols() != fan_out
                    || layer.bias.len() != bias_len
                {
                    return bad(format!(
                        "ridge {} layer {} is {}x{} with {} biases, expected {}x{} with {}",
                        kk + 1,
                        l + 1,
                        layer.weights.rows(),
                        layer.weights.cols(),
                        layer.bias.len(),
                        fan_in,
                        fan_out,
                        bias_len
                    ));
                }
                fan_in = fan_out;
            }
        }
        Ok(BaseLearner {
            spec,
            num_features,
            projections,
            ridges,
            combination_weights,
            combination_bias,
            mixture_weight,
        })
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_params(&self) -> usize {
        self.spec.num_params(self.num_features)
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols() != self.num_features {
            return Err(Error::Shape(format!(
                "learner expects {} covariates, input is {}x{}",
                self.num_features,
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }

    /// Ridge inputs `z` (N x K): projections for xNN, the covariates
    /// themselves for GAMnet.
    fn ridge_inputs(&self, x: &Matrix) -> Result<Matrix> {
        match &self.projections {
            Some(beta) => gemm(x, beta, false, true),
            None => Ok(x.clone()),
        }
    }

    /// Raw ridge outputs `g_k(z_k)` (N x K), without combination weights.
    fn ridge_outputs(&self, x: &Matrix) -> Result<Matrix> {
        let z = self.ridge_inputs(x)?;
        let n = x.rows();
        let mut out = Matrix::zeros(n, self.spec.num_ridges);
        for (k, ridge) in self.ridges.iter().enumerate() {
            let mut a = Matrix::from_vec(n, 1, z.col(k))?;
            for (l, layer) in ridge.layers.iter().enumerate() {
                let mut next = gemm(&a, &layer.weights, false, false)?;
                if l + 1 < ridge.layers.len() {
                    for i in 0..n {
                        for (v, &b) in next.row_mut(i).iter_mut().zip(&layer.bias) {
                            *v = (*v + b).max(0.0);
                        }
                    }
                }
                a = next;
            }
            for i in 0..n {
                out.set(i, k, a.get(i, 0));
            }
        }
        Ok(out)
    }

    /// Per-ridge contributions (N x K): column k is
    /// `combination_weight_k * g_k(.)`. The full forward pass is the row sum
    /// plus the combination bias.
    pub fn forward_ridges(&self, x: &Matrix) -> Result<Matrix> {
        self.check_input(x)?;
        let mut out = self.ridge_outputs(x)?;
        for i in 0..out.rows() {
            for (v, &c) in out.row_mut(i).iter_mut().zip(&self.combination_weights) {
                *v *= c;
            }
        }
        Ok(out)
    }

    /// Learner output per sample: sum of ridge contributions plus bias.
    pub fn forward(&self, x: &Matrix) -> Result<Vec<f64>> {
        let ridges = self.forward_ridges(x)?;
        Ok(ridges
            .row_sums()
            .into_iter()
            .map(|s| s + self.combination_bias)
            .collect())
    }

    /// Forward pass keeping the activations needed for backprop.
    pub(crate) fn forward_cached(&self, x: &Matrix) -> Result<ForwardPass> {
        self.check_input(x)?;
        let z = self.ridge_inputs(x)?;
        let n = x.rows();
        let k = self.spec.num_ridges;
        let depth = self.spec.subnet.hidden.len();
        let mut hidden = Vec::with_capacity(k);
        let mut ridge_out = Matrix::zeros(n, k);
        for (kk, ridge) in self.ridges.iter().enumerate() {
            let input = Matrix::from_vec(n, 1, z.col(kk))?;
            let mut acts: Vec<Matrix> = Vec::with_capacity(depth);
            for (l, layer) in ridge.layers[..depth].iter().enumerate() {
                let src = if l == 0 { &input } else { &acts[l - 1] };
                let mut next = gemm(src, &layer.weights, false, false)?;
                for i in 0..n {
                    for (v, &b) in next.row_mut(i).iter_mut().zip(&layer.bias) {
                        *v = (*v + b).max(0.0);
                    }
                }
                acts.push(next);
            }
            let out = gemm(&acts[depth - 1], &ridge.layers[depth].weights, false, false)?;
            for i in 0..n {
                ridge_out.set(i, kk, out.get(i, 0));
            }
            hidden.push(acts);
        }
        let mut outputs = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = 0.0;
            for (kk, &c) in self.combination_weights.iter().enumerate() {
                s += c * ridge_out.get(i, kk);
            }
            outputs.push(s + self.combination_bias);
        }
        Ok(ForwardPass {
            z,
            hidden,
            ridge_out,
            outputs,
        })
    }

    /// Gradients of `sum_i upstream_i * forward(x_i)` for every parameter.
    ///
    /// The ReLU subgradient at exactly zero is taken to be zero.
    pub fn backward(&self, x: &Matrix, upstream: &[f64]) -> Result<LearnerGrads> {
        let pass = self.forward_cached(x)?;
        let (grads, _) = self.backward_cached(x, &pass, upstream)?;
        Ok(grads)
    }

    /// Backprop from cached activations. Also returns `dZ` (N x K), the
    /// gradient with respect to each ridge input.
    pub(crate) fn backward_cached(
        &self,
        x: &Matrix,
        pass: &ForwardPass,
        upstream: &[f64],
    ) -> Result<(LearnerGrads, Matrix)> {
        let n = x.rows();
        if upstream.len() != n {
            return Err(Error::Shape(format!(
                "upstream gradient has length {} but input has {} rows",
                upstream.len(),
                n
            )));
        }
        let k = self.spec.num_ridges;
        let depth = self.spec.subnet.hidden.len();

        let mut grads = LearnerGrads {
            projections: self.projections.as_ref().map(|_| Matrix::zeros(k, self.num_features)),
            ridges: Vec::with_capacity(k),
            combination_weights: vec![0.0; k],
            combination_bias: upstream.iter().sum(),
        };
        let mut dz = Matrix::zeros(n, k);

        for (kk, ridge) in self.ridges.iter().enumerate() {
            grads.combination_weights[kk] = (0..n)
                .map(|i| upstream[i] * pass.ridge_out.get(i, kk))
                .sum();

            // d(out_k): upstream scaled by the combination weight.
            let c = self.combination_weights[kk];
            let dout = Matrix::from_vec(n, 1, upstream.iter().map(|&u| u * c).collect())?;

            // Output layer (linear, bias-free).
            let last_act = &pass.hidden[kk][depth - 1];
            let dw_out = gemm(last_act, &dout, true, false)?;
            let mut da = gemm(&dout, &ridge.layers[depth].weights, false, true)?;

            let mut layer_grads: Vec<DenseLayer> = Vec::with_capacity(depth + 1);
            layer_grads.push(DenseLayer {
                weights: dw_out,
                bias: Vec::new(),
            });

            // Hidden layers, last to first. Post-activation > 0 marks where
            // the ReLU passes gradient.
            for l in (0..depth).rev() {
                let post = &pass.hidden[kk][l];
                let mut dpre = da;
                for i in 0..n {
                    for (g, &p) in dpre.row_mut(i).iter_mut().zip(post.row(i)) {
                        if p <= 0.0 {
                            *g = 0.0;
                        }
                    }
                }
                let input: Matrix = if l == 0 {
                    Matrix::from_vec(n, 1, pass.z.col(kk))?
                } else {
                    pass.hidden[kk][l - 1].clone()
                };
                let dw = gemm(&input, &dpre, true, false)?;
                let db = dpre.col_sums();
                da = gemm(&dpre, &ridge.layers[l].weights, false, true)?;
                layer_grads.push(DenseLayer {
                    weights: dw,
                    bias: db,
                });
            }
            layer_grads.reverse();
            grads.ridges.push(RidgeNet {
                layers: layer_grads,
            });

            // da is now N x 1 = d(z_k).
            for i in 0..n {
                dz.set(i, kk, da.get(i, 0));
            }
        }

        if let Some(dproj) = grads.projections.as_mut() {
            *dproj = gemm(&dz, x, true, false)?;
        }
        Ok((grads, dz))
    }

    /// Per-sample gradient of the learner output with respect to its inputs
    /// (N x P).
    pub fn input_gradient(&self, x: &Matrix) -> Result<Matrix> {
        let pass = self.forward_cached(x)?;
        let ones = vec![1.0; x.rows()];
        let (_, dz) = self.backward_cached(x, &pass, &ones)?;
        match &self.projections {
            Some(beta) => gemm(&dz, beta, false, false),
            None => Ok(dz),
        }
    }

    /// All parameters flattened in a fixed order: projections (row-major),
    /// then per ridge per layer (weights row-major, bias), then combination
    /// weights, then combination bias.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        if let Some(beta) = &self.projections {
            out.extend_from_slice(beta.data());
        }
        for ridge in &self.ridges {
            for layer in &ridge.layers {
                out.extend_from_slice(layer.weights.data());
                out.extend_from_slice(&layer.bias);
            }
        }
        out.extend_from_slice(&self.combination_weights);
        out.push(self.combination_bias);
        out
    }

    /// Write a flat parameter vector (in `params_flat` order) back into the
    /// learner.
    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "learner has {} parameters, got {}",
                self.num_params(),
                flat.len()
            )));
        }
        let mut pos = 0;
        if let Some(beta) = &mut self.projections {
            let n = beta.data().len();
            beta.data_mut().copy_from_slice(&flat[pos..pos + n]);
            pos += n;
        }
        for ridge in &mut self.ridges {
            for layer in &mut ridge.layers {
                let n = layer.weights.data().len();
                layer.weights.data_mut().copy_from_slice(&flat[pos..pos + n]);
                pos += n;
                let n = layer.bias.len();
                layer.bias.copy_from_slice(&flat[pos..pos + n]);
                pos += n;
            }
        }
        let k = self.combination_weights.len();
        self.combination_weights.copy_from_slice(&flat[pos..pos + k]);
        pos += k;
        self.combination_bias = flat[pos];
        Ok(())
    }

    pub fn params_finite(&self) -> bool {
        self.params_flat().iter().all(|v| v.is_finite())
    }
}

impl LearnerGrads {
    /// Flatten in the same order as [`BaseLearner::params_flat`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.flat_into(&mut out);
        out
    }

    /// Flatten into a caller-owned buffer (cleared first).
    pub fn flat_into(&self, out: &mut Vec<f64>) {
        out.clear();
        if let Some(beta) = &self.projections {
            out.extend_from_slice(beta.data());
        }
        for ridge in &self.ridges {
            for layer in &ridge.layers {
                out.extend_from_slice(layer.weights.data());
                out.extend_from_slice(&layer.bias);
            }
        }
        out.extend_from_slice(&self.combination_weights);
        out.push(self.combination_bias);
    }
}

/// Cached activations from one forward pass.
pub(crate) struct ForwardPass {
    /// Ridge inputs, N x K.
    pub z: Matrix,
    /// Post-activation hidden states per ridge per layer.
    pub hidden: Vec<Vec<Matrix>>,
    /// Raw ridge outputs before combination weights, N x K.
    pub ridge_out: Matrix,
    /// Full learner outputs.
    pub outputs: Vec<f64>,
}
