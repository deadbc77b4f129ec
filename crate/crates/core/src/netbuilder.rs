//! Layered rectifier networks with skip connections, and the builders for the
//! angle-halving norm-approximation construction.
//!
//! The 2D block keeps a running pair `(f, fbar)` with `f = r cos(t)` and
//! `fbar = r sin(t)` for a fold angle `t` that halves every layer:
//!
//! ```text
//! f'    = cos(th) f + sin(th) fbar
//! fbar' = | -sin(th) f + cos(th) fbar |
//! ```
//!
//! `f` stays nonnegative so one relu carries it; the signed pre-image of
//! `fbar'` is carried by a relu pair `(max(0, v), max(0, -v))`. Chaining the
//! block `d-1` times approximates the Euclidean norm in `R^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

/// Where a neuron input comes from: a raw network input (usable at any
/// depth, which is what makes skip connections first-class) or a neuron in a
/// strictly earlier layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceRef {
    Input { index: usize },
    Layer { layer: usize, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedInput {
    #[serde(rename = "src")]
    pub source: SourceRef,
    #[serde(rename = "w")]
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neuron {
    pub activation: Activation,
    pub bias: f64,
    pub inputs: Vec<WeightedInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub neurons: Vec<Neuron>,
}

/// Layered DAG of relu/linear neurons; the last layer is the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayeredNetwork {
    pub dim: usize,
    pub layers: Vec<Layer>,
}

impl LayeredNetwork {
    pub fn unit_count(&self) -> usize {
        self.layers.iter().map(|l| l.neurons.len()).sum()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn output_count(&self) -> usize {
        self.layers.last().map_or(0, |l| l.neurons.len())
    }

    /// Structural checks: references stay in range and strictly earlier,
    /// all parameters finite, at least one layer.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParameter("input dimension must be >= 1".into()));
        }
        if self.layers.is_empty() {
            return Err(Error::InvalidParameter("network has no layers".into()));
        }
        for (li, layer) in self.layers.iter().enumerate() {
            for (ni, neuron) in layer.neurons.iter().enumerate() {
                if !neuron.bias.is_finite() {
                    return Err(Error::NonFiniteNeuron {
                        layer: li,
                        neuron: ni,
                    });
                }
                for input in &neuron.inputs {
                    if !input.weight.is_finite() {
                        return Err(Error::NonFiniteNeuron {
                            layer: li,
                            neuron: ni,
                        });
                    }
                    match input.source {
                        SourceRef::Input { index } => {
                            if index >= self.dim {
                                return Err(Error::InvalidParameter(format!(
                                    "layer {li} neuron {ni}: input index {index} out of range"
                                )));
                            }
                        }
                        SourceRef::Layer { layer, index } => {
                            if layer >= li || index >= self.layers[layer].neurons.len() {
                                return Err(Error::InvalidParameter(format!(
                                    "layer {li} neuron {ni}: bad reference ({layer}, {index})"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Neurons reachable from the output layer by following references.
    pub fn reachable_count(&self) -> usize {
        let mut mark: Vec<Vec<bool>> = self
            .layers
            .iter()
            .map(|l| vec![false; l.neurons.len()])
            .collect();
        let last = self.layers.len() - 1;
        let mut stack: Vec<(usize, usize)> = (0..self.layers[last].neurons.len())
            .map(|i| (last, i))
            .collect();
        while let Some((li, ni)) = stack.pop() {
            if mark[li][ni] {
                continue;
            }
            mark[li][ni] = true;
            for input in &self.layers[li].neurons[ni].inputs {
                if let SourceRef::Layer { layer, index } = input.source {
                    stack.push((layer, index));
                }
            }
        }
        mark.iter().flatten().filter(|&&m| m).count()
    }

    /// Forward pass; allocates fresh scratch. Use [`Evaluator`] for batches.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut ev = Evaluator::new();
        ev.eval(self, x).map(|out| out.to_vec())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<LayeredNetwork> {
        let net: LayeredNetwork = serde_json::from_str(text)?;
        net.validate()?;
        Ok(net)
    }
}

/// Forward-pass workspace reused across evaluations.
#[derive(Default)]
pub struct Evaluator {
    values: Vec<Vec<f64>>,
}

impl Evaluator {
    pub fn new() -> Self {
        Evaluator::default()
    }

    pub fn eval(&mut self, net: &LayeredNetwork, x: &[f64]) -> Result<&[f64]> {
        self.run(net, x, None)?;
        Ok(self.values.last().map(|v| v.as_slice()).unwrap_or(&[]))
    }

    /// Single-output convenience.
    pub fn eval_scalar(&mut self, net: &LayeredNetwork, x: &[f64]) -> Result<f64> {
        if net.output_count() != 1 {
            return Err(Error::InvalidParameter(format!(
                "expected a single output, network has {}",
                net.output_count()
            )));
        }
        self.run(net, x, None)?;
        Ok(self.values.last().unwrap()[0])
    }

    /// Forward pass that also records, per neuron, whether its relu fired
    /// (pre-activation strictly positive; linear neurons record `true`).
    /// Single-output networks only.
    pub fn eval_with_activity(
        &mut self,
        net: &LayeredNetwork,
        x: &[f64],
        activity: &mut Vec<bool>,
    ) -> Result<f64> {
        if net.output_count() != 1 {
            return Err(Error::InvalidParameter(format!(
                "expected a single output, network has {}",
                net.output_count()
            )));
        }
        activity.clear();
        self.run(net, x, Some(activity))?;
        Ok(self.values.last().unwrap()[0])
    }

    fn run(
        &mut self,
        net: &LayeredNetwork,
        x: &[f64],
        mut activity: Option<&mut Vec<bool>>,
    ) -> Result<()> {
        if x.len() != net.dim {
            return Err(Error::DimensionMismatch {
                expected: net.dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "network input".into(),
            });
        }
        self.values.resize(net.layers.len(), Vec::new());
        for (li, layer) in net.layers.iter().enumerate() {
            self.values[li].resize(layer.neurons.len(), 0.0);
            for (ni, neuron) in layer.neurons.iter().enumerate() {
                let mut acc = neuron.bias;
                for input in &neuron.inputs {
                    let v = match input.source {
                        SourceRef::Input { index } => x[index],
                        SourceRef::Layer { layer, index } => self.values[layer][index],
                    };
                    acc += input.weight * v;
                }
                if !acc.is_finite() {
                    return Err(Error::NonFiniteNeuron {
                        layer: li,
                        neuron: ni,
                    });
                }
                let out = match neuron.activation {
                    Activation::Relu => {
                        if let Some(act) = activity.as_deref_mut() {
                            act.push(acc > 0.0);
                        }
                        acc.max(0.0)
                    }
                    Activation::Linear => {
                        if let Some(act) = activity.as_deref_mut() {
                            act.push(true);
                        }
                        acc
                    }
                };
                self.values[li][ni] = out;
            }
        }
        Ok(())
    }
}

/// Side of the approximated sphere for a single-output net built with a
/// positive radius; the output sign is tested against 1e-12.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallSide {
    Inside,
    Boundary,
    Outside,
}

pub fn classify_ball(net: &LayeredNetwork, x: &[f64]) -> Result<BallSide> {
    let mut ev = Evaluator::new();
    let v = ev.eval_scalar(net, x)?;
    Ok(if v > 1e-12 {
        BallSide::Outside
    } else if v < -1e-12 {
        BallSide::Inside
    } else {
        BallSide::Boundary
    })
}

fn theta(i: u32) -> f64 {
    std::f64::consts::PI / 2f64.powi(i as i32)
}

fn wi(source: SourceRef, weight: f64) -> WeightedInput {
    WeightedInput { source, weight }
}

fn relu(inputs: Vec<WeightedInput>) -> Neuron {
    Neuron {
        activation: Activation::Relu,
        bias: 0.0,
        inputs,
    }
}

/// Append one `k`-layer folding block reading scalars `a` and `b`; returns
/// the reference to its (linear) output neuron.
fn append_block(
    layers: &mut Vec<Layer>,
    a: SourceRef,
    b: SourceRef,
    k: u32,
    bias: f64,
) -> SourceRef {
    // Rectification layer: |a| and |b| as relu pairs.
    layers.push(Layer {
        neurons: vec![
            relu(vec![wi(a, 1.0)]),
            relu(vec![wi(a, -1.0)]),
            relu(vec![wi(b, 1.0)]),
            relu(vec![wi(b, -1.0)]),
        ],
    });
    let mut li = layers.len() - 1;
    // (f, fbar) read from the previous layer: after the rectification layer
    // the pairs (0,1) and (2,3) are |a| and |b|; afterwards neuron 0 is f and
    // the pair (1,2) carries fbar.
    let mut f_terms: Vec<(SourceRef, f64)> = vec![
        (SourceRef::Layer { layer: li, index: 0 }, 1.0),
        (SourceRef::Layer { layer: li, index: 1 }, 1.0),
    ];
    let mut fbar_terms: Vec<(SourceRef, f64)> = vec![
        (SourceRef::Layer { layer: li, index: 2 }, 1.0),
        (SourceRef::Layer { layer: li, index: 3 }, 1.0),
    ];
    for i in 2..k {
        let th = theta(i);
        let (c, s) = (th.cos(), th.sin());
        let combine = |fc: f64, bc: f64| -> Vec<WeightedInput> {
            f_terms
                .iter()
                .map(|&(src, w)| wi(src, fc * w))
                .chain(fbar_terms.iter().map(|&(src, w)| wi(src, bc * w)))
                .collect()
        };
        layers.push(Layer {
            neurons: vec![
                relu(combine(c, s)),   // f' = cos f + sin fbar  (nonnegative)
                relu(combine(-s, c)),  // max(0, v), v = -sin f + cos fbar
                relu(combine(s, -c)),  // max(0, -v)
            ],
        });
        li = layers.len() - 1;
        f_terms = vec![(SourceRef::Layer { layer: li, index: 0 }, 1.0)];
        fbar_terms = vec![
            (SourceRef::Layer { layer: li, index: 1 }, 1.0),
            (SourceRef::Layer { layer: li, index: 2 }, 1.0),
        ];
    }
    // Output: f_k = cos(th_k) f + sin(th_k) fbar + bias, no rectification.
    let th = theta(k);
    let inputs: Vec<WeightedInput> = f_terms
        .iter()
        .map(|&(src, w)| wi(src, th.cos() * w))
        .chain(fbar_terms.iter().map(|&(src, w)| wi(src, th.sin() * w)))
        .collect();
    layers.push(Layer {
        neurons: vec![Neuron {
            activation: Activation::Linear,
            bias,
            inputs,
        }],
    });
    SourceRef::Layer {
        layer: layers.len() - 1,
        index: 0,
    }
}

/// Two-dimensional norm approximator: `3k - 1` units in `k` layers computing
/// `f_k(x1, x2) - radius` with `cos(pi/2^k) |x| <= f_k(x) <= |x|`.
pub fn build_norm2d(k: u32, radius: f64) -> Result<LayeredNetwork> {
    build_norm_nd(2, k, radius)
}

/// Chain `d - 1` folding blocks: block 1 reads `(x1, x2)`, block `l` reads
/// the previous block's output and `x_{l+1}` through a skip connection. Only
/// the final block subtracts the radius. `(d-1)(3k-1)` units in `k(d-1)`
/// layers.
pub fn build_norm_nd(d: usize, k: u32, radius: f64) -> Result<LayeredNetwork> {
    if d < 2 {
        return Err(Error::InvalidParameter("dimension must be >= 2".into()));
    }
    if k < 2 {
        return Err(Error::InvalidParameter("folding depth k must be >= 2".into()));
    }
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::InvalidParameter("radius must be finite and >= 0".into()));
    }
    let mut layers = Vec::with_capacity(k as usize * (d - 1));
    let mut prev = append_block(
        &mut layers,
        SourceRef::Input { index: 0 },
        SourceRef::Input { index: 1 },
        k,
        if d == 2 { -radius } else { 0.0 },
    );
    for block in 1..d - 1 {
        let bias = if block == d - 2 { -radius } else { 0.0 };
        prev = append_block(
            &mut layers,
            prev,
            SourceRef::Input { index: block + 1 },
            k,
            bias,
        );
    }
    let net = LayeredNetwork { dim: d, layers };
    net.validate()?;
    debug_assert_eq!(net.unit_count(), (d - 1) * (3 * k as usize - 1));
    debug_assert_eq!(net.layer_count(), k as usize * (d - 1));
    debug_assert_eq!(net.reachable_count(), net.unit_count());
    let _ = prev;
    Ok(net)
}
