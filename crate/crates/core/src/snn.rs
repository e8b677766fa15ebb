//! A small discrete-time spiking network: Poisson spike sources, Izhikevich
//! neuron populations laid out one neuron per pixel, and signed one-to-one
//! topographic projections between them.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::filters::{OpponentPair, NUM_ORIENTATIONS};
use crate::plane::{Dims, Plane};

/// Hue preference of a V4 population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Hue {
    Red,
    Green,
    Blue,
    Yellow,
    Cyan,
    Magenta,
}

impl Hue {
    pub const ALL: [Hue; 6] = [
        Hue::Red,
        Hue::Green,
        Hue::Blue,
        Hue::Yellow,
        Hue::Cyan,
        Hue::Magenta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Hue::Red => "red",
            Hue::Green => "green",
            Hue::Blue => "blue",
            Hue::Yellow => "yellow",
            Hue::Cyan => "cyan",
            Hue::Magenta => "magenta",
        }
    }

    /// Position in [`Hue::ALL`].
    pub fn index(self) -> usize {
        Hue::ALL.iter().position(|&h| h == self).unwrap()
    }

    /// Fully saturated RGB triple.
    pub fn rgb(self) -> [f64; 3] {
        match self {
            Hue::Red => [1.0, 0.0, 0.0],
            Hue::Green => [0.0, 1.0, 0.0],
            Hue::Blue => [0.0, 0.0, 1.0],
            Hue::Yellow => [1.0, 1.0, 0.0],
            Hue::Cyan => [0.0, 1.0, 1.0],
            Hue::Magenta => [1.0, 0.0, 1.0],
        }
    }
}

impl fmt::Display for Hue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Izhikevich model parameters (`c` in mV).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IzhikevichParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl IzhikevichParams {
    pub const REGULAR_SPIKING: Self = Self {
        a: 0.02,
        b: 0.2,
        c: -65.0,
        d: 8.0,
    };
}

impl Default for IzhikevichParams {
    fn default() -> Self {
        Self::REGULAR_SPIKING
    }
}

/// A population of spike sources, one per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct InputGroup {
    pub name: String,
    pub dims: Dims,
}

/// A population of Izhikevich neurons, one per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronGroup {
    pub name: String,
    pub dims: Dims,
    pub dynamics: IzhikevichParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Excitatory,
    Inhibitory,
}

/// One-to-one topographic connection: neuron `i` of `source` drives neuron
/// `i` of `target` with current `±weight` per spike.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub source: String,
    pub target: String,
    pub sign: Sign,
    /// Non-negative magnitude; the sign carries the polarity.
    pub weight: f64,
}

impl Projection {
    pub fn excitatory(source: impl Into<String>, target: impl Into<String>, weight: f64) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            sign: Sign::Excitatory,
            weight,
        }
    }

    pub fn inhibitory(source: impl Into<String>, target: impl Into<String>, weight: f64) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            sign: Sign::Inhibitory,
            weight,
        }
    }

    pub fn signed_weight(&self) -> f64 {
        match self.sign {
            Sign::Excitatory => self.weight,
            Sign::Inhibitory => -self.weight,
        }
    }
}

/// Complete description of a network run.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub inputs: Vec<InputGroup>,
    pub groups: Vec<NeuronGroup>,
    pub projections: Vec<Projection>,
    pub duration_ms: f64,
    pub step_ms: f64,
    pub max_rate_hz: f64,
    pub seed: u64,
}

enum Node {
    Input(usize),
    Group(usize),
}

impl NetworkSpec {
    pub fn steps(&self) -> usize {
        (self.duration_ms / self.step_ms).round() as usize
    }

    pub fn group(&self, name: &str) -> Option<&NeuronGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    fn lookup(&self) -> Result<HashMap<&str, Node>> {
        let mut nodes = HashMap::new();
        for (i, g) in self.inputs.iter().enumerate() {
            if nodes.insert(g.name.as_str(), Node::Input(i)).is_some() {
                return Err(Error::Network(format!("duplicate group `{}`", g.name)));
            }
        }
        for (i, g) in self.groups.iter().enumerate() {
            if nodes.insert(g.name.as_str(), Node::Group(i)).is_some() {
                return Err(Error::Network(format!("duplicate group `{}`", g.name)));
            }
        }
        Ok(nodes)
    }

    fn dims_of(&self, node: &Node) -> Dims {
        match *node {
            Node::Input(i) => self.inputs[i].dims,
            Node::Group(i) => self.groups[i].dims,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_ms > 0.0 && self.duration_ms > 0.0) {
            return Err(Error::Network("duration and step must be positive".into()));
        }
        let steps = self.duration_ms / self.step_ms;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(Error::Network(format!(
                "duration {} ms is not a multiple of step {} ms",
                self.duration_ms, self.step_ms
            )));
        }
        if !(self.max_rate_hz > 0.0) || self.max_rate_hz * self.step_ms > 1000.0 {
            return Err(Error::Network(format!(
                "max rate {} Hz not representable at step {} ms",
                self.max_rate_hz, self.step_ms
            )));
        }
        let nodes = self.lookup()?;
        for p in &self.projections {
            let source = nodes
                .get(p.source.as_str())
                .ok_or_else(|| Error::Network(format!("undefined source `{}`", p.source)))?;
            let target = nodes
                .get(p.target.as_str())
                .ok_or_else(|| Error::Network(format!("undefined target `{}`", p.target)))?;
            if matches!(target, Node::Input(_)) {
                return Err(Error::Network(format!(
                    "projection targets spike source `{}`",
                    p.target
                )));
            }
            if self.dims_of(source) != self.dims_of(target) {
                return Err(Error::Network(format!(
                    "projection {} -> {} joins groups of different size",
                    p.source, p.target
                )));
            }
            if !(p.weight >= 0.0 && p.weight.is_finite()) {
                return Err(Error::Network(format!(
                    "projection {} -> {} has invalid weight {}",
                    p.source, p.target, p.weight
                )));
            }
        }
        Ok(())
    }
}

fn v4_input_name(pair: OpponentPair) -> String {
    format!("v1-{}", pair.name())
}

pub fn v4_group_name(hue: Hue) -> String {
    format!("v4-{}", hue.name())
}

pub fn mt_group_name(k: usize) -> String {
    format!("mt-{k}")
}

fn mt_input_name(k: usize) -> String {
    format!("v1-orientation-{k}")
}

/// V1 double-opponent sources → six V4 hue populations.
///
/// Inputs are ordered as [`OpponentPair::ALL`], groups as [`Hue::ALL`].
pub fn build_v4_network(config: &PipelineConfig) -> NetworkSpec {
    let dims = config.dims();
    let inputs = OpponentPair::ALL
        .iter()
        .map(|&p| InputGroup {
            name: v4_input_name(p),
            dims,
        })
        .collect();
    let groups = Hue::ALL
        .iter()
        .map(|&h| NeuronGroup {
            name: v4_group_name(h),
            dims,
            dynamics: config.neuron_params(),
        })
        .collect();

    let (wp, ws, wi) = (
        config.w_v4_primary,
        config.w_v4_secondary,
        config.w_v4_inhibit,
    );
    let src = v4_input_name;
    let dst = v4_group_name;
    let projections = vec![
        Projection::excitatory(src(OpponentPair::RedGreen), dst(Hue::Red), wp),
        Projection::excitatory(src(OpponentPair::GreenRed), dst(Hue::Green), wp),
        Projection::excitatory(src(OpponentPair::BlueYellow), dst(Hue::Blue), wp),
        Projection::excitatory(src(OpponentPair::YellowBlue), dst(Hue::Yellow), wp),
        Projection::excitatory(src(OpponentPair::GreenRed), dst(Hue::Cyan), ws),
        Projection::excitatory(src(OpponentPair::BlueYellow), dst(Hue::Cyan), ws),
        Projection::excitatory(src(OpponentPair::RedGreen), dst(Hue::Magenta), ws),
        Projection::excitatory(src(OpponentPair::BlueYellow), dst(Hue::Magenta), ws),
        Projection::inhibitory(dst(Hue::Cyan), dst(Hue::Yellow), wi),
        Projection::inhibitory(dst(Hue::Magenta), dst(Hue::Yellow), wi),
    ];
    NetworkSpec {
        inputs,
        groups,
        projections,
        duration_ms: config.duration_ms,
        step_ms: config.step_ms,
        max_rate_hz: config.max_rate_hz,
        seed: config.seed,
    }
}

/// Eight V1 orientation sources → eight MT populations, channel `k` to group `k`.
pub fn build_mt_network(config: &PipelineConfig) -> NetworkSpec {
    let dims = config.dims();
    NetworkSpec {
        inputs: (0..NUM_ORIENTATIONS)
            .map(|k| InputGroup {
                name: mt_input_name(k),
                dims,
            })
            .collect(),
        groups: (0..NUM_ORIENTATIONS)
            .map(|k| NeuronGroup {
                name: mt_group_name(k),
                dims,
                dynamics: config.neuron_params(),
            })
            .collect(),
        projections: (0..NUM_ORIENTATIONS)
            .map(|k| Projection::excitatory(mt_input_name(k), mt_group_name(k), config.w_mt))
            .collect(),
        duration_ms: config.duration_ms,
        step_ms: config.step_ms,
        // The MT seed stream is kept apart from the V4 one.
        seed: config.seed ^ 0x4d54_0000_0000_0000,
        max_rate_hz: config.max_rate_hz,
    }
}

/// Spikes emitted by a population of sources: for every time step, the
/// ascending indices of the neurons that fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeTrain {
    pub dims: Dims,
    pub steps: Vec<Vec<u32>>,
}

impl SpikeTrain {
    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    /// Spike count per neuron.
    pub fn counts(&self) -> Vec<u32> {
        let mut counts = vec![0; self.dims.len()];
        for step in &self.steps {
            for &n in step {
                counts[n as usize] += 1;
            }
        }
        counts
    }

    pub fn total(&self) -> usize {
        self.steps.iter().map(Vec::len).sum()
    }
}

/// Parameters shared by every rate-coded source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCode {
    pub max_rate_hz: f64,
    pub duration_ms: f64,
    pub step_ms: f64,
}

impl RateCode {
    pub fn of(spec: &NetworkSpec) -> Self {
        Self {
            max_rate_hz: spec.max_rate_hz,
            duration_ms: spec.duration_ms,
            step_ms: spec.step_ms,
        }
    }
}

/// Encodes `plane` (values in `[0, 1]`) as independent Bernoulli spike trains,
/// firing with probability `value · max_rate · step / 1000` per step.
pub fn poisson_encode(plane: &Plane, code: RateCode, seed: u64) -> Result<SpikeTrain> {
    poisson_encode_stream(plane, code, seed, 0)
}

fn poisson_encode_stream(
    plane: &Plane,
    code: RateCode,
    seed: u64,
    stream: u64,
) -> Result<SpikeTrain> {
    if !(code.max_rate_hz > 0.0 && code.max_rate_hz.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "max_rate",
            reason: format!("{} is not positive", code.max_rate_hz),
        });
    }
    if !(code.step_ms > 0.0 && code.duration_ms > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: "duration and step must be positive".into(),
        });
    }
    let scale = code.max_rate_hz * code.step_ms / 1000.0;
    if scale > 1.0 {
        return Err(Error::InvalidParameter {
            name: "max_rate",
            reason: format!("{} Hz exceeds one spike per step", code.max_rate_hz),
        });
    }
    if let Some((index, &value)) = plane
        .data()
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(Error::ValueOutOfRange { value, index });
    }
    let probabilities: Vec<f64> = plane.data().iter().map(|v| v * scale).collect();
    let num_steps = (code.duration_ms / code.step_ms).round() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let steps = (0..num_steps)
        .map(|_| {
            probabilities
                .iter()
                .enumerate()
                .filter_map(|(i, &p)| (rng.gen::<f64>() < p).then_some(i as u32))
                .collect()
        })
        .collect();
    Ok(SpikeTrain {
        dims: plane.dims(),
        steps,
    })
}

/// Encodes one plane per input group of `spec`, each on its own random stream.
pub fn encode_inputs(spec: &NetworkSpec, planes: &[Plane]) -> Result<Vec<SpikeTrain>> {
    if planes.len() != spec.inputs.len() {
        return Err(Error::Network(format!(
            "{} input planes for {} input groups",
            planes.len(),
            spec.inputs.len()
        )));
    }
    let code = RateCode::of(spec);
    planes
        .iter()
        .zip(&spec.inputs)
        .enumerate()
        .map(|(i, (plane, group))| {
            if plane.dims() != group.dims {
                return Err(Error::Network(format!(
                    "input plane for `{}` has the wrong size",
                    group.name
                )));
            }
            poisson_encode_stream(plane, code, spec.seed, i as u64 + 1)
        })
        .collect()
}

/// Per-neuron spike counts of one population over a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeCountPlane {
    pub group: String,
    pub dims: Dims,
    pub counts: Vec<u32>,
}

impl SpikeCountPlane {
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.counts[y * self.dims.width + x]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Sum of counts over `[x0, x1) × [y0, y1)`.
    pub fn region_total(&self, x0: usize, x1: usize, y0: usize, y1: usize) -> u64 {
        let mut total = 0;
        for y in y0..y1.min(self.dims.height) {
            for x in x0..x1.min(self.dims.width) {
                total += u64::from(self.get(x, y));
            }
        }
        total
    }

    /// Sum of counts over the pixels where `mask` is true.
    pub fn masked_total(&self, mask: &[bool]) -> u64 {
        self.counts
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(&c, _)| u64::from(c))
            .sum()
    }
}

/// Counts as real values, unscaled.
pub fn spike_counts_to_response(counts: &SpikeCountPlane) -> Plane {
    Plane::new(
        counts.dims,
        counts.counts.iter().map(|&c| f64::from(c)).collect(),
    )
    .expect("count plane has matching length")
}

/// Receives every spike emitted by a neuron group during [`simulate_with`].
pub trait SpikeObserver {
    fn spike(&mut self, group: &str, neuron: usize, time_ms: f64);
}

/// Writes spikes as `<group> <neuron-index> <time-ms>` lines.
pub struct RasterWriter<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> RasterWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out, error: None }
    }

    /// Flushes and returns the writer, or the first write error.
    pub fn finish(mut self) -> Result<W> {
        if let Some(e) = self.error.take() {
            return Err(e.into());
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> SpikeObserver for RasterWriter<W> {
    fn spike(&mut self, group: &str, neuron: usize, time_ms: f64) {
        if self.error.is_none() {
            if let Err(e) = writeln!(self.out, "{group} {neuron} {time_ms}") {
                self.error = Some(e);
            }
        }
    }
}

/// Observer that discards every spike.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoObserver;

impl SpikeObserver for NoObserver {
    fn spike(&mut self, _: &str, _: usize, _: f64) {}
}

const SPIKE_PEAK_MV: f64 = 30.0;
/// Membrane integration sub-step; a 1 ms step is split in two as in the
/// reference Izhikevich code.
const MAX_SUBSTEP_MS: f64 = 0.5;

/// Runs the network over `inputs` (one train per input group, in order) and
/// returns spike counts for every neuron group, in `spec.groups` order.
pub fn simulate(spec: &NetworkSpec, inputs: &[SpikeTrain]) -> Result<Vec<SpikeCountPlane>> {
    simulate_with(spec, inputs, &mut NoObserver)
}

/// [`simulate`], additionally reporting every spike to `observer`.
///
/// Each step, input spikes of that step and neuron spikes of the previous
/// step are summed into the synaptic current of their targets; the current
/// lasts exactly one step.
pub fn simulate_with(
    spec: &NetworkSpec,
    inputs: &[SpikeTrain],
    observer: &mut dyn SpikeObserver,
) -> Result<Vec<SpikeCountPlane>> {
    spec.validate()?;
    if inputs.len() != spec.inputs.len() {
        return Err(Error::Network(format!(
            "{} spike trains for {} input groups",
            inputs.len(),
            spec.inputs.len()
        )));
    }
    let steps = spec.steps();
    for (train, group) in inputs.iter().zip(&spec.inputs) {
        if train.dims != group.dims || train.num_steps() != steps {
            return Err(Error::Network(format!(
                "spike train does not match input group `{}`",
                group.name
            )));
        }
    }

    let nodes = spec.lookup()?;
    let wiring: Vec<(&Node, usize, f64)> = spec
        .projections
        .iter()
        .map(|p| {
            let Node::Group(target) = nodes[p.target.as_str()] else {
                unreachable!("validated")
            };
            (&nodes[p.source.as_str()], target, p.signed_weight())
        })
        .collect();

    let substeps = (spec.step_ms / MAX_SUBSTEP_MS).ceil().max(1.0) as usize;
    let h = spec.step_ms / substeps as f64;

    let mut v: Vec<Vec<f64>> = spec
        .groups
        .iter()
        .map(|g| vec![g.dynamics.c; g.dims.len()])
        .collect();
    let mut u: Vec<Vec<f64>> = spec
        .groups
        .iter()
        .map(|g| vec![g.dynamics.b * g.dynamics.c; g.dims.len()])
        .collect();
    let mut current: Vec<Vec<f64>> = spec
        .groups
        .iter()
        .map(|g| vec![0.0; g.dims.len()])
        .collect();
    let mut fired: Vec<Vec<u32>> = vec![Vec::new(); spec.groups.len()];
    let mut counts: Vec<Vec<u32>> = spec.groups.iter().map(|g| vec![0; g.dims.len()]).collect();

    for t in 0..steps {
        for c in &mut current {
            c.iter_mut().for_each(|i| *i = 0.0);
        }
        for &(source, target, weight) in &wiring {
            let spikes = match *source {
                Node::Input(i) => &inputs[i].steps[t],
                Node::Group(g) => &fired[g],
            };
            for &n in spikes {
                current[target][n as usize] += weight;
            }
        }

        let time_ms = t as f64 * spec.step_ms;
        for (g, group) in spec.groups.iter().enumerate() {
            let IzhikevichParams { a, b, c, d } = group.dynamics;
            fired[g].clear();
            for n in 0..group.dims.len() {
                let i_syn = current[g][n];
                let (mut vn, mut un) = (v[g][n], u[g][n]);
                for _ in 0..substeps {
                    vn += h * (0.04 * vn * vn + 5.0 * vn + 140.0 - un + i_syn);
                    if vn >= SPIKE_PEAK_MV {
                        break;
                    }
                }
                un += spec.step_ms * a * (b * vn - un);
                if vn >= SPIKE_PEAK_MV {
                    vn = c;
                    un += d;
                    fired[g].push(n as u32);
                    counts[g][n] += 1;
                    observer.spike(&group.name, n, time_ms);
                }
                v[g][n] = vn;
                u[g][n] = un;
            }
        }
    }

    Ok(spec
        .groups
        .iter()
        .zip(counts)
        .map(|(g, counts)| SpikeCountPlane {
            group: g.name.clone(),
            dims: g.dims,
            counts,
        })
        .collect())
}

/// Encodes `planes` and simulates `spec` in one call.
pub fn run_network(spec: &NetworkSpec, planes: &[Plane]) -> Result<Vec<SpikeCountPlane>> {
    run_network_with(spec, planes, &mut NoObserver)
}

/// [`run_network`] reporting every spike to `observer`.
pub fn run_network_with(
    spec: &NetworkSpec,
    planes: &[Plane],
    observer: &mut dyn SpikeObserver,
) -> Result<Vec<SpikeCountPlane>> {
    let inputs = encode_inputs(spec, planes)?;
    simulate_with(spec, &inputs, observer)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(duration_ms: f64) -> RateCode {
        RateCode {
            max_rate_hz: 50.0,
            duration_ms,
            step_ms: 1.0,
        }
    }

    #[test]
    fn zero_value_never_spikes() {
        let train = poisson_encode(&Plane::zeros(Dims::new(8, 8)), code(1000.0), 3).unwrap();
        assert_eq!(train.total(), 0);
        assert_eq!(train.num_steps(), 1000);
    }

    #[test]
    fn full_rate_mean_matches_poisson_law() {
        // 1000 neurons at 50 Hz for 1 s: each count is Binomial(1000, 0.05),
        // mean 50, variance 47.5. The sample mean of 1000 neurons has standard
        // error sqrt(47.5 / 1000) ≈ 0.218, so 3σ ≈ 0.654.
        let plane = Plane::filled(Dims::new(1000, 1), 1.0);
        let train = poisson_encode(&plane, code(1000.0), 11).unwrap();
        let counts = train.counts();
        let mean = counts.iter().map(|&c| f64::from(c)).sum::<f64>() / 1000.0;
        assert!(
            (mean - 50.0).abs() < 3.0 * (47.5f64 / 1000.0).sqrt(),
            "mean {mean}"
        );
    }

    #[test]
    fn encoding_is_deterministic() {
        let plane = Plane::from_fn(Dims::new(10, 10), |x, y| ((x + y) % 5) as f64 / 4.0);
        let a = poisson_encode(&plane, code(200.0), 5).unwrap();
        let b = poisson_encode(&plane, code(200.0), 5).unwrap();
        let c = poisson_encode(&plane, code(200.0), 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn encoding_rejects_out_of_range() {
        let plane = Plane::filled(Dims::new(2, 2), 1.2);
        assert!(matches!(
            poisson_encode(&plane, code(10.0), 0),
            Err(Error::ValueOutOfRange { .. })
        ));
        let bad = RateCode {
            max_rate_hz: 0.0,
            ..code(10.0)
        };
        assert!(poisson_encode(&Plane::zeros(Dims::new(2, 2)), bad, 0).is_err());
    }

    #[test]
    fn v4_network_shape() {
        let spec = build_v4_network(&PipelineConfig::default());
        spec.validate().unwrap();
        assert_eq!(spec.inputs.len(), 4);
        assert_eq!(spec.groups.len(), 6);
        assert_eq!(spec.projections.len(), 10);
        let excit = spec
            .projections
            .iter()
            .filter(|p| p.sign == Sign::Excitatory)
            .count();
        assert_eq!(excit, 8);
        let inhib: Vec<_> = spec
            .projections
            .iter()
            .filter(|p| p.sign == Sign::Inhibitory)
            .map(|p| (p.source.as_str(), p.target.as_str()))
            .collect();
        assert_eq!(
            inhib,
            vec![("v4-cyan", "v4-yellow"), ("v4-magenta", "v4-yellow")]
        );
    }

    #[test]
    fn mt_network_shape() {
        let spec = build_mt_network(&PipelineConfig::default());
        spec.validate().unwrap();
        assert_eq!(spec.groups.len(), 8);
        assert_eq!(spec.projections.len(), 8);
        assert!(spec.projections.iter().all(|p| p.sign == Sign::Excitatory));
    }

    #[test]
    fn undefined_group_rejected() {
        let mut spec = build_mt_network(&PipelineConfig::default());
        spec.projections
            .push(Projection::excitatory("nowhere", "mt-0", 1.0));
        assert!(matches!(spec.validate(), Err(Error::Network(_))));
    }

    #[test]
    fn duration_must_be_multiple_of_step() {
        let mut spec = build_mt_network(&PipelineConfig::default());
        spec.duration_ms = 10.5;
        assert!(spec.validate().is_err());
    }

    fn single_neuron(weight: f64, duration_ms: f64) -> NetworkSpec {
        let dims = Dims::new(1, 1);
        NetworkSpec {
            inputs: vec![InputGroup {
                name: "in".into(),
                dims,
            }],
            groups: vec![NeuronGroup {
                name: "out".into(),
                dims,
                dynamics: IzhikevichParams::REGULAR_SPIKING,
            }],
            projections: vec![Projection::excitatory("in", "out", weight)],
            duration_ms,
            step_ms: 1.0,
            max_rate_hz: 1000.0,
            seed: 0,
        }
    }

    #[test]
    fn zero_weight_network_is_silent() {
        let spec = single_neuron(0.0, 300.0);
        let counts = run_network(&spec, &[Plane::filled(Dims::new(1, 1), 1.0)]).unwrap();
        assert_eq!(counts[0].total(), 0);
    }

    #[test]
    fn constant_drive_count_grows_with_duration() {
        // max rate 1000 Hz at 1 ms steps: the source fires every step.
        let mut last = 0;
        for duration in [100.0, 200.0, 400.0, 800.0] {
            let spec = single_neuron(20.0, duration);
            let counts = run_network(&spec, &[Plane::filled(Dims::new(1, 1), 1.0)]).unwrap();
            let n = counts[0].total();
            assert!(n > last, "{duration} ms: {n} <= {last}");
            last = n;
        }
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let spec = single_neuron(1.0, 10.0);
        assert!(simulate(&spec, &[]).is_err());
        let wrong = SpikeTrain {
            dims: Dims::new(1, 1),
            steps: vec![Vec::new(); 5],
        };
        assert!(simulate(&spec, &[wrong]).is_err());
    }

    #[test]
    fn raster_lines_match_counts() {
        let spec = single_neuron(20.0, 100.0);
        let inputs = encode_inputs(&spec, &[Plane::filled(Dims::new(1, 1), 1.0)]).unwrap();
        let mut raster = RasterWriter::new(Vec::new());
        let counts = simulate_with(&spec, &inputs, &mut raster).unwrap();
        let text = String::from_utf8(raster.finish().unwrap()).unwrap();
        assert_eq!(text.lines().count() as u64, counts[0].total());
        let first: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
        assert_eq!(first[0], "out");
        assert_eq!(first[1], "0");
        first[2].parse::<f64>().unwrap();
    }

    #[test]
    fn count_cast_preserves_values() {
        let counts = SpikeCountPlane {
            group: "g".into(),
            dims: Dims::new(3, 1),
            counts: vec![0, 7, 2],
        };
        let r = spike_counts_to_response(&counts);
        assert_eq!(r.data(), &[0.0, 7.0, 2.0]);
        assert_eq!(r.max(), 7.0);
        let zero = SpikeCountPlane {
            counts: vec![0; 3],
            ..counts
        };
        assert!(spike_counts_to_response(&zero)
            .data()
            .iter()
            .all(|&v| v == 0.0));
    }
}
