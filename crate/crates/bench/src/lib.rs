//! Criterion benchmarks for the saliency pipeline.
//!
//! Run with `cargo bench -p spiking-saliency-bench`. The suite times the
//! separable stages on their own (a Gaussian convolution, one V4 simulation
//! over the colormix display) and the full pipeline per pathway.
