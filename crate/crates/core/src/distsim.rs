//! In-process model of a gather-and-sum across worker nodes.
//!
//! Each node compresses its chunk and hands the stream to a root. The root
//! aggregates either in the compressed domain (a fused multi-operand sum or a
//! left fold of [`elementwise_add`]) or by decompressing everything, summing
//! values and recompressing once.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{compress, decompress, RawArray};
use crate::error::{Error, Result};
use crate::homops::{elementwise_add, elementwise_sum};
use crate::model::{CompressedStream, DType, QuantParams};
use crate::synth::smooth_field;

/// How the root combines compressed streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// One pass over all streams with [`elementwise_sum`].
    #[default]
    Fused,
    /// Left fold of [`elementwise_add`], one intermediate stream per node.
    Pairwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub node_count: usize,
    /// Per-node chunk shape.
    pub dims: Vec<usize>,
    pub eps: f64,
    pub block_len: usize,
    pub dtype: DType,
    /// Timed runs per strategy; the fastest is reported.
    pub repetitions: usize,
    /// Simulated transfer cost per received byte, applied to both strategies.
    pub latency_ns_per_byte: u64,
    pub aggregation: Aggregation,
    pub seed: u64,
}

impl Default for SimScenario {
    fn default() -> Self {
        Self {
            node_count: 16,
            dims: vec![64, 64, 64],
            eps: 1e-3,
            block_len: crate::model::DEFAULT_BLOCK_LEN,
            dtype: DType::F32,
            repetitions: 3,
            latency_ns_per_byte: 0,
            aggregation: Aggregation::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub node_count: usize,
    pub aggregation: Aggregation,
    pub eps: f64,
    /// Compressed bytes received by the root.
    pub bytes_aggregated: u64,
    pub t_traditional: f64,
    pub t_homomorphic: f64,
    pub speedup: f64,
    /// Whether both aggregates decompress to identical values.
    pub identical: bool,
}

fn transfer(streams: &[CompressedStream], latency_ns_per_byte: u64) {
    if latency_ns_per_byte == 0 {
        return;
    }
    for s in streams {
        std::thread::sleep(Duration::from_nanos(latency_ns_per_byte * s.serialized_len() as u64));
    }
}

/// Root-side sum in the compressed domain.
pub fn aggregate_homomorphic(streams: &[CompressedStream], aggregation: Aggregation) -> Result<CompressedStream> {
    let (first, rest) = streams.split_first().ok_or_else(|| Error::InvalidParams("no streams to aggregate".into()))?;
    match aggregation {
        Aggregation::Fused => elementwise_sum(&streams.iter().collect::<Vec<_>>()),
        Aggregation::Pairwise => rest.iter().try_fold(first.clone(), |acc, s| elementwise_add(&acc, s)),
    }
}

/// Root-side sum by full decompression, value-domain addition in node order,
/// and a single recompression.
pub fn aggregate_traditional(streams: &[CompressedStream]) -> Result<CompressedStream> {
    let first = streams.first().ok_or_else(|| Error::InvalidParams("no streams to aggregate".into()))?;
    let p = first.params();
    let mut acc = vec![0f64; p.element_count()];
    for s in streams {
        p.ensure_compatible(s.params())?;
        let x = decompress(s)?;
        acc.par_iter_mut().zip(x.values()).for_each(|(a, v)| *a += v);
    }
    compress(&RawArray::new(acc, p.dims().to_vec(), p.dtype())?, p)
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..reps.max(1) {
        let t = Instant::now();
        let r = f()?;
        best = best.min(t.elapsed().as_secs_f64());
        out = Some(r);
    }
    Ok((out.expect("at least one repetition"), best))
}

/// Runs both strategies over already-compressed node streams.
pub fn simulate_streams(
    streams: &[CompressedStream],
    aggregation: Aggregation,
    repetitions: usize,
    latency_ns_per_byte: u64,
) -> Result<SimReport> {
    if streams.len() < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 nodes, got {}", streams.len())));
    }
    let p = streams[0].params();
    for s in &streams[1..] {
        p.ensure_compatible(s.params())?;
    }
    let (h, t_homomorphic) = best_of(repetitions, || {
        transfer(streams, latency_ns_per_byte);
        aggregate_homomorphic(streams, aggregation)
    })?;
    let (t, t_traditional) = best_of(repetitions, || {
        transfer(streams, latency_ns_per_byte);
        aggregate_traditional(streams)
    })?;
    let identical = decompress(&h)? == decompress(&t)?;
    Ok(SimReport {
        node_count: streams.len(),
        aggregation,
        eps: p.eps(),
        bytes_aggregated: streams.iter().map(|s| s.serialized_len() as u64).sum(),
        t_traditional,
        t_homomorphic,
        speedup: t_traditional / t_homomorphic,
        identical,
    })
}

/// Generates one smooth chunk per node, compresses them concurrently and
/// runs both aggregation strategies.
pub fn simulate(scn: &SimScenario) -> Result<SimReport> {
    if scn.node_count < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 nodes, got {}", scn.node_count)));
    }
    let params = QuantParams::new(scn.eps, scn.dims.clone(), scn.block_len, scn.dtype)?;
    let streams = (0..scn.node_count)
        .into_par_iter()
        .map(|k| compress(&smooth_field(&scn.dims, scn.dtype, scn.seed + k as u64)?, &params))
        .collect::<Result<Vec<_>>>()?;
    simulate_streams(&streams, scn.aggregation, scn.repetitions, scn.latency_ns_per_byte)
}
