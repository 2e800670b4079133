//! Multi-axis FFT on dense row-major complex tensors.
//!
//! Transforms are applied axis by axis. The last axis is contiguous and is
//! processed in place; any other axis is gathered into line-contiguous
//! scratch, transformed there, and scattered back. Both the gather and the
//! scatter are partitioned over disjoint output ranges, so lines can run
//! in parallel safely and deterministically.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::par;

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

pub struct FftEngine {
    shape: Vec<usize>,
    total: usize,
    fwd: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
}

impl FftEngine {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = shape
            .iter()
            .map(|&n| planner.plan_fft_forward(n))
            .collect::<Vec<_>>();
        let inv = shape
            .iter()
            .map(|&n| planner.plan_fft_inverse(n))
            .collect::<Vec<_>>();
        FftEngine {
            shape: shape.to_vec(),
            total: shape.iter().product(),
            fwd,
            inv,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Unnormalized forward transform along every axis.
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.total);
        for axis in 0..self.shape.len() {
            self.transform_axis(data, axis, Direction::Forward);
        }
    }

    /// Inverse transform along every axis, scaled by `1/len` so that
    /// `inverse(forward(x)) == x` up to roundoff.
    pub fn inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.total);
        for axis in 0..self.shape.len() {
            self.transform_axis(data, axis, Direction::Inverse);
        }
        let scale = 1.0 / self.total as f64;
        par::for_each_mut(data, |z| *z *= scale);
    }

    fn plan(&self, axis: usize, dir: Direction) -> &Arc<dyn Fft<f64>> {
        match dir {
            Direction::Forward => &self.fwd[axis],
            Direction::Inverse => &self.inv[axis],
        }
    }

    fn transform_axis(&self, data: &mut [Complex64], axis: usize, dir: Direction) {
        let n = self.shape[axis];
        if n == 1 {
            return;
        }
        let plan = self.plan(axis, dir);
        let scratch_len = plan.get_inplace_scratch_len();
        let inner: usize = self.shape[axis + 1..].iter().product();
        if inner == 1 {
            // Lines are contiguous; transform in place.
            line_fft_contiguous(data, n, plan, scratch_len);
        } else {
            let lines = self.total / n;
            let mut lanes = vec![Complex64::new(0.0, 0.0); self.total];
            gather_lines(data, &mut lanes, n, inner);
            line_fft_contiguous(&mut lanes, n, plan, scratch_len);
            scatter_lines(&lanes, data, n, inner);
            debug_assert_eq!(lines * n, self.total);
        }
    }
}

fn line_fft_contiguous(
    data: &mut [Complex64],
    n: usize,
    plan: &Arc<dyn Fft<f64>>,
    scratch_len: usize,
) {
    // Batch several lines per task; single-line tasks are dominated by
    // scheduling overhead for short transforms. Small arrays skip the
    // pool entirely (see `par::PAR_MIN_LEN`).
    let lines_per_task = (crate::par::REDUCE_CHUNK / n).max(1);
    let task = n * lines_per_task;
    #[cfg(feature = "parallel")]
    if data.len() >= crate::par::PAR_MIN_LEN {
        use rayon::prelude::*;
        data.par_chunks_mut(task).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, block| {
                for line in block.chunks_mut(n) {
                    plan.process_with_scratch(line, scratch);
                }
            },
        );
        return;
    }
    let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
    for block in data.chunks_mut(task) {
        for line in block.chunks_mut(n) {
            plan.process_with_scratch(line, &mut scratch);
        }
    }
}

/// Copies a strided axis into line-major layout: `lanes[line*n + t]` holds
/// `data[(o*n + t)*inner + i]` with `line = o*inner + i`.
fn gather_lines(data: &[Complex64], lanes: &mut [Complex64], n: usize, inner: usize) {
    par::indexed_for_each_mut(lanes, |idx, out| {
        let line = idx / n;
        let t = idx % n;
        let o = line / inner;
        let i = line % inner;
        *out = data[(o * n + t) * inner + i];
    });
}

fn scatter_lines(lanes: &[Complex64], data: &mut [Complex64], n: usize, inner: usize) {
    par::indexed_for_each_mut(data, |idx, out| {
        let i = idx % inner;
        let t = (idx / inner) % n;
        let o = idx / (inner * n);
        *out = lanes[(o * inner + i) * n + t];
    });
}
