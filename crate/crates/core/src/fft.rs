//! Unnormalized n-dimensional FFTs over row-major cubes of side `size`.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(size: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let mut planner = planner().lock().unwrap_or_else(|e| e.into_inner());
    planner.plan_fft(size, direction)
}

/// In-place transform with kernel `exp(-2πi jk/N)` (forward) or `exp(+2πi jk/N)`
/// (inverse) along every axis. No scaling is applied.
pub(crate) fn fft_nd(data: &mut [Complex64], dim: usize, size: usize, inverse: bool) {
    debug_assert_eq!(data.len(), size.pow(dim as u32));
    for axis in 0..dim {
        fft_axis(data, dim, size, axis, inverse);
    }
}

/// 1-D transform along a single axis of an n-dimensional cube.
pub(crate) fn fft_axis(data: &mut [Complex64], dim: usize, size: usize, axis: usize, inverse: bool) {
    let direction = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    let fft = plan(size, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let stride = size.pow((dim - 1 - axis) as u32);
    let block = stride * size;
    let mut line = vec![Complex64::default(); size];
    for outer in (0..data.len()).step_by(block) {
        for inner in 0..stride {
            let base = outer + inner;
            for (j, v) in line.iter_mut().enumerate() {
                *v = data[base + j * stride];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for (j, v) in line.iter().enumerate() {
                data[base + j * stride] = *v;
            }
        }
    }
}
