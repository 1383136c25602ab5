//! n-dimensional FFT of point-major spinor arrays, one axis at a time.

use super::GridSpec;
use crate::par;
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FftDirection {
    Forward,
    /// Normalized by `1/M^n`, so forward then inverse is the identity.
    Inverse,
}

fn plan(len: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, FftDirection), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().expect("fft plan cache");
    cache
        .entry((len, dir))
        .or_insert_with(|| {
            let mut p = FftPlanner::new();
            match dir {
                FftDirection::Forward => p.plan_fft_forward(len),
                FftDirection::Inverse => p.plan_fft_inverse(len),
            }
        })
        .clone()
}

/// Lines handed to one task.
const LINES_PER_TASK: usize = 64;

/// In-place transform of `values` (length `M^n N`) over the lattice axes.
pub fn fft_nd(values: &mut [C64], grid: &GridSpec, dir: FftDirection) {
    let (n, m, spin) = (grid.n(), grid.samples(), grid.spin());
    assert_eq!(values.len(), grid.dof(), "fft_nd: wrong array length");
    let fft = plan(m, dir);
    let lines = grid.points() / m * spin;
    let mut buf = vec![C64::new(0.0, 0.0); lines * m];
    for axis in 0..n {
        // Point stride of this axis and the number of blocks above it.
        let inner = m.pow((n - 1 - axis) as u32);
        let outer = grid.points() / (inner * m);
        let line_of = |o: usize, i: usize, s: usize| (o * inner + i) * spin + s;
        for o in 0..outer {
            for i in 0..inner {
                for s in 0..spin {
                    let l = line_of(o, i, s);
                    let dst = &mut buf[l * m..(l + 1) * m];
                    for (k, d) in dst.iter_mut().enumerate() {
                        *d = values[((o * m + k) * inner + i) * spin + s];
                    }
                }
            }
        }
        par::for_each_chunk_mut(&mut buf, m * LINES_PER_TASK, |_, chunk| {
            let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(chunk, &mut scratch);
        });
        for o in 0..outer {
            for i in 0..inner {
                for s in 0..spin {
                    let l = line_of(o, i, s);
                    let src = &buf[l * m..(l + 1) * m];
                    for (k, v) in src.iter().enumerate() {
                        values[((o * m + k) * inner + i) * spin + s] = *v;
                    }
                }
            }
        }
    }
    if dir == FftDirection::Inverse {
        let scale = 1.0 / grid.points() as f64;
        values.iter_mut().for_each(|z| *z *= scale);
    }
}
