//! Fourier transforms over unit groups. A function f on (Z/q)* indexed in
//! the row-major order of `UnitGroupBasis::units_row_major` has transform
//!   F(chi) = sum_x conj(chi(x)) f(x),
//! which is a multidimensional forward DFT over the cyclic factors. The
//! character index in `char_group` order equals the output index.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::characters::UnitGroupBasis;

/// Plan-caching wrapper around rustfft for repeated same-shape transforms.
pub struct GroupDft {
    shape: Vec<usize>,
    planner: std::cell::RefCell<FftPlanner<f64>>,
}

impl GroupDft {
    pub fn for_basis(basis: &UnitGroupBasis) -> Self {
        let shape = basis.factors().iter().map(|f| f.order as usize).collect();
        GroupDft { shape, planner: std::cell::RefCell::new(FftPlanner::new()) }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product::<usize>().max(1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform along every axis of the row-major array.
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        if data.len() <= 1 {
            return;
        }
        let mut planner = self.planner.borrow_mut();
        // Axes from last (fastest, contiguous) to first.
        let mut stride = 1usize;
        for &n in self.shape.iter().rev() {
            if n > 1 {
                let fft = planner.plan_fft_forward(n);
                let mut scratch = vec![Complex64::default(); n.max(fft.get_inplace_scratch_len())];
                if stride == 1 {
                    for chunk in data.chunks_exact_mut(n) {
                        fft.process_with_scratch(chunk, &mut scratch);
                    }
                } else {
                    let blocks = data.len() / (n * stride);
                    let mut line = vec![Complex64::default(); n];
                    for b in 0..blocks {
                        let base = b * n * stride;
                        for off in 0..stride {
                            for (j, l) in line.iter_mut().enumerate() {
                                *l = data[base + j * stride + off];
                            }
                            fft.process_with_scratch(&mut line, &mut scratch);
                            for (j, l) in line.iter().enumerate() {
                                data[base + j * stride + off] = *l;
                            }
                        }
                    }
                }
            }
            stride *= n;
        }
    }
}

/// Naive O(n^2) DFT used as an oracle in tests.
#[cfg(test)]
pub fn dft_naive(shape: &[usize], data: &[Complex64]) -> Vec<Complex64> {
    let total: usize = shape.iter().product::<usize>().max(1);
    assert_eq!(total, data.len());
    let mut out = vec![Complex64::default(); total];
    let tuple_of = |mut i: usize| -> Vec<usize> {
        let mut t = vec![0usize; shape.len()];
        for (j, &n) in shape.iter().enumerate().rev() {
            t[j] = i % n;
            i /= n;
        }
        t
    };
    for (a, o) in out.iter_mut().enumerate() {
        let at = tuple_of(a);
        let mut acc = Complex64::default();
        for (x, &v) in data.iter().enumerate() {
            let xt = tuple_of(x);
            let mut theta = 0.0f64;
            for ((&ai, &xi), &n) in at.iter().zip(&xt).zip(shape) {
                theta -= 2.0 * std::f64::consts::PI * (ai * xi % n) as f64 / n as f64;
            }
            acc += v * Complex64::new(theta.cos(), theta.sin());
        }
        *o = acc;
    }
    out
}
