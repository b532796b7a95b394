//! Plan-cached real 3D transforms in the half-spectrum layout.
//!
//! Coefficients are normalized so that `f(x) = sum_k c_k exp(i k.x)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft3 {
    n: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

pub(crate) fn plan(n: usize) -> Arc<Fft3> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n)
        .or_insert_with(|| {
            let mut rp = RealFftPlanner::<f64>::new();
            let mut cp = FftPlanner::<f64>::new();
            Arc::new(Fft3 {
                n,
                r2c: rp.plan_fft_forward(n),
                c2r: rp.plan_fft_inverse(n),
                fwd: cp.plan_fft_forward(n),
                inv: cp.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Fft3 {
    /// Real samples (x-fastest) to normalized half-spectrum coefficients.
    pub(crate) fn forward(&self, input: &[f64]) -> Vec<Complex64> {
        let n = self.n;
        let nh = n / 2 + 1;
        debug_assert_eq!(input.len(), n * n * n);
        let mut out = vec![Complex64::new(0.0, 0.0); nh * n * n];
        out.par_chunks_mut(nh * n)
            .zip(input.par_chunks(n * n))
            .for_each(|(slab, rows)| {
                let mut row = vec![0.0; n];
                let mut scratch = self.r2c.make_scratch_vec();
                for (o, r) in slab.chunks_mut(nh).zip(rows.chunks(n)) {
                    row.copy_from_slice(r);
                    self.r2c
                        .process_with_scratch(&mut row, o, &mut scratch)
                        .expect("r2c buffer sizes");
                }
            });
        self.complex_yz(&mut out, &self.fwd);
        let norm = 1.0 / (n * n * n) as f64;
        out.par_iter_mut().for_each(|c| *c *= norm);
        out
    }

    /// Normalized half-spectrum coefficients to real samples.
    pub(crate) fn inverse(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let nh = n / 2 + 1;
        debug_assert_eq!(spectrum.len(), nh * n * n);
        let mut work = spectrum.to_vec();
        self.complex_yz(&mut work, &self.inv);
        let mut out = vec![0.0; n * n * n];
        out.par_chunks_mut(n * n)
            .zip(work.par_chunks_mut(nh * n))
            .for_each(|(rows, slab)| {
                let mut scratch = self.c2r.make_scratch_vec();
                for (r, c) in rows.chunks_mut(n).zip(slab.chunks_mut(nh)) {
                    // Hermitian-consistent data has real end points up to roundoff.
                    c[0].im = 0.0;
                    c[nh - 1].im = 0.0;
                    self.c2r
                        .process_with_scratch(c, r, &mut scratch)
                        .expect("c2r buffer sizes");
                }
            });
        out
    }

    /// Full complex transforms along y then z, in place, on the half layout.
    fn complex_yz(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let nh = n / 2 + 1;
        let slab = nh * n;

        // y: within each z-slab, transpose to y-contiguous lines.
        data.par_chunks_mut(slab).for_each(|s| {
            let mut t = vec![Complex64::new(0.0, 0.0); slab];
            for jy in 0..n {
                for kx in 0..nh {
                    t[kx * n + jy] = s[kx + nh * jy];
                }
            }
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(&mut t, &mut scratch);
            for jy in 0..n {
                for kx in 0..nh {
                    s[kx + nh * jy] = t[kx * n + jy];
                }
            }
        });

        // z: global transpose to z-contiguous lines.
        let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
        t.par_chunks_mut(n).enumerate().for_each(|(line, dst)| {
            for (jz, d) in dst.iter_mut().enumerate() {
                *d = data[line + slab * jz];
            }
        });
        t.par_chunks_mut(n * nh).for_each(|block| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(block, &mut scratch);
        });
        data.par_chunks_mut(slab).enumerate().for_each(|(jz, s)| {
            for (line, d) in s.iter_mut().enumerate() {
                *d = t[line * n + jz];
            }
        });
    }
}
