//! Compensated summation with a reduction tree that does not depend on the
//! number of threads.

use num::complex::Complex64;
use rayon::prelude::*;

/// Block length of the fixed partition used by [`par_sum`].
pub const CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CSum {
    re: Neumaier,
    im: Neumaier,
}

impl CSum {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Pairwise reduction in index order.
pub fn pairwise(mut xs: Vec<Complex64>) -> Complex64 {
    if xs.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    while xs.len() > 1 {
        xs = xs.chunks(2).map(|c| if c.len() == 2 { c[0] + c[1] } else { c[0] }).collect();
    }
    xs[0]
}

/// `Σ_{i<n} f(i)`: compensated inside blocks of [`CHUNK`] indices, block
/// sums combined pairwise.  Bit-identical for any thread count.
pub fn par_sum<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let blocks = n.div_ceil(CHUNK);
    let parts: Vec<Complex64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut s = CSum::default();
            for i in b * CHUNK..((b + 1) * CHUNK).min(n) {
                s.add(f(i));
            }
            s.value()
        })
        .collect();
    pairwise(parts)
}

/// Real version of [`par_sum`].
pub fn par_sum_real<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    par_sum(n, |i| Complex64::new(f(i), 0.0)).re
}
