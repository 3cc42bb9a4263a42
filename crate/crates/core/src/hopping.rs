//! Fixed-step RK4 integration of i dc/dt = H(t) c for nearest-neighbour
//! hopping Hamiltonians with zero diagonal and off-diagonal -J_k(t).

use num_complex::Complex64;

/// (H c)_k = -J_{k-1} c_{k-1} - J_k c_{k+1}, multiplied by -i.
fn derivative(couplings: &[f64], c: &[Complex64], out: &mut [Complex64]) {
    let n = c.len();
    for k in 0..n {
        let mut h = Complex64::new(0.0, 0.0);
        if k > 0 {
            h -= couplings[k - 1] * c[k - 1];
        }
        if k + 1 < n {
            h -= couplings[k] * c[k + 1];
        }
        // -i h
        out[k] = Complex64::new(h.im, -h.re);
    }
}

/// Scratch buffers for repeated RK4 steps on a fixed chain length.
pub(crate) struct HoppingStepper {
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
    j: Vec<f64>,
}

impl HoppingStepper {
    pub(crate) fn new(sites: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); sites];
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            tmp: z,
            j: vec![0.0; sites.saturating_sub(1)],
        }
    }

    /// Advances `c` from `t` to `t + dt`. `couplings(t, out)` fills the
    /// n - 1 hopping rates at time t.
    pub(crate) fn step<F>(&mut self, c: &mut [Complex64], t: f64, dt: f64, couplings: &mut F)
    where
        F: FnMut(f64, &mut [f64]),
    {
        let n = c.len();
        let stages = [(0.0, 0), (0.5, 0), (0.5, 1), (1.0, 2)];
        for (s, &(frac, prev)) in stages.iter().enumerate() {
            couplings(t + frac * dt, &mut self.j);
            if s == 0 {
                self.tmp.copy_from_slice(c);
            } else {
                let w = frac * dt;
                for i in 0..n {
                    self.tmp[i] = c[i] + w * self.k[prev][i];
                }
            }
            let (tmp, k) = (&self.tmp, &mut self.k[s]);
            derivative(&self.j, tmp, k);
        }
        for i in 0..n {
            c[i] +=
                dt / 6.0 * (self.k[0][i] + 2.0 * self.k[1][i] + 2.0 * self.k[2][i] + self.k[3][i]);
        }
    }
}

pub(crate) fn norm_sqr(c: &[Complex64]) -> f64 {
    c.iter().map(|z| z.norm_sqr()).sum()
}
