use num_complex::Complex64;

use crate::spectral::{forward_samples, inverse_pair, DealiasRule, GridSpec};

type Spectrum = Vec<Complex64>;

/// Precomputed symbols for the QG right-hand side on one grid.
pub(crate) struct Kernel {
    pub grid: GridSpec,
    keep: Vec<bool>,
    /// Derivative symbols `ξ_1, ξ_2` (imaginary parts), zero on their Nyquist line.
    d: (Vec<f64>, Vec<f64>),
    /// Velocity symbols: `u_1 = i ξ_2/|ξ| θ`, `u_2 = -i ξ_1/|ξ| θ`.
    v: (Vec<f64>, Vec<f64>),
    /// `|ξ|^{2α}`, zero at the mean.
    pub lambda: Vec<f64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn times_i(c: &[Complex64], s: &[f64]) -> Spectrum {
    c.iter().zip(s).map(|(c, s)| Complex64::new(-c.im * s, c.re * s)).collect()
}

impl Kernel {
    pub fn new(grid: GridSpec, alpha: f64, rule: DealiasRule) -> Self {
        let half = (grid.n() / 2) as i64;
        let len = grid.len();
        let mut k = Kernel {
            grid,
            keep: rule.mask(&grid),
            d: (vec![0.0; len], vec![0.0; len]),
            v: (vec![0.0; len], vec![0.0; len]),
            lambda: vec![0.0; len],
        };
        for idx in 0..len {
            let (kx, ky) = grid.lattice(idx);
            let (x, y) = grid.wavevector(idx);
            if kx != -half {
                k.d.0[idx] = x;
            }
            if ky != -half {
                k.d.1[idx] = y;
            }
            if idx != 0 {
                k.lambda[idx] = x.hypot(y).powf(2.0 * alpha);
                if !grid.on_nyquist_line(idx) {
                    let r = x.hypot(y);
                    k.v.0[idx] = y / r;
                    k.v.1[idx] = -x / r;
                }
            }
        }
        k
    }

    pub fn velocity(&self, theta: &[Complex64]) -> (Spectrum, Spectrum) {
        (times_i(theta, &self.v.0), times_i(theta, &self.v.1))
    }

    fn truncate(&self, mut c: Spectrum, sign: f64) -> Spectrum {
        for (c, keep) in c.iter_mut().zip(&self.keep) {
            *c = if *keep { *c * sign } else { zero() };
        }
        c
    }

    /// `-P(u·∇θ)` for a given velocity spectrum.
    pub fn advect(&self, u: (&[Complex64], &[Complex64]), theta: &[Complex64]) -> Spectrum {
        let (u1, u2) = inverse_pair(&self.grid, u.0, u.1);
        let (g1, g2) = inverse_pair(&self.grid, &times_i(theta, &self.d.0), &times_i(theta, &self.d.1));
        let prod: Vec<f64> = (0..self.grid.len()).map(|i| u1[i] * g1[i] + u2[i] * g2[i]).collect();
        self.truncate(forward_samples(&self.grid, &prod), -1.0)
    }

    /// `-P(u·∇θ)` with `u = R^⊥θ`.
    pub fn nonlinear(&self, theta: &[Complex64]) -> Spectrum {
        let (u1, u2) = self.velocity(theta);
        self.advect((&u1, &u2), theta)
    }

    /// `-P div(uθ)`, the conservative form of the same term.
    pub fn nonlinear_divergence(&self, theta: &[Complex64]) -> Spectrum {
        let (u1, u2) = self.velocity(theta);
        let (r1, r2) = inverse_pair(&self.grid, &u1, &u2);
        let zeros = vec![zero(); theta.len()];
        let (t, _) = inverse_pair(&self.grid, theta, &zeros);
        let f1 = forward_samples(&self.grid, &r1.iter().zip(&t).map(|(a, b)| a * b).collect::<Vec<_>>());
        let f2 = forward_samples(&self.grid, &r2.iter().zip(&t).map(|(a, b)| a * b).collect::<Vec<_>>());
        let (a, b) = (times_i(&f1, &self.d.0), times_i(&f2, &self.d.1));
        self.truncate(a.iter().zip(&b).map(|(a, b)| a + b).collect(), -1.0)
    }

    /// Keeps only the modes the dealiased dynamics can hold.
    pub fn project(&self, theta: &[Complex64]) -> Spectrum {
        self.truncate(theta.to_vec(), 1.0)
    }

    /// `e^{-κ|ξ|^{2α} h}` per mode.
    pub fn decay(&self, kappa: f64, h: f64) -> Vec<f64> {
        self.lambda.iter().map(|l| (-kappa * l * h).exp()).collect()
    }
}
