use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KvnError, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A smooth potential with its analytic derivative.
#[derive(Clone)]
pub struct PotentialSpec {
    name: String,
    v: ScalarFn,
    v_prime: ScalarFn,
    free: bool,
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec").field("name", &self.name).finish()
    }
}

impl PotentialSpec {
    /// A potential from `v` and `v_prime`; the derivative is spot-checked
    /// against central differences before the potential is accepted.
    pub fn custom<V, D>(name: &str, v: V, v_prime: D) -> Result<Self>
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let spec = Self {
            name: name.to_string(),
            v: Arc::new(v),
            v_prime: Arc::new(v_prime),
            free: false,
        };
        spec.validate(-4.0, 4.0)?;
        Ok(spec)
    }

    pub fn free() -> Self {
        Self {
            name: "free".into(),
            v: Arc::new(|_| 0.0),
            v_prime: Arc::new(|_| 0.0),
            free: true,
        }
    }

    /// `V = f q`, a uniform force `-f`. Gravity pulling toward `q_min` is `f = m g`.
    pub fn linear(slope: f64) -> Self {
        Self {
            name: format!("linear({slope})"),
            v: Arc::new(move |q| slope * q),
            v_prime: Arc::new(move |_| slope),
            free: slope == 0.0,
        }
    }

    /// `V = m omega^2 q^2 / 2`.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        let k = mass * omega * omega;
        Self {
            name: format!("harmonic(omega={omega})"),
            v: Arc::new(move |q| 0.5 * k * q * q),
            v_prime: Arc::new(move |q| k * q),
            free: k == 0.0,
        }
    }

    /// `V = c q^4`.
    pub fn quartic(coeff: f64) -> Self {
        Self {
            name: format!("quartic(c={coeff})"),
            v: Arc::new(move |q| coeff * q.powi(4)),
            v_prime: Arc::new(move |q| 4.0 * coeff * q.powi(3)),
            free: coeff == 0.0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_free(&self) -> bool {
        self.free
    }

    pub fn v(&self, q: f64) -> f64 {
        (self.v)(q)
    }

    pub fn v_prime(&self, q: f64) -> f64 {
        (self.v_prime)(q)
    }

    pub fn sample(&self, qs: &[f64]) -> Vec<f64> {
        qs.iter().map(|&q| self.v(q)).collect()
    }

    /// Compares `v_prime` with a central difference of `v` at 16 random
    /// points of `[lo, hi]`; relative tolerance `1e-6`.
    pub fn validate(&self, lo: f64, hi: f64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let h = 1e-5 * (hi - lo).abs().max(1.0);
        for _ in 0..16 {
            let q = rng.random_range(lo..hi);
            let fd = (self.v(q + h) - self.v(q - h)) / (2.0 * h);
            let an = self.v_prime(q);
            if !fd.is_finite() || !an.is_finite() || (fd - an).abs() > 1e-6 * an.abs().max(1.0) {
                return Err(KvnError::InvalidParameter(format!(
                    "v_prime of '{}' disagrees with dV/dq at q = {q}: {an} vs {fd}",
                    self.name
                )));
            }
        }
        Ok(())
    }
}
