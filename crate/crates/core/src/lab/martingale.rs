//! Synthetic bounded martingales for Monte Carlo checks of Bernstein's
//! moment-generating-function inequality.

use rayon::prelude::*;

use crate::bandit::SeededRng;
use crate::bounds::E_MINUS_2;
use crate::error::{BanditError, Result};

/// Law of the martingale differences `X_τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MartingaleFamily {
    /// `X = ±c` with equal probability.
    Rademacher { c: f64 },
    /// `X = c (B − p)` with `B ~ Bernoulli(p)`.
    CenteredBernoulli { c: f64, p: f64 },
    /// `X ~ Uniform[−c, c]`.
    Uniform { c: f64 },
    /// `X = ±s_τ` with `s_τ = c` when `M_{τ−1} ≥ 0` and `c·shrink` otherwise,
    /// so the conditional variance depends on the history.
    HistoryDependent { c: f64, shrink: f64 },
}

impl MartingaleFamily {
    /// Almost-sure bound `C` on `|X_τ|`.
    pub fn range(&self) -> f64 {
        match *self {
            MartingaleFamily::Rademacher { c } | MartingaleFamily::Uniform { c } => c,
            MartingaleFamily::CenteredBernoulli { c, p } => c * p.max(1.0 - p),
            MartingaleFamily::HistoryDependent { c, shrink } => c * shrink.max(1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            MartingaleFamily::Rademacher { c } | MartingaleFamily::Uniform { c } => c > 0.0,
            MartingaleFamily::CenteredBernoulli { c, p } => c > 0.0 && p > 0.0 && p < 1.0,
            MartingaleFamily::HistoryDependent { c, shrink } => c > 0.0 && shrink > 0.0,
        };
        if ok && self.range().is_finite() {
            Ok(())
        } else {
            Err(BanditError::param(format!("invalid martingale family {self:?}")))
        }
    }

    /// One difference and its conditional variance given `m_prev`.
    #[inline]
    fn step(&self, m_prev: f64, rng: &mut SeededRng) -> (f64, f64) {
        let u = rng.next_unit();
        match *self {
            MartingaleFamily::Rademacher { c } => (if u < 0.5 { c } else { -c }, c * c),
            MartingaleFamily::CenteredBernoulli { c, p } => {
                let x = if u < p { c * (1.0 - p) } else { -c * p };
                (x, c * c * p * (1.0 - p))
            }
            MartingaleFamily::Uniform { c } => (c * (2.0 * u - 1.0), c * c / 3.0),
            MartingaleFamily::HistoryDependent { c, shrink } => {
                let s = if m_prev >= 0.0 { c } else { c * shrink };
                (if u < 0.5 { s } else { -s }, s * s)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticMartingale {
    pub family: MartingaleFamily,
    pub horizon: u64,
}

impl SyntheticMartingale {
    pub fn new(family: MartingaleFamily, horizon: u64) -> Result<Self> {
        family.validate()?;
        if horizon == 0 {
            return Err(BanditError::param("martingale horizon must be at least 1"));
        }
        Ok(SyntheticMartingale { family, horizon })
    }

    pub fn range(&self) -> f64 {
        self.family.range()
    }

    /// One path: `(M_t, V_t)`.
    pub fn sample(&self, rng: &mut SeededRng) -> (f64, f64) {
        let (mut m, mut v) = (0.0, 0.0);
        for _ in 0..self.horizon {
            let (x, var) = self.family.step(m, rng);
            m += x;
            v += var;
        }
        (m, v)
    }
}

/// Monte Carlo estimate of `E exp(λ M_t − (e−2) λ² V_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfEstimate {
    pub lambda: f64,
    pub samples: u64,
    pub mean: f64,
    pub stderr: f64,
}

impl MgfEstimate {
    /// The inequality says the expectation is at most 1; allow three
    /// standard errors of sampling noise.
    pub fn passes(&self) -> bool {
        self.mean <= 1.0 + 3.0 * self.stderr
    }
}

const MGF_CHUNK: u64 = 1 << 14;

/// Checks Bernstein's inequality for `martingale` at `lambda ∈ [0, 1/C]`.
/// Samples are drawn in fixed chunks, chunk `i` on stream `i`, and merged
/// in chunk order, so the estimate does not depend on the thread count.
pub fn mgf_check(martingale: &SyntheticMartingale, lambda: f64, num_samples: u64, seed: u64) -> Result<MgfEstimate> {
    let c = martingale.range();
    if !(lambda >= 0.0) || lambda > 1.0 / c {
        return Err(BanditError::param(format!(
            "lambda {lambda} outside [0, 1/C] = [0, {}]",
            1.0 / c
        )));
    }
    if num_samples < 2 {
        return Err(BanditError::param("need at least two samples"));
    }
    let chunks = num_samples.div_ceil(MGF_CHUNK);
    let sums: Vec<(f64, f64, u64)> = (0..chunks)
        .into_par_iter()
        .map(|i| {
            let n = MGF_CHUNK.min(num_samples - i * MGF_CHUNK);
            let mut rng = SeededRng::new(seed, i);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..n {
                let (m, v) = martingale.sample(&mut rng);
                let y = (lambda * m - E_MINUS_2 * lambda * lambda * v).exp();
                s += y;
                s2 += y * y;
            }
            (s, s2, n)
        })
        .collect();
    let (s, s2, n) = sums
        .iter()
        .fold((0.0, 0.0, 0u64), |acc, x| (acc.0 + x.0, acc.1 + x.1, acc.2 + x.2));
    let nf = n as f64;
    let mean = s / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(MgfEstimate {
        lambda,
        samples: n,
        mean,
        stderr: (var / nf).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_zero_is_exactly_one() {
        let m = SyntheticMartingale::new(MartingaleFamily::Uniform { c: 1.0 }, 10).unwrap();
        let e = mgf_check(&m, 0.0, 1000, 1).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.stderr, 0.0);
        assert!(e.passes());
    }

    #[test]
    fn inadmissible_lambda_rejected() {
        let m = SyntheticMartingale::new(MartingaleFamily::Rademacher { c: 2.0 }, 10).unwrap();
        assert!(mgf_check(&m, 1.5 / 2.0, 1000, 1).is_err());
        assert!(mgf_check(&m, -0.1, 1000, 1).is_err());
        assert!(mgf_check(&m, 0.5, 1000, 1).is_ok());
    }

    #[test]
    fn differences_are_bounded_and_centered() {
        let fams = [
            MartingaleFamily::Rademacher { c: 1.5 },
            MartingaleFamily::CenteredBernoulli { c: 2.0, p: 0.2 },
            MartingaleFamily::Uniform { c: 0.7 },
            MartingaleFamily::HistoryDependent { c: 1.0, shrink: 0.3 },
        ];
        for fam in fams {
            let mut rng = SeededRng::new(3, 0);
            let n = 200_000;
            let (mut sum, mut m) = (0.0, 0.0);
            for _ in 0..n {
                let (x, var) = fam.step(m, &mut rng);
                assert!(x.abs() <= fam.range() + 1e-12);
                assert!(var <= fam.range().powi(2) + 1e-12);
                sum += x;
                m += x;
            }
            let mean = sum / n as f64;
            assert!(mean.abs() < 4.0 * fam.range() / (n as f64).sqrt(), "{fam:?}: {mean}");
        }
    }

    #[test]
    fn chunking_is_deterministic() {
        let m = SyntheticMartingale::new(MartingaleFamily::CenteredBernoulli { c: 1.0, p: 0.3 }, 20).unwrap();
        let a = mgf_check(&m, 0.8, 50_000, 9).unwrap();
        let b = mgf_check(&m, 0.8, 50_000, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.passes());
    }
}
