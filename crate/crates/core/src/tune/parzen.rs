use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / SQRT_2))
}

/// Mixture of Gaussians truncated to `[lo, hi]`: one kernel per observation
/// plus a prior kernel centred on the interval with width `hi - lo`.
///
/// Each kernel's bandwidth is the larger of the gaps to its sorted
/// neighbours (the interval ends bound the outermost ones), clipped to
/// `[(hi - lo) / 100, hi - lo]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Parzen1D {
    lo: f64,
    hi: f64,
    mus: Vec<f64>,
    sigmas: Vec<f64>,
    weights: Vec<f64>,
    /// Truncation mass of each kernel inside `[lo, hi]`.
    mass: Vec<f64>,
}

impl Parzen1D {
    pub fn fit(observations: &[f64], lo: f64, hi: f64, prior_weight: f64) -> Self {
        let range = hi - lo;
        let prior_mu = 0.5 * (lo + hi);
        // (centre, weight, is_prior)
        let mut kernels: Vec<(f64, f64, bool)> = observations
            .iter()
            .map(|&x| (x.clamp(lo, hi), 1.0, false))
            .chain(std::iter::once((prior_mu, prior_weight, true)))
            .collect();
        kernels.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = kernels.len();
        let mus: Vec<f64> = kernels.iter().map(|k| k.0).collect();
        let sigmas = (0..n)
            .map(|i| {
                if kernels[i].2 {
                    return range;
                }
                let left = mus[i] - if i == 0 { lo } else { mus[i - 1] };
                let right = if i + 1 == n { hi } else { mus[i + 1] } - mus[i];
                left.max(right).clamp(range / 100.0, range)
            })
            .collect::<Vec<f64>>();
        let total: f64 = kernels.iter().map(|k| k.1).sum();
        let weights = kernels.iter().map(|k| k.1 / total).collect();
        let mass = mus
            .iter()
            .zip(&sigmas)
            .map(|(&m, &s)| normal_cdf((hi - m) / s) - normal_cdf((lo - m) / s))
            .collect();
        Parzen1D {
            lo,
            hi,
            mus,
            sigmas,
            weights,
            mass,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(self.lo..=self.hi).contains(&x) {
            return 0.0;
        }
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        (0..self.mus.len())
            .map(|i| {
                let z = (x - self.mus[i]) / self.sigmas[i];
                self.weights[i] * norm * (-0.5 * z * z).exp() / (self.sigmas[i] * self.mass[i])
            })
            .sum()
    }

    /// Probability of `[a, b]` (clipped to the support).
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        let (a, b) = (a.max(self.lo), b.min(self.hi));
        if a >= b {
            return 0.0;
        }
        (0..self.mus.len())
            .map(|i| {
                let (m, s) = (self.mus[i], self.sigmas[i]);
                self.weights[i] * (normal_cdf((b - m) / s) - normal_cdf((a - m) / s)) / self.mass[i]
            })
            .sum()
    }

    /// Picks a kernel by weight, then rejection-samples it inside the support.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut k = self.mus.len() - 1;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                k = i;
                break;
            }
        }
        for _ in 0..1000 {
            let z: f64 = StandardNormal.sample(rng);
            let x = self.mus[k] + self.sigmas[k] * z;
            if (self.lo..=self.hi).contains(&x) {
                return x;
            }
        }
        self.mus[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadrature(p: &Parzen1D, lo: f64, hi: f64) -> f64 {
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        // composite Simpson
        let mut s = p.pdf(lo) + p.pdf(hi);
        for i in 1..n {
            s += p.pdf(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn integrates_to_one() {
        for obs in [
            vec![],
            vec![2.0],
            vec![1.9, 2.0, 2.05, 7.5, -9.9],
            vec![-10.0, 10.0, 10.0],
        ] {
            let p = Parzen1D::fit(&obs, -10.0, 10.0, 1.0);
            assert!((quadrature(&p, -10.0, 10.0) - 1.0).abs() < 1e-3, "{obs:?}");
            assert!((p.interval_mass(-10.0, 10.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bandwidths() {
        let p = Parzen1D::fit(&[1.0, 3.0], 0.0, 10.0, 1.0);
        // sorted centres 1, 3, 5(prior)
        assert_eq!(p.mus, vec![1.0, 3.0, 5.0]);
        assert_eq!(p.sigmas, vec![2.0, 2.0, 10.0]);
        let tight = Parzen1D::fit(&[4.0, 4.0, 4.0], 0.0, 10.0, 1.0);
        assert_eq!(tight.sigmas[0], 4.0);
        assert_eq!(tight.sigmas[1], 0.1);
    }

    #[test]
    fn samples_stay_inside() {
        let p = Parzen1D::fit(&[0.01, 0.02], 0.0, 1.0, 1.0);
        let mut rng = crate::seed::rng(3);
        assert!((0..2000).map(|_| p.sample(&mut rng)).all(|x| (0.0..=1.0).contains(&x)));
    }
}
