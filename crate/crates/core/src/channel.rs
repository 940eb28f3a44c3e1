//! Depolarizing noise, syndromes and the hashing bound.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::CssCode;
use crate::galois::{Field, Gf};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ChannelError {
    #[error("depolarizing probability {0} outside [0, 3/4)")]
    BadProbability(f64),
    #[error("rate {0} outside (0, 1)")]
    BadRate(f64),
}

/// X and Z noise as GF(q) symbols: `v(xi_j)` and `w(zeta_j)` are the bit segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoisePair {
    pub xi: Vec<Gf>,
    pub zeta: Vec<Gf>,
}

impl NoisePair {
    pub fn zero(n: usize) -> Self {
        NoisePair {
            xi: vec![0; n],
            zeta: vec![0; n],
        }
    }
}

/// `sigma = H_Δ xi` and `tau = H_Γ zeta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromePair {
    pub sigma: Vec<Gf>,
    pub tau: Vec<Gf>,
}

fn check_p(p_d: f64) -> Result<(), ChannelError> {
    if (0.0..0.75).contains(&p_d) {
        Ok(())
    } else {
        Err(ChannelError::BadProbability(p_d))
    }
}

/// I.i.d. bit pairs: `(0,0)` with probability `1 - p_d`, each of the other
/// three with `p_d / 3`.
pub fn sample_noise<R: Rng + ?Sized>(
    field: &Field,
    p_d: f64,
    n: usize,
    rng: &mut R,
) -> Result<NoisePair, ChannelError> {
    check_p(p_d)?;
    let e = field.e();
    let mut xi = Vec::with_capacity(n);
    let mut zeta = Vec::with_capacity(n);
    for _ in 0..n {
        let (mut x, mut z) = (0u32, 0u32);
        for k in 0..e {
            let u: f64 = rng.gen();
            if u >= 1.0 - p_d {
                let (bx, bz) = match rng.gen_range(0..3) {
                    0 => (0, 1),
                    1 => (1, 0),
                    _ => (1, 1),
                };
                x |= bx << k;
                z |= bz << k;
            }
        }
        xi.push(field.from_v(x));
        zeta.push(field.from_w(z));
    }
    Ok(NoisePair { xi, zeta })
}

pub fn syndromes(code: &CssCode, noise: &NoisePair) -> SyndromePair {
    SyndromePair {
        sigma: code.hdelta.mul_vec(&code.field, &noise.xi),
        tau: code.hgamma.mul_vec(&code.field, &noise.zeta),
    }
}

/// Joint symbol prior `p(xi, zeta)` at index `xi * q + zeta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    pub q: usize,
    pub table: Vec<f64>,
    /// Per-bit kernel `T[x][z]` when the prior is the product
    /// `prod_k T[v_k(xi)][w_k(zeta)]`; enables the O(q e) coupling update.
    pub bit_kernel: Option<[[f64; 2]; 2]>,
}

impl Prior {
    pub fn get(&self, xi: Gf, zeta: Gf) -> f64 {
        self.table[xi as usize * self.q + zeta as usize]
    }

    /// Marginal of `xi`.
    pub fn xi_marginal(&self) -> Vec<f64> {
        (0..self.q)
            .map(|a| self.table[a * self.q..(a + 1) * self.q].iter().sum())
            .collect()
    }

    /// Marginal of `zeta`.
    pub fn zeta_marginal(&self) -> Vec<f64> {
        (0..self.q)
            .map(|b| (0..self.q).map(|a| self.table[a * self.q + b]).sum())
            .collect()
    }
}

pub fn depolarizing_kernel(p_d: f64) -> [[f64; 2]; 2] {
    [[1.0 - p_d, p_d / 3.0], [p_d / 3.0, p_d / 3.0]]
}

pub fn symbol_prior(field: &Field, p_d: f64) -> Result<Prior, ChannelError> {
    check_p(p_d)?;
    let q = field.q();
    let e = field.e();
    let t = depolarizing_kernel(p_d);
    let mut table = vec![0.0; q * q];
    for a in 0..q {
        let va = field.v(a as Gf);
        for b in 0..q {
            let wb = field.w(b as Gf);
            table[a * q + b] = (0..e)
                .map(|k| t[(va >> k & 1) as usize][(wb >> k & 1) as usize])
                .product();
        }
    }
    Ok(Prior {
        q,
        table,
        bit_kernel: Some(t),
    })
}

fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// `1 - H2(p) - p log2 3`.
pub fn hashing_bound(p_d: f64) -> f64 {
    1.0 - h2(p_d) - p_d * 3f64.log2()
}

/// The `p_d` at which the hashing bound equals `rate`, by bisection to 1e-10.
pub fn hashing_threshold(rate: f64) -> Result<f64, ChannelError> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(ChannelError::BadRate(rate));
    }
    let (mut lo, mut hi) = (0.0, 0.75);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if hashing_bound(mid) > rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn prior_basics() {
        let f = Field::with_default_poly(3).unwrap();
        let p = symbol_prior(&f, 0.1).unwrap();
        assert!((p.get(0, 0) - 0.9f64.powi(3)).abs() < 1e-15);
        assert!((p.table.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(symbol_prior(&f, 0.75).is_err());
    }

    #[test]
    fn zero_noise() {
        let f = Field::with_default_poly(8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let n = sample_noise(&f, 0.0, 100, &mut rng).unwrap();
        assert_eq!(n, NoisePair::zero(100));
    }

    #[test]
    fn hashing() {
        assert_eq!(hashing_bound(0.0), 1.0);
        assert!((hashing_bound(0.0744) - 0.5).abs() < 5e-3);
        let t = hashing_threshold(1.0 / 3.0).unwrap();
        assert!(t > 0.0945 && t < 0.12, "{t}");
    }
}
