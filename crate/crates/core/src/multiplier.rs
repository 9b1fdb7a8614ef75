//! The multiplier `m(k, eta)` and the oscillatory integrals built from it.
//!
//! `I_n(k; k_1..k_2n) = pv \int m(k - k_1, eta) prod_j s_j(eta) e^{-i(k_1 + k_2n) eta / 2}`,
//! `I'_n(k_1..k_2n) = pv \int sin((k_1 + k_2n) eta/2) / sin(eta/2) prod_j s_j(eta)`,
//! with `s_j = sin((k_j - k_{j+1}) eta/2) / ((k_j - k_{j+1}) sin(eta/2))`,
//! `j = 1..2n-1`. Every factor is a trigonometric polynomial in `eta/2`, so
//! after splitting off the odd part the integrals have no singularity and a
//! midpoint rule with enough nodes is exact.

use std::f64::consts::PI;

use serde::Serialize;

use crate::exec::Exec;
use crate::{PeskinError, Result, C64};

/// `m(k, eta) = (1 - sin(k eta/2) / (k tan(eta/2)) e^{-ik eta/2}) / (2 sin(eta/2))`,
/// with `m(0, eta) = 0` and the limit `ik/2` at `eta = 0`.
pub fn m_multiplier(k: i64, eta: f64) -> C64 {
    if k == 0 {
        return C64::new(0.0, 0.0);
    }
    let v = m_positive(k.unsigned_abs(), eta);
    if k < 0 {
        v.conj()
    } else {
        v
    }
}

/// Written as `(1/2k) sum_{j<k} (w(j) + w(j+1))` with
/// `w(n) = sin(n eta/2)/sin(eta/2) (sin(n eta/2) + i cos(n eta/2))`, which
/// has no cancellation near `eta = 0`.
fn m_positive(k: u64, eta: f64) -> C64 {
    let s = (0.5 * eta).sin();
    let w = |n: u64| {
        let (sn, cn) = (0.5 * n as f64 * eta).sin_cos();
        let ratio = if s == 0.0 { n as f64 } else { sn / s };
        C64::new(ratio * sn, ratio * cn)
    };
    let mut acc = C64::new(0.0, 0.0);
    let mut prev = w(0);
    for j in 1..=k {
        let next = w(j);
        acc += prev + next;
        prev = next;
    }
    acc / (2.0 * k as f64)
}

/// `sin(L eta/2) / sin(eta/2)`, `L` a nonnegative integer.
fn dirichlet(l: i64, eta: f64) -> f64 {
    let s = (0.5 * eta).sin();
    if s == 0.0 {
        l as f64
    } else {
        (0.5 * l as f64 * eta).sin() / s
    }
}

fn has_repeat(ks: &[i64]) -> bool {
    ks.windows(2).any(|w| w[0] == w[1])
}

fn check_tuple(ks: &[i64]) -> Result<()> {
    if ks.len() < 2 || !ks.len().is_multiple_of(2) {
        return Err(PeskinError::InvalidParameter(format!(
            "tuple must have an even length of at least 2, got {}",
            ks.len()
        )));
    }
    Ok(())
}

/// `prod_{j} sin((k_j - k_{j+1}) eta/2) / ((k_j - k_{j+1}) sin(eta/2))`
/// over consecutive pairs of `ks`.
fn chain_product(ks: &[i64], eta: f64) -> f64 {
    ks.windows(2)
        .map(|w| {
            let d = w[0] - w[1];
            dirichlet(d.abs(), eta) / d.abs() as f64
        })
        .product()
}

const MAX_NODES: usize = 1 << 22;

/// Midpoint rule on `(-pi, pi)`, doubling the node count until two
/// successive estimates agree.
fn integrate(f: impl Fn(f64) -> f64, start: usize) -> Result<f64> {
    let rule = |n: usize| {
        let h = 2.0 * PI / n as f64;
        (0..n).map(|i| f(-PI + (i as f64 + 0.5) * h)).sum::<f64>() * h
    };
    let mut n = start.max(16).next_power_of_two();
    let mut prev = rule(n);
    loop {
        n *= 2;
        let cur = rule(n);
        let diff = (cur - prev).abs();
        if diff <= 1e-13 * cur.abs().max(1.0) {
            return Ok(cur);
        }
        if n >= MAX_NODES {
            return Err(PeskinError::QuadratureAccuracy { difference: diff, nodes: n });
        }
        prev = cur;
    }
}

/// Node count at which the midpoint rule becomes exact for the integrands
/// below: their highest frequency in `eta` is half the total degree.
fn exact_nodes(ks: &[i64], extra: i64) -> usize {
    let degree: i64 = ks.windows(2).map(|w| (w[0] - w[1]).abs()).sum::<i64>() + extra.abs() + 2;
    (degree as usize + 2).next_power_of_two()
}

/// Quadrature of `I'_n(k_1..k_2n)`.
pub fn integral_sn(ks: &[i64]) -> Result<f64> {
    check_tuple(ks)?;
    let s = ks[0] + ks[ks.len() - 1];
    if has_repeat(ks) || s == 0 {
        return Ok(0.0);
    }
    let sign = s.signum() as f64;
    integrate(|eta| sign * dirichlet(s.abs(), eta) * chain_product(ks, eta), exact_nodes(ks, s))
}

/// `I''` of the splitting `I_n = (-i/2)(I' - I'')`:
/// `\int cos(eta/2) sin((k + k_2n) eta/2)/sin(eta/2) prod_{j>=0} s_j`.
fn integral_i2(k: i64, ks: &[i64]) -> Result<f64> {
    let s = k + ks[ks.len() - 1];
    if s == 0 {
        return Ok(0.0);
    }
    let mut full = Vec::with_capacity(ks.len() + 1);
    full.push(k);
    full.extend_from_slice(ks);
    let sign = s.signum() as f64;
    integrate(
        |eta| sign * (0.5 * eta).cos() * dirichlet(s.abs(), eta) * chain_product(&full, eta),
        exact_nodes(&full, s),
    )
}

/// Quadrature of `I_n(k; k_1..k_2n)`. Zero when any consecutive pair in
/// `(k, k_1, .., k_2n)` repeats.
pub fn integral_in(k: i64, ks: &[i64]) -> Result<C64> {
    check_tuple(ks)?;
    if k == ks[0] || has_repeat(ks) {
        return Ok(C64::new(0.0, 0.0));
    }
    let i1 = integral_sn(ks)?;
    let i2 = integral_i2(k, ks)?;
    Ok(C64::new(0.0, -0.5 * (i1 - i2)))
}

/// Number of `(m_1, .., m_r)` with `0 <= m_j < bounds[j]` summing to
/// `target`.
fn count_bounded(bounds: &[i64], target: i64) -> u128 {
    if target < 0 {
        return 0;
    }
    let t = target as usize;
    let mut ways = vec![0u128; t + 1];
    ways[0] = 1;
    for &b in bounds {
        if b <= 0 {
            return 0;
        }
        // sliding-window convolution with the indicator of [0, b)
        let mut next = vec![0u128; t + 1];
        let mut window = 0u128;
        for s in 0..=t {
            window += ways[s];
            if s >= b as usize {
                window -= ways[s - b as usize];
            }
            next[s] = window;
        }
        ways = next;
    }
    ways[t]
}

/// Exact `I'_n` by counting the lattice points where the exponent of the
/// expanded integrand vanishes.
pub fn integral_sn_exact(ks: &[i64]) -> Result<f64> {
    check_tuple(ks)?;
    let n = (ks.len() / 2) as i64;
    let s = ks[0] + ks[ks.len() - 1];
    if has_repeat(ks) || s == 0 {
        return Ok(0.0);
    }
    let mut bounds: Vec<i64> = ks.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let denom: f64 = bounds.iter().map(|&b| b as f64).product();
    bounds.push(s.abs());
    let total: i64 = bounds.iter().sum();
    // total is even: every k_j appears twice
    let count = count_bounded(&bounds, total / 2 - n);
    Ok(2.0 * PI * s.signum() as f64 * count as f64 / denom)
}

/// Exact `I_n` from the same counting applied to both halves of
/// `(-i/2)(I' - I'')`.
pub fn integral_in_exact(k: i64, ks: &[i64]) -> Result<C64> {
    check_tuple(ks)?;
    if k == ks[0] || has_repeat(ks) {
        return Ok(C64::new(0.0, 0.0));
    }
    let n = (ks.len() / 2) as i64;
    let i1 = integral_sn_exact(ks)?;
    let s = k + ks[ks.len() - 1];
    let i2 = if s == 0 {
        0.0
    } else {
        let mut bounds: Vec<i64> = std::iter::once(k)
            .chain(ks.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| (w[0] - w[1]).abs())
            .collect();
        let denom: f64 = bounds.iter().map(|&b| b as f64).product();
        bounds.push(s.abs());
        let total: i64 = bounds.iter().sum();
        let c = count_bounded(&bounds, total / 2 - n) + count_bounded(&bounds, total / 2 - n - 1);
        PI * s.signum() as f64 * c as f64 / denom
    };
    Ok(C64::new(0.0, -0.5 * (i1 - i2)))
}

/// `2 pi min(|k1 - k2|, |k1 + k2|) sgn(k1 + k2) / |k1 - k2|`, zero when
/// `k1 = k2`.
pub fn integral_s1_closed(k1: i64, k2: i64) -> f64 {
    if k1 == k2 {
        return 0.0;
    }
    let (d, s) = ((k1 - k2).abs(), k1 + k2);
    2.0 * PI * d.min(s.abs()) as f64 * s.signum() as f64 / d as f64
}

/// One verified tuple.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaRow {
    pub n: usize,
    pub k_tuple: String,
    /// Quadrature value of `I'_n`.
    pub numeric: f64,
    /// Counting value of `I'_n`.
    pub exact: f64,
    pub abs_err: f64,
    /// `2 pi - max(|I_n|, |I'_n|)` from the quadrature values.
    pub bound_margin: f64,
}

/// Lemma query: `k` and `(k_1, .., k_2n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplierQuery {
    pub k: i64,
    pub ks: Vec<i64>,
}

impl MultiplierQuery {
    pub fn n(&self) -> usize {
        self.ks.len() / 2
    }

    pub fn label(&self) -> String {
        std::iter::once(self.k)
            .chain(self.ks.iter().copied())
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(";")
    }
}

/// Random queries with `n <= max_n`, entries in `[-max_k, max_k]` and no
/// repeated neighbours.
pub fn random_queries<R: rand::Rng>(rng: &mut R, count: usize, max_n: usize, max_k: i64) -> Vec<MultiplierQuery> {
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_n);
            let mut seq: Vec<i64> = vec![rng.gen_range(-max_k..=max_k)];
            while seq.len() < 2 * n + 1 {
                let v = rng.gen_range(-max_k..=max_k);
                if v != *seq.last().unwrap() {
                    seq.push(v);
                }
            }
            MultiplierQuery { k: seq[0], ks: seq[1..].to_vec() }
        })
        .collect()
}

pub fn check_query(q: &MultiplierQuery) -> Result<LemmaRow> {
    let numeric = integral_sn(&q.ks)?;
    let exact = integral_sn_exact(&q.ks)?;
    let i_n = integral_in(q.k, &q.ks)?;
    Ok(LemmaRow {
        n: q.n(),
        k_tuple: q.label(),
        numeric,
        exact,
        abs_err: (numeric - exact).abs(),
        bound_margin: 2.0 * PI - i_n.norm().max(numeric.abs()),
    })
}

/// Verify a batch of queries.
pub fn lemma_batch(queries: &[MultiplierQuery], exec: Exec) -> Result<Vec<LemmaRow>> {
    exec.map(queries, check_query).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn direct_m(k: i64, h: f64) -> C64 {
        let kf = k as f64;
        (C64::new(1.0, 0.0) - C64::from_polar((kf * h / 2.0).sin() / (kf * (h / 2.0).tan()), -kf * h / 2.0))
            / (2.0 * (h / 2.0).sin())
    }

    #[test]
    fn multiplier_values() {
        assert_eq!(m_multiplier(0, 1.3), C64::new(0.0, 0.0));
        for k in 1..=20 {
            assert!((m_multiplier(k, PI) - C64::new(0.5, 0.0)).norm() < 1e-14);
            for h in [-2.9, -1.0, 0.4, 2.2] {
                assert!((m_multiplier(k, h) - direct_m(k, h)).norm() < 1e-12);
                assert!((m_multiplier(-k, h) - direct_m(-k, h)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn multiplier_near_zero() {
        for k in 1..=50i64 {
            assert_eq!(m_multiplier(k, 0.0), C64::new(0.0, k as f64 / 2.0));
            for h in [1e-8, -1e-6, 1e-4] {
                let series = C64::new(h * (2.0 * (k * k) as f64 + 1.0) / 12.0, k as f64 / 2.0);
                let v = m_multiplier(k, h);
                assert!((v - series).norm() <= 0.1 * (k * k * k * k) as f64 * h * h + 1e-12, "{k} {h}");
            }
        }
    }

    #[test]
    fn multiplier_bounded() {
        for k in 1..=50i64 {
            for i in 0..=2000 {
                let h = -PI + 2.0 * PI * i as f64 / 2000.0;
                let v = m_multiplier(k, h);
                assert!(v.re.is_finite() && v.im.is_finite());
                assert!(v.norm() <= k as f64 / 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn repeats_vanish() {
        assert_eq!(integral_in(3, &[3, 1]).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(integral_in(2, &[3, 3]).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(integral_sn(&[1, -1]).unwrap(), 0.0);
        assert_eq!(integral_sn_exact(&[1, -1]).unwrap(), 0.0);
        assert_eq!(integral_sn_exact(&[2, 5, 5, 1]).unwrap(), 0.0);
        assert!(integral_sn(&[1, 2, 3]).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert!((integral_s1_closed(3, 2) - 2.0 * PI).abs() < 1e-15);
        assert!((integral_s1_closed(5, -3) - PI / 2.0).abs() < 1e-15);
        assert!((integral_sn_exact(&[2, 1]).unwrap() - 2.0 * PI).abs() < 1e-15);
    }

    /// Symmetric midpoint rule on the defining integrand; the pairing of
    /// nodes `eta` and `-eta` realizes the principal value.
    fn in_oracle(k: i64, ks: &[i64], nodes: usize) -> C64 {
        let h = 2.0 * PI / nodes as f64;
        let s = ks[0] + ks[ks.len() - 1];
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..nodes / 2 {
            let eta = (i as f64 + 0.5) * h;
            for e in [eta, -eta] {
                acc += m_multiplier(k - ks[0], e) * chain_product(ks, e) * C64::from_polar(1.0, -(s as f64) * e / 2.0);
            }
        }
        acc * h
    }

    #[test]
    fn i1_against_dense_oracle() {
        let q = integral_in(2, &[1, 0]).unwrap();
        let oracle = in_oracle(2, &[1, 0], 1_000_000);
        assert!((q - oracle).norm() < 1e-8, "{q} {oracle}");
        let e = integral_in_exact(2, &[1, 0]).unwrap();
        assert!((q - e).norm() < 1e-12);
    }

    #[test]
    fn exhaustive_n1() {
        for k1 in -30..=30i64 {
            for k2 in -30..=30i64 {
                if k1 == k2 {
                    continue;
                }
                let exact = integral_sn_exact(&[k1, k2]).unwrap();
                assert!((exact - integral_s1_closed(k1, k2)).abs() < 1e-12, "{k1} {k2}");
                assert!((exact - integral_sn(&[k1, k2]).unwrap()).abs() < 1e-8);
                assert!((exact + integral_sn_exact(&[-k1, -k2]).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn counting_matches_brute_force() {
        let bounds = [3i64, 4, 2, 5];
        for target in 0..14 {
            let mut brute = 0u128;
            for a in 0..3 {
                for b in 0..4 {
                    for c in 0..2 {
                        for d in 0..5 {
                            if a + b + c + d == target {
                                brute += 1;
                            }
                        }
                    }
                }
            }
            assert_eq!(count_bounded(&bounds, target), brute);
        }
    }

    #[test]
    fn batch_strategies_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let qs = random_queries(&mut rng, 40, 3, 20);
        let a = lemma_batch(&qs, Exec::Sequential).unwrap();
        let b = lemma_batch(&qs, Exec::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.numeric.to_bits(), y.numeric.to_bits());
            assert!(x.abs_err < 1e-8 && x.bound_margin >= -1e-8);
        }
    }

    proptest! {
        #[test]
        fn lemma_bounds(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = &random_queries(&mut rng, 1, 3, 20)[0];
            let i_n = integral_in(q.k, &q.ks).unwrap();
            let e = integral_in_exact(q.k, &q.ks).unwrap();
            prop_assert!((i_n - e).norm() < 1e-8);
            prop_assert!(i_n.norm() <= 2.0 * PI * (1.0 + 1e-8));
            let s = integral_sn_exact(&q.ks).unwrap();
            prop_assert!(s.abs() <= 2.0 * PI * (1.0 + 1e-12));
            prop_assert!((s - integral_sn(&q.ks).unwrap()).abs() < 1e-8);
        }
    }
}
