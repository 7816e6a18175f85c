//! Symmetric polynomials in k variables represented as rational combinations
//! of products of power sums P_a = sum_i t_i^a. The representation never
//! stores k explicitly, so the same object integrates over any simplex
//! dimension; that keeps large k (hundreds of variables) cheap.

use std::collections::{BTreeMap, HashMap};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Zero};

use crate::arith::factorial;
use crate::variational::poly::PolyF;

/// Key: multiset of power-sum indices, sorted ascending. `[1, 2, 2]` stands
/// for P1 * P2^2; the empty key is the constant 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymPoly {
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl SymPoly {
    pub fn zero() -> Self {
        SymPoly {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        SymPoly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = SymPoly::zero();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    /// The power sum P_a for a >= 1.
    pub fn power_sum(a: u32) -> Self {
        assert!(a >= 1, "power-sum index must be positive");
        let mut p = SymPoly::zero();
        p.terms.insert(vec![a], BigRational::one());
        p
    }

    /// (1 - P1)^b.
    pub fn u_power(b: u32) -> Self {
        let u = SymPoly::one().sub(&SymPoly::power_sum(1));
        let mut acc = SymPoly::one();
        for _ in 0..b {
            acc = acc.mul(&u);
        }
        acc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, key: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &SymPoly) -> SymPoly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &SymPoly) -> SymPoly {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> SymPoly {
        if c.is_zero() {
            return SymPoly::zero();
        }
        SymPoly {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &SymPoly) -> SymPoly {
        let mut out = SymPoly::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut key = Vec::with_capacity(ka.len() + kb.len());
                key.extend_from_slice(ka);
                key.extend_from_slice(kb);
                key.sort_unstable();
                out.add_term(key, ca * cb);
            }
        }
        out
    }

    /// Expand into an explicit polynomial in k variables.
    pub fn to_polyf(&self, k: usize) -> PolyF {
        let mut out = PolyF::zero(k);
        for (key, c) in &self.terms {
            let mut term = PolyF::constant(k, c.clone());
            for &a in key {
                let psum = PolyF::from_terms(
                    k,
                    (0..k)
                        .map(|i| {
                            let mut e = vec![0u32; k];
                            e[i] = a;
                            (e, BigRational::one())
                        })
                        .collect(),
                );
                term = term.mul(&psum);
            }
            out = out.add(&term);
        }
        out
    }
}

/// Exact integrals of power-sum products over the k-simplex, with a cache
/// keyed by index multiset.
pub struct SimplexIntegrator {
    k: usize,
    cache: HashMap<Vec<u32>, BigRational>,
    block_sums: HashMap<Vec<(u32, u32)>, Vec<BigInt>>,
}

impl SimplexIntegrator {
    pub fn new(k: usize) -> Self {
        SimplexIntegrator {
            k,
            cache: HashMap::new(),
            block_sums: HashMap::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Integral of P_{lambda_1} * ... * P_{lambda_r} over the k-simplex.
    ///
    /// Expanding each power sum and grouping positions that pick the same
    /// variable turns the integral into a sum over set partitions of the r
    /// positions: a partition with blocks B_1..B_s of weights m_1..m_s
    /// contributes k(k-1)...(k-s+1) * prod(m_b!) / (k + |lambda|)!. The
    /// partition sum is evaluated by a multiset recursion, not enumeration.
    pub fn integral_psum(&mut self, lambda: &[u32]) -> BigRational {
        let mut key = lambda.to_vec();
        key.sort_unstable();
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let total: u32 = key.iter().sum();
        let mut counts: Vec<(u32, u32)> = Vec::new();
        for &a in &key {
            match counts.last_mut() {
                Some((idx, c)) if *idx == a => *c += 1,
                _ => counts.push((a, 1)),
            }
        }
        let sums = self.partition_block_sums(&counts);
        let mut num = BigInt::zero();
        for (s, val) in sums.iter().enumerate() {
            if s > self.k {
                break;
            }
            let mut fall = BigInt::one();
            for t in 0..s {
                fall *= BigInt::from(self.k - t);
            }
            num += fall * val;
        }
        let val = BigRational::new(num, factorial(self.k + total as usize));
        self.cache.insert(key, val.clone());
        val
    }

    /// sums[s] = sum over set partitions of the position multiset into
    /// exactly s blocks of prod over blocks of (block weight)!.
    fn partition_block_sums(&mut self, counts: &[(u32, u32)]) -> Vec<BigInt> {
        if counts.is_empty() {
            return vec![BigInt::one()];
        }
        if let Some(v) = self.block_sums.get(counts) {
            return v.clone();
        }
        let total_positions: u32 = counts.iter().map(|&(_, c)| c).sum();
        let mut sums = vec![BigInt::zero(); total_positions as usize + 1];
        // The block containing the first position takes s_v copies of each
        // index v, with one copy of the first index forced.
        let mut take = vec![0u32; counts.len()];
        take[0] = 1;
        loop {
            let mut ways = BigInt::one();
            let mut weight = 0u32;
            for (i, &(idx, cnt)) in counts.iter().enumerate() {
                let avail = if i == 0 { cnt - 1 } else { cnt };
                let chosen = if i == 0 { take[i] - 1 } else { take[i] };
                ways *= binomial(avail, chosen);
                weight += idx * take[i];
            }
            let mut rest: Vec<(u32, u32)> = Vec::with_capacity(counts.len());
            for (i, &(idx, cnt)) in counts.iter().enumerate() {
                if cnt - take[i] > 0 {
                    rest.push((idx, cnt - take[i]));
                }
            }
            let sub = self.partition_block_sums(&rest);
            let term = ways * factorial(weight as usize);
            for (s, val) in sub.iter().enumerate() {
                if !val.is_zero() {
                    sums[s + 1] += &term * val;
                }
            }
            // Advance the multiset choice (odometer with per-index caps).
            let mut i = 0;
            loop {
                if i == counts.len() {
                    break;
                }
                let cap = counts[i].1;
                if take[i] < cap {
                    take[i] += 1;
                    break;
                }
                take[i] = if i == 0 { 1 } else { 0 };
                i += 1;
            }
            if i == counts.len() {
                break;
            }
        }
        self.block_sums.insert(counts.to_vec(), sums.clone());
        sums
    }

    /// Integral of an arbitrary symmetric polynomial over the k-simplex.
    pub fn integral(&mut self, f: &SymPoly) -> BigRational {
        let mut acc = BigRational::zero();
        for (key, c) in f.terms() {
            acc += c * self.integral_psum(key);
        }
        acc
    }

    /// Integral of a product, multiplying first.
    pub fn integral_product(&mut self, f: &SymPoly, g: &SymPoly) -> BigRational {
        self.integral(&f.mul(g))
    }
}

fn binomial(n: u32, r: u32) -> BigInt {
    if r > n {
        return BigInt::zero();
    }
    factorial(n as usize) / (factorial(r as usize) * factorial((n - r) as usize))
}

/// Integral of F over the first coordinate, from 0 to 1 minus the sum of the
/// rest, expressed as a symmetric polynomial in the remaining k-1 variables.
///
/// Each P_a splits as t1^a + Q_a with Q_a the power sum over the rest; after
/// expanding, t1^n integrates to (1 - Q_1)^{n+1}/(n+1).
pub fn integrate_first_coord(f: &SymPoly) -> SymPoly {
    // Group by the power of t1.
    let mut by_power: BTreeMap<u32, SymPoly> = BTreeMap::new();
    for (key, c) in f.terms() {
        // Subsets of the factors contribute their indices to the t1 power.
        let r = key.len();
        for mask in 0u32..(1 << r) {
            let mut t1_pow = 0u32;
            let mut rest: Vec<u32> = Vec::new();
            for (i, &a) in key.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    t1_pow += a;
                } else {
                    rest.push(a);
                }
            }
            let mut q = SymPoly::zero();
            q.add_term(rest, c.clone());
            let entry = by_power.entry(t1_pow).or_insert_with(SymPoly::zero);
            *entry = entry.add(&q);
        }
    }
    let mut out = SymPoly::zero();
    for (n, g) in by_power {
        // (1 - Q_1)^{n+1} / (n + 1).
        let mut binom = SymPoly::zero();
        let mut c = BigInt::one();
        for t in 0..=(n + 1) {
            let signed = if t % 2 == 0 { c.clone() } else { -c.clone() };
            binom.add_term(vec![1; t as usize], BigRational::from_integer(signed));
            c = c * BigInt::from(n + 1 - t) / BigInt::from(t + 1);
        }
        let piece = g
            .mul(&binom)
            .scale(&BigRational::new(BigInt::one(), BigInt::from(n + 1)));
        out = out.add(&piece);
    }
    out
}

/// J_1 bilinear form: integral over the (k-1)-simplex of the product of the
/// first-coordinate integrals of f and g. For symmetric F the full functional
/// sum over coordinates is k times this value.
pub fn j1_bilinear(f: &SymPoly, g: &SymPoly, k: usize) -> BigRational {
    assert!(k >= 1);
    let inf = integrate_first_coord(f);
    let ing = integrate_first_coord(g);
    SimplexIntegrator::new(k - 1).integral_product(&inf, &ing)
}
