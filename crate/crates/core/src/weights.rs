//! Multidimensional sieve weights w_n = (sum over divisor tuples of
//! lambda_d)^2, built from a smooth F on the simplex via
//! y_r = F(log r_1/log R, ..., log r_k/log R).
//!
//! The support at desk scale is tiny (R is a small power of the window
//! start), so y and lambda are enumerated eagerly and exactly once per
//! context; weight evaluation is pure lookup work and safe to run from many
//! threads.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Zero};

use crate::admissible::{check_admissible, find_nu0, AdmissibleTuple};
use crate::arith::{euler_phi, gcd, is_squarefree, mobius, primorial_u64, ratio_to_f64};
use crate::error::{Error, Result};
use crate::variational::PolyF;

/// Hard cap on eagerly enumerated support tuples.
const SUPPORT_BUDGET: usize = 5_000_000;

/// All inputs of a sieve run over a window starting at `n0`.
#[derive(Debug, Clone)]
pub struct SieveParams {
    pub k: usize,
    pub tuple: AdmissibleTuple,
    pub n0: u64,
    pub theta: BigRational,
    pub epsilon: BigRational,
    /// R = n0^(theta/2 - epsilon).
    pub r: f64,
    pub d0: u64,
    /// W = primorial(d0).
    pub w: u64,
    /// Least residue with gcd(nu0 + h_i, W) = 1 for all offsets.
    pub nu0: u64,
    pub c1: BigRational,
}

impl SieveParams {
    /// Largest allowed product of a support tuple: products must stay
    /// strictly below R.
    pub fn prod_bound(&self) -> u64 {
        if self.r <= 1.0 {
            return 0;
        }
        let f = self.r.floor();
        if f == self.r {
            self.r as u64 - 1
        } else {
            f as u64
        }
    }

    pub fn log_r(&self) -> f64 {
        self.r.ln()
    }
}

/// Validate parameters, compute R and W, and locate the residue class nu0.
pub fn build_params(
    tuple: AdmissibleTuple,
    n0: u64,
    theta: BigRational,
    epsilon: BigRational,
    d0: u64,
    c1: BigRational,
) -> Result<SieveParams> {
    let offsets: Vec<i64> = tuple.offsets().iter().map(|&h| h as i64).collect();
    let verdict = check_admissible(&offsets)?;
    if !verdict.admissible {
        return Err(Error::InvalidParams(format!(
            "tuple is inadmissible (witness prime {})",
            verdict.witness_prime.unwrap()
        )));
    }
    if theta <= BigRational::zero() || theta > BigRational::one() {
        return Err(Error::InvalidParams(format!(
            "theta must be in (0, 1], got {theta}"
        )));
    }
    let half_theta = &theta / BigRational::from_integer(BigInt::from(2));
    if epsilon <= BigRational::zero() || epsilon >= half_theta {
        return Err(Error::InvalidParams(format!(
            "epsilon must satisfy 0 < epsilon < theta/2, got {epsilon}"
        )));
    }
    if c1 <= BigRational::zero() || c1 >= BigRational::one() {
        return Err(Error::InvalidParams(format!(
            "c1 must be in (0, 1), got {c1}"
        )));
    }
    if n0 < 2 {
        return Err(Error::InvalidParams(
            "window start must be at least 2".to_string(),
        ));
    }
    let w = primorial_u64(d0)?;
    let nu0 = find_nu0(&tuple, w)?;
    let exponent = ratio_to_f64(&(half_theta - &epsilon));
    let r = (n0 as f64).powf(exponent);
    Ok(SieveParams {
        k: tuple.k(),
        tuple,
        n0,
        theta,
        epsilon,
        r,
        d0,
        w,
        nu0,
        c1,
    })
}

/// Numeric field the weight machinery is computed in.
pub trait Scalar:
    Clone
    + PartialEq
    + num::traits::Zero
    + num::traits::One
    + num::traits::Signed
    + std::ops::Div<Output = Self>
{
    fn from_u64(v: u64) -> Self;
}

impl Scalar for f64 {
    fn from_u64(v: u64) -> Self {
        v as f64
    }
}

impl Scalar for BigRational {
    fn from_u64(v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

/// Eagerly enumerated y and lambda tables over the support set: k-tuples of
/// squarefree integers coprime to W, pairwise coprime, with product below R.
pub struct WeightEngine<S> {
    k: usize,
    prod_bound: u64,
    eligible: Vec<u64>,
    // Ordered maps keep every iteration (and so every float accumulation
    // that follows one) in key order, independent of process or thread count.
    y: BTreeMap<Vec<u64>, S>,
    lambda: BTreeMap<Vec<u64>, S>,
}

impl<S: Scalar> WeightEngine<S> {
    pub fn build(
        k: usize,
        w: u64,
        prod_bound: u64,
        y_fn: impl Fn(&[u64]) -> S,
    ) -> Result<WeightEngine<S>> {
        if k == 0 {
            return Err(Error::InvalidParams("k must be at least 1".to_string()));
        }
        let eligible: Vec<u64> = (1..=prod_bound.max(1))
            .filter(|&v| is_squarefree(v) && gcd(v, w) == 1)
            .collect();
        let mut y: BTreeMap<Vec<u64>, S> = BTreeMap::new();
        let mut tuple = vec![1u64; k];
        enumerate_support(&eligible, prod_bound, &mut tuple, 0, 1, &mut |r| {
            if y.len() >= SUPPORT_BUDGET {
                return Err(Error::InvalidParams(format!(
                    "support enumeration exceeds {SUPPORT_BUDGET} tuples; reduce R or k"
                )));
            }
            y.insert(r.to_vec(), y_fn(r));
            Ok(())
        })?;

        // lambda_d = (prod mu(d_i) d_i) * sum over supported r with d_i | r_i
        // of y_r / prod phi(r_i); accumulate each r into all of its
        // componentwise divisor tuples.
        let mut acc: BTreeMap<Vec<u64>, S> = BTreeMap::new();
        for (r, yv) in &y {
            if yv.is_zero() {
                continue;
            }
            let mut phi_prod = 1u64;
            for &ri in r {
                phi_prod *= euler_phi(ri);
            }
            let contrib = yv.clone() / S::from_u64(phi_prod);
            let divisor_lists: Vec<Vec<u64>> = r
                .iter()
                .map(|&ri| (1..=ri).filter(|&d| ri % d == 0).collect())
                .collect();
            let mut d = vec![1u64; k];
            accumulate_divisor_tuples(&divisor_lists, &mut d, 0, &mut |d| {
                let entry = acc.entry(d.to_vec()).or_insert_with(S::zero);
                *entry = entry.clone() + contrib.clone();
            });
        }
        let mut lambda: BTreeMap<Vec<u64>, S> = BTreeMap::new();
        for (d, sum) in acc {
            let mut scale = 1i64;
            for &di in &d {
                scale *= mobius(di) * di as i64;
            }
            let v = if scale >= 0 {
                S::from_u64(scale as u64) * sum
            } else {
                -(S::from_u64((-scale) as u64) * sum)
            };
            if !v.is_zero() {
                lambda.insert(d, v);
            }
        }
        Ok(WeightEngine {
            k,
            prod_bound,
            eligible,
            y,
            lambda,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn prod_bound(&self) -> u64 {
        self.prod_bound
    }

    /// Sorted single-coordinate support values.
    pub fn eligible(&self) -> &[u64] {
        &self.eligible
    }

    /// y_r, zero outside the support set.
    pub fn y(&self, r: &[u64]) -> S {
        self.y.get(r).cloned().unwrap_or_else(S::zero)
    }

    /// lambda_d, zero outside the support set.
    pub fn lambda(&self, d: &[u64]) -> S {
        self.lambda.get(d).cloned().unwrap_or_else(S::zero)
    }

    pub fn supported_y(&self) -> impl Iterator<Item = (&Vec<u64>, &S)> {
        self.y.iter()
    }

    pub fn nonzero_lambdas(&self) -> impl Iterator<Item = (&Vec<u64>, &S)> {
        self.lambda.iter()
    }

    /// Sum of lambda_d over all divisor tuples d with d_i | shifted_i.
    pub fn lambda_divisor_sum(&self, shifted: &[u64]) -> S {
        assert_eq!(shifted.len(), self.k);
        let lists: Vec<Vec<u64>> = shifted
            .iter()
            .map(|&v| {
                self.eligible
                    .iter()
                    .copied()
                    .filter(|&d| v % d == 0)
                    .collect()
            })
            .collect();
        let mut acc = S::zero();
        let mut d = vec![1u64; self.k];
        self.divisor_sum_rec(&lists, &mut d, 0, 1, &mut acc);
        acc
    }

    fn divisor_sum_rec(&self, lists: &[Vec<u64>], d: &mut Vec<u64>, pos: usize, prod: u64, acc: &mut S) {
        if pos == lists.len() {
            if let Some(v) = self.lambda.get(d) {
                *acc = acc.clone() + v.clone();
            }
            return;
        }
        for &cand in &lists[pos] {
            let p = prod * cand;
            if p > self.prod_bound {
                continue;
            }
            if d[..pos].iter().any(|&prev| gcd(prev, cand) != 1) {
                continue;
            }
            d[pos] = cand;
            self.divisor_sum_rec(lists, d, pos + 1, p, acc);
        }
        d[pos] = 1;
    }

    /// The sieve weight for the shifted values (n + h_1, ..., n + h_k).
    pub fn weight_of_shifted(&self, shifted: &[u64]) -> S {
        let s = self.lambda_divisor_sum(shifted);
        s.clone() * s
    }
}

fn enumerate_support(
    eligible: &[u64],
    bound: u64,
    tuple: &mut Vec<u64>,
    pos: usize,
    prod: u64,
    visit: &mut impl FnMut(&[u64]) -> Result<()>,
) -> Result<()> {
    if pos == tuple.len() {
        return visit(tuple);
    }
    for &v in eligible {
        let p = prod.saturating_mul(v);
        if p > bound {
            break;
        }
        if tuple[..pos].iter().any(|&prev| gcd(prev, v) != 1) {
            continue;
        }
        tuple[pos] = v;
        enumerate_support(eligible, bound, tuple, pos + 1, p, visit)?;
    }
    tuple[pos] = 1;
    Ok(())
}

fn accumulate_divisor_tuples(
    lists: &[Vec<u64>],
    d: &mut Vec<u64>,
    pos: usize,
    visit: &mut impl FnMut(&[u64]),
) {
    if pos == lists.len() {
        visit(d);
        return;
    }
    for &v in &lists[pos] {
        d[pos] = v;
        accumulate_divisor_tuples(lists, d, pos + 1, visit);
    }
    d[pos] = 1;
}

/// Parameters, the chosen F, and the enumerated weight tables.
pub struct WeightContext<S> {
    pub params: SieveParams,
    pub f: PolyF,
    pub engine: WeightEngine<S>,
}

/// Production context: y evaluated with double-precision logarithms.
pub fn float_context(params: SieveParams, f: PolyF) -> Result<WeightContext<f64>> {
    if f.k() != params.k {
        return Err(Error::InvalidParams(format!(
            "F has {} variables but the tuple has {}",
            f.k(),
            params.k
        )));
    }
    let log_r = params.log_r();
    let engine = WeightEngine::build(params.k, params.w, params.prod_bound(), |r| {
        let t: Vec<f64> = r.iter().map(|&ri| (ri as f64).ln() / log_r).collect();
        f.eval_f64(&t)
    })?;
    Ok(WeightContext { params, f, engine })
}

/// Exact context: the log grid is replaced by the rational surrogate
/// x(r) = (r - 1)/ceil(R), which stays inside the simplex on the support
/// set; every identity that is algebraic in y then holds exactly.
pub fn exact_context(params: SieveParams, f: PolyF) -> Result<WeightContext<BigRational>> {
    if f.k() != params.k {
        return Err(Error::InvalidParams(format!(
            "F has {} variables but the tuple has {}",
            f.k(),
            params.k
        )));
    }
    let denom = BigInt::from(params.r.ceil() as u64);
    let engine = WeightEngine::build(params.k, params.w, params.prod_bound(), |r| {
        let x: Vec<BigRational> = r
            .iter()
            .map(|&ri| BigRational::new(BigInt::from(ri - 1), denom.clone()))
            .collect();
        f.eval_rational(&x)
    })?;
    Ok(WeightContext { params, f, engine })
}

impl<S: Scalar> WeightContext<S> {
    pub fn compute_y(&self, r: &[u64]) -> S {
        self.engine.y(r)
    }

    pub fn compute_lambda(&self, d: &[u64]) -> S {
        self.engine.lambda(d)
    }

    /// w_n; zero off the residue class nu0 mod W.
    pub fn compute_weight(&self, n: u64) -> Result<S> {
        if n % self.params.w != self.params.nu0 {
            return Ok(S::zero());
        }
        let mut shifted = Vec::with_capacity(self.params.k);
        for &h in self.params.tuple.offsets() {
            let v = n.checked_add(h).ok_or_else(|| {
                Error::InvalidParams(format!("n + {h} overflows 64 bits at n = {n}"))
            })?;
            shifted.push(v);
        }
        Ok(self.engine.weight_of_shifted(&shifted))
    }
}
