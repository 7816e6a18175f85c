//! Weighted sums over a window [lo, hi): the full sums S1 and S2, the
//! rough/smooth partition S1 = S1_minus + S1_plus, the restricted S2_plus and
//! the hit counter S1_star, per-prime divisibility slices, and exact
//! diagonalization identities for the lambda quadratic forms.
//!
//! Every sum iterates the residue class nu0 mod W exhaustively. Windows are
//! cut into fixed-size chunks processed in parallel and folded in chunk
//! order, so results are bit-identical across thread counts.

use num::bigint::BigUint;
use num::rational::BigRational;
use num::traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{gcd, is_prime, ratio_to_f64, sieve_range};
use crate::error::{Error, Result};
use crate::weights::{Scalar, WeightContext};

/// Progression steps per parallel chunk.
const CHUNK_STEPS: u64 = 4096;
/// Refusal budget on progression steps per window.
const STEP_BUDGET: u64 = 100_000_000;

/// All single-window sums, in the scalar type of the weight context.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSums<S> {
    /// Sum of weights over n with some n + h_i having a prime factor below
    /// n^c1.
    pub s1_minus: S,
    /// Sum of weights over the complementary rough n.
    pub s1_plus: S,
    /// s1_minus + s1_plus.
    pub s1: S,
    /// Sum of weight times number of prime translates, over all n.
    pub s2: S,
    /// Same restricted to rough n.
    pub s2_plus: S,
    /// Number of rough n with at least r_k prime translates.
    pub s1_star: u64,
    /// Progression elements visited.
    pub steps: u64,
}

impl<S: Scalar> WindowSums<S> {
    fn zero() -> Self {
        WindowSums {
            s1_minus: S::zero(),
            s1_plus: S::zero(),
            s1: S::zero(),
            s2: S::zero(),
            s2_plus: S::zero(),
            s1_star: 0,
            steps: 0,
        }
    }

    fn fold(mut self, other: WindowSums<S>) -> Self {
        self.s1_minus = self.s1_minus + other.s1_minus;
        self.s1_plus = self.s1_plus + other.s1_plus;
        self.s2 = self.s2 + other.s2;
        self.s2_plus = self.s2_plus + other.s2_plus;
        self.s1_star += other.s1_star;
        self.steps += other.steps;
        self
    }
}

/// Decide whether the least prime factor of every shifted value clears the
/// threshold n^c1, using exact integer comparisons. The threshold is a step
/// function of n, so its current value and validity range are cached.
pub(crate) struct RoughGate {
    a: u32,
    b: u32,
    cur: u64,
    valid_until: u64,
}

impl RoughGate {
    pub(crate) fn new(c1: &BigRational) -> Result<RoughGate> {
        let a = c1
            .numer()
            .to_u32()
            .ok_or_else(|| Error::InvalidParams("c1 numerator too large".to_string()))?;
        let b = c1
            .denom()
            .to_u32()
            .ok_or_else(|| Error::InvalidParams("c1 denominator too large".to_string()))?;
        if a == 0 || a >= b {
            return Err(Error::InvalidParams(format!(
                "c1 must be in (0, 1), got {a}/{b}"
            )));
        }
        Ok(RoughGate {
            a,
            b,
            cur: 0,
            valid_until: 0,
        })
    }

    /// Least integer s with s^b >= n^a, i.e. the roughness cutoff at n.
    pub(crate) fn threshold(&mut self, n: u64) -> u64 {
        if self.cur != 0 && n <= self.valid_until {
            return self.cur;
        }
        let n_pow = BigUint::from(n).pow(self.a);
        let guess = (n as f64).powf(self.a as f64 / self.b as f64).floor() as u64;
        let mut s = guess.saturating_sub(2).max(1);
        while BigUint::from(s).pow(self.b) < n_pow {
            s += 1;
        }
        // Valid while n^a <= s^b.
        self.cur = s;
        self.valid_until = nth_root_floor(&BigUint::from(s).pow(self.b), self.a);
        s
    }
}

fn nth_root_floor(v: &BigUint, n: u32) -> u64 {
    v.nth_root(n).to_u64().unwrap_or(u64::MAX)
}

fn first_in_class(lo: u64, w: u64, nu0: u64) -> u64 {
    let rem = lo % w;
    if rem <= nu0 {
        lo + (nu0 - rem)
    } else {
        lo + (w - rem) + nu0
    }
}

/// Compute every window sum in one pass over the residue class.
///
/// r_k controls the S1_star counter: rough n with at least r_k of the
/// translates prime.
pub fn window_sums<S: Scalar + Send + Sync>(
    ctx: &WeightContext<S>,
    lo: u64,
    hi: u64,
    r_k: u64,
) -> Result<WindowSums<S>> {
    if r_k == 0 {
        return Err(Error::InvalidParams("r_k must be at least 1".to_string()));
    }
    if lo < 2 {
        return Err(Error::InvalidParams(
            "window must start at 2 or later".to_string(),
        ));
    }
    let w = ctx.params.w;
    let first = first_in_class(lo, w, ctx.params.nu0);
    if hi <= first {
        return Ok(WindowSums::zero());
    }
    let steps = (hi - first).div_ceil(w);
    if steps > STEP_BUDGET {
        return Err(Error::WindowTooLarge {
            lo,
            hi,
            len: steps,
            budget: STEP_BUDGET,
            suggested_hi: first + STEP_BUDGET * w,
        });
    }
    let chunks = steps.div_ceil(CHUNK_STEPS);
    let partials: Vec<WindowSums<S>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let begin = first + c * CHUNK_STEPS * w;
            let count = CHUNK_STEPS.min(steps - c * CHUNK_STEPS);
            chunk_sums(ctx, begin, count, r_k)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = partials
        .into_iter()
        .fold(WindowSums::zero(), WindowSums::fold);
    total.s1 = total.s1_minus.clone() + total.s1_plus.clone();
    Ok(total)
}

fn chunk_sums<S: Scalar>(
    ctx: &WeightContext<S>,
    first: u64,
    count: u64,
    r_k: u64,
) -> Result<WindowSums<S>> {
    let w = ctx.params.w;
    let diam = ctx.params.tuple.diameter();
    let last = first + (count - 1) * w;
    let table = sieve_range(first, last + diam + 2)?;
    let mut gate = RoughGate::new(&ctx.params.c1)?;
    let offsets = ctx.params.tuple.offsets();
    let mut out = WindowSums::<S>::zero();
    let mut shifted = vec![0u64; offsets.len()];
    for j in 0..count {
        let n = first + j * w;
        for (s, &h) in shifted.iter_mut().zip(offsets) {
            *s = n.checked_add(h).ok_or_else(|| {
                Error::InvalidParams(format!("n + {h} overflows 64 bits at n = {n}"))
            })?;
        }
        let wn = ctx.engine.weight_of_shifted(&shifted);
        let prime_count = shifted.iter().filter(|&&v| table.is_prime(v)).count() as u64;
        let thr = gate.threshold(n);
        let rough = shifted.iter().all(|&v| v <= 1 || table.spf(v) >= thr);
        if !wn.is_zero() {
            let contribution = wn.clone() * S::from_u64(prime_count);
            out.s2 = out.s2 + contribution.clone();
            if rough {
                out.s1_plus = out.s1_plus + wn;
                out.s2_plus = out.s2_plus + contribution;
            } else {
                out.s1_minus = out.s1_minus + wn;
            }
        }
        if rough && prime_count >= r_k {
            out.s1_star += 1;
        }
        out.steps += 1;
    }
    Ok(out)
}

/// Main-term predictions for S1 and S2 over [lo, hi).
///
/// S1: phi(W)^k * len * (log R)^k * I(F) / W^(k+1).
/// S2: phi(W)^k * len * (log R)^(k+1) * sum_j J_j(F) / (W^(k+1) * log lo).
/// The 1/log factor in S2 uses the window start as the scale.
pub fn predicted_s1_s2(ctx: &WeightContext<f64>, lo: u64, hi: u64) -> Result<(f64, f64)> {
    let i = ctx.f.compute_i();
    if i.is_zero() {
        return Err(Error::DegenerateF);
    }
    let mut j_total = BigRational::zero();
    for j in 1..=ctx.params.k {
        let jj = ctx.f.compute_jj(j)?;
        if jj.is_zero() {
            return Err(Error::DegenerateF);
        }
        j_total += jj;
    }
    let k = ctx.params.k as i32;
    let w = ctx.params.w as f64;
    let phi_w = crate::arith::euler_phi(ctx.params.w) as f64;
    let len = hi.saturating_sub(lo) as f64;
    let log_r = ctx.params.log_r();
    let scale = phi_w.powi(k) * len / w.powi(k + 1);
    let s1 = scale * log_r.powi(k) * ratio_to_f64(&i);
    let s2 = scale * log_r.powi(k + 1) * ratio_to_f64(&j_total) / (lo as f64).ln();
    Ok((s1, s2))
}

/// One per-prime divisibility record: the slice of S1 with p | n + h_coord.
#[derive(Debug, Clone)]
pub struct S1pRecord {
    pub p: u64,
    /// 1-based distinguished coordinate.
    pub coord: usize,
    pub value: f64,
    pub s1: f64,
    /// log p / (p log R) * S1.
    pub bound: f64,
    /// value / bound (infinite when the bound is zero).
    pub ratio: f64,
    /// Whether p < n0^c1, the regime the tail bound addresses.
    pub in_lemma2_range: bool,
}

/// Sum of weights over n in the class with p dividing n + h_coord.
///
/// Requires p prime and p > D0 (so p is coprime to W); coord is 1-based.
pub fn compute_s1p<S: Scalar + Send + Sync>(
    ctx: &WeightContext<S>,
    lo: u64,
    hi: u64,
    p: u64,
    coord: usize,
) -> Result<S> {
    if !is_prime(p) {
        return Err(Error::PrimeOutOfRange {
            p,
            reason: "not prime".to_string(),
        });
    }
    if p <= ctx.params.d0 {
        return Err(Error::PrimeOutOfRange {
            p,
            reason: format!("must exceed D0 = {}", ctx.params.d0),
        });
    }
    if coord == 0 || coord > ctx.params.k {
        return Err(Error::CoordOutOfRange {
            j: coord,
            k: ctx.params.k,
        });
    }
    if lo < 2 {
        return Err(Error::InvalidParams(
            "window must start at 2 or later".to_string(),
        ));
    }
    let w = ctx.params.w;
    let h = ctx.params.tuple.offsets()[coord - 1];
    // n = nu0 (mod W) and n = -h (mod p); the class is unique mod W*p.
    let target = (p - h % p) % p;
    let mut n = first_in_class(lo, w, ctx.params.nu0);
    while n < hi && n % p != target {
        n += w;
    }
    let mut acc = S::zero();
    let step = w * p;
    let mut shifted = vec![0u64; ctx.params.k];
    while n < hi {
        for (s, &off) in shifted.iter_mut().zip(ctx.params.tuple.offsets()) {
            *s = n + off;
        }
        acc = acc + ctx.engine.weight_of_shifted(&shifted);
        n += step;
    }
    Ok(acc)
}

/// Record form of [`compute_s1p`] with the tail bound attached.
pub fn s1p_record(
    ctx: &WeightContext<f64>,
    lo: u64,
    hi: u64,
    p: u64,
    coord: usize,
    s1: f64,
) -> Result<S1pRecord> {
    let value = compute_s1p(ctx, lo, hi, p, coord)?;
    let bound = (p as f64).ln() / (p as f64 * ctx.params.log_r()) * s1;
    let ratio = if bound == 0.0 {
        f64::INFINITY
    } else {
        value / bound
    };
    let c1 = ratio_to_f64(&ctx.params.c1);
    let in_lemma2_range = (p as f64) < (ctx.params.n0 as f64).powf(c1);
    Ok(S1pRecord {
        p,
        coord,
        value,
        s1,
        bound,
        ratio,
        in_lemma2_range,
    })
}

/// Both sides of the exact p-twisted diagonalization of the lambda form.
///
/// Left: sum over all pairs of support tuples d, e of
///   lambda_d lambda_e / (([d1,e1,p]/p) * prod_{i>1} [d_i,e_i]).
/// Right: sum over support tuples r with p not dividing r_1 of
///   (y_r - y_{r with r_1 p})^2 / prod phi(r_i).
/// The two agree identically in exact arithmetic.
pub fn tp_quadratic_form(
    ctx: &WeightContext<BigRational>,
    p: u64,
) -> Result<(BigRational, BigRational)> {
    if !is_prime(p) {
        return Err(Error::PrimeOutOfRange {
            p,
            reason: "not prime".to_string(),
        });
    }
    if p <= ctx.params.d0 {
        return Err(Error::PrimeOutOfRange {
            p,
            reason: format!("must exceed D0 = {}", ctx.params.d0),
        });
    }
    let k = ctx.params.k;
    let lambdas: Vec<(&Vec<u64>, &BigRational)> = ctx.engine.nonzero_lambdas().collect();
    let mut lhs = BigRational::zero();
    for (d, ld) in &lambdas {
        for (e, le) in &lambdas {
            let mut denom = 1u64;
            for i in 0..k {
                let l = d[i] / gcd(d[i], e[i]) * e[i];
                denom *= if i == 0 {
                    let lp = if l % p == 0 { l } else { l * p };
                    lp / p
                } else {
                    l
                };
            }
            lhs += *ld * *le / BigRational::from_u64(denom);
        }
    }
    let mut rhs = BigRational::zero();
    for (r, y) in ctx.engine.supported_y() {
        if r[0] % p == 0 {
            continue;
        }
        let mut rp = r.clone();
        rp[0] *= p;
        let diff = y - ctx.engine.y(&rp);
        let mut phi_prod = 1u64;
        for &ri in r {
            phi_prod *= crate::arith::euler_phi(ri);
        }
        rhs += &diff * &diff / BigRational::from_u64(phi_prod);
    }
    Ok((lhs, rhs))
}

/// Full single-window report, measured against the main-term predictions.
#[derive(Debug, Clone)]
pub struct SumReport {
    pub lo: u64,
    pub hi: u64,
    pub r_k: u64,
    pub sums: WindowSums<f64>,
    pub predicted_s1: f64,
    pub predicted_s2: f64,
    pub ratio_s2_s1: f64,
    pub predicted_ratio: f64,
    /// Human-readable statement of the S2 normalization.
    pub prediction_convention: &'static str,
}

pub const PREDICTION_CONVENTION: &str =
    "S2 main term carries a 1/log(window start) factor relative to S1";

/// Run the window engine and attach predictions.
pub fn run_sums(ctx: &WeightContext<f64>, lo: u64, hi: u64, r_k: u64) -> Result<SumReport> {
    let sums = window_sums(ctx, lo, hi, r_k)?;
    let (predicted_s1, predicted_s2) = predicted_s1_s2(ctx, lo, hi)?;
    let ratio_s2_s1 = if sums.s1 == 0.0 {
        f64::NAN
    } else {
        sums.s2 / sums.s1
    };
    let predicted_ratio = if predicted_s1 == 0.0 {
        f64::NAN
    } else {
        predicted_s2 / predicted_s1
    };
    Ok(SumReport {
        lo,
        hi,
        r_k,
        sums,
        predicted_s1,
        predicted_s2,
        ratio_s2_s1,
        predicted_ratio,
        prediction_convention: PREDICTION_CONVENTION,
    })
}

/// Fitted constant in the smooth-part bound: (S1_minus/S1) * log R / (c1 log n0),
/// zero when S1_minus is zero.
pub fn lemma1_constant(ctx: &WeightContext<f64>, sums: &WindowSums<f64>) -> f64 {
    if sums.s1_minus == 0.0 || sums.s1 == 0.0 {
        return 0.0;
    }
    let c1 = ratio_to_f64(&ctx.params.c1);
    (sums.s1_minus / sums.s1) * ctx.params.log_r() / (c1 * (ctx.params.n0 as f64).ln())
}
