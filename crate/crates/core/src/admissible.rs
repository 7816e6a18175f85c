//! Admissible tuples: offset sets that avoid covering all residue classes
//! modulo any prime, plus searches for narrow tuples and residue selection.

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, primes_up_to};
use crate::error::{Error, Result};

/// A strictly increasing tuple of non-negative offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibleTuple {
    offsets: Vec<u64>,
}

impl AdmissibleTuple {
    /// Build from offsets in any order; rejects duplicates.
    pub fn new(mut offsets: Vec<u64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidParams("tuple must be non-empty".into()));
        }
        offsets.sort_unstable();
        if offsets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DuplicateOffsets);
        }
        Ok(AdmissibleTuple { offsets })
    }

    pub fn offsets(&self) -> &[u64] {
        &self.offsets
    }

    pub fn k(&self) -> usize {
        self.offsets.len()
    }

    pub fn diameter(&self) -> u64 {
        self.offsets[self.offsets.len() - 1] - self.offsets[0]
    }

    /// Upper bound H with all offsets in [0, H].
    pub fn h_bound(&self) -> u64 {
        self.offsets[self.offsets.len() - 1]
    }

    pub fn verdict(&self) -> Verdict {
        let signed: Vec<i64> = self.offsets.iter().map(|&h| h as i64).collect();
        check_admissible(&signed).expect("constructor enforced distinct offsets")
    }

    pub fn is_admissible(&self) -> bool {
        self.verdict().admissible
    }
}

/// Outcome of an admissibility check; the witness is the least prime whose
/// residue classes are all covered, present exactly when inadmissible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub admissible: bool,
    pub witness_prime: Option<u64>,
}

/// Check whether a tuple avoids covering all residues mod every prime p <= k.
///
/// Accepts any distinct integers; admissibility is translation-invariant, and
/// primes p > k can never be fully covered by k residues.
pub fn check_admissible(offsets: &[i64]) -> Result<Verdict> {
    if offsets.is_empty() {
        return Err(Error::InvalidParams("tuple must be non-empty".into()));
    }
    let mut sorted = offsets.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicateOffsets);
    }
    let k = offsets.len() as u64;
    for p in primes_up_to(k) {
        let mut covered = vec![false; p as usize];
        let mut count = 0usize;
        for &h in offsets {
            let r = (h.rem_euclid(p as i64)) as usize;
            if !covered[r] {
                covered[r] = true;
                count += 1;
            }
        }
        if count == p as usize {
            return Ok(Verdict {
                admissible: false,
                witness_prime: Some(p),
            });
        }
    }
    Ok(Verdict {
        admissible: true,
        witness_prime: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Remove the sparsest residue class mod each prime p <= k from
    /// [0, h_cap], then take the first k survivors.
    GreedySieve,
    /// Scan diameters upward and return the lexicographically least
    /// admissible tuple of minimal diameter. Guarded to k <= 12.
    ExhaustiveMinDiameter,
}

/// Find an admissible k-tuple with offsets in [0, h_cap].
pub fn find_admissible(k: usize, strategy: Strategy, h_cap: u64) -> Result<AdmissibleTuple> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".into()));
    }
    match strategy {
        Strategy::GreedySieve => greedy_sieve(k, h_cap),
        Strategy::ExhaustiveMinDiameter => {
            if k > 12 {
                return Err(Error::InvalidParams(format!(
                    "exhaustive strategy is guarded to k <= 12, got k = {k}"
                )));
            }
            exhaustive_min_diameter(k, h_cap)
        }
    }
}

fn greedy_sieve(k: usize, h_cap: u64) -> Result<AdmissibleTuple> {
    let cap = h_cap as usize;
    let mut alive = vec![true; cap + 1];
    for p in primes_up_to(k as u64) {
        let p = p as usize;
        // Count survivors in each residue class mod p, remove the sparsest.
        let mut counts = vec![0usize; p];
        for (h, &a) in alive.iter().enumerate() {
            if a {
                counts[h % p] += 1;
            }
        }
        let best = (0..p).min_by_key(|&r| counts[r]).unwrap();
        for (h, a) in alive.iter_mut().enumerate() {
            if h % p == best {
                *a = false;
            }
        }
    }
    let survivors: Vec<u64> = alive
        .iter()
        .enumerate()
        .filter_map(|(h, &a)| a.then_some(h as u64))
        .take(k)
        .collect();
    if survivors.len() < k {
        return Err(Error::TupleNotFound { k, h_cap });
    }
    let base = survivors[0];
    let tuple = AdmissibleTuple::new(survivors.iter().map(|&h| h - base).collect())?;
    debug_assert!(tuple.is_admissible());
    Ok(tuple)
}

fn exhaustive_min_diameter(k: usize, h_cap: u64) -> Result<AdmissibleTuple> {
    if k == 1 {
        return AdmissibleTuple::new(vec![0]);
    }
    let primes = primes_up_to(k as u64);
    for d in (k as u64 - 1)..=h_cap {
        let mut chosen = vec![0u64];
        if extend(&mut chosen, k, d, &primes) {
            return AdmissibleTuple::new(chosen);
        }
    }
    Err(Error::TupleNotFound { k, h_cap })
}

fn covers_some_prime(chosen: &[u64], primes: &[u64]) -> bool {
    primes.iter().any(|&p| {
        let mut covered = vec![false; p as usize];
        let mut count = 0;
        for &h in chosen {
            let r = (h % p) as usize;
            if !covered[r] {
                covered[r] = true;
                count += 1;
            }
        }
        count == p as usize
    })
}

fn extend(chosen: &mut Vec<u64>, k: usize, d: u64, primes: &[u64]) -> bool {
    if covers_some_prime(chosen, primes) {
        return false;
    }
    if chosen.len() == k {
        return *chosen.last().unwrap() == d;
    }
    let lo = chosen.last().unwrap() + 1;
    let remaining = (k - chosen.len()) as u64;
    // The last element must be exactly d; leave room for the others.
    let hi = if chosen.len() == k - 1 { lo.max(d) } else { d - remaining + 1 };
    for h in lo..=hi.min(d) {
        if chosen.len() == k - 1 && h != d {
            continue;
        }
        chosen.push(h);
        if extend(chosen, k, d, primes) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// The m-subset of h with the least diameter, breaking ties by
/// lexicographically least offsets.
///
/// Minimal-diameter subsets of a sorted tuple are always m consecutive
/// entries: any span [a, b] achieving the minimum contains exactly m
/// elements, otherwise a shorter window would beat it.
pub fn minimal_diameter_subset(h: &AdmissibleTuple, m: usize) -> Result<AdmissibleTuple> {
    let k = h.k();
    if m == 0 {
        return Err(Error::InvalidParams("subset size must be at least 1".into()));
    }
    if m > k {
        return Err(Error::SubsetTooLarge { m, k });
    }
    let offs = h.offsets();
    let mut best = 0usize;
    for start in 1..=(k - m) {
        if offs[start + m - 1] - offs[start] < offs[best + m - 1] - offs[best] {
            best = start;
        }
    }
    AdmissibleTuple::new(offs[best..best + m].to_vec())
}

/// Least residue nu0 in [0, W) with gcd(nu0 + h_i, W) = 1 for all offsets.
///
/// W must be squarefree (a primorial in practice). Existence follows from
/// admissibility prime by prime; the scan returns the least such residue.
pub fn find_nu0(h: &AdmissibleTuple, w: u64) -> Result<u64> {
    if w == 0 {
        return Err(Error::InvalidParams("W must be positive".into()));
    }
    let mut rest = w;
    let mut primes = Vec::new();
    let mut p = 2u64;
    while p * p <= rest {
        if rest % p == 0 {
            primes.push(p);
            rest /= p;
            if rest % p == 0 {
                return Err(Error::InvalidParams(format!("W = {w} is not squarefree")));
            }
        }
        p += 1;
    }
    if rest > 1 {
        primes.push(rest);
    }
    // Fail fast (and guarantee the scan succeeds): every prime dividing W
    // must leave at least one residue class untouched by {-h_i}.
    for &p in &primes {
        let mut covered = vec![false; p as usize];
        let mut count = 0;
        for &off in h.offsets() {
            let r = (off % p) as usize;
            if !covered[r] {
                covered[r] = true;
                count += 1;
            }
        }
        if count == p as usize {
            return Err(Error::NoValidResidue { p });
        }
    }
    for nu in 0..w {
        if h.offsets().iter().all(|&off| gcd((nu + off) % w, w) == 1) {
            return Ok(nu);
        }
    }
    unreachable!("per-prime precheck guarantees a residue exists");
}
