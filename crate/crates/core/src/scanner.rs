//! Search for concrete witnesses: residue-class members whose whole tuple is
//! rough, prime-pattern hits with optional consecutiveness and exclusion
//! constraints, arithmetic progressions inside the hit set, and counts of
//! pattern subsets admitting progression witnesses.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::arith::{sieve_range, PrimeTable};
use crate::error::{Error, Result};
use crate::sums::RoughGate;
use crate::weights::SieveParams;

/// Numbers examined per parallel block when scanning plain ranges.
const BLOCK: u64 = 1 << 17;
/// Progression steps per parallel block when scanning a residue class.
const CLASS_BLOCK: u64 = 4096;
/// Refusal budget on numbers or class members examined per scan.
const SCAN_BUDGET: u64 = 100_000_000;
/// Refusal budget on hit pairs during progression search.
const PAIR_BUDGET: u64 = 200_000_000;
/// Witness and sample lists are truncated to this length; counts are full.
const PAGE: usize = 1000;

/// Residue-class roughness scan: members n <= x whose every translate n + h_i
/// is free of prime factors below n^c1.
#[derive(Debug, Clone)]
pub struct RoughScan {
    pub x: u64,
    pub k: usize,
    /// Class members examined.
    pub scanned: u64,
    /// Members with a fully rough translate tuple.
    pub count: u64,
    /// count * (log x)^k / x.
    pub normalized_density: f64,
    /// First counted members, truncated.
    pub samples: Vec<u64>,
}

/// Count the class members up to x whose whole shifted tuple is rough.
pub fn scan_rough(params: &SieveParams, x: u64) -> Result<RoughScan> {
    if x < 1000 {
        return Err(Error::InvalidParams(format!(
            "scan bound must be at least 1000, got {x}"
        )));
    }
    let w = params.w;
    let first = if params.nu0 == 0 { w } else { params.nu0 };
    if first > x {
        return Ok(RoughScan {
            x,
            k: params.k,
            scanned: 0,
            count: 0,
            normalized_density: 0.0,
            samples: Vec::new(),
        });
    }
    let steps = (x - first) / w + 1;
    if steps > SCAN_BUDGET {
        return Err(Error::WindowTooLarge {
            lo: first,
            hi: x,
            len: steps,
            budget: SCAN_BUDGET,
            suggested_hi: first + (SCAN_BUDGET - 1) * w,
        });
    }
    let diam = params.tuple.diameter();
    if x.checked_add(diam + 2).is_none() {
        return Err(Error::InvalidParams(
            "scan bound plus tuple diameter overflows 64 bits".to_string(),
        ));
    }
    let blocks = steps.div_ceil(CLASS_BLOCK);
    let partials: Vec<(u64, Vec<u64>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let begin = first + b * CLASS_BLOCK * w;
            let count = CLASS_BLOCK.min(steps - b * CLASS_BLOCK);
            let last = begin + (count - 1) * w;
            let table = sieve_range(begin, last + diam + 2)?;
            let mut gate = RoughGate::new(&params.c1)?;
            let mut hits = 0u64;
            let mut samples = Vec::new();
            for j in 0..count {
                let n = begin + j * w;
                let thr = gate.threshold(n);
                let rough = params
                    .tuple
                    .offsets()
                    .iter()
                    .all(|&h| n + h <= 1 || table.spf(n + h) >= thr);
                if rough {
                    hits += 1;
                    if samples.len() < PAGE {
                        samples.push(n);
                    }
                }
            }
            Ok((hits, samples))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut count = 0u64;
    let mut samples = Vec::new();
    for (c, s) in partials {
        count += c;
        for n in s {
            if samples.len() < PAGE {
                samples.push(n);
            }
        }
    }
    let normalized_density = count as f64 * (x as f64).ln().powi(params.k as i32) / x as f64;
    Ok(RoughScan {
        x,
        k: params.k,
        scanned: steps,
        count,
        normalized_density,
        samples,
    })
}

/// One position where every pattern translate is prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternHit {
    pub n: u64,
    pub all_prime: bool,
    /// The primes in [n + h'_1, n + h'_m] are exactly the pattern translates.
    pub consecutive: bool,
    /// Whole-tuple roughness at n, when sieve parameters were supplied.
    pub rough: Option<bool>,
}

/// Result of a pattern-hit scan over an inclusive range.
#[derive(Debug, Clone)]
pub struct HitScan {
    pub offsets: Vec<u64>,
    pub lo: u64,
    pub hi: u64,
    pub require_consecutive: bool,
    pub exclusion: Vec<u64>,
    pub hits: Vec<PatternHit>,
}

fn checked_offsets(offsets: &[u64]) -> Result<Vec<u64>> {
    if offsets.is_empty() {
        return Err(Error::InvalidParams(
            "pattern needs at least one offset".to_string(),
        ));
    }
    let mut v = offsets.to_vec();
    v.sort_unstable();
    if v.windows(2).any(|p| p[0] == p[1]) {
        return Err(Error::DuplicateOffsets);
    }
    Ok(v)
}

/// Find all n in [lo, hi] with n + h' prime for every pattern offset.
///
/// With require_consecutive, keep only n where the pattern translates are the
/// only primes in the closed interval they span. Offsets in exclusion must
/// land on non-primes. Supplying sieve parameters adds the whole-tuple
/// roughness flag to each hit; pass None to skip it.
pub fn find_pattern_hits(
    offsets: &[u64],
    lo: u64,
    hi: u64,
    require_consecutive: bool,
    exclusion: &[u64],
    rough_params: Option<&SieveParams>,
) -> Result<HitScan> {
    let offsets = checked_offsets(offsets)?;
    let mut exclusion = exclusion.to_vec();
    exclusion.sort_unstable();
    exclusion.dedup();
    if exclusion.iter().any(|h| offsets.contains(h)) {
        return Err(Error::InvalidParams(
            "exclusion offsets overlap the pattern".to_string(),
        ));
    }
    if lo > hi {
        return Ok(HitScan {
            offsets,
            lo,
            hi,
            require_consecutive,
            exclusion,
            hits: Vec::new(),
        });
    }
    let span = hi - lo + 1;
    if span > SCAN_BUDGET {
        return Err(Error::WindowTooLarge {
            lo,
            hi,
            len: span,
            budget: SCAN_BUDGET,
            suggested_hi: lo + SCAN_BUDGET - 1,
        });
    }
    let mut ext = *offsets.last().unwrap();
    if let Some(&e) = exclusion.last() {
        ext = ext.max(e);
    }
    if let Some(p) = rough_params {
        ext = ext.max(p.tuple.diameter());
    }
    if hi.checked_add(ext + 2).is_none() {
        return Err(Error::InvalidParams(
            "scan range plus offsets overflows 64 bits".to_string(),
        ));
    }
    let lo = lo.max(1);
    let blocks = (hi - lo + 1).div_ceil(BLOCK);
    let partials: Vec<Vec<PatternHit>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let begin = lo + b * BLOCK;
            let end = hi.min(begin + BLOCK - 1);
            let table = sieve_range(begin, end + ext + 2)?;
            scan_block(
                &table,
                begin,
                end,
                &offsets,
                require_consecutive,
                &exclusion,
                rough_params,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let hits = partials.into_iter().flatten().collect();
    Ok(HitScan {
        offsets,
        lo,
        hi,
        require_consecutive,
        exclusion,
        hits,
    })
}

fn scan_block(
    table: &PrimeTable,
    begin: u64,
    end: u64,
    offsets: &[u64],
    require_consecutive: bool,
    exclusion: &[u64],
    rough_params: Option<&SieveParams>,
) -> Result<Vec<PatternHit>> {
    let m = offsets.len();
    let mut gate = match rough_params {
        Some(p) => Some(RoughGate::new(&p.c1)?),
        None => None,
    };
    let mut out = Vec::new();
    for n in begin..=end {
        if !offsets.iter().all(|&h| table.is_prime(n + h)) {
            continue;
        }
        if !exclusion.iter().all(|&h| !table.is_prime(n + h)) {
            continue;
        }
        let consecutive =
            table.count_primes(n + offsets[0], n + offsets[offsets.len() - 1]) == m;
        if require_consecutive && !consecutive {
            continue;
        }
        let rough = match (&mut gate, rough_params) {
            (Some(g), Some(p)) => {
                let thr = g.threshold(n);
                Some(
                    p.tuple
                        .offsets()
                        .iter()
                        .all(|&h| n + h <= 1 || table.spf(n + h) >= thr),
                )
            }
            _ => None,
        };
        out.push(PatternHit {
            n,
            all_prime: true,
            consecutive,
            rough,
        });
    }
    Ok(out)
}

/// An arithmetic progression whose members are all pattern hits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct APWitness {
    pub start: u64,
    pub diff: u64,
    pub len: usize,
    pub members: Vec<u64>,
}

/// Result of a progression search inside the hit set up to x.
#[derive(Debug, Clone)]
pub struct APScan {
    pub offsets: Vec<u64>,
    pub ell: usize,
    pub x: u64,
    pub require_consecutive: bool,
    pub hit_count: u64,
    /// Number of ell-term progressions found; witnesses holds the first page.
    pub total: u64,
    pub witnesses: Vec<APWitness>,
}

/// Enumerate ell-term arithmetic progressions with positive difference whose
/// members are all hits of the pattern below x.
pub fn find_pattern_aps(
    offsets: &[u64],
    ell: usize,
    x: u64,
    require_consecutive: bool,
) -> Result<APScan> {
    if ell == 0 {
        return Err(Error::InvalidParams(
            "progression length must be at least 1".to_string(),
        ));
    }
    let scan = find_pattern_hits(offsets, 1, x, require_consecutive, &[], None)?;
    let hits: Vec<u64> = scan.hits.iter().map(|h| h.n).collect();
    let (total, witnesses) = aps_in_hits(&hits, ell)?;
    Ok(APScan {
        offsets: scan.offsets,
        ell,
        x,
        require_consecutive,
        hit_count: hits.len() as u64,
        total,
        witnesses,
    })
}

/// Count and page the ell-term progressions inside a sorted hit list.
fn aps_in_hits(hits: &[u64], ell: usize) -> Result<(u64, Vec<APWitness>)> {
    if ell == 1 {
        let witnesses = hits
            .iter()
            .take(PAGE)
            .map(|&n| APWitness {
                start: n,
                diff: 1,
                len: 1,
                members: vec![n],
            })
            .collect();
        return Ok((hits.len() as u64, witnesses));
    }
    let h = hits.len() as u64;
    let pairs = h * h.saturating_sub(1) / 2;
    if pairs > PAIR_BUDGET {
        return Err(Error::InvalidParams(format!(
            "{pairs} hit pairs exceed the progression search budget {PAIR_BUDGET}; reduce the scan bound"
        )));
    }
    let set: HashSet<u64> = hits.iter().copied().collect();
    let mut total = 0u64;
    let mut witnesses = Vec::new();
    for i in 0..hits.len() {
        for j in (i + 1)..hits.len() {
            let d = hits[j] - hits[i];
            let mut next = hits[j];
            let mut ok = true;
            for _ in 2..ell {
                next += d;
                if !set.contains(&next) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            total += 1;
            if witnesses.len() < PAGE {
                witnesses.push(APWitness {
                    start: hits[i],
                    diff: d,
                    len: ell,
                    members: (0..ell as u64).map(|t| hits[i] + t * d).collect(),
                });
            }
        }
    }
    Ok((total, witnesses))
}

/// A subset together with its first progression witness.
#[derive(Debug, Clone)]
pub struct SubsetRecord {
    pub subset: Vec<u64>,
    pub witness: APWitness,
}

/// Result of the subset survey.
#[derive(Debug, Clone)]
pub struct SubsetScan {
    pub base: Vec<u64>,
    pub m: usize,
    pub ell: usize,
    pub x: u64,
    pub total_subsets: u64,
    /// Subsets with at least one ell-term progression witness below x.
    pub witnessed: u64,
    /// First page of witnessed subsets with one witness each.
    pub records: Vec<SubsetRecord>,
}

fn binomial_u128(n: u64, r: u64) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// For each m-subset of the base set, adjoin the offset 0 and search for an
/// ell-term progression of hits below x; count the subsets that have one.
pub fn count_pattern_subsets(base: &[u64], m: usize, ell: usize, x: u64) -> Result<SubsetScan> {
    let mut a = base.to_vec();
    a.sort_unstable();
    a.dedup();
    if m == 0 || a.len() < m {
        return Err(Error::SubsetTooLarge { m, k: a.len() });
    }
    if ell == 0 {
        return Err(Error::InvalidParams(
            "progression length must be at least 1".to_string(),
        ));
    }
    let total_subsets = binomial_u128(a.len() as u64, m as u64);
    const GUARD: u128 = 100_000;
    if total_subsets > GUARD {
        return Err(Error::TooManySubsets {
            count: total_subsets,
            guard: GUARD,
        });
    }
    let max_off = *a.last().unwrap();
    let table = sieve_range(1, x + max_off + 2)?;
    let primes: Vec<u64> = (2..=x).filter(|&n| table.is_prime(n)).collect();
    let mut witnessed = 0u64;
    let mut records = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let subset: Vec<u64> = idx.iter().map(|&i| a[i]).collect();
        let hits: Vec<u64> = primes
            .iter()
            .copied()
            .filter(|&p| subset.iter().all(|&h| h == 0 || table.is_prime(p + h)))
            .collect();
        if let Some(w) = first_ap_in_hits(&hits, ell)? {
            witnessed += 1;
            if records.len() < PAGE {
                records.push(SubsetRecord { subset, witness: w });
            }
        }
        // Next lexicographic index combination.
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(SubsetScan {
                    base: a,
                    m,
                    ell,
                    x,
                    total_subsets: total_subsets as u64,
                    witnessed,
                    records,
                });
            }
            i -= 1;
            if idx[i] != i + a.len() - m {
                break;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// First ell-term progression in a sorted hit list, scanning pairs in order.
fn first_ap_in_hits(hits: &[u64], ell: usize) -> Result<Option<APWitness>> {
    if ell == 1 {
        return Ok(hits.first().map(|&n| APWitness {
            start: n,
            diff: 1,
            len: 1,
            members: vec![n],
        }));
    }
    let h = hits.len() as u64;
    if h * h.saturating_sub(1) / 2 > PAIR_BUDGET {
        return Err(Error::InvalidParams(format!(
            "hit pair count exceeds the progression search budget {PAIR_BUDGET}; reduce the scan bound"
        )));
    }
    let set: HashSet<u64> = hits.iter().copied().collect();
    for i in 0..hits.len() {
        for j in (i + 1)..hits.len() {
            let d = hits[j] - hits[i];
            let mut next = hits[j];
            let mut ok = true;
            for _ in 2..ell {
                next += d;
                if !set.contains(&next) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Some(APWitness {
                    start: hits[i],
                    diff: d,
                    len: ell,
                    members: (0..ell as u64).map(|t| hits[i] + t * d).collect(),
                }));
            }
        }
    }
    Ok(None)
}
