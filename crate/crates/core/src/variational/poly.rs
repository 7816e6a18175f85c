//! Sparse multivariate polynomials with exact rational coefficients, with
//! integration over the standard simplex {x in [0,1]^k : sum x_i <= 1}.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, ToPrimitive, Zero};

use crate::arith::factorial;
use crate::error::{Error, Result};

/// Integral of the monomial prod x_i^{a_i} over the standard k-simplex:
/// prod(a_i!) / (k + sum a_i)!.
pub fn simplex_monomial_integral(k: usize, exps: &[u32]) -> BigRational {
    assert_eq!(exps.len(), k, "exponent vector must have length k");
    let mut num = BigInt::one();
    let mut total = 0usize;
    for &a in exps {
        num *= factorial(a as usize);
        total += a as usize;
    }
    BigRational::new(num, factorial(k + total))
}

/// Polynomial in k variables, stored as exponent vector -> coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyF {
    k: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl PolyF {
    pub fn zero(k: usize) -> Self {
        PolyF {
            k,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(k: usize, c: BigRational) -> Self {
        let mut p = PolyF::zero(k);
        if !c.is_zero() {
            p.terms.insert(vec![0; k], c);
        }
        p
    }

    pub fn from_terms(k: usize, terms: Vec<(Vec<u32>, BigRational)>) -> Self {
        let mut p = PolyF::zero(k);
        for (e, c) in terms {
            assert_eq!(e.len(), k, "exponent vector must have length k");
            p.add_term(e, c);
        }
        p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
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

    pub fn add(&self, other: &PolyF) -> PolyF {
        assert_eq!(self.k, other.k);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> PolyF {
        if c.is_zero() {
            return PolyF::zero(self.k);
        }
        PolyF {
            k: self.k,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &PolyF) -> PolyF {
        assert_eq!(self.k, other.k);
        let mut out = PolyF::zero(self.k);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// True when the term map is closed under coordinate permutation with
    /// equal coefficients.
    pub fn is_symmetric(&self) -> bool {
        let mut orbits: BTreeMap<Vec<u32>, (usize, BigRational)> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut key = e.clone();
            key.sort_unstable();
            match orbits.get_mut(&key) {
                None => {
                    orbits.insert(key, (1, c.clone()));
                }
                Some((count, coeff)) => {
                    if coeff != c {
                        return false;
                    }
                    *count += 1;
                }
            }
        }
        for (key, (count, _)) in orbits {
            if count != distinct_permutations(&key) {
                return false;
            }
        }
        true
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.k);
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (xi, &ai) in x.iter().zip(e) {
                t *= xi.powi(ai as i32);
            }
            acc += t;
        }
        acc
    }

    pub fn eval_rational(&self, x: &[BigRational]) -> BigRational {
        assert_eq!(x.len(), self.k);
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &ai) in x.iter().zip(e) {
                for _ in 0..ai {
                    t *= xi;
                }
            }
            acc += t;
        }
        acc
    }

    /// I(F) = integral of F^2 over the k-simplex, exactly.
    pub fn compute_i(&self) -> BigRational {
        let mut acc = BigRational::zero();
        let terms: Vec<_> = self.terms.iter().collect();
        for (i, (ea, ca)) in terms.iter().enumerate() {
            for (eb, cb) in terms.iter().take(i + 1) {
                let e: Vec<u32> = ea.iter().zip(eb.iter()).map(|(a, b)| a + b).collect();
                let v = *ca * *cb * simplex_monomial_integral(self.k, &e);
                if ea == eb {
                    acc += v;
                } else {
                    acc += v.clone() + v;
                }
            }
        }
        acc
    }

    /// Integrate coordinate j (1-based) over [0, 1 - sum of the others],
    /// producing a polynomial in the remaining k-1 variables.
    pub fn integrate_coord(&self, j: usize) -> Result<PolyF> {
        if j == 0 || j > self.k {
            return Err(Error::CoordOutOfRange { j, k: self.k });
        }
        let jj = j - 1;
        let mut out = PolyF::zero(self.k - 1);
        for (e, c) in &self.terms {
            let aj = e[jj];
            let rest: Vec<u32> = e
                .iter()
                .enumerate()
                .filter_map(|(i, &a)| (i != jj).then_some(a))
                .collect();
            // x_j^{a_j} integrates to (1 - s)^{a_j + 1}/(a_j + 1) with s the
            // sum of the remaining coordinates.
            let m = aj + 1;
            let scale = c / BigRational::from_integer(BigInt::from(m));
            for (pow_s, bc) in binomial_signs(m) {
                for (v, mc) in multinomial_expansion(pow_s, self.k - 1) {
                    let ee: Vec<u32> = rest.iter().zip(&v).map(|(a, b)| a + b).collect();
                    out.add_term(ee, &scale * bc.clone() * mc);
                }
            }
        }
        Ok(out)
    }

    /// J_j(F) = integral over the (k-1)-simplex of (integral of F in
    /// coordinate j over its simplex section)^2, exactly. j is 1-based.
    pub fn compute_jj(&self, j: usize) -> Result<BigRational> {
        Ok(self.integrate_coord(j)?.compute_i())
    }

    /// Sum of J_j over all k coordinates.
    pub fn compute_j_total(&self) -> Result<BigRational> {
        let mut acc = BigRational::zero();
        for j in 1..=self.k {
            acc += self.compute_jj(j)?;
        }
        Ok(acc)
    }

    /// Rayleigh quotient sum_j J_j(F) / I(F); errors when I(F) = 0.
    pub fn rayleigh_ratio(&self) -> Result<BigRational> {
        let i = self.compute_i();
        if i.is_zero() {
            return Err(Error::DegenerateF);
        }
        Ok(self.compute_j_total()? / i)
    }
}

/// Number of distinct permutations of an exponent vector.
fn distinct_permutations(e: &[u32]) -> usize {
    let mut num = factorial(e.len());
    let mut i = 0;
    while i < e.len() {
        let mut j = i;
        while j < e.len() && e[j] == e[i] {
            j += 1;
        }
        num /= factorial(j - i);
        i = j;
    }
    num.to_usize().expect("orbit size fits usize")
}

/// Terms of (1 - s)^m as (power of s, signed binomial coefficient).
fn binomial_signs(m: u32) -> Vec<(u32, BigRational)> {
    let mut out = Vec::with_capacity(m as usize + 1);
    let mut c = BigInt::one();
    for t in 0..=m {
        let sign = if t % 2 == 0 { c.clone() } else { -c.clone() };
        out.push((t, BigRational::from_integer(sign)));
        c = c * BigInt::from(m - t) / BigInt::from(t + 1);
    }
    out
}

/// Terms of (x_1 + ... + x_vars)^t as (exponent vector, multinomial coefficient).
fn multinomial_expansion(t: u32, vars: usize) -> Vec<(Vec<u32>, BigRational)> {
    if vars == 0 {
        return if t == 0 {
            vec![(Vec::new(), BigRational::one())]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    let mut current = vec![0u32; vars];
    fn rec(
        pos: usize,
        left: u32,
        vars: usize,
        current: &mut Vec<u32>,
        out: &mut Vec<(Vec<u32>, BigRational)>,
    ) {
        if pos == vars - 1 {
            current[pos] = left;
            let mut denom = BigInt::one();
            for &a in current.iter() {
                denom *= factorial(a as usize);
            }
            let total: u32 = current.iter().sum();
            out.push((
                current.clone(),
                BigRational::new(factorial(total as usize), denom),
            ));
            return;
        }
        for a in 0..=left {
            current[pos] = a;
            rec(pos + 1, left - a, vars, current, out);
        }
        current[pos] = 0;
    }
    rec(0, t, vars, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{ratio, ratio_int};

    #[test]
    fn monomial_integrals_known_values() {
        // Volume of the simplex.
        assert_eq!(simplex_monomial_integral(1, &[0]), ratio(1, 1));
        assert_eq!(simplex_monomial_integral(2, &[0, 0]), ratio(1, 2));
        assert_eq!(simplex_monomial_integral(3, &[0, 0, 0]), ratio(1, 6));
        // int over k=2 of t1*t2 = 1!1!/4! = 1/24.
        assert_eq!(simplex_monomial_integral(2, &[1, 1]), ratio(1, 24));
        assert_eq!(simplex_monomial_integral(1, &[2]), ratio(2, 6));
        assert_eq!(simplex_monomial_integral(2, &[3, 1]), ratio(6, 720));
    }

    #[test]
    fn compute_i_matches_hand_integrals() {
        // F = 1 on k=2: I = vol = 1/2.
        let f = PolyF::constant(2, ratio_int(1));
        assert_eq!(f.compute_i(), ratio(1, 2));
        // F = 1 - t on k=1: int (1-t)^2 = 1/3.
        let f = PolyF::from_terms(1, vec![(vec![0], ratio_int(1)), (vec![1], ratio_int(-1))]);
        assert_eq!(f.compute_i(), ratio(1, 3));
        // F = t1 + t2 on k=2: int (t1+t2)^2 = 2*int t1^2 + 2*int t1 t2
        //   = 2*(2/24) + 2*(1/24) = 1/4.
        let f = PolyF::from_terms(
            2,
            vec![(vec![1, 0], ratio_int(1)), (vec![0, 1], ratio_int(1))],
        );
        assert_eq!(f.compute_i(), ratio(1, 4));
    }

    #[test]
    fn compute_jj_matches_hand_integrals() {
        // k=1, F = 1: J_1 = (int_0^1 1)^2 = 1.
        let f = PolyF::constant(1, ratio_int(1));
        assert_eq!(f.compute_jj(1).unwrap(), ratio_int(1));
        // k=2, F = 1: J_1 = int_0^1 (1 - t2)^2 dt2 = 1/3.
        let f = PolyF::constant(2, ratio_int(1));
        assert_eq!(f.compute_jj(1).unwrap(), ratio(1, 3));
        assert_eq!(f.compute_jj(2).unwrap(), ratio(1, 3));
        // k=2, F = t1: inner integral (1-t2)^2/2, J = int (1-t2)^4/4 = 1/20.
        let f = PolyF::from_terms(2, vec![(vec![1, 0], ratio_int(1))]);
        assert_eq!(f.compute_jj(1).unwrap(), ratio(1, 20));
        // Same F, other coordinate: inner = t1(1-t1), J = int t1^2 (1-t1)^2
        //   = 1/3 - 2/4 + 1/5 = 1/30.
        assert_eq!(f.compute_jj(2).unwrap(), ratio(1, 30));
        assert!(f.compute_jj(0).is_err());
        assert!(f.compute_jj(3).is_err());
    }

    #[test]
    fn rayleigh_constant_is_2k_over_k_plus_1() {
        for k in 1..=6usize {
            let f = PolyF::constant(k, ratio_int(3));
            let got = f.rayleigh_ratio().unwrap();
            assert_eq!(got, ratio(2 * k as i64, k as i64 + 1), "k = {k}");
        }
    }

    #[test]
    fn rayleigh_scaling_invariance() {
        let f = PolyF::from_terms(
            3,
            vec![
                (vec![0, 0, 0], ratio_int(2)),
                (vec![1, 1, 0], ratio(1, 3)),
                (vec![0, 0, 2], ratio(-1, 5)),
            ],
        );
        let r = f.rayleigh_ratio().unwrap();
        for c in [ratio(7, 2), ratio(-4, 9)] {
            assert_eq!(f.scale(&c).rayleigh_ratio().unwrap(), r);
        }
    }

    #[test]
    fn symmetric_f_has_equal_jj() {
        // F = 1 - t1 - t2 symmetric on k=2.
        let f = PolyF::from_terms(
            2,
            vec![
                (vec![0, 0], ratio_int(1)),
                (vec![1, 0], ratio_int(-1)),
                (vec![0, 1], ratio_int(-1)),
            ],
        );
        assert!(f.is_symmetric());
        assert_eq!(f.compute_jj(1).unwrap(), f.compute_jj(2).unwrap());
        // Asymmetric example from above.
        let g = PolyF::from_terms(2, vec![(vec![1, 0], ratio_int(1))]);
        assert!(!g.is_symmetric());
        assert_ne!(g.compute_jj(1).unwrap(), g.compute_jj(2).unwrap());
    }

    #[test]
    fn degenerate_f_rejected() {
        let f = PolyF::zero(2);
        assert!(matches!(f.rayleigh_ratio(), Err(Error::DegenerateF)));
    }

    #[test]
    fn eval_routes_agree() {
        let f = PolyF::from_terms(
            2,
            vec![
                (vec![0, 0], ratio_int(1)),
                (vec![2, 1], ratio(-3, 7)),
                (vec![0, 3], ratio(2, 5)),
            ],
        );
        let x = [ratio(1, 3), ratio(1, 4)];
        let exact = f.eval_rational(&x);
        let float = f.eval_f64(&[1.0 / 3.0, 0.25]);
        assert!((crate::arith::ratio_to_f64(&exact) - float).abs() < 1e-12);
    }
}
