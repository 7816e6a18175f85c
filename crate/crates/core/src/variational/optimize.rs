//! Lower bounds for the simplex variational quantity M_k: maximize the
//! Rayleigh quotient sum_j J_j(F)/I(F) over a finite symmetric polynomial
//! basis. The float eigensolver only guides the search; the reported bound is
//! re-certified in exact rational arithmetic.

use nalgebra::{DMatrix, DVector};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{ratio_to_f64, rationalize};
use crate::error::{Error, Result};
use crate::variational::sym::{integrate_first_coord, SimplexIntegrator, SymPoly};

const RATIONALIZE_DENOM_CAP: u64 = 1_000_000;
const EIGEN_RESIDUAL_TOL: f64 = 1e-10;

/// A named basis element for the variational problem.
#[derive(Debug, Clone)]
pub struct BasisElement {
    pub label: String,
    pub poly: SymPoly,
}

/// Symmetric polynomial basis at richness level `degree`: monomials
/// u^a * P2^b2 * ... * Pd^bd over the generators u = 1 - P1 and the power
/// sums P2..P_degree, where the polynomial degree a + 2 b2 + ... + d bd is
/// capped at 4*degree - 1 (cap 0 at level 0). Levels are nested, and level 3
/// reproduces the published 105-variable bound above 4.
pub fn symmetric_basis(degree: u32) -> Vec<BasisElement> {
    let cap = if degree == 0 { 0 } else { 4 * degree - 1 };
    let num_gens = if degree >= 2 { degree as usize } else { 1 };
    let mut out = Vec::new();
    for total in 0..=cap {
        let mut exps = vec![0u32; num_gens];
        enumerate_weighted_monomials(total, 0, &mut exps, &mut |exps| {
            let mut poly = SymPoly::u_power(exps[0]);
            let mut label = match exps[0] {
                0 => String::new(),
                1 => "u".to_string(),
                a => format!("u^{a}"),
            };
            for (g, &e) in exps.iter().enumerate().skip(1) {
                if e == 0 {
                    continue;
                }
                let j = g as u32 + 1;
                for _ in 0..e {
                    poly = poly.mul(&SymPoly::power_sum(j));
                }
                if !label.is_empty() {
                    label.push('*');
                }
                if e == 1 {
                    label.push_str(&format!("P{j}"));
                } else {
                    label.push_str(&format!("P{j}^{e}"));
                }
            }
            if label.is_empty() {
                label.push('1');
            }
            out.push(BasisElement { label, poly });
        });
    }
    out
}

/// Exponent vectors with weighted sum exps[0] + 2 exps[1] + ... equal to
/// `left`, the g-th slot weighing g + 1.
fn enumerate_weighted_monomials(
    left: u32,
    pos: usize,
    exps: &mut Vec<u32>,
    emit: &mut impl FnMut(&[u32]),
) {
    let weight = pos as u32 + 1;
    if pos == exps.len() - 1 {
        if left % weight == 0 {
            exps[pos] = left / weight;
            emit(exps);
            exps[pos] = 0;
        }
        return;
    }
    for e in (0..=left / weight).rev() {
        exps[pos] = e;
        enumerate_weighted_monomials(left - e * weight, pos + 1, exps, emit);
    }
    exps[pos] = 0;
}

/// Outcome of a variational optimization run.
#[derive(Debug, Clone)]
pub struct VariationalResult {
    pub k: usize,
    pub theta: BigRational,
    pub basis_labels: Vec<String>,
    /// Rational coefficients of the certified F in the basis.
    pub coefficients: Vec<BigRational>,
    /// Exact Rayleigh quotient of the certified F: a true lower bound on M_k.
    pub m_lower: BigRational,
    pub m_lower_f64: f64,
    /// Largest eigenvalue from the float solve, before certification.
    pub float_estimate: f64,
    /// ceil(theta * m_lower / 2): primes guaranteed per admissible k-tuple.
    pub r_k: u64,
}

/// Number of offsets in an admissible k-tuple guaranteed to be prime
/// infinitely often at distribution level theta, given M_k > m: the least
/// integer r with m > 2r/theta, i.e. ceil(theta * m / 2) when that quantity
/// is not attained exactly. Requires 0 < theta <= 1 and m > 0.
pub fn compute_rk(theta: &BigRational, m: &BigRational) -> Result<u64> {
    if theta <= &BigRational::zero() || theta > &BigRational::one() {
        return Err(Error::InvalidParams(format!(
            "theta must be in (0, 1], got {theta}"
        )));
    }
    if m <= &BigRational::zero() {
        return Err(Error::InvalidParams(format!(
            "variational bound must be positive, got {m}"
        )));
    }
    let r = (theta * m / BigRational::from_integer(BigInt::from(2))).ceil();
    r.to_integer()
        .to_u64()
        .ok_or_else(|| Error::InvalidParams("rank does not fit in u64".to_string()))
}

/// Optimize over the weighted-degree basis from [`symmetric_basis`].
pub fn optimize_mk(k: usize, degree: u32, theta: &BigRational) -> Result<VariationalResult> {
    optimize_mk_with_basis(k, &symmetric_basis(degree), theta)
}

/// Optimize over an explicit basis. The quadratic forms are assembled
/// exactly; the generalized eigenproblem is solved in floats; the winning
/// coefficient vector is rounded back to rationals and its Rayleigh quotient
/// recomputed exactly.
pub fn optimize_mk_with_basis(
    k: usize,
    basis: &[BasisElement],
    theta: &BigRational,
) -> Result<VariationalResult> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be at least 1".to_string()));
    }
    if basis.is_empty() {
        return Err(Error::InvalidParams("basis must be non-empty".to_string()));
    }
    let m = basis.len();

    let mut integ_k = SimplexIntegrator::new(k);
    let mut integ_km1 = SimplexIntegrator::new(k - 1);
    let inner: Vec<SymPoly> = basis.iter().map(|b| integrate_first_coord(&b.poly)).collect();

    let mut d = vec![vec![BigRational::zero(); m]; m];
    let mut n = vec![vec![BigRational::zero(); m]; m];
    let k_rat = BigRational::from_integer(BigInt::from(k));
    for i in 0..m {
        for j in i..m {
            let dij = integ_k.integral_product(&basis[i].poly, &basis[j].poly);
            let nij = &k_rat * integ_km1.integral_product(&inner[i], &inner[j]);
            d[i][j] = dij.clone();
            d[j][i] = dij;
            n[i][j] = nij.clone();
            n[j][i] = nij;
        }
    }

    if !exact_positive_definite(&d) {
        return Err(Error::DegenerateBasis);
    }

    // Rescale each basis element by a power of two near 1/sqrt(D_ii). The
    // scaling is exact in both rational and float arithmetic and brings the
    // forms to unit diagonal scale, which the float stage needs at large k.
    let scales: Vec<BigRational> = (0..m)
        .map(|i| {
            let e = (ratio_to_f64(&d[i][i]).log2() / 2.0).round() as i64;
            pow2(e)
        })
        .collect();
    let mut ds = vec![vec![BigRational::zero(); m]; m];
    let mut ns = vec![vec![BigRational::zero(); m]; m];
    for i in 0..m {
        for j in 0..m {
            let ss = &scales[i] * &scales[j];
            ds[i][j] = &d[i][j] / &ss;
            ns[i][j] = &n[i][j] / &ss;
        }
    }

    let d_f = DMatrix::from_fn(m, m, |i, j| ratio_to_f64(&ds[i][j]));
    let n_f = DMatrix::from_fn(m, m, |i, j| ratio_to_f64(&ns[i][j]));
    let chol = nalgebra::linalg::Cholesky::new(d_f).ok_or(Error::DegenerateBasis)?;
    let l = chol.l();
    // A = L^{-1} N L^{-T}, via Y = L^{-1} N then A = L^{-1} Y^T.
    let y = l
        .solve_lower_triangular(&n_f)
        .ok_or(Error::DegenerateBasis)?;
    let a = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::DegenerateBasis)?;
    let a = (&a + a.transpose()) * 0.5;

    let eigen = nalgebra::linalg::SymmetricEigen::new(a.clone());
    let mut best = 0usize;
    for i in 1..m {
        if eigen.eigenvalues[i] > eigen.eigenvalues[best] {
            best = i;
        }
    }
    let lambda = eigen.eigenvalues[best];
    let v: DVector<f64> = eigen.eigenvectors.column(best).into_owned();
    let residual = (&a * &v - &v * lambda).amax();
    if residual > EIGEN_RESIDUAL_TOL * (1.0 + lambda.abs()) {
        return Err(Error::InvalidParams(format!(
            "eigensolver residual {residual:.3e} exceeds tolerance"
        )));
    }

    // Back-substitute to scaled-basis coordinates: L^T c = v.
    let c_f = l
        .transpose()
        .solve_upper_triangular(&v)
        .ok_or(Error::DegenerateBasis)?;
    let mut pivot = 0usize;
    for i in 1..m {
        if c_f[i].abs() > c_f[pivot].abs() {
            pivot = i;
        }
    }
    if c_f[pivot] == 0.0 {
        return Err(Error::DegenerateBasis);
    }
    let scale = c_f[pivot];

    // Any rationalized vector certifies a valid lower bound; try a few
    // precision caps and keep the best exact quotient.
    let mut best_pair: Option<(BigRational, Vec<BigRational>)> = None;
    for cap in [1_000u64, RATIONALIZE_DENOM_CAP] {
        let cs: Vec<BigRational> = (0..m).map(|i| rationalize(c_f[i] / scale, cap)).collect();
        let mut num = BigRational::zero();
        let mut den = BigRational::zero();
        for i in 0..m {
            for j in 0..m {
                let cc = &cs[i] * &cs[j];
                num += &cc * &ns[i][j];
                den += &cc * &ds[i][j];
            }
        }
        if den <= BigRational::zero() {
            continue;
        }
        let value = num / den;
        if best_pair.as_ref().is_none_or(|(v, _)| value > *v) {
            best_pair = Some((value, cs));
        }
    }
    let (m_lower, scaled_coeffs) = best_pair.ok_or(Error::DegenerateF)?;
    let r_k = compute_rk(theta, &m_lower)?;

    // Report coefficients in the caller's unscaled basis, with the largest
    // magnitude normalized to one.
    let mut coefficients: Vec<BigRational> = scaled_coeffs
        .iter()
        .zip(&scales)
        .map(|(c, s)| c / s)
        .collect();
    let norm = coefficients
        .iter()
        .cloned()
        .max_by(|a, b| a.abs().cmp(&b.abs()))
        .unwrap();
    if !norm.is_zero() {
        for c in coefficients.iter_mut() {
            *c /= &norm;
        }
    }

    Ok(VariationalResult {
        k,
        theta: theta.clone(),
        basis_labels: basis.iter().map(|b| b.label.clone()).collect(),
        coefficients,
        m_lower_f64: ratio_to_f64(&m_lower),
        m_lower,
        float_estimate: lambda,
        r_k,
    })
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// LDL^T factorization in exact arithmetic; true iff all pivots are positive.
fn exact_positive_definite(d: &[Vec<BigRational>]) -> bool {
    let m = d.len();
    let mut a: Vec<Vec<BigRational>> = d.to_vec();
    for p in 0..m {
        if a[p][p] <= BigRational::zero() {
            return false;
        }
        for i in (p + 1)..m {
            let factor = &a[i][p] / &a[p][p];
            for j in p..m {
                let sub = &factor * &a[p][j];
                a[i][j] -= sub;
            }
        }
    }
    true
}

/// Reconstruct the certified F as an explicit symmetric polynomial.
pub fn combine_basis(basis: &[BasisElement], coefficients: &[BigRational]) -> SymPoly {
    assert_eq!(basis.len(), coefficients.len());
    let mut f = SymPoly::zero();
    for (b, c) in basis.iter().zip(coefficients) {
        f = f.add(&b.poly.scale(c));
    }
    f
}
