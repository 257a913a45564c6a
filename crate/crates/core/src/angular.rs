//! Angular eigenfunctions on the N-sphere, built from Legendre and
//! Chebyshev polynomials by repeated differentiation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients are kept as exact rationals while l + kappa stays at or below this.
pub const EXACT_LIMIT: u32 = 12;

/// Eigenvalue l(l + n - 1) of the Laplacian on the n-sphere.
pub fn eigenvalue(l: i64, n: i64) -> Result<i64> {
    if l < 0 || n < 1 {
        return Err(Error::Structural(format!("eigenvalue needs l >= 0 and n >= 1, got l={l}, n={n}")));
    }
    Ok(l * (l + n - 1))
}

/// Z(z) = (1 - z^2)^{m/2} P(z), P of degree l - m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularFunction {
    pub dimension: u32,
    pub l: u32,
    pub m: u32,
    pub half_power: u32,
    /// Ascending powers of z.
    pub coeffs: Vec<f64>,
    #[serde(skip)]
    pub exact: Option<Vec<BigRational>>,
}

fn legendre<T: Num + Clone + FromPrimitive>(n: u32) -> Vec<T> {
    let mut prev = vec![T::one()];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![T::zero(), T::one()];
    for j in 1..n {
        let jj = T::from_u32(j).unwrap();
        let a = T::from_u32(2 * j + 1).unwrap();
        let b = T::from_u32(j + 1).unwrap();
        let mut next = vec![T::zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] = next[i + 1].clone() + a.clone() * c.clone();
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] = next[i].clone() - jj.clone() * c.clone();
        }
        for c in &mut next {
            *c = c.clone() / b.clone();
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

fn chebyshev<T: Num + Clone + FromPrimitive>(n: u32) -> Vec<T> {
    let mut prev = vec![T::one()];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![T::zero(), T::one()];
    let two = T::from_u32(2).unwrap();
    for _ in 1..n {
        let mut next = vec![T::zero(); cur.len() + 1];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] = two.clone() * c.clone();
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] = next[i].clone() - c.clone();
        }
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

fn derivative<T: Num + Clone + FromPrimitive>(p: &[T]) -> Vec<T> {
    if p.len() <= 1 {
        return vec![T::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| T::from_usize(i).unwrap() * c.clone())
        .collect()
}

fn derivative_n<T: Num + Clone + FromPrimitive>(p: &[T], n: u32) -> Vec<T> {
    let mut out = p.to_vec();
    for _ in 0..n {
        out = derivative(&out);
    }
    out
}

fn base_poly<T: Num + Clone + FromPrimitive>(dimension: u32, l: u32, m: u32) -> Vec<T> {
    let kappa = dimension / 2;
    let top = l + kappa - 1;
    let base = if dimension % 2 == 1 { legendre(top) } else { chebyshev(top) };
    derivative_n(&base, kappa - 1 + m)
}

fn kappa(dimension: u32) -> u32 {
    dimension / 2
}

fn horner(p: &[f64], z: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * z + c)
}

/// Builds Z_{l,m} for dimension N >= 2 and 0 <= m <= l.
pub fn build_z(dimension: u32, l: u32, m: u32) -> Result<AngularFunction> {
    if dimension < 2 {
        return Err(Error::Structural(format!("dimension must be at least 2, got {dimension}")));
    }
    if m > l {
        return Err(Error::Structural(format!("m={m} exceeds l={l}")));
    }
    let (coeffs, exact) = if l + kappa(dimension) <= EXACT_LIMIT {
        let p: Vec<BigRational> = base_poly(dimension, l, m);
        let f = p.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        (f, Some(p))
    } else {
        (base_poly::<f64>(dimension, l, m), None)
    };
    Ok(AngularFunction {
        dimension,
        l,
        m,
        half_power: m,
        coeffs,
        exact,
    })
}

impl AngularFunction {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Eigenvalue pair (l(l+N-2), m(m+N-3)) entering the ODE.
    pub fn constants(&self) -> (f64, f64) {
        let n = f64::from(self.dimension);
        let l = f64::from(self.l);
        let m = f64::from(self.m);
        (l * (l + n - 2.0), m * (m + n - 3.0))
    }

    pub fn eval(&self, z: f64) -> f64 {
        (1.0 - z * z).powf(0.5 * f64::from(self.m)) * horner(&self.coeffs, z)
    }

    /// Coefficients as reduced fractions "p/q", when they are exact.
    pub fn exact_strings(&self) -> Option<Vec<String>> {
        self.exact.as_ref().map(|v| v.iter().map(|c| c.to_string()).collect())
    }

    /// Checks in exact arithmetic that P solves
    /// (1-z^2)P'' - (N-1+2m) z P' + [l(l+N-2) - m(m+N-2)] P = 0.
    pub fn reduced_identity_exact(&self) -> Option<bool> {
        let p = self.exact.as_ref()?;
        let n = BigInt::from(self.dimension);
        let l = BigInt::from(self.l);
        let m = BigInt::from(self.m);
        let lam = BigRational::from_integer(&l * (&l + &n - 2) - &m * (&m + &n - 2));
        let alpha = BigRational::from_integer(&n - 1 + 2 * &m);
        let d1 = derivative(p);
        let d2 = derivative(&d1);
        let len = (p.len() + 1).max(d2.len() + 2);
        let mut res = vec![BigRational::zero(); len];
        for (i, c) in d2.iter().enumerate() {
            res[i] += c.clone();
            res[i + 2] -= c.clone();
        }
        for (i, c) in d1.iter().enumerate() {
            res[i + 1] -= alpha.clone() * c;
        }
        for (i, c) in p.iter().enumerate() {
            res[i] += lam.clone() * c;
        }
        Some(res.iter().all(Zero::is_zero))
    }
}

/// Left side of the angular ODE
/// (1-z^2)Z'' - (N-1)zZ' + l(l+N-2)Z - m(m+N-3)Z/(1-z^2), for |z| < 1.
///
/// With Z = s^{m/2} P and s = 1 - z^2 the left side equals
/// s^{m/2} [s P'' - (N-1+2m) z P' + (l(l+N-2) - m(m+N-2)) P]; that form is
/// evaluated so the 1/s terms do not cancel in floating point near |z| = 1.
pub fn ode_residual(zf: &AngularFunction, z: f64) -> f64 {
    let s = 1.0 - z * z;
    let m = f64::from(zf.m);
    let n = f64::from(zf.dimension);
    let d1 = derivative(&zf.coeffs);
    let d2 = derivative(&d1);
    let (p, p1, p2) = (horner(&zf.coeffs, z), horner(&d1, z), horner(&d2, z));
    let (lam, _) = zf.constants();
    let reduced = s * p2 - (n - 1.0 + 2.0 * m) * z * p1 + (lam - m * (m + n - 2.0)) * p;
    s.powf(0.5 * m) * reduced
}

/// Same residual evaluated term by term on Z, Z' and Z''.
pub fn ode_residual_direct(zf: &AngularFunction, z: f64) -> f64 {
    let s = 1.0 - z * z;
    let m = f64::from(zf.m);
    let d1 = derivative(&zf.coeffs);
    let d2 = derivative(&d1);
    let (p, p1, p2) = (horner(&zf.coeffs, z), horner(&d1, z), horner(&d2, z));
    let sh = s.powf(0.5 * m);
    let z0 = sh * p;
    let z1 = sh * (p1 - m * z * p / s);
    let z2 = sh * (p2 - 2.0 * m * z * p1 / s - m * p / s + m * (m - 2.0) * z * z * p / (s * s));
    let (lam, mu) = zf.constants();
    let n = f64::from(zf.dimension);
    s * z2 - (n - 1.0) * z * z1 + lam * z0 - mu * z0 / s
}

/// Integral of Z_{l,m} Z_{l',m} (1-z^2)^{(N-3)/2} over [-1, 1].
///
/// With z = cos(theta) the integrand becomes a polynomial in z (N odd) or a
/// trigonometric polynomial in theta (N even); both are integrated exactly.
pub fn overlap(a: &AngularFunction, b: &AngularFunction) -> Result<f64> {
    if a.dimension != b.dimension || a.m != b.m {
        return Err(Error::Structural("overlap needs equal N and m".into()));
    }
    let mut prod = vec![0.0; a.coeffs.len() + b.coeffs.len() - 1];
    for (i, x) in a.coeffs.iter().enumerate() {
        for (j, y) in b.coeffs.iter().enumerate() {
            prod[i + j] += x * y;
        }
    }
    let p = a.dimension - 2 + 2 * a.m;
    if p % 2 == 1 {
        // (1-z^2)^e with integer e = (p-1)/2, integrated term by term
        let e = (p - 1) / 2;
        let mut weight = vec![1.0];
        for _ in 0..e {
            let mut next = vec![0.0; weight.len() + 2];
            for (i, w) in weight.iter().enumerate() {
                next[i] += w;
                next[i + 2] -= w;
            }
            weight = next;
        }
        let mut total = 0.0;
        for (i, x) in prod.iter().enumerate() {
            for (j, w) in weight.iter().enumerate() {
                if (i + j) % 2 == 0 {
                    total += x * w * 2.0 / (i + j + 1) as f64;
                }
            }
        }
        Ok(total)
    } else {
        let deg = prod.len() + p as usize;
        let count = 2 * deg + 2;
        let h = 2.0 * std::f64::consts::PI / count as f64;
        let total: f64 = (0..count)
            .map(|i| {
                let t = i as f64 * h;
                horner(&prod, t.cos()) * t.sin().powi(p as i32)
            })
            .sum();
        Ok(0.5 * total * h)
    }
}

/// Coefficient table for every (N, l, m) with N in `dims`, 0 <= m <= l <= l_max.
pub fn coefficient_table(dims: std::ops::RangeInclusive<u32>, l_max: u32) -> Result<Vec<AngularFunction>> {
    let mut out = Vec::new();
    for n in dims {
        for l in 0..=l_max {
            for m in 0..=l {
                out.push(build_z(n, l, m)?);
            }
        }
    }
    Ok(out)
}

/// Largest coefficient magnitude, handy for scaling residuals.
pub fn coefficient_scale(zf: &AngularFunction) -> f64 {
    match &zf.exact {
        Some(v) => v.iter().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max),
        None => zf.coeffs.iter().fold(0.0, |m, c| m.max(c.abs())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn eigenvalue_law() {
        assert_eq!(eigenvalue(2, 2).unwrap(), 6);
        assert_eq!(eigenvalue(0, 7).unwrap(), 0);
        assert_eq!(eigenvalue(3, 4).unwrap(), 18);
        assert!(eigenvalue(-1, 2).is_err());
        assert!(eigenvalue(1, 0).is_err());
    }

    #[test]
    fn small_cases() {
        let p2 = build_z(3, 2, 0).unwrap();
        assert_eq!(p2.exact.unwrap(), vec![rat(-1, 2), rat(0, 1), rat(3, 2)]);
        let d = build_z(5, 1, 0).unwrap();
        assert_eq!(d.exact.unwrap(), vec![rat(0, 1), rat(3, 1)]);
        let t3 = build_z(2, 3, 0).unwrap();
        assert_eq!(t3.coeffs, vec![0.0, -3.0, 0.0, 4.0]);
        assert!(build_z(3, 1, 2).is_err());
        assert!(build_z(1, 1, 0).is_err());
    }

    #[test]
    fn hand_residual() {
        let z = build_z(5, 1, 0).unwrap();
        for x in [-0.7, 0.0, 0.3] {
            assert!(ode_residual(&z, x).abs() < 1e-14);
        }
    }

    #[test]
    fn associated_legendre_p21() {
        // P_2^1 = 3z sqrt(1-z^2) in the sign convention without (-1)^m
        let z = build_z(3, 2, 1).unwrap();
        assert!((z.eval(0.5) - 1.5 * 0.75f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn float_path_above_limit() {
        let z = build_z(7, 11, 2).unwrap();
        assert!(z.exact.is_none());
        assert_eq!(z.degree(), 9);
        let r = ode_residual(&z, 0.31);
        assert!(r.abs() < 1e-6 * coefficient_scale(&z), "{r}");
    }

    #[test]
    fn legendre_orthogonality() {
        let a = build_z(3, 2, 0).unwrap();
        let b = build_z(3, 2, 0).unwrap();
        assert!((overlap(&a, &b).unwrap() - 0.4).abs() < 1e-14);
        let t = build_z(2, 2, 0).unwrap();
        // int_0^pi cos^2(2 theta) = pi/2
        assert!((overlap(&t, &t).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn direct_and_factored_residuals_agree() {
        let z = build_z(3, 2, 1).unwrap();
        for x in [-0.6, 0.1, 0.45] {
            assert!(ode_residual_direct(&z, x).abs() < 1e-12);
            assert!(ode_residual(&z, x).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn exact_reduced_identity(n in 2u32..9, l in 0u32..7, m in 0u32..7) {
            prop_assume!(m <= l);
            let z = build_z(n, l, m).unwrap();
            prop_assert_eq!(z.reduced_identity_exact(), Some(true));
        }
    }
}
