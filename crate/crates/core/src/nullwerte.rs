//! Thetanullwert maps, the isometric Veronese embedding and the mixing matrix
//! relating them.
//!
//! Four maps into projective space are provided:
//!
//! * [`theta_null_second`]: `tau -> [theta_u(tau; 0)]_u`, `u in {0,1}^n`;
//! * [`theta_null_squared`]: `tau -> [theta[e; s]^2(tau; 0)]` over even `(e, s)`;
//! * [`theta_null_sj`]: `Pi -> [theta[0e; 0s](Pi; 0) theta[0e; 1s](Pi; 0)]`;
//! * [`theta_null_prime`]: `Pi -> [theta[(0, u); (1, 0)](2 Pi; 0)]_u`.
//!
//! The addition formula gives `v2(theta_null_second) = M theta_null_squared`
//! and `v2(theta_null_prime) = M theta_null_sj` with the matrix `M` of
//! [`mixing_matrix`]. Index sets are ordered lexicographically with the first
//! coordinate most significant.

use std::f64::consts::SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::siegel::{block_diag, SiegelError, SiegelPoint};
use crate::theta::{theta_null, theta_second_order, Characteristic, Precision, ThetaError};

/// A coordinate vector is treated as zero when every entry is at most this
/// multiple of the series tolerance.
pub const ZERO_FACTOR: f64 = 16.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NullwertError {
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Siegel(#[from] SiegelError),
    #[error("all homogeneous coordinates vanish (max |x| = {max_abs:e})")]
    AllZero { max_abs: f64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("genus {genus} is below the minimum {min} for this map")]
    GenusTooSmall { genus: usize, min: usize },
    #[error("projective points need at least two coordinates")]
    TooShort,
}

/// Index of a homogeneous coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Label {
    /// A characteristic `(e; e')`, rendered `"01|10"`.
    Characteristic(Characteristic),
    /// An unordered pair `{u, u'}` with `u <= u'`, rendered `"01,10"`.
    Pair(Vec<u8>, Vec<u8>),
    /// A vector `u`, rendered `"01"`.
    Vector(Vec<u8>),
}

fn bits(v: &[u8]) -> String {
    v.iter().map(|b| char::from(b'0' + b)).collect()
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Characteristic(c) => write!(f, "{c}"),
            Label::Pair(u, v) => write!(f, "{},{}", bits(u), bits(v)),
            Label::Vector(u) => write!(f, "{}", bits(u)),
        }
    }
}

/// Nonzero homogeneous coordinates with their index labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    coords: Vec<Complex64>,
    labels: Vec<Label>,
}

impl ProjectivePoint {
    pub fn new(coords: Vec<Complex64>, labels: Vec<Label>) -> Result<Self, NullwertError> {
        if coords.len() != labels.len() {
            return Err(NullwertError::LengthMismatch {
                left: coords.len(),
                right: labels.len(),
            });
        }
        if coords.len() < 2 {
            return Err(NullwertError::TooShort);
        }
        let max_abs = max_abs(&coords);
        if !(max_abs > 0.0) {
            return Err(NullwertError::AllZero { max_abs });
        }
        Ok(ProjectivePoint { coords, labels })
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.coords)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    /// The same projective point with coordinates multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> ProjectivePoint {
        ProjectivePoint {
            coords: self.coords.iter().map(|c| c * factor).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Reorders both coordinates and labels by `order[k]` = old index of the
    /// new k-th entry.
    pub fn permuted(&self, order: &[usize]) -> ProjectivePoint {
        ProjectivePoint {
            coords: order.iter().map(|&k| self.coords[k]).collect(),
            labels: order.iter().map(|&k| self.labels[k].clone()).collect(),
        }
    }
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// All vectors of `{0,1}^n` in lexicographic order.
pub fn binary_vectors(n: usize) -> Vec<Vec<u8>> {
    (0..1usize << n)
        .map(|k| (0..n).map(|i| ((k >> (n - 1 - i)) & 1) as u8).collect())
        .collect()
}

fn dot(a: &[u8], b: &[u8]) -> u32 {
    a.iter().zip(b).map(|(&x, &y)| (x * y) as u32).sum()
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(&x, &y)| x ^ y).collect()
}

fn to_i64(v: &[u8]) -> Vec<i64> {
    v.iter().map(|&b| b as i64).collect()
}

/// Even characteristics `(e, s)` in `{0,1}^n x {0,1}^n`, lexicographic in
/// `(e, s)`. There are `(4^n + 2^n) / 2` of them.
pub fn even_characteristics(n: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let vs = binary_vectors(n);
    let mut out = Vec::with_capacity(((1usize << (2 * n)) + (1usize << n)) / 2);
    for e in &vs {
        for s in &vs {
            if dot(e, s).is_multiple_of(2) {
                out.push((e.clone(), s.clone()));
            }
        }
    }
    out
}

/// Unordered pairs `{u, u'}` with `u <= u'`, lexicographic in `(u, u')`.
pub fn pair_labels(n: usize) -> Vec<(Vec<u8>, Vec<u8>)> {
    let vs = binary_vectors(n);
    let mut out = Vec::with_capacity(vs.len() * (vs.len() + 1) / 2);
    for (a, u) in vs.iter().enumerate() {
        for v in &vs[a..] {
            out.push((u.clone(), v.clone()));
        }
    }
    out
}

fn char_labels(n: usize) -> Vec<Label> {
    even_characteristics(n)
        .into_iter()
        .map(|(e, s)| Label::Characteristic(Characteristic::from_bits(&e, &s).expect("equal lengths")))
        .collect()
}

fn pair_label_list(n: usize) -> Vec<Label> {
    pair_labels(n).into_iter().map(|(u, v)| Label::Pair(u, v)).collect()
}

fn vector_labels(n: usize) -> Vec<Label> {
    binary_vectors(n).into_iter().map(Label::Vector).collect()
}

fn nonzero(coords: Vec<Complex64>, labels: Vec<Label>, prec: &Precision) -> Result<ProjectivePoint, NullwertError> {
    let m = max_abs(&coords);
    if !(m > ZERO_FACTOR * prec.tol) {
        return Err(NullwertError::AllZero { max_abs: m });
    }
    ProjectivePoint::new(coords, labels)
}

fn require_genus(g: usize, min: usize) -> Result<(), NullwertError> {
    if g < min {
        return Err(NullwertError::GenusTooSmall { genus: g, min });
    }
    Ok(())
}

/// The pair of characteristics `((0, e); (0, s))`, `((0, e); (1, s))` whose
/// product is the `(e, s)` coordinate of [`theta_null_sj`].
pub fn sj_characteristics(g: usize) -> Vec<(Characteristic, Characteristic)> {
    even_characteristics(g - 1)
        .into_iter()
        .map(|(e, s)| {
            let mut top = vec![0i64];
            top.extend(to_i64(&e));
            let mut low0 = vec![0i64];
            low0.extend(to_i64(&s));
            let mut low1 = vec![1i64];
            low1.extend(to_i64(&s));
            (
                Characteristic::new(top.clone(), low0).expect("equal lengths"),
                Characteristic::new(top, low1).expect("equal lengths"),
            )
        })
        .collect()
}

/// The characteristics `((0, u); (1, 0, ..., 0))` evaluated at `2 Pi` by
/// [`theta_null_prime`].
pub fn prime_characteristics(g: usize) -> Vec<Characteristic> {
    binary_vectors(g - 1)
        .into_iter()
        .map(|u| {
            let mut top = vec![0i64];
            top.extend(to_i64(&u));
            let mut low = vec![0i64; g];
            low[0] = 1;
            Characteristic::new(top, low).expect("equal lengths")
        })
        .collect()
}

/// Second-order Thetanullwert map `tau -> [theta_u(tau; 0)]`.
pub fn theta_null_second(tau: &SiegelPoint, prec: &Precision) -> Result<ProjectivePoint, NullwertError> {
    let n = tau.genus();
    require_genus(n, 1)?;
    let zero = vec![Complex64::new(0.0, 0.0); n];
    let coords = binary_vectors(n)
        .iter()
        .map(|u| theta_second_order(&to_i64(u), tau, &zero, prec))
        .collect::<Result<Vec<_>, _>>()?;
    nonzero(coords, vector_labels(n), prec)
}

/// Squared theta constants over the even characteristics.
pub fn theta_null_squared(tau: &SiegelPoint, prec: &Precision) -> Result<ProjectivePoint, NullwertError> {
    let n = tau.genus();
    require_genus(n, 1)?;
    let coords = even_characteristics(n)
        .iter()
        .map(|(e, s)| {
            let ch = Characteristic::from_bits(e, s).expect("equal lengths");
            theta_null(&ch, tau, prec).map(|v| v * v)
        })
        .collect::<Result<Vec<_>, _>>()?;
    nonzero(coords, char_labels(n), prec)
}

/// Schottky-Jung products `theta[0e; 0s](Pi; 0) theta[0e; 1s](Pi; 0)`.
pub fn theta_null_sj(pi: &SiegelPoint, prec: &Precision) -> Result<ProjectivePoint, NullwertError> {
    let g = pi.genus();
    require_genus(g, 2)?;
    let coords = sj_characteristics(g)
        .iter()
        .map(|(a, b)| Ok(theta_null(a, pi, prec)? * theta_null(b, pi, prec)?))
        .collect::<Result<Vec<_>, ThetaError>>()?;
    nonzero(coords, char_labels(g - 1), prec)
}

/// `Pi -> [theta[(0, u); (1, 0)](2 Pi; 0)]_u`.
pub fn theta_null_prime(pi: &SiegelPoint, prec: &Precision) -> Result<ProjectivePoint, NullwertError> {
    let g = pi.genus();
    require_genus(g, 2)?;
    let doubled = pi.scaled(2.0);
    let coords = prime_characteristics(g)
        .iter()
        .map(|ch| theta_null(ch, &doubled, prec))
        .collect::<Result<Vec<_>, _>>()?;
    nonzero(coords, vector_labels(g - 1), prec)
}

fn log2_exact(len: usize) -> Result<usize, NullwertError> {
    if len < 2 || !len.is_power_of_two() {
        return Err(NullwertError::NotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Coordinates of the isometric Veronese map: `x_u^2` at `{u, u}` and
/// `sqrt(2) x_u x_u'` at `{u, u'}`, ordered as [`pair_labels`].
pub fn veronese_coords(x: &[Complex64]) -> Result<Vec<Complex64>, NullwertError> {
    let n = log2_exact(x.len())?;
    let mut out = Vec::with_capacity(x.len() * (x.len() + 1) / 2);
    for a in 0..x.len() {
        out.push(x[a] * x[a]);
        for b in (a + 1)..x.len() {
            out.push(x[a] * x[b] * SQRT_2);
        }
    }
    debug_assert_eq!(out.len(), pair_labels(n).len());
    Ok(out)
}

/// Isometric Veronese embedding of a point with `2^n` coordinates.
pub fn veronese(x: &ProjectivePoint) -> Result<ProjectivePoint, NullwertError> {
    let n = log2_exact(x.len())?;
    ProjectivePoint::new(veronese_coords(x.coords())?, pair_label_list(n))
}

/// The matrix `M` with rows indexed by pairs `{u, u'}` and columns by even
/// characteristics `(e, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingMatrix {
    pub n: usize,
    pub entries: DMatrix<Complex64>,
    pub row_labels: Vec<(Vec<u8>, Vec<u8>)>,
    pub col_labels: Vec<(Vec<u8>, Vec<u8>)>,
}

impl MixingMatrix {
    /// `M x` for a point indexed by even characteristics.
    pub fn apply(&self, x: &ProjectivePoint) -> Result<ProjectivePoint, NullwertError> {
        self.apply_coords(x.coords())
            .and_then(|c| ProjectivePoint::new(c, pair_label_list(self.n)))
    }

    pub fn apply_coords(&self, x: &[Complex64]) -> Result<Vec<Complex64>, NullwertError> {
        if x.len() != self.entries.ncols() {
            return Err(NullwertError::LengthMismatch {
                left: self.entries.ncols(),
                right: x.len(),
            });
        }
        Ok((0..self.entries.nrows())
            .map(|r| (0..x.len()).map(|c| self.entries[(r, c)] * x[c]).sum())
            .collect())
    }
}

/// Entry at `({u, u'}, (e, s))`: `2^-n (-1)^(u.s)` when `u + u' = e = 0`,
/// `sqrt(2) 2^-n (-1)^(u.s)` when `u + u' = e != 0`, zero otherwise.
pub fn mixing_matrix(n: usize) -> MixingMatrix {
    let rows = pair_labels(n);
    let cols = even_characteristics(n);
    let scale = 0.5f64.powi(n as i32);
    let entries = DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        let (u, v) = &rows[r];
        let (e, s) = &cols[c];
        if xor(u, v) != *e {
            return Complex64::new(0.0, 0.0);
        }
        let sign = if dot(u, s).is_multiple_of(2) { 1.0 } else { -1.0 };
        let weight = if e.iter().all(|&b| b == 0) { 1.0 } else { SQRT_2 };
        Complex64::new(sign * weight * scale, 0.0)
    });
    MixingMatrix {
        n,
        entries,
        row_labels: rows,
        col_labels: cols,
    }
}

fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// Fubini-Study angle between two coordinate vectors, in `[0, pi/2]`.
///
/// Computed as `atan2(|x^ - <x^, y^> y^|, |<x^, y^>|)` on normalized vectors,
/// which keeps full relative accuracy for nearly equal points.
pub fn projective_distance_coords(x: &[Complex64], y: &[Complex64]) -> Result<f64, NullwertError> {
    if x.len() != y.len() {
        return Err(NullwertError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let (nx, ny) = (norm(x), norm(y));
    if !(nx > 0.0) || !(ny > 0.0) {
        return Err(NullwertError::AllZero { max_abs: 0.0 });
    }
    let xh: Vec<Complex64> = x.iter().map(|c| c / nx).collect();
    let yh: Vec<Complex64> = y.iter().map(|c| c / ny).collect();
    let overlap = inner(&xh, &yh);
    let residual: Vec<Complex64> = xh.iter().zip(&yh).map(|(a, b)| a - overlap * b).collect();
    Ok(norm(&residual).atan2(overlap.norm()))
}

pub fn projective_distance(x: &ProjectivePoint, y: &ProjectivePoint) -> Result<f64, NullwertError> {
    projective_distance_coords(x.coords(), y.coords())
}

/// Distance between `v2(theta_null_second(tau))` and `M theta_null_squared(tau)`.
pub fn sj_factorization_residual_low(tau: &SiegelPoint, prec: &Precision) -> Result<f64, NullwertError> {
    let lhs = veronese(&theta_null_second(tau, prec)?)?;
    let rhs = mixing_matrix(tau.genus()).apply(&theta_null_squared(tau, prec)?)?;
    projective_distance(&lhs, &rhs)
}

/// Distance between `v2(theta_null_prime(Pi))` and `M theta_null_sj(Pi)`.
pub fn sj_factorization_residual_high(pi: &SiegelPoint, prec: &Precision) -> Result<f64, NullwertError> {
    require_genus(pi.genus(), 2)?;
    let lhs = veronese(&theta_null_prime(pi, prec)?)?;
    let rhs = mixing_matrix(pi.genus() - 1).apply(&theta_null_sj(pi, prec)?)?;
    projective_distance(&lhs, &rhs)
}

/// Distance between `theta_null_sj(Pi)` and `theta_null_squared(tau)`.
///
/// Small only for a period matrix and a Prym period matrix of the same
/// double cover with compatible markings; otherwise a diagnostic value.
pub fn schottky_jung_residual(pi: &SiegelPoint, tau: &SiegelPoint, prec: &Precision) -> Result<f64, NullwertError> {
    if pi.genus() != tau.genus() + 1 {
        return Err(NullwertError::LengthMismatch {
            left: pi.genus(),
            right: tau.genus() + 1,
        });
    }
    projective_distance(&theta_null_sj(pi, prec)?, &theta_null_squared(tau, prec)?)
}

/// Factorization of `theta_null_prime` on `diag(Pi', Z)`:
/// `theta[(0, u', u''); (1, 0)](2 diag(Pi', Z)) = theta[(0, u'); (1, 0)](2 Pi') theta[u''; 0](2Z)`.
///
/// Returns `max_u |lhs - rhs| / max_u |lhs|`.
pub fn prime_block_residual(pi_prime: &SiegelPoint, z: &SiegelPoint, prec: &Precision) -> Result<f64, NullwertError> {
    let (a, b) = (pi_prime.genus(), z.genus());
    require_genus(a, 1)?;
    require_genus(b, 1)?;
    let whole = theta_null_prime(&block_diag(pi_prime, z), prec)?;
    let pp2 = pi_prime.scaled(2.0);
    let z2 = z.scaled(2.0);
    let heads: Vec<Complex64> = prime_characteristics(a)
        .iter()
        .map(|ch| theta_null(ch, &pp2, prec))
        .collect::<Result<_, _>>()?;
    let tails: Vec<Complex64> = binary_vectors(b)
        .iter()
        .map(|u| theta_null(&Characteristic::new(to_i64(u), vec![0; b])?, &z2, prec))
        .collect::<Result<_, _>>()?;
    let mut diff = 0.0f64;
    let mut k = 0;
    for h in &heads {
        for t in &tails {
            diff = diff.max((whole.coords()[k] - h * t).norm());
            k += 1;
        }
    }
    Ok(diff / whole.max_abs())
}

/// Serialized form `{"labels": [...], "coords": [[re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProjectivePointRecord {
    pub labels: Vec<String>,
    pub coords: Vec<[f64; 2]>,
}

impl From<&ProjectivePoint> for ProjectivePointRecord {
    fn from(p: &ProjectivePoint) -> Self {
        ProjectivePointRecord {
            labels: p.labels.iter().map(Label::to_string).collect(),
            coords: p.coords.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siegel::{block_diag, random_siegel};
    use crate::theta::brute_force_theta;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn prec() -> Precision {
        Precision::default()
    }

    fn sc(im: f64) -> SiegelPoint {
        SiegelPoint::from_scalar(c(0.0, im)).unwrap()
    }

    fn bf(s: &str, z: &SiegelPoint) -> Complex64 {
        let ch: Characteristic = s.parse().unwrap();
        brute_force_theta(&ch, z, &vec![c(0.0, 0.0); z.genus()], 30)
    }

    #[test]
    fn even_characteristic_counts() {
        assert_eq!(
            even_characteristics(1),
            vec![(vec![0], vec![0]), (vec![0], vec![1]), (vec![1], vec![0])]
        );
        for n in 1..5 {
            let expected = ((1usize << (2 * n)) + (1usize << n)) / 2;
            assert_eq!(even_characteristics(n).len(), expected);
            assert_eq!(pair_labels(n).len(), expected);
        }
        assert_eq!(even_characteristics(2).len(), 10);
    }

    #[test]
    fn pair_labels_genus_one() {
        assert_eq!(
            pair_labels(1),
            vec![(vec![0], vec![0]), (vec![0], vec![1]), (vec![1], vec![1])]
        );
    }

    #[test]
    fn second_order_nulls_at_i() {
        let p = theta_null_second(&sc(1.0), &prec()).unwrap();
        // theta[0;0](2i;0) and theta[1;0](2i;0) from brute-force sums.
        assert!((p.coords()[0] - c(1.003_734_885_487_739, 0.0)).norm() < 1e-12);
        assert!((p.coords()[1] - c(0.415_760_602_596_027, 0.0)).norm() < 1e-12);
        assert!((p.coords()[0] - bf("0|0", &sc(2.0))).norm() < 1e-12);
        assert!((p.coords()[1] - bf("1|0", &sc(2.0))).norm() < 1e-12);
        assert_eq!(p.labels()[1].to_string(), "1");
    }

    #[test]
    fn second_order_nulls_positive_on_imaginary_axis() {
        for t in [0.3, 1.0, 2.5] {
            let tau = SiegelPoint::scaled_identity(2, t).unwrap();
            for x in theta_null_second(&tau, &prec()).unwrap().coords() {
                assert!(x.re > 0.0 && x.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn squared_nulls_at_i() {
        let p = theta_null_squared(&sc(1.0), &prec()).unwrap();
        let expected = [1.180_340_599_016_096, 0.834_626_841_674_073, 0.834_626_841_674_073];
        for (x, e) in p.coords().iter().zip(expected) {
            assert!((x - c(e, 0.0)).norm() < 1e-11, "{x} vs {e}");
        }
        assert_eq!(p.labels().len(), 3);
        assert_eq!(p.labels()[2].to_string(), "1|0");
    }

    #[test]
    fn squared_nulls_ignore_even_shifts() {
        let tau = random_siegel(2, 3, 1.0);
        for (e, s) in even_characteristics(2) {
            let a = Characteristic::from_bits(&e, &s).unwrap();
            let shifted = Characteristic::new(
                a.eps().iter().map(|x| x + 2).collect(),
                a.eps_prime().iter().map(|x| x - 2).collect(),
            )
            .unwrap();
            let va = theta_null(&a, &tau, &prec()).unwrap();
            let vb = theta_null(&shifted, &tau, &prec()).unwrap();
            assert!((va * va - vb * vb).norm() < 1e-11);
        }
    }

    #[test]
    fn sj_nulls_on_block_diagonal_point() {
        let pi = SiegelPoint::diagonal_imaginary(&[1.0, 2.0]).unwrap();
        let p = theta_null_sj(&pi, &prec()).unwrap();
        let expected = bf("0|0", &sc(1.0)) * bf("0|1", &sc(1.0)) * bf("0|0", &sc(2.0)).powi(2);
        assert!((p.coords()[0] - expected).norm() < 1e-11);
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn prime_nulls_on_block_diagonal_point() {
        let pi = SiegelPoint::diagonal_imaginary(&[1.0, 1.0]).unwrap();
        let p = theta_null_prime(&pi, &prec()).unwrap();
        let lead = bf("0|1", &sc(2.0));
        for (k, u) in ["0|0", "1|0"].iter().enumerate() {
            assert!((p.coords()[k] - lead * bf(u, &sc(2.0))).norm() < 1e-12);
        }
        for ch in prime_characteristics(3) {
            assert!(ch.is_even());
        }
    }

    #[test]
    fn genus_preconditions() {
        assert!(matches!(
            theta_null_sj(&sc(1.0), &prec()),
            Err(NullwertError::GenusTooSmall { .. })
        ));
        assert!(matches!(
            theta_null_prime(&sc(1.0), &prec()),
            Err(NullwertError::GenusTooSmall { .. })
        ));
    }

    #[test]
    fn veronese_examples() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        assert_eq!(veronese_coords(&[one, one]).unwrap(), vec![one, c(SQRT_2, 0.0), one]);
        assert_eq!(veronese_coords(&[one, zero]).unwrap(), vec![one, zero, zero]);
        assert!(matches!(
            veronese_coords(&[one; 3]),
            Err(NullwertError::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn mixing_matrix_genus_one() {
        let m = mixing_matrix(1);
        let h = SQRT_2 / 2.0;
        let expected = [[0.5, 0.5, 0.0], [0.0, 0.0, h], [0.5, -0.5, 0.0]];
        for r in 0..3 {
            for col in 0..3 {
                assert!((m.entries[(r, col)] - c(expected[r][col], 0.0)).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn mixing_matrix_rows_have_one_block() {
        for n in 1..4 {
            let m = mixing_matrix(n);
            for (r, (u, v)) in m.row_labels.iter().enumerate() {
                let e = xor(u, v);
                for (col, (ce, _)) in m.col_labels.iter().enumerate() {
                    if *ce != e {
                        assert_eq!(m.entries[(r, col)], c(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn projective_distance_examples() {
        let x = vec![c(1.0, 2.0), c(-0.5, 0.3)];
        let y: Vec<Complex64> = x.iter().map(|v| v * c(0.0, 3.0)).collect();
        assert!(projective_distance_coords(&x, &y).unwrap() < 1e-15);
        let e0 = [c(1.0, 0.0), c(0.0, 0.0)];
        let e1 = [c(0.0, 0.0), c(1.0, 0.0)];
        let d = [c(1.0, 0.0), c(1.0, 0.0)];
        assert!((projective_distance_coords(&e0, &e1).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((projective_distance_coords(&e0, &d).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        assert!(projective_distance_coords(&e0, &[c(0.0, 0.0); 2]).is_err());
        assert!(projective_distance_coords(&e0, &[c(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn factorization_residuals_at_simple_points() {
        let r = sj_factorization_residual_low(&sc(1.0), &prec()).unwrap();
        assert!(r <= 1e-11, "low residual {r}");
        let pi = SiegelPoint::diagonal_imaginary(&[1.0, 1.0]).unwrap();
        let r = sj_factorization_residual_high(&pi, &prec()).unwrap();
        assert!(r <= 1e-11, "high residual {r}");
    }

    #[test]
    fn residual_is_scale_and_order_invariant() {
        let tau = random_siegel(2, 8, 1.0);
        let lhs = veronese(&theta_null_second(&tau, &prec()).unwrap()).unwrap();
        let rhs = mixing_matrix(2)
            .apply(&theta_null_squared(&tau, &prec()).unwrap())
            .unwrap();
        let base = projective_distance(&lhs, &rhs).unwrap();
        let scaled = projective_distance(&lhs.scaled(c(-2.0, 7.0)), &rhs.scaled(c(0.0, 1e-3))).unwrap();
        assert!((base - scaled).abs() < 1e-12);
        let order: Vec<usize> = (0..lhs.len()).rev().collect();
        let permuted = projective_distance(&lhs.permuted(&order), &rhs.permuted(&order)).unwrap();
        assert!((base - permuted).abs() < 1e-12);
    }

    #[test]
    fn prime_factorizes_on_blocks() {
        // theta_null_prime(diag(P', z)) = theta[0u'; 10](2P'; 0) theta[u_last; 0](2z; 0).
        let pp = random_siegel(1, 21, 0.8);
        let z = random_siegel(1, 22, 0.8);
        let p = theta_null_prime(&block_diag(&pp, &z), &prec()).unwrap();
        let pp2 = pp.scaled(2.0);
        let z2 = z.scaled(2.0);
        for (k, u) in binary_vectors(1).iter().enumerate() {
            let lead = theta_null(&"0|1".parse().unwrap(), &pp2, &prec()).unwrap();
            let tail = theta_null(&Characteristic::new(to_i64(u), vec![0]).unwrap(), &z2, &prec()).unwrap();
            assert!((p.coords()[k] - lead * tail).norm() < 1e-10 * (1.0 + p.coords()[k].norm()));
        }
    }

    #[test]
    fn prime_block_residual_small() {
        for (a, b) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let pp = random_siegel(a, 30 + a as u64, 0.8);
            let z = random_siegel(b, 40 + b as u64, 0.8);
            let r = prime_block_residual(&pp, &z, &prec()).unwrap();
            assert!(r <= 1e-12, "({a},{b}) {r}");
        }
    }

    #[test]
    fn record_rendering() {
        let p = theta_null_squared(&random_siegel(2, 1, 0.5), &prec()).unwrap();
        let rec = ProjectivePointRecord::from(&p);
        assert_eq!(rec.labels[0], "00|00");
        assert_eq!(rec.labels.len(), 10);
        let pair = veronese(&theta_null_second(&random_siegel(2, 1, 0.5), &prec()).unwrap()).unwrap();
        assert_eq!(pair.labels()[1].to_string(), "00,01");
    }
}
