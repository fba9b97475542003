//! Lattice-sum evaluation of theta functions with characteristics,
//!
//! ```text
//! theta[e; e'](Z; z) = sum_{m in Z^g} exp(pi i (m + e/2)^T Z (m + e/2)
//!                                        + 2 pi i (m + e/2)^T (z + e'/2)),
//! ```
//!
//! of the second-order functions `theta_u(Z; z) = theta[u; 0](2Z; 2z)`, and of
//! their derivatives in `z` and in the independent coordinates `Z_ij`, `i <= j`.
//!
//! Characteristics are integer vectors and are used verbatim; shifting the
//! second vector by even entries changes the value by a sign, see
//! [`reduce_characteristic`].
//!
//! Truncation is certified: every term satisfies
//! `|term| <= exp(-pi l |n|^2 + 2 pi |Im z| |n|)` with `l` the smallest
//! eigenvalue of `Im Z` and `n = m + e/2`, and [`truncation_radius`] picks the
//! smallest integer radius whose shell-counting tail bound is below the
//! requested tolerance. Terms are summed in a fixed order (by `|n|`, then
//! lexicographically in `m`) with pairwise reduction, so results are
//! reproducible bit for bit.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::siegel::{block_diag, SiegelError, SiegelPoint, PIVOT_FLOOR};

/// Upper limit on enumerated lattice points for a single sum.
pub const MAX_LATTICE_POINTS: usize = 20_000_000;

/// Default absolute tolerance of the series value.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Smallest admissible tolerance.
pub const MIN_TOL: f64 = 1e-15;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThetaError {
    #[error(transparent)]
    Siegel(#[from] SiegelError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("imaginary part is numerically degenerate (smallest eigenvalue {lambda_min:e})")]
    Degenerate { lambda_min: f64 },
    #[error("truncated sum needs {count} lattice points (limit {MAX_LATTICE_POINTS})")]
    TooManyTerms { count: usize },
    #[error("re-summation at radius {radius} moved the value by {delta:e} (allowed {allowed:e})")]
    CrossCheck { radius: f64, delta: f64, allowed: f64 },
    #[error("tolerance {0:e} outside the admissible range")]
    InvalidTolerance(f64),
    #[error("cannot parse characteristic {0:?}")]
    Parse(String),
}

/// A theta characteristic, given by integer representatives `(eps; eps')`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Characteristic {
    eps: Vec<i64>,
    eps_prime: Vec<i64>,
}

impl Characteristic {
    pub fn new(eps: Vec<i64>, eps_prime: Vec<i64>) -> Result<Self, ThetaError> {
        if eps.len() != eps_prime.len() {
            return Err(ThetaError::DimensionMismatch {
                expected: eps.len(),
                got: eps_prime.len(),
            });
        }
        Ok(Characteristic { eps, eps_prime })
    }

    /// Builds a characteristic from 0/1 vectors.
    pub fn from_bits(eps: &[u8], eps_prime: &[u8]) -> Result<Self, ThetaError> {
        Self::new(
            eps.iter().map(|&b| b as i64).collect(),
            eps_prime.iter().map(|&b| b as i64).collect(),
        )
    }

    pub fn zero(g: usize) -> Self {
        Characteristic {
            eps: vec![0; g],
            eps_prime: vec![0; g],
        }
    }

    pub fn genus(&self) -> usize {
        self.eps.len()
    }

    pub fn eps(&self) -> &[i64] {
        &self.eps
    }

    pub fn eps_prime(&self) -> &[i64] {
        &self.eps_prime
    }

    /// `eps . eps' mod 2`; 0 for even characteristics.
    pub fn parity(&self) -> u8 {
        let dot: i64 = self.eps.iter().zip(&self.eps_prime).map(|(a, b)| a * b).sum();
        dot.rem_euclid(2) as u8
    }

    pub fn is_even(&self) -> bool {
        self.parity() == 0
    }

    /// The characteristic of a block-diagonal period matrix whose blocks
    /// carry `self` and `other`.
    pub fn concat(&self, other: &Characteristic) -> Characteristic {
        Characteristic {
            eps: self.eps.iter().chain(&other.eps).copied().collect(),
            eps_prime: self.eps_prime.iter().chain(&other.eps_prime).copied().collect(),
        }
    }
}

fn write_vector(f: &mut fmt::Formatter<'_>, v: &[i64]) -> fmt::Result {
    if v.iter().all(|x| (0..=9).contains(x)) {
        for x in v {
            write!(f, "{x}")?;
        }
        Ok(())
    } else {
        let parts: Vec<String> = v.iter().map(i64::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Renders as `"01|10"`; vectors with entries outside `0..=9` are written
/// comma separated (`"0,-1|2,0"`).
impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_vector(f, &self.eps)?;
        write!(f, "|")?;
        write_vector(f, &self.eps_prime)
    }
}

/// Parses one side of a characteristic: digits (`"011"`) or a comma
/// separated list of integers (`"0,-1,2"`).
pub fn parse_int_vector(s: &str) -> Result<Vec<i64>, ThetaError> {
    let s = s.trim();
    let err = || ThetaError::Parse(s.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if s.contains(',') {
        s.split(',')
            .map(|p| p.trim().parse::<i64>().map_err(|_| err()))
            .collect()
    } else {
        s.chars()
            .map(|ch| ch.to_digit(10).map(|d| d as i64).ok_or_else(err))
            .collect()
    }
}

impl FromStr for Characteristic {
    type Err = ThetaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once('|').ok_or_else(|| ThetaError::Parse(s.to_string()))?;
        Characteristic::new(parse_int_vector(a)?, parse_int_vector(b)?)
    }
}

/// Requested accuracy of a lattice sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precision {
    /// Absolute error target of the series value.
    pub tol: f64,
    /// Re-sum with the radius enlarged by 2 and fail if the value moves.
    pub cross_check: bool,
}

impl Precision {
    pub fn new(tol: f64, cross_check: bool) -> Result<Self, ThetaError> {
        if !(tol.is_finite() && tol >= MIN_TOL) {
            return Err(ThetaError::InvalidTolerance(tol));
        }
        Ok(Precision { tol, cross_check })
    }

    pub fn with_tol(tol: f64) -> Result<Self, ThetaError> {
        Self::new(tol, Precision::default().cross_check)
    }
}

impl Default for Precision {
    /// `tol = 1e-12`; cross-checking is on in debug builds (which includes
    /// the test profile).
    fn default() -> Self {
        Precision {
            tol: DEFAULT_TOL,
            cross_check: cfg!(debug_assertions),
        }
    }
}

/// Value, first and second `z`-derivatives and `Z_ij`-derivatives of a theta
/// function at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaJet {
    pub value: Complex64,
    pub grad_z: DVector<Complex64>,
    pub hess_z: DMatrix<Complex64>,
    /// `d/dZ_ij` for `i <= j`, ordered as [`tau_coordinates`].
    pub grad_tau: Vec<Complex64>,
}

impl ThetaJet {
    pub fn genus(&self) -> usize {
        self.grad_z.len()
    }

    /// `d/dZ_ij`, symmetric in `(i, j)`.
    pub fn tau(&self, i: usize, j: usize) -> Complex64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.grad_tau[tau_index(self.genus(), a, b)]
    }
}

/// The independent coordinates `(i, j)`, `i <= j`, of `H_g` (zero based), in
/// row-major order of the upper triangle.
pub fn tau_coordinates(g: usize) -> Vec<(usize, usize)> {
    (0..g).flat_map(|i| (i..g).map(move |j| (i, j))).collect()
}

/// Position of `(i, j)`, `i <= j`, in [`tau_coordinates`].
pub fn tau_index(g: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < g);
    i * g - i * (i + 1) / 2 + j
}

/// Evaluated series together with the truncation it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub value: Complex64,
    pub radius: f64,
    pub terms: usize,
}

fn check_len(got: usize, expected: usize) -> Result<(), ThetaError> {
    if got != expected {
        return Err(ThetaError::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn check_dims(z_mat: &SiegelPoint, z: &[Complex64], g: usize) -> Result<(), ThetaError> {
    if z_mat.genus() != g {
        return Err(ThetaError::DimensionMismatch {
            expected: g,
            got: z_mat.genus(),
        });
    }
    if z.len() != g {
        return Err(ThetaError::DimensionMismatch {
            expected: g,
            got: z.len(),
        });
    }
    Ok(())
}

fn checked_lambda_min(z_mat: &SiegelPoint) -> Result<f64, ThetaError> {
    let lambda_min = z_mat.min_imag_eigenvalue();
    let trace = z_mat.imag_part().trace().abs();
    if !(lambda_min > PIVOT_FLOOR * trace) || !(lambda_min > 0.0) {
        return Err(ThetaError::Degenerate { lambda_min });
    }
    Ok(lambda_min)
}

fn imag_norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.im * c.im).sum::<f64>().sqrt()
}

/// Smallest integer radius `K >= c / l` with
/// `sum_{k >= K} (2k + 3)^g exp(-pi l k^2 + 2 pi c k) w(k + 1) < tol`,
/// where `w(r) = (1 + 4 pi r)^degree` absorbs derivative prefactors.
fn radius_bound(g: usize, lambda: f64, c: f64, tol: f64, degree: u32) -> Result<f64, ThetaError> {
    let peak = c / lambda;
    let start = peak.ceil().max(0.0) as usize;
    let ln_tol = tol.ln();
    let log_term = |k: usize| {
        let k = k as f64;
        g as f64 * (2.0 * k + 3.0).ln() - PI * lambda * k * k
            + 2.0 * PI * c * k
            + degree as f64 * (1.0 + 4.0 * PI * (k + 1.0)).ln()
    };
    // Terms relative to tol, up to where they are negligible and decreasing.
    let mut scaled = Vec::new();
    let mut k = 0usize;
    loop {
        let lt = log_term(k) - ln_tol;
        scaled.push(if lt > 700.0 { f64::INFINITY } else { lt.exp() });
        if k > start + 1 && lt < -60.0 && log_term(k) < log_term(k - 1) {
            break;
        }
        k += 1;
        if k > 1_000_000 {
            return Err(ThetaError::TooManyTerms { count: usize::MAX });
        }
    }
    let mut suffix = 0.0;
    let mut radius = scaled.len();
    for k in (start..scaled.len()).rev() {
        suffix += scaled[k];
        if suffix < 1.0 {
            radius = k;
        } else {
            break;
        }
    }
    Ok(radius as f64)
}

/// Truncation radius `R` such that the terms with `|m + eps/2| > R` sum to
/// less than `tol` in absolute value.
pub fn truncation_radius(
    z_mat: &SiegelPoint,
    z: &[Complex64],
    ch: &Characteristic,
    tol: f64,
) -> Result<f64, ThetaError> {
    check_dims(z_mat, z, ch.genus())?;
    let lambda = checked_lambda_min(z_mat)?;
    radius_bound(ch.genus(), lambda, imag_norm(z), tol, 0)
}

/// Shifted lattice points `n = m + eps/2` with `|n| <= radius`, sorted by
/// `|n|` and then lexicographically by `m`. Stored flat with stride `g`.
fn lattice_points(eps: &[i64], radius: f64) -> Result<Vec<f64>, ThetaError> {
    let g = eps.len();
    // Work with doubled coordinates 2n = 2m + eps, which are exact integers.
    let r2 = 2.0 * radius;
    let bounds: Vec<(i64, i64)> = eps
        .iter()
        .map(|&e| {
            let lo = ((-r2 - e as f64) / 2.0).ceil() as i64;
            let hi = ((r2 - e as f64) / 2.0).floor() as i64;
            (lo, hi)
        })
        .collect();
    let mut count: usize = 1;
    for &(lo, hi) in &bounds {
        count = count.saturating_mul((hi - lo + 1).max(0) as usize);
    }
    if count > MAX_LATTICE_POINTS {
        return Err(ThetaError::TooManyTerms { count });
    }
    let limit = (4.0 * radius * radius).floor() as i64;
    let mut keyed: Vec<(i64, Vec<i64>)> = Vec::new();
    if bounds.iter().any(|&(lo, hi)| hi < lo) {
        return Ok(Vec::new());
    }
    let mut m: Vec<i64> = bounds.iter().map(|&(lo, _)| lo).collect();
    loop {
        let key: i64 = m.iter().zip(eps).map(|(&mi, &e)| (2 * mi + e).pow(2)).sum();
        if key <= limit {
            keyed.push((key, m.clone()));
        }
        // Odometer, last coordinate fastest: lexicographic order in m.
        let mut axis = g;
        loop {
            if axis == 0 {
                keyed.sort_by_key(|(key, _)| *key);
                let mut flat = Vec::with_capacity(keyed.len() * g);
                for (_, m) in keyed {
                    flat.extend(m.iter().zip(eps).map(|(&mi, &e)| mi as f64 + e as f64 / 2.0));
                }
                return Ok(flat);
            }
            axis -= 1;
            if m[axis] < bounds[axis].1 {
                m[axis] += 1;
                break;
            }
            m[axis] = bounds[axis].0;
        }
    }
}

/// Pairwise (tree) summation with a fixed split, deterministic for a given
/// input order.
pub(crate) fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        let mut acc = Complex64::new(0.0, 0.0);
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Series terms at the given lattice points.
fn terms(z_mat: &SiegelPoint, w: &[Complex64], points: &[f64]) -> Vec<Complex64> {
    let g = w.len();
    let entries = z_mat.entries();
    if g == 0 {
        return vec![Complex64::new(1.0, 0.0)];
    }
    points
        .chunks_exact(g)
        .map(|n| {
            let mut quad = Complex64::new(0.0, 0.0);
            for i in 0..g {
                let mut row = entries[(i, i)] * (0.5 * n[i]);
                for j in (i + 1)..g {
                    row += entries[(i, j)] * n[j];
                }
                quad += row * n[i];
            }
            quad *= 2.0;
            let mut lin = Complex64::new(0.0, 0.0);
            for i in 0..g {
                lin += w[i] * n[i];
            }
            (I * PI * (quad + 2.0 * lin)).exp()
        })
        .collect()
}

struct Summation {
    points: Vec<f64>,
    terms: Vec<Complex64>,
    radius: f64,
}

fn summation(
    ch: &Characteristic,
    z_mat: &SiegelPoint,
    z: &[Complex64],
    tol: f64,
    degree: u32,
    extra_radius: f64,
) -> Result<Summation, ThetaError> {
    let g = ch.genus();
    check_dims(z_mat, z, g)?;
    let lambda = checked_lambda_min(z_mat)?;
    let radius = radius_bound(g, lambda, imag_norm(z), tol, degree)? + extra_radius;
    let points = lattice_points(ch.eps(), radius)?;
    let w: Vec<Complex64> = z
        .iter()
        .zip(ch.eps_prime())
        .map(|(&zi, &e)| zi + e as f64 / 2.0)
        .collect();
    let terms = terms(z_mat, &w, &points);
    Ok(Summation { points, terms, radius })
}

fn rounding_allowance(terms: &[Complex64]) -> f64 {
    64.0 * f64::EPSILON * terms.iter().map(|t| t.norm()).sum::<f64>()
}

fn cross_check(
    ch: &Characteristic,
    z_mat: &SiegelPoint,
    z: &[Complex64],
    prec: &Precision,
    degree: u32,
    value: Complex64,
) -> Result<(), ThetaError> {
    let wide = summation(ch, z_mat, z, prec.tol, degree, 2.0)?;
    let delta = (pairwise_sum(&wide.terms) - value).norm();
    let allowed = prec.tol + rounding_allowance(&wide.terms);
    if delta > allowed {
        return Err(ThetaError::CrossCheck {
            radius: wide.radius,
            delta,
            allowed,
        });
    }
    Ok(())
}

/// `theta[eps; eps'](Z; z)` with the truncation data.
pub fn theta_char_eval(
    ch: &Characteristic,
    z_mat: &SiegelPoint,
    z: &[Complex64],
    prec: &Precision,
) -> Result<ThetaValue, ThetaError> {
    let s = summation(ch, z_mat, z, prec.tol, 0, 0.0)?;
    let value = pairwise_sum(&s.terms);
    if prec.cross_check {
        cross_check(ch, z_mat, z, prec, 0, value)?;
    }
    Ok(ThetaValue {
        value,
        radius: s.radius,
        terms: s.terms.len(),
    })
}

/// `theta[eps; eps'](Z; z)` to absolute accuracy `prec.tol`.
pub fn theta_char(
    ch: &Characteristic,
    z_mat: &SiegelPoint,
    z: &[Complex64],
    prec: &Precision,
) -> Result<Complex64, ThetaError> {
    theta_char_eval(ch, z_mat, z, prec).map(|v| v.value)
}

/// Theta constant `theta[eps; eps'](Z; 0)`.
pub fn theta_null(ch: &Characteristic, z_mat: &SiegelPoint, prec: &Precision) -> Result<Complex64, ThetaError> {
    theta_char(ch, z_mat, &vec![Complex64::new(0.0, 0.0); ch.genus()], prec)
}

fn second_order_args(u: &[i64], z_mat: &SiegelPoint, z: &[Complex64]) -> (Characteristic, SiegelPoint, Vec<Complex64>) {
    let ch = Characteristic {
        eps: u.to_vec(),
        eps_prime: vec![0; u.len()],
    };
    (ch, z_mat.scaled(2.0), z.iter().map(|c| c * 2.0).collect())
}

/// Second-order theta `theta_u(Z; z) = theta[u; 0](2Z; 2z)`, with the radius
/// of the underlying sum.
pub fn theta_second_order_eval(
    u: &[i64],
    z_mat: &SiegelPoint,
    z: &[Complex64],
    prec: &Precision,
) -> Result<ThetaValue, ThetaError> {
    let (ch, z2, w2) = second_order_args(u, z_mat, z);
    theta_char_eval(&ch, &z2, &w2, prec)
}

/// Second-order theta function `theta_u(Z; z)`.
pub fn theta_second_order(
    u: &[i64],
    z_mat: &SiegelPoint,
    z: &[Complex64],
    prec: &Precision,
) -> Result<Complex64, ThetaError> {
    theta_second_order_eval(u, z_mat, z, prec).map(|v| v.value)
}

fn char_jet(
    ch: &Characteristic,
    z_mat: &SiegelPoint,
    z: &[Complex64],
    prec: &Precision,
) -> Result<ThetaJet, ThetaError> {
    let g = ch.genus();
    let s = summation(ch, z_mat, z, prec.tol, 2, 0.0)?;
    let value = pairwise_sum(&s.terms);
    if prec.cross_check {
        cross_check(ch, z_mat, z, prec, 2, value)?;
    }
    let mut scratch = vec![Complex64::new(0.0, 0.0); s.terms.len()];
    let mut weighted = |f: &dyn Fn(&[f64]) -> f64| {
        for ((dst, t), n) in scratch.iter_mut().zip(&s.terms).zip(s.points.chunks_exact(g.max(1))) {
            *dst = t * f(n);
        }
        pairwise_sum(&scratch)
    };
    let two_pi_i = I * (2.0 * PI);
    let grad_z = DVector::from_fn(g, |i, _| two_pi_i * weighted(&|n| n[i]));
    let mut hess_z = DMatrix::zeros(g, g);
    let mut grad_tau = Vec::with_capacity(g * (g + 1) / 2);
    for (i, j) in tau_coordinates(g) {
        let s_ij = weighted(&|n| n[i] * n[j]);
        hess_z[(i, j)] = two_pi_i * two_pi_i * s_ij;
        hess_z[(j, i)] = hess_z[(i, j)];
        let factor = if i == j { 1.0 } else { 2.0 };
        grad_tau.push(I * PI * factor * s_ij);
    }
    Ok(ThetaJet {
        value,
        grad_z,
        hess_z,
        grad_tau,
    })
}

/// Jet of `theta[eps; eps'](Z; z)` by term-wise differentiation.
///
/// In `second_order_mode` only `ch.eps` is read and the result is the jet of
/// `theta_u(Z; z) = theta[u; 0](2Z; 2z)` with `u = ch.eps`: the `z`-gradient
/// picks up a factor 2, the `z`-Hessian 4 and the `Z`-gradient 2.
pub fn theta_jet(
    ch: &Characteristic,
    z_mat: &SiegelPoint,
    z: &[Complex64],
    prec: &Precision,
    second_order_mode: bool,
) -> Result<ThetaJet, ThetaError> {
    if !second_order_mode {
        return char_jet(ch, z_mat, z, prec);
    }
    check_dims(z_mat, z, ch.genus())?;
    let (c2, z2, w2) = second_order_args(ch.eps(), z_mat, z);
    let mut jet = char_jet(&c2, &z2, &w2, prec)?;
    jet.grad_z *= Complex64::new(2.0, 0.0);
    jet.hess_z *= Complex64::new(4.0, 0.0);
    for d in &mut jet.grad_tau {
        *d *= 2.0;
    }
    Ok(jet)
}

/// Jet of the second-order theta function `theta_u`.
pub fn theta_second_order_jet(
    u: &[i64],
    z_mat: &SiegelPoint,
    z: &[Complex64],
    prec: &Precision,
) -> Result<ThetaJet, ThetaError> {
    let ch = Characteristic {
        eps: u.to_vec(),
        eps_prime: vec![0; u.len()],
    };
    theta_jet(&ch, z_mat, z, prec, true)
}

/// Reduces a characteristic to its `{0, 1}` representative.
///
/// Returns the sign `s` with `theta[ch] = s * theta[reduced]`: shifting `eps`
/// by `2a` only reindexes the lattice, while shifting `eps'` by `2b`
/// multiplies every term by `(-1)^(eps . b)`.
pub fn reduce_characteristic(ch: &Characteristic) -> (Characteristic, i8) {
    let reduce = |v: &[i64]| -> Vec<i64> { v.iter().map(|x| x.rem_euclid(2)).collect() };
    let eps = reduce(&ch.eps);
    let eps_prime = reduce(&ch.eps_prime);
    let dot: i64 = ch
        .eps
        .iter()
        .zip(ch.eps_prime.iter().zip(&eps_prime))
        .map(|(&e, (&ep, &r))| e * ((ep - r) / 2))
        .sum();
    let sign = if dot.rem_euclid(2) == 0 { 1 } else { -1 };
    (Characteristic { eps, eps_prime }, sign)
}

/// Plain summation over the box `[-half_width, half_width]^g` in
/// lexicographic order. Test oracle only: no truncation logic.
pub fn brute_force_theta(ch: &Characteristic, z_mat: &SiegelPoint, z: &[Complex64], half_width: i64) -> Complex64 {
    let g = ch.genus();
    assert_eq!(z_mat.genus(), g, "genus mismatch");
    assert_eq!(z.len(), g, "vector length mismatch");
    let zm = z_mat.entries();
    let mut m = vec![-half_width; g];
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let n: Vec<f64> = m
            .iter()
            .zip(ch.eps())
            .map(|(&a, &e)| a as f64 + 0.5 * e as f64)
            .collect();
        let mut exponent = Complex64::new(0.0, 0.0);
        for i in 0..g {
            for j in 0..g {
                exponent += I * PI * n[i] * zm[(i, j)] * n[j];
            }
            exponent += I * 2.0 * PI * n[i] * (z[i] + 0.5 * ch.eps_prime()[i] as f64);
        }
        total += exponent.exp();
        let mut axis = g;
        loop {
            if axis == 0 {
                return total;
            }
            axis -= 1;
            if m[axis] < half_width {
                m[axis] += 1;
                break;
            }
            m[axis] = -half_width;
        }
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_residual(a: Complex64, b: Complex64, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}

fn negated(z: &[Complex64]) -> Vec<Complex64> {
    z.iter().map(|c| -c).collect()
}

/// Parity law `theta[c](Z; -z) = (-1)^(eps . eps') theta[c](Z; z)`, as a
/// relative residual.
pub fn parity_residual(
    ch: &Characteristic,
    z_mat: &SiegelPoint,
    z: &[Complex64],
    prec: &Precision,
) -> Result<f64, ThetaError> {
    let plus = theta_char(ch, z_mat, z, prec)?;
    let minus = theta_char(ch, z_mat, &negated(z), prec)?;
    let sign = if ch.is_even() { 1.0 } else { -1.0 };
    Ok(relative_residual(minus, plus * sign, prec.tol))
}

/// Riemann's summation formula
///
/// `theta[a; b](2Z; 2z) theta[a + e; b](2Z; 2x)
///   = 2^-g sum_s (-1)^(a . s) theta[e; b + s](Z; z + x) theta[e; s](Z; z - x)`,
///
/// with `b + s` kept unreduced. Returns the relative residual.
pub fn addition_residual(
    alpha: &[i64],
    beta: &[i64],
    eps: &[i64],
    z_mat: &SiegelPoint,
    z: &[Complex64],
    x: &[Complex64],
    prec: &Precision,
) -> Result<f64, ThetaError> {
    let g = z_mat.genus();
    for v in [alpha, beta, eps] {
        check_len(v.len(), g)?;
    }
    check_len(z.len(), g)?;
    check_len(x.len(), g)?;
    let z2 = z_mat.scaled(2.0);
    let double = |v: &[Complex64]| -> Vec<Complex64> { v.iter().map(|c| c * 2.0).collect() };
    let alpha_eps: Vec<i64> = alpha.iter().zip(eps).map(|(a, e)| a + e).collect();
    let lhs = theta_char(
        &Characteristic::new(alpha.to_vec(), beta.to_vec())?,
        &z2,
        &double(z),
        prec,
    )? * theta_char(&Characteristic::new(alpha_eps, beta.to_vec())?, &z2, &double(x), prec)?;

    let sum: Vec<Complex64> = z.iter().zip(x).map(|(a, b)| a + b).collect();
    let diff: Vec<Complex64> = z.iter().zip(x).map(|(a, b)| a - b).collect();
    let mut terms = Vec::with_capacity(1 << g);
    for mask in 0..(1usize << g) {
        let sigma: Vec<i64> = (0..g).map(|i| ((mask >> (g - 1 - i)) & 1) as i64).collect();
        let beta_sigma: Vec<i64> = beta.iter().zip(&sigma).map(|(b, s)| b + s).collect();
        let dot: i64 = alpha.iter().zip(&sigma).map(|(a, s)| a * s).sum();
        let sign = if dot.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let t1 = theta_char(&Characteristic::new(eps.to_vec(), beta_sigma)?, z_mat, &sum, prec)?;
        let t2 = theta_char(&Characteristic::new(eps.to_vec(), sigma)?, z_mat, &diff, prec)?;
        terms.push(t1 * t2 * sign);
    }
    let rhs = pairwise_sum(&terms) / (1u64 << g) as f64;
    Ok(relative_residual(lhs, rhs, prec.tol))
}

/// Quasi-periodicity `theta_u(Z; z + n + Zm) = exp(-2 pi i (m^T Z m + 2 m^T z)) theta_u(Z; z)`,
/// as a relative residual.
pub fn quasi_periodicity_residual(
    u: &[i64],
    z_mat: &SiegelPoint,
    z: &[Complex64],
    n: &[i64],
    m: &[i64],
    prec: &Precision,
) -> Result<f64, ThetaError> {
    let g = z_mat.genus();
    check_len(n.len(), g)?;
    check_len(m.len(), g)?;
    check_len(z.len(), g)?;
    let zm = z_mat.entries();
    let mf: Vec<f64> = m.iter().map(|&v| v as f64).collect();
    let mut quad = Complex64::new(0.0, 0.0);
    let mut lin = Complex64::new(0.0, 0.0);
    let mut shifted = Vec::with_capacity(g);
    for i in 0..g {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..g {
            row += zm[(i, j)] * mf[j];
        }
        quad += mf[i] * row;
        lin += mf[i] * z[i];
        shifted.push(z[i] + n[i] as f64 + row);
    }
    let lhs = theta_second_order(u, z_mat, &shifted, prec)?;
    let factor = (Complex64::new(0.0, -2.0 * PI) * (quad + 2.0 * lin)).exp();
    let rhs = factor * theta_second_order(u, z_mat, z, prec)?;
    Ok(relative_residual(lhs, rhs, prec.tol))
}

/// Block factorization `theta[c1 c2](diag(Z1, Z2); (z1, z2)) = theta[c1](Z1; z1) theta[c2](Z2; z2)`,
/// as a relative residual.
pub fn block_factorization_residual(
    c1: &Characteristic,
    z1: &SiegelPoint,
    w1: &[Complex64],
    c2: &Characteristic,
    z2: &SiegelPoint,
    w2: &[Complex64],
    prec: &Precision,
) -> Result<f64, ThetaError> {
    let w: Vec<Complex64> = w1.iter().chain(w2).copied().collect();
    let whole = theta_char(&c1.concat(c2), &block_diag(z1, z2), &w, prec)?;
    let product = theta_char(c1, z1, w1, prec)? * theta_char(c2, z2, w2, prec)?;
    Ok(relative_residual(whole, product, prec.tol))
}
