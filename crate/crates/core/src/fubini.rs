//! Fubini-Study pullback forms of the Thetanullwert maps.
//!
//! For a holomorphic map `F: H_g -> C^{N+1}` the pullback of
//! `omega_FS = (i/2) d dbar log |X|^2` is stored through its coefficient matrix
//! `H_ab = d_a dbar_b log |F|^2` in the independent coordinates `Z_ij`,
//! `i <= j`. The `i/2` prefactor is never materialized; all comparisons are
//! between coefficient matrices.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nullwerte::{
    binary_vectors, even_characteristics, prime_characteristics, sj_characteristics, veronese_coords, NullwertError,
    ZERO_FACTOR,
};
use crate::siegel::{block_diag, sp_action, swap_matrix, SiegelError, SiegelPoint};
use crate::theta::{
    tau_coordinates, theta_jet, theta_second_order_jet, Characteristic, Precision, ThetaError, ThetaJet,
};

/// Projectivized slice derivatives at or below this are treated as zero.
pub const FIRST_SLICE_THRESHOLD: f64 = 1e-8;

/// Lower bound for the projectivized derivative of `theta_null_prime` along
/// the trailing genus-1 slice, for `y` in the box of [`random_slice_parameter`].
///
/// The derivative factors through the genus-1 second-order map of `y`, so it
/// does not depend on the fixed block. It decays exponentially towards every
/// cusp (about 5e-5 at `Im y = 0.1`), which is why the box stays away from the
/// real axis. On a 41 x 41 grid over the box the minimum is 0.287, attained at
/// `Im y = 1.5`.
pub const LAST_SLICE_FLOOR: f64 = 0.1;

/// Box `|Re y| <= 0.5`, `0.5 <= Im y <= 1.5` sampled by [`random_slice_parameter`].
pub const SLICE_RE_HALF_WIDTH: f64 = 0.5;
pub const SLICE_IM_RANGE: (f64, f64) = (0.5, 1.5);

/// Largest entrywise deviation accepted for the swap-matrix action check.
pub const SWAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FubiniError {
    #[error(transparent)]
    Nullwert(#[from] NullwertError),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Siegel(#[from] SiegelError),
    #[error("jet value vanishes")]
    ZeroValue,
    #[error("jet shape mismatch: {0}")]
    Shape(String),
    #[error("genus {genus} is below the minimum {min}")]
    GenusTooSmall { genus: usize, min: usize },
    #[error("unknown map {0:?} (expected second, squared, sj or prime)")]
    UnknownMap(String),
    #[error("upper half plane point needs Im y > 0, got {0}")]
    NotInUpperHalfPlane(Complex64),
}

/// Which Thetanullwert map a jet or form belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapId {
    Second,
    Squared,
    Sj,
    Prime,
}

impl MapId {
    pub const ALL: [MapId; 4] = [MapId::Second, MapId::Squared, MapId::Sj, MapId::Prime];

    /// Factor in front of the pullback in the chain
    /// `8 pi Second* = 4 pi Squared* = 4 pi Sj* = 8 pi Prime*`.
    pub fn normalization(self) -> f64 {
        match self {
            MapId::Second | MapId::Prime => 8.0 * PI,
            MapId::Squared | MapId::Sj => 4.0 * PI,
        }
    }

    pub fn min_genus(self) -> usize {
        match self {
            MapId::Second | MapId::Squared => 1,
            MapId::Sj | MapId::Prime => 2,
        }
    }

    /// The side of the form identities this map belongs to.
    pub fn side(self) -> Side {
        match self {
            MapId::Second | MapId::Squared => Side::Low,
            MapId::Sj | MapId::Prime => Side::High,
        }
    }
}

impl fmt::Display for MapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MapId::Second => "second",
            MapId::Squared => "squared",
            MapId::Sj => "sj",
            MapId::Prime => "prime",
        };
        f.write_str(s)
    }
}

impl FromStr for MapId {
    type Err = FubiniError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "second" => Ok(MapId::Second),
            "squared" => Ok(MapId::Squared),
            "sj" => Ok(MapId::Sj),
            "prime" => Ok(MapId::Prime),
            other => Err(FubiniError::UnknownMap(other.to_string())),
        }
    }
}

/// `Low` compares the maps on `H_{g-1}`, `High` the maps on `H_g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Low,
    High,
}

impl Side {
    pub fn maps(self) -> (MapId, MapId) {
        match self {
            Side::Low => (MapId::Second, MapId::Squared),
            Side::High => (MapId::Sj, MapId::Prime),
        }
    }
}

/// Value of a vector-valued holomorphic map and its derivatives in the
/// coordinates `Z_ij`, `i <= j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MapJet {
    pub value: Vec<Complex64>,
    /// `derivs[k]` is `dF/dZ_ij` for the k-th entry of `coord_labels`.
    pub derivs: Vec<Vec<Complex64>>,
    /// One-based `(i, j)`, `i <= j`.
    pub coord_labels: Vec<(usize, usize)>,
}

impl MapJet {
    pub fn new(
        value: Vec<Complex64>,
        derivs: Vec<Vec<Complex64>>,
        coord_labels: Vec<(usize, usize)>,
    ) -> Result<Self, FubiniError> {
        if derivs.len() != coord_labels.len() {
            return Err(FubiniError::Shape(format!(
                "{} derivative vectors for {} coordinates",
                derivs.len(),
                coord_labels.len()
            )));
        }
        if let Some(d) = derivs.iter().find(|d| d.len() != value.len()) {
            return Err(FubiniError::Shape(format!(
                "derivative of length {} for value of length {}",
                d.len(),
                value.len()
            )));
        }
        if !value.iter().any(|c| c.norm() > 0.0) {
            return Err(FubiniError::ZeroValue);
        }
        Ok(MapJet {
            value,
            derivs,
            coord_labels,
        })
    }

    /// Multiplies value and derivatives by a constant.
    pub fn scaled(&self, factor: Complex64) -> MapJet {
        MapJet {
            value: self.value.iter().map(|c| c * factor).collect(),
            derivs: self
                .derivs
                .iter()
                .map(|d| d.iter().map(|c| c * factor).collect())
                .collect(),
            coord_labels: self.coord_labels.clone(),
        }
    }

    /// Position of the one-based coordinate `(i, j)`.
    pub fn coord_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.coord_labels.iter().position(|&l| l == key)
    }
}

/// One-based coordinate labels of `H_g`.
pub fn coord_labels(g: usize) -> Vec<(usize, usize)> {
    tau_coordinates(g).into_iter().map(|(i, j)| (i + 1, j + 1)).collect()
}

fn zeros(g: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); g]
}

fn bits_to_i64(v: &[u8]) -> Vec<i64> {
    v.iter().map(|&b| b as i64).collect()
}

/// Assembles a map jet from per-coordinate `(value, d/dZ)` pairs.
fn assemble(g: usize, parts: Vec<(Complex64, Vec<Complex64>)>, prec: &Precision) -> Result<MapJet, FubiniError> {
    let labels = coord_labels(g);
    let value: Vec<Complex64> = parts.iter().map(|(v, _)| *v).collect();
    let max_abs = value.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if !(max_abs > ZERO_FACTOR * prec.tol) {
        return Err(NullwertError::AllZero { max_abs }.into());
    }
    let derivs = (0..labels.len())
        .map(|k| parts.iter().map(|(_, d)| d[k]).collect())
        .collect();
    MapJet::new(value, derivs, labels)
}

/// Jet of one of the four Thetanullwert maps at `z_mat`.
///
/// The value coincides with the corresponding `theta_null_*` coordinates; the
/// derivatives are exact term-wise derivatives of the lattice sums, combined by
/// the product rule for `squared` and `sj`, and by the factor 2 of the `2 Pi`
/// argument for `prime`.
pub fn nullwert_jet(map: MapId, z_mat: &SiegelPoint, prec: &Precision) -> Result<MapJet, FubiniError> {
    let g = z_mat.genus();
    if g < map.min_genus() {
        return Err(FubiniError::GenusTooSmall {
            genus: g,
            min: map.min_genus(),
        });
    }
    let zero = zeros(g);
    let null_jet = |ch: &Characteristic, point: &SiegelPoint| -> Result<ThetaJet, ThetaError> {
        theta_jet(ch, point, &zero, prec, false)
    };
    let parts: Vec<(Complex64, Vec<Complex64>)> = match map {
        MapId::Second => binary_vectors(g)
            .iter()
            .map(|u| {
                let j = theta_second_order_jet(&bits_to_i64(u), z_mat, &zero, prec)?;
                Ok((j.value, j.grad_tau))
            })
            .collect::<Result<_, ThetaError>>()?,
        MapId::Squared => even_characteristics(g)
            .iter()
            .map(|(e, s)| {
                let j = null_jet(&Characteristic::from_bits(e, s)?, z_mat)?;
                let d = j.grad_tau.iter().map(|d| 2.0 * j.value * d).collect();
                Ok((j.value * j.value, d))
            })
            .collect::<Result<_, ThetaError>>()?,
        MapId::Sj => sj_characteristics(g)
            .iter()
            .map(|(a, b)| {
                let ja = null_jet(a, z_mat)?;
                let jb = null_jet(b, z_mat)?;
                let d = ja
                    .grad_tau
                    .iter()
                    .zip(&jb.grad_tau)
                    .map(|(da, db)| da * jb.value + ja.value * db)
                    .collect();
                Ok((ja.value * jb.value, d))
            })
            .collect::<Result<_, ThetaError>>()?,
        MapId::Prime => {
            let doubled = z_mat.scaled(2.0);
            prime_characteristics(g)
                .iter()
                .map(|ch| {
                    let j = null_jet(ch, &doubled)?;
                    Ok((j.value, j.grad_tau.iter().map(|d| d * 2.0).collect()))
                })
                .collect::<Result<_, ThetaError>>()?
        }
    };
    assemble(g, parts, prec)
}

/// Jet of `v2 o F` for the isometric Veronese map `v2`.
pub fn veronese_jet(jet: &MapJet) -> Result<MapJet, FubiniError> {
    let x = &jet.value;
    let value = veronese_coords(x)?;
    let derivs = jet
        .derivs
        .iter()
        .map(|dx| {
            let mut out = Vec::with_capacity(value.len());
            for a in 0..x.len() {
                out.push(2.0 * x[a] * dx[a]);
                for b in (a + 1)..x.len() {
                    out.push((dx[a] * x[b] + x[a] * dx[b]) * std::f64::consts::SQRT_2);
                }
            }
            out
        })
        .collect();
    MapJet::new(value, derivs, jet.coord_labels.clone())
}

/// Relative difference between `(v2 o F)^* omega_FS` and `2 F^* omega_FS`.
pub fn veronese_pullback_residual(jet: &MapJet) -> Result<f64, FubiniError> {
    let base = fs_pullback(jet)?.scaled(2.0);
    fs_pullback(&veronese_jet(jet)?)?.relative_difference(&base)
}

/// Coefficient matrix of a pulled-back Fubini-Study form.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    pub genus: usize,
    /// One-based `(i, j)`, `i <= j`.
    pub coord_labels: Vec<(usize, usize)>,
    pub entries: DMatrix<Complex64>,
}

impl HermitianForm {
    pub fn scaled(&self, factor: f64) -> HermitianForm {
        HermitianForm {
            genus: self.genus,
            coord_labels: self.coord_labels.clone(),
            entries: self.entries.map(|c| c * factor),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `max |H - H^*|`.
    pub fn hermitian_residual(&self) -> f64 {
        (&self.entries - self.entries.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        let sym = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        sym.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Hermitian to `1e-10 (1 + |H|)` and positive semidefinite to
    /// `-1e-9 |H|`.
    pub fn satisfies_invariants(&self) -> bool {
        let scale = self.max_abs();
        self.hermitian_residual() <= 1e-10 * (1.0 + scale) && self.min_eigenvalue() >= -1e-9 * scale
    }

    /// `max |A - B| / max(|A|, |B|)`, zero when both vanish.
    pub fn relative_difference(&self, other: &HermitianForm) -> Result<f64, FubiniError> {
        if self.entries.shape() != other.entries.shape() {
            return Err(FubiniError::Shape("forms of different size".into()));
        }
        let diff = (&self.entries - &other.entries)
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let scale = self.max_abs().max(other.max_abs());
        Ok(if scale > 0.0 { diff / scale } else { 0.0 })
    }

    /// The diagonal coefficient at one-based `(i, j)`.
    pub fn diagonal_at(&self, i: usize, j: usize) -> Option<f64> {
        let key = if i <= j { (i, j) } else { (j, i) };
        let k = self.coord_labels.iter().position(|&l| l == key)?;
        Some(self.entries[(k, k)].re)
    }
}

fn inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

fn norm_sqr(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum()
}

/// `d F - (<dF, F> / |F|^2) F`: the derivative with its component along `F`
/// removed.
fn projected(d: &[Complex64], f: &[Complex64], f2: f64) -> Vec<Complex64> {
    let coeff = inner(d, f) / f2;
    d.iter().zip(f).map(|(a, b)| a - coeff * b).collect()
}

/// `H_ab = <P d_a F, P d_b F> / |F|^2`, which equals
/// `(<d_a F, d_b F> |F|^2 - <d_a F, F> <F, d_b F>) / |F|^4`.
pub fn fs_pullback(jet: &MapJet) -> Result<HermitianForm, FubiniError> {
    let f2 = norm_sqr(&jet.value);
    if !(f2 > 0.0) {
        return Err(FubiniError::ZeroValue);
    }
    let proj: Vec<Vec<Complex64>> = jet.derivs.iter().map(|d| projected(d, &jet.value, f2)).collect();
    let k = proj.len();
    let mut entries = DMatrix::zeros(k, k);
    for a in 0..k {
        entries[(a, a)] = Complex64::new(norm_sqr(&proj[a]) / f2, 0.0);
        for b in (a + 1)..k {
            let h = inner(&proj[a], &proj[b]) / f2;
            entries[(a, b)] = h;
            entries[(b, a)] = h.conj();
        }
    }
    let genus = jet.coord_labels.iter().map(|&(_, j)| j).max().unwrap_or(0);
    Ok(HermitianForm {
        genus,
        coord_labels: jet.coord_labels.clone(),
        entries,
    })
}

/// Pullback form of `map` with the normalization of [`MapId::normalization`].
pub fn map_form(map: MapId, z_mat: &SiegelPoint, prec: &Precision) -> Result<HermitianForm, FubiniError> {
    Ok(fs_pullback(&nullwert_jet(map, z_mat, prec)?)?.scaled(map.normalization()))
}

/// `8 pi (Theta_{g-1})^* omega_FS` at `tau`.
pub fn prym_form(tau: &SiegelPoint, prec: &Precision) -> Result<HermitianForm, FubiniError> {
    map_form(MapId::Second, tau, prec)
}

/// Heat equation residual for `theta_u` at `z = 0`:
/// `max_ij |4 pi i (1 + d_ij) dtheta/dZ_ij - d^2 theta/dz_i dz_j| / (1 + |d^2 theta/dz_i dz_j|)`.
pub fn heat_consistency(u: &[i64], z_mat: &SiegelPoint, prec: &Precision) -> Result<f64, FubiniError> {
    let jet = theta_second_order_jet(u, z_mat, &zeros(u.len()), prec)?;
    Ok(heat_residual(&jet))
}

/// Heat equation residual of a second-order jet.
pub fn heat_residual(jet: &ThetaJet) -> f64 {
    let four_pi_i = Complex64::new(0.0, 4.0 * PI);
    tau_coordinates(jet.genus())
        .into_iter()
        .map(|(i, j)| {
            let delta = if i == j { 2.0 } else { 1.0 };
            let lhs = four_pi_i * delta * jet.tau(i, j);
            let rhs = jet.hess_z[(i, j)];
            (lhs - rhs).norm() / (1.0 + rhs.norm())
        })
        .fold(0.0, f64::max)
}

/// Relative difference of the two sides of the form identity:
/// `8 pi Second* = 4 pi Squared*` (low) or `4 pi Sj* = 8 pi Prime*` (high).
pub fn equivalent_forms_residual(z_mat: &SiegelPoint, side: Side, prec: &Precision) -> Result<f64, FubiniError> {
    let (a, b) = side.maps();
    map_form(a, z_mat, prec)?.relative_difference(&map_form(b, z_mat, prec)?)
}

/// Genus-1 slice through a block-diagonal point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slice {
    /// `diag(y, P')`, moving `Z_11`.
    First,
    /// `diag(P', y)`, moving `Z_gg`.
    Last,
}

fn upper_half_plane(y: Complex64) -> Result<SiegelPoint, FubiniError> {
    if !(y.im > 0.0) {
        return Err(FubiniError::NotInUpperHalfPlane(y));
    }
    Ok(SiegelPoint::from_scalar(y)?)
}

/// The block point of a slice.
pub fn slice_point(pi_prime: &SiegelPoint, y: Complex64, slice: Slice) -> Result<SiegelPoint, FubiniError> {
    let yy = upper_half_plane(y)?;
    Ok(match slice {
        Slice::First => block_diag(&yy, pi_prime),
        Slice::Last => block_diag(pi_prime, &yy),
    })
}

/// `|P dF| / |F|` for `F = theta_null_prime` and `d` the derivative along the
/// slice coordinate.
pub fn restricted_derivative_norm(
    pi_prime: &SiegelPoint,
    y: Complex64,
    slice: Slice,
    prec: &Precision,
) -> Result<f64, FubiniError> {
    let z = slice_point(pi_prime, y, slice)?;
    let g = z.genus();
    let jet = nullwert_jet(MapId::Prime, &z, prec)?;
    let k = match slice {
        Slice::First => jet.coord_index(1, 1),
        Slice::Last => jet.coord_index(g, g),
    }
    .expect("diagonal coordinate present");
    let f2 = norm_sqr(&jet.value);
    Ok((norm_sqr(&projected(&jet.derivs[k], &jet.value, f2)) / f2).sqrt())
}

/// Numerical version of the non-descent argument for `Prime^* omega_FS`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondescentReport {
    pub genus: usize,
    pub y0: [f64; 2],
    /// Projectivized derivative along `Z_11` at `diag(y0, P')`.
    pub first_slice_norm: f64,
    /// Projectivized derivative along `Z_gg` at `diag(P', y0)`.
    pub last_slice_norm: f64,
    /// Diagonal coefficient of `Prime^* omega_FS` along the first slice.
    pub first_slice_form: f64,
    /// Diagonal coefficient of `Prime^* omega_FS` along the last slice.
    pub last_slice_form: f64,
    pub first_slice_threshold: f64,
    pub last_slice_floor: f64,
    /// `max |M . diag(y0, P') - diag(P', y0)|` for the swap matrix `M`.
    pub swap_error: f64,
    pub swap_tolerance: f64,
    pub swap_exchanges_slices: bool,
    pub first_slice_vanishes: bool,
    pub last_slice_nonzero: bool,
    /// The forms on the two slices differ although the swap matrix maps one
    /// slice onto the other.
    pub differ: bool,
}

impl NondescentReport {
    /// Every check of the report passed.
    pub fn conclusive(&self) -> bool {
        self.swap_exchanges_slices && self.differ
    }
}

/// Deterministic slice parameter, uniform in the calibrated box.
pub fn random_slice_parameter(seed: u64) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let re = rng.gen_range(-SLICE_RE_HALF_WIDTH..=SLICE_RE_HALF_WIDTH);
    let im = rng.gen_range(SLICE_IM_RANGE.0..=SLICE_IM_RANGE.1);
    Complex64::new(re, im)
}

pub fn nondescent_report(
    pi_prime: &SiegelPoint,
    y0: Complex64,
    prec: &Precision,
) -> Result<NondescentReport, FubiniError> {
    let first = slice_point(pi_prime, y0, Slice::First)?;
    let last = slice_point(pi_prime, y0, Slice::Last)?;
    let g = first.genus();
    let swapped = sp_action(&swap_matrix(g)?, &first)?;
    let swap_error = (swapped.entries() - last.entries())
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);

    let first_form = fs_pullback(&nullwert_jet(MapId::Prime, &first, prec)?)?;
    let last_form = fs_pullback(&nullwert_jet(MapId::Prime, &last, prec)?)?;
    let first_slice_norm = restricted_derivative_norm(pi_prime, y0, Slice::First, prec)?;
    let last_slice_norm = restricted_derivative_norm(pi_prime, y0, Slice::Last, prec)?;

    let first_slice_vanishes = first_slice_norm <= FIRST_SLICE_THRESHOLD;
    let last_slice_nonzero = last_slice_norm >= LAST_SLICE_FLOOR;
    Ok(NondescentReport {
        genus: g,
        y0: [y0.re, y0.im],
        first_slice_norm,
        last_slice_norm,
        first_slice_form: first_form.diagonal_at(1, 1).unwrap_or(0.0),
        last_slice_form: last_form.diagonal_at(g, g).unwrap_or(0.0),
        first_slice_threshold: FIRST_SLICE_THRESHOLD,
        last_slice_floor: LAST_SLICE_FLOOR,
        swap_error,
        swap_tolerance: SWAP_TOLERANCE,
        swap_exchanges_slices: swap_error <= SWAP_TOLERANCE,
        first_slice_vanishes,
        last_slice_nonzero,
        differ: first_slice_vanishes && last_slice_nonzero,
    })
}

/// Serialized form `{"genus", "labels": [[i, j], ...], "entries": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HermitianFormRecord {
    pub genus: usize,
    pub labels: Vec<[usize; 2]>,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl From<&HermitianForm> for HermitianFormRecord {
    fn from(h: &HermitianForm) -> Self {
        HermitianFormRecord {
            genus: h.genus,
            labels: h.coord_labels.iter().map(|&(i, j)| [i, j]).collect(),
            entries: h
                .entries
                .row_iter()
                .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<HermitianFormRecord> for HermitianForm {
    type Error = FubiniError;

    fn try_from(r: HermitianFormRecord) -> Result<Self, Self::Error> {
        let k = r.labels.len();
        if r.entries.len() != k || r.entries.iter().any(|row| row.len() != k) {
            return Err(FubiniError::Shape("entries do not match labels".into()));
        }
        Ok(HermitianForm {
            genus: r.genus,
            coord_labels: r.labels.iter().map(|l| (l[0], l[1])).collect(),
            entries: DMatrix::from_fn(k, k, |a, b| Complex64::new(r.entries[a][b][0], r.entries[a][b][1])),
        })
    }
}
