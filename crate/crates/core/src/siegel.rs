//! Points of the Siegel upper half space, integer symplectic matrices and
//! their action.
//!
//! A [`SiegelPoint`] is a complex symmetric `g x g` matrix whose imaginary
//! part is positive definite. Symplectic matrices are stored in the row-block
//! convention `[[A, B], [C, D]]` and act by `Z -> (AZ + B)(CZ + D)^-1`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative pivot floor for the positive-definiteness test of `Im Z`.
pub const PIVOT_FLOOR: f64 = 1e-13;

/// Largest accepted condition estimate of `CZ + D` in [`sp_action`].
pub const ACTION_CONDITION_CAP: f64 = 1e12;

/// Largest condition number of `Im Z` produced by [`random_siegel`].
pub const RANDOM_CONDITION_CAP: f64 = 1e4;

/// Floor added to the imaginary part of [`random_siegel`] samples.
pub const RANDOM_IM_FLOOR: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SiegelError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("genus mismatch: expected {expected}, got {got}")]
    GenusMismatch { expected: usize, got: usize },
    #[error("matrix is not symmetric: residual {residual:e} exceeds {allowed:e}")]
    Asymmetric { residual: f64, allowed: f64 },
    #[error("imaginary part is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("symplectic matrices need even dimension, got {0}")]
    OddDimension(usize),
    #[error("matrix does not preserve the standard symplectic form")]
    NotSymplectic,
    #[error("genus {genus} is below the minimum {min}")]
    GenusTooSmall { genus: usize, min: usize },
    #[error("CZ + D is numerically singular (condition estimate {condition:e})")]
    Degenerate { condition: f64 },
}

/// A point of the Siegel upper half space `H_g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SiegelPointRecord", into = "SiegelPointRecord")]
pub struct SiegelPoint {
    entries: DMatrix<Complex64>,
}

impl SiegelPoint {
    /// Validates with the default symmetry tolerance `1e-12`.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self, SiegelError> {
        validate_siegel(entries, 1e-12)
    }

    /// The genus-0 point, neutral for [`block_diag`].
    pub fn empty() -> Self {
        SiegelPoint {
            entries: DMatrix::zeros(0, 0),
        }
    }

    /// `diag(t_1, ..., t_g)` with purely imaginary entries `i t_k`.
    pub fn diagonal_imaginary(diag: &[f64]) -> Result<Self, SiegelError> {
        let g = diag.len();
        let mut m = DMatrix::zeros(g, g);
        for (k, &t) in diag.iter().enumerate() {
            m[(k, k)] = Complex64::new(0.0, t);
        }
        Self::new(m)
    }

    /// `scale * i * I_g`.
    pub fn scaled_identity(g: usize, scale: f64) -> Result<Self, SiegelError> {
        Self::diagonal_imaginary(&vec![scale; g])
    }

    /// A genus-1 point from a single complex number.
    pub fn from_scalar(z: Complex64) -> Result<Self, SiegelError> {
        Self::new(DMatrix::from_element(1, 1, z))
    }

    pub fn genus(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|c| c.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.entries.map(|c| c.im)
    }

    /// Smallest eigenvalue of `Im Z`.
    pub fn min_imag_eigenvalue(&self) -> f64 {
        if self.genus() == 0 {
            return f64::INFINITY;
        }
        self.imag_part()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Eigenvalues of `Im Z` in ascending order.
    pub fn imag_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.imag_part().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `Z` scaled by a positive real factor (used for the `2Z` arguments of
    /// level-two theta functions).
    pub fn scaled(&self, factor: f64) -> SiegelPoint {
        assert!(factor > 0.0, "scale factor must be positive");
        SiegelPoint {
            entries: self.entries.map(|c| c * factor),
        }
    }

    /// Adds `delta` to the single independent coordinate `Z_ij = Z_ji`.
    pub fn perturbed(&self, i: usize, j: usize, delta: Complex64) -> Result<Self, SiegelError> {
        let mut m = self.entries.clone();
        m[(i, j)] += delta;
        if i != j {
            m[(j, i)] += delta;
        }
        Self::new(m)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn symmetry_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            r = r.max((m[(i, j)] - m[(j, i)]).norm());
        }
    }
    r
}

/// Cholesky factorization of a real symmetric matrix; returns the index and
/// value of the first pivot that does not exceed `floor`.
fn cholesky_pivots(a: &DMatrix<f64>, floor: f64) -> Result<DMatrix<f64>, (usize, f64)> {
    let n = a.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > floor) {
            return Err((j, d));
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Checks that `entries` is a point of `H_g` and returns it symmetrized.
///
/// Asymmetry up to `tol * (1 + max |Z_ij|)` is absorbed by replacing the
/// input with `(Z + Z^T) / 2`. Positive definiteness of the imaginary part is
/// tested by a Cholesky factorization whose pivots must exceed
/// `PIVOT_FLOOR * trace(Im Z)`.
pub fn validate_siegel(entries: DMatrix<Complex64>, tol: f64) -> Result<SiegelPoint, SiegelError> {
    let (rows, cols) = entries.shape();
    if rows != cols {
        return Err(SiegelError::NotSquare { rows, cols });
    }
    let scale = entries.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let residual = symmetry_residual(&entries);
    let allowed = tol * (1.0 + scale);
    if residual > allowed {
        return Err(SiegelError::Asymmetric { residual, allowed });
    }
    let sym = (&entries + entries.transpose()) * Complex64::new(0.5, 0.0);
    let im = sym.map(|c| c.im);
    let floor = PIVOT_FLOOR * im.trace().abs();
    if let Err((pivot, value)) = cholesky_pivots(&im, floor) {
        return Err(SiegelError::NotPositiveDefinite { pivot, value });
    }
    Ok(SiegelPoint { entries: sym })
}

/// Wire form `{"genus": g, "entries": [[[re, im], ...], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiegelPointRecord {
    pub genus: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl From<SiegelPoint> for SiegelPointRecord {
    fn from(z: SiegelPoint) -> Self {
        SiegelPointRecord {
            genus: z.genus(),
            entries: z
                .entries
                .row_iter()
                .map(|row| row.iter().map(|c| [c.re, c.im]).collect())
                .collect(),
        }
    }
}

impl TryFrom<SiegelPointRecord> for SiegelPoint {
    type Error = SiegelError;

    fn try_from(r: SiegelPointRecord) -> Result<Self, Self::Error> {
        let rows = r.entries.len();
        if rows != r.genus {
            return Err(SiegelError::GenusMismatch {
                expected: r.genus,
                got: rows,
            });
        }
        if let Some(row) = r.entries.iter().find(|row| row.len() != rows) {
            return Err(SiegelError::NotSquare { rows, cols: row.len() });
        }
        SiegelPoint::new(DMatrix::from_fn(rows, rows, |i, j| {
            Complex64::new(r.entries[i][j][0], r.entries[i][j][1])
        }))
    }
}

/// `diag(Z1, Z2)` in `H_{g1 + g2}`.
pub fn block_diag(z1: &SiegelPoint, z2: &SiegelPoint) -> SiegelPoint {
    let (g1, g2) = (z1.genus(), z2.genus());
    let mut m = DMatrix::zeros(g1 + g2, g1 + g2);
    m.view_mut((0, 0), (g1, g1)).copy_from(&z1.entries);
    m.view_mut((g1, g1), (g2, g2)).copy_from(&z2.entries);
    SiegelPoint { entries: m }
}

/// A `2g x 2g` integer matrix preserving the standard symplectic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticMatrix {
    entries: DMatrix<i64>,
}

impl SymplecticMatrix {
    pub fn new(entries: DMatrix<i64>) -> Result<Self, SiegelError> {
        if symplectic_check(&entries)? {
            Ok(SymplecticMatrix { entries })
        } else {
            Err(SiegelError::NotSymplectic)
        }
    }

    pub fn identity(g: usize) -> Self {
        SymplecticMatrix {
            entries: DMatrix::identity(2 * g, 2 * g),
        }
    }

    /// `J = [[0, I], [-I, 0]]`.
    pub fn standard_form(g: usize) -> Self {
        SymplecticMatrix {
            entries: standard_form(g),
        }
    }

    /// `[[I, B], [0, I]]` for an integer symmetric `B`.
    pub fn translation(b: &DMatrix<i64>) -> Result<Self, SiegelError> {
        let g = b.nrows();
        let mut m = DMatrix::identity(2 * g, 2 * g);
        m.view_mut((0, g), (g, g)).copy_from(b);
        Self::new(m)
    }

    /// `[[U, 0], [0, U^-T]]` for a unimodular `U`, given together with its
    /// inverse transpose.
    pub fn change_of_basis(u: &DMatrix<i64>, u_inv_t: &DMatrix<i64>) -> Result<Self, SiegelError> {
        let g = u.nrows();
        let mut m = DMatrix::zeros(2 * g, 2 * g);
        m.view_mut((0, 0), (g, g)).copy_from(u);
        m.view_mut((g, g), (g, g)).copy_from(u_inv_t);
        Self::new(m)
    }

    pub fn genus(&self) -> usize {
        self.entries.nrows() / 2
    }

    pub fn entries(&self) -> &DMatrix<i64> {
        &self.entries
    }

    /// Matrix product; the symplectic group is closed under it.
    pub fn compose(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix {
            entries: &self.entries * &other.entries,
        }
    }

    /// The blocks `(A, B, C, D)` as complex matrices.
    fn blocks(&self) -> [DMatrix<Complex64>; 4] {
        let g = self.genus();
        let c = self.entries.map(|v| Complex64::new(v as f64, 0.0));
        [
            c.view((0, 0), (g, g)).into_owned(),
            c.view((0, g), (g, g)).into_owned(),
            c.view((g, 0), (g, g)).into_owned(),
            c.view((g, g), (g, g)).into_owned(),
        ]
    }
}

fn standard_form(g: usize) -> DMatrix<i64> {
    let mut j = DMatrix::zeros(2 * g, 2 * g);
    for k in 0..g {
        j[(k, g + k)] = 1;
        j[(g + k, k)] = -1;
    }
    j
}

/// Exact test of `M^T J M = J` in integer arithmetic.
pub fn symplectic_check(m: &DMatrix<i64>) -> Result<bool, SiegelError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(SiegelError::NotSquare { rows, cols });
    }
    if rows % 2 != 0 {
        return Err(SiegelError::OddDimension(rows));
    }
    let j = standard_form(rows / 2);
    Ok(m.transpose() * &j * m == j)
}

/// The matrix `blockdiag(A, A)` with `A = [[0, I_{g-1}], [1, 0]]`.
///
/// It acts on block-diagonal points by moving the leading genus-1 block to
/// the end: `diag(z, P) -> diag(P, z)`.
pub fn swap_matrix(g: usize) -> Result<SymplecticMatrix, SiegelError> {
    if g < 2 {
        return Err(SiegelError::GenusTooSmall { genus: g, min: 2 });
    }
    let mut m = DMatrix::zeros(2 * g, 2 * g);
    for offset in [0, g] {
        for r in 0..g - 1 {
            m[(offset + r, offset + r + 1)] = 1;
        }
        m[(offset + g - 1, offset)] = 1;
    }
    SymplecticMatrix::new(m)
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `Z -> (AZ + B)(CZ + D)^-1`.
pub fn sp_action(m: &SymplecticMatrix, z: &SiegelPoint) -> Result<SiegelPoint, SiegelError> {
    if m.genus() != z.genus() {
        return Err(SiegelError::GenusMismatch {
            expected: m.genus(),
            got: z.genus(),
        });
    }
    let [a, b, c, d] = m.blocks();
    let num = &a * z.entries() + b;
    let den = &c * z.entries() + d;
    let inv = den.clone().try_inverse().ok_or(SiegelError::Degenerate {
        condition: f64::INFINITY,
    })?;
    let condition = one_norm(&den) * one_norm(&inv);
    if !(condition <= ACTION_CONDITION_CAP) {
        return Err(SiegelError::Degenerate { condition });
    }
    // The image is symmetric up to rounding in the inverse.
    validate_siegel(num * inv, 1e-9)
}

/// Deterministic random point `X + i(R^T R + 0.1 I)`.
///
/// `X` is symmetric with entries uniform in `[-spread, spread]` and `R` has
/// entries uniform in `[-1, 1]`. Draws whose imaginary part has condition
/// number above [`RANDOM_CONDITION_CAP`] are rejected and redrawn from the
/// same stream.
pub fn random_siegel(g: usize, seed: u64, spread: f64) -> SiegelPoint {
    assert!(g >= 1, "random_siegel needs genus >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut x = DMatrix::<f64>::zeros(g, g);
        for i in 0..g {
            for j in i..g {
                let v = if spread > 0.0 {
                    rng.gen_range(-spread..=spread)
                } else {
                    0.0
                };
                x[(i, j)] = v;
                x[(j, i)] = v;
            }
        }
        let r = DMatrix::<f64>::from_fn(g, g, |_, _| rng.gen_range(-1.0..=1.0));
        let y = r.transpose() * &r + DMatrix::identity(g, g) * RANDOM_IM_FLOOR;
        let ev = y.clone().symmetric_eigenvalues();
        let (lo, hi) = ev
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        if hi / lo > RANDOM_CONDITION_CAP {
            continue;
        }
        let entries = DMatrix::from_fn(g, g, |i, j| Complex64::new(x[(i, j)], y[(i, j)]));
        if let Ok(p) = SiegelPoint::new(entries) {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn json_roundtrip_is_lossless() {
        let z = random_siegel(3, 17, 1.0);
        let json = serde_json::to_string(&z).unwrap();
        assert!(json.starts_with("{\"genus\":3,\"entries\":[[["));
        let back: SiegelPoint = serde_json::from_str(&json).unwrap();
        assert_eq!(back, z);
        let bad = r#"{"genus":1,"entries":[[[0.0,-1.0]]]}"#;
        assert!(serde_json::from_str::<SiegelPoint>(bad).is_err());
        let short = r#"{"genus":2,"entries":[[[0.0,1.0]]]}"#;
        assert!(serde_json::from_str::<SiegelPoint>(short).is_err());
    }

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_imaginary_part_is_valid() {
        let p = SiegelPoint::scaled_identity(2, 1.0).unwrap();
        assert_eq!(p.genus(), 2);
    }

    #[test]
    fn real_matrix_is_rejected() {
        let err = SiegelPoint::new(DMatrix::from_element(1, 1, c(1.0, 0.0))).unwrap_err();
        assert!(matches!(err, SiegelError::NotPositiveDefinite { pivot: 0, .. }));
    }

    #[test]
    fn failing_pivot_is_reported() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 1.0)]);
        let err = SiegelPoint::new(m).unwrap_err();
        assert!(matches!(err, SiegelError::NotPositiveDefinite { pivot: 1, .. }));
    }

    #[test]
    fn sub_tolerance_asymmetry_is_symmetrized() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.1, 0.0), c(0.1 + 1e-15, 0.0), c(0.0, 1.0)]);
        let p = validate_siegel(m, 1e-12).unwrap();
        assert_eq!(p.entries()[(0, 1)], p.entries()[(1, 0)]);
    }

    #[test]
    fn large_asymmetry_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.1, 0.0), c(0.2, 0.0), c(0.0, 1.0)]);
        assert!(matches!(validate_siegel(m, 1e-12), Err(SiegelError::Asymmetric { .. })));
    }

    #[test]
    fn non_square_is_rejected() {
        let m = DMatrix::from_element(2, 3, c(0.0, 1.0));
        assert!(matches!(
            validate_siegel(m, 1e-12),
            Err(SiegelError::NotSquare { rows: 2, cols: 3 })
        ));
    }

    #[test]
    fn block_diag_of_scalars() {
        let a = SiegelPoint::from_scalar(c(0.0, 1.0)).unwrap();
        let b = SiegelPoint::from_scalar(c(0.0, 2.0)).unwrap();
        let d = block_diag(&a, &b);
        assert_eq!(d, SiegelPoint::diagonal_imaginary(&[1.0, 2.0]).unwrap());
        assert_eq!(block_diag(&d, &SiegelPoint::empty()), d);
        assert_eq!(block_diag(&SiegelPoint::empty(), &d), d);
    }

    #[test]
    fn block_diag_imaginary_spectrum_is_union() {
        let a = random_siegel(2, 3, 0.5);
        let b = random_siegel(1, 4, 0.5);
        let mut expected = a.imag_eigenvalues();
        expected.extend(b.imag_eigenvalues());
        expected.sort_by(f64::total_cmp);
        let got = block_diag(&a, &b).imag_eigenvalues();
        for (x, y) in expected.iter().zip(&got) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_matrix_shapes() {
        let m2 = swap_matrix(2).unwrap();
        let a2 = DMatrix::from_row_slice(2, 2, &[0, 1, 1, 0]);
        assert_eq!(m2.entries().view((0, 0), (2, 2)).into_owned(), a2);
        assert_eq!(m2.entries().view((2, 2), (2, 2)).into_owned(), a2);
        let m3 = swap_matrix(3).unwrap();
        let a3 = DMatrix::from_row_slice(3, 3, &[0, 1, 0, 0, 0, 1, 1, 0, 0]);
        assert_eq!(m3.entries().view((0, 0), (3, 3)).into_owned(), a3);
        assert_eq!(&a3.transpose() * &a3, DMatrix::identity(3, 3));
        assert!(matches!(swap_matrix(1), Err(SiegelError::GenusTooSmall { .. })));
        for g in 2..8 {
            assert!(symplectic_check(swap_matrix(g).unwrap().entries()).unwrap());
        }
    }

    #[test]
    fn symplectic_check_cases() {
        assert!(symplectic_check(&DMatrix::identity(4, 4)).unwrap());
        assert!(symplectic_check(&standard_form(3)).unwrap());
        assert!(!symplectic_check(&(DMatrix::identity(4, 4) * 2)).unwrap());
        assert!(matches!(
            symplectic_check(&DMatrix::identity(3, 3)),
            Err(SiegelError::OddDimension(3))
        ));
    }

    #[test]
    fn action_of_identity_and_j() {
        let z = random_siegel(3, 9, 1.0);
        let w = sp_action(&SymplecticMatrix::identity(3), &z).unwrap();
        assert!((w.entries() - z.entries()).norm() < 1e-14);
        let i2 = SiegelPoint::scaled_identity(2, 1.0).unwrap();
        let w = sp_action(&SymplecticMatrix::standard_form(2), &i2).unwrap();
        assert!((w.entries() - i2.entries()).norm() < 1e-14);
    }

    #[test]
    fn swap_moves_leading_block_to_the_end() {
        for g in 2..=4 {
            for seed in 0..5 {
                let z = random_siegel(1, seed, 1.0);
                let p = random_siegel(g - 1, 100 + seed, 1.0);
                let image = sp_action(&swap_matrix(g).unwrap(), &block_diag(&z, &p)).unwrap();
                let target = block_diag(&p, &z);
                let err = (image.entries() - target.entries()).camax();
                assert!(err <= 1e-12, "g={g} seed={seed} err={err}");
            }
        }
    }

    #[test]
    fn genus_mismatch_in_action() {
        let z = random_siegel(2, 1, 1.0);
        assert!(matches!(
            sp_action(&SymplecticMatrix::identity(3), &z),
            Err(SiegelError::GenusMismatch { .. })
        ));
    }

    #[test]
    fn random_points_are_deterministic_and_valid() {
        let a = random_siegel(3, 42, 0.7);
        let b = random_siegel(3, 42, 0.7);
        assert_eq!(a, b);
        assert!(validate_siegel(a.entries().clone(), 1e-14).is_ok());
        for seed in 0..50 {
            let p = random_siegel(1, seed, 2.0);
            assert!(p.entries()[(0, 0)].im >= RANDOM_IM_FLOOR);
            let ev = random_siegel(3, seed, 2.0).imag_eigenvalues();
            assert!(ev[2] / ev[0] <= RANDOM_CONDITION_CAP);
        }
    }
}
