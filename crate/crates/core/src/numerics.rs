//! Dense complex linear algebra for small matrices (N up to a few dozen).
//!
//! Everything is row-major `Vec<Complex64>` storage with partial-pivot LU
//! behind `invert`, `solve`, and `determinant`. The singularity threshold is
//! relative to the Frobenius norm so that genuine band-edge singularities are
//! distinguished from round-off.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Relative pivot threshold below which a matrix is reported singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-14;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    /// Build from row-major data. Rejects empty shapes, length mismatches,
    /// and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Validation("matrix must be at least 1x1".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Convenience constructor from nested rows (panics on ragged input).
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(r > 0 && c > 0, "from_rows: empty matrix");
        assert!(
            rows.iter().all(|row| row.len() == c),
            "from_rows: ragged rows"
        );
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(C64::conj).collect(),
        }
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matrix product dimension mismatch ({}x{} * {}x{})",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(l, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self[(i, j)] * v[j])
                    .sum::<C64>()
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * z).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Copy of the matrix with the listed rows and columns removed.
    pub fn without(&self, drop_rows: &[usize], drop_cols: &[usize]) -> Self {
        let keep_r: Vec<usize> = (0..self.rows).filter(|i| !drop_rows.contains(i)).collect();
        let keep_c: Vec<usize> = (0..self.cols).filter(|j| !drop_cols.contains(j)).collect();
        assert!(!keep_r.is_empty() && !keep_c.is_empty(), "without: nothing left");
        Self::from_fn(keep_r.len(), keep_c.len(), |i, j| self[(keep_r[i], keep_c[j])])
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl std::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Partial-pivot LU factorization. Always completes; callers decide whether
/// the smallest pivot disqualifies the factorization.
struct LuFactors {
    n: usize,
    lu: Vec<C64>,
    perm: Vec<usize>,
    swaps: usize,
    min_pivot: f64,
}

fn lu_factor(m: &CMatrix) -> LuFactors {
    assert!(m.is_square(), "LU requires a square matrix");
    let n = m.rows();
    let mut lu = m.data.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut swaps = 0;
    let mut min_pivot = f64::INFINITY;
    for col in 0..n {
        let (best, best_mag) = (col..n)
            .map(|r| (r, lu[r * n + col].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best != col {
            for j in 0..n {
                lu.swap(col * n + j, best * n + j);
            }
            perm.swap(col, best);
            swaps += 1;
        }
        min_pivot = min_pivot.min(best_mag);
        if best_mag == 0.0 {
            // Whole column is zero below the diagonal; nothing to eliminate.
            continue;
        }
        let pivot = lu[col * n + col];
        for r in col + 1..n {
            let factor = lu[r * n + col] / pivot;
            lu[r * n + col] = factor;
            for j in col + 1..n {
                let sub = factor * lu[col * n + j];
                lu[r * n + j] -= sub;
            }
        }
    }
    LuFactors {
        n,
        lu,
        perm,
        swaps,
        min_pivot,
    }
}

impl LuFactors {
    fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[i * n + j] * x[j];
                x[i] -= sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[i * n + j] * x[j];
                x[i] -= sub;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    fn det(&self) -> C64 {
        let sign = if self.swaps % 2 == 0 { 1.0 } else { -1.0 };
        (0..self.n)
            .map(|i| self.lu[i * self.n + i])
            .product::<C64>()
            * sign
    }
}

fn singularity_gate(m: &CMatrix, f: &LuFactors) -> Result<()> {
    let threshold = SINGULARITY_THRESHOLD * m.frobenius_norm();
    if f.min_pivot < threshold {
        return Err(Error::SingularMatrix {
            pivot: f.min_pivot,
            threshold,
        });
    }
    Ok(())
}

/// Inverse via partial-pivot LU.
pub fn invert(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let f = lu_factor(m);
    singularity_gate(m, &f)?;
    let n = m.rows();
    let mut out = CMatrix::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for col in 0..n {
        e[col] = C64::new(1.0, 0.0);
        let x = f.solve(&e);
        e[col] = C64::new(0.0, 0.0);
        for row in 0..n {
            out[(row, col)] = x[row];
        }
    }
    Ok(out)
}

/// Solve m x = b via partial-pivot LU.
pub fn solve(m: &CMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "cannot solve with {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    if b.len() != m.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} does not match matrix size {}",
            b.len(),
            m.rows()
        )));
    }
    let f = lu_factor(m);
    singularity_gate(m, &f)?;
    Ok(f.solve(b))
}

/// Determinant via LU. Near-singular input yields a near-zero value rather
/// than an error; only non-square input panics.
pub fn determinant(m: &CMatrix) -> C64 {
    lu_factor(m).det()
}

/// Determinant of the submatrix with the given rows and columns removed.
pub fn minor_det(m: &CMatrix, drop_rows: &[usize], drop_cols: &[usize]) -> C64 {
    if drop_rows.len() == m.rows() {
        return C64::new(1.0, 0.0); // empty minor, by convention
    }
    determinant(&m.without(drop_rows, drop_cols))
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.frobenius_norm()
}

/// True when ||u u^dag - 1||_F <= tol.
pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let id = CMatrix::identity(m.rows());
    m.mul(&m.dagger()).sub(&id).frobenius_norm() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn approx_mat(a: &CMatrix, b: &CMatrix, tol: f64) {
        let diff = a.sub(b).frobenius_norm();
        assert!(diff <= tol, "matrices differ by {diff:.3e} (tol {tol:.1e})\n{a:?}\n{b:?}");
    }

    #[test]
    fn invert_identity() {
        let i3 = CMatrix::identity(3);
        approx_mat(&invert(&i3).unwrap(), &i3, 1e-14);
    }

    #[test]
    fn invert_offdiagonal_swap() {
        // [[0,J],[J,0]] with J=1 is its own inverse; zero leading pivot
        // exercises the row exchange.
        let m = CMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
        approx_mat(&invert(&m).unwrap(), &m, 1e-14);
    }

    #[test]
    fn invert_matches_three_resonator_closed_form() {
        // Delta = H_c - (2J cos k) 1 for the {i gamma, -i gamma, 0} center with
        // flux phi; its inverse has a known closed form at ports (1, 3).
        let j = 1.0;
        for &(gamma, phi, k) in &[
            (0.7, 0.9, -1.1),
            (1.3, -2.0, -0.4),
            (0.2, 2.3, -2.7),
            (1.0, 0.3, -PI / 2.0),
        ] {
            let eik = C64::from_polar(1.0, k);
            let e2ik = C64::from_polar(1.0, 2.0 * k);
            let eiphi = C64::from_polar(1.0, phi);
            let two_j_cos_k = 2.0 * j * k.cos();
            let delta = CMatrix::from_rows(&[
                vec![c(-two_j_cos_k, gamma), c(j, 0.), c(j, 0.)],
                vec![c(j, 0.), c(-two_j_cos_k, -gamma), j * eiphi.conj()],
                vec![c(j, 0.), j * eiphi, c(-two_j_cos_k, 0.)],
            ]);
            let det = j.powi(3)
                * (eiphi.conj() + eiphi
                    - e2ik.conj() * eik.conj()
                    - e2ik * eik
                    - (gamma * gamma / (j * j)) * (eik.conj() + eik));
            assert!((determinant(&delta) - det).norm() < 1e-12 * det.norm().max(1.0));

            let inv = invert(&delta).unwrap();
            let pref = c(j * j, 0.) / det;
            let cos2 = e2ik + e2ik.conj();
            let igj = c(0., gamma / j);
            let expected_mm = pref * (c(1., 0.) + cos2 + igj * (eik + eik.conj()));
            let expected_mn = pref * (eik + eik.conj() + eiphi.conj() + igj);
            let expected_nm = pref * (eik + eik.conj() + eiphi + igj);
            let expected_nn = pref * (c(1., 0.) + cos2 + c((gamma / j).powi(2), 0.));
            for (got, want) in [
                (inv[(0, 0)], expected_mm),
                (inv[(0, 2)], expected_mn),
                (inv[(2, 0)], expected_nm),
                (inv[(2, 2)], expected_nn),
            ] {
                assert!(
                    (got - want).norm() <= 1e-10 * want.norm().max(1.0),
                    "gamma={gamma} phi={phi} k={k}: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn invert_reports_singular() {
        let m = CMatrix::from_rows(&[vec![c(1., 0.), c(2., 0.)], vec![c(2., 0.), c(4., 0.)]]);
        match invert(&m) {
            Err(Error::SingularMatrix { .. }) => {}
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn solve_trivial() {
        let i2 = CMatrix::identity(2);
        let b = vec![c(1., 2.), c(-3., 0.5)];
        assert_eq!(solve(&i2, &b).unwrap(), b);

        let m = CMatrix::from_rows(&[vec![c(2., 0.), c(0., 0.)], vec![c(0., 0.), c(2., 0.)]]);
        let x = solve(&m, &[c(1., 0.), c(1., 0.)]).unwrap();
        assert!((x[0] - c(0.5, 0.)).norm() < 1e-15);
        assert!((x[1] - c(0.5, 0.)).norm() < 1e-15);
    }

    #[test]
    fn solve_roundtrip_6x6() {
        let mut seed = 12345u64;
        let mut next = move || {
            // xorshift, good enough for a fixed test matrix
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        let m = CMatrix::from_fn(6, 6, |_, _| c(next(), next()));
        let x_true: Vec<C64> = (0..6).map(|_| c(next(), next())).collect();
        let b = m.mul_vec(&x_true);
        let x = solve(&m, &b).unwrap();
        let err: f64 = x
            .iter()
            .zip(&x_true)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "roundtrip error {err:.3e}");
    }

    #[test]
    fn frobenius_values() {
        assert_eq!(CMatrix::zeros(3, 4).frobenius_norm(), 0.0);
        assert!((CMatrix::identity(9).frobenius_norm() - 3.0).abs() < 1e-15);
        let m = CMatrix::from_rows(&[vec![c(3., 0.), c(0., 4.)], vec![c(0., 0.), c(0., 0.)]]);
        assert!((m.frobenius_norm() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn unitary_predicate() {
        assert!(is_unitary(&CMatrix::identity(4), 1e-10));
        let phase = CMatrix::from_rows(&[
            vec![c(0., 0.), C64::from_polar(1.0, 0.3)],
            vec![C64::from_polar(1.0, -1.2), c(0., 0.)],
        ]);
        assert!(is_unitary(&phase, 1e-10));
        let not = CMatrix::from_rows(&[vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(0.5, 0.)]]);
        assert!(!is_unitary(&not, 1e-10));
    }

    #[test]
    fn minor_det_drops_rows_and_cols() {
        let m = CMatrix::from_rows(&[
            vec![c(1., 0.), c(2., 0.), c(3., 0.)],
            vec![c(4., 0.), c(5., 0.), c(6., 0.)],
            vec![c(7., 0.), c(8., 0.), c(10., 0.)],
        ]);
        // deleting row 0 and col 0 leaves [[5,6],[8,10]], det = 2
        let d = minor_det(&m, &[0], &[0]);
        assert!((d - c(2., 0.)).norm() < 1e-12);
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            CMatrix::new(n, n, v.into_iter().map(|(re, im)| c(re, im)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn invert_is_involutive(m in arb_matrix(4)) {
            // shift the diagonal to keep the draw well-conditioned
            let m = m.add(&CMatrix::identity(4).scale(c(3.0, 0.0)));
            let inv = invert(&m).unwrap();
            let back = invert(&inv).unwrap();
            let rel = back.sub(&m).frobenius_norm() / m.frobenius_norm();
            prop_assert!(rel < 1e-9);
            let resid = m.mul(&inv).sub(&CMatrix::identity(4)).frobenius_norm();
            prop_assert!(resid <= 1e-10 * (m.frobenius_norm() * inv.frobenius_norm()).max(1.0));
        }

        #[test]
        fn solve_agrees_with_inverse(m in arb_matrix(5), b in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5)) {
            let m = m.add(&CMatrix::identity(5).scale(c(3.0, 0.0)));
            let b: Vec<C64> = b.into_iter().map(|(re, im)| c(re, im)).collect();
            let x = solve(&m, &b).unwrap();
            let y = invert(&m).unwrap().mul_vec(&b);
            let scale: f64 = x.iter().map(|z| z.norm()).sum::<f64>().max(1.0);
            let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-9 * scale);
            let resid: f64 = m
                .mul_vec(&x)
                .iter()
                .zip(&b)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            let xnorm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let bnorm: f64 = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(resid <= 1e-10 * (m.frobenius_norm() * xnorm + bnorm));
        }
    }
}
