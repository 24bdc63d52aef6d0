//! Problem instances: coefficient storage, validation, objective evaluation and
//! random generation.
//!
//! An instance is `minimize w^T Q w + w^T c` over `w` in `S^N` for a
//! [`LevelSet`] `S`. Coefficients are either exact integers (`i128`, all
//! arithmetic checked so overflow is an error rather than a wraparound) or
//! `f64`. Instances are immutable after construction and safe to share across
//! concurrent solver runs.

use crate::error::{Error, Result};
use crate::level_set::LevelSet;
use crate::spectral;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Coefficient domain tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Int,
    Real,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Int => write!(f, "int"),
            Domain::Real => write!(f, "real"),
        }
    }
}

/// Coefficient scalar. Implemented for `i128` (exact, checked) and `f64`.
pub trait Scalar: Copy + PartialOrd + PartialEq + fmt::Display + fmt::Debug + 'static {
    const ZERO: Self;

    fn try_add(self, rhs: Self) -> Result<Self>;
    fn try_sub(self, rhs: Self) -> Result<Self>;
    fn try_mul(self, rhs: Self) -> Result<Self>;
    fn abs_val(self) -> Self;
    /// Embed a level value into the coefficient domain.
    fn from_level(level: i64) -> Self;
    fn to_f64(self) -> f64;
    /// Exact integer value, if this scalar is one (`None` in the real domain).
    fn to_exact_int(self) -> Option<i128>;
    fn parse(text: &str) -> Option<Self>;
    fn domain() -> Domain;
}

impl Scalar for i128 {
    const ZERO: Self = 0;

    fn try_add(self, rhs: Self) -> Result<Self> {
        self.checked_add(rhs).ok_or(Error::Overflow("addition"))
    }
    fn try_sub(self, rhs: Self) -> Result<Self> {
        self.checked_sub(rhs).ok_or(Error::Overflow("subtraction"))
    }
    fn try_mul(self, rhs: Self) -> Result<Self> {
        self.checked_mul(rhs)
            .ok_or(Error::Overflow("multiplication"))
    }
    fn abs_val(self) -> Self {
        self.abs()
    }
    fn from_level(level: i64) -> Self {
        level as i128
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn to_exact_int(self) -> Option<i128> {
        Some(self)
    }
    fn parse(text: &str) -> Option<Self> {
        text.parse().ok()
    }
    fn domain() -> Domain {
        Domain::Int
    }
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;

    fn try_add(self, rhs: Self) -> Result<Self> {
        Ok(self + rhs)
    }
    fn try_sub(self, rhs: Self) -> Result<Self> {
        Ok(self - rhs)
    }
    fn try_mul(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs)
    }
    fn abs_val(self) -> Self {
        self.abs()
    }
    fn from_level(level: i64) -> Self {
        level as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn to_exact_int(self) -> Option<i128> {
        None
    }
    fn parse(text: &str) -> Option<Self> {
        let v: f64 = text.parse().ok()?;
        v.is_finite().then_some(v)
    }
    fn domain() -> Domain {
        Domain::Real
    }
}

/// A quadratic program `minimize w^T Q w + w^T c` over `w` in `S^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpInstance<T> {
    n: usize,
    q: Vec<T>, // row-major N x N
    c: Vec<T>,
    levels: LevelSet,
    psd_declared: bool,
}

impl<T: Scalar> QpInstance<T> {
    /// Build an instance from row-major `q` of length `n*n` and `c` of length `n`.
    ///
    /// Only shape is checked here; deeper invariants (symmetry, level set order,
    /// positive semi-definiteness) are inspected by [`QpInstance::validate`] so
    /// that violations can be reported rather than silently rejected.
    pub fn new(
        n: usize,
        q: Vec<T>,
        c: Vec<T>,
        levels: LevelSet,
        psd_declared: bool,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if q.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: q.len(),
            });
        }
        if c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c.len(),
            });
        }
        Ok(Self {
            n,
            q,
            c,
            levels,
            psd_declared,
        })
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(
        q: Vec<Vec<T>>,
        c: Vec<T>,
        levels: LevelSet,
        psd_declared: bool,
    ) -> Result<Self> {
        let n = q.len();
        let mut flat = Vec::with_capacity(n * n);
        for row in &q {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::new(n, flat, c, levels, psd_declared)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q_at(&self, i: usize, j: usize) -> T {
        self.q[i * self.n + j]
    }

    pub fn q_row(&self, i: usize) -> &[T] {
        &self.q[i * self.n..(i + 1) * self.n]
    }

    pub fn q_raw(&self) -> &[T] {
        &self.q
    }

    pub fn c(&self) -> &[T] {
        &self.c
    }

    pub fn levels(&self) -> &LevelSet {
        &self.levels
    }

    pub fn psd_declared(&self) -> bool {
        self.psd_declared
    }

    pub fn domain(&self) -> Domain {
        T::domain()
    }

    /// Largest absolute coefficient of `Q` and of `c`.
    pub fn max_abs_coefficients(&self) -> (T, T) {
        let fold = |xs: &[T]| {
            xs.iter()
                .map(|v| v.abs_val())
                .fold(T::ZERO, |a, b| if b > a { b } else { a })
        };
        (fold(&self.q), fold(&self.c))
    }

    /// Objective `w^T Q w + w^T c` for an assignment over the level set.
    ///
    /// Exact in the integer domain: overflow is reported, never wrapped.
    pub fn objective(&self, w: &[i64]) -> Result<T> {
        self.check_assignment(w)?;
        let tw: Vec<T> = w.iter().map(|&v| T::from_level(v)).collect();
        self.quadratic_value_unchecked(&tw)
    }

    /// Membership and dimension checks for an assignment vector.
    pub fn check_assignment(&self, w: &[i64]) -> Result<()> {
        if w.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: w.len(),
            });
        }
        for (index, &value) in w.iter().enumerate() {
            if !self.levels.contains(value) {
                return Err(Error::NotInS { index, value });
            }
        }
        Ok(())
    }

    /// Quadratic form `w^T Q w + w^T c` for an arbitrary coefficient-domain
    /// vector, without level-set membership checks. Used for continuous
    /// baselines and identity tests.
    pub fn quadratic_value(&self, w: &[T]) -> Result<T> {
        if w.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: w.len(),
            });
        }
        self.quadratic_value_unchecked(w)
    }

    fn quadratic_value_unchecked(&self, w: &[T]) -> Result<T> {
        let mut total = T::ZERO;
        for i in 0..self.n {
            let mut row_dot = T::ZERO;
            for (qij, &wj) in self.q_row(i).iter().zip(w) {
                row_dot = row_dot.try_add(qij.try_mul(wj)?)?;
            }
            total = total.try_add(w[i].try_mul(row_dot)?)?;
            total = total.try_add(self.c[i].try_mul(w[i])?)?;
        }
        Ok(total)
    }

    /// Check every instance invariant, returning a report instead of failing
    /// on the first problem.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        if self.levels.len() < 2 {
            report.violations.push(Violation::LevelSetTooSmall {
                len: self.levels.len(),
            });
        }
        if let Some(position) = self.levels.first_order_violation() {
            report
                .violations
                .push(Violation::LevelSetNotIncreasing { position });
        }

        let mut symmetric = true;
        'symmetry: for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.q_at(i, j) != self.q_at(j, i) {
                    report
                        .violations
                        .push(Violation::AsymmetricQ { row: i, col: j });
                    symmetric = false;
                    break 'symmetry;
                }
            }
        }

        // PSD is only meaningful for symmetric matrices
        if self.psd_declared && symmetric {
            self.check_psd(&mut report);
        }
        report
    }

    fn check_psd(&self, report: &mut ValidationReport) {
        if T::domain() == Domain::Int && self.n <= EXACT_PSD_MAX_DIM {
            let q: Vec<i128> = self.q.iter().map(|v| v.to_exact_int().unwrap()).collect();
            if let Some(subset) = first_negative_principal_minor(&q, self.n) {
                report.violations.push(Violation::NotPsd { subset });
            }
            return;
        }
        // Larger or real-valued instances: numeric estimate, warning only.
        let qf: Vec<f64> = self.q.iter().map(|v| v.to_f64()).collect();
        let norm_inf = (0..self.n)
            .map(|i| {
                qf[i * self.n..(i + 1) * self.n]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        if norm_inf == 0.0 {
            return;
        }
        let lambda_min = spectral::symmetric_lambda_min(&qf, self.n, 1e-9);
        if lambda_min < -1e-8 * norm_inf {
            report.warnings.push(format!(
                "declared PSD but smallest eigenvalue estimate {lambda_min:.6e} is below -1e-8 * |Q|_inf = {:.6e}",
                -1e-8 * norm_inf
            ));
        }
    }
}

/// Exact principal-minor checking is limited to this dimension (2^12 minors).
pub const EXACT_PSD_MAX_DIM: usize = 12;

impl QpInstance<i128> {
    /// Random exact-integer instance with `Q = A^T A` for `A` uniform in
    /// `[-entry_bound, entry_bound]`, so `Q` is PSD by construction, and `c`
    /// uniform in `[-2 b^2, 2 b^2]`. Deterministic for a given seed.
    pub fn random_psd(n: usize, levels: LevelSet, seed: u64, entry_bound: i64) -> Result<Self> {
        if n == 0 || entry_bound < 1 {
            return Err(Error::InvalidArgument(
                "need n >= 1 and entry_bound >= 1".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = entry_bound as i128;
        let a: Vec<i128> = (0..n * n).map(|_| rng.gen_range(-b..=b)).collect();
        let mut q = vec![0i128; n * n];
        for i in 0..n {
            for j in i..n {
                let mut dot = 0i128;
                for k in 0..n {
                    dot = dot.try_add(a[k * n + i].try_mul(a[k * n + j])?)?;
                }
                q[i * n + j] = dot;
                q[j * n + i] = dot;
            }
        }
        let c_bound = 2 * b * b;
        let c: Vec<i128> = (0..n).map(|_| rng.gen_range(-c_bound..=c_bound)).collect();
        Self::new(n, q, c, levels, true)
    }
}

/// An assignment vector together with its objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<T> {
    pub w: Vec<i64>,
    pub objective: T,
}

impl<T: Scalar> Assignment<T> {
    /// Evaluate `w` on the instance and package the pair.
    pub fn evaluated(inst: &QpInstance<T>, w: Vec<i64>) -> Result<Self> {
        let objective = inst.objective(&w)?;
        Ok(Self { w, objective })
    }
}

/// One violated invariant found by [`QpInstance::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    AsymmetricQ {
        row: usize,
        col: usize,
    },
    LevelSetTooSmall {
        len: usize,
    },
    LevelSetNotIncreasing {
        position: usize,
    },
    /// A principal minor of `Q` is negative; `subset` lists the rows/columns.
    NotPsd {
        subset: Vec<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::AsymmetricQ { row, col } => {
                write!(f, "Q is asymmetric at ({row}, {col})")
            }
            Violation::LevelSetTooSmall { len } => {
                write!(f, "level set has {len} values, need at least 2")
            }
            Violation::LevelSetNotIncreasing { position } => write!(
                f,
                "level set is not strictly increasing at position {position}"
            ),
            Violation::NotPsd { subset } => write!(
                f,
                "declared PSD but principal minor on rows {subset:?} is negative"
            ),
        }
    }
}

/// Validation outcome: hard violations plus numeric warnings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.warnings.is_empty()
    }
}

/// First subset of indices whose principal minor is negative, or `None` when
/// all `2^n - 1` principal minors are non-negative (the exact PSD criterion
/// for symmetric matrices).
fn first_negative_principal_minor(q: &[i128], n: usize) -> Option<Vec<usize>> {
    assert!(n <= EXACT_PSD_MAX_DIM);
    for mask in 1u32..(1u32 << n) {
        let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let k = subset.len();
        let mut m: Vec<BigInt> = Vec::with_capacity(k * k);
        for &r in &subset {
            for &c in &subset {
                m.push(BigInt::from(q[r * n + c]));
            }
        }
        if bareiss_determinant(&mut m, k) < BigInt::zero() {
            return Some(subset);
        }
    }
    None
}

/// Exact determinant by fraction-free (Bareiss) elimination with row pivoting.
fn bareiss_determinant(m: &mut [BigInt], k: usize) -> BigInt {
    if k == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for i in 0..k - 1 {
        if m[i * k + i].is_zero() {
            let Some(p) = ((i + 1)..k).find(|&r| !m[r * k + i].is_zero()) else {
                return BigInt::zero();
            };
            for c in 0..k {
                m.swap(i * k + c, p * k + c);
            }
            negate = !negate;
        }
        for r in (i + 1)..k {
            for c in (i + 1)..k {
                let num = &m[r * k + c] * &m[i * k + i] - &m[r * k + i] * &m[i * k + c];
                m[r * k + c] = num / &prev; // exact by the Sylvester identity
            }
            m[r * k + i] = BigInt::zero();
        }
        prev = m[i * k + i].clone();
    }
    let det = m[(k - 1) * k + (k - 1)].clone();
    if negate {
        -det
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(values: &[i64]) -> LevelSet {
        LevelSet::new(values.to_vec()).unwrap()
    }

    /// Independent triple-loop oracle for the objective.
    fn naive_objective(q: &[Vec<i128>], c: &[i128], w: &[i64]) -> i128 {
        let n = c.len();
        let mut total = 0i128;
        for i in 0..n {
            for j in 0..n {
                total += q[i][j] * w[i] as i128 * w[j] as i128;
            }
            total += c[i] * w[i] as i128;
        }
        total
    }

    #[test]
    fn identity_instance_is_clean() {
        let inst =
            QpInstance::from_rows(vec![vec![1, 0], vec![0, 1]], vec![0, 0], set(&[0, 1]), true)
                .unwrap();
        assert!(inst.validate().is_clean());
    }

    #[test]
    fn asymmetry_reported_at_first_pair() {
        let inst = QpInstance::from_rows(
            vec![vec![0, 1], vec![0, 0]],
            vec![0, 0],
            set(&[0, 1]),
            false,
        )
        .unwrap();
        let report = inst.validate();
        assert_eq!(
            report.violations,
            vec![Violation::AsymmetricQ { row: 0, col: 1 }]
        );
    }

    #[test]
    fn negative_one_by_one_fails_psd() {
        let inst = QpInstance::from_rows(vec![vec![-1]], vec![0], set(&[0, 1]), true).unwrap();
        let report = inst.validate();
        assert_eq!(
            report.violations,
            vec![Violation::NotPsd { subset: vec![0] }]
        );
    }

    #[test]
    fn psd_needs_all_principal_minors() {
        // [[0,0],[0,-1]]: both leading minors are 0, but the {1} minor is -1.
        let inst = QpInstance::from_rows(
            vec![vec![0, 0], vec![0, -1]],
            vec![0, 0],
            set(&[0, 1]),
            true,
        )
        .unwrap();
        let report = inst.validate();
        assert_eq!(
            report.violations,
            vec![Violation::NotPsd { subset: vec![1] }]
        );
    }

    #[test]
    fn invalid_level_set_reported() {
        let inst = QpInstance::from_rows(
            vec![vec![1]],
            vec![0],
            LevelSet::new_unchecked(vec![2, 1]),
            false,
        )
        .unwrap();
        let report = inst.validate();
        assert_eq!(
            report.violations,
            vec![Violation::LevelSetNotIncreasing { position: 0 }]
        );

        let single = QpInstance::from_rows(
            vec![vec![1]],
            vec![0],
            LevelSet::new_unchecked(vec![2]),
            false,
        )
        .unwrap();
        assert_eq!(
            single.validate().violations,
            vec![Violation::LevelSetTooSmall { len: 1 }]
        );
    }

    #[test]
    fn objective_examples() {
        // zero vector annihilates both terms
        let inst = QpInstance::from_rows(
            vec![vec![2, -1], vec![-1, 2]],
            vec![0, 0],
            set(&[0, 1]),
            true,
        )
        .unwrap();
        assert_eq!(inst.objective(&[0, 0]).unwrap(), 0);
        // 2 - 1 - 1 + 2 = 2
        assert_eq!(inst.objective(&[1, 1]).unwrap(), 2);

        // 2 - 3 = -1
        let one = QpInstance::from_rows(vec![vec![2]], vec![-3], set(&[0, 1]), true).unwrap();
        assert_eq!(one.objective(&[1]).unwrap(), -1);
    }

    #[test]
    fn objective_errors() {
        let inst = QpInstance::from_rows(vec![vec![1]], vec![0], set(&[0, 1]), true).unwrap();
        assert_eq!(
            inst.objective(&[0, 1]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
        assert_eq!(
            inst.objective(&[5]),
            Err(Error::NotInS { index: 0, value: 5 })
        );
    }

    #[test]
    fn objective_overflow_is_an_error() {
        let big = i128::MAX / 2;
        let inst = QpInstance::from_rows(
            vec![vec![big, big], vec![big, big]],
            vec![0, 0],
            set(&[0, 3]),
            false,
        )
        .unwrap();
        assert!(matches!(inst.objective(&[3, 3]), Err(Error::Overflow(_))));
    }

    #[test]
    fn objective_matches_triple_loop_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let levels = set(&[-2, 0, 1, 4]);
        for _ in 0..50 {
            let n = rng.gen_range(1..=6);
            let inst = QpInstance::random_psd(n, levels.clone(), rng.gen(), 7).unwrap();
            let w: Vec<i64> = (0..n)
                .map(|_| levels.value_at(rng.gen_range(0..levels.len())))
                .collect();
            let rows: Vec<Vec<i128>> = (0..n).map(|i| inst.q_row(i).to_vec()).collect();
            assert_eq!(
                inst.objective(&w).unwrap(),
                naive_objective(&rows, inst.c(), &w)
            );
        }
    }

    #[test]
    fn random_instances_are_deterministic_and_clean() {
        let a = QpInstance::random_psd(5, set(&[0, 1, 2]), 42, 3).unwrap();
        let b = QpInstance::random_psd(5, set(&[0, 1, 2]), 42, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.validate().is_clean());
        assert!(a.psd_declared());
    }

    #[test]
    fn random_one_by_one_with_unit_bound() {
        // A in {-1, 0, 1} so Q = A^T A in {0, 1}
        for seed in 0..20 {
            let inst = QpInstance::random_psd(1, set(&[0, 1]), seed, 1).unwrap();
            assert!(inst.q_at(0, 0) == 0 || inst.q_at(0, 0) == 1);
            assert!(inst.c()[0].abs() <= 2);
        }
    }

    #[test]
    fn symmetrization_is_a_no_op_on_symmetric_q() {
        let inst = QpInstance::random_psd(4, set(&[0, 1, 2]), 9, 5).unwrap();
        let n = inst.n();
        let sym: Vec<i128> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                // entries are integers and Q is symmetric, so (Q + Q^T)/2 = Q exactly
                (inst.q_at(i, j) + inst.q_at(j, i)) / 2
            })
            .collect();
        let symmetrized =
            QpInstance::new(n, sym, inst.c().to_vec(), inst.levels().clone(), true).unwrap();
        let w = vec![2, 0, 1, 2];
        assert_eq!(
            inst.objective(&w).unwrap(),
            symmetrized.objective(&w).unwrap()
        );
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        use rand::{Rng, SeedableRng};
        fn cofactor_det(m: &[i128], k: usize) -> i128 {
            if k == 1 {
                return m[0];
            }
            let mut det = 0i128;
            for j in 0..k {
                let minor: Vec<i128> = (1..k)
                    .flat_map(|r| (0..k).filter(move |&c| c != j).map(move |c| (r, c)))
                    .map(|(r, c)| m[r * k + c])
                    .collect();
                let term = m[j] * cofactor_det(&minor, k - 1);
                det += if j % 2 == 0 { term } else { -term };
            }
            det
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..60 {
            let k = rng.gen_range(1..=5);
            let m: Vec<i128> = (0..k * k).map(|_| rng.gen_range(-9..=9)).collect();
            let mut big: Vec<BigInt> = m.iter().map(|&v| BigInt::from(v)).collect();
            assert_eq!(
                bareiss_determinant(&mut big, k),
                BigInt::from(cofactor_det(&m, k))
            );
        }
    }

    #[test]
    fn real_domain_psd_estimate_warns() {
        let inst = QpInstance::from_rows(
            vec![vec![1.0, 0.0], vec![0.0, -1.0]],
            vec![0.0, 0.0],
            set(&[0, 1]),
            true,
        )
        .unwrap();
        let report = inst.validate();
        assert!(report.violations.is_empty());
        assert_eq!(report.warnings.len(), 1);

        let ok = QpInstance::from_rows(
            vec![vec![1.0, 0.0], vec![0.0, 2.0]],
            vec![0.0, 0.0],
            set(&[0, 1]),
            true,
        )
        .unwrap();
        assert!(ok.validate().is_clean());
    }
}
