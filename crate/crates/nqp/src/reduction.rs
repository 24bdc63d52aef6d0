//! Embedding of binary quadratic programs into programs over a larger level
//! set, in exact rational arithmetic.
//!
//! Given a binary instance (level set `{0, 1}`) and a target level set
//! `S = {s1 < s2 < ...}`, the embedding produces an exact-integer instance
//! over `S` whose minimizers use only the two smallest levels and decode back
//! to the binary minimizers by `s1 -> 0, s2 -> 1`. For `|S| >= 3` a diagonal
//! penalty `M * sum_i (t_i - s1)(t_i - s2)` excludes the remaining levels; the
//! scale `M` is sized from certified rational bounds so the exclusion is a
//! theorem, not a heuristic. All intermediate quantities are returned in a
//! [`ReductionCertificate`] so solutions and objective values can be verified
//! after the fact.

use crate::error::{Error, Result};
use crate::instance::{QpInstance, Scalar};
use crate::level_set::LevelSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;

fn rat_int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// Max absolute row sum of a symmetric row-major matrix: an exact upper bound
/// on the spectral radius, hence on both `lambda_max` and `|lambda_min|`.
pub fn gershgorin_bound(q: &[BigRational], n: usize) -> Result<BigRational> {
    if q.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: q.len(),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if q[i * n + j] != q[j * n + i] {
                return Err(Error::InvalidArgument(format!(
                    "matrix must be symmetric, differs at ({i}, {j})"
                )));
            }
        }
    }
    let mut best = BigRational::zero();
    for i in 0..n {
        let row_sum: BigRational = q[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum();
        if row_sum > best {
            best = row_sum;
        }
    }
    Ok(best)
}

/// The binary problem rewritten over the two levels `{s1, s2}`: substituting
/// `v = (t - s1) / (s2 - s1)` into `v^T Q v + v^T c` yields rational
/// coefficients `q_tilde`, `c_tilde` plus a fixed offset `d_offset` that is
/// dropped during minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoValueProblem {
    pub n: usize,
    /// Row-major `Q / d^2`.
    pub q_tilde: Vec<BigRational>,
    /// `c / d - 2 Q s1vec / d^2`.
    pub c_tilde: Vec<BigRational>,
    /// `D = s1vec^T Q s1vec / d^2 - s1vec^T c / d`.
    pub d_offset: BigRational,
    pub s1: i64,
    pub s2: i64,
}

impl TwoValueProblem {
    pub fn spacing(&self) -> i64 {
        self.s2 - self.s1
    }

    /// `t^T q_tilde t + t^T c_tilde` for any integer vector, exactly.
    pub fn h_value(&self, t: &[i64]) -> Result<BigRational> {
        if t.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: t.len(),
            });
        }
        let mut total = BigRational::zero();
        for i in 0..self.n {
            let ti = rat_int(t[i]);
            let mut row = BigRational::zero();
            for (q, &tj) in self.q_tilde[i * self.n..(i + 1) * self.n].iter().zip(t) {
                row += q * rat_int(tj);
            }
            total += &ti * row + &ti * &self.c_tilde[i];
        }
        Ok(total)
    }
}

/// Rewrite a binary instance over the levels `{s1, s2}`.
///
/// The identity `h_value(t) + d_offset = v^T Q v + v^T c` with
/// `v = (t - s1vec) / (s2 - s1)` holds for every `t` in `{s1, s2}^N`.
pub fn shift_scale_transform(
    binary: &QpInstance<i128>,
    s1: i64,
    s2: i64,
) -> Result<TwoValueProblem> {
    if s1 >= s2 {
        return Err(Error::InvalidArgument(format!(
            "need s1 < s2, got s1 = {s1}, s2 = {s2}"
        )));
    }
    if binary.levels().values() != [0, 1] {
        return Err(Error::InvalidArgument(
            "source instance must be over the level set {0, 1}".into(),
        ));
    }
    let n = binary.n();
    let d = BigInt::from(s2 - s1);
    let d2 = &d * &d;
    let s1_big = BigInt::from(s1);

    let q_tilde: Vec<BigRational> = binary
        .q_raw()
        .iter()
        .map(|&v| BigRational::new(BigInt::from(v), d2.clone()))
        .collect();

    // row sums of Q, i.e. (Q * ones)_i
    let row_sums: Vec<BigInt> = (0..n)
        .map(|i| binary.q_row(i).iter().map(|&v| BigInt::from(v)).sum())
        .collect();

    let c_tilde: Vec<BigRational> = (0..n)
        .map(|i| {
            BigRational::new(BigInt::from(binary.c()[i]), d.clone())
                - BigRational::new(BigInt::from(2) * &s1_big * &row_sums[i], d2.clone())
        })
        .collect();

    let q_total: BigInt = row_sums.iter().sum();
    let c_total: BigInt = binary.c().iter().map(|&v| BigInt::from(v)).sum();
    let d_offset = BigRational::new(&s1_big * &s1_big * q_total, d2.clone())
        - BigRational::new(&s1_big * c_total, d.clone());

    Ok(TwoValueProblem {
        n,
        q_tilde,
        c_tilde,
        d_offset,
        s1,
        s2,
    })
}

/// Penalty `sum_i (t_i - s1)(t_i - s2)`: zero exactly when every component is
/// `s1` or `s2`, strictly positive when any component uses another level of an
/// ordered integer set.
pub fn penalty_g(t: &[i64], s1: i64, s2: i64) -> Result<i128> {
    let mut total = 0i128;
    for &ti in t {
        let a = (ti as i128).try_sub(s1 as i128)?;
        let b = (ti as i128).try_sub(s2 as i128)?;
        total = total.try_add(a.try_mul(b)?)?;
    }
    Ok(total)
}

/// The certified bounds that size the penalty scale `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyParams {
    /// Gershgorin upper bound on the spectral radius of `q_tilde`.
    pub lambda: BigRational,
    /// Member of `{s1, s2}` of largest absolute value (negative one on ties).
    pub s_star: i64,
    /// Member of `S` of largest absolute value (negative one on ties).
    pub s_star_star: i64,
    /// Upper bound on the objective over two-valued vectors.
    pub k_upper: BigRational,
    /// Upper bound on the absolute objective over all of `S^N`.
    pub k_prime: BigRational,
    /// Positive lower bound on the penalty of any non-two-valued vector.
    pub l_g: i128,
    /// Lower bound on the objective over `S^N` (`-k_prime`).
    pub l_h: BigRational,
    /// Integer penalty scale, strictly greater than `(k_upper - l_h) / l_g`.
    pub m: BigInt,
}

/// Compute the penalty bounds and scale for a target set with at least three
/// levels whose two smallest members are the two-value problem's `s1, s2`.
pub fn compute_penalty_params(levels: &LevelSet, two: &TwoValueProblem) -> Result<PenaltyParams> {
    if levels.len() < 3 {
        return Err(Error::InvalidArgument(
            "penalty parameters are only needed for |S| >= 3".into(),
        ));
    }
    let values = levels.values();
    if values[0] != two.s1 || values[1] != two.s2 {
        return Err(Error::InvalidArgument(format!(
            "level set must start with s1 = {}, s2 = {}",
            two.s1, two.s2
        )));
    }

    let n = two.n;
    let lambda = gershgorin_bound(&two.q_tilde, n)?;
    let sum_abs_c: BigRational = two.c_tilde.iter().map(|v| v.abs()).sum();

    // s1 < s2, so on an absolute-value tie the negative member is s1
    let s_star = if two.s1.abs() >= two.s2.abs() {
        two.s1
    } else {
        two.s2
    };
    let s_star_star = levels.max_abs_member();

    let bound_for = |s: i64| -> BigRational {
        let s_rat = rat_int(s);
        let norm_sq = rat_int(n as i64) * &s_rat * &s_rat;
        &lambda * norm_sq + s_rat.abs() * &sum_abs_c
    };
    let k_upper = bound_for(s_star);
    let k_prime = bound_for(s_star_star);
    let l_h = -&k_prime;

    let s1 = two.s1 as i128;
    let s2 = two.s2 as i128;
    let product = |s: i128| -> Result<i128> { (s.try_sub(s1)?).try_mul(s.try_sub(s2)?) };
    let l_g = product(values[2] as i128)?;
    // s3 gives the smallest positive product because the set is increasing
    let min_product = values[2..]
        .iter()
        .map(|&v| product(v as i128))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min()
        .unwrap();
    if min_product != l_g {
        return Err(Error::Soundness(format!(
            "penalty lower bound {l_g} is not minimal over the level set (found {min_product})"
        )));
    }

    let ratio = (&k_upper - &l_h) / rat_int(l_g);
    let m = ratio.floor().to_integer() + 1;

    Ok(PenaltyParams {
        lambda,
        s_star,
        s_star_star,
        k_upper,
        k_prime,
        l_g,
        l_h,
        m,
    })
}

/// Everything needed to decode and verify solutions of an embedded instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionCertificate {
    pub s1: i64,
    pub s2: i64,
    /// `d^2`: the emitted integer objective is the shifted objective times this.
    pub scale: i128,
    /// `d^2 * D`, the scaled offset dropped by the two-value rewrite.
    pub shift_offset: i128,
    /// `d^2 * M * N * s1 * s2`, the scaled constant dropped from the penalty
    /// (zero when no penalty was added).
    pub penalty_offset: i128,
    /// Bounds and scale, present when `|S| >= 3`.
    pub penalty: Option<PenaltyParams>,
}

impl ReductionCertificate {
    /// Map a two-valued vector back to binary: `s1 -> 0`, `s2 -> 1`.
    pub fn decode(&self, t: &[i64]) -> Result<Vec<i64>> {
        decode_to_binary(t, self.s1, self.s2)
    }

    /// Recover the binary-instance objective from an embedded objective value
    /// attained at a two-valued point.
    pub fn binary_objective(&self, reduced_objective: i128) -> Result<i128> {
        let total = reduced_objective
            .try_add(self.shift_offset)?
            .try_add(self.penalty_offset)?;
        if total % self.scale != 0 {
            return Err(Error::Soundness(format!(
                "objective {reduced_objective} does not reconcile: {total} is not divisible by {}",
                self.scale
            )));
        }
        Ok(total / self.scale)
    }
}

impl fmt::Display for ReductionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "S1 {}", self.s1)?;
        writeln!(f, "S2 {}", self.s2)?;
        writeln!(f, "SCALE {}", self.scale)?;
        writeln!(f, "OFFSET_SHIFT {}", self.shift_offset)?;
        writeln!(f, "OFFSET_PENALTY {}", self.penalty_offset)?;
        if let Some(p) = &self.penalty {
            writeln!(f, "LAMBDA {}", p.lambda)?;
            writeln!(f, "S_STAR {}", p.s_star)?;
            writeln!(f, "S_STAR_STAR {}", p.s_star_star)?;
            writeln!(f, "K {}", p.k_upper)?;
            writeln!(f, "K_PRIME {}", p.k_prime)?;
            writeln!(f, "L_G {}", p.l_g)?;
            writeln!(f, "L_H {}", p.l_h)?;
            writeln!(f, "M {}", p.m)?;
        }
        Ok(())
    }
}

/// Embed a binary instance into an exact-integer instance over `levels`.
///
/// For `|S| = 2` the result is the integer-scaled two-value rewrite; for
/// `|S| >= 3` the penalty `d^2 M I` is added to the diagonal and
/// `-d^2 M (s1 + s2)` to the linear term. In both cases the emitted objective
/// equals `d^2` times the binary objective plus the certificate's recorded
/// constants at every two-valued point, so minimizers correspond exactly.
///
/// Requires the input to be declared PSD unless `allow_indefinite` is set;
/// the Gershgorin bound caps the spectral radius from both sides, so the
/// penalty sizing stays valid for indefinite inputs too.
pub fn reduce_to_level_set(
    binary: &QpInstance<i128>,
    levels: &LevelSet,
    allow_indefinite: bool,
) -> Result<(QpInstance<i128>, ReductionCertificate)> {
    if binary.levels().values() != [0, 1] {
        return Err(Error::InvalidArgument(
            "input must be a binary instance over {0, 1}".into(),
        ));
    }
    if !allow_indefinite && !binary.psd_declared() {
        return Err(Error::InvalidArgument(
            "input is not declared PSD; enable allow_indefinite to embed anyway".into(),
        ));
    }
    let report = binary.validate();
    if let Some(first) = report.violations.first() {
        return Err(Error::InvalidArgument(format!(
            "input fails validation: {first}"
        )));
    }
    if !levels.is_valid() {
        return Err(Error::InvalidLevelSet("target set is invalid".into()));
    }

    let n = binary.n();
    let s1 = levels.values()[0];
    let s2 = levels.values()[1];
    let d = (s2 - s1) as i128;
    let d2 = d.try_mul(d)?;

    let two = shift_scale_transform(binary, s1, s2)?;
    let shift_offset = big_to_i128(&(rat_int(d2) * &two.d_offset), "shift offset")?;

    let row_sums: Vec<i128> = (0..n)
        .map(|i| {
            binary
                .q_row(i)
                .iter()
                .try_fold(0i128, |acc, &v| acc.try_add(v))
        })
        .collect::<Result<Vec<_>>>()?;

    // d * c - 2 s1 (Q ones), the integer-scaled two-value linear term
    let mut c_out: Vec<i128> = (0..n)
        .map(|i| {
            d.try_mul(binary.c()[i])?
                .try_sub(2i128.try_mul(s1 as i128)?.try_mul(row_sums[i])?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut q_out: Vec<i128> = binary.q_raw().to_vec();

    let (penalty, penalty_offset) = if levels.len() == 2 {
        (None, 0i128)
    } else {
        let params = compute_penalty_params(levels, &two)?;
        let m = params.m.to_i128().ok_or(Error::Overflow("penalty scale"))?;
        let d2m = d2.try_mul(m)?;
        for i in 0..n {
            q_out[i * n + i] = q_out[i * n + i].try_add(d2m)?;
        }
        let shift = d2m.try_mul((s1 as i128).try_add(s2 as i128)?)?;
        for ci in &mut c_out {
            *ci = ci.try_sub(shift)?;
        }
        let offset = d2m
            .try_mul(n as i128)?
            .try_mul(s1 as i128)?
            .try_mul(s2 as i128)?;
        (Some(params), offset)
    };

    let out = QpInstance::new(n, q_out, c_out, levels.clone(), binary.psd_declared())?;
    let certificate = ReductionCertificate {
        s1,
        s2,
        scale: d2,
        shift_offset,
        penalty_offset,
        penalty,
    };
    Ok((out, certificate))
}

/// `s1 -> 0, s2 -> 1` componentwise. Any other value is an error: either the
/// penalty scale was insufficient (a soundness bug) or the point is simply a
/// suboptimal heuristic result.
pub fn decode_to_binary(t: &[i64], s1: i64, s2: i64) -> Result<Vec<i64>> {
    t.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value == s1 {
                Ok(0)
            } else if value == s2 {
                Ok(1)
            } else {
                Err(Error::NotBinary { index, value })
            }
        })
        .collect()
}

/// Inverse of [`decode_to_binary`]: `0 -> s1, 1 -> s2`.
pub fn encode_from_binary(v: &[i64], s1: i64, s2: i64) -> Result<Vec<i64>> {
    v.iter()
        .enumerate()
        .map(|(index, &value)| match value {
            0 => Ok(s1),
            1 => Ok(s2),
            other => Err(Error::NotBinary {
                index,
                value: other,
            }),
        })
        .collect()
}

fn big_to_i128(value: &BigRational, what: &'static str) -> Result<i128> {
    if !value.is_integer() {
        return Err(Error::Soundness(format!("{what} is not an integer")));
    }
    value
        .to_integer()
        .to_i128()
        .ok_or(Error::Overflow("certificate constant"))
}
