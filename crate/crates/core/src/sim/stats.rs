use alloc::collections::BTreeSet;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};

use super::scm::SampleTable;
use crate::error::{Error, Result};

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Inverse of the standard normal CDF.
///
/// Acklam's rational approximation followed by one Halley step against
/// `erfc`, which brings the error down to a few ulps over (0, 1).
pub fn standard_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const LOW: f64 = 0.024_25;

    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < LOW {
        tail(libm::sqrt(-2.0 * libm::log(p)))
    } else if p > 1.0 - LOW {
        -tail(libm::sqrt(-2.0 * libm::log1p(-p)))
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    let e = standard_normal_cdf(x) - p;
    let u = e * libm::sqrt(2.0 * PI) * libm::exp(x * x / 2.0);
    x - u / (1.0 + x * u / 2.0)
}

/// Fisher's z statistic for a (partial) correlation over `n` rows with
/// `given` conditioning variables.
pub fn fisher_z(r: f64, n: usize, given: usize) -> f64 {
    let dof = n as f64 - given as f64 - 3.0;
    libm::atanh(r) * libm::sqrt(dof)
}

/// Partial correlation of variables 0 and 1 given variables `2..k` of a
/// covariance matrix, via the precision matrix.
pub fn partial_correlation_from_covariance(cov: &DMatrix<f64>) -> Result<f64> {
    let precision = cov.clone().cholesky().ok_or(Error::SingularConditioningSet)?.inverse();
    let denom = libm::sqrt(precision[(0, 0)] * precision[(1, 1)]);
    if !(denom > 0.0 && denom.is_finite()) {
        return Err(Error::SingularConditioningSet);
    }
    Ok((-precision[(0, 1)] / denom).clamp(-1.0, 1.0))
}

fn resolve(data: &SampleTable, x: &str, y: &str, given: &BTreeSet<&str>) -> Result<Vec<usize>> {
    let mut indices = Vec::with_capacity(given.len() + 2);
    indices.push(data.column_index(x)?);
    indices.push(data.column_index(y)?);
    for name in given {
        if *name == x || *name == y {
            return Err(Error::Overlap((*name).to_string()));
        }
        indices.push(data.column_index(name)?);
    }
    let required = given.len() + 4;
    if data.n() < required {
        return Err(Error::InsufficientSamples { n: data.n(), required });
    }
    Ok(indices)
}

/// Sample partial correlation of `x` and `y` given `given`, computed from the
/// inverse of the sample covariance matrix. `x == y` yields exactly 1.
pub fn partial_correlation(data: &SampleTable, x: &str, y: &str, given: &BTreeSet<&str>) -> Result<f64> {
    if x == y {
        data.column_index(x)?;
        return Ok(1.0);
    }
    let indices = resolve(data, x, y, given)?;
    partial_correlation_from_covariance(&data.covariance(&indices))
}

/// The same quantity as [`partial_correlation`], computed by regressing `x`
/// and `y` on `given` and correlating the residuals.
pub fn partial_correlation_by_residuals(data: &SampleTable, x: &str, y: &str, given: &BTreeSet<&str>) -> Result<f64> {
    if x == y {
        data.column_index(x)?;
        return Ok(1.0);
    }
    let indices = resolve(data, x, y, given)?;
    let n = data.n();
    let columns = data.columns();
    let centred = |i: usize| {
        let col = &columns[i];
        let mean = col.iter().sum::<f64>() / n as f64;
        DVector::from_iterator(n, col.iter().map(|v| v - mean))
    };
    let mut rx = centred(indices[0]);
    let mut ry = centred(indices[1]);
    if indices.len() > 2 {
        let design = DMatrix::from_columns(&indices[2..].iter().map(|&i| centred(i)).collect::<Vec<_>>());
        let gram = design.transpose() * &design;
        let chol = gram.cholesky().ok_or(Error::SingularConditioningSet)?;
        for r in [&mut rx, &mut ry] {
            let beta = chol.solve(&(design.transpose() * &*r));
            *r -= &design * beta;
        }
    }
    let denom = libm::sqrt(rx.norm_squared() * ry.norm_squared());
    if !(denom > 0.0 && denom.is_finite()) {
        return Err(Error::SingularConditioningSet);
    }
    Ok((rx.dot(&ry) / denom).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CiTestResult {
    pub r: f64,
    pub z: f64,
    pub alpha: f64,
    /// The null of zero partial correlation was not rejected.
    pub independent: bool,
    pub n_effective: usize,
}

impl CiTestResult {
    pub(crate) fn from_correlation(r: f64, n: usize, given: usize, alpha: f64) -> Self {
        let z = fisher_z(r, n, given);
        let critical = standard_normal_quantile(1.0 - alpha / 2.0);
        CiTestResult {
            r,
            z,
            alpha,
            independent: libm::fabs(z) < critical,
            n_effective: n,
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Two-sided Fisher-z test of zero partial correlation at level `alpha`.
pub fn ci_test(data: &SampleTable, x: &str, y: &str, given: &BTreeSet<&str>, alpha: f64) -> Result<CiTestResult> {
    check_alpha(alpha)?;
    let r = partial_correlation(data, x, y, given)?;
    Ok(CiTestResult::from_correlation(r, data.n(), given.len(), alpha))
}
