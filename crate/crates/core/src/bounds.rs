//! Closed-form region/facet counts and network-size formulas.
//!
//! Integer quantities (region counts, binomials, factorials) are exact
//! `BigUint` arithmetic; the asymptotic size formulas are double precision.
//! All logarithms in the depth/size formulas are base 2: the derivation passes
//! through a power-of-two error bound, which fixes the base.

use num_bigint::BigUint;
use num_traits::{One, Zero};
#[cfg(test)]
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Exact binomial coefficient, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= n - i;
        den *= i + 1;
    }
    num / den
}

pub fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Maximum number of cells cut by `m` hyperplanes in `R^d`:
/// `G(d,m) = sum_{k=0..d} binom(m,k)`.
pub fn regions_max(d: u64, m: u64) -> Result<BigUint> {
    if d < 1 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    let mut acc = BigUint::zero();
    for k in 0..=d {
        acc += binomial(m, k);
    }
    Ok(acc)
}

/// Cone-like (unbounded) cell count of a generic arrangement together with
/// the bounded-cell count: `C(d,m) = 2 sum_{k=0..d-1} binom(m-1,k)` and
/// `binom(m-1,d)` bounded cells. The pair always sums to `G(d,m)`.
pub fn cone_like_count(d: u64, m: u64) -> Result<(BigUint, BigUint)> {
    if d < 1 || m < 1 {
        return Err(Error::InvalidParameter(
            "cone_like_count needs d >= 1 and m >= 1".into(),
        ));
    }
    let mut cone = BigUint::zero();
    for k in 0..d {
        cone += binomial(m - 1, k);
    }
    cone *= 2u32;
    let bounded = binomial(m - 1, d);
    debug_assert_eq!(&cone + &bounded, regions_max(d, m)?);
    Ok((cone, bounded))
}

/// Outcome of the two growth-regime identities for `G(d,m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeCheck {
    /// `G(d,m) == 2^m` (only meaningful when `m <= d`).
    pub holds_power_of_two: Option<bool>,
    /// `G(d,m) <= m^d / (d-1)!` (only meaningful when `m >= d`),
    /// evaluated exactly as `G * (d-1)! <= m^d`.
    pub holds_polynomial: Option<bool>,
}

pub fn growth_regime_check(d: u64, m: u64) -> Result<RegimeCheck> {
    if d < 2 || m < 1 {
        return Err(Error::InvalidParameter(
            "growth regime check needs d >= 2 and m >= 1".into(),
        ));
    }
    let g = regions_max(d, m)?;
    let holds_power_of_two = (m <= d).then(|| g == BigUint::one() << m);
    let holds_polynomial = (m >= d).then(|| {
        let lhs = &g * factorial(d - 1);
        let rhs = BigUint::from(m).pow(d as u32);
        lhs <= rhs
    });
    Ok(RegimeCheck {
        holds_power_of_two,
        holds_polynomial,
    })
}

/// Facets needed to approximate a smooth convex boundary in `R^d` to relative
/// volume excess `epsilon`: `(C d / epsilon)^((d-1)/2)`. May overflow to
/// `+inf` for large `d`; that is reported with a warning rather than an error.
pub fn facets_required(d: u64, epsilon: f64, constant_c: f64) -> Result<f64> {
    check_eps_c(d, epsilon, constant_c)?;
    let base = constant_c * d as f64 / epsilon;
    let value = base.powf((d as f64 - 1.0) / 2.0);
    if value.is_infinite() {
        log::warn!("facets_required overflowed to +inf at d = {d}");
    }
    Ok(value)
}

/// Lower bounds for a single-hidden-layer net approximating a ball:
/// `N_s = (C d / eps)^(1/2) (d-1)/e` units and `N_sp = (d+1) N_s` parameters.
pub fn shl_units_lower(d: u64, epsilon: f64, constant_c: f64) -> Result<(f64, f64)> {
    check_eps_c(d, epsilon, constant_c)?;
    let n_s = (constant_c * d as f64 / epsilon).sqrt() * (d as f64 - 1.0) / std::f64::consts::E;
    Ok((n_s, (d as f64 + 1.0) * n_s))
}

/// Sizing of the deep norm-approximation network for a target excess.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepNetSize {
    pub k_star: f64,
    pub k_ceil: u32,
    /// `(d-1)(3 k_ceil - 1)` units.
    pub units: u64,
    /// `k_ceil (d-1)` layers.
    pub depth: u64,
    /// Volume-excess bound achieved at `k_ceil` (see [`error_bound`]).
    pub error_bound: f64,
}

/// Smallest folding depth `k` meeting the excess threshold, plus the unit and
/// layer counts it implies. For `d >= 3` this is
/// `k* = log2(d) + log2(1/eps)/2 - 1/2 + log2(pi)`; for `d = 2` the tighter
/// two-dimensional bound `pi^2 / 2^(2k) <= eps` applies, giving
/// `k* = log2(pi) + log2(1/eps)/2`.
pub fn deep_net_size(d: u64, epsilon: f64) -> Result<DeepNetSize> {
    if d < 2 {
        return Err(Error::InvalidParameter("dimension must be >= 2".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter("epsilon must be in (0, 1)".into()));
    }
    let log2pi = std::f64::consts::PI.log2();
    let k_star = if d == 2 {
        log2pi + 0.5 * (1.0 / epsilon).log2()
    } else {
        (d as f64).log2() + 0.5 * (1.0 / epsilon).log2() - 0.5 + log2pi
    };
    let k_ceil = (k_star.ceil().max(2.0)) as u32;
    let units = (d - 1) * (3 * k_ceil as u64 - 1);
    let depth = k_ceil as u64 * (d - 1);
    let bound = error_bound(d, k_ceil)?;
    // Equality can occur when epsilon is itself a power-of-two bound; allow
    // 1 ulp of slack there.
    debug_assert!(
        bound <= epsilon * (1.0 + 1e-12),
        "excess bound {bound} > target {epsilon}"
    );
    Ok(DeepNetSize {
        k_star,
        k_ceil,
        units,
        depth,
        error_bound: bound,
    })
}

/// Volume-excess bound of the depth-`k` construction:
/// `d(d-1) pi^2 / 2^(2k+1)`, which at `d = 2` reduces to the tighter
/// `pi^2 / 2^(2k)`.
pub fn error_bound(d: u64, k: u32) -> Result<f64> {
    if d < 2 || k < 2 {
        return Err(Error::InvalidParameter(
            "error bound needs d >= 2 and k >= 2".into(),
        ));
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok((d * (d - 1)) as f64 * pi2 / 2f64.powi(2 * k as i32 + 1))
}

/// Shallow-to-deep unit-count ratio
/// `(C d / eps)^(1/2) / (e (3 log2 d + 1.5 log2(1/eps)))`.
pub fn efficiency_ratio(d: u64, epsilon: f64, constant_c: f64) -> Result<f64> {
    check_eps_c(d, epsilon, constant_c)?;
    let num = (constant_c * d as f64 / epsilon).sqrt();
    let den = std::f64::consts::E
        * (3.0 * (d as f64).log2() + 1.5 * (1.0 / epsilon).log2());
    Ok(num / den)
}

fn check_eps_c(d: u64, epsilon: f64, constant_c: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter("dimension must be >= 2".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter("epsilon must be in (0, 1)".into()));
    }
    if !(constant_c > 0.0) {
        return Err(Error::InvalidParameter("constant C must be positive".into()));
    }
    Ok(())
}

/// Everything the `bounds` CLI subcommand reports for one `(d, m, eps, C)`
/// query. `G`/`C`/`bounded` are only present when `m` was given.
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub d: u64,
    pub m: Option<u64>,
    pub epsilon: f64,
    pub constant_c: f64,
    pub regions: Option<BigUint>,
    pub cone_like: Option<BigUint>,
    pub bounded_cells: Option<BigUint>,
    pub facets_required: f64,
    pub n_s: f64,
    pub n_sp: f64,
    pub k_star: f64,
    pub k_ceil: u32,
    pub deep_units: u64,
    pub depth: u64,
    pub excess_bound: f64,
    pub ratio: f64,
}

impl BoundsReport {
    pub fn compute(d: u64, m: Option<u64>, epsilon: f64, constant_c: f64) -> Result<Self> {
        let (regions, cone_like, bounded_cells) = match m {
            Some(m) => {
                let g = regions_max(d, m)?;
                let (c, b) = cone_like_count(d, m)?;
                (Some(g), Some(c), Some(b))
            }
            None => (None, None, None),
        };
        let (n_s, n_sp) = shl_units_lower(d, epsilon, constant_c)?;
        let size = deep_net_size(d, epsilon)?;
        Ok(BoundsReport {
            d,
            m,
            epsilon,
            constant_c,
            regions,
            cone_like,
            bounded_cells,
            facets_required: facets_required(d, epsilon, constant_c)?,
            n_s,
            n_sp,
            k_star: size.k_star,
            k_ceil: size.k_ceil,
            deep_units: size.units,
            depth: size.depth,
            excess_bound: size.error_bound,
            ratio: efficiency_ratio(d, epsilon, constant_c)?,
        })
    }
}
