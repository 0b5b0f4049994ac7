//! Moran-type equations and box-dimension slope fitting.
//!
//! Every equation here has the form `g(s) = 1` with `g` strictly
//! decreasing, so all roots are found by bisection on a bracket where the
//! sign change is guaranteed.

use std::collections::HashSet;

use crate::error::{invalid, Error, Result};
use crate::ifs::SpongeSystem;

/// Bound on the error of every returned root.
pub const SOLVER_TOL: f64 = 1e-12;
const MAX_ITER: usize = 200;

/// Solved exponents `beta_1..beta_d` of a sponge and their partial sums.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSequence {
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub tolerance: f64,
}

impl BetaSequence {
    fn from_betas(betas: Vec<f64>) -> Self {
        let alphas = betas
            .iter()
            .scan(0.0, |acc, b| {
                *acc += b;
                Some(*acc)
            })
            .collect();
        BetaSequence {
            betas,
            alphas,
            tolerance: SOLVER_TOL,
        }
    }

    /// Sum of all exponents, the box dimension of the sponge.
    pub fn total(&self) -> f64 {
        self.alphas.last().copied().unwrap_or(0.0)
    }
}

/// Least-squares fit of `log count` against `-log delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFit {
    pub samples: Vec<(f64, usize)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Last float in `[lo, hi]` where `above` holds, for `above` true at `lo`
/// and monotone.
fn last_true(above: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if above(hi) {
        hi
    } else {
        lo
    }
}

/// Root of a strictly decreasing `g` with `g(lo) >= 1 >= g(hi)`.
///
/// Rounding makes the computed `g` equal to 1 on a short run of floats; the
/// root is taken at the middle of that run.
fn bisect_unit_level(g: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if g(lo) <= 1.0 {
        return lo;
    }
    // the upper bracket is the exact root when all ratios are equal
    if g(hi) >= 1.0 {
        return hi;
    }
    let left = last_true(|x| g(x) > 1.0, lo, hi);
    let right = last_true(|x| g(x) >= 1.0, lo, hi);
    0.5 * (left + right)
}

/// The unique `s >= 0` with `sum r_i^s = 1`.
pub fn solve_similarity_dimension(ratios: &[f64]) -> Result<f64> {
    const OP: &str = "solve_similarity_dimension";
    if ratios.is_empty() {
        return Err(Error::Empty { op: OP, param: "ratios" });
    }
    if let Some(r) = ratios.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(invalid(OP, "ratios", format!("{r} not in (0, 1)")));
    }
    let r_max = ratios.iter().copied().fold(0.0, f64::max);
    let upper = (ratios.len() as f64).ln() / (1.0 / r_max).ln();
    Ok(bisect_unit_level(
        |s| ratios.iter().map(|r| r.powf(s)).sum(),
        0.0,
        upper,
    ))
}

/// Solves the level-by-level Moran equations of a sponge that satisfies
/// the coordinate ordering and neat projection conditions.
pub fn solve_beta_sequence(sponge: &SpongeSystem) -> Result<BetaSequence> {
    sponge.validate()?;
    let mut betas: Vec<f64> = Vec::with_capacity(sponge.dim());
    for j in 1..=sponge.dim() {
        let prefixes = sponge.project_ifs(j)?;
        // fixed factor prod_{k<j} (f'_k)^{beta_k} and free ratio f'_j per prefix
        let terms: Vec<(f64, f64)> = prefixes
            .iter()
            .map(|p| {
                let fixed: f64 = p[..j - 1]
                    .iter()
                    .zip(&betas)
                    .map(|(f, b)| f.ratio().powf(*b))
                    .product();
                (fixed, p[j - 1].ratio())
            })
            .collect();
        let r_max = terms.iter().map(|t| t.1).fold(0.0, f64::max);
        let upper = (terms.len() as f64).ln() / (1.0 / r_max).ln();
        let beta = bisect_unit_level(
            |b| terms.iter().map(|(c, r)| c * r.powf(b)).sum(),
            0.0,
            upper,
        );
        betas.push(beta);
    }
    Ok(BetaSequence::from_betas(betas))
}

/// The level-`j` Moran sum evaluated at the given exponents.
pub fn moran_sum(sponge: &SpongeSystem, betas: &[f64], j: usize) -> Result<f64> {
    let prefixes = sponge.project_ifs(j)?;
    if betas.len() < j {
        return Err(invalid("moran_sum", "betas", "fewer exponents than levels"));
    }
    Ok(prefixes
        .iter()
        .map(|p| {
            p.iter()
                .zip(betas)
                .map(|(f, b)| f.ratio().powf(*b))
                .product::<f64>()
        })
        .sum())
}

/// Box dimension of a sponge: the sum of its exponent sequence.
pub fn box_dimension_sponge(sponge: &SpongeSystem) -> Result<f64> {
    Ok(solve_beta_sequence(sponge)?.total())
}

/// Box dimension of a symbolic space with parameters `(n, m, digits)`:
/// `log_m s + log_n (N / s)`, where `s` counts distinct second coordinates.
pub fn symbolic_beta(n: u32, m: u32, digits: &[(i64, u32)]) -> Result<f64> {
    const OP: &str = "symbolic_beta";
    if m < 2 || m > n {
        return Err(invalid(OP, "m", format!("need 2 <= m <= n, got m={m}, n={n}")));
    }
    if digits.is_empty() {
        return Err(Error::Empty { op: OP, param: "digits" });
    }
    if let Some(d) = digits.iter().find(|d| d.1 >= m) {
        return Err(invalid(OP, "digits", format!("second coordinate {} not below m={m}", d.1)));
    }
    let distinct: HashSet<&(i64, u32)> = digits.iter().collect();
    let total = distinct.len() as f64;
    let s = digits.iter().map(|d| d.1).collect::<HashSet<_>>().len() as f64;
    Ok(s.ln() / (m as f64).ln() + (total / s).ln() / (n as f64).ln())
}

/// Ordinary least squares of `log count` on `-log delta`.
pub fn fit_box_dimension(samples: &[(f64, usize)]) -> Result<DimensionFit> {
    const OP: &str = "fit_box_dimension";
    if let Some(s) = samples.iter().find(|s| s.0.is_nan() || s.0 <= 0.0 || s.1 == 0) {
        return Err(invalid(OP, "samples", format!("bad sample {s:?}")));
    }
    let mut deltas: Vec<f64> = samples.iter().map(|s| s.0).collect();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    if deltas.len() < 2 {
        return Err(invalid(OP, "samples", "need at least two distinct deltas"));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(d, c)| (-d.ln(), (c as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(DimensionFit {
        samples: samples.to_vec(),
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::IntervalMap;

    type Frac = ((i64, i64), (i64, i64));

    fn sponge(rows: &[&[Frac]]) -> SpongeSystem {
        SpongeSystem::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(a, b)| IntervalMap::fractions(a, b).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn similarity_dimension_examples() {
        let s = solve_similarity_dimension(&[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((s - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert_eq!(solve_similarity_dimension(&[0.5]).unwrap(), 0.0);
        let one = solve_similarity_dimension(&[0.5, 0.25, 0.25]).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        assert!(solve_similarity_dimension(&[]).is_err());
        assert!(solve_similarity_dimension(&[1.0]).is_err());
        assert!(solve_similarity_dimension(&[0.0, 0.5]).is_err());
    }

    #[test]
    fn single_digit_sponge_has_dimension_zero() {
        let s = sponge(&[&[((1, 2), (0, 1)), ((1, 3), (0, 1)), ((1, 5), (0, 1))]]);
        let seq = solve_beta_sequence(&s).unwrap();
        assert_eq!(seq.betas, vec![0.0, 0.0, 0.0]);
        assert_eq!(box_dimension_sponge(&s).unwrap(), 0.0);
    }

    #[test]
    fn one_dimensional_sponge_matches_similarity_dimension() {
        let s = sponge(&[&[((1, 3), (0, 1))], &[((1, 4), (1, 2))], &[((1, 5), (4, 5))]]);
        let seq = solve_beta_sequence(&s).unwrap();
        let direct = solve_similarity_dimension(&[1.0 / 3.0, 0.25, 0.2]).unwrap();
        assert!((seq.betas[0] - direct).abs() < 1e-12);
    }

    #[test]
    fn full_grid_has_dimension_two() {
        let mut rows: Vec<Vec<Frac>> = Vec::new();
        for a in 0..2 {
            for b in 0..3 {
                rows.push(vec![((1, 2), (a, 2)), ((1, 3), (b, 3))]);
            }
        }
        let refs: Vec<&[Frac]> = rows.iter().map(|r| r.as_slice()).collect();
        let seq = solve_beta_sequence(&sponge(&refs)).unwrap();
        assert!((seq.betas[0] - 1.0).abs() < 1e-12);
        assert!((seq.betas[1] - 1.0).abs() < 1e-12);
        assert!((seq.total() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_sponge_is_rejected() {
        let s = sponge(&[&[((1, 3), (0, 1)), ((1, 3), (0, 1))]]);
        assert!(matches!(
            solve_beta_sequence(&s),
            Err(Error::CoordinateOrdering { .. })
        ));
    }

    #[test]
    fn symbolic_beta_examples() {
        let b = symbolic_beta(3, 2, &[(0, 0), (1, 1), (2, 0)]).unwrap();
        assert!((b - (1.0 + 1.5f64.ln() / 3f64.ln())).abs() < 1e-14);
        let full = symbolic_beta(2, 2, &[(0, 0), (0, 1), (1, 0), (1, 1)]).unwrap();
        assert!((full - 2.0).abs() < 1e-14);
        assert_eq!(symbolic_beta(3, 2, &[(1, 1)]).unwrap(), 0.0);
        assert!(symbolic_beta(3, 2, &[(1, 2)]).is_err());
        assert!(symbolic_beta(2, 3, &[(0, 0)]).is_err());
    }

    #[test]
    fn fit_examples() {
        let fit = fit_box_dimension(&[(1.0 / 3.0, 2), (1.0 / 9.0, 4), (1.0 / 27.0, 8)]).unwrap();
        assert!((fit.slope - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!(fit.residual < 1e-20);
        let fit = fit_box_dimension(&[(0.5, 2), (0.25, 4)]).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit_box_dimension(&[(0.5, 2), (0.5, 3)]).is_err());
        assert!(fit_box_dimension(&[(0.5, 0), (0.25, 3)]).is_err());
    }
}
