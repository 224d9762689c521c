use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimators::Density;

/// Fits need at least this many supported grid points.
pub const MIN_SUPPORT_POINTS: usize = 10;
/// Singular values below this fraction of the largest mark the design as rank-deficient.
const RANK_TOLERANCE: f64 = 1e-12;

/// `p'/2 = -kappa_u x p + c_emp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fp1Fit {
    pub kappa_u: f64,
    pub c_emp: f64,
}

/// `p'/2 = (-kappa_u x + n2 x^2) p + c_emp2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fp2Fit {
    pub kappa_u: f64,
    pub n2: f64,
    pub c_emp2: f64,
}

/// Unweighted least squares of the linear stationary Fokker-Planck relation over supported points.
pub fn fit_fp1(density: &Density) -> Result<Fp1Fit> {
    let coef = solve(density, 2, "linear Fokker-Planck fit", |x, p| [-x * p, 1.0, 0.0])?;
    Ok(Fp1Fit {
        kappa_u: coef[0],
        c_emp: coef[1],
    })
}

/// As [`fit_fp1`] with an added quadratic drift term.
pub fn fit_fp2(density: &Density) -> Result<Fp2Fit> {
    let coef = solve(density, 3, "quadratic Fokker-Planck fit", |x, p| [-x * p, x * x * p, 1.0])?;
    Ok(Fp2Fit {
        kappa_u: coef[0],
        n2: coef[1],
        c_emp2: coef[2],
    })
}

fn solve(
    density: &Density,
    cols: usize,
    what: &'static str,
    row: impl Fn(f64, f64) -> [f64; 3],
) -> Result<Vec<f64>> {
    let idx: Vec<usize> = (0..density.grid.len())
        .filter(|&i| density.support_mask[i])
        .collect();
    if idx.len() < MIN_SUPPORT_POINTS {
        return Err(Error::InsufficientSupport {
            required: MIN_SUPPORT_POINTS,
            actual: idx.len(),
        });
    }
    let a = DMatrix::from_fn(idx.len(), cols, |r, c| {
        let i = idx[r];
        row(density.grid[i], density.p[i])[c]
    });
    let b = DVector::from_iterator(idx.len(), idx.iter().map(|&i| 0.5 * density.dp[i]));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smax > 0.0) || smin <= RANK_TOLERANCE * smax {
        return Err(Error::RankDeficient(what));
    }
    let x = svd
        .solve(&b, RANK_TOLERANCE * smax)
        .map_err(|_| Error::RankDeficient(what))?;
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::kde::linspace;

    fn analytic(lo: f64, hi: f64, logp: impl Fn(f64) -> f64, dlogp: impl Fn(f64) -> f64) -> Density {
        let grid = linspace(lo, hi, 801);
        let p: Vec<f64> = grid.iter().map(|&x| logp(x).exp()).collect();
        let dp = grid.iter().zip(&p).map(|(&x, &v)| dlogp(x) * v).collect();
        Density::from_analytic(grid, p, dp).unwrap()
    }

    #[test]
    fn gaussian_with_half_variance_gives_unit_kappa() {
        let d = analytic(-4.0, 4.0, |x| -x * x, |x| -2.0 * x);
        let f = fit_fp1(&d).unwrap();
        assert!((f.kappa_u - 1.0).abs() < 1e-6);
        assert!(f.c_emp.abs() < 1e-6);
        let g = fit_fp2(&d).unwrap();
        assert!(g.n2.abs() < 1e-6);
    }

    #[test]
    fn detrended_normal_form_density() {
        let d = analytic(
            -2.5,
            2.5,
            |x| -2.0 * x * x - 2.0 * x * x * x / 3.0,
            |x| -4.0 * x - 2.0 * x * x,
        );
        let g = fit_fp2(&d).unwrap();
        assert!((g.kappa_u - 2.0).abs() < 1e-4);
        assert!((g.n2 + 1.0).abs() < 1e-4);
        assert!(g.c_emp2.abs() < 1e-4);
        let f = fit_fp1(&d).unwrap();
        assert!((f.kappa_u - 2.0).abs() > 1e-2);
        assert!(f.c_emp < 0.0);
    }

    #[test]
    fn symmetric_bimodal_has_no_flux() {
        let d = analytic(-3.0, 3.0, |x| -(x * x - 1.0).powi(2), |x| -4.0 * x * (x * x - 1.0));
        let f = fit_fp1(&d).unwrap();
        assert!(f.c_emp.abs() < 1e-10);
    }

    #[test]
    fn vanishing_density_is_rank_deficient() {
        let grid = linspace(-1.0, 1.0, 50);
        let d = Density::from_analytic(grid, vec![1.0; 50], vec![0.0; 50]).unwrap();
        let mut flat = d.clone();
        flat.grid = vec![0.0; 50];
        assert!(matches!(fit_fp1(&flat), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn too_little_support_is_an_error() {
        let grid = linspace(-1.0, 1.0, 50);
        let mut p = vec![0.0; 50];
        p[25] = 1.0;
        let d = Density::from_values(grid, p).unwrap();
        assert!(matches!(fit_fp1(&d), Err(Error::InsufficientSupport { .. })));
    }
}
