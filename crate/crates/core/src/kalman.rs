//! Discrete error-state Kalman filter engine.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};

/// Error-state estimate and covariance at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterState<const N: usize> {
    pub xhat: SVector<f64, N>,
    pub p: SMatrix<f64, N, N>,
    pub t: f64,
}

impl<const N: usize> FilterState<N> {
    pub fn new(p: SMatrix<f64, N, N>, t: f64) -> Self {
        FilterState {
            xhat: SVector::zeros(),
            p,
            t,
        }
    }
}

/// `Phi = I + F dt + F^2 dt^2 / 2`, `Qd = G Q G^T dt` (symmetrized).
pub fn discretize<const N: usize, const W: usize>(
    f: &SMatrix<f64, N, N>,
    g: &SMatrix<f64, N, W>,
    q: &SMatrix<f64, W, W>,
    dt: f64,
) -> (SMatrix<f64, N, N>, SMatrix<f64, N, N>) {
    let fdt = f * dt;
    let phi = SMatrix::<f64, N, N>::identity() + fdt + fdt * fdt * 0.5;
    let qd = g * q * g.transpose() * dt;
    (phi, symmetrize(&qd))
}

pub fn symmetrize<const N: usize>(m: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    (m + m.transpose()) * 0.5
}

/// Nonzero entries of each row of `m`.
fn row_pattern<const N: usize>(m: &SMatrix<f64, N, N>) -> Vec<Vec<(usize, f64)>> {
    (0..N)
        .map(|i| {
            (0..N)
                .filter_map(|j| {
                    let v = m[(i, j)];
                    (v != 0.0).then_some((j, v))
                })
                .collect()
        })
        .collect()
}

/// `Phi P Phi^T` exploiting the zero pattern of `Phi`.
fn sandwich<const N: usize>(phi: &SMatrix<f64, N, N>, p: &SMatrix<f64, N, N>) -> SMatrix<f64, N, N> {
    let rows = row_pattern(phi);
    // a = Phi P, stored so that a[(i, k)] = sum_j Phi[i, j] P[j, k]
    let mut a = SMatrix::<f64, N, N>::zeros();
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            for k in 0..N {
                a[(i, k)] += v * p[(j, k)];
            }
        }
    }
    let mut out = SMatrix::<f64, N, N>::zeros();
    for (k, row) in rows.iter().enumerate() {
        for i in k..N {
            let mut s = 0.0;
            for &(j, v) in row {
                s += a[(i, j)] * v;
            }
            out[(i, k)] = s;
            out[(k, i)] = s;
        }
    }
    out
}

fn quick_check<const N: usize>(p: &SMatrix<f64, N, N>) -> Result<()> {
    let tr = p.trace();
    if !tr.is_finite() {
        return Err(Error::CovarianceNotPsd("non-finite entries".into()));
    }
    for i in 0..N {
        if p[(i, i)] < -1e-12 * tr.abs() {
            return Err(Error::CovarianceNotPsd(format!(
                "negative variance {} at index {i}",
                p[(i, i)]
            )));
        }
    }
    Ok(())
}

/// Full symmetry and eigenvalue check against the trace-scaled tolerance.
pub fn check_covariance<const N: usize>(p: &SMatrix<f64, N, N>) -> Result<()> {
    quick_check(p)?;
    let tol = 1e-12 * p.trace().abs();
    let asym = (p - p.transpose()).amax();
    if asym > tol {
        return Err(Error::CovarianceNotPsd(format!("asymmetry {asym:e}")));
    }
    let min_eig = nalgebra::DMatrix::from_column_slice(N, N, p.as_slice())
        .symmetric_eigenvalues()
        .min();
    if min_eig < -tol {
        return Err(Error::CovarianceNotPsd(format!("eigenvalue {min_eig:e}")));
    }
    Ok(())
}

/// `xhat <- Phi xhat`, `P <- Phi P Phi^T + Qd`.
///
/// Only diagonal signs and finiteness are checked here; the full eigenvalue
/// check runs in [`update`].
pub fn predict<const N: usize>(
    fs: &FilterState<N>,
    phi: &SMatrix<f64, N, N>,
    qd: &SMatrix<f64, N, N>,
    dt: f64,
) -> Result<FilterState<N>> {
    let xhat = if fs.xhat.iter().all(|&v| v == 0.0) {
        fs.xhat
    } else {
        phi * fs.xhat
    };
    let p = symmetrize(&(sandwich(phi, &fs.p) + qd));
    quick_check(&p)?;
    Ok(FilterState {
        xhat,
        p,
        t: fs.t + dt,
    })
}

/// Joseph-form measurement update. Returns the new state and the normalized
/// innovation squared of the residual `innovation - H xhat`.
pub fn update<const N: usize, const M: usize>(
    fs: &FilterState<N>,
    h: &SMatrix<f64, M, N>,
    r: &SMatrix<f64, M, M>,
    innovation: &SVector<f64, M>,
) -> Result<(FilterState<N>, f64)> {
    let pht = fs.p * h.transpose();
    let s = symmetrize(&(h * pht + r));
    let chol = s.cholesky().ok_or(Error::SingularInnovationCovariance)?;
    let k = chol.solve(&pht.transpose()).transpose();
    let resid = innovation - h * fs.xhat;
    let nis = resid.dot(&chol.solve(&resid));

    let ikh = SMatrix::<f64, N, N>::identity() - k * h;
    let p = symmetrize(&(ikh * fs.p * ikh.transpose() + k * r * k.transpose()));
    check_covariance(&p)?;
    Ok((
        FilterState {
            xhat: fs.xhat + k * resid,
            p,
            t: fs.t,
        },
        nis,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix1, Vector1};
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M6 = SMatrix<f64, 6, 6>;

    fn random_spd(rng: &mut ChaCha8Rng) -> M6 {
        let a = M6::from_fn(|_, _| rng.random_range(-1.0..1.0));
        a * a.transpose() + M6::identity() * 0.5
    }

    fn series_exp(a: &M6) -> M6 {
        let mut term = M6::identity();
        let mut sum = M6::identity();
        for k in 1..30 {
            term = term * a / k as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn zero_dynamics_discretization() {
        let g = SMatrix::<f64, 6, 2>::from_fn(|i, j| (i + 2 * j) as f64);
        let q = SMatrix::<f64, 2, 2>::from_diagonal(&nalgebra::Vector2::new(2.0, 3.0));
        let (phi, qd) = discretize(&M6::zeros(), &g, &q, 0.01);
        assert_eq!(phi, M6::identity());
        assert!((qd - g * q * g.transpose() * 0.01).amax() < 1e-15);
    }

    #[test]
    fn scalar_decay_discretization() {
        let tau = 100.0;
        let dt = 0.01;
        let (phi, _) = discretize(
            &Matrix1::new(-1.0 / tau),
            &Matrix1::new(0.0),
            &Matrix1::new(0.0),
            dt,
        );
        let x = dt / tau;
        assert!((phi[0] - (1.0 - x + x * x / 2.0)).abs() < 1e-16);
    }

    #[test]
    fn transition_close_to_matrix_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = M6::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let f = a * 0.5 - M6::identity();
            let (phi, _) = discretize(&f, &SMatrix::<f64, 6, 1>::zeros(), &Matrix1::new(0.0), 0.01);
            let exact = series_exp(&(f * 0.01));
            assert!((phi - exact).amax() / exact.amax() < 1e-6);
        }
    }

    #[test]
    fn identity_predict_is_a_no_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let fs = FilterState::new(random_spd(&mut rng), 1.0);
        let out = predict(&fs, &M6::identity(), &M6::zeros(), 0.0).unwrap();
        assert_eq!(out.p, fs.p);
        assert_eq!(out.xhat, fs.xhat);
    }

    #[test]
    fn scalar_predict() {
        let fs = FilterState::new(Matrix1::new(1.0), 0.0);
        let out = predict(&fs, &Matrix1::new(2.0), &Matrix1::new(3.0), 0.01).unwrap();
        assert_eq!(out.p[0], 7.0);
    }

    #[test]
    fn sparse_sandwich_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let p = random_spd(&mut rng);
            let phi = M6::from_fn(|_, _| {
                if rng.random_range(0.0..1.0) < 0.5 {
                    0.0
                } else {
                    rng.random_range(-1.0..1.0)
                }
            });
            let dense = phi * p * phi.transpose();
            assert!((sandwich(&phi, &p) - dense).amax() < 1e-12);
        }
    }

    #[test]
    fn negative_variance_is_rejected() {
        let fs = FilterState::new(Matrix1::new(1.0), 0.0);
        assert!(matches!(
            predict(&fs, &Matrix1::new(1.0), &Matrix1::new(-5.0), 0.01),
            Err(Error::CovarianceNotPsd(_))
        ));
    }

    #[test]
    fn zero_h_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fs = FilterState::new(random_spd(&mut rng), 0.0);
        let r = SMatrix::<f64, 3, 3>::from_diagonal(&nalgebra::Vector3::new(2.0, 4.0, 8.0));
        let z = nalgebra::Vector3::new(1.0, 2.0, 4.0);
        let (out, nis) = update(&fs, &SMatrix::<f64, 3, 6>::zeros(), &r, &z).unwrap();
        assert!((out.p - fs.p).amax() < 1e-15);
        assert_eq!(out.xhat, fs.xhat);
        assert!((nis - (0.5 + 1.0 + 2.0)).abs() < 1e-14);
    }

    #[test]
    fn scalar_update() {
        let fs = FilterState::new(Matrix1::new(1.0), 0.0);
        let (out, nis) = update(&fs, &Matrix1::new(1.0), &Matrix1::new(1.0), &Vector1::new(2.0)).unwrap();
        assert!((out.xhat[0] - 1.0).abs() < 1e-15);
        assert!((out.p[0] - 0.5).abs() < 1e-15);
        assert!((nis - 2.0).abs() < 1e-15);
    }

    #[test]
    fn joseph_equals_simple_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let p = random_spd(&mut rng);
            let h = SMatrix::<f64, 3, 6>::from_fn(|_, _| rng.random_range(-1.0..1.0));
            let r = SMatrix::<f64, 3, 3>::identity() * rng.random_range(0.1..2.0);
            let fs = FilterState::new(p, 0.0);
            let (out, _) = update(&fs, &h, &r, &nalgebra::Vector3::new(0.1, -0.2, 0.3)).unwrap();
            let k = p * h.transpose() * (h * p * h.transpose() + r).try_inverse().unwrap();
            let simple = (M6::identity() - k * h) * p;
            assert!((out.p - simple).amax() < 1e-9);
        }
    }

    #[test]
    fn singular_innovation_covariance() {
        let fs = FilterState::new(Matrix1::new(0.0), 0.0);
        assert!(matches!(
            update(&fs, &Matrix1::new(1.0), &Matrix1::new(0.0), &Vector1::new(1.0)),
            Err(Error::SingularInnovationCovariance)
        ));
    }
}
