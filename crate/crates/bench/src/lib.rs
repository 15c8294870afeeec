//! Shared fixtures for the solver benchmarks.

use parabox::{ObjectiveSpec, OracleHandle};

/// Diagonal quadratic with eigenvalues log-spaced on `[lambda_min, lambda_max]`.
pub fn quadratic_handle(dim: usize, lambda_min: f64, lambda_max: f64, sigma: f64) -> OracleHandle {
    let matrix: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i == j {
                        if dim == 1 {
                            lambda_min
                        } else {
                            lambda_min
                                * (lambda_max / lambda_min).powf(i as f64 / (dim as f64 - 1.0))
                        }
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect();
    let spec = ObjectiveSpec::noisy_quadratic(matrix, vec![0.0; dim], sigma, 0.0, 7)
        .expect("valid benchmark quadratic");
    OracleHandle::new(spec)
}

/// Synthetic bounded-ripple quadratic centered at the ones vector.
pub fn synthetic_handle(dim: usize) -> OracleHandle {
    let big_m = 20.0;
    let delta = big_m / (16.0 * (dim as f64 - 1.0));
    let spec = ObjectiveSpec::synthetic_very_good(big_m, vec![1.0; dim], delta, 5)
        .expect("valid benchmark objective");
    OracleHandle::new(spec)
}
