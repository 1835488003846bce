//! Synthetic labelled data for experiments and tests.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Isotropic Gaussian blobs, one per class, labelled `"0"`, `"1"`, ….
///
/// Class `c` is centred at `(separation / √2) · e_c`, so every pair of
/// centres is `separation` apart. Points are grouped by class.
pub fn gaussian_blobs(
    classes: usize,
    per_class: usize,
    dim: usize,
    separation: f64,
    sigma: f64,
    seed: u64,
) -> Result<Dataset> {
    if classes == 0 || classes > dim {
        return Err(Error::InvalidInput(format!(
            "need 1 <= classes <= dim, got {classes} classes in {dim} dimensions"
        )));
    }
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset = separation / std::f64::consts::SQRT_2;
    let m = classes * per_class;
    let mut points = Array2::zeros((m, dim));
    let mut labels = Vec::with_capacity(m);
    for c in 0..classes {
        for r in 0..per_class {
            let mut row = points.row_mut(c * per_class + r);
            for (d, x) in row.iter_mut().enumerate() {
                *x = noise.sample(&mut rng) + if d == c { offset } else { 0.0 };
            }
            labels.push(c.to_string());
        }
    }
    Dataset::new(points, Some(labels), format!("blobs-{classes}x{per_class}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_shape_and_determinism() {
        let a = gaussian_blobs(3, 4, 5, 6.0, 1.0, 7).unwrap();
        let b = gaussian_blobs(3, 4, 5, 6.0, 1.0, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        assert_eq!(a.dim(), 5);
        assert_eq!(a.labels().unwrap()[4], "1");
        assert!(gaussian_blobs(6, 1, 5, 1.0, 1.0, 0).is_err());
    }
}
