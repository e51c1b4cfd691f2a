use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::Simplex;

/// A random simplex: uniform vertices in `[−1, 1]^d`, stretched along the axes
/// by factors `10^{−u}` with `u ∈ [0, max_log10_aspect]`, then rotated (or
/// mirrored) and translated at random.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_log10_aspect: f64) -> Simplex {
    loop {
        let scale: Vec<f64> = (0..dim).map(|_| 10f64.powf(-rng.gen_range(0.0..=max_log10_aspect))).collect();
        let q = random_orthogonal(rng, dim);
        let shift = DVector::from_fn(dim, |_, _| rng.gen_range(-5.0..5.0));
        let vertices = (0..=dim)
            .map(|_| {
                let v = DVector::from_fn(dim, |i, _| rng.gen_range(-1.0..1.0) * scale[i]);
                &q * v + &shift
            })
            .collect();
        if let Ok(s) = Simplex::new(vertices) {
            return s;
        }
    }
}

/// Random orthogonal matrix from the QR factorisation of a uniform matrix;
/// the determinant may be either sign.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<f64> {
    loop {
        let m = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        if m.determinant().abs() < 1e-3 {
            continue;
        }
        let q = m.qr().q();
        if rng.gen_bool(0.5) {
            let mut f = DMatrix::identity(dim, dim);
            f[(0, 0)] = -1.0;
            return q * f;
        }
        return q;
    }
}
