#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qdarwin::C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_ket(rng: &mut ChaCha8Rng, dim: usize) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Haar unitary via QR with the phases of `R`'s diagonal divided out.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<C64> {
    let z = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q.clone();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    u
}

pub fn random_qubit(rng: &mut ChaCha8Rng) -> [C64; 2] {
    let v = random_ket(rng, 2);
    [v[0], v[1]]
}
