use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::complex_normal;
use crate::{CMat, CVec};

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn random_cmat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_normal(rng))
}

pub(crate) fn random_cvec(rng: &mut ChaCha8Rng, len: usize) -> CVec {
    CVec::from_fn(len, |_, _| complex_normal(rng))
}
