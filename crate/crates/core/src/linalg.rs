//! SVD wrappers with a fallback for blocks the default solver rejects.
//!
//! faer's bidiagonal QR iteration occasionally reports `NoConvergence` on
//! exactly structured inputs, and on heavily degenerate spectra can return
//! NaN singular vectors; Clifford-generated states produce both routinely.
//! Retrying on the adjoint, then on `m·W` for a fixed-seed random
//! unitary `W`, breaks that structure without changing the spectrum.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{c64, CMat, Error, Result};

const ROTATION_ATTEMPTS: u64 = 3;

pub(crate) struct Svd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

fn all_finite(m: &CMat) -> bool {
    (0..m.ncols()).all(|j| m.col(j).iter().all(|v| v.re.is_finite() && v.im.is_finite()))
}

fn faer_svd(m: &CMat) -> Option<Svd> {
    let f = m.thin_svd().ok()?;
    let s: Vec<f64> = f.S().column_vector().iter().map(|v| v.re).collect();
    let (u, v) = (f.U().to_owned(), f.V().to_owned());
    // Degenerate spectra can come back as `Ok` with NaN vectors.
    if !s.iter().all(|x| x.is_finite()) || !all_finite(&u) || !all_finite(&v) {
        return None;
    }
    Some(Svd { u, s, v })
}

fn random_unitary(n: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(n, n, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    g.qr().compute_Q()
}

/// `m = u · diag(s) · v†` with `s` descending.
pub(crate) fn svd(m: &CMat) -> Result<Svd> {
    if let Some(f) = faer_svd(m) {
        return Ok(f);
    }
    // m† = u' s v'†  ⇒  m = v' s u'†
    if let Some(f) = faer_svd(&m.adjoint().to_owned()) {
        return Ok(Svd { u: f.v, s: f.s, v: f.u });
    }
    for seed in 1..=ROTATION_ATTEMPTS {
        let w = random_unitary(m.ncols(), seed);
        // m·w = u s v'†  ⇒  m = u s (w v')†
        if let Some(f) = faer_svd(&(m * &w)) {
            return Ok(Svd { u: f.u, s: f.s, v: &w * &f.v });
        }
    }
    Err(Error::Numerical(format!("svd of a {}x{} block did not converge", m.nrows(), m.ncols())))
}

pub(crate) fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    if let Ok(s) = m.singular_values() {
        if s.iter().all(|x| x.is_finite()) {
            return Ok(s);
        }
    }
    Ok(svd(m)?.s)
}
