//! Seeded pseudo-random band-limited forms for the validators and tests.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{basis::ModeBox, Sector, SpectralModel};
use crate::scalar::{czero, Real, C};

/// Default seed echoed in reports.
pub const DEFAULT_SEED: u64 = 901;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_complex<R: Real>(rng: &mut ChaCha8Rng) -> C<R> {
    let re: f64 = rng.gen_range(-1.0..1.0);
    let im: f64 = rng.gen_range(-1.0..1.0);
    C::new(R::from_f64_lossy(re), R::from_f64_lossy(im))
}

/// Random coefficient vector on a sector/degree. For torus models only
/// basis elements of mode band `<= band` receive mass; abstract models
/// ignore the band argument.
pub fn sample_vector<R: Real>(
    model: &SpectralModel<R>,
    sector: Sector,
    q: usize,
    band: u32,
    rng: &mut ChaCha8Rng,
) -> DVector<C<R>> {
    let dim = model.dim(sector, q);
    let mut v = DVector::from_element(dim, czero());
    if dim == 0 {
        return v;
    }
    if let Some(torus) = model.torus_data() {
        let layout = model.layout(sector, q);
        for idx in 0..dim {
            let (_, _, mode_idx) = layout.decode(idx);
            if ModeBox::band(&torus.modes.mode(mode_idx)) <= band {
                v[idx] = unit_complex(rng);
            }
        }
    } else {
        for idx in 0..dim {
            v[idx] = unit_complex(rng);
        }
    }
    v
}

/// Random pair-form `(a, phi)` at a degree, both parts band-limited.
pub fn sample_pair<R: Real>(
    model: &SpectralModel<R>,
    q: usize,
    band: u32,
    rng: &mut ChaCha8Rng,
) -> (DVector<C<R>>, DVector<C<R>>) {
    (
        sample_vector(model, Sector::Q, q, band, rng),
        sample_vector(model, Sector::T, q, band, rng),
    )
}
