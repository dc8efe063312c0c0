use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::model::ModelSpec;
use crate::particles::{Configuration, Particle, Window};

/// Poisson variate with mean `mean`; zero for non-positive means.
pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 || mean.is_nan() {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
}

/// Uniform point in the window's cube.
fn uniform_in<R: Rng + ?Sized>(w: &Window, rng: &mut R) -> [f64; 3] {
    let h = w.half_side();
    let mut c = [0.0; 3];
    for x in c.iter_mut().take(w.dim()) {
        *x = rng.random_range(-h..=h);
    }
    c
}

/// Draws `count` particles with uniform centers in `w` and shapes from the model's law.
pub(crate) fn scatter<R: Rng + ?Sized>(model: &ModelSpec, w: &Window, count: usize, rng: &mut R) -> Vec<Particle> {
    let shapes = model.shape_sampler();
    (0..count)
        .map(|_| {
            let c = uniform_in(w, rng);
            shapes.particle(&c[..w.dim()], rng)
        })
        .collect()
}

/// Poisson particle process with intensity measure `λ·Lebesgue⊗Q` restricted to centers in `w`.
pub fn sample_poisson<R: Rng + ?Sized>(model: &ModelSpec, w: &Window, rng: &mut R) -> Configuration {
    let n = poisson_count(model.lambda * w.volume(), rng);
    Configuration::from_vec_dedup(scatter(model, w, n, rng))
}
