//! Dominated coupling from the past for spatial birth–death dynamics.
//!
//! The dominating process is the free birth–death process on the window (births at
//! rate `λ|W|`, unit death rate), whose stationary law is the Poisson process. Its
//! history is built backwards from time 0 and only ever extended, so marks are
//! reused when the horizon doubles. A birth of `K` with mark `u` is kept by a
//! target chain when `u < κ(K, current ∪ χ)`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::model::{papangelou_parts, ModelSpec};
use crate::particles::{Configuration, Particle, Window};

use super::poisson::{poisson_count, scatter};
use super::{prepare, SamplerError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CftpOptions {
    /// First look-back time.
    pub initial_horizon: f64,
    /// Give up once the horizon would exceed this.
    pub max_horizon: f64,
}

impl Default for CftpOptions {
    fn default() -> Self {
        Self { initial_horizon: 1.0, max_horizon: 65_536.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CftpOutcome {
    pub sample: Configuration,
    /// Look-back time at which the bounding chains coalesced.
    pub horizon: f64,
}

#[derive(Debug, Clone, Copy)]
struct Lifetime {
    particle: Particle,
    birth: f64,
    death: f64,
    mark: f64,
}

/// Backward-built history of the dominating process on a window.
struct History {
    items: Vec<Lifetime>,
    /// Deaths are known on `(-covered, 0]`.
    covered: f64,
    rate: f64,
}

impl History {
    fn new<R: Rng + ?Sized>(model: &ModelSpec, w: &Window, rng: &mut R) -> Self {
        let rate = model.lambda * w.volume();
        let n = poisson_count(rate, rng);
        let items = scatter(model, w, n, rng)
            .into_iter()
            .map(|particle| {
                let age: f64 = Exp1.sample(rng);
                Lifetime { particle, birth: -age, death: f64::INFINITY, mark: rng.random() }
            })
            .collect();
        Self { items, covered: 0.0, rate }
    }

    /// Adds the particles that die in `(-horizon, -covered]`.
    fn extend<R: Rng + ?Sized>(&mut self, model: &ModelSpec, w: &Window, horizon: f64, rng: &mut R) {
        if horizon <= self.covered {
            return;
        }
        let span = horizon - self.covered;
        let n = poisson_count(self.rate * span, rng);
        for particle in scatter(model, w, n, rng) {
            let death = -self.covered - span * rng.random::<f64>();
            let life: f64 = Exp1.sample(rng);
            self.items.push(Lifetime { particle, birth: death - life, death, mark: rng.random() });
        }
        self.covered = horizon;
    }

    /// Forward pass from `-horizon` for each boundary. Returns the upper and lower chain
    /// states at time 0 and every particle held by any upper chain along the way.
    fn run(&self, model: &ModelSpec, horizon: f64, chis: &[&Configuration]) -> Pass {
        let start = -horizon;
        let mut initial = Vec::new();
        let mut events: Vec<(f64, bool, usize)> = Vec::new();
        for (i, l) in self.items.iter().enumerate() {
            if l.birth <= start && l.death > start {
                initial.push(l.particle);
            } else if l.birth > start {
                events.push((l.birth, true, i));
            }
            if l.death > start && l.death <= 0.0 {
                events.push((l.death, false, i));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0));
        let initial = Configuration::from_vec_dedup(initial);
        let mut upper = vec![initial.clone(); chis.len()];
        let mut lower = vec![Configuration::new(); chis.len()];
        let mut ever = initial;
        for (_, is_birth, i) in events {
            let life = &self.items[i];
            let k = life.particle;
            if is_birth {
                for (c, chi) in chis.iter().enumerate() {
                    // repulsion: the smaller lower chain gives the larger intensity
                    let keep_upper = life.mark < papangelou_parts(model, &k, &[&lower[c], chi]);
                    let keep_lower = keep_upper && life.mark < papangelou_parts(model, &k, &[&upper[c], chi]);
                    if keep_upper {
                        upper[c].insert(k);
                        ever.insert(k);
                    }
                    if keep_lower {
                        lower[c].insert(k);
                    }
                }
            } else {
                for c in 0..chis.len() {
                    upper[c].remove(&k);
                    lower[c].remove(&k);
                }
            }
        }
        Pass { upper, lower, ever }
    }
}

struct Pass {
    upper: Vec<Configuration>,
    lower: Vec<Configuration>,
    ever: Configuration,
}

impl Pass {
    fn coalesced(&self) -> bool {
        self.upper.iter().zip(&self.lower).all(|(u, l)| u == l)
    }
}

/// Runs the doubling scheme for several boundaries on one shared history.
fn coupled_cftp<R: Rng + ?Sized>(
    model: &ModelSpec,
    w: &Window,
    chis: &[&Configuration],
    rng: &mut R,
    opts: CftpOptions,
) -> Result<(Pass, f64), SamplerError> {
    let mut history = History::new(model, w, rng);
    let mut horizon = opts.initial_horizon.max(f64::MIN_POSITIVE);
    loop {
        if horizon > opts.max_horizon {
            return Err(SamplerError::HorizonExceeded { horizon: horizon / 2.0 });
        }
        history.extend(model, w, horizon, rng);
        let pass = history.run(model, horizon, chis);
        if pass.coalesced() {
            return Ok((pass, horizon));
        }
        horizon *= 2.0;
    }
}

/// Exact draw from the Gibbs law in `w` given the boundary `chi`, by dominated CFTP.
pub fn sample_gibbs_cftp<R: Rng + ?Sized>(
    model: &ModelSpec,
    w: &Window,
    chi: &Configuration,
    rng: &mut R,
) -> Result<CftpOutcome, SamplerError> {
    sample_gibbs_cftp_with(model, w, chi, rng, CftpOptions::default())
}

pub fn sample_gibbs_cftp_with<R: Rng + ?Sized>(
    model: &ModelSpec,
    w: &Window,
    chi: &Configuration,
    rng: &mut R,
    opts: CftpOptions,
) -> Result<CftpOutcome, SamplerError> {
    let chi = prepare(model, w, chi)?;
    let (mut pass, horizon) = coupled_cftp(model, w, &[&chi], rng, opts)?;
    Ok(CftpOutcome { sample: pass.upper.swap_remove(0), horizon })
}

/// Two Gibbs samples in the same window driven by one dominating history.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingOutcome {
    /// Every particle retained by either upper chain at some time of the final pass.
    pub dominating: Configuration,
    pub sample_a: Configuration,
    pub sample_b: Configuration,
    pub boundary_diff: Configuration,
    pub disagreement: Configuration,
    pub horizon: f64,
}

/// Couples the Gibbs laws under boundaries `chi_a` and `chi_b` through shared
/// birth, death and retention marks. Each sample is exactly distributed.
pub fn disagreement_couple<R: Rng + ?Sized>(
    model: &ModelSpec,
    w: &Window,
    chi_a: &Configuration,
    chi_b: &Configuration,
    rng: &mut R,
) -> Result<CouplingOutcome, SamplerError> {
    disagreement_couple_with(model, w, chi_a, chi_b, rng, CftpOptions::default())
}

pub fn disagreement_couple_with<R: Rng + ?Sized>(
    model: &ModelSpec,
    w: &Window,
    chi_a: &Configuration,
    chi_b: &Configuration,
    rng: &mut R,
    opts: CftpOptions,
) -> Result<CouplingOutcome, SamplerError> {
    let a = prepare(model, w, chi_a)?;
    let b = prepare(model, w, chi_b)?;
    let (mut pass, horizon) = coupled_cftp(model, w, &[&a, &b], rng, opts)?;
    let sample_b = pass.upper.pop().expect("two chains");
    let sample_a = pass.upper.pop().expect("two chains");
    let disagreement = sample_a.symmetric_difference(&sample_b);
    Ok(CouplingOutcome {
        dominating: pass.ever,
        sample_a,
        sample_b,
        boundary_diff: chi_a.symmetric_difference(chi_b),
        disagreement,
        horizon,
    })
}
