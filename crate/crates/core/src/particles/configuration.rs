use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{GeometryError, Particle, Window};

/// A finite simple counting measure on particles, kept sorted under the particle total order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Configuration {
    particles: Vec<Particle>,
}

impl Configuration {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a configuration, rejecting repeated particles.
    pub fn try_from_vec(mut particles: Vec<Particle>) -> Result<Self, GeometryError> {
        particles.sort_unstable();
        if particles.windows(2).any(|w| w[0] == w[1]) {
            return Err(GeometryError::DuplicateParticle);
        }
        Ok(Self { particles })
    }

    /// Builds a configuration, dropping repeated particles.
    pub fn from_vec_dedup(mut particles: Vec<Particle>) -> Self {
        particles.sort_unstable();
        particles.dedup();
        Self { particles }
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Particle> {
        self.particles.iter()
    }

    pub fn as_slice(&self) -> &[Particle] {
        &self.particles
    }

    pub fn contains(&self, p: &Particle) -> bool {
        self.particles.binary_search(p).is_ok()
    }

    /// Inserts `p`; returns `false` (leaving `self` unchanged) if it was already present.
    pub fn insert(&mut self, p: Particle) -> bool {
        match self.particles.binary_search(&p) {
            Ok(_) => false,
            Err(i) => {
                self.particles.insert(i, p);
                true
            }
        }
    }

    pub fn remove(&mut self, p: &Particle) -> bool {
        match self.particles.binary_search(p) {
            Ok(i) => {
                self.particles.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    /// `self + δ_p`.
    pub fn with(&self, p: Particle) -> Self {
        let mut out = self.clone();
        out.insert(p);
        out
    }

    /// `self - δ_p`.
    pub fn without(&self, p: &Particle) -> Self {
        let mut out = self.clone();
        out.remove(p);
        out
    }

    /// Union of supports.
    pub fn union(&self, other: &Configuration) -> Self {
        let mut v = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.particles, &other.particles);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    v.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    v.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    v.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        v.extend_from_slice(&a[i..]);
        v.extend_from_slice(&b[j..]);
        Self { particles: v }
    }

    pub fn symmetric_difference(&self, other: &Configuration) -> Self {
        let mut v: Vec<Particle> = self.iter().filter(|p| !other.contains(p)).copied().collect();
        v.extend(other.iter().filter(|p| !self.contains(p)));
        Self::from_vec_dedup(v)
    }

    pub fn is_disjoint(&self, other: &Configuration) -> bool {
        self.iter().all(|p| !other.contains(p))
    }

    pub fn is_subset(&self, other: &Configuration) -> bool {
        self.iter().all(|p| other.contains(p))
    }

    /// Particles whose circumscribed center lies in `window`.
    pub fn restrict(&self, window: &Window) -> Self {
        self.filter(|p| window.contains(p.center()))
    }

    /// Particles of dimension `dim` whose first center coordinate lies in `[x - reach, x + reach]`.
    /// A contiguous run, since the order compares dimension and then that coordinate first.
    pub fn slab(&self, dim: usize, x: f64, reach: f64) -> &[Particle] {
        let key = |p: &Particle| (p.dim(), p.center()[0]);
        let lo = self.particles.partition_point(|p| key(p) < (dim, x - reach));
        let hi = self.particles.partition_point(|p| key(p) <= (dim, x + reach));
        &self.particles[lo..hi.max(lo)]
    }

    pub fn filter(&self, mut keep: impl FnMut(&Particle) -> bool) -> Self {
        Self { particles: self.particles.iter().filter(|p| keep(p)).copied().collect() }
    }

    /// Particles strictly below `bound` in the total order, `ξ_{(-∞, bound)}`.
    pub fn below(&self, bound: &Particle) -> Self {
        let end = self.particles.partition_point(|p| p < bound);
        Self { particles: self.particles[..end].to_vec() }
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        // a common shift may reorder particles only through rounding
        Self::from_vec_dedup(self.particles.iter().map(|p| p.translated(shift)).collect())
    }

    /// Ordered `m`-tuples of pairwise distinct particles (the `m`-th factorial measure).
    pub fn factorial_tuples(&self, m: usize) -> FactorialTuples<'_> {
        FactorialTuples::new(&self.particles, m)
    }
}

impl<'a> IntoIterator for &'a Configuration {
    type Item = &'a Particle;
    type IntoIter = std::slice::Iter<'a, Particle>;

    fn into_iter(self) -> Self::IntoIter {
        self.particles.iter()
    }
}

impl FromIterator<Particle> for Configuration {
    fn from_iter<T: IntoIterator<Item = Particle>>(iter: T) -> Self {
        Self::from_vec_dedup(iter.into_iter().collect())
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.particles.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Configuration {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<Particle>::deserialize(d)?;
        Configuration::try_from_vec(v).map_err(serde::de::Error::custom)
    }
}

/// Iterator over ordered tuples of distinct indices, in lexicographic order.
pub struct FactorialTuples<'a> {
    items: &'a [Particle],
    idx: Vec<usize>,
    done: bool,
}

impl<'a> FactorialTuples<'a> {
    fn new(items: &'a [Particle], m: usize) -> Self {
        let n = items.len();
        if m == 0 || m > n {
            return Self { items, idx: Vec::new(), done: true };
        }
        let idx: Vec<usize> = (0..m).collect();
        Self { items, idx, done: false }
    }

    fn distinct_from_prefix(idx: &[usize], pos: usize, v: usize) -> bool {
        !idx[..pos].contains(&v)
    }

    /// Advances `idx` to the next tuple of distinct indices.
    fn advance(&mut self) {
        let n = self.items.len();
        let m = self.idx.len();
        let mut pos = m;
        loop {
            if pos == 0 {
                self.done = true;
                return;
            }
            pos -= 1;
            let mut v = self.idx[pos] + 1;
            while v < n && !Self::distinct_from_prefix(&self.idx, pos, v) {
                v += 1;
            }
            if v < n {
                self.idx[pos] = v;
                // fill the tail with the smallest unused indices
                for q in pos + 1..m {
                    let mut w = 0;
                    while !Self::distinct_from_prefix(&self.idx, q, w) {
                        w += 1;
                    }
                    self.idx[q] = w;
                }
                return;
            }
        }
    }
}

impl<'a> Iterator for FactorialTuples<'a> {
    type Item = Vec<&'a Particle>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = self.idx.iter().map(|&i| &self.items[i]).collect();
        self.advance();
        Some(out)
    }
}
