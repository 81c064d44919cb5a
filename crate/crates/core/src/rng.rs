//! Counter-based deterministic generator. Every draw is a pure function of
//! (seed, stream, counter), so parallel grids can draw reproducibly no
//! matter how work is scheduled.

#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    seed: u64,
    stream: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        CounterRng { seed, stream }
    }

    pub fn u64_at(&self, counter: u64) -> u64 {
        // Two mixing rounds decorrelate (seed, stream, counter).
        splitmix(splitmix(self.seed ^ self.stream.rotate_left(17)).wrapping_add(counter))
    }

    /// Uniform in [0, bound), bound > 0, by rejection from the top.
    pub fn below_at(&self, counter: u64, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        let mut c = counter;
        loop {
            let r = self.u64_at(c);
            if r < zone {
                return r % bound;
            }
            c = c.wrapping_add(0x9e37_79b9);
        }
    }

    /// Uniform float in [0, 1).
    pub fn f64_at(&self, counter: u64) -> f64 {
        (self.u64_at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// A mutable convenience wrapper that advances its own counter.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: CounterRng,
    counter: u64,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        StreamRng { inner: CounterRng::new(seed, stream), counter: 0 }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.inner.u64_at(self.counter);
        self.counter += 1;
        v
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        let v = self.inner.below_at(self.counter, bound);
        self.counter += 1;
        v
    }

    pub fn f64(&mut self) -> f64 {
        let v = self.inner.f64_at(self.counter);
        self.counter += 1;
        v
    }
}
