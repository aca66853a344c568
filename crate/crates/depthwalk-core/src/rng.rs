//! Counter-based random streams.
//!
//! Every random draw is a pure function of `(master seed, trial, step)`, so
//! results are reproducible no matter how trials are scheduled or batched.
//! The mixer is the splitmix64 finalizer, which is a bijection on `u64` with
//! good avalanche behaviour; distinct `(trial, step)` pairs can never collide
//! within a stream.

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-trial stream of step draws derived from a master seed.
#[derive(Debug, Clone, Copy)]
pub struct StepStream {
    key: u64,
}

impl StepStream {
    pub fn new(master_seed: u64, trial: u64) -> StepStream {
        let key = mix64(master_seed ^ mix64(trial ^ 0x243f_6a88_85a3_08d3));
        StepStream { key }
    }

    /// Raw 64-bit draw for a given step counter.
    #[inline]
    pub fn draw(&self, step: u64) -> u64 {
        mix64(self.key ^ step.wrapping_mul(0xd134_2543_de82_ef95))
    }

    /// A fair coin and a uniform index in `0..bound`, both from one draw.
    #[inline]
    pub fn coin_and_index(&self, step: u64, bound: usize) -> (bool, usize) {
        let r = self.draw(step);
        let coin = r >> 63 == 1;
        // Multiply-shift maps the remaining 63 bits uniformly onto 0..bound.
        let idx = (((r & (u64::MAX >> 1)) as u128 * bound as u128) >> 63) as usize;
        (coin, idx)
    }
}

/// Sequential convenience wrapper for test sampling.
#[derive(Debug, Clone)]
pub struct SequenceRng {
    stream: StepStream,
    counter: u64,
}

impl SequenceRng {
    pub fn new(seed: u64) -> SequenceRng {
        SequenceRng {
            stream: StepStream::new(seed, 0),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = self.stream.draw(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform value in `0..bound`.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }

    /// Uniform signed value in `[-range, range]`.
    pub fn next_signed(&mut self, range: i64) -> i64 {
        self.next_below(2 * range as u64 + 1) as i64 - range
    }
}
