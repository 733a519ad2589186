//! Counter-based random numbers.
//!
//! Every random quantity in the crate is addressed by a `(seed, replica,
//! domain, slot)` key plus a counter, so a variate never depends on the order
//! in which other variates were consumed. The block function is Philox4x32-10.

use rand_core::RngCore;

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

/// Philox4x32 with 10 rounds.
#[inline]
pub fn philox4x32(ctr: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = ctr;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(W0);
            k[1] = k[1].wrapping_add(W1);
        }
        let p0 = (M0 as u64) * (c[0] as u64);
        let p1 = (M1 as u64) * (c[2] as u64);
        let (hi0, lo0) = ((p0 >> 32) as u32, p0 as u32);
        let (hi1, lo1) = ((p1 >> 32) as u32, p1 as u32);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Top 53 bits of `x` as a uniform in `[0, 1)`.
#[inline]
pub fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Independent families of variates drawn for one replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u32)]
pub enum Domain {
    /// Poisson arrivals, positions and weights.
    Points = 1,
    /// Edge variates of a point process or lattice.
    Edges = 2,
    /// Ghost field states.
    Copies = 3,
    /// Lattice vertex states.
    Sites = 4,
    /// Independent resampling of single coordinates.
    Resample = 5,
    /// Extra points inserted for derivative estimates.
    Inserted = 6,
    /// Bootstrap and other estimator-side randomness.
    Estimator = 7,
}

/// A 64-bit Philox key derived from the run seed and the replica address.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey([u32; 2]);

impl StreamKey {
    pub fn new(seed: u128, replica: u64, domain: Domain, slot: u32) -> Self {
        let mut h = splitmix(seed as u64 ^ 0x5EED_0000_0000_0001);
        h = splitmix(h ^ (seed >> 64) as u64);
        h = splitmix(h ^ replica);
        h = splitmix(h ^ (((domain as u64) << 32) | slot as u64));
        StreamKey([h as u32, (h >> 32) as u32])
    }

    pub fn raw(self) -> [u32; 2] {
        self.0
    }

    /// Block at a 128-bit counter.
    #[inline]
    pub fn block(self, ctr: u128) -> [u32; 4] {
        philox4x32(
            [ctr as u32, (ctr >> 32) as u32, (ctr >> 64) as u32, (ctr >> 96) as u32],
            self.0,
        )
    }

    /// A uniform in `[0,1)` attached to the unordered pair `{a, b}`.
    #[inline]
    pub fn pair_uniform(self, a: u64, b: u64) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let out = philox4x32([lo as u32, (lo >> 32) as u32, hi as u32, (hi >> 32) as u32], self.0);
        unit_f64(((out[0] as u64) << 32) | out[1] as u64)
    }

    /// A uniform in `[0,1)` attached to a single index.
    #[inline]
    pub fn index_uniform(self, i: u64) -> f64 {
        let out = philox4x32([i as u32, (i >> 32) as u32, 0xA5A5_A5A5, 0x0F0F_0F0F], self.0);
        unit_f64(((out[0] as u64) << 32) | out[1] as u64)
    }

    /// Sequential stream starting at counter zero.
    pub fn stream(self) -> Stream {
        Stream { key: self, ctr: 0, buf: [0; 4], used: 4 }
    }
}

/// Sequential view over consecutive Philox blocks of one key.
#[derive(Clone, Debug)]
pub struct Stream {
    key: StreamKey,
    ctr: u128,
    buf: [u32; 4],
    used: usize,
}

impl Stream {
    pub fn new(seed: u128, replica: u64, domain: Domain, slot: u32) -> Self {
        StreamKey::new(seed, replica, domain, slot).stream()
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Uniform in `(0, 1]`, safe for logarithms.
    #[inline]
    pub fn uniform_pos(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// Standard exponential variate.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -libm::log(self.uniform_pos())
    }

    /// Number of failures before the first success of a Bernoulli(p) sequence.
    /// Returns `u64::MAX` when `p == 0`.
    pub fn geometric(&mut self, p: f64) -> u64 {
        if p >= 1.0 {
            return 0;
        }
        if p <= 0.0 {
            return u64::MAX;
        }
        let g = libm::floor(libm::log(self.uniform_pos()) / libm::log1p(-p));
        if g >= u64::MAX as f64 {
            u64::MAX
        } else {
            g as u64
        }
    }

    /// Poisson variate with mean `mu` (inversion for small means, summed
    /// exponential arrivals otherwise).
    pub fn poisson(&mut self, mu: f64) -> u64 {
        if mu <= 0.0 {
            return 0;
        }
        let mut n = 0u64;
        let mut t = 0.0;
        loop {
            t += self.exponential();
            if t > mu {
                return n;
            }
            n += 1;
        }
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}

impl RngCore for Stream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        if self.used == 4 {
            self.buf = self.key.block(self.ctr);
            self.ctr = self.ctr.wrapping_add(1);
            self.used = 0;
        }
        let v = self.buf[self.used];
        self.used += 1;
        v
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        let hi = self.next_u32() as u64;
        let lo = self.next_u32() as u64;
        (hi << 32) | lo
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        for chunk in dest.chunks_mut(4) {
            let b = self.next_u32().to_le_bytes();
            chunk.copy_from_slice(&b[..chunk.len()]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Known-answer vectors published with the Random123 reference code.
    #[test]
    fn philox_known_answers() {
        assert_eq!(philox4x32([0; 4], [0; 2]), [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]);
        assert_eq!(
            philox4x32([u32::MAX; 4], [u32::MAX; 2]),
            [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]
        );
        assert_eq!(
            philox4x32([0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344], [0xa4093822, 0x299f31d0]),
            [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
        );
    }

    #[test]
    fn streams_are_reproducible_and_separated() {
        let mut a = Stream::new(7, 3, Domain::Points, 0);
        let mut b = Stream::new(7, 3, Domain::Points, 0);
        let mut c = Stream::new(7, 4, Domain::Points, 0);
        let mut d = Stream::new(7, 3, Domain::Edges, 0);
        let xa: alloc::vec::Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let xb: alloc::vec::Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        let xc: alloc::vec::Vec<u64> = (0..16).map(|_| c.next_u64()).collect();
        let xd: alloc::vec::Vec<u64> = (0..16).map(|_| d.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(xa, xd);
    }

    #[test]
    fn pair_uniform_is_symmetric() {
        let k = StreamKey::new(1, 2, Domain::Edges, 0);
        assert_eq!(k.pair_uniform(3, 9), k.pair_uniform(9, 3));
        assert_ne!(k.pair_uniform(3, 9), k.pair_uniform(3, 10));
    }

    // A small statistical battery: moments, bucket uniformity, lag-1
    // correlation and per-bit balance.
    #[test]
    fn statistical_battery() {
        let n = 200_000usize;
        let mut s = Stream::new(0xDEAD_BEEF, 0, Domain::Estimator, 0);
        let mut sum = 0.0;
        let mut sum2 = 0.0;
        let mut lag = 0.0;
        let mut prev = 0.5;
        let mut buckets = [0u32; 64];
        let mut bits = [0u32; 64];
        for _ in 0..n {
            let x = s.next_u64();
            for (b, count) in bits.iter_mut().enumerate() {
                *count += ((x >> b) & 1) as u32;
            }
            let u = unit_f64(x);
            sum += u;
            sum2 += u * u;
            lag += (u - 0.5) * (prev - 0.5);
            prev = u;
            buckets[(u * 64.0) as usize] += 1;
        }
        let nf = n as f64;
        let mean = sum / nf;
        let var = sum2 / nf - mean * mean;
        assert!((mean - 0.5).abs() < 4.0 * libm::sqrt(1.0 / 12.0 / nf));
        assert!((var - 1.0 / 12.0).abs() < 0.002);
        assert!((lag / nf).abs() < 4.0 / 12.0 / libm::sqrt(nf));
        let e = nf / 64.0;
        let chi2: f64 = buckets.iter().map(|&o| (o as f64 - e) * (o as f64 - e) / e).sum();
        // 63 degrees of freedom; the 0.9999 quantile is about 113.
        assert!(chi2 < 113.0, "chi2 = {chi2}");
        for &c in &bits {
            assert!((c as f64 - nf / 2.0).abs() < 4.5 * libm::sqrt(nf / 4.0));
        }
    }

    #[test]
    fn poisson_and_geometric_means() {
        let mut s = Stream::new(11, 0, Domain::Estimator, 1);
        let n = 50_000;
        let mut tot = 0u64;
        for _ in 0..n {
            tot += s.poisson(3.5);
        }
        let m = tot as f64 / n as f64;
        assert!((m - 3.5).abs() < 4.0 * libm::sqrt(3.5 / n as f64));
        let mut g = 0u64;
        for _ in 0..n {
            g += s.geometric(0.25);
        }
        let m = g as f64 / n as f64;
        // mean (1-p)/p = 3, variance (1-p)/p^2 = 12
        assert!((m - 3.0).abs() < 4.0 * libm::sqrt(12.0 / n as f64));
    }
}
