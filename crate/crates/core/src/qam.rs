//! Square Gray-coded QAM with unit average energy.

use num_complex::Complex64;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qam {
    order: u32,
    side: u32,
    bits_per_axis: u32,
    scale: f64,
}

impl Qam {
    /// `order` must be an even power of two (4, 16, 64, ...).
    pub fn new(order: u32) -> Option<Qam> {
        if order < 4 || !order.is_power_of_two() || !order.trailing_zeros().is_multiple_of(2) {
            return None;
        }
        let bits_per_axis = order.trailing_zeros() / 2;
        let side = 1u32 << bits_per_axis;
        let s = side as f64;
        // mean energy of the odd-integer grid is 2 (M - 1) / 3
        let scale = (1.5 / (s * s - 1.0)).sqrt();
        Some(Qam {
            order,
            side,
            bits_per_axis,
            scale,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> u32 {
        2 * self.bits_per_axis
    }

    fn level(&self, gray: u32) -> f64 {
        let mut i = gray;
        let mut shift = gray >> 1;
        while shift != 0 {
            i ^= shift;
            shift >>= 1;
        }
        (2 * i) as f64 - (self.side - 1) as f64
    }

    fn axis_bits(&self, x: f64) -> u32 {
        let i = ((x / self.scale + (self.side - 1) as f64) / 2.0).round();
        let i = i.clamp(0.0, (self.side - 1) as f64) as u32;
        i ^ (i >> 1)
    }

    /// Maps a symbol index `0..order` (high bits on I, low bits on Q).
    pub fn modulate(&self, symbol: u32) -> Complex64 {
        let mask = self.side - 1;
        let i = self.level((symbol >> self.bits_per_axis) & mask);
        let q = self.level(symbol & mask);
        Complex64::new(i * self.scale, q * self.scale)
    }

    /// Hard-decision nearest-point demapping.
    pub fn demodulate(&self, z: Complex64) -> u32 {
        (self.axis_bits(z.re) << self.bits_per_axis) | self.axis_bits(z.im)
    }

    pub fn random_symbols<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<u32> {
        (0..count).map(|_| rng.random_range(0..self.order)).collect()
    }
}

pub fn bit_errors(a: u32, b: u32) -> u32 {
    (a ^ b).count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert!(Qam::new(8).is_none());
        assert!(Qam::new(2).is_none());
        assert_eq!(Qam::new(64).unwrap().bits_per_symbol(), 6);
    }

    #[test]
    fn unit_energy_and_round_trip() {
        for order in [4, 16, 64] {
            let q = Qam::new(order).unwrap();
            let e: f64 = (0..order).map(|s| q.modulate(s).norm_sqr()).sum::<f64>() / order as f64;
            assert!((e - 1.0).abs() < 1e-12);
            for s in 0..order {
                assert_eq!(q.demodulate(q.modulate(s)), s);
            }
        }
    }

    #[test]
    fn neighbours_differ_in_one_bit() {
        let q = Qam::new(16).unwrap();
        let step = 2.0 * q.scale;
        for s in 0..16 {
            let z = q.modulate(s);
            for dz in [Complex64::new(step, 0.0), Complex64::new(0.0, step)] {
                let t = z + dz;
                if t.re.abs() < 1.0 && t.im.abs() < 1.0 {
                    assert_eq!(bit_errors(s, q.demodulate(t)), 1);
                }
            }
        }
    }
}
