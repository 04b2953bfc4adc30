//! Regenerates the two bundled synthetic languages in `data/`: order-3
//! models over five letters whose columns are independent Dirichlet(1/2)
//! draws, so each context strongly prefers a few successors.

use std::path::Path;

use jcx::model_io::save_model;
use jcx_core::textmodel::{Alphabet, MarkovModel};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

const LETTERS: [&str; 5] = ["a", "e", "l", "r", "t"];
const ORDER: usize = 3;

fn unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Dirichlet(1/2) via squared normals (Box–Muller): Gamma(1/2) = N²/2.
fn dirichlet_half(k: usize, rng: &mut impl RngCore) -> Vec<f64> {
    let w: Vec<f64> = (0..k)
        .map(|_| {
            let z = (-2.0 * unit(rng).ln()).sqrt() * (std::f64::consts::TAU * unit(rng)).cos();
            z * z + 1e-3
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn language(seed: u64) -> MarkovModel {
    let k = LETTERS.len();
    let s = k.pow(ORDER as u32);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut t = vec![0.0; s * s];
    for b in 0..s {
        for (sym, p) in dirichlet_half(k, &mut rng).into_iter().enumerate() {
            t[((b * k + sym) % s) * s + b] = p;
        }
    }
    MarkovModel::new(Alphabet::new(LETTERS).unwrap(), ORDER, t).unwrap()
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    for (name, seed) in [("lang_a.json", 0xA11CE), ("lang_b.json", 0xB0B)] {
        let m = language(seed);
        save_model(&m, dir.join(name)).unwrap();
        println!("{name}: entropy {:.4} nats/symbol", m.entropy_rate());
    }
}
