#![allow(dead_code)]

use mfig_core::{Energy, Graph, MeanFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    match rng.random_range(0..7) {
        0 => Graph::complete(2).unwrap(),
        1 => Graph::complete(3).unwrap(),
        2 => Graph::path(4).unwrap(),
        3 => Graph::cycle(4).unwrap(),
        4 => Graph::complete(4).unwrap(),
        5 => Graph::hypercube(3).unwrap(),
        _ => {
            let n = 5;
            let mut e: Vec<(usize, usize, f64)> = (0..n - 1).map(|i| (i, i + 1, rng.random_range(0.5..2.0))).collect();
            for i in 0..n {
                for j in i + 2..n {
                    if rng.random_bool(0.4) {
                        e.push((i, j, rng.random_range(0.5..2.0)));
                    }
                }
            }
            Graph::weighted(n, &e).unwrap()
        }
    }
}

pub fn all_means() -> Vec<MeanFunction> {
    vec![
        MeanFunction::arithmetic(),
        MeanFunction::geometric(),
        MeanFunction::logarithmic(),
        MeanFunction::spectral(),
        MeanFunction::transport_information(&Energy::shannon(), None).unwrap(),
    ]
}

pub fn random_mean(rng: &mut ChaCha8Rng) -> MeanFunction {
    let mut m = all_means();
    m.swap_remove(rng.random_range(0..m.len()))
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    w
}

pub fn random_energy(rng: &mut ChaCha8Rng, n: usize) -> Energy {
    match rng.random_range(0..5) {
        0 => Energy::linear(random_vec(rng, n)),
        1 => Energy::interaction(random_symmetric(rng, n)).unwrap(),
        2 => Energy::shannon(),
        3 => Energy::quadratic(),
        _ => Energy::sum(vec![Energy::shannon(), Energy::linear(random_vec(rng, n))]).unwrap(),
    }
}

pub fn interior_point(rng: &mut ChaCha8Rng, n: usize, margin: f64) -> Vec<f64> {
    mfig_core::simplex::random_point(rng, n, margin).as_slice().to_vec()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
