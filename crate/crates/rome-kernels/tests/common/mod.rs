//! Shared fixtures for the integration suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rome_kernels::tensor::to_f64;
use rome_kernels::{angle_table_nd, AngleTable, Element, FreqSpec, PairingMode, Tensor};

pub const BASE: f64 = 10_000.0;

/// Seeded uniform(-1, 1) tensor of `rows` x `d`.
pub fn rand_tensor<T: Element>(rows: usize, d: usize, seed: u64) -> Tensor<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<T> = (0..rows * d)
        .map(|_| T::from(rng.gen_range(-1.0f64..1.0)).unwrap())
        .collect();
    Tensor::new(vec![rows, d], data).unwrap()
}

/// Joint `[S, D/2]` angle table for positions `start..start+s` shared by
/// every axis.
pub fn joint_theta(dims: &[usize], s: usize, start: i64) -> Tensor<f64> {
    let grids: Vec<Vec<i64>> = (0..dims.len())
        .map(|_| (start..start + s as i64).collect())
        .collect();
    let spec = FreqSpec::new(BASE, dims.to_vec()).unwrap();
    angle_table_nd(&grids, &spec).unwrap()
}

/// Joint table plus the per-axis tables `rope_reference_nd` wants, all built
/// from the same positions and frequencies.
pub fn tables_for<T: Element>(
    mode: PairingMode,
    dims: &[usize],
    s: usize,
    start: i64,
) -> (AngleTable<T>, Vec<AngleTable<T>>) {
    let joint = AngleTable::build(joint_theta(dims, s, start), mode, dims).unwrap();
    let per_axis = dims
        .iter()
        .map(|&d| {
            let positions: Vec<i64> = (start..start + s as i64).collect();
            AngleTable::for_positions(&positions, d, BASE, mode).unwrap()
        })
        .collect();
    (joint, per_axis)
}

/// Axis-split presets exercised by the equivalence suites.
pub fn dims_presets(d: usize) -> Vec<Vec<usize>> {
    let mut presets = vec![vec![d]];
    if d >= 4 {
        presets.push(vec![d / 2, d / 2]);
    }
    if d == 128 {
        presets.push(vec![44, 44, 40]);
    }
    presets
}

/// Whether every sub-width of the split is usable with the mode.
pub fn split_valid(mode: PairingMode, dims: &[usize]) -> bool {
    dims.iter().all(|&d| mode.validate_dim(d).is_ok())
}

/// Dot product accumulated in f64.
pub fn dot_f64<T: Element>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| to_f64(x) * to_f64(y)).sum()
}
