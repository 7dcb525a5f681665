//! Structural invariants of the signed-permutation maps, checked with exact
//! integer matrices built independently of the crate's dense type.

mod common;

use common::{dims_presets, split_valid};
use rome_kernels::{build_extension_maps, build_m, PairingMode, StructuredMap};

type IntMat = Vec<Vec<i64>>;

fn densify_int(map: &StructuredMap) -> IntMat {
    let d = map.width();
    let mut m = vec![vec![0i64; d]; d];
    for j in 0..d {
        m[j][map.src()[j]] = map.sign()[j] as i64;
    }
    m
}

fn matmul_int(a: &IntMat, b: &IntMat) -> IntMat {
    let d = a.len();
    let mut out = vec![vec![0i64; d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] == 0 {
                continue;
            }
            for j in 0..d {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn transpose_int(a: &IntMat) -> IntMat {
    let d = a.len();
    let mut out = vec![vec![0i64; d]; d];
    for i in 0..d {
        for j in 0..d {
            out[j][i] = a[i][j];
        }
    }
    out
}

fn identity_int(d: usize) -> IntMat {
    let mut m = vec![vec![0i64; d]; d];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

fn negate_int(a: &IntMat) -> IntMat {
    a.iter()
        .map(|row| row.iter().map(|&v| -v).collect())
        .collect()
}

#[test]
fn generator_modes_satisfy_m_squared_minus_identity() {
    for mode in [
        PairingMode::Half,
        PairingMode::Interleave,
        PairingMode::Quarter,
    ] {
        for d in [4usize, 8, 64, 128] {
            for dims in dims_presets(d) {
                if !split_valid(mode, &dims) {
                    continue;
                }
                let m = densify_int(&build_m(mode, &dims).unwrap());
                let squared = matmul_int(&m, &m);
                assert_eq!(
                    squared,
                    negate_int(&identity_int(d)),
                    "M^2 != -I for {mode}, dims {dims:?}"
                );
            }
        }
    }
}

#[test]
fn all_maps_orthogonal_exactly() {
    for mode in [
        PairingMode::Half,
        PairingMode::Interleave,
        PairingMode::Quarter,
    ] {
        for d in [4usize, 8, 64, 128] {
            for dims in dims_presets(d) {
                if !split_valid(mode, &dims) {
                    continue;
                }
                let map = build_m(mode, &dims).unwrap();
                assert!(map.is_permutation(), "{mode} dims {dims:?}");
                let m = densify_int(&map);
                assert_eq!(
                    matmul_int(&transpose_int(&m), &m),
                    identity_int(d),
                    "MᵀM != I for {mode}, dims {dims:?}"
                );
            }
        }
    }
}

#[test]
fn extension_factorization_all_even_widths() {
    // densify(M2) == densify(M_half) · densify(M1), exactly, for every even
    // width up to 128.
    for d in (2..=128).step_by(2) {
        let ext = build_extension_maps(d).unwrap();
        let m1 = densify_int(&ext.m1);
        let m2 = densify_int(&ext.m2);
        let half = densify_int(&build_m(PairingMode::Half, &[d]).unwrap());
        assert_eq!(m2, matmul_int(&half, &m1), "d = {d}");

        // M1 is a pure permutation, orthogonal.
        assert_eq!(
            matmul_int(&transpose_int(&m1), &m1),
            identity_int(d),
            "d = {d}"
        );
        assert!(
            m1.iter().flatten().all(|&v| v >= 0),
            "d = {d}: M1 must be unsigned"
        );
    }
}

#[test]
fn extension_composite_squares_to_minus_identity() {
    // M2·M1ᵀ is the half-mode generator expressed in the permuted basis, so
    // its square is -I.
    let d = 4;
    let ext = build_extension_maps(d).unwrap();
    let m1 = densify_int(&ext.m1);
    let m2 = densify_int(&ext.m2);
    let composite = matmul_int(&m2, &transpose_int(&m1));
    assert_eq!(
        matmul_int(&composite, &composite),
        negate_int(&identity_int(d))
    );
}

#[test]
fn nd_extension_blocks_factorize_too() {
    for dims in [vec![4usize, 6], vec![44, 44, 40]] {
        let d: usize = dims.iter().sum();
        let ext = rome_kernels::build_extension_maps_nd(&dims).unwrap();
        let half = densify_int(&build_m(PairingMode::Half, &dims).unwrap());
        assert_eq!(
            densify_int(&ext.m2),
            matmul_int(&half, &densify_int(&ext.m1)),
            "dims {dims:?}"
        );
        assert_eq!(
            matmul_int(&transpose_int(&densify_int(&ext.m1)), &densify_int(&ext.m1)),
            identity_int(d)
        );
    }
}
