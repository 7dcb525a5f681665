//! Structured-matrix rotary embedding: `out = cos ⊙ x + sin ⊙ (M x)`.
//!
//! The split/merge dataflow of the baselines collapses into one gather (or
//! one dense product, the matrix-unit analogue) plus one elementwise
//! combine. The interleave-half convention needs the two-map extension
//! `out = cos ⊙ (M₁x) + sin ⊙ (M₂x)` because its permutation is not a
//! rotation generator.

use crate::angles::AngleTable;
use crate::error::Result;
use crate::oracle::densify;
use crate::structured::{apply_structured, ExtensionMaps, StructuredMap};
use crate::tensor::{Element, Tensor};

/// How `M x` is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyPath {
    /// Signed-permutation gather: one contiguous Θ(d) pass per row.
    Gather,
    /// Dense product against the materialized map: the Θ(d²) matrix-unit
    /// route, kept for benchmarking and cross-checking.
    Matmul,
}

/// Which algebraic form of the interleave-half extension to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtForm {
    /// `cos ⊙ (M₁x) + sin ⊙ (M₂x)` over the full width.
    Unified,
    /// The two-half form: rotate `(evens, odds)` and concatenate. Equals the
    /// unified form bit for bit given the shared summation order.
    Split,
}

fn check_rome_args<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    map: &StructuredMap,
) -> Result<()> {
    map.check_width(x.width())?;
    map.check_table(angles.mode(), angles.dims())?;
    x.check_rotary_layout(angles.width(), angles.positions())
}

/// `cos ⊙ a + sin ⊙ b` in one pass, two explicit products per element.
fn combine<T: Element>(a: &[T], b: &[T], angles: &AngleTable<T>, out: &mut [T]) {
    let d = angles.width();
    let s_len = angles.positions();
    for (r, (out_row, (a_row, b_row))) in out
        .chunks_exact_mut(d)
        .zip(a.chunks_exact(d).zip(b.chunks_exact(d)))
        .enumerate()
    {
        let cos = angles.cos_row(r % s_len);
        let sin = angles.sin_row(r % s_len);
        for j in 0..d {
            out_row[j] = cos[j] * a_row[j] + sin[j] * b_row[j];
        }
    }
}

/// Rotary embedding via the structured map.
pub fn rome_forward<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    map: &StructuredMap,
    path: ApplyPath,
) -> Result<Tensor<T>> {
    Ok(rome_forward_counted(x, angles, map, path)?.0)
}

/// `rome_forward` plus the number of multiply-add operations executed.
/// Pairs with `oracle_forward_counted` to assert the Θ(S·D²) vs Θ(S·D)
/// cost asymmetry.
pub fn rome_forward_counted<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    map: &StructuredMap,
    path: ApplyPath,
) -> Result<(Tensor<T>, u64)> {
    check_rome_args(x, angles, map)?;
    let d = x.width();
    let mut madds: u64 = 0;
    let x_new = match path {
        ApplyPath::Gather => apply_structured(map, x)?,
        ApplyPath::Matmul => {
            let dense = densify::<T>(map);
            let mut buf = Tensor::zeros(x.shape().to_vec());
            for (row, out_row) in x
                .as_slice()
                .chunks_exact(d)
                .zip(buf.as_mut_slice().chunks_exact_mut(d))
            {
                dense.matvec(row, out_row);
                madds += (d * d) as u64;
            }
            buf
        }
    };
    let mut out = Tensor::zeros(x.shape().to_vec());
    combine(x.as_slice(), x_new.as_slice(), angles, out.as_mut_slice());
    madds += 2 * x.as_slice().len() as u64;
    Ok((out, madds))
}

/// Interleave-half rotary embedding via the two-map extension. The output
/// lives in the evens-first permuted basis, matching the reference recipe.
pub fn rome_ext_forward<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    ext: &ExtensionMaps,
    form: ExtForm,
) -> Result<Tensor<T>> {
    ext.m1.check_width(x.width())?;
    ext.check_table(angles.mode(), angles.dims())?;
    x.check_rotary_layout(angles.width(), angles.positions())?;

    let mut out = Tensor::zeros(x.shape().to_vec());
    match form {
        ExtForm::Unified => {
            let m1x = apply_structured(&ext.m1, x)?;
            let m2x = apply_structured(&ext.m2, x)?;
            combine(m1x.as_slice(), m2x.as_slice(), angles, out.as_mut_slice());
        }
        ExtForm::Split => {
            let d = x.width();
            let s_len = angles.positions();
            let dims = ext.dims().to_vec();
            for (r, (out_row, row)) in out
                .as_mut_slice()
                .chunks_exact_mut(d)
                .zip(x.as_slice().chunks_exact(d))
                .enumerate()
            {
                let cos = angles.cos_row(r % s_len);
                let sin = angles.sin_row(r % s_len);
                let mut offset = 0;
                for &block_d in &dims {
                    let half = block_d / 2;
                    let (c1, c2) = (
                        &cos[offset..offset + half],
                        &cos[offset + half..offset + block_d],
                    );
                    let (s1, s2) = (
                        &sin[offset..offset + half],
                        &sin[offset + half..offset + block_d],
                    );
                    for j in 0..half {
                        // x1 = evens, x2 = odds of this block
                        let x1 = row[offset + 2 * j];
                        let x2 = row[offset + 2 * j + 1];
                        out_row[offset + j] = c1[j] * x1 - s1[j] * x2;
                        out_row[offset + half + j] = c2[j] * x2 + s2[j] * x1;
                    }
                    offset += block_d;
                }
            }
        }
    }
    Ok(out)
}

/// Gradient of `rome_forward` with respect to `x`:
/// `grad = cos ⊙ g + Mᵀ(sin ⊙ g)`.
pub fn rome_backward<T: Element>(
    g: &Tensor<T>,
    angles: &AngleTable<T>,
    map: &StructuredMap,
) -> Result<Tensor<T>> {
    check_rome_args(g, angles, map)?;
    let d = g.width();
    let s_len = angles.positions();

    let mut sg = Tensor::zeros(g.shape().to_vec());
    for (r, (dst, src)) in sg
        .as_mut_slice()
        .chunks_exact_mut(d)
        .zip(g.as_slice().chunks_exact(d))
        .enumerate()
    {
        let sin = angles.sin_row(r % s_len);
        for j in 0..d {
            dst[j] = sin[j] * src[j];
        }
    }
    let gathered = apply_structured(&map.transpose(), &sg)?;

    let mut out = Tensor::zeros(g.shape().to_vec());
    for (r, (out_row, (g_row, m_row))) in out
        .as_mut_slice()
        .chunks_exact_mut(d)
        .zip(
            g.as_slice()
                .chunks_exact(d)
                .zip(gathered.as_slice().chunks_exact(d)),
        )
        .enumerate()
    {
        let cos = angles.cos_row(r % s_len);
        for j in 0..d {
            out_row[j] = cos[j] * g_row[j] + m_row[j];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{angle_table_1d, frequencies, AngleTable};
    use crate::mode::PairingMode;
    use crate::oracle::densify;
    use crate::structured::{build_extension_maps, build_m};

    fn table<T: Element>(rows: Vec<Vec<f64>>, mode: PairingMode, d: usize) -> AngleTable<T> {
        let s = rows.len();
        let half = rows[0].len();
        let theta = Tensor::new(vec![s, half], rows.into_iter().flatten().collect()).unwrap();
        AngleTable::build(theta, mode, &[d]).unwrap()
    }

    #[test]
    fn interleave_quarter_turn_both_paths() {
        let x = Tensor::new(vec![1, 4], vec![1.0f64, 2.0, 3.0, 4.0]).unwrap();
        let t = table(
            vec![vec![std::f64::consts::FRAC_PI_2, 0.0]],
            PairingMode::Interleave,
            4,
        );
        let map = build_m(PairingMode::Interleave, &[4]).unwrap();
        for path in [ApplyPath::Gather, ApplyPath::Matmul] {
            let out = rome_forward(&x, &t, &map, path).unwrap();
            let expect = [-2.0, 1.0, 3.0, 4.0];
            for (o, e) in out.as_slice().iter().zip(&expect) {
                assert!((o - e).abs() < 1e-15, "{path:?}: {o} vs {e}");
            }
        }
    }

    #[test]
    fn zero_angles_exact_identity() {
        let x = Tensor::new(
            vec![2, 4],
            vec![0.1f32, -2.5, 3.75, 4.0, -1.0, 0.5, 9.0, -8.25],
        )
        .unwrap();
        let t = table(vec![vec![0.0, 0.0], vec![0.0, 0.0]], PairingMode::Half, 4);
        let map = build_m(PairingMode::Half, &[4]).unwrap();
        let out = rome_forward(&x, &t, &map, ApplyPath::Gather).unwrap();
        assert_eq!(out.as_slice(), x.as_slice());
    }

    #[test]
    fn gather_and_matmul_agree_exactly() {
        let freqs = frequencies(8, 10_000.0).unwrap();
        let theta = angle_table_1d(&[0, 3, 7, 11], &freqs);
        let t = AngleTable::<f32>::build(theta, PairingMode::Quarter, &[8]).unwrap();
        let map = build_m(PairingMode::Quarter, &[8]).unwrap();
        let data: Vec<f32> = (0..32).map(|i| ((i * 37) % 17) as f32 - 8.0).collect();
        let x = Tensor::new(vec![4, 8], data).unwrap();
        let a = rome_forward(&x, &t, &map, ApplyPath::Gather).unwrap();
        let b = rome_forward(&x, &t, &map, ApplyPath::Matmul).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn ext_zero_angles_is_evens_first_permutation() {
        let x = Tensor::new(vec![1, 6], vec![1.0f32, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let t = table(vec![vec![0.0; 3]], PairingMode::InterleaveHalf, 6);
        let ext = build_extension_maps(6).unwrap();
        for form in [ExtForm::Unified, ExtForm::Split] {
            let out = rome_ext_forward(&x, &t, &ext, form).unwrap();
            assert_eq!(out.as_slice(), &[1.0, 3.0, 5.0, 2.0, 4.0, 6.0], "{form:?}");
        }
    }

    #[test]
    fn ext_quarter_turn_oracle_confirmed_value() {
        let x = Tensor::new(vec![1, 4], vec![1.0f64, 2.0, 3.0, 4.0]).unwrap();
        let t = table(
            vec![vec![std::f64::consts::FRAC_PI_2, 0.0]],
            PairingMode::InterleaveHalf,
            4,
        );
        let ext = build_extension_maps(4).unwrap();
        for form in [ExtForm::Unified, ExtForm::Split] {
            let out = rome_ext_forward(&x, &t, &ext, form).unwrap();
            let expect = [-2.0, 3.0, 1.0, 4.0];
            for (o, e) in out.as_slice().iter().zip(&expect) {
                assert!((o - e).abs() < 1e-15, "{form:?}: {o} vs {e}");
            }
        }
    }

    #[test]
    fn ext_forms_bit_identical() {
        let freqs = frequencies(16, 10_000.0).unwrap();
        let theta = angle_table_1d(&[2, 9, 31], &freqs);
        let t = AngleTable::<f32>::build(theta, PairingMode::InterleaveHalf, &[16]).unwrap();
        let ext = build_extension_maps(16).unwrap();
        let data: Vec<f32> = (0..48)
            .map(|i| ((i * 13) % 23) as f32 * 0.17 - 1.5)
            .collect();
        let x = Tensor::new(vec![3, 16], data).unwrap();
        let a = rome_ext_forward(&x, &t, &ext, ExtForm::Unified).unwrap();
        let b = rome_ext_forward(&x, &t, &ext, ExtForm::Split).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn backward_zero_angles_passes_gradient_through() {
        let g = Tensor::new(vec![1, 4], vec![0.5f32, -1.5, 2.5, 3.5]).unwrap();
        let t = table(vec![vec![0.0, 0.0]], PairingMode::Half, 4);
        let map = build_m(PairingMode::Half, &[4]).unwrap();
        let out = rome_backward(&g, &t, &map).unwrap();
        assert_eq!(out.as_slice(), g.as_slice());
    }

    #[test]
    fn transpose_equals_negated_dense_for_half_d8() {
        let map = build_m(PairingMode::Half, &[8]).unwrap();
        let mt = densify::<f64>(&map.transpose());
        let neg = densify::<f64>(&map.negated());
        assert_eq!(mt.max_abs_diff(&neg), 0.0);
    }

    #[test]
    fn negated_map_rotates_backwards() {
        // cos is even and sin odd, so -M with angles θ equals M with -θ
        let freqs = frequencies(4, 100.0).unwrap();
        let fwd =
            AngleTable::<f64>::build(angle_table_1d(&[5], &freqs), PairingMode::Interleave, &[4])
                .unwrap();
        let bwd =
            AngleTable::<f64>::build(angle_table_1d(&[-5], &freqs), PairingMode::Interleave, &[4])
                .unwrap();
        let map = build_m(PairingMode::Interleave, &[4]).unwrap();
        let x = Tensor::new(vec![1, 4], vec![0.3, -1.2, 2.2, 0.9]).unwrap();
        let a = rome_forward(&x, &fwd, &map.negated(), ApplyPath::Gather).unwrap();
        let b = rome_forward(&x, &bwd, &map, ApplyPath::Gather).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn map_table_mismatch_rejected() {
        let x = Tensor::<f32>::zeros(vec![1, 4]);
        let t = table(vec![vec![0.0, 0.0]], PairingMode::Half, 4);
        let map = build_m(PairingMode::Interleave, &[4]).unwrap();
        assert!(rome_forward(&x, &t, &map, ApplyPath::Gather).is_err());
        let ext = build_extension_maps(4).unwrap();
        assert!(rome_ext_forward(&x, &t, &ext, ExtForm::Unified).is_err());
    }
}
