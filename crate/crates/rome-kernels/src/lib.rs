//! Rotary position embedding kernels, three ways.
//!
//! * [`mod@reference`] — the literal split/rotate/merge recipes for the four
//!   pairing modes (half, interleave, interleave-half, quarter) and their
//!   factorized multi-axis variants, with deliberately materialized
//!   intermediates. The baseline.
//! * [`rome`] — the structured-matrix reformulation
//!   `out = cos ⊙ x + sin ⊙ (M x)`, where `M` is a signed permutation
//!   applied as a gather (or a dense product, for the matrix-unit analogue),
//!   plus the two-map extension for interleave-half and the backward pass.
//! * [`oracle`] — the ground truth: the full block-diagonal rotation matrix
//!   built per position and applied by dense matrix product in f64.
//!
//! [`pipeline`] adds the fused `mul_add_mul` combine and a two-stage
//! concurrent tile pipeline whose output is bit-identical to the sequential
//! fused path.
//!
//! All types are immutable after construction and the kernels are pure, so
//! everything is safe to share across threads; only the pipeline spawns any.

pub mod angles;
pub mod error;
pub mod mode;
pub mod oracle;
pub mod pipeline;
pub mod reference;
pub mod rome;
pub mod structured;
pub mod tensor;

pub use angles::{
    angle_table_1d, angle_table_nd, expand_cos_sin, expand_cos_sin_nd, frequencies, volume_grids,
    AngleTable, FreqSpec,
};
pub use error::{KernelError, Result};
pub use mode::PairingMode;
pub use oracle::{build_r, densify, oracle_forward, oracle_forward_counted, DenseMatrix};
pub use pipeline::{
    mul_add_mul, pipelined_rome, pipelined_rome_ext, pipelined_rome_ext_instrumented,
    pipelined_rome_instrumented, rome_ext_fused, rome_fused, PipelineConfig, PipelineStage,
    PipelineStats, StageHook,
};
pub use reference::{rope_reference, rope_reference_nd};
pub use rome::{
    rome_backward, rome_ext_forward, rome_forward, rome_forward_counted, ApplyPath, ExtForm,
};
pub use structured::{
    apply_structured, build_extension_maps, build_extension_maps_nd, build_m, ExtensionMaps,
    SignConvention, StructuredMap,
};
pub use tensor::{Element, Tensor};
