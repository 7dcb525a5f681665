//! Fused elementwise operator and the two-stage concurrent tile pipeline.
//!
//! `mul_add_mul` collapses the combine step's two multiplies and one add
//! into a single pass with one fused multiply-add per element.
//!
//! `pipelined_rome` emulates matrix-unit / vector-unit co-execution: stage 1
//! gathers `x_new` tiles through the structured map, stage 2 consumes them
//! with `mul_add_mul`, connected by a bounded hand-off queue. Tiles are
//! whole rows (every output element depends only on its own row), each tile
//! is written by exactly one stage-2 task into a disjoint output region, and
//! both stages share the exact per-element expression of the sequential
//! fused path — so the result is bit-identical to `rome_fused` regardless of
//! tile size, worker counts, or scheduling.

use crate::angles::AngleTable;
use crate::error::{KernelError, Result};
use crate::structured::{apply_structured_into, ExtensionMaps, StructuredMap};
use crate::tensor::{Element, Tensor};
use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};

/// Tile pipeline parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    /// Rows of the position axis per tile.
    pub tile_rows: usize,
    /// Maximum tiles in flight between the stages.
    pub queue_depth: usize,
    /// Workers gathering `x_new` tiles.
    pub workers_stage1: usize,
    /// Workers running the fused combine.
    pub workers_stage2: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tile_rows: 128,
            queue_depth: 4,
            workers_stage1: 1,
            workers_stage2: 1,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tile_rows == 0
            || self.queue_depth == 0
            || self.workers_stage1 == 0
            || self.workers_stage2 == 0
        {
            return Err(KernelError::InvalidConfig(format!(
                "pipeline parameters must all be at least 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// `out[j] = a[j]·b[j] + c[j]·d_[j]`, one fused multiply-add per element.
pub fn mul_add_mul<T: Element>(a: &[T], b: &[T], c: &[T], d_: &[T]) -> Result<Vec<T>> {
    if a.len() != b.len() || a.len() != c.len() || a.len() != d_.len() {
        return Err(KernelError::ShapeMismatch(format!(
            "mul_add_mul row lengths differ: {}, {}, {}, {}",
            a.len(),
            b.len(),
            c.len(),
            d_.len()
        )));
    }
    let mut out = vec![T::zero(); a.len()];
    mul_add_mul_into(a, b, c, d_, &mut out);
    Ok(out)
}

/// The shared per-element expression of the fused and pipelined paths.
/// Exactly one rounding order: `fma(a, b, c·d)`.
#[inline]
fn mul_add_mul_into<T: Element>(a: &[T], b: &[T], c: &[T], d_: &[T], out: &mut [T]) {
    for j in 0..out.len() {
        out[j] = a[j].mul_add(b[j], c[j] * d_[j]);
    }
}

/// Sequential fused rotary embedding: gather `x_new` row by row, combine
/// with `mul_add_mul`. This is the single-threaded twin of
/// `pipelined_rome`.
pub fn rome_fused<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    map: &StructuredMap,
) -> Result<Tensor<T>> {
    map.check_width(x.width())?;
    map.check_table(angles.mode(), angles.dims())?;
    x.check_rotary_layout(angles.width(), angles.positions())?;

    let d = x.width();
    let s_len = angles.positions();
    let mut out = Tensor::zeros(x.shape().to_vec());
    let mut x_new = vec![T::zero(); d];
    for (r, (out_row, row)) in out
        .as_mut_slice()
        .chunks_exact_mut(d)
        .zip(x.as_slice().chunks_exact(d))
        .enumerate()
    {
        apply_structured_into(map, row, &mut x_new);
        let s = r % s_len;
        mul_add_mul_into(angles.cos_row(s), row, angles.sin_row(s), &x_new, out_row);
    }
    Ok(out)
}

/// Fused interleave-half: gather both extension maps row by row and combine
/// with `mul_add_mul`. Single-threaded twin of `pipelined_rome_ext`.
pub fn rome_ext_fused<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    ext: &ExtensionMaps,
) -> Result<Tensor<T>> {
    ext.m1.check_width(x.width())?;
    ext.check_table(angles.mode(), angles.dims())?;
    x.check_rotary_layout(angles.width(), angles.positions())?;

    let d = x.width();
    let s_len = angles.positions();
    let mut out = Tensor::zeros(x.shape().to_vec());
    let mut m1x = vec![T::zero(); d];
    let mut m2x = vec![T::zero(); d];
    for (r, (out_row, row)) in out
        .as_mut_slice()
        .chunks_exact_mut(d)
        .zip(x.as_slice().chunks_exact(d))
        .enumerate()
    {
        apply_structured_into(&ext.m1, row, &mut m1x);
        apply_structured_into(&ext.m2, row, &mut m2x);
        let s = r % s_len;
        mul_add_mul_into(angles.cos_row(s), &m1x, angles.sin_row(s), &m2x, out_row);
    }
    Ok(out)
}

// ── Bounded hand-off queue ──────────────────────────────────────────────

struct QueueState<T> {
    items: VecDeque<T>,
    closed: bool,
    high_water: usize,
}

/// Blocking MPMC queue with a hard capacity and an occupancy high-water
/// mark, tracked under the lock so the boundedness invariant is observable
/// exactly.
struct BoundedQueue<T> {
    state: Mutex<QueueState<T>>,
    not_full: Condvar,
    not_empty: Condvar,
    capacity: usize,
}

impl<T> BoundedQueue<T> {
    fn new(capacity: usize) -> Self {
        Self {
            state: Mutex::new(QueueState {
                items: VecDeque::with_capacity(capacity),
                closed: false,
                high_water: 0,
            }),
            not_full: Condvar::new(),
            not_empty: Condvar::new(),
            capacity,
        }
    }

    fn push(&self, item: T) {
        let mut st = self.state.lock().expect("queue poisoned");
        while st.items.len() >= self.capacity {
            st = self.not_full.wait(st).expect("queue poisoned");
        }
        st.items.push_back(item);
        st.high_water = st.high_water.max(st.items.len());
        drop(st);
        self.not_empty.notify_one();
    }

    fn pop(&self) -> Option<T> {
        let mut st = self.state.lock().expect("queue poisoned");
        loop {
            if let Some(item) = st.items.pop_front() {
                drop(st);
                self.not_full.notify_one();
                return Some(item);
            }
            if st.closed {
                return None;
            }
            st = self.not_empty.wait(st).expect("queue poisoned");
        }
    }

    fn close(&self) {
        let mut st = self.state.lock().expect("queue poisoned");
        st.closed = true;
        drop(st);
        self.not_empty.notify_all();
    }

    fn high_water(&self) -> usize {
        self.state.lock().expect("queue poisoned").high_water
    }
}

// ── Pipeline ────────────────────────────────────────────────────────────

/// Which stage a hook callback is reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PipelineStage {
    Gather,
    Combine,
}

/// Test instrumentation: called once per (stage, tile index) before the
/// stage processes that tile. Used to inject adversarial delays.
pub type StageHook = dyn Fn(PipelineStage, usize) + Sync;

/// Observability counters from one pipeline run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineStats {
    pub tiles: usize,
    pub queue_high_water: usize,
}

struct TileMsg<T> {
    index: usize,
    start_row: usize,
    /// cos operand rows; `None` means stage 2 reads the input rows directly.
    carrier: Option<Vec<T>>,
    /// sin operand rows: the map-rotated tile.
    rotated: Vec<T>,
}

/// Raw base pointer for disjoint-tile writes; safe because each tile index
/// travels through the queue exactly once and the scope joins all writers
/// before the buffer is read.
struct OutPtr<T>(*mut T);
unsafe impl<T: Send> Send for OutPtr<T> {}
unsafe impl<T: Send> Sync for OutPtr<T> {}

/// Two-stage concurrent rotary embedding over row tiles.
pub fn pipelined_rome<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    map: &StructuredMap,
    cfg: &PipelineConfig,
) -> Result<Tensor<T>> {
    Ok(pipelined_rome_instrumented(x, angles, map, cfg, None)?.0)
}

/// `pipelined_rome` with queue statistics and an optional per-tile hook.
pub fn pipelined_rome_instrumented<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    map: &StructuredMap,
    cfg: &PipelineConfig,
    hook: Option<&StageHook>,
) -> Result<(Tensor<T>, PipelineStats)> {
    map.check_width(x.width())?;
    map.check_table(angles.mode(), angles.dims())?;
    let stage1 = |src: &[T]| {
        let mut rotated = vec![T::zero(); src.len()];
        apply_structured_into(map, src, &mut rotated);
        (None, rotated)
    };
    run_tile_pipeline(x, angles, cfg, hook, &stage1)
}

/// Two-stage concurrent interleave-half embedding over row tiles.
pub fn pipelined_rome_ext<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    ext: &ExtensionMaps,
    cfg: &PipelineConfig,
) -> Result<Tensor<T>> {
    Ok(pipelined_rome_ext_instrumented(x, angles, ext, cfg, None)?.0)
}

/// `pipelined_rome_ext` with queue statistics and an optional hook.
pub fn pipelined_rome_ext_instrumented<T: Element>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    ext: &ExtensionMaps,
    cfg: &PipelineConfig,
    hook: Option<&StageHook>,
) -> Result<(Tensor<T>, PipelineStats)> {
    ext.m1.check_width(x.width())?;
    ext.check_table(angles.mode(), angles.dims())?;
    let stage1 = |src: &[T]| {
        let mut carrier = vec![T::zero(); src.len()];
        let mut rotated = vec![T::zero(); src.len()];
        apply_structured_into(&ext.m1, src, &mut carrier);
        apply_structured_into(&ext.m2, src, &mut rotated);
        (Some(carrier), rotated)
    };
    run_tile_pipeline(x, angles, cfg, hook, &stage1)
}

fn run_tile_pipeline<T, F>(
    x: &Tensor<T>,
    angles: &AngleTable<T>,
    cfg: &PipelineConfig,
    hook: Option<&StageHook>,
    stage1: &F,
) -> Result<(Tensor<T>, PipelineStats)>
where
    T: Element,
    F: Fn(&[T]) -> (Option<Vec<T>>, Vec<T>) + Sync,
{
    cfg.validate()?;
    x.check_rotary_layout(angles.width(), angles.positions())?;

    let d = x.width();
    let rows = x.num_rows();
    let s_len = angles.positions();
    let tiles = rows.div_ceil(cfg.tile_rows);

    let mut out: Tensor<T> = Tensor::zeros(x.shape().to_vec());
    let out_base = OutPtr(out.as_mut_slice().as_mut_ptr());

    let queue = BoundedQueue::<TileMsg<T>>::new(cfg.queue_depth);
    let next_tile = AtomicUsize::new(0);
    let producers_left = AtomicUsize::new(cfg.workers_stage1);
    let x_slice = x.as_slice();

    std::thread::scope(|scope| {
        for _ in 0..cfg.workers_stage1 {
            let queue = &queue;
            let next_tile = &next_tile;
            let producers_left = &producers_left;
            scope.spawn(move || {
                loop {
                    let t = next_tile.fetch_add(1, Ordering::Relaxed);
                    if t >= tiles {
                        break;
                    }
                    if let Some(h) = hook {
                        h(PipelineStage::Gather, t);
                    }
                    let start_row = t * cfg.tile_rows;
                    let tile_len = cfg.tile_rows.min(rows - start_row) * d;
                    let src = &x_slice[start_row * d..start_row * d + tile_len];
                    let (carrier, rotated) = stage1(src);
                    queue.push(TileMsg {
                        index: t,
                        start_row,
                        carrier,
                        rotated,
                    });
                }
                if producers_left.fetch_sub(1, Ordering::AcqRel) == 1 {
                    queue.close();
                }
            });
        }

        for _ in 0..cfg.workers_stage2 {
            let queue = &queue;
            let out_base = &out_base;
            scope.spawn(move || {
                while let Some(tile) = queue.pop() {
                    if let Some(h) = hook {
                        h(PipelineStage::Combine, tile.index);
                    }
                    let tile_rows = tile.rotated.len() / d;
                    // SAFETY: each tile index is queued exactly once, so this
                    // region [start_row*d, +tile_len) is written by exactly
                    // one task; the scope joins before `out` is read.
                    let out_tile = unsafe {
                        std::slice::from_raw_parts_mut(
                            out_base.0.add(tile.start_row * d),
                            tile.rotated.len(),
                        )
                    };
                    for i in 0..tile_rows {
                        let r = tile.start_row + i;
                        let s = r % s_len;
                        let cos_operand = match &tile.carrier {
                            Some(c) => &c[i * d..(i + 1) * d],
                            None => &x_slice[r * d..(r + 1) * d],
                        };
                        mul_add_mul_into(
                            angles.cos_row(s),
                            cos_operand,
                            angles.sin_row(s),
                            &tile.rotated[i * d..(i + 1) * d],
                            &mut out_tile[i * d..(i + 1) * d],
                        );
                    }
                }
            });
        }
    });

    let stats = PipelineStats {
        tiles,
        queue_high_water: queue.high_water(),
    };
    Ok((out, stats))
}
