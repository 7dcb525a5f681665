//! Executes a benchmark configuration: builds inputs and tables, verifies
//! every selected implementation against the dense oracle, then times them.

use crate::config::{BenchConfig, ImplKind, Precision};
use crate::error::BenchError;
use crate::report::{speedup_pct, speedup_times, BenchEnv, BenchReport, BenchRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rome_kernels::{
    angle_table_nd, build_extension_maps_nd, build_m, densify, oracle_forward, pipelined_rome,
    pipelined_rome_ext, rome_ext_forward, rome_ext_fused, rome_forward, rome_fused, rope_reference,
    rope_reference_nd, AngleTable, ApplyPath, Element, ExtForm, ExtensionMaps, FreqSpec,
    PairingMode, PipelineConfig, StructuredMap, Tensor,
};
use std::time::{Duration, Instant};

/// Run the configured benchmark, check first, then time.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    match cfg.precision {
        Precision::F32 => run_bench_typed::<f32>(cfg),
        Precision::F64 => run_bench_typed::<f64>(cfg),
    }
}

/// Shape-dependent one-time state: angle tables and maps. Built outside the
/// timed region unless `--include-setup` moves it inside.
struct Setup<T> {
    joint: AngleTable<T>,
    per_axis: Vec<AngleTable<T>>,
    theta: Tensor<f64>,
    map: Option<StructuredMap>,
    ext: Option<ExtensionMaps>,
    pipe_cfg: PipelineConfig,
}

impl<T: Element> Setup<T> {
    fn build(cfg: &BenchConfig, s: usize) -> Result<Self, BenchError> {
        let grids = bench_grids(s, cfg.dims.len());
        let spec = FreqSpec::new(FreqSpec::DEFAULT_BASE, cfg.dims.clone())?;
        let theta = angle_table_nd(&grids, &spec)?;
        let joint = AngleTable::build(theta.clone(), cfg.mode, &cfg.dims)?;
        let per_axis = cfg
            .dims
            .iter()
            .zip(&grids)
            .map(|(&d, grid)| AngleTable::for_positions(grid, d, spec.base, cfg.mode))
            .collect::<rome_kernels::Result<Vec<_>>>()?;
        let (map, ext) = if cfg.mode == PairingMode::InterleaveHalf {
            (None, Some(build_extension_maps_nd(&cfg.dims)?))
        } else {
            (Some(build_m(cfg.mode, &cfg.dims)?), None)
        };
        Ok(Self {
            joint,
            per_axis,
            theta,
            map,
            ext,
            pipe_cfg: PipelineConfig {
                tile_rows: cfg.tile_rows,
                queue_depth: cfg.queue_depth,
                workers_stage1: 1,
                workers_stage2: 1,
            },
        })
    }
}

/// Per-axis integer position grids for `s` flattened positions: a balanced
/// synthetic volume, outermost axis first.
fn bench_grids(s: usize, n_axes: usize) -> Vec<Vec<i64>> {
    if n_axes == 1 {
        return vec![(0..s as i64).collect()];
    }
    let k = (s as f64).powf(1.0 / n_axes as f64).ceil().max(1.0) as i64;
    (0..n_axes)
        .map(|a| {
            let stride = k.pow((n_axes - 1 - a) as u32);
            (0..s as i64).map(|i| (i / stride) % k).collect()
        })
        .collect()
}

/// Seeded uniform(-1, 1) payload of shape `[B, N, S, D]`.
fn seeded_tensor<T: Element>(shape: [usize; 4], seed: u64) -> Tensor<T> {
    let numel: usize = shape.iter().product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<T> = (0..numel)
        .map(|_| T::from(rng.gen_range(-1.0f64..1.0)).unwrap())
        .collect();
    Tensor::new(shape.to_vec(), data).unwrap()
}

/// The unfused combine used by the dense extension arm, mirroring the
/// structured paths' expression.
fn ext_matmul<T: Element>(
    x: &Tensor<T>,
    joint: &AngleTable<T>,
    ext: &ExtensionMaps,
) -> rome_kernels::Result<Tensor<T>> {
    let d = x.width();
    let s_len = joint.positions();
    ext.m1.check_width(d)?;
    let dense1 = densify::<T>(&ext.m1);
    let dense2 = densify::<T>(&ext.m2);
    let mut out = Tensor::zeros(x.shape().to_vec());
    let mut a = vec![T::zero(); d];
    let mut b = vec![T::zero(); d];
    for (r, (out_row, row)) in out
        .as_mut_slice()
        .chunks_exact_mut(d)
        .zip(x.as_slice().chunks_exact(d))
        .enumerate()
    {
        dense1.matvec(row, &mut a);
        dense2.matvec(row, &mut b);
        let cos = joint.cos_row(r % s_len);
        let sin = joint.sin_row(r % s_len);
        for j in 0..d {
            out_row[j] = cos[j] * a[j] + sin[j] * b[j];
        }
    }
    Ok(out)
}

/// One full application of an implementation to the payload.
fn run_impl<T: Element>(
    kind: ImplKind,
    x: &Tensor<T>,
    cfg: &BenchConfig,
    setup: &Setup<T>,
) -> Result<Tensor<T>, BenchError> {
    let out = match kind {
        ImplKind::Reference => rope_reference(x, &setup.joint, cfg.mode)?,
        ImplKind::ReferenceNd => rope_reference_nd(x, &setup.per_axis, &cfg.dims, cfg.mode)?,
        ImplKind::RomeGather => match (&setup.map, &setup.ext) {
            (Some(map), _) => rome_forward(x, &setup.joint, map, ApplyPath::Gather)?,
            (None, Some(ext)) => rome_ext_forward(x, &setup.joint, ext, ExtForm::Unified)?,
            _ => unreachable!("setup holds a map or extension maps"),
        },
        ImplKind::RomeMatmul => match (&setup.map, &setup.ext) {
            (Some(map), _) => rome_forward(x, &setup.joint, map, ApplyPath::Matmul)?,
            (None, Some(ext)) => ext_matmul(x, &setup.joint, ext)?,
            _ => unreachable!("setup holds a map or extension maps"),
        },
        ImplKind::RomeFused => match (&setup.map, &setup.ext) {
            (Some(map), _) => rome_fused(x, &setup.joint, map)?,
            (None, Some(ext)) => rome_ext_fused(x, &setup.joint, ext)?,
            _ => unreachable!("setup holds a map or extension maps"),
        },
        ImplKind::RomePipelined => match (&setup.map, &setup.ext) {
            (Some(map), _) => pipelined_rome(x, &setup.joint, map, &setup.pipe_cfg)?,
            (None, Some(ext)) => pipelined_rome_ext(x, &setup.joint, ext, &setup.pipe_cfg)?,
            _ => unreachable!("setup holds a map or extension maps"),
        },
        ImplKind::DenseOracle => oracle_forward(x, &setup.theta, cfg.mode, &cfg.dims)?,
    };
    Ok(out)
}

/// Verify every selected implementation against the dense oracle before any
/// timing. Runs on a reduced copy of the shape (B=N=1, S capped at 64, the
/// domain the tolerances are defined for); fail-closed.
fn equivalence_check<T: Element>(cfg: &BenchConfig) -> Result<(), BenchError> {
    let s_check = cfg.positions().min(64);
    let mini_cfg = BenchConfig {
        shape: [1, 1, s_check, cfg.width()],
        ..cfg.clone()
    };
    let setup = Setup::<T>::build(&mini_cfg, s_check)?;
    let x = seeded_tensor::<T>(mini_cfg.shape, cfg.seed);
    let truth = oracle_forward(&x, &setup.theta, cfg.mode, &cfg.dims)?;
    let tolerance = cfg.precision.tolerance();

    for &kind in &cfg.impls {
        let mut out = run_impl(kind, &x, &mini_cfg, &setup)?;
        if cfg.fault_inject == Some(kind) {
            let first = &mut out.as_mut_slice()[0];
            *first = *first + T::one();
        }
        let max_delta = out.max_abs_diff(&truth);
        if max_delta > tolerance {
            let (row, col) = out.first_diff_index(&truth, tolerance).unwrap_or((0, 0));
            return Err(BenchError::Equivalence {
                impl_name: kind.name().into(),
                max_delta,
                row,
                col,
                tolerance,
            });
        }
    }
    Ok(())
}

/// Shortest sample worth trusting from the monotonic clock; anything faster
/// gets an inner repeat loop.
const MIN_SAMPLE: Duration = Duration::from_micros(50);

fn time_samples(mut f: impl FnMut(), iters: usize, warmup: usize) -> Vec<f64> {
    for _ in 0..warmup {
        f();
    }
    // calibrate the inner repeat count against timer resolution
    let start = Instant::now();
    f();
    let once = start.elapsed();
    let inner = if once < MIN_SAMPLE {
        (MIN_SAMPLE.as_nanos() / once.as_nanos().max(1)) as usize + 1
    } else {
        1
    };
    (0..iters)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..inner {
                f();
            }
            start.elapsed().as_secs_f64() * 1e3 / inner as f64
        })
        .collect()
}

fn mean(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

fn median(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn stddev(samples: &[f64], mean: f64) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let var =
        samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (samples.len() - 1) as f64;
    var.sqrt()
}

fn run_bench_typed<T: Element>(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    if cfg.check {
        equivalence_check::<T>(cfg)?;
    }

    let x = seeded_tensor::<T>(cfg.shape, cfg.seed);
    let setup = Setup::<T>::build(cfg, cfg.positions())?;

    // baseline row first, then the rest in the order given
    let mut order = vec![cfg.baseline()];
    for &k in &cfg.impls {
        if !order.contains(&k) {
            order.push(k);
        }
    }

    let mut measured: Vec<(ImplKind, Vec<f64>)> = Vec::with_capacity(order.len());
    for kind in order {
        let samples = if cfg.include_setup {
            time_samples(
                || {
                    let fresh = Setup::<T>::build(cfg, cfg.positions()).expect("validated setup");
                    std::hint::black_box(
                        run_impl(kind, &x, cfg, &fresh).expect("checked implementation"),
                    );
                },
                cfg.iters,
                cfg.warmup,
            )
        } else {
            time_samples(
                || {
                    std::hint::black_box(
                        run_impl(kind, &x, cfg, &setup).expect("checked implementation"),
                    );
                },
                cfg.iters,
                cfg.warmup,
            )
        };
        measured.push((kind, samples));
    }

    let baseline_mean = mean(&measured[0].1);
    let dims_str: Vec<String> = cfg.dims.iter().map(ToString::to_string).collect();
    let rows = measured
        .iter()
        .map(|(kind, samples)| {
            let m = mean(samples);
            BenchRow {
                impl_name: kind.name().into(),
                mode: cfg.mode.to_string(),
                dims: dims_str.join(","),
                b: cfg.batch(),
                n: cfg.heads(),
                s: cfg.positions(),
                d: cfg.width(),
                precision: cfg.precision.to_string(),
                iters: cfg.iters,
                mean_ms: m,
                median_ms: median(samples),
                stddev_ms: stddev(samples, m),
                speedup_times: speedup_times(baseline_mean, m),
                speedup_pct: speedup_pct(baseline_mean, m),
            }
        })
        .collect();

    Ok(BenchReport {
        env: BenchEnv::capture(cfg.precision.as_str()),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cfg() -> BenchConfig {
        BenchConfig {
            shape: [1, 2, 16, 16],
            mode: PairingMode::Interleave,
            dims: vec![16],
            impls: vec![
                ImplKind::Reference,
                ImplKind::RomeGather,
                ImplKind::RomeMatmul,
                ImplKind::RomeFused,
                ImplKind::RomePipelined,
                ImplKind::DenseOracle,
            ],
            iters: 2,
            warmup: 0,
            tile_rows: 4,
            queue_depth: 2,
            ..Default::default()
        }
    }

    #[test]
    fn full_run_produces_baseline_first_rows() {
        let report = run_bench(&tiny_cfg()).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert_eq!(report.rows[0].impl_name, "reference");
        assert_eq!(report.rows[0].speedup_times, 1.0);
        assert_eq!(report.rows[0].speedup_pct, 0.0);
        for row in &report.rows {
            assert!(row.mean_ms > 0.0, "{}", row.impl_name);
            assert!(
                (row.speedup_times * row.mean_ms - report.rows[0].mean_ms).abs()
                    < 1e-9 * report.rows[0].mean_ms.max(1.0),
                "speedup_times · mean must reproduce the baseline mean"
            );
        }
    }

    #[test]
    fn fault_injection_fails_closed() {
        let cfg = BenchConfig {
            fault_inject: Some(ImplKind::RomeGather),
            ..tiny_cfg()
        };
        let err = run_bench(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("rome-gather"), "{msg}");
        assert!(msg.contains("max |delta|"), "{msg}");
    }

    #[test]
    fn interleave_half_runs_all_arms() {
        let cfg = BenchConfig {
            mode: PairingMode::InterleaveHalf,
            ..tiny_cfg()
        };
        let report = run_bench(&cfg).unwrap();
        assert_eq!(report.rows.len(), 6);
    }

    #[test]
    fn nd_dims_with_reference_nd_baseline() {
        let cfg = BenchConfig {
            shape: [1, 1, 27, 24],
            dims: vec![8, 8, 8],
            mode: PairingMode::Half,
            impls: vec![
                ImplKind::ReferenceNd,
                ImplKind::RomeGather,
                ImplKind::DenseOracle,
            ],
            iters: 2,
            warmup: 0,
            ..Default::default()
        };
        let report = run_bench(&cfg).unwrap();
        assert_eq!(report.rows[0].impl_name, "reference-nd");
        assert_eq!(report.rows[0].dims, "8,8,8");
    }

    #[test]
    fn grids_cover_balanced_volume() {
        let grids = bench_grids(27, 3);
        assert_eq!(grids.len(), 3);
        assert!(grids.iter().all(|g| g.len() == 27));
        assert_eq!(grids[2][..4], [0, 1, 2, 0]);
        let grids_1d = bench_grids(5, 1);
        assert_eq!(grids_1d[0], vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn reports_reproducible_modulo_timing() {
        let cfg = tiny_cfg();
        let a = run_bench(&cfg).unwrap();
        let b = run_bench(&cfg).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.impl_name, rb.impl_name);
            assert_eq!(ra.mode, rb.mode);
            assert_eq!(ra.dims, rb.dims);
            assert_eq!((ra.b, ra.n, ra.s, ra.d), (rb.b, rb.n, rb.s, rb.d));
            assert_eq!(ra.precision, rb.precision);
            assert_eq!(ra.iters, rb.iters);
        }
    }

    #[test]
    fn include_setup_still_correct() {
        let cfg = BenchConfig {
            include_setup: true,
            iters: 1,
            ..tiny_cfg()
        };
        assert!(run_bench(&cfg).is_ok());
    }
}
