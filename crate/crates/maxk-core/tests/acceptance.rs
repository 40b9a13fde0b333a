//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see them on success).
//!
//! Covers kernel correctness against dense oracles, forward/backward
//! adjointness, selection exactness, layer gradient checks, traffic-formula
//! reproduction and instrumentation agreement, large-graph arithmetic
//! consistency, partitioner properties, mode agreement, the function
//! approximation demo, and desk-scale training parity.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use maxk_core::gnn::{
    approx_demo, check_layer_gradients, generate_sbm, train_full_batch, ApproxConfig,
    ApproxNonlinearity, GnnModel, GradCheckConfig, Nonlinearity, SbmConfig, TrainConfig,
};
use maxk_core::{
    build_plan, dense_spmm_counted, maxk_forward, pivot_select_row,
    render_table, spgemm_forward, spgemm_forward_counted, sspmm_backward,
    sspmm_backward_counted, traffic_spgemm_forward, traffic_spmm_baseline,
    traffic_sspmm_backward, CsrGraph, DenseMatrix, ExecMode, IndexWidth, NormalizationKind,
    TrafficParams, CACHE_CAVEAT, WARP_LANES,
};

fn report(name: &str, pass: bool, details: &str) {
    println!(
        "ACCEPTANCE {name}: {} ({details})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {details}");
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> CsrGraph {
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in 0..n as u32 {
            if rng.random::<f64>() < density {
                edges.push((i, j, rng.random_range(-1.0f32..1.0)));
            }
        }
    }
    CsrGraph::from_edges(n, edges).unwrap()
}

fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix<f32> {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0f32..1.0))
}

/// Full-sort selection oracle with lowest-index tie-break, ascending output.
fn sort_oracle(row: &[f32], k: usize) -> Vec<u32> {
    let mut order: Vec<u32> = (0..row.len() as u32).collect();
    order.sort_by(|&a, &b| {
        row[b as usize]
            .partial_cmp(&row[a as usize])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut top: Vec<u32> = order[..k].to_vec();
    top.sort_unstable();
    top
}

#[test]
fn c1_kernel_correctness_vs_dense_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut max_fwd = 0.0f64;
    let mut max_bwd = 0.0f64;
    for trial in 0..200 {
        let n = rng.random_range(1..=64);
        let density = rng.random_range(0.0..=0.3);
        let dim = *[8usize, 16, 32].choose(&mut rng).unwrap();
        let k = *[1usize, dim / 4, dim].choose(&mut rng).unwrap();
        let a = random_graph(&mut rng, n, density);
        let x = random_dense(&mut rng, n, dim);
        let (xs, _) = maxk_forward(&x, k, None).unwrap();
        let w = rng.random_range(1..=48);
        let plan = build_plan(&a, k, w);

        let fwd = spgemm_forward(&a, &xs, &plan, ExecMode::Deterministic)
            .unwrap()
            .to_f64();
        let dense_a = a.to_dense::<f64>();
        let oracle_fwd = dense_a.matmul(&xs.densify().to_f64());
        max_fwd = max_fwd.max(fwd.max_abs_diff(&oracle_fwd));

        let d = random_dense(&mut rng, n, dim);
        let bwd = sspmm_backward(&a, &d, &xs, &plan, ExecMode::Deterministic).unwrap();
        let oracle_full = a.transpose_view().to_dense::<f64>().matmul(&d.to_f64());
        for r in 0..n {
            for (t, &c) in xs.row_index(r).iter().enumerate() {
                let got = bwd.row_data(r)[t] as f64;
                let want = oracle_full.get(r, c as usize);
                max_bwd = max_bwd.max((got - want).abs());
            }
        }
        assert!(
            max_fwd <= 1e-5 && max_bwd <= 1e-5,
            "trial {trial}: fwd {max_fwd:.2e} bwd {max_bwd:.2e}"
        );
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        "C1 kernel-correctness",
        max_fwd <= 1e-5 && max_bwd <= 1e-5 && secs < 30.0,
        &format!("200 instances, max fwd err {max_fwd:.2e}, max bwd err {max_bwd:.2e}, {secs:.1}s"),
    );
}

#[test]
fn c2_forward_backward_adjointness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut max_rel = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=48);
        let dim = *[8usize, 16, 32].choose(&mut rng).unwrap();
        let k = rng.random_range(1..=dim);
        let a = random_graph(&mut rng, n, 0.25);
        let x = random_dense(&mut rng, n, dim);
        let (xs, _) = maxk_forward(&x, k, None).unwrap();
        let d = random_dense(&mut rng, n, dim);
        let plan = build_plan(&a, k, 16);

        let fwd = spgemm_forward(&a, &xs, &plan, ExecMode::Deterministic).unwrap();
        let lhs = fwd.to_f64().dot(&d.to_f64());

        let bwd = sspmm_backward(&a, &d, &xs, &plan, ExecMode::Deterministic).unwrap();
        let rhs: f64 = bwd
            .sp_data()
            .iter()
            .zip(xs.sp_data())
            .map(|(&g, &v)| g as f64 * v as f64)
            .sum();

        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-12);
        max_rel = max_rel.max(rel);
    }
    report(
        "C2 adjointness",
        max_rel <= 1e-4,
        &format!("50 instances, max relative error {max_rel:.2e}"),
    );
}

#[test]
fn c3_selection_exactness_and_pivot_convergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    let normal = StandardNormal;

    // exactness over mixed row shapes, ties included
    let mut mismatches = 0usize;
    for trial in 0..1000 {
        let dim = rng.random_range(8..=1024);
        let k = rng.random_range(1..=dim);
        let row: Vec<f32> = match trial % 5 {
            // all-tied rows
            0 => vec![rng.random_range(-2.0f32..2.0); dim],
            // coarse grid, many partial ties
            1 | 2 => (0..dim)
                .map(|_| rng.random_range(-8i32..8) as f32 * 0.25)
                .collect(),
            // continuous
            _ => (0..dim)
                .map(|_| {
                    let v: f64 = normal.sample(&mut rng);
                    v as f32
                })
                .collect(),
        };
        let x = DenseMatrix::from_rows(&[row.clone()]);
        let (m, _) = maxk_forward(&x, k, None).unwrap();
        if m.row_index(0) != sort_oracle(&row, k).as_slice() {
            mismatches += 1;
        }
    }

    // convergence on standard-normal rows of dim 256 with an uncapped
    // bisection budget, so the median reflects real convergence
    let mut iteration_counts = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let row: Vec<f32> = (0..256)
            .map(|_| {
                let v: f64 = normal.sample(&mut rng);
                v as f32
            })
            .collect();
        let (_, stats) = pivot_select_row(&row, 32, 64);
        iteration_counts.push(stats.iterations);
    }
    iteration_counts.sort_unstable();
    let median = iteration_counts[iteration_counts.len() / 2];

    report(
        "C3 maxk-selection-exactness",
        mismatches == 0 && median <= 10,
        &format!("1000 rows, {mismatches} oracle mismatches, median pivot iterations {median}"),
    );
}

#[test]
fn c4_layer_gradient_check() {
    let start = Instant::now();
    let cfg = GradCheckConfig {
        nodes: 12,
        f_in: 5,
        f_out: 8,
        k: 3,
        edge_density: 0.3,
        seed: 0,
        step: 1e-4,
    };
    let r = check_layer_gradients(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = r.max_rel_error() <= 1e-3 && r.min_post_linear_gap > 10.0 * cfg.step && secs < 10.0;
    report(
        "C4 gradient-check",
        pass,
        &format!(
            "max rel err {:.2e} (W {:.2e} b {:.2e} X {:.2e}), min activation gap {:.2e}, {secs:.1}s",
            r.max_rel_error(),
            r.max_rel_error_weight,
            r.max_rel_error_bias,
            r.max_rel_error_input,
            r.min_post_linear_gap
        ),
    );
}

#[test]
fn c5_traffic_formulas_and_instrumentation() {
    // headline reductions
    let p2 = TrafficParams {
        num_nodes: 232_965,
        nnz: 114_615_891,
        dim_origin: 256,
        dim_k: 16,
        index_bytes: 2,
        w: 32,
    };
    let r2 = traffic_spgemm_forward(p2).unwrap();
    let sig3 = (r2.reduction_vs_spmm_pct * 10.0).round() / 10.0;
    let two_byte_ok = (r2.reduction_vs_spmm_pct - 90.625).abs() < 1e-9 && sig3 == 90.6;

    let p1 = TrafficParams { index_bytes: 1, ..p2 };
    let r1 = traffic_spgemm_forward(p1).unwrap();
    let one_byte_ok = (r1.reduction_vs_spmm_pct - 92.1875).abs() < 1e-9
        && (r1.reduction_vs_spmm_pct * 100.0).round() / 100.0 == 92.19;

    // measured == analytical, exactly, on 50 random instances.
    // w = 1 makes every edge its own group, where the idealized atomic
    // count N*dim_origin*avgdeg/w is exact; byte counts have no w term.
    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let mut exact = true;
    for _ in 0..50 {
        let n = rng.random_range(1..=40);
        let dim = *[8usize, 16, 32].choose(&mut rng).unwrap();
        let k = rng.random_range(1..=dim);
        let width = *[IndexWidth::U8, IndexWidth::U16, IndexWidth::U32]
            .choose(&mut rng)
            .unwrap();
        let density = rng.random_range(0.05..0.3);
        let a = random_graph(&mut rng, n, density);
        let x = random_dense(&mut rng, n, dim);
        let (xs, _) = maxk_forward(&x, k, Some(width)).unwrap();
        let d = random_dense(&mut rng, n, dim);
        let params = TrafficParams {
            num_nodes: n as u64,
            nnz: a.num_edges() as u64,
            dim_origin: dim as u64,
            dim_k: k as u64,
            index_bytes: width.bytes() as u64,
            w: 1,
        };

        let plan = build_plan(&a, k, 1);
        let (_, fwd_counter) =
            spgemm_forward_counted(&a, &xs, &plan, ExecMode::Deterministic).unwrap();
        let fwd_model = traffic_spgemm_forward(params).unwrap();
        exact &= fwd_counter.read_bytes == fwd_model.read_bytes;
        exact &= fwd_counter.write_bytes == fwd_model.write_bytes;
        exact &= (fwd_counter.atomic_ops as f64 - fwd_model.atomic_ops).abs() == 0.0;

        let (_, bwd_counter) =
            sspmm_backward_counted(&a, &d, &xs, &plan, ExecMode::Deterministic).unwrap();
        let bwd_model = traffic_sspmm_backward(params).unwrap();
        exact &= bwd_counter.read_bytes == bwd_model.read_bytes;
        exact &= bwd_counter.write_bytes == bwd_model.write_bytes;
        exact &= (bwd_counter.atomic_ops as f64 - bwd_model.atomic_ops).abs() == 0.0;

        let (_, spmm_counter) = dense_spmm_counted(&a, &x).unwrap();
        let spmm_model = traffic_spmm_baseline(params).unwrap();
        exact &= spmm_counter.read_bytes == spmm_model.read_bytes;
        exact &= spmm_counter.read_bytes == 4 * dim as u64 * a.num_edges() as u64;
        exact &= spmm_counter.write_bytes == spmm_model.write_bytes;

        // general w: counted atomics equal dim_origin * sum(ceil(deg/w))
        let w = rng.random_range(2..=16);
        let plan_w = build_plan(&a, k, w);
        let (_, counter_w) =
            spgemm_forward_counted(&a, &xs, &plan_w, ExecMode::Deterministic).unwrap();
        let groups: u64 = (0..n).map(|i| (a.degree(i) as u64).div_ceil(w as u64)).sum();
        exact &= counter_w.atomic_ops == groups * dim as u64;
        exact &= counter_w.read_bytes == fwd_model.read_bytes;
    }

    report(
        "C5 traffic-formulas",
        two_byte_ok && one_byte_ok && exact,
        &format!(
            "2-byte reduction {:.4}% (3 s.f. {sig3}), 1-byte {:.4}%, 50 instances exact: {exact}",
            r2.reduction_vs_spmm_pct, r1.reduction_vs_spmm_pct
        ),
    );
}

#[test]
fn c6_large_graph_arithmetic_consistency() {
    let params = TrafficParams {
        num_nodes: 232_965,
        nnz: 114_615_891,
        dim_origin: 256,
        dim_k: 32,
        index_bytes: 1,
        w: 32,
    };
    let spmm = traffic_spmm_baseline(params).unwrap();
    let spgemm = traffic_spgemm_forward(params).unwrap();
    let sspmm = traffic_sspmm_backward(params).unwrap();

    let measured_spmm_gb = 138.05;
    let measured_spgemm_gb = 13.13;
    let spmm_ratio = spmm.read_gb() / measured_spmm_gb;
    let spgemm_ratio = spgemm.read_gb() / measured_spgemm_gb;

    let table = render_table(&[spmm.clone(), spgemm.clone(), sspmm]);
    let caveat_printed = table.contains(CACHE_CAVEAT);

    let pass = (117.3..117.5).contains(&spmm.read_gb())
        && (18.2..18.4).contains(&spgemm.read_gb())
        && (0.7..=1.0).contains(&spmm_ratio)
        && (1.0..=1.6).contains(&spgemm_ratio)
        && caveat_printed;
    report(
        "C6 large-graph-arithmetic",
        pass,
        &format!(
            "spmm model {:.1} GB ratio {spmm_ratio:.3}, spgemm model {:.1} GB ratio {spgemm_ratio:.3}, caveat printed {caveat_printed}",
            spmm.read_gb(),
            spgemm.read_gb()
        ),
    );
}

#[test]
fn c7_partitioner_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(1..=48);
        let dim_k = rng.random_range(1..=32);
        let w = rng.random_range(1..=33);
        let density = rng.random_range(0.0..0.4);
        let a = random_graph(&mut rng, n, density);
        let plan = build_plan(&a, dim_k, w);
        ok &= plan.validate_for(&a).is_ok();
        ok &= plan.groups().iter().all(|g| g.edge_count as usize <= w);
        let per_warp = if dim_k <= 16 { WARP_LANES / dim_k as u32 } else { 1 };
        ok &= plan.groups_per_warp() == per_warp;
        let mut counts = std::collections::HashMap::new();
        for wa in plan.warp_assignments() {
            *counts.entry(wa.warp).or_insert(0u32) += 1;
            ok &= wa.lane_start + wa.lane_count <= WARP_LANES;
        }
        ok &= counts.values().all(|&c| c <= per_warp);
    }

    // counter scales linearly when N and nnz double: a disjoint union
    // doubles rows and edges exactly, and a fresh graph at double scale
    // stays within the 20% envelope
    let base = random_graph(&mut rng, 32, 0.2);
    let mut doubled_edges: Vec<(u32, u32, f32)> = Vec::new();
    for i in 0..32usize {
        let (cols, vals) = base.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            doubled_edges.push((i as u32, j, v));
            doubled_edges.push((i as u32 + 32, j + 32, v));
        }
    }
    let doubled = CsrGraph::from_edges(64, doubled_edges).unwrap();
    let ops1 = build_plan(&base, 8, 4).build_ops() as f64;
    let ops2 = build_plan(&doubled, 8, 4).build_ops() as f64;
    let union_ratio = ops2 / ops1;
    ok &= (1.6..=2.4).contains(&union_ratio);

    let fresh1 = random_graph(&mut rng, 40, 0.2);
    let target_nnz = fresh1.num_edges() * 2;
    // double nodes, keep expected nnz at twice the original
    let density2 = target_nnz as f64 / (80.0 * 80.0);
    let fresh2 = random_graph(&mut rng, 80, density2);
    let f_ops1 = build_plan(&fresh1, 8, 4).build_ops() as f64;
    let f_ops2 = build_plan(&fresh2, 8, 4).build_ops() as f64;
    let fresh_ratio = f_ops2 / f_ops1;
    ok &= (1.6..=2.4).contains(&fresh_ratio);

    report(
        "C7 partitioner-properties",
        ok,
        &format!("100 graphs tiled exactly, doubling ratios {union_ratio:.2} / {fresh_ratio:.2}"),
    );
}

#[test]
fn c8_mode_agreement() {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=48);
        let dim = *[8usize, 16, 32].choose(&mut rng).unwrap();
        let k = rng.random_range(1..=dim);
        let a = random_graph(&mut rng, n, 0.25);
        let x = random_dense(&mut rng, n, dim);
        let (xs, _) = maxk_forward(&x, k, None).unwrap();
        let d = random_dense(&mut rng, n, dim);
        let plan = build_plan(&a, k, 8);

        let det = spgemm_forward(&a, &xs, &plan, ExecMode::Deterministic).unwrap();
        let par = pool.install(|| spgemm_forward(&a, &xs, &plan, ExecMode::Parallel).unwrap());
        for (&p, &q) in det.data().iter().zip(par.data()) {
            let rel = (p as f64 - q as f64).abs() / (p.abs() as f64).max(q.abs() as f64).max(1.0);
            worst = worst.max(rel);
        }

        let bdet = sspmm_backward(&a, &d, &xs, &plan, ExecMode::Deterministic).unwrap();
        let bpar =
            pool.install(|| sspmm_backward(&a, &d, &xs, &plan, ExecMode::Parallel).unwrap());
        for (&p, &q) in bdet.sp_data().iter().zip(bpar.sp_data()) {
            let rel = (p as f64 - q as f64).abs() / (p.abs() as f64).max(q.abs() as f64).max(1.0);
            worst = worst.max(rel);
        }
    }
    report(
        "C8 mode-agreement",
        worst <= 1e-4,
        &format!("50 instances on 4 threads, worst relative gap {worst:.2e}"),
    );
}

#[test]
fn c9_universal_approximation_demo() {
    let start = Instant::now();
    let cfg = ApproxConfig::default();
    let rows = approx_demo(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    let mse: Vec<f64> = rows.iter().map(|r| r.final_mse).collect();

    // non-increasing with at most one inversion within 10%
    let mut inversions = 0usize;
    let mut inversion_ok = true;
    for w in mse.windows(2) {
        if w[1] > w[0] {
            inversions += 1;
            if w[1] > w[0] * 1.10 {
                inversion_ok = false;
            }
        }
    }
    let trend_ok = inversions <= 1 && inversion_ok;
    let tenfold_ok = mse[3] <= mse[0] / 10.0;

    let relu_cfg = ApproxConfig {
        hidden_units: vec![256],
        nonlinearity: ApproxNonlinearity::Relu,
        ..cfg.clone()
    };
    let relu_mse = approx_demo(&relu_cfg).unwrap()[0].final_mse;
    let maxk_256 = mse[3];
    let similar_ok = relu_mse <= 3.0 * maxk_256 && maxk_256 <= 3.0 * relu_mse;

    let secs = start.elapsed().as_secs_f64();
    report(
        "C9 approximation-demo",
        trend_ok && tenfold_ok && similar_ok && secs < 120.0,
        &format!(
            "mse(r)={mse:?}, relu(256)={relu_mse:.2e}, ratio {:.2}, {secs:.1}s",
            relu_mse / maxk_256
        ),
    );
}

#[test]
fn c10_desk_scale_training_parity() {
    let start = Instant::now();
    let sbm = generate_sbm(&SbmConfig::default());
    let hidden = 64usize;
    let dims = [sbm.features.cols(), hidden, sbm.num_classes];
    let config = TrainConfig {
        epochs: 200,
        lr: 0.4,
        momentum: 0.9,
        seed: 1,
        ..TrainConfig::default()
    };

    let run = |nl: Nonlinearity| {
        let mut model =
            GnnModel::<f32>::new_stack(&dims, nl, NormalizationKind::Symmetric, config.seed);
        train_full_batch(
            &mut model,
            &sbm.graph,
            &sbm.features,
            &sbm.labels,
            &sbm.train_mask,
            Some(&sbm.val_mask),
            &config,
        )
        .unwrap()
    };

    let relu = run(Nonlinearity::Relu);
    let maxk_full = run(Nonlinearity::MaxK { k: hidden });
    let maxk_sparse = run(Nonlinearity::MaxK { k: hidden / 8 });
    let maxk_sparse_again = run(Nonlinearity::MaxK { k: hidden / 8 });

    let relu_acc = relu.final_train_acc() * 100.0;
    let full_acc = maxk_full.final_train_acc() * 100.0;
    let sparse_acc = maxk_sparse.final_train_acc() * 100.0;

    let both_learn = relu_acc > 90.0 && full_acc > 90.0;
    let within_two_points = (sparse_acc - relu_acc).abs() <= 2.0;
    let deterministic = maxk_sparse.canonical_csv() == maxk_sparse_again.canonical_csv();
    let secs = start.elapsed().as_secs_f64();

    report(
        "C10 desk-scale-training",
        both_learn && within_two_points && deterministic && secs < 180.0,
        &format!(
            "train acc: relu {relu_acc:.1}%, maxk(k=64) {full_acc:.1}%, maxk(k=8) {sparse_acc:.1}%, deterministic reruns {deterministic}, {secs:.1}s"
        ),
    );
}
