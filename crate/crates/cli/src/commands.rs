//! Subcommand implementations. Every command writes a JSON report and a CSV
//! table side by side under the output directory and returns whether all of
//! its certificates passed.

use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use smoothext_core::checks::{run_all, CheckConfig};
use smoothext_core::config::BlockLayout;
use smoothext_core::corpus::{gen_clustered_corpus, gen_corpus, gen_product_corpus};
use smoothext_core::extract::{
    graph_extraction, ExtractionScheme, FlattenMaps, GraphSpec, TwinKind, Window,
};
use smoothext_core::gauges::{GaugeConfig, GaugeKit};
use smoothext_core::report::{
    write_extraction_csv, write_json, write_pipeline_csv, write_table_csv,
};
use smoothext_core::seqspace::{ProductPoint, ProductSplit, SparseVec};
use smoothext_core::smoothing::{
    componentwise_abs, compose_pipeline, PipelineConfig, ScalarField, Verdict,
};
use smoothext_core::Result;

use crate::config::RunConfig;

fn kit_for(layout: &BlockLayout) -> Result<GaugeKit> {
    GaugeKit::for_fiber(layout.extraction.clone(), layout.data2.clone())
}

/// Persist a corpus: one SparseVec JSON blob per cell.
fn write_corpus(path: &Path, corpus: &[SparseVec]) -> Result<()> {
    let rows: Vec<Vec<String>> = corpus
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), serde_json::to_string(v).unwrap()])
        .collect();
    write_table_csv(path, &["sample_id", "vector"], &rows)
}

/// Delete the origin of the fiber and trace the displacement of rays across
/// the gauge threshold; rows at t >= 1 show exactly zero displacement.
pub fn extract_point(cfg: &RunConfig) -> Result<bool> {
    let layout = BlockLayout::standard(cfg.dim)?;
    let kit = kit_for(&layout)?;
    let split = ProductSplit::new(layout.base(), layout.fiber())?;
    let first_anchor = kit.curve.anchors()[0];
    let scheme = ExtractionScheme {
        fp_tol: cfg.tol_fp,
        ..ExtractionScheme::point_deletion(kit, split)
    };

    let mut rows = Vec::new();
    let mut all_ok = true;
    let mut t = 0.05;
    while t <= 2.0 + 1e-12 {
        // A ray with gauge value exactly t: the leading anchor has
        // omega-weight 1/4.
        let p = ProductPoint::new(SparseVec::zero(), SparseVec::basis(first_anchor).scale(4.0 * t));
        let rho = scheme.rho(&p)?;
        let q = scheme.forward(&p)?;
        let displacement = ProductPoint::dist_l2(&q, &p);
        let (back, alpha) = scheme.inverse_with_alpha(&q)?;
        let roundtrip = ProductPoint::dist_l2(&back, &p);
        if t >= 1.0 && displacement != 0.0 {
            all_ok = false;
        }
        if roundtrip > 1e-8 {
            all_ok = false;
        }
        rows.push(vec![
            format!("{t:.4}"),
            format!("{rho:.17e}"),
            format!("{displacement:.17e}"),
            format!("{alpha:.17e}"),
            format!("{roundtrip:.17e}"),
        ]);
        t += 0.05;
    }
    write_table_csv(
        &cfg.out.join("extract_point_trajectory.csv"),
        &["t", "rho", "displacement", "alpha", "roundtrip_error"],
        &rows,
    )?;
    write_json(
        &cfg.out.join("extract_point.json"),
        &json!({
            "gauge": GaugeConfig::default(),
            "rows": rows.len(),
            "zero_displacement_past_one": all_ok,
        }),
    )?;
    Ok(all_ok)
}

/// Run the composed graph extraction on a sampled graph and record
/// per-sample displacement, gauge values, and roundtrip errors.
pub fn extract_graph(cfg: &RunConfig) -> Result<bool> {
    let layout = BlockLayout::standard(cfg.dim)?;
    let kit = kit_for(&layout)?;
    let split = ProductSplit::new(layout.base(), layout.fiber())?;
    let d1 = layout.data1[0];
    let d2 = layout.data2[0];
    let base_samples: Vec<SparseVec> = (0..8)
        .map(|i| SparseVec::from_pairs(&[(d1, i as f64 * 0.4 - 1.4)]).unwrap())
        .collect();
    let graph_values: Vec<SparseVec> = base_samples
        .iter()
        .map(|x| SparseVec::from_pairs(&[(d2, 0.5 * (x.get(d1) * 1.2).sin())]).unwrap())
        .collect();
    let budget = 0.25;
    let spec = GraphSpec {
        base_samples: base_samples.clone(),
        graph_values,
        window: Window::All,
        budget,
    };
    let mut cert = base_samples;
    cert.extend(gen_corpus(cfg.seed, 40, &[d1], 2.0));
    let ext = graph_extraction(&spec, split, kit, 12, &cert)?.with_fp_tol(cfg.tol_fp);

    let corpus = gen_product_corpus(cfg.seed ^ 0x33, cfg.corpus, &layout.base(), &layout.fiber(), 1.5);
    let joined: Vec<SparseVec> = corpus.iter().map(|p| SparseVec::add(&p.x1, &p.x2)).collect();
    write_corpus(&cfg.out.join("extract_graph_corpus.csv"), &joined)?;
    let records = ext.evaluate_corpus(&corpus)?;
    let max_disp = records
        .iter()
        .map(|r| r.displacement)
        .fold(0.0f64, f64::max);
    let max_round = records
        .iter()
        .map(|r| r.roundtrip_error)
        .fold(0.0f64, f64::max);
    let ok = max_disp <= budget && max_round <= 1e-7;
    write_extraction_csv(&cfg.out.join("extract_graph_records.csv"), &records)?;
    write_json(&cfg.out.join("extract_graph_records.json"), &records)?;
    write_json(
        &cfg.out.join("extract_graph.json"),
        &json!({
            "samples": records.len(),
            "budget": budget,
            "max_displacement": max_disp,
            "max_roundtrip_error": max_round,
            "pass": ok,
        }),
    )?;
    Ok(ok)
}

#[derive(Serialize)]
struct ClauseRow {
    clause: String,
    anchor: String,
    measured: f64,
    bound: f64,
    pass: bool,
}

/// Build the flattening pair and emit the clause check table.
pub fn flatten(cfg: &RunConfig) -> Result<bool> {
    let layout = BlockLayout::standard(cfg.dim)?;
    let split = ProductSplit::new(layout.base(), layout.fiber())?;
    let d1 = layout.data1[0];
    let d2 = layout.data2[0];
    let samples: Vec<(SparseVec, SparseVec)> = (0..8)
        .map(|i| {
            let t = i as f64 * 0.4 - 1.4;
            (
                SparseVec::from_pairs(&[(d1, t)]).unwrap(),
                SparseVec::from_pairs(&[(d2, 0.6 * (1.3 * t).sin())]).unwrap(),
            )
        })
        .collect();
    let mut cert: Vec<SparseVec> = samples.iter().map(|(p, _)| p.clone()).collect();
    cert.extend(gen_corpus(cfg.seed ^ 0x55, 50, &[d1], 2.0));
    let window = Window::Cylinder {
        center: SparseVec::zero(),
        radius: 0.8,
    };
    let closeness = 0.5;
    let maps = FlattenMaps::build(&samples, window, split, closeness, 12, &cert)?;

    let probes = gen_product_corpus(cfg.seed ^ 0x66, cfg.corpus.max(100), &[d1], &[d2], 2.0);

    // (1) the graph lands on the zero section (windowed twin only off the window)
    let mut graph_residual: f64 = 0.0;
    let mut windowed_residual: f64 = 0.0;
    for (x, v) in &samples {
        let p = ProductPoint::new(x.clone(), v.clone());
        graph_residual = graph_residual.max(maps.forward(&p, TwinKind::Primary)?.x2.norm_l2());
        if !maps.twin().window().contains(&p) {
            windowed_residual =
                windowed_residual.max(maps.forward(&p, TwinKind::Windowed)?.x2.norm_l2());
        }
    }
    // (2) the maps agree bitwise off the window
    let mut agree = 0.0f64;
    for p in &probes {
        if !maps.twin().window().contains(p) {
            let a = maps.forward(p, TwinKind::Primary)?;
            let b = maps.forward(p, TwinKind::Windowed)?;
            if a.x2.get(d2).to_bits() != b.x2.get(d2).to_bits() {
                agree = 1.0;
            }
        }
    }
    // (3) first coordinate preserved exactly
    let mut first_coord = 0.0f64;
    for p in probes.iter().take(100) {
        if maps.forward(p, TwinKind::Primary)?.x1 != p.x1 {
            first_coord = 1.0;
        }
    }
    // (4)/(5) invertibility off the graph: roundtrips
    let mut roundtrip: f64 = 0.0;
    for p in probes.iter().take(200) {
        let q = maps.forward(p, TwinKind::Primary)?;
        roundtrip = roundtrip.max(ProductPoint::dist_l2(
            &maps.inverse(&q, TwinKind::Primary)?,
            p,
        ));
        let qw = maps.forward(p, TwinKind::Windowed)?;
        roundtrip = roundtrip.max(ProductPoint::dist_l2(
            &maps.inverse(&qw, TwinKind::Windowed)?,
            p,
        ));
    }
    // (6) the inverses stay within the closeness budget
    let mut inverse_gap: f64 = 0.0;
    for p in probes.iter().take(200) {
        let a = maps.inverse(p, TwinKind::Primary)?;
        let b = maps.inverse(p, TwinKind::Windowed)?;
        inverse_gap = inverse_gap.max(ProductPoint::dist_l2(&a, &b));
    }
    // (7) fiber modulus of the inverse: |h^-1(x1,a) - h^-1(x1,b)| <= 2 |a-b|
    let mut modulus_excess: f64 = 0.0;
    for pair in probes.chunks(2) {
        if pair.len() < 2 {
            break;
        }
        let a = &pair[0];
        let b = ProductPoint::new(a.x1.clone(), pair[1].x2.clone());
        let ia = maps.inverse(a, TwinKind::Primary)?;
        let ib = maps.inverse(&b, TwinKind::Primary)?;
        let lhs = ProductPoint::dist_l2(&ia, &ib);
        let rhs = 2.0 * SparseVec::dist_l2(&a.x2, &b.x2);
        modulus_excess = modulus_excess.max(lhs - rhs);
    }

    let rows = vec![
        ClauseRow {
            clause: "1".into(),
            anchor: "flatten/graph-to-zero-section".into(),
            measured: graph_residual.max(windowed_residual),
            bound: 1e-8,
            pass: graph_residual.max(windowed_residual) <= 1e-8,
        },
        ClauseRow {
            clause: "2".into(),
            anchor: "flatten/bitwise-agreement-off-window".into(),
            measured: agree,
            bound: 0.0,
            pass: agree == 0.0,
        },
        ClauseRow {
            clause: "3".into(),
            anchor: "flatten/base-coordinate-preserved".into(),
            measured: first_coord,
            bound: 0.0,
            pass: first_coord == 0.0,
        },
        ClauseRow {
            clause: "4,5".into(),
            anchor: "flatten/invertibility-roundtrip".into(),
            measured: roundtrip,
            bound: 1e-8,
            pass: roundtrip <= 1e-8,
        },
        ClauseRow {
            clause: "6".into(),
            anchor: "flatten/inverse-closeness".into(),
            measured: inverse_gap,
            bound: closeness,
            pass: inverse_gap <= closeness,
        },
        ClauseRow {
            clause: "7".into(),
            anchor: "flatten/fiber-modulus".into(),
            measured: modulus_excess,
            bound: 1e-9,
            pass: modulus_excess <= 1e-9,
        },
    ];
    let all = rows.iter().all(|r| r.pass);
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.clause.clone(),
                r.anchor.clone(),
                format!("{:.17e}", r.measured),
                format!("{:.17e}", r.bound),
                r.pass.to_string(),
            ]
        })
        .collect();
    write_table_csv(
        &cfg.out.join("flatten_clauses.csv"),
        &["clause", "anchor", "measured", "bound", "pass"],
        &table,
    )?;
    write_json(
        &cfg.out.join("flatten.json"),
        &json!({ "clauses": rows, "pass": all }),
    )?;
    Ok(all)
}

/// Full pipeline on the componentwise-absolute-value demo map.
pub fn approximate(cfg: &RunConfig) -> Result<bool> {
    let mut pipe_cfg = PipelineConfig::standard(cfg.dim, 2)?;
    pipe_cfg.force_extraction = true;
    pipe_cfg.tau_rank = cfg.tol_rank;
    let layout = pipe_cfg.layout.clone();
    let f = componentwise_abs(layout.data1[0], layout.data2[0]);
    let eps_base = cfg.eps_base;
    let eps: ScalarField = Arc::new(move |x: &SparseVec| eps_base * (1.0 + x.norm_l2()));
    // Cluster count sized to the reserved block: each cover ball consumes
    // target_dim reserved indices, and a straggler ball needs headroom.
    let capacity = layout.guarded.len() / 2;
    let clusters = capacity.saturating_sub(1).clamp(2, 6);
    let corpus = gen_clustered_corpus(cfg.seed, cfg.corpus, &layout.data(), clusters, 0.02, 5e-4);
    write_corpus(&cfg.out.join("approximate_corpus.csv"), &corpus)?;
    let pipeline = compose_pipeline(&f, &eps, &corpus, pipe_cfg)?;
    let report = pipeline.report(&f, &eps, &corpus)?;

    let max_ratio = report
        .samples
        .iter()
        .map(|s| s.err / s.eps)
        .fold(0.0f64, f64::max);
    let min_sigma = report
        .samples
        .iter()
        .map(|s| s.sigma_min)
        .fold(f64::INFINITY, f64::min);
    let cover_limited = report.samples.iter().all(|s| s.cover_limited);
    let ok = max_ratio <= 1.0 && min_sigma >= cfg.tol_rank && cover_limited;

    write_json(&cfg.out.join("approximate_report.json"), &report)?;
    write_pipeline_csv(&cfg.out.join("approximate_report.csv"), &report)?;
    write_json(
        &cfg.out.join("approximate.json"),
        &json!({
            "max_err_over_eps": max_ratio,
            "min_sigma_min": min_sigma,
            "cover_limited": cover_limited,
            "pass": ok,
        }),
    )?;
    Ok(ok)
}

/// Run every module's property suite.
pub fn invariants(cfg: &RunConfig) -> Result<bool> {
    let results = run_all(&CheckConfig {
        dim: cfg.dim,
        seed: cfg.seed,
        samples: 2000,
    })?;
    let all = results.iter().all(|r| r.pass);
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|r| {
            vec![
                r.anchor.clone(),
                format!("{:.17e}", r.measured),
                format!("{:.17e}", r.bound),
                r.pass.to_string(),
            ]
        })
        .collect();
    write_table_csv(
        &cfg.out.join("invariants.csv"),
        &["anchor", "measured", "bound", "pass"],
        &rows,
    )?;
    write_json(
        &cfg.out.join("invariants.json"),
        &json!({ "suites": results, "pass": all }),
    )?;
    Ok(all)
}

/// The obstruction demo: no smooth 1/3-approximant of the absolute-value
/// map can have a derivative that is injective along the first axis, even
/// though the surjectivity certificates all pass.
pub fn negative_demo(cfg: &RunConfig) -> Result<bool> {
    let mut pipe_cfg = PipelineConfig::standard(cfg.dim, 2)?;
    pipe_cfg.cover.initial_radius = 0.02;
    pipe_cfg.tau_rank = cfg.tol_rank;
    let layout = pipe_cfg.layout.clone();
    let line_dir = layout.data1[0];
    let f = componentwise_abs(line_dir, layout.data2[0]);
    let eps: ScalarField = Arc::new(|_| 1.0 / 3.0);
    let corpus: Vec<SparseVec> = (0..=2000)
        .map(|i| {
            let t = -1.0 + i as f64 * 1e-3;
            if t == 0.0 {
                SparseVec::zero()
            } else {
                SparseVec::from_pairs(&[(line_dir, t)]).unwrap()
            }
        })
        .collect();
    let pipeline = compose_pipeline(&f, &eps, &corpus, pipe_cfg)?;
    let report = pipeline.report(&f, &eps, &corpus)?;
    let surjective = report
        .samples
        .iter()
        .all(|s| s.verdict == Verdict::Surjective);

    let values: Vec<f64> = corpus
        .iter()
        .map(|x| pipeline.eval_g(x).map(|e| e.value[0]))
        .collect::<Result<Vec<_>>>()?;
    let derivs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / 1e-3).collect();
    let mut seen_negative = false;
    let mut sign_change = false;
    let mut rows = Vec::with_capacity(derivs.len());
    for (i, d) in derivs.iter().enumerate() {
        let t = -1.0 + i as f64 * 1e-3;
        rows.push(vec![
            format!("{t:.3}"),
            format!("{:.17e}", values[i]),
            format!("{d:.17e}"),
        ]);
        if *d < -1e-6 {
            seen_negative = true;
        } else if *d > 1e-6 && seen_negative {
            sign_change = true;
        }
    }
    write_table_csv(
        &cfg.out.join("negative_demo_scan.csv"),
        &["t", "g1", "dg1_dt"],
        &rows,
    )?;
    let ok = surjective && sign_change;
    write_json(
        &cfg.out.join("negative_demo.json"),
        &json!({
            "surjective_certificates": surjective,
            "interior_derivative_sign_change": sign_change,
            "grid_resolution": 1e-3,
            "pass": ok,
        }),
    )?;
    Ok(ok)
}

/// Machine-readable failure record named by the violated check anchor.
pub fn write_failure(out: &Path, command: &str, anchor: &str, detail: &str) {
    let _ = std::fs::create_dir_all(out);
    let record = json!({
        "command": command,
        "anchor": anchor,
        "detail": detail,
    });
    let _ = std::fs::write(
        out.join("failure.json"),
        serde_json::to_string_pretty(&record).unwrap(),
    );
}
