//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use ars_core::experiment::Experiment;
use ars_core::io::{self, RunConfig, Waveform};
use ars_core::linkbudget::{
    apply_correction, bistatic_sigma_ideal, power_difference, received_power_method1, received_power_method2,
    BistaticGeometry, CorrectionEntry, CorrectionTable, LinkParams,
};
use ars_core::pattern::{
    design_supercell, direction_from_angles, fraunhofer_distance, hpbw, peak_angle, phase_profile, tile_panel,
    ArrayFactor, ElementPattern, PanelSpec, PatternGrid, PanelScatterer, PhaseProfile,
};
use ars_core::raytracer::{los_clear, reflect_paths, Scene, Vec3};
use ars_core::{Angle, Frequency, GainDb, PowerLevel};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Outcome = Result<String, String>;

fn ghz(x: f64) -> Frequency {
    Frequency::from_ghz(x).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fraunhofer() -> Outcome {
    let f = ghz(26.0);
    let d48 = fraunhofer_distance(PanelSpec::reference(48).map_err(|e| e.to_string())?.side_x(), f).unwrap();
    let d96 = fraunhofer_distance(PanelSpec::reference(96).map_err(|e| e.to_string())?.side_x(), f).unwrap();
    check(
        (d48 / 4.04 - 1.0).abs() < 0.01 && (d96 / 16.17 - 1.0).abs() < 0.01,
        format!("48: {d48:.3} m (4.04), 96: {d96:.3} m (16.17), tol 1%"),
    )
}

fn supercell() -> Outcome {
    let f = ghz(26.0);
    let s = design_supercell(Angle::from_degrees(65.0), f, 16, Some(3)).map_err(|e| e.to_string())?;
    let ratio = s.element_period / f.wavelength();
    check((ratio / 0.2758 - 1.0).abs() < 1e-3, format!("element period {ratio:.5} lambda (0.2758), tol 0.1%"))
}

fn design_pattern(n: usize, f: f64, grid: &PatternGrid) -> ars_core::pattern::RadiationPattern {
    let panel = PanelSpec::reference(n).unwrap();
    PanelScatterer::design(&panel, ElementPattern::SurfaceCurrent, ghz(f)).unwrap().sample(grid).unwrap()
}

fn steering() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (f, want, tol) in [(26.0, 65.0, 0.5), (25.0, 70.0, 1.0), (27.0, 61.0, 1.0)] {
        let p = design_pattern(48, f, &PatternGrid::CUT);
        let peak = peak_angle(&p, 0.0).map_err(|e| e.to_string())?.degrees();
        ok &= (peak - want).abs() <= tol;
        parts.push(format!("{f} GHz: {peak:.1} deg ({want} +/- {tol})"));
    }
    check(ok, parts.join(", "))
}

fn beamwidth() -> Outcome {
    let w48 = hpbw(&design_pattern(48, 26.0, &PatternGrid::CUT), 0.0).map_err(|e| e.to_string())?;
    let w96 = hpbw(&design_pattern(96, 26.0, &PatternGrid::CUT), 0.0).map_err(|e| e.to_string())?;
    check(
        (w48 - 9.0).abs() <= 1.0 && (w96 - 5.0).abs() <= 1.0,
        format!("48: {w48:.2} deg (9 +/- 1), 96: {w96:.2} deg (5 +/- 1)"),
    )
}

fn method_equivalence() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let tuples = (0.01f64..1.0, -85.0f64..85.0, -85.0f64..85.0, 1.0f64..100.0, 0.5f64..50.0, 0.5f64..50.0);
    let worst = std::cell::Cell::new(0.0f64);
    let result = runner.run(&tuples, |(side, ti, tr, fghz, r1, r2)| {
        let f = Frequency::from_ghz(fghz).unwrap();
        let p = LinkParams { r1, r2, ..LinkParams::campaign(f) };
        let g = BistaticGeometry::new(Angle::from_degrees(ti), Angle::from_degrees(tr), side * side).unwrap();
        let lambda = f.wavelength();
        // Panel gains 4πA cos θ / λ² toward each side.
        let g_rx = 4.0 * PI * g.area * g.theta_i.cos() / (lambda * lambda);
        let g_tx = 4.0 * PI * g.area * g.theta_r.cos() / (lambda * lambda);
        let p1 = received_power_method1(&p, bistatic_sigma_ideal(&g, f)).unwrap().milliwatts();
        let p2 = received_power_method2(&p, GainDb::from_linear(g_rx).unwrap(), GainDb::from_linear(g_tx).unwrap())
            .unwrap()
            .milliwatts();
        let rel = (p1 / p2 - 1.0).abs();
        worst.set(worst.get().max(rel));
        prop_assert!(rel < 1e-10);
        Ok(())
    });
    check(result.is_ok(), format!("1000 tuples, worst relative difference {:.2e} (< 1e-10)", worst.get()))
}

fn zero_order_consistency() -> Outcome {
    let mut cfg = RunConfig::default().with_panel(96);
    cfg.max_order = 0;
    cfg.frequencies_ghz = cfg.frequency_sweep.frequencies_ghz();
    let start = Instant::now();
    let e = Experiment::from_config(cfg, Path::new(".")).map_err(|e| e.to_string())?;
    let r = e.run_angular_sweep().map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let worst = r
        .points
        .iter()
        .map(|p| (p.get("method2").unwrap() - p.get("rt_order0").unwrap()).abs())
        .fold(0.0f64, f64::max);
    check(
        r.points.len() == 8 * 13 && worst < 0.1 && secs < 60.0,
        format!(
            "{} points (8 angles x 13 freqs, 96 panel), worst |method2 - rt_order0| {worst:.2e} dB (< 0.1), {secs:.1} s (< 60)",
            r.points.len()
        ),
    )
}

fn multipath_robustness() -> Outcome {
    let mut cfg = RunConfig::default();
    cfg.frequencies_ghz = vec![26.0];
    cfg.angles_deg = vec![65.0];
    let e = Experiment::from_config(cfg, Path::new(".")).map_err(|e| e.to_string())?;
    let r = e.run_angular_sweep().map_err(|e| e.to_string())?;
    let p = &r.points[0];
    let d = p.get("rt_order3").unwrap() - p.get("rt_order0").unwrap();
    check(d.abs() < 1.0, format!("26 GHz, 65 deg, 48 panel: order 3 - order 0 = {d:.4} dB (< 1)"))
}

fn correction_pipeline() -> Outcome {
    let table = io::shipped::corrections().map_err(|e| e.to_string())?;
    let entry = table.get(ghz(26.0), Angle::from_degrees(65.0)).map(|g| g.db());
    let e = Experiment::from_config(RunConfig::default(), Path::new(".")).map_err(|e| e.to_string())?;
    let reference = e.run_los_reference(Waveform::Qam16_400MHz).map_err(|e| e.to_string())?;
    let emitted = io::write_corrections(&reference.table) == io::shipped::TABLE2_PDIFF;
    let mut exact = true;
    for p in &reference.result.points {
        let (t, m) = (PowerLevel(p.get("p_theory").unwrap()), PowerLevel(p.get("p_m").unwrap()));
        let mut one = CorrectionTable::new();
        one.insert(CorrectionEntry {
            freq_ghz: p.freq_ghz,
            angle_deg: p.angle_deg,
            p_diff_db: power_difference(t, m).db(),
        })
        .unwrap();
        let back = apply_correction(t, &one, ghz(p.freq_ghz), Angle::from_degrees(p.angle_deg)).unwrap();
        exact &= back.dbm().to_bits() == m.dbm().to_bits();
    }
    check(
        table.len() == 21 && entry == Some(1.08) && emitted && exact,
        format!(
            "{} shipped entries, 26 GHz/65 deg = {entry:?} (1.08 exact), emitted table identical: {emitted}, round trip exact: {exact}",
            table.len()
        ),
    )
}

fn brute_force(panel: &PanelSpec, profile: &PhaseProfile, k: f64, u: f64, v: f64) -> Complex64 {
    let (cx, cy) = (0.5 * (panel.nx as f64 - 1.0), 0.5 * (panel.ny as f64 - 1.0));
    let mut sum = Complex64::new(0.0, 0.0);
    for n in 0..panel.ny {
        for m in 0..panel.nx {
            let x = (m as f64 - cx) * panel.dx();
            let y = (n as f64 - cy) * panel.dy();
            sum += Complex64::from_polar(1.0, k * (u * x + v * y) + profile.phases()[m]);
        }
    }
    sum
}

fn tiling() -> Outcome {
    let base = PanelSpec::reference(48).unwrap();
    let big = tile_panel(&base, 2, 2).unwrap();
    let f = ghz(26.0);
    let k = f.wavenumber();
    let design = |p: &PanelSpec| phase_profile(p, Angle::from_degrees(0.0), Angle::from_degrees(65.0), f).unwrap();
    let base_af = ArrayFactor::new(&base, &design(&base)).unwrap();
    let big_prof = design(&big);
    let (lx, ly) = (base.side_x(), base.side_y());
    let mut worst = 0.0f64;
    for i in 0..60 {
        let d = direction_from_angles(-88.0 + 3.0 * i as f64, (i * 29 % 180) as f64);
        let brute = brute_force(&big, &big_prof, k, d[0], d[1]);
        let tile = |s: f64, l: f64| 2.0 * (0.5 * k * s * l).cos();
        let factored = base_af.evaluate(k, d[0], d[1]) * tile(d[0], lx) * tile(d[1], ly);
        worst = worst.max((factored - brute).norm() / brute.norm().max(1.0));
    }
    let side_mm = big.side_x() * 1e3;
    check(
        worst < 1e-9 && (side_mm - 305.3).abs() <= 1.0,
        format!("worst relative error {worst:.2e} over 60 directions (< 1e-9), side {side_mm:.2} mm (305.3 +/- 1)"),
    )
}

fn image_method() -> Outcome {
    let scene = Scene::from_json_str(io::shipped::AUDITORIUM_SCENE).map_err(|e| e.to_string())?;
    let layout = *scene.layout().unwrap();
    // Floor, ceiling, and the walls y = 0, y = 8, x = -3, x = 11.
    let planes = [(2usize, 0.0), (2, 3.0), (1, 0.0), (1, 8.0), (0, -3.0), (0, 11.0)];
    let image_bounce = |a: Vec3, b: Vec3, axis: usize, c: f64| {
        let mut img = a.to_array();
        img[axis] = 2.0 * c - img[axis];
        let (img, bb) = (Vec3::from(img), b.to_array());
        let t = (c - img.to_array()[axis]) / (bb[axis] - img.to_array()[axis]);
        img + (b - img) * t
    };
    let tx = layout.tx_position();
    let ar = layout.ar_center;
    let mut pairs = vec![(tx, ar)];
    let mut blocked = true;
    let mut clear = los_clear(&scene, tx, ar);
    for deg in [55.0, 60.0, 62.5, 65.0, 70.0, 75.0, 80.0, 85.0] {
        let rx = layout.rx_position(Angle::from_degrees(deg));
        blocked &= !los_clear(&scene, tx, rx);
        clear &= los_clear(&scene, ar, rx);
        pairs.push((ar, rx));
        pairs.push((tx, rx));
    }
    let (mut count, mut worst) = (0, 0.0f64);
    for (a, b) in pairs {
        for p in reflect_paths(&scene, a, b, 1).map_err(|e| e.to_string())?.iter().filter(|p| p.order() == 1) {
            let (axis, c) = planes[p.bounces[0].facet];
            worst = worst.max(p.bounces[0].point.distance(image_bounce(a, b, axis, c)));
            count += 1;
        }
    }
    check(
        count > 0 && worst < 1e-9 && blocked && clear,
        format!(
            "{count} first-order paths, worst image mismatch {worst:.2e} m (< 1e-9); Tx-Rx occluded: {blocked}; Tx-AR and AR-Rx clear: {clear}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("fraunhofer distances", fraunhofer),
        ("supercell geometry", supercell),
        ("frequency steering", steering),
        ("half-power beamwidth", beamwidth),
        ("method equivalence", method_equivalence),
        ("zero-reflection consistency", zero_order_consistency),
        ("multipath robustness", multipath_robustness),
        ("correction pipeline", correction_pipeline),
        ("tiling property", tiling),
        ("image-method oracle", image_method),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail} [{secs:.2} s]", i + 1);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
