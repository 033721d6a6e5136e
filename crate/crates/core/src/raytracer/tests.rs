use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::linkbudget::{received_power_method2, LinkParams};
use crate::pattern::{ElementPattern, FarField, PanelSpec, PatternGrid};
use crate::units::{Angle, Frequency, GainDb, PowerLevel};

const AUDITORIUM: &str = include_str!("../../data/auditorium.scene");

fn auditorium() -> Scene {
    Scene::from_json_str(AUDITORIUM).unwrap()
}

fn ghz(x: f64) -> Frequency {
    Frequency::from_ghz(x).unwrap()
}

fn v(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

fn facet(material: &str, vertices: &[[f64; 3]]) -> FacetSpec {
    FacetSpec {
        name: None,
        material: material.into(),
        vertices: vertices.iter().map(|&p| p.into()).collect(),
    }
}

/// The auditorium without its absorber.
fn bare_room() -> Scene {
    let mut spec = auditorium().spec().clone();
    spec.facets.retain(|f| f.material != "absorber");
    Scene::new(spec).unwrap()
}

fn ground_plane(material: Material) -> Scene {
    let name = material.name().to_string();
    Scene::new(SceneSpec {
        name: None,
        materials: vec![material],
        facets: vec![facet(
            &name,
            &[[-500.0, -500.0, 0.0], [500.0, -500.0, 0.0], [500.0, 500.0, 0.0], [-500.0, 500.0, 0.0]],
        )],
        layout: None,
    })
    .unwrap()
}

fn isotropic(at: Vec3) -> AntennaNode {
    struct Iso;
    impl FarField for Iso {
        fn field(&self, _: [f64; 3]) -> num_complex::Complex64 {
            num_complex::Complex64::new(1.0, 0.0)
        }
    }
    AntennaNode::new(Frame::new(at, Vec3::Z, Vec3::X).unwrap(), Arc::new(Iso))
}

#[test]
fn shipped_scene_loads() {
    let s = auditorium();
    assert_eq!(s.facets().len(), 7);
    assert_eq!(s.to_json_string(), AUDITORIUM);
    let (mut lo, mut hi) = (Vec3::new(f64::MAX, f64::MAX, f64::MAX), Vec3::new(f64::MIN, f64::MIN, f64::MIN));
    for p in s.facets().iter().flat_map(|f| f.vertices.iter()) {
        lo = v(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = v(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    assert_eq!((hi - lo).to_array(), [14.0, 8.0, 3.0]);
    let layout = s.layout().unwrap();
    assert_eq!(layout.tx_position(), v(0.0, 5.5, 1.5));
    let rx = layout.rx_position(Angle::from_degrees(90.0));
    assert!((rx - v(7.0, 0.0, 1.5)).norm() < 1e-12);
}

#[test]
fn scene_validation() {
    let empty = Scene::from_json_str(r#"{"materials": [], "facets": []}"#).unwrap();
    assert!(empty.facets().is_empty());
    assert!(los_clear(&empty, v(0.0, 0.0, 0.0), v(5.0, 1.0, 2.0)));

    let tilted = r#"{"materials": [{"kind": "absorber", "name": "a"}],
        "facets": [{"material": "a", "vertices": [[0,0,0],[1,0,0],[1,1,0.001],[0,1,0]]}]}"#;
    assert!(matches!(Scene::from_json_str(tilted), Err(crate::Error::Geometry(_))));

    let dart = r#"{"materials": [{"kind": "absorber", "name": "a"}],
        "facets": [{"material": "a", "vertices": [[0,0,0],[2,0,0],[1,0.5,0],[2,2,0],[0,2,0]]}]}"#;
    assert!(matches!(Scene::from_json_str(dart), Err(crate::Error::Geometry(_))));

    let unknown = r#"{"materials": [], "facets": [{"material": "x", "vertices": [[0,0,0],[1,0,0],[0,1,0]]}]}"#;
    assert!(Scene::from_json_str(unknown).is_err());

    let bad_eps = r#"{"materials": [{"kind": "dielectric", "name": "m", "relative_permittivity": 0.2,
        "conductivity_coefficient": 0, "conductivity_exponent": 0}]}"#;
    assert!(Scene::from_json_str(bad_eps).is_err());

    let broken = "{\n  \"materials\": [],\n  \"facets\": [\n    nope\n  ]\n}";
    match Scene::from_json_str(broken) {
        Err(crate::Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    assert!(Scene::from_json_str(r#"{"facets": [], "extra": 1}"#).is_err());
}

#[test]
fn absorber_blocks_only_the_direct_link() {
    let s = auditorium();
    let layout = *s.layout().unwrap();
    let ar = layout.ar_center;
    let tx = layout.tx_position();
    assert!(los_clear(&s, tx, ar));
    for deg in [55.0, 60.0, 62.5, 65.0, 70.0, 75.0, 80.0, 85.0] {
        let rx = layout.rx_position(Angle::from_degrees(deg));
        assert!(!los_clear(&s, tx, rx), "{deg}");
        assert!(los_clear(&s, ar, rx), "{deg}");
        assert!(los_clear(&bare_room(), tx, rx), "{deg}");
    }
}

#[test]
fn order_zero_is_los_only() {
    let s = auditorium();
    let layout = s.layout().unwrap();
    let tx = layout.tx_position();
    let ar = layout.ar_center;
    let rx = layout.rx_position(Angle::from_degrees(65.0));
    let p = reflect_paths(&s, tx, ar, 0).unwrap();
    assert_eq!(p.len(), 1);
    assert_eq!(p[0].points, vec![tx, ar]);
    assert!(reflect_paths(&s, tx, rx, 0).unwrap().is_empty());
    assert!(reflect_paths(&s, tx, rx, 4).is_err());
}

#[test]
fn ground_plane_single_bounce() {
    let s = ground_plane(Material::concrete());
    let a = v(0.0, 0.0, 1.5);
    let b = v(7.0, 2.0, 0.7);
    let paths = reflect_paths(&s, a, b, 3).unwrap();
    assert_eq!(paths.len(), 2);
    assert_eq!(paths[0].order(), 0);
    let refl = &paths[1];
    assert_eq!(refl.facet_ids(), vec![0]);
    validate_path(&s, refl).unwrap();
    let d_in = refl.departure();
    let d_out = (b - refl.bounces[0].point).normalized().unwrap();
    let inc = d_in.z.abs().acos();
    let out = d_out.z.abs().acos();
    assert!((inc - out).abs() < 1e-9);
    // Image of a is (0, 0, -1.5): the bounce divides the horizontal run 1.5 : 0.7.
    let t = 1.5 / 2.2;
    assert!((refl.bounces[0].point - v(7.0 * t, 2.0 * t, 0.0)).norm() < 1e-12);
    assert!((refl.length() - b.distance(v(0.0, 0.0, -1.5))).abs() < 1e-12);
}

/// Bounce point off the axis-aligned plane `coord[axis] = c`.
fn analytic_bounce(a: Vec3, b: Vec3, axis: usize, c: f64) -> Vec3 {
    let mut img = a.to_array();
    img[axis] = 2.0 * c - img[axis];
    let img = Vec3::from(img);
    let bb = b.to_array();
    let t = (c - img.to_array()[axis]) / (bb[axis] - img.to_array()[axis]);
    img + (b - img) * t
}

#[test]
fn first_order_images_in_the_box() {
    let planes = [(2, 0.0), (2, 3.0), (1, 0.0), (1, 8.0), (0, -3.0), (0, 11.0)];
    let room = bare_room();
    let layout = *auditorium().layout().unwrap();
    let pairs = [
        (v(1.0, 3.0, 1.0), v(4.0, 5.0, 2.0)),
        (layout.tx_position(), layout.rx_position(Angle::from_degrees(65.0))),
    ];
    for (a, b) in pairs {
        let first: Vec<_> = reflect_paths(&room, a, b, 1).unwrap().into_iter().filter(|p| p.order() == 1).collect();
        assert_eq!(first.len(), 6);
        for p in &first {
            let id = p.bounces[0].facet;
            let (axis, c) = planes[id];
            assert!((p.bounces[0].point - analytic_bounce(a, b, axis, c)).norm() < 1e-9);
        }
    }
    // With the absorber, every surviving first-order path still matches.
    let s = auditorium();
    let (a, b) = pairs[1];
    let first: Vec<_> = reflect_paths(&s, a, b, 1).unwrap().into_iter().filter(|p| p.order() == 1).collect();
    assert!(first.len() < 6);
    for p in &first {
        let (axis, c) = planes[p.bounces[0].facet];
        assert!((p.bounces[0].point - analytic_bounce(a, b, axis, c)).norm() < 1e-9);
    }
}

#[test]
fn reflector_wall_is_not_a_reflector_for_its_own_node() {
    let s = auditorium();
    let layout = s.layout().unwrap();
    let paths = reflect_paths(&s, layout.tx_position(), layout.ar_center, 3).unwrap();
    assert!(paths.iter().all(|p| p.bounces.iter().all(|b| b.facet != 2)));
    assert!(paths.iter().all(|p| p.bounces.iter().all(|b| b.facet != 6)));
}

#[test]
fn higher_order_paths_are_valid_and_ordered() {
    let s = auditorium();
    let layout = *s.layout().unwrap();
    let ends = [
        (layout.tx_position(), layout.ar_center),
        (layout.ar_center, layout.rx_position(Angle::from_degrees(65.0))),
        (layout.tx_position(), layout.rx_position(Angle::from_degrees(75.0))),
    ];
    for (a, b) in ends {
        let paths = reflect_paths(&s, a, b, 3).unwrap();
        assert!(paths.iter().any(|p| p.order() == 3));
        for p in &paths {
            validate_path(&s, p).unwrap();
            assert!(p.facet_ids().windows(2).all(|w| w[0] != w[1]));
        }
        let keys: Vec<(usize, Vec<usize>)> = paths.iter().map(|p| (p.order(), p.facet_ids())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        sorted.dedup();
        assert_eq!(sorted.len(), keys.len());
    }
}

#[test]
fn validate_path_rejects_bent_paths() {
    let s = ground_plane(Material::concrete());
    let mut p = reflect_paths(&s, v(0.0, 0.0, 1.0), v(4.0, 0.0, 1.0), 1).unwrap().remove(1);
    p.points[1] = p.points[1] + v(0.01, 0.0, 0.0);
    p.bounces[0].point = p.points[1];
    assert!(validate_path(&s, &p).is_err());
}

#[test]
fn single_los_path_is_friis() {
    let s = Scene::free_space();
    let (a, b) = (v(0.0, 0.0, 0.0), v(3.0, 4.0, 0.0));
    let f = ghz(26.0);
    let paths = reflect_paths(&s, a, b, 3).unwrap();
    assert_eq!(paths.len(), 1);
    let t = hop_transfer(&s, &isotropic(a), &isotropic(b), &paths, f, Summation::Incoherent);
    let friis = (f.wavelength() / (4.0 * PI * 5.0)).powi(2);
    assert!((t.linear / friis - 1.0).abs() < 1e-14);
    let (p, _) = hop_power(&s, &isotropic(a), &isotropic(b), &paths, f, Summation::Coherent, PowerLevel(10.0));
    assert!((p.dbm() - 10.0 - 10.0 * friis.log10()).abs() < 1e-12);
}

#[test]
fn matched_ground_adds_nothing() {
    let vacuum = Material::Dielectric {
        name: "matched".into(),
        relative_permittivity: 1.0,
        conductivity_coefficient: 0.0,
        conductivity_exponent: 0.0,
    };
    let s = ground_plane(vacuum);
    let (a, b) = (v(0.0, 0.0, 1.5), v(6.0, 1.0, 1.5));
    let f = ghz(26.0);
    let paths = reflect_paths(&s, a, b, 1).unwrap();
    assert_eq!(paths.len(), 2);
    let both = hop_transfer(&s, &isotropic(a), &isotropic(b), &paths, f, Summation::Incoherent);
    let los = hop_transfer(&s, &isotropic(a), &isotropic(b), &paths[..1], f, Summation::Incoherent);
    assert_eq!(both.linear, los.linear);
}

#[test]
fn empty_path_list_is_flagged() {
    let s = auditorium();
    let layout = s.layout().unwrap();
    let (tx, rx) = (layout.tx_position(), layout.rx_position(Angle::from_degrees(65.0)));
    let paths = reflect_paths(&s, tx, rx, 0).unwrap();
    let (p, t) = hop_power(&s, &isotropic(tx), &isotropic(rx), &paths, ghz(26.0), Summation::Incoherent, PowerLevel(0.0));
    assert!(t.is_empty());
    assert_eq!(p.dbm(), f64::NEG_INFINITY);
}

#[test]
fn polarization_weights_walls_and_floor() {
    // Vertical E is TE on walls and TM on the floor.
    let s = bare_room();
    let f = ghz(26.0);
    let (a, b) = (v(1.0, 3.0, 1.5), v(4.0, 5.0, 1.5));
    let paths = reflect_paths(&s, a, b, 1).unwrap();
    let concrete = Material::concrete();
    for p in paths.iter().filter(|p| p.order() == 1) {
        let bounce = p.bounces[0];
        let r = path_reflection(&s, p, f, Vec3::Z);
        let pol = if bounce.facet <= 1 { Polarization::Tm } else { Polarization::Te };
        let want = fresnel_coefficient(&concrete, bounce.incidence, f, pol).norm_sqr();
        assert!((r.power - want).abs() < 1e-12, "facet {}", bounce.facet);
        assert!((r.amplitude.norm_sqr() - want).abs() < 1e-12);
    }
}

fn random_node(x: f64, y: f64, z: f64, ax: f64, ay: f64) -> AntennaNode {
    let at = v(x, y, z);
    AntennaNode::horn_aimed(at, at + v(ax, ay, 0.3)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hop_reciprocity(
        a in (-2.5f64..10.5, 0.5f64..7.5, 0.2f64..2.8, -1.0f64..1.0, -1.0f64..1.0),
        b in (-2.5f64..10.5, 0.5f64..7.5, 0.2f64..2.8, -1.0f64..1.0, -1.0f64..1.0),
        coherent in any::<bool>(),
    ) {
        let s = auditorium();
        let ta = random_node(a.0, a.1, a.2, a.3, a.4 + 0.01);
        let tb = random_node(b.0, b.1, b.2, b.3, b.4 + 0.01);
        prop_assume!(ta.position().distance(tb.position()) > 0.1);
        let mode = if coherent { Summation::Coherent } else { Summation::Incoherent };
        let f = ghz(26.0);
        let fwd = reflect_paths(&s, ta.position(), tb.position(), 3).unwrap();
        let back = reflect_paths(&s, tb.position(), ta.position(), 3).unwrap();
        prop_assert_eq!(fwd.len(), back.len());
        let p = hop_transfer(&s, &ta, &tb, &fwd, f, mode).linear;
        let q = hop_transfer(&s, &tb, &ta, &back, f, mode).linear;
        prop_assume!(p > 0.0);
        // Coherent phases kL ~ 1e4 rad amplify last-bit differences in L.
        let tol = if coherent { 1e-9 } else { 1e-12 };
        prop_assert!((p / q - 1.0).abs() < tol, "{} vs {}", p, q);
    }

    #[test]
    fn absorbers_never_add_paths(
        x in -2.0f64..10.0, y in 1.0f64..7.0, z in 0.2f64..2.0,
        w in 0.1f64..3.0, h in 0.1f64..2.0, normal_x in any::<bool>(),
    ) {
        let s = auditorium();
        let layout = *s.layout().unwrap();
        let quad = if normal_x {
            [[x, y, z], [x, y + w, z], [x, y + w, z + h], [x, y, z + h]]
        } else {
            [[x, y, z], [x, y, z + h], [x + w, y, z + h], [x + w, y, z]]
        };
        let bigger = s.with_facet(facet("absorber", &quad)).unwrap();
        let ends = [
            (layout.tx_position(), layout.ar_center),
            (layout.ar_center, layout.rx_position(Angle::from_degrees(65.0))),
        ];
        for (a, b) in ends {
            prop_assume!(bigger.facets()[7].plane_distance(a).abs() > 1e-3);
            prop_assume!(bigger.facets()[7].plane_distance(b).abs() > 1e-3);
            let before = reflect_paths(&s, a, b, 2).unwrap();
            let after = reflect_paths(&bigger, a, b, 2).unwrap();
            prop_assert!(after.len() <= before.len());
            for p in &after {
                prop_assert!(before.contains(p));
            }
        }
    }

    #[test]
    fn incoherent_power_below_free_space_bound(
        a in (-2.5f64..10.5, 0.5f64..7.5, 0.2f64..2.8),
        b in (-2.5f64..10.5, 0.5f64..7.5, 0.2f64..2.8),
    ) {
        let s = auditorium();
        let (pa, pb) = (v(a.0, a.1, a.2), v(b.0, b.1, b.2));
        prop_assume!(pa.distance(pb) > 0.1);
        let f = ghz(26.0);
        let paths = reflect_paths(&s, pa, pb, 3).unwrap();
        let total = hop_transfer(&s, &isotropic(pa), &isotropic(pb), &paths, f, Summation::Incoherent).linear;
        let bound: f64 = paths.iter().map(|p| (f.wavelength() / (4.0 * PI * p.length())).powi(2)).sum();
        prop_assert!(total <= bound * (1.0 + 1e-12));
    }
}

/// Horns standing in for the reflector patterns keep these tests fast.
fn stand_in_ar(layout: &Layout, f: Frequency) -> ARNode {
    let frame = Frame::new(layout.ar_center, layout.ar_normal, layout.ar_tangent).unwrap();
    let rx = HornPattern { peak_dbi: 30.0, hpbw_deg: 9.0, floor_db: 40.0 };
    struct Steered(HornPattern);
    impl FarField for Steered {
        fn field(&self, d: [f64; 3]) -> num_complex::Complex64 {
            let (s, c) = 65f64.to_radians().sin_cos();
            self.0.field([d[0] * c - d[2] * s, d[1], d[0] * s + d[2] * c])
        }
    }
    ARNode::new(frame, Arc::new(rx), Arc::new(Steered(rx)), f)
}

#[test]
fn zero_order_cascade_is_method2() {
    let s = auditorium();
    let layout = *s.layout().unwrap();
    let f = ghz(26.0);
    let ar = stand_in_ar(&layout, f);
    let tx = AntennaNode::horn_aimed(layout.tx_position(), layout.ar_center).unwrap();
    for deg in [55.0, 65.0, 80.0] {
        let rxp = layout.rx_position(Angle::from_degrees(deg));
        let rx = AntennaNode::horn_aimed(rxp, layout.ar_center).unwrap();
        let params = LinkParams::campaign(f);
        let sim = simulate_ar_link(&s, &tx, &ar, &rx, &params, 0, Summation::Incoherent).unwrap();
        let g_rx = ar.as_receiver().gain_linear((layout.tx_position() - layout.ar_center).normalized().unwrap());
        let g_tx = ar.as_transmitter().gain_linear((rxp - layout.ar_center).normalized().unwrap());
        let m2 = received_power_method2(
            &params,
            GainDb::from_linear(g_rx).unwrap(),
            GainDb::from_linear(g_tx).unwrap(),
        )
        .unwrap();
        let m2 = crate::linkbudget::chain_terminal(m2, &params);
        assert!((sim.received.dbm() - m2.dbm()).abs() < 1e-9, "{deg}: {} vs {}", sim.received.dbm(), m2.dbm());
        assert_eq!((sim.tx_hop.path_count, sim.rx_hop.path_count), (1, 1));
    }
    let wrong = stand_in_ar(&layout, ghz(25.0));
    let rx = AntennaNode::horn_aimed(layout.rx_position(Angle::from_degrees(65.0)), layout.ar_center).unwrap();
    let err = simulate_ar_link(&s, &tx, &wrong, &rx, &LinkParams::campaign(f), 0, Summation::Incoherent);
    assert!(matches!(err, Err(crate::Error::Lookup(_))));
}

#[test]
fn horn_pattern_shape() {
    let h = HornPattern::MEASUREMENT;
    assert_eq!(h.gain_dbi(0.0), 18.0);
    assert!((h.gain_dbi(11.0) - 15.0).abs() < 1e-12);
    assert_eq!(h.gain_dbi(120.0), -12.0);
    let g = h.gain_linear([0.0, 0.0, 1.0]);
    assert!((10.0 * g.log10() - 18.0).abs() < 1e-12);
    let back = h.gain_linear([0.0, 0.0, -1.0]);
    assert!((10.0 * back.log10() + 12.0).abs() < 1e-12);
}

#[test]
fn frame_mapping() {
    let f = Frame::new(v(0.0, 0.0, 1.5), Vec3::Y, Vec3::X).unwrap();
    assert_eq!(f.y, v(0.0, 0.0, -1.0));
    let d = v(65f64.to_radians().sin(), 65f64.to_radians().cos(), 0.0);
    let l = f.to_local(d);
    assert!((l[0] - d.x).abs() < 1e-15 && (l[2] - d.y).abs() < 1e-15 && l[1] == 0.0);
    let aimed = Frame::aimed(v(0.0, 5.5, 1.5), v(0.0, 0.0, 1.5)).unwrap();
    assert_eq!(aimed.z, v(0.0, -1.0, 0.0));
    assert!(aimed.x.z.abs() < 1e-15);
    assert!(Frame::aimed(Vec3::X, Vec3::X).is_err());
}

/// Reflector synthesized from the 48 × 48 panel.
fn reference_ar(layout: &Layout, f: Frequency) -> ARNode {
    let frame = Frame::new(layout.ar_center, layout.ar_normal, layout.ar_tangent).unwrap();
    ARNode::synthesized(
        frame,
        &PanelSpec::reference(48).unwrap(),
        ElementPattern::SurfaceCurrent,
        f,
        &PatternGrid::FULL,
    )
    .unwrap()
}

fn sweep_power(s: &Scene, ar: &ARNode, deg: f64, order: usize) -> f64 {
    let layout = s.layout().unwrap();
    let tx = AntennaNode::horn_aimed(layout.tx_position(), layout.ar_center).unwrap();
    let rx = AntennaNode::horn_aimed(layout.rx_position(Angle::from_degrees(deg)), layout.ar_center).unwrap();
    simulate_ar_link(s, &tx, ar, &rx, &LinkParams::campaign(ar.frequency()), order, Summation::Incoherent)
        .unwrap()
        .received
        .dbm()
}

#[test]
fn synthesized_reflector_in_the_auditorium() {
    let s = auditorium();
    let layout = *s.layout().unwrap();
    let ar26 = reference_ar(&layout, ghz(26.0));

    let tx = AntennaNode::horn_aimed(layout.tx_position(), layout.ar_center).unwrap();
    let f = ghz(26.0);
    let hop = |order| {
        let paths = reflect_paths(&s, tx.position(), layout.ar_center, order).unwrap();
        hop_transfer(&s, &tx, &ar26.as_receiver(), &paths, f, Summation::Incoherent).linear
    };
    let spread = 10.0 * (hop(3) / hop(0)).log10();
    assert!(spread.abs() < 1.0, "{spread}");

    let p65 = sweep_power(&s, &ar26, 65.0, 0);
    let p85 = sweep_power(&s, &ar26, 85.0, 0);
    assert!(p65 - p85 > 15.0, "{p65} {p85}");

    let ar25 = reference_ar(&layout, ghz(25.0));
    let angles = [55.0, 60.0, 65.0, 70.0, 75.0, 80.0, 85.0];
    let best = angles
        .iter()
        .copied()
        .max_by(|a, b| sweep_power(&s, &ar25, *a, 0).total_cmp(&sweep_power(&s, &ar25, *b, 0)))
        .unwrap();
    assert!((best - 70.0).abs() <= 5.0, "{best}");
}
