use proptest::prelude::*;

use super::*;
use crate::model::{LightBox, LightState, RasterImage};
use crate::synth::{draw_light, scene};

fn lb(x1: f64, y1: f64, x2: f64, y2: f64, s: LightState) -> LightBox {
    LightBox::new(x1, y1, x2, y2, s).unwrap()
}

fn image_with(lights: Vec<LightBox>, w: u32, h: u32) -> LabeledImage {
    let mut pixels = RasterImage::filled(w, h, [90, 120, 160]).unwrap();
    for b in &lights {
        draw_light(&mut pixels, b);
    }
    LabeledImage {
        id: "t".into(),
        pixels,
        lights,
    }
}

fn busy_scene(seed: u64) -> LabeledImage {
    let mut s = seed;
    loop {
        let img = scene("s", 320, 180, 4, s);
        if img.lights.len() >= 2 {
            return img;
        }
        s += 1000;
    }
}

#[test]
fn every_kind_is_deterministic_and_keeps_size() {
    let input = busy_scene(3);
    let params = TransformParams::default();
    for kind in TransformKind::ALL {
        let a = apply(kind, &input, &params, 7).unwrap();
        let b = apply(kind, &input, &params, 7).unwrap();
        assert_eq!(a, b, "{kind}");
        assert_eq!(a.seed, 7);
        assert_eq!(a.kind, kind);
        assert_eq!(a.image.pixels.width(), 320);
        assert_eq!(a.image.pixels.height(), 180);
        for l in &a.image.lights {
            assert!(l.is_valid() && l.within(320, 180), "{kind}: {l:?}");
        }
        let recomputed =
            label_transform(kind, &input.lights, &a.notes, &params, 320, 180).unwrap();
        assert_eq!(recomputed, a.image.lights, "{kind}");
    }
}

#[test]
fn weather_and_camera_keep_labels() {
    let input = busy_scene(11);
    for kind in TransformKind::ALL.into_iter().filter(|k| !k.is_light()) {
        let out = apply(kind, &input, &TransformParams::default(), 1).unwrap();
        assert_eq!(out.image.lights, input.lights);
        assert!(out.notes.is_empty());
        assert_ne!(out.image.pixels, input.pixels, "{kind} changed nothing");
    }
}

#[test]
fn light_kinds_need_lights() {
    let empty = image_with(vec![], 64, 48);
    for kind in TransformKind::ALL {
        let r = apply(kind, &empty, &TransformParams::default(), 0);
        if kind.is_light() {
            assert_eq!(r.unwrap_err(), TransformError::NoLights, "{kind}");
        } else {
            assert!(r.is_ok());
        }
    }
    assert!(sc_scale(&empty, &TransformParams::default()).unwrap().image.lights.is_empty());
}

#[test]
fn invalid_params_rejected() {
    let input = busy_scene(2);
    let params = TransformParams {
        mb_kernel: 4,
        ..Default::default()
    };
    assert!(matches!(
        apply(TransformKind::Mb, &input, &params, 0),
        Err(TransformError::Params(_))
    ));
}

#[test]
fn cc_state_mapping() {
    let input = image_with(
        vec![
            lb(10.0, 10.0, 20.0, 40.0, LightState::Stop),
            lb(40.0, 10.0, 50.0, 40.0, LightState::Go),
            lb(70.0, 10.0, 80.0, 40.0, LightState::Warning),
            lb(100.0, 10.0, 110.0, 40.0, LightState::StopLeft),
        ],
        160,
        80,
    );
    let out = cc_change_color(&input, 0).unwrap();
    let states: Vec<_> = out.image.lights.iter().map(|l| l.state).collect();
    assert_eq!(
        states,
        [LightState::Go, LightState::Stop, LightState::Warning, LightState::GoLeft]
    );
    for (a, b) in out.image.lights.iter().zip(&input.lights) {
        assert_eq!((a.x1, a.y1, a.x2, a.y2), (b.x1, b.y1, b.x2, b.y2));
    }
    // warning light pixels untouched
    for y in 10..40 {
        for x in 70..80 {
            assert_eq!(out.image.pixels.pixel(x, y), input.pixels.pixel(x, y));
        }
    }
    let twice = cc_change_color(&out.image, 1).unwrap();
    let back: Vec<_> = twice.image.lights.iter().map(|l| l.state).collect();
    let orig: Vec<_> = input.lights.iter().map(|l| l.state).collect();
    assert_eq!(back, orig);
}

#[test]
fn cc_puts_green_on_top_after_recoloring() {
    let input = image_with(vec![lb(10.0, 10.0, 22.0, 46.0, LightState::Stop)], 64, 64);
    let out = cc_change_color(&input, 0).unwrap();
    // red bulb was on top; after remap + flip the lit bulb is at the bottom and green
    let (h, s, _) = rgb_to_hsv_probe(out.image.pixels.pixel(16, 40));
    assert!((75.0..165.0).contains(&h) && s > 0.3, "h={h} s={s}");
    let (_, s_top, _) = rgb_to_hsv_probe(out.image.pixels.pixel(16, 16));
    assert!(s_top < 0.3);
}

fn rgb_to_hsv_probe(p: [u8; 3]) -> (f64, f64, f64) {
    crate::imaging::rgb_to_hsv(p)
}

#[test]
fn bulb_hue_gates() {
    assert_eq!(swap_bulb_hue([40, 40, 40]), [40, 40, 40]);
    assert_eq!(swap_bulb_hue([240, 190, 40]), [240, 190, 40]);
    let (h, _, _) = crate::imaging::rgb_to_hsv(swap_bulb_hue([235, 40, 30]));
    assert!((90.0..150.0).contains(&h));
    let (h, _, _) = crate::imaging::rgb_to_hsv(swap_bulb_hue([40, 225, 110]));
    assert!(!(30.0..330.0).contains(&h));
    // dim red stays
    assert_eq!(swap_bulb_hue([50, 5, 5]), [50, 5, 5]);
}

#[test]
fn mp_example_and_fallback() {
    let input = image_with(vec![lb(100.0, 50.0, 120.0, 90.0, LightState::Go)], 320, 180);
    let out = mp_move_position(&input, 0).unwrap();
    assert_eq!(out.image.lights, [lb(120.0, 50.0, 140.0, 90.0, LightState::Go)]);
    assert_eq!(
        out.notes[0].action,
        NoteAction::Moved {
            shift: Shift::Right
        }
    );

    let input = image_with(vec![lb(300.0, 50.0, 320.0, 90.0, LightState::Go)], 320, 180);
    let out = mp_move_position(&input, 0).unwrap();
    assert_eq!(out.image.lights, [lb(280.0, 50.0, 300.0, 90.0, LightState::Go)]);
}

#[test]
fn mp_blocked_both_ways_leaves_light() {
    // the middle light cannot move either way; the outer ones can still go outward
    let lights = vec![
        lb(100.0, 50.0, 110.0, 80.0, LightState::Go),
        lb(110.0, 50.0, 120.0, 80.0, LightState::Stop),
        lb(120.0, 50.0, 130.0, 80.0, LightState::Go),
    ];
    let input = image_with(lights.clone(), 320, 180);
    let mut saw_blocked = false;
    for seed in 0..64 {
        let out = mp_move_position(&input, seed).unwrap();
        if let NoteAction::Skipped { reason } = out.notes[1].action {
            assert_eq!(reason, SkipReason::Blocked);
            assert_eq!(out.image.lights[1], lights[1]);
            saw_blocked = true;
        }
    }
    assert!(saw_blocked);
}

#[test]
fn mp_subset_nonempty_and_pixels_follow() {
    for seed in 0..20 {
        let input = busy_scene(seed);
        let out = mp_move_position(&input, seed).unwrap();
        assert!(out.notes.iter().any(|n| n.action != NoteAction::Unchanged));
        for n in &out.notes {
            if let NoteAction::Moved { .. } = n.action {
                let b = out.image.lights[n.output.unwrap()];
                let (x0, y0, ..) = b.pixel_span(320, 180);
                let src = input.lights[n.source];
                let (sx, sy, ..) = src.pixel_span(320, 180);
                assert_eq!(out.image.pixels.pixel(x0, y0), input.pixels.pixel(sx, sy));
            }
        }
    }
}

#[test]
fn ad_count_and_range() {
    for n in 1..=6usize {
        let lights: Vec<_> = (0..n)
            .map(|i| {
                let x = 40.0 + 60.0 * i as f64;
                lb(x, 20.0, x + 10.0, 50.0, LightState::Stop)
            })
            .collect();
        let input = image_with(lights, 480, 120);
        for seed in 0..30 {
            let out = ad_add_lights(&input, seed).unwrap();
            let attempts = out.notes.len() - n;
            assert!(attempts >= 1 && attempts <= n.div_ceil(2).max(1));
            let added = out
                .notes
                .iter()
                .filter(|x| matches!(x.action, NoteAction::Added { .. }))
                .count();
            assert_eq!(out.image.lights.len(), n + added);
            assert_eq!(out.image.lights[..n], input.lights[..]);
        }
    }
}

#[test]
fn rt_example_and_dearrow() {
    let input = image_with(vec![lb(100.0, 20.0, 120.0, 80.0, LightState::GoLeft)], 320, 180);
    let out = rt_rotate(&input, 0).unwrap();
    assert_eq!(out.image.lights, [lb(80.0, 40.0, 140.0, 60.0, LightState::Go)]);
    let sq = image_with(vec![lb(10.0, 10.0, 30.0, 30.0, LightState::Stop)], 64, 64);
    assert_eq!(rt_rotate(&sq, 0).unwrap().image.lights, sq.lights);
}

#[test]
fn rt_clamps_at_border() {
    let input = image_with(vec![lb(0.0, 10.0, 10.0, 40.0, LightState::StopLeft)], 64, 64);
    let out = rt_rotate(&input, 0).unwrap();
    assert_eq!(out.image.lights, [lb(0.0, 20.0, 20.0, 30.0, LightState::Stop)]);
    assert_eq!(out.notes[0].action, NoteAction::Rotated { clamped: true });
}

#[test]
fn sc_example() {
    let input = image_with(vec![lb(600.0, 300.0, 680.0, 420.0, LightState::Go)], 1280, 720);
    let out = sc_scale(&input, &TransformParams::default()).unwrap();
    assert_eq!(out.image.lights, [lb(608.0, 312.0, 672.0, 408.0, LightState::Go)]);
}

#[test]
fn sc_shrinks_scene_content() {
    let input = image_with(vec![lb(140.0, 60.0, 180.0, 120.0, LightState::Stop)], 320, 180);
    let out = sc_scale(&input, &TransformParams::default()).unwrap();
    // corners now show padding filled from the edge color
    assert_eq!(out.image.pixels.pixel(0, 0), [90, 120, 160]);
    let b = out.image.lights[0];
    let (x0, y0, x1, y1) = b.pixel_span(320, 180);
    let lit = (y0..y1)
        .flat_map(|y| (x0..x1).map(move |x| (x, y)))
        .filter(|&(x, y)| out.image.pixels.pixel(x, y) != [90, 120, 160])
        .count();
    assert!(lit as f64 > 0.8 * ((x1 - x0) * (y1 - y0)) as f64);
}

#[test]
fn notes_round_trip_json() {
    let notes = vec![
        LightNote {
            source: 0,
            output: Some(0),
            action: NoteAction::Moved { shift: Shift::Left },
        },
        LightNote {
            source: 1,
            output: None,
            action: NoteAction::NotAdded {
                reason: SkipReason::Blocked,
            },
        },
    ];
    let json = serde_json::to_string(&notes).unwrap();
    assert!(json.contains(r#""action":"moved","shift":"left""#), "{json}");
    let back: Vec<LightNote> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, notes);
}

#[test]
fn label_transform_rejects_tampering() {
    let input = busy_scene(5);
    let p = TransformParams::default();
    let out = apply(TransformKind::Mp, &input, &p, 9).unwrap();
    let mut notes = out.notes.clone();
    notes.pop();
    assert!(label_transform(TransformKind::Mp, &input.lights, &notes, &p, 320, 180).is_err());
    let mut notes = out.notes.clone();
    notes[0].action = NoteAction::Recolored;
    assert!(label_transform(TransformKind::Mp, &input.lights, &notes, &p, 320, 180).is_err());
    assert!(label_transform(TransformKind::Fg, &input.lights, &out.notes, &p, 320, 180).is_err());
}

fn arb_box(w: f64, h: f64) -> impl Strategy<Value = LightBox> {
    (0.0..w - 2.0, 0.0..h - 2.0, 1.0..60.0f64, 1.0..60.0f64).prop_map(move |(x, y, bw, bh)| {
        lb(x, y, (x + bw).min(w), (y + bh).min(h), LightState::GoLeft)
    })
}

proptest! {
    #[test]
    fn rotate_box_geometry(b in arb_box(1280.0, 720.0)) {
        let r = rotate_box(&b);
        prop_assert!((r.area() - b.area()).abs() < 1e-6);
        prop_assert!((r.center().0 - b.center().0).abs() < 1e-9);
        prop_assert!((r.center().1 - b.center().1).abs() < 1e-9);
        prop_assert!((r.width() - b.height()).abs() < 1e-9);
        prop_assert_eq!(r.state, LightState::Go);
        prop_assert_eq!(rotate_box(&r).state, LightState::Go);
    }

    #[test]
    fn sc_map_is_affine(a in arb_box(1280.0, 720.0), b in arb_box(1280.0, 720.0)) {
        let p = TransformParams::default();
        let (ma, mb) = (sc_map_box(&a, 1280, 720, &p), sc_map_box(&b, 1280, 720, &p));
        let kx = 1280.0 / 1600.0;
        let ky = 720.0 / 900.0;
        prop_assert!((ma.width() - a.width() * kx).abs() < 1e-9);
        prop_assert!((ma.height() - a.height() * ky).abs() < 1e-9);
        let dx = mb.center().0 - ma.center().0;
        prop_assert!((dx - (b.center().0 - a.center().0) * kx).abs() < 1e-9);
        prop_assert!(ma.width() < a.width() && ma.height() < a.height());
    }
}
