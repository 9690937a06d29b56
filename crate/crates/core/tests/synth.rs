use std::fs;
use std::path::Path;

use gw_core::frameio::read_annotations;
use gw_core::synth::{self, parse_scene, warmup_prefix, Background};

const SCENE: &str = "\
width = 96
height = 64
nframes = 10
seed = 42
background = 128,128,128
object.red.color = 220,30,30
object.red.size = 40x40
object.red.start = 20,10
";

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn static_scene_outputs() {
    let spec = parse_scene(SCENE).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.jsonl");
    synth::generate(&spec, dir.path().join("frames"), &gt, None).unwrap();
    assert_eq!(dir_bytes(&dir.path().join("frames")).len(), 10);
    let text = fs::read_to_string(&gt).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    for (i, line) in lines.iter().enumerate() {
        assert_eq!(*line, format!("{{\"frame\":{i},\"boxes\":[{{\"x\":20,\"y\":10,\"w\":40,\"h\":40}}]}}"));
    }
}

#[test]
fn fixed_seed_is_byte_identical() {
    let mut spec = parse_scene(SCENE).unwrap();
    spec.noise_sigma = 12.0;
    spec.background = Background::Texture;
    let run = |root: &Path| {
        synth::generate(&spec, root.join("frames"), root.join("gt.jsonl"), Some(&root.join("persons.jsonl"))).unwrap();
        (
            dir_bytes(&root.join("frames")),
            fs::read(root.join("gt.jsonl")).unwrap(),
            fs::read(root.join("persons.jsonl")).unwrap(),
        )
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(a.path()), run(b.path()));
}

#[test]
fn moving_object_closed_form_trajectory() {
    let text = SCENE.replace("object.red.start = 20,10", "object.red.start = 10,10\nobject.red.velocity = 2,0");
    let spec = parse_scene(&text).unwrap();
    for (t, ann) in spec.ground_truth().iter().enumerate() {
        assert_eq!(ann.boxes[0].x, 10 + 2 * t as u32);
        assert_eq!(ann.boxes[0].y, 10);
    }
}

#[test]
fn warmup_prefix_is_background_only() {
    let spec = warmup_prefix(&parse_scene(SCENE).unwrap(), 25);
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.jsonl");
    synth::generate(&spec, dir.path().join("frames"), &gt, None).unwrap();
    let anns = read_annotations(&gt, Some((96, 64))).unwrap();
    assert_eq!(anns.len(), 35);
    assert!(anns[..25].iter().all(|a| a.boxes.is_empty()));
    assert!(anns[25..].iter().all(|a| a.boxes.len() == 1));
    let frames: Vec<_> = spec.frames().unwrap().collect();
    assert!(frames[..25].iter().all(|f| f.rgb().all(|p| p == [128, 128, 128])));
    assert_eq!(frames[25].pixel(20, 10), [220, 30, 30]);
}

#[test]
fn escaping_trajectory_is_a_spec_error() {
    let text = SCENE.replace("object.red.start = 20,10", "object.red.start = 20,10\nobject.red.velocity = 5,0");
    let err = parse_scene(&text).unwrap_err();
    assert!(matches!(err, gw_core::Error::Spec(_)));
    let msg = err.to_string();
    assert!(msg.contains("red") && msg.contains("frame 8"), "{msg}");
}
