use std::fs;

use gaitbench::ingest::{load_dataset, synthesize_dataset, write_dataset, LoadOptions};
use gaitbench::model::{Foot, STANCE_THRESHOLD_N};
use gaitbench::preprocess::td::two_peaks;
use gaitbench::Error;

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn write_then_load_is_identity() {
    let data = synthesize_dataset(2, 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &data).unwrap();
    let back = load_dataset(dir.path(), &LoadOptions::default()).unwrap();
    assert_eq!(back.len(), data.len());
    for (a, b) in data.iter().zip(&back) {
        assert_eq!(a.subject_id, b.subject_id);
        assert_eq!(a.trials.len(), b.trials.len());
        assert_eq!(a.sample_rate, b.sample_rate);
        for (ta, tb) in a.trials.iter().zip(&b.trials) {
            assert_eq!((ta.session, ta.trial), (tb.session, tb.trial));
            assert!(rel_close(ta.body_weight, tb.body_weight));
            for foot in Foot::BOTH {
                for (ca, cb) in ta.foot(foot).channels().iter().zip(tb.foot(foot).channels()) {
                    assert_eq!(ca.len(), cb.len());
                    assert!(ca.iter().zip(cb.iter()).all(|(x, y)| rel_close(*x, *y)));
                }
            }
        }
    }
}

#[test]
fn walkway_recordings_are_cropped_to_stance() {
    let data = synthesize_dataset(1, 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &data).unwrap();
    // pad one file with unloaded samples before and after the stance
    let path = dir.path().join("trials/S01_1_1_L.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let body: Vec<String> = lines.drain(1..).collect();
    let mut t = 0.0;
    let mut padded = vec![lines[0].clone()];
    for _ in 0..50 {
        padded.push(format!("{t},0,0,3"));
        t += 1.0;
    }
    for l in &body {
        let rest = l.split_once(',').unwrap().1;
        padded.push(format!("{t},{rest}"));
        t += 1.0;
    }
    for _ in 0..50 {
        padded.push(format!("{t},0,0,1.5"));
        t += 1.0;
    }
    fs::write(&path, padded.join("\n") + "\n").unwrap();
    let back = load_dataset(dir.path(), &LoadOptions::default()).unwrap();
    let orig = &data[0].trials[0].left;
    let got = &back[0].trials[0].left;
    assert_eq!(got.len(), orig.len());
    assert!(got.vertical.iter().all(|&v| v >= STANCE_THRESHOLD_N));
}

#[test]
fn missing_files_are_reported() {
    let data = synthesize_dataset(1, 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(dir.path(), &data).unwrap();
    fs::remove_file(dir.path().join("trials/S01_3_7_R.csv")).unwrap();
    let err = load_dataset(dir.path(), &LoadOptions::default()).unwrap_err();
    assert!(matches!(err.root(), Error::Dataset(_)));
    assert!(err.to_string().contains("session 3 trial 7"), "{err}");
    let lenient = load_dataset(dir.path(), &LoadOptions { lenient: true }).unwrap();
    assert_eq!(lenient[0].trials.len(), 89);

    let err = load_dataset(&dir.path().join("absent"), &LoadOptions::default()).unwrap_err();
    assert!(matches!(err.root(), Error::Io { .. }));
}

#[test]
fn synthetic_vertical_curves_have_two_peaks() {
    for ds in synthesize_dataset(2, 9).unwrap() {
        for t in &ds.trials {
            for foot in Foot::BOTH {
                let v = &t.foot(foot).vertical;
                let (a, b) = two_peaks(v).expect("two peaks");
                assert!(a < v.len() / 2 && b > v.len() / 2, "{a} {b} of {}", v.len());
            }
        }
    }
}
