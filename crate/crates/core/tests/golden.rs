//! Reference streams and dataset checksums. Any implementation of the
//! documented generator must reproduce these bit for bit.

use std::fs;
use std::path::Path;

use tmvkscr::data::{generate_synth, SeededRng, SynthKind, SynthSpec};

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    let text = fs::read_to_string(&path).unwrap();
    text.split_whitespace().next().unwrap().to_string()
}

#[test]
fn raw_stream_seed_7() {
    let mut rng = SeededRng::new(7);
    let got: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
    assert_eq!(
        got,
        [
            1021219803524665661,
            3174977118032272916,
            13236943193235544178
        ]
    );
}

#[test]
fn synth1_checksum() {
    let d = generate_synth(&SynthSpec::new(SynthKind::Synth1, 1000, 7)).unwrap();
    assert_eq!(d.view(0)[[0, 0]], 0.18443099931193208);
    assert_eq!(d.view(0)[[0, 1]], 1.1972867856459841);
    assert_eq!(&d.labels().unwrap()[..10], &[0, 0, 0, 0, 0, 1, 0, 1, 1, 0]);
    assert_eq!(d.checksum(), golden("synth1_seed7_n1000.sha256"));
}

#[test]
fn synth2_checksum() {
    let d = generate_synth(&SynthSpec::new(SynthKind::Synth2, 1000, 7)).unwrap();
    assert_eq!(d.view(0)[[0, 0]], 0.7420944368798272);
    assert_eq!(&d.labels().unwrap()[..10], &[0, 0, 0, 0, 0, 0, 0, 1, 0, 1]);
    assert_eq!(d.checksum(), golden("synth2_seed7_n1000.sha256"));
}

#[test]
fn other_seeds_differ() {
    let a = generate_synth(&SynthSpec::new(SynthKind::Synth1, 1000, 7)).unwrap();
    let b = generate_synth(&SynthSpec::new(SynthKind::Synth1, 1000, 8)).unwrap();
    assert_ne!(a.checksum(), b.checksum());
}
