use tmvkscr::data::{
    generate_synth, load_model, read_model, save_model, write_model, SynthKind, SynthSpec,
};
use tmvkscr::{Error, KernelSpec, ModelConfig, TmvkscrModel};

fn fitted() -> TmvkscrModel {
    let d = generate_synth(&SynthSpec::new(SynthKind::Synth1, 150, 3)).unwrap();
    let cfg = ModelConfig::new(vec![KernelSpec::rbf(20.0); 3], 2)
        .with_rho(0.5)
        .with_kappa(vec![1.0, 2.0, 0.5])
        .with_components(4);
    TmvkscrModel::fit(&d, &cfg).unwrap().model
}

fn bytes(m: &TmvkscrModel) -> Vec<u8> {
    let mut buf = Vec::new();
    write_model(m, &mut buf).unwrap();
    buf
}

#[test]
fn round_trip_is_exact() {
    let model = fitted();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.tmvk");
    save_model(&model, &path).unwrap();
    let back = load_model(&path).unwrap();
    assert_eq!(back, model);

    let fresh = generate_synth(&SynthSpec::new(SynthKind::Synth1, 80, 99)).unwrap();
    let p1 = model.predict(&fresh).unwrap();
    let p2 = back.predict(&fresh).unwrap();
    assert_eq!(p1.assignment, p2.assignment);
    let bits = |a: &ndarray::Array2<f64>| a.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&p1.scores.mean), bits(&p2.scores.mean));
    assert_eq!(bytes(&back), bytes(&model));
}

#[test]
fn fixed_size_subset_survives() {
    let d = generate_synth(&SynthSpec::new(SynthKind::Synth2, 120, 5)).unwrap();
    let cfg = ModelConfig::new(vec![KernelSpec::rbf(2.0); 2], 2);
    let fit = TmvkscrModel::fit_fixed_size(&d, &cfg, 40, 11).unwrap();
    let back = read_model(bytes(&fit.fit.model).as_slice()).unwrap();
    assert_eq!(back.subset_indices().map(<[usize]>::len), Some(40));
    assert_eq!(back, fit.fit.model);
}

#[test]
fn bumped_version_is_rejected() {
    let mut buf = bytes(&fitted());
    let needle = b"\"format_version\":1";
    let pos = buf.windows(needle.len()).position(|w| w == needle).unwrap();
    buf[pos + needle.len() - 1] = b'2';
    match read_model(buf.as_slice()) {
        Err(Error::FormatVersion {
            found: 2,
            expected: 1,
        }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn truncated_array_section() {
    let mut buf = bytes(&fitted());
    buf.truncate(buf.len() - 8);
    assert!(matches!(
        read_model(buf.as_slice()),
        Err(Error::CorruptModel(_))
    ));
}

#[test]
fn trailing_bytes_and_bad_magic() {
    let mut buf = bytes(&fitted());
    buf.extend_from_slice(&[0; 8]);
    assert!(matches!(
        read_model(buf.as_slice()),
        Err(Error::CorruptModel(_))
    ));
    let mut buf = bytes(&fitted());
    buf[0] = b'X';
    assert!(matches!(
        read_model(buf.as_slice()),
        Err(Error::CorruptModel(_))
    ));
    assert!(matches!(
        read_model(&b"TMVK"[..]),
        Err(Error::CorruptModel(_))
    ));
}

#[test]
fn missing_file_names_path() {
    let err = load_model("/nonexistent/model.tmvk").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/model.tmvk"), "{err}");
}
