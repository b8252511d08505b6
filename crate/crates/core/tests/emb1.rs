use std::fs;

use audiocons::encoder::{
    load_external_embeddings, write_emb1, Embedding, EmbeddingKey, EncoderError, Manifest,
};
use audiocons::transform::{excerpt_file_name, parse_excerpt_file_name, Category, TransformSpec};
use tempfile::tempdir;

fn entries(n: usize, dim: usize) -> Vec<(EmbeddingKey, Embedding)> {
    let specs = [
        TransformSpec::original(),
        TransformSpec::new(Category::PN, -15.0).unwrap(),
        TransformSpec::new(Category::PS, 25.0).unwrap(),
        TransformSpec::new(Category::TS, 98.0).unwrap(),
    ];
    (0..n)
        .map(|i| {
            let key = (format!("clip{:03}", i / specs.len()), specs[i % specs.len()]);
            // f32-representable values so the f32 round trip is exact
            let values = (0..dim).map(|k| f64::from((i * dim + k) as f32 * 0.37f32 - 5.0)).collect();
            (key, Embedding::new("ext", values).unwrap())
        })
        .collect()
}

fn keys(e: &[(EmbeddingKey, Embedding)]) -> Vec<EmbeddingKey> {
    e.iter().map(|(k, _)| k.clone()).collect()
}

#[test]
fn write_then_load_is_bitwise() {
    let dir = tempdir().unwrap();
    let e = entries(100, 16);
    let manifest = write_emb1(dir.path(), "ext", &e).unwrap();
    let loaded = load_external_embeddings(&manifest, &keys(&e)).unwrap();
    assert_eq!(loaded.dim, 16);
    assert_eq!(loaded.map.len(), 100);
    for (k, emb) in &e {
        let got = loaded.get(&k.0, &k.1).unwrap();
        let same = got.values().iter().zip(emb.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same, "{k:?}");
    }
}

#[test]
fn manifest_layout() {
    let dir = tempdir().unwrap();
    let e = entries(4, 3);
    let path = write_emb1(dir.path(), "ext", &e).unwrap();
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json["format"], "EMB1");
    assert_eq!(json["rows"][0]["magnitude"], serde_json::Value::Null);
    assert_eq!(json["rows"][0]["category"], "OG");
    assert_eq!(json["rows"][1]["offset"], 12);
    assert_eq!(json["rows"][2]["magnitude"], 25.0);
    assert_eq!(fs::read(dir.path().join("ext.f32")).unwrap().len(), 4 * 3 * 4);
}

#[test]
fn missing_row_is_named() {
    let dir = tempdir().unwrap();
    let e = entries(8, 4);
    let path = write_emb1(dir.path(), "ext", &e).unwrap();
    let mut m: Manifest = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let removed = m.rows.remove(5);
    fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let err = load_external_embeddings(&path, &keys(&e)).unwrap_err();
    match err {
        EncoderError::MissingKeys(k) => {
            assert_eq!(k, vec![format!("{}__PN__-15", removed.clip_id)]);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn row_order_does_not_matter() {
    let dir = tempdir().unwrap();
    let e = entries(12, 5);
    let path = write_emb1(dir.path(), "ext", &e).unwrap();
    let a = load_external_embeddings(&path, &keys(&e)).unwrap();
    let mut m: Manifest = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    m.rows.reverse();
    m.rows.swap(0, 7);
    fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(load_external_embeddings(&path, &keys(&e)).unwrap(), a);
}

#[test]
fn dim_mismatch_between_files() {
    let dir = tempdir().unwrap();
    write_emb1(&dir.path().join("a"), "ext", &entries(4, 6)).unwrap();
    write_emb1(&dir.path().join("b"), "ext", &entries(4, 3)).unwrap();
    let mut m: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    let mut other: Manifest =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b/manifest.json")).unwrap()).unwrap();
    for r in &mut other.rows {
        r.file = "../b/ext.f32".into();
        r.clip_id.push('b');
    }
    for f in &mut other.files {
        f.file = "../b/ext.f32".into();
    }
    m.rows.extend(other.rows);
    m.files.extend(other.files);
    let path = dir.path().join("a/manifest.json");
    fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    assert!(matches!(
        load_external_embeddings(&path, &[]),
        Err(EncoderError::DimMismatch { expected: 6, got: 3, .. })
    ));
}

#[test]
fn checksum_and_schema_errors() {
    let dir = tempdir().unwrap();
    let e = entries(4, 2);
    let path = write_emb1(dir.path(), "ext", &e).unwrap();
    let data = dir.path().join("ext.f32");
    let mut bytes = fs::read(&data).unwrap();
    bytes[0] ^= 1;
    fs::write(&data, &bytes).unwrap();
    assert!(matches!(load_external_embeddings(&path, &[]), Err(EncoderError::Checksum { .. })));

    fs::write(&path, r#"{"format":"EMB1","dim":2,"rows":[]}"#).unwrap();
    let msg = load_external_embeddings(&path, &[]).unwrap_err().to_string();
    assert!(msg.contains("encoder_id"), "{msg}");
    fs::write(&path, r#"{"format":"EMB0","encoder_id":"x","dim":2,"rows":[]}"#).unwrap();
    assert!(matches!(load_external_embeddings(&path, &[]), Err(EncoderError::Manifest(_))));
}

#[test]
fn excerpt_names_parse_back() {
    for spec in [
        TransformSpec::original(),
        TransformSpec::new(Category::PS, -1200.0).unwrap(),
        TransformSpec::new(Category::TS, 102.0).unwrap(),
        TransformSpec::new(Category::MP, 8.0).unwrap(),
        TransformSpec::new(Category::EN, 0.5).unwrap(),
    ] {
        let name = excerpt_file_name("track_01", &spec);
        let (clip, back) = parse_excerpt_file_name(&name).unwrap();
        assert_eq!(clip, "track_01");
        assert_eq!(back, spec);
    }
    assert_eq!(
        excerpt_file_name("a__b", &TransformSpec::new(Category::PN, 30.0).unwrap()),
        "a__b__PN__30.wav"
    );
    assert_eq!(parse_excerpt_file_name("a__b__PN__30.wav").unwrap().0, "a__b");
    assert_eq!(excerpt_file_name("x", &TransformSpec::original()), "x__OG__none.wav");
}
