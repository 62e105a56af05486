use std::fs;
use std::path::Path;

use tempora::composer::{read_composites, write_composites};
use tempora::corpus::{load_corpus, pool_by_class, TimeBinning};
use tempora::{composite_stats, generate_composites, ComposerConfig, Document, Error};

fn write_doc(dir: &Path, name: &str, tokens: usize) {
    // sentences of 20 tokens plus a shorter tail
    let mut text = String::new();
    for i in 0..tokens {
        let last = i + 1 == tokens || (i + 1) % 20 == 0;
        if last {
            text.push_str(".\tSENT\t.\n");
        } else {
            text.push_str(&format!("w{i}\tNOM\tw\n"));
        }
    }
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn four_century_corpus_of_87_documents() {
    let dir = tempfile::tempdir().unwrap();
    // per century: document count, total tokens
    let spec = [(1650, 18, 31_635), (1750, 14, 23_175), (1850, 38, 63_950), (1950, 17, 28_569)];
    let mut manifest = String::from("id,year,path\n");
    for (year, docs, tokens) in spec {
        for d in 0..docs {
            let share = tokens / docs + usize::from(d < tokens % docs);
            let name = format!("{year}_{d}.vrt");
            write_doc(dir.path(), &name, share);
            manifest.push_str(&format!("{year}_{d},{},{name}\n", year + d as i32 % 40));
        }
    }
    fs::write(dir.path().join("manifest.csv"), manifest).unwrap();

    let corpus = load_corpus(&dir.path().join("manifest.csv"), dir.path()).unwrap();
    assert_eq!(corpus.len(), 87);
    assert_eq!(corpus[0].id, "1650_0");

    let binning = TimeBinning::centuries(17, 20).unwrap();
    let pool = pool_by_class(&corpus, &binning).unwrap();
    let tokens: Vec<usize> = (0..4).map(|c| pool.class_tokens(c)).collect();
    assert_eq!(tokens, vec![31_635, 23_175, 63_950, 28_569]);
    assert_eq!(tokens.iter().sum::<usize>(), 147_329);
}

#[test]
fn empty_manifest_gives_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("m.csv"), "id,year,path\n").unwrap();
    assert!(load_corpus(&dir.path().join("m.csv"), dir.path()).unwrap().is_empty());
}

#[test]
fn load_errors_name_the_row() {
    let dir = tempfile::tempdir().unwrap();
    write_doc(dir.path(), "a.vrt", 5);
    let cases = [
        ("id,year,path\na,1600,a.vrt\nb,1700,missing.vrt\n", "row 2", "missing.vrt"),
        ("id,year,path\na,16th,a.vrt\n", "row 1", "unparsable year"),
        ("id,year,path\na,1600,a.vrt\na,1601,a.vrt\n", "row 2", "duplicate"),
    ];
    for (manifest, row, detail) in cases {
        fs::write(dir.path().join("m.csv"), manifest).unwrap();
        let err = load_corpus(&dir.path().join("m.csv"), dir.path()).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Load { .. }), "{msg}");
        assert!(msg.contains(row) && msg.contains(detail), "{msg}");
    }
    let err = load_corpus(&dir.path().join("nope.csv"), dir.path()).unwrap_err();
    assert!(err.to_string().contains("nope.csv"));
}

#[test]
fn malformed_vertical_file_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.vrt"), "a\tNOM\ta\noops\n").unwrap();
    fs::write(dir.path().join("m.csv"), "id,year,path\nbad,1600,bad.vrt\n").unwrap();
    let msg = load_corpus(&dir.path().join("m.csv"), dir.path()).unwrap_err().to_string();
    assert!(msg.contains("line 2") && msg.contains("bad.vrt"), "{msg}");
}

#[test]
fn composites_survive_disk_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    for (name, n) in [("a.vrt", 95), ("b.vrt", 130), ("c.vrt", 77)] {
        write_doc(dir.path(), name, n);
    }
    fs::write(dir.path().join("m.csv"), "id,year,path\na,1520,a.vrt\nb,1580,b.vrt\nc,1640,c.vrt\n").unwrap();
    let corpus = load_corpus(&dir.path().join("m.csv"), dir.path()).unwrap();
    let binning = TimeBinning::centuries(16, 17).unwrap();
    let pool = pool_by_class(&corpus, &binning).unwrap();
    let composites =
        generate_composites(&pool, &ComposerConfig { target_tokens: 50, docs_per_class: 7, seed: 5 }).unwrap();

    let out = dir.path().join("composed");
    write_composites(&out, &composites, binning.labels()).unwrap();
    let (back, labels) = read_composites(&out).unwrap();
    assert_eq!(labels, binning.labels());
    assert_eq!(back, composites);
    assert_eq!(composite_stats(&back), composite_stats(&composites));
    assert!(back.iter().all(|c| c.token_count() >= 50));
}
