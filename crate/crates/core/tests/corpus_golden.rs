use std::path::Path;

use scanverif_core::corpus::corpus_files;

/// The checked-in corpus directory is exactly what the generator writes.
#[test]
fn checked_in_corpus_is_current() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut on_disk: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    on_disk.sort();
    let mut expected: Vec<String> = corpus_files().into_iter().map(|(n, _)| n).collect();
    expected.sort();
    assert_eq!(on_disk, expected, "regenerate with `scanverif gen corpus`");
    for (name, text) in corpus_files() {
        let actual = std::fs::read_to_string(dir.join(&name)).unwrap();
        assert!(actual == text, "{name} differs from the generator; regenerate with `scanverif gen corpus`");
    }
}
