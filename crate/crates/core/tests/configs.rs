use std::path::PathBuf;

use weyl_lab::cli_io::parse_config;

#[test]
fn shipped_configs_validate() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let v = parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            v.config.scenario().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
