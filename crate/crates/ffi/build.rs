use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR");
    let header = PathBuf::from(env::var("OUT_DIR").expect("OUT_DIR")).join("spatnet.h");

    let config = cbindgen::Config {
        language: cbindgen::Language::C,
        cpp_compat: true,
        include_guard: Some("SPATNET_H".to_string()),
        documentation: true,
        header: Some("/* C interface for the spatnet sampling library. */".to_string()),
        enumeration: cbindgen::EnumConfig {
            // C has no enum namespaces; emit SPATNET_STATUS_OK and friends.
            rename_variants: cbindgen::RenameRule::QualifiedScreamingSnakeCase,
            ..cbindgen::EnumConfig::default()
        },
        ..cbindgen::Config::default()
    };

    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("cbindgen failed to generate the header")
        .write_to_file(&header);

    // Let tests locate the generated header.
    println!("cargo:rustc-env=SPATNET_HEADER={}", header.display());
    println!("cargo:rerun-if-changed=src/lib.rs");
}
