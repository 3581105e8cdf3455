use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("nestline.h");
    fs::create_dir_all(header.parent().unwrap()).unwrap();
    // write_to_file leaves the file untouched when the content is unchanged
    cbindgen::generate(&crate_dir)
        .expect("cbindgen")
        .write_to_file(&header);
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
