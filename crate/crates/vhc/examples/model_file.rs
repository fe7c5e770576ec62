//! Load a model file and print what was parsed.
//!
//!     cargo run --example model_file -- crates/vhc/models/particle3.toml

use vhc::analysis::{classify, ClassifyOptions, VirtualPair};
use vhc::model::Model;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/models/example3.toml").into());
    let model = match Model::from_path(path.as_ref()) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(2);
        }
    };
    println!("{}", serde_json::to_string_pretty(&model).unwrap());
    let rd = model.reduced().unwrap();
    let vp = VirtualPair::with_defaults(&rd).unwrap();
    println!("kind: {}", classify(&vp, &ClassifyOptions::default()).kind.as_str());
}
