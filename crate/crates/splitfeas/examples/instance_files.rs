//! The JSON instance format: write the built-in instances, reload one, and
//! drive a run through the same entry points the CLI uses.
//!
//! ```bash
//! cargo run -p splitfeas --example instance_files
//! ```

use splitfeas::driver::{self, RunOptions, Variant};
use splitfeas::instance::builtin_instances;
use splitfeas::{load_instance, save_instance};

fn main() {
    let dir = std::env::temp_dir().join("splitfeas_instances");
    std::fs::create_dir_all(&dir).unwrap();

    for (name, instance) in builtin_instances() {
        let path = dir.join(name);
        save_instance(&instance, &path).unwrap();
        println!("wrote {}", path.display());
    }

    let path = dir.join("linear_system.json");
    let instance = load_instance(&path).unwrap();
    println!(
        "\nreloaded `{}`:\n{}",
        instance.label,
        instance.to_json().unwrap()
    );

    let opts = RunOptions {
        variant: Variant::Extrapolated,
        residual_tol: 1e-9,
        ..RunOptions::default()
    };
    let summary = driver::run(&instance, &opts, None).unwrap();
    println!("{summary}");
}
