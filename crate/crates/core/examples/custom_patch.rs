//! Describe a patch in TOML and run a command on it through the same entry
//! point the `finsler` binary uses.
//!
//! ```text
//! cargo run --example custom_patch -- [output-dir]
//! ```

use quartic_finsler::config::PatchConfig;
use quartic_finsler::run::{run_command, Command, RunManifest};

const PATCH: &str = r#"
name = "tilted-bowl"
dim = 2
domain = [[-4.0, 4.0], [-4.0, 4.0]]
a = ["1 + 0.1*x1^2", "0.05", "0.05", "1 + 0.1*x2^2"]
b = ["0.1*x1", "0.1*x2"]
"#;

fn main() -> quartic_finsler::Result<()> {
    let config = PatchConfig::from_toml(PATCH)?;
    let patch = config.build()?;
    println!("built `{}` on {:?}", patch.name(), patch.domain());

    let out = std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("custom_patch").display().to_string());
    for command in [Command::CheckReversible, Command::CheckFlat] {
        let outcome = run_command(&RunManifest { seed: 11, ..RunManifest::new(command, Some(config.clone()), &out) })?;
        println!("{}: pass = {}", command.name(), outcome.pass);
        for path in outcome.artifacts {
            println!("  wrote {}", path.display());
        }
    }
    Ok(())
}
