//! Prints the default run configuration as JSON; a starting point for `qcds --config`.

use quanto_cds::cli::RunConfig;

fn main() {
    println!("{}", serde_json::to_string_pretty(&RunConfig::default()).unwrap());
}
