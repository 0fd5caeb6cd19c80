//! Randomized consistency check of the four homogeneous pricers, as run by
//! `reopt selftest`.

use reopt::cli::{homogeneous_pricers, selftest, write_selftest, OutputFormat};

fn main() {
    let cases = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(1000);
    let report = selftest(cases, 0, &homogeneous_pricers());
    let code = write_selftest(&report, OutputFormat::Csv, &mut std::io::stdout()).unwrap();
    std::process::exit(code);
}
