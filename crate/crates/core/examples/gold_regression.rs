//! Regenerates fixtures/regression/gold_signatures.json from large gold runs.
//! Usage: cargo run --release --example gold_regression [samples]

#[path = "../tests/common/signatures.rs"]
mod signatures;

use std::collections::BTreeMap;

use msa_core::olympics::Sport;
use signatures::*;

fn main() {
    let n: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(100_000);
    let mut out: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>> = BTreeMap::new();
    for sport in [Sport::TugOfWar, Sport::Biathlon] {
        for motif in SIGNATURE_MOTIFS {
            let est = run_probes(sport, motif, n, 0xB16);
            eprintln!("{sport} {motif} acceptance {:.3}", est.acceptance_rate());
            out.entry(sport.to_string()).or_default().insert(motif.to_string(), means(&est));
        }
    }
    println!("{}", serde_json::to_string_pretty(&serde_json::json!({"samples": n, "seed": 0xB16, "means": out})).unwrap());
}
