//! Writes the benchmark corpus as ASCII AIGER files.
//!
//! Usage: `cargo run -p aigchoice --example gen_corpus [-- <dir>]`

use std::path::PathBuf;

use aigchoice::aig::{write_aiger, AigNetwork};
use aigchoice::gen;

fn main() -> std::io::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "corpus".into()));
    std::fs::create_dir_all(&dir)?;
    let circuits: Vec<(&str, AigNetwork)> = vec![
        ("chain8", gen::and_chain(8)),
        ("chain16", gen::and_chain(16)),
        ("balanced16", gen::balanced_and(16)),
        ("adder4", gen::ripple_adder(4)),
        ("adder7", gen::ripple_adder(7)),
        ("mult3", gen::array_multiplier(3)),
        ("mult4", gen::array_multiplier(4)),
        ("mux4", gen::mux_tree(2)),
        ("mux8", gen::mux_tree(3)),
        ("cmp4", gen::comparator(4)),
        ("cmp8", gen::comparator(8)),
        ("parity8", gen::parity(8)),
        ("parity16", gen::parity(16)),
        ("maj5", gen::majority(5)),
        ("maj9", gen::majority(9)),
        ("dec3", gen::decoder(3)),
        ("dec4", gen::decoder(4)),
        ("prio8", gen::priority_encoder(8)),
        ("prio16", gen::priority_encoder(16)),
        ("rand12", gen::random_network(12, 150, 4, 1)),
        ("rand14", gen::random_network(14, 500, 8, 3)),
        ("rand16", gen::random_network(16, 300, 6, 2)),
        ("tree12", gen::random_tree(12, 5)),
        ("tree16", gen::random_tree(16, 6)),
        ("synth16", gen::synthetic(16, 800, 1)),
        ("synth32", gen::synthetic(32, 2000, 7)),
        ("empty", AigNetwork::new()),
    ];
    for (name, net) in circuits {
        let path = dir.join(format!("{name}.aag"));
        std::fs::write(&path, write_aiger(&net, true))?;
        println!("{}: {} inputs, {} ands, depth {}", path.display(), net.num_inputs(), net.and_count(), net.depth());
    }
    Ok(())
}
