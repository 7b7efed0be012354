//! Shared inputs for the benchmarks.

use recur::kernel::{Labmove, Run};
use recur::{parse_proof, Proof};

pub const CORPUS: [&str; 5] = [
    "p_implies_p",
    "bang_implies_bang",
    "p_implies_p_or_q",
    "and_commutes",
    "bang_duplicates",
];

pub fn corpus_proof(name: &str) -> Proof {
    let path = format!("{}/../../corpus/{name}.clp", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_proof(&text).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// A run of `n` moves spread over threads named by short bit strings.
pub fn thread_run(n: usize) -> Run {
    let mut r = Run::new();
    for k in 0..n {
        let w: String = format!("{:b}", k % 16);
        let mv = format!("{w}.{}", k % 7);
        r.push(if k % 2 == 0 {
            Labmove::bot(mv)
        } else {
            Labmove::top(mv)
        });
    }
    r
}
