use std::fs;
use std::path::PathBuf;

use recur::kernel::{is_legal, template, winner, Player};
use recur::machines::{random_legal_environment, simulate, SimConfig};
use recur::strategies::{synthesize, synthesize_cirquent};
use recur::{check_proof, parse_proof, GameExpr, Interpretation, Proof, Reading};

fn corpus() -> Vec<(String, Proof)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut out: Vec<(String, Proof)> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "clp"))
        .map(|p| {
            let text = fs::read_to_string(&p).unwrap();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                parse_proof(&text).unwrap(),
            )
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn interpretations() -> Vec<Interpretation> {
    ["balance", "sum3", "bot-parity", "capped:2"]
        .iter()
        .map(|t| {
            Interpretation::new().with("P", template(t).unwrap()).with(
                "Q",
                template(if *t == "sum3" { "balance" } else { "sum3" }).unwrap(),
            )
        })
        .collect()
}

#[test]
fn corpus_proofs_check() {
    let c = corpus();
    assert_eq!(c.len(), 5);
    for (name, p) in &c {
        assert_eq!(check_proof(p), Ok(()), "{name}");
    }
}

fn play(
    name: &str,
    game: &GameExpr,
    make: &dyn Fn() -> Box<dyn recur::machines::Machine>,
    seeds: u64,
    horizon: usize,
) {
    for itp in interpretations() {
        for seed in 0..seeds {
            let mut m = make();
            let mut env = random_legal_environment(seed, game, &itp);
            let sim = simulate(&mut *m, &mut env, &SimConfig::new(horizon)).unwrap();
            assert!(
                is_legal(game, &itp, &sim.run).unwrap(),
                "{name} seed {seed}: {}",
                sim.run
            );
            assert_eq!(
                winner(game, &itp, &sim.run).unwrap(),
                Player::Top,
                "{name} seed {seed}: {}",
                sim.run
            );
        }
    }
}

#[test]
fn synthesized_cirquent_machines_win() {
    for (name, p) in corpus() {
        let game = GameExpr::from_cirquent(p.conclusion().unwrap(), Reading::New);
        play(&name, &game, &|| synthesize_cirquent(&p).unwrap(), 20, 60);
    }
}

#[test]
fn synthesized_formula_machines_win() {
    for (name, p) in corpus() {
        let game = synthesize(&p).unwrap().game;
        play(&name, &game, &|| synthesize(&p).unwrap().machine, 20, 60);
    }
}
