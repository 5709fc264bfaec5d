mod common;

use common::random_case;
use earley_datalog::automaton::{build_automaton, emit_rewritten_program, run_automaton};
use earley_datalog::earley::earley_run;
use earley_datalog::print_program;
use earley_datalog::seminaive::answer_query;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_programs_agree_across_engines() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..2000 {
        let c = random_case(&mut rng);
        let p = &c.program;
        let oracle = answer_query(p, &c.store).unwrap();
        let ctx = || {
            let facts: Vec<String> = c.store.facts().map(|f| f.to_string()).collect();
            format!("case {i}\n{}facts: {}", print_program(p), facts.join(" "))
        };
        assert_eq!(earley_run(p, &c.store).unwrap(), oracle, "earley\n{}", ctx());
        let a = build_automaton(p).unwrap();
        let got = run_automaton(&a, &c.store, &p.query_constants()).unwrap();
        assert_eq!(got, oracle, "automaton\n{}\n{}", ctx(), a.dump());
        let rewritten = answer_query(&emit_rewritten_program(&a), &c.store).unwrap();
        assert_eq!(rewritten, got, "rewritten\n{}", ctx());
    }
}
