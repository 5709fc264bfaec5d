mod common;

use common::{ANCESTOR, SAME_GEN};
use earley_datalog::automaton::{build_automaton, emit_rewritten_program};
use earley_datalog::{parse_program, print_program};

const ANCESTOR_DUMP: &str = "\
automaton v1
rule r0: anc(X,Y) :- par(X,Y).
rule r1: anc(X,Y) :- anc(X,Z), par(Z,Y).
rule r2: goal(Y) :- anc(_Q0,Y).
init s0 [P0<-a]
goal ans_anc_bf[P0, V0]
state s0 params 1
  r0@0/bf {X=P0, Y=_} guards{}
  r1@0/bf {X=P0, Y=_, Z=_} guards{}
  r2@0/ {_Q0=P0, Y=_} guards{}
  scan s0 --par/bf[bound:P0]--> s1 assign[P0<-P0, P1<-F1] cmp[]
  complete s0 --ans_anc_bf[bound:P0]--> s2 assign[P0<-P0, P1<-F1] cmp[]
state s1 params 2
  r0@1/bf {X=P0, Y=P1} guards{}
  ans anc/bf from s1 proj[P0, P1]
state s2 params 2
  r1@1/bf {X=P0, Y=_, Z=P1} guards{}
  scan s2 --par/bf[bound:P1]--> s3 assign[P0<-P0, P1<-F1, P2<-P1] cmp[]
state s3 params 3
  r1@2/bf {X=P0, Y=P1, Z=P2} guards{}
  ans anc/bf from s3 proj[P0, P1]
";

const ANCESTOR_REWRITTEN: &str = "\
.edb par/2.
s0(a).
s1(X0,F1) :- s0(X0), par(X0,F1).
s3(X0,F1,X1) :- s2(X0,X1), par(X1,F1).
s2(X0,F1) :- s0(X0), ans_anc_bf(X0,F1).
ans_anc_bf(X0,X1) :- s1(X0,X1).
ans_anc_bf(X0,X1) :- s3(X0,X1,X2).
goal(V0) :- s0(X0), ans_anc_bf(X0,V0).
?- goal(V0).
";

#[test]
fn ancestor_dump() {
    let a = build_automaton(&parse_program(ANCESTOR).unwrap()).unwrap();
    assert_eq!(a.dump(), ANCESTOR_DUMP);
}

#[test]
fn ancestor_rewritten_program() {
    let a = build_automaton(&parse_program(ANCESTOR).unwrap()).unwrap();
    assert_eq!(print_program(&emit_rewritten_program(&a)), ANCESTOR_REWRITTEN);
}

#[test]
fn dumps_are_stable_across_builds() {
    for src in [ANCESTOR, SAME_GEN] {
        let p = parse_program(src).unwrap();
        let first = build_automaton(&p).unwrap().dump();
        for _ in 0..3 {
            assert_eq!(build_automaton(&p).unwrap().dump(), first);
        }
    }
}

#[test]
fn query_constant_only_changes_the_seed() {
    let a = build_automaton(&parse_program(ANCESTOR).unwrap()).unwrap();
    let b = build_automaton(&parse_program(&ANCESTOR.replace("anc(a,Y)", "anc(zz,Y)")).unwrap()).unwrap();
    let strip = |d: String| {
        d.lines()
            .filter(|l| !l.starts_with("init"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(a.dump()), strip(b.dump()));
}
