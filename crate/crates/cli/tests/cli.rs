use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const ANCESTOR: &str = ".edb par/2.\nanc(X,Y) :- par(X,Y).\nanc(X,Y) :- anc(X,Z), par(Z,Y).\n?- anc(a,Y).\n";

const SAME_GEN: &str = ".edb par/2.\n.edb flat/2.\nsg(X,Y) :- flat(X,Y).\nsg(X,Y) :- par(X,XP), sg(XP,YP), par(Y,YP).\n?- sg(a,Y).\n";

struct Dir(tempfile::TempDir);

impl Dir {
    fn new() -> Dir {
        Dir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let path = self.0.path().join(name);
        fs::write(&path, text).unwrap();
        path
    }

    fn ancestor(&self) -> (PathBuf, PathBuf) {
        (self.file("anc.dl", ANCESTOR), self.file("par.csv", "a,b\nb,c\n"))
    }
}

fn edl(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edl"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn eval_each_engine_prints_sorted_answers() {
    let d = Dir::new();
    let (p, facts) = d.ancestor();
    for engine in ["seminaive", "earley", "automaton"] {
        let o = edl(&[&"eval", &"--engine", &engine, &p, &"--facts", &facts]);
        assert_eq!(o.status.code(), Some(0), "{engine}: {}", stderr(&o));
        assert_eq!(stdout(&o), "b\nc\n", "{engine}");
    }
}

#[test]
fn eval_boolean_query_prints_unit() {
    let d = Dir::new();
    let p = d.file(
        "q.dl",
        ".edb par/2.\nanc(X,Y) :- par(X,Y).\nanc(X,Y) :- anc(X,Z), par(Z,Y).\n?- anc(a,c).\n",
    );
    let facts = d.file("par.csv", "a,b\nb,c\n");
    let o = edl(&[&"eval", &"--engine", &"automaton", &p, &"--facts", &facts]);
    assert_eq!(stdout(&o), "()\n");
}

#[test]
fn query_constant_override() {
    let d = Dir::new();
    let (p, facts) = d.ancestor();
    let o = edl(&[&"eval", &"--const", &"b", &p, &"--facts", &facts]);
    assert_eq!(stdout(&o), "c\n");
    let o = edl(&[
        &"eval", &"--const", &"b", &"--const", &"c", &p, &"--facts", &facts,
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn syntax_error_names_line_and_column() {
    let d = Dir::new();
    let p = d.file("bad.dl", ".edb par/2.\nanc(X,Y :- par(X,Y).\n");
    let o = edl(&[&"eval", &p]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("line 2") && err.contains("column"), "{err}");
    assert!(stdout(&o).is_empty());
}

#[test]
fn missing_and_invalid_inputs_exit_1() {
    let d = Dir::new();
    let o = edl(&[&"eval", &d.0.path().join("nope.dl")]);
    assert_eq!(o.status.code(), Some(1));
    let unsafe_rule = d.file("u.dl", ".edb e/1.\np(X,Y) :- e(X).\n?- p(X,Y).\n");
    let o = edl(&[&"eval", &unsafe_rule]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn compile_rewritten_and_dump() {
    let d = Dir::new();
    let (p, _) = d.ancestor();
    let o = edl(&[&"compile", &p, &"--format", &"rewritten"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("s0(") && text.contains("ans_anc_bf"), "{text}");
    assert!(earley_datalog::parse_program(&text).is_ok());

    let a = edl(&[&"compile", &p, &"--format", &"dump"]);
    let b = edl(&[&"compile", &p]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("automaton v1\n"));
}

#[test]
fn state_cap_exceeded_exits_3() {
    let d = Dir::new();
    let (p, facts) = d.ancestor();
    let o = edl(&[&"compile", &p, &"--state-cap", &"1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("state cap"), "{}", stderr(&o));
    let o = edl(&[
        &"eval",
        &"--engine",
        &"automaton",
        &p,
        &"--facts",
        &facts,
        &"--state-cap",
        &"1",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn check_agreement_on_p1_and_sg() {
    let d = Dir::new();
    let (p, facts) = d.ancestor();
    let o = edl(&[&"check", &p, &facts]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "OK: 4 engines agree (2 answers)\n");

    let sg = d.file("sg.dl", SAME_GEN);
    let par = d.file("par.csv", "a,p\nb,q\n");
    let flat = d.file("flat.csv", "p,q\n");
    let o = edl(&[&"check", &sg, &par, &"--facts", &flat]);
    assert_eq!(stdout(&o), "OK: 4 engines agree (1 answers)\n");
}

#[test]
fn broken_engine_is_reported() {
    let d = Dir::new();
    let (p, facts) = d.ancestor();
    let o = edl(&[&"check", &p, &facts, &"--sabotage", &"automaton"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.starts_with("MISMATCH"), "{text}");
    assert!(text.contains("seminaive vs automaton:\n  < b\n"), "{text}");
}

#[test]
fn bench_table_and_csv() {
    let d = Dir::new();
    let p = d.file("anc.dl", ANCESTOR);
    let chain: String = std::iter::once("a,0\n".to_owned())
        .chain((0..200).map(|i| format!("{i},{}\n", i + 1)))
        .collect();
    let facts = d.file("par.csv", &chain);
    let o = edl(&[&"bench", &p, &facts, &"-r", &"3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    for (row, engine) in rows[1..].iter().zip(["seminaive", "earley", "automaton"]) {
        let cols: Vec<&str> = row.split_whitespace().collect();
        assert_eq!(cols[0], engine);
        assert_eq!(cols[3], "201");
    }

    let o = edl(&[&"bench", &p, &facts, &"-r", &"1", &"--csv"]);
    let text = stdout(&o);
    assert!(text.starts_with("engine,compile_ms,run_ms,answers,lookups\n"));
    assert_eq!(text.lines().count(), 4);
}

fn grammar_answers(d: &Dir, input: &str, engine: &str) -> String {
    let g = d.file("g.txt", "S -> a S b | .\n");
    let out = d.0.path().join(format!("rec-{input}"));
    let o = edl(&[&"from-grammar", &g, &input, &"-o", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let program = out.join("program.dl");
    let facts = out.join("facts.dl");
    assert!(Path::new(&program).exists() && Path::new(&facts).exists());
    let o = edl(&[&"eval", &"--engine", &engine, &program, &"--facts", &facts]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let c = edl(&[&"check", &program, &facts]);
    assert_eq!(c.status.code(), Some(0), "{}", stdout(&c));
    stdout(&o)
}

#[test]
fn grammar_recognizer() {
    let d = Dir::new();
    for engine in ["seminaive", "earley", "automaton"] {
        assert_eq!(grammar_answers(&d, "aabb", engine), "()\n");
        assert_eq!(grammar_answers(&d, "aab", engine), "");
        assert_eq!(grammar_answers(&d, "", engine), "()\n");
    }
}

#[test]
fn empty_grammar_is_an_input_error() {
    let d = Dir::new();
    let g = d.file("g.txt", "# nothing here\n");
    let o = edl(&[&"from-grammar", &g, &"ab"]);
    assert_eq!(o.status.code(), Some(1));
}
