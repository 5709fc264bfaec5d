//! Timing harness comparing the engines on one workload.
//!
//! Run times are medians over repetitions of wall-clock time measured with a
//! monotonic clock, against an already loaded store. Lookup counts are those of
//! the last repetition.

use std::fmt;
use std::time::{Duration, Instant};

use crate::automaton::{build_automaton_with, run_automaton, DEFAULT_STATE_CAP};
use crate::ir::Program;
use crate::store::FactStore;
use crate::{earley, seminaive, Error, Result};

#[derive(Clone, Debug)]
pub struct BenchOptions {
    pub repetitions: usize,
    pub state_cap: usize,
    /// Tuple budget for the bottom-up engine; its row is reported as over
    /// budget instead of failing the whole run.
    pub seminaive_max_tuples: Option<u64>,
    pub earley_budget: Option<u64>,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            repetitions: 5,
            state_cap: DEFAULT_STATE_CAP,
            seminaive_max_tuples: None,
            earley_budget: earley::Options::default().budget,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub run_ms: f64,
    pub answers: usize,
    pub lookups: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub engine: &'static str,
    pub compile_ms: Option<f64>,
    /// `None` when the engine hit its budget.
    pub result: Option<Measurement>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

pub fn median(samples: &mut [Duration]) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_unstable();
    let n = samples.len();
    let ms = |d: Duration| d.as_secs_f64() * 1000.0;
    if n % 2 == 1 {
        ms(samples[n / 2])
    } else {
        (ms(samples[n / 2 - 1]) + ms(samples[n / 2])) / 2.0
    }
}

fn measure<F>(store: &FactStore, reps: usize, mut run: F) -> Result<Option<Measurement>>
where
    F: FnMut() -> Result<usize>,
{
    let mut times = Vec::with_capacity(reps);
    let mut answers = 0;
    for _ in 0..reps.max(1) {
        store.reset_counters();
        let start = Instant::now();
        match run() {
            Ok(n) => answers = n,
            Err(e) if e.is_limit() => return Ok(None),
            Err(e) => return Err(e),
        }
        times.push(start.elapsed());
    }
    Ok(Some(Measurement {
        run_ms: median(&mut times),
        answers,
        lookups: store.total_lookups(),
    }))
}

/// Time the oracle, the interpreter, and the compiled automaton.
pub fn bench(p: &Program, store: &FactStore, opts: &BenchOptions) -> Result<BenchTable> {
    let reps = opts.repetitions.max(1);
    let sn_opts = seminaive::Options {
        max_tuples: opts.seminaive_max_tuples,
    };
    let seminaive = measure(store, reps, || {
        seminaive::answer_query_with(p, store, &sn_opts).map(|a| a.len())
    })?;
    let e_opts = earley::Options {
        budget: opts.earley_budget,
    };
    let earley = measure(store, reps, || {
        earley::run(p, store, &e_opts, None).map(|(a, _)| a.len())
    })?;

    let mut compile_times = Vec::with_capacity(reps);
    let mut automaton = None;
    for _ in 0..reps {
        let start = Instant::now();
        automaton = Some(build_automaton_with(p, opts.state_cap)?);
        compile_times.push(start.elapsed());
    }
    let a = automaton.ok_or(Error::BudgetExceeded { budget: 0 })?;
    let qc = p.query_constants();
    let compiled = measure(store, reps, || run_automaton(&a, store, &qc).map(|a| a.len()))?;

    Ok(BenchTable {
        rows: vec![
            BenchRow {
                engine: "seminaive",
                compile_ms: None,
                result: seminaive,
            },
            BenchRow {
                engine: "earley",
                compile_ms: None,
                result: earley,
            },
            BenchRow {
                engine: "automaton",
                compile_ms: Some(median(&mut compile_times)),
                result: compiled,
            },
        ],
    })
}

impl BenchTable {
    pub fn row(&self, engine: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.engine == engine)
    }

    fn cells(&self) -> Vec<[String; 5]> {
        self.rows
            .iter()
            .map(|r| {
                let compile = r.compile_ms.map_or("-".to_owned(), |c| format!("{c:.3}"));
                match &r.result {
                    Some(m) => [
                        r.engine.to_owned(),
                        compile,
                        format!("{:.3}", m.run_ms),
                        m.answers.to_string(),
                        m.lookups.to_string(),
                    ],
                    None => [
                        r.engine.to_owned(),
                        compile,
                        "over-budget".to_owned(),
                        "-".to_owned(),
                        "-".to_owned(),
                    ],
                }
            })
            .collect()
    }

    /// Machine-readable form; missing values are empty fields.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("engine,compile_ms,run_ms,answers,lookups\n");
        for c in self.cells() {
            let fields: Vec<&str> = c
                .iter()
                .map(|s| {
                    if s == "-" || s == "over-budget" {
                        ""
                    } else {
                        s.as_str()
                    }
                })
                .collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for BenchTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let header = ["engine", "compile_ms", "run_ms", "answers", "lookups"].map(String::from);
        let cells = self.cells();
        let mut widths = header.clone().map(|h| h.len());
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        for row in std::iter::once(&header).chain(&cells) {
            let line: Vec<String> = row
                .iter()
                .zip(widths)
                .enumerate()
                .map(|(i, (c, w))| {
                    if i == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            writeln!(f, "{}", line.join("  "))?;
        }
        Ok(())
    }
}
