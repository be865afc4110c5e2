//! Executable law checks: isomorphisms between the generic free monad
//! and the six specialized ones, handler-equivalence theorems, kernel
//! laws and semantic properties, all over seeded generated trees.

pub mod gen;
pub mod iso;
pub mod props;
pub mod tab;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use serde::Serialize;

pub use gen::Gen;
pub use tab::{tab_comp, tab_value, Mismatch, Tab};

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Deliberate defects used to show that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    None,
    /// `iso₁` on `Or p q` builds `Or q p`.
    SwapOr,
    /// `iso₂` on `For` reverses the iterations.
    ReverseIters,
    /// `tell` combines the rest of the log before its own output.
    FlipTell,
}

impl Mutation {
    pub const ALL: [Mutation; 3] = [Mutation::SwapOr, Mutation::ReverseIters, Mutation::FlipTell];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::None => "none",
            Mutation::SwapOr => "swap-or",
            Mutation::ReverseIters => "reverse-iters",
            Mutation::FlipTell => "flip-tell",
        }
    }

    pub fn parse(s: &str) -> Option<Mutation> {
        [Mutation::None]
            .into_iter()
            .chain(Mutation::ALL)
            .find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub seed: u64,
    /// Overrides every suite's case count.
    pub n: Option<usize>,
    pub mutation: Mutation,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: DEFAULT_SEED,
            n: None,
            mutation: Mutation::None,
        }
    }
}

/// What a check sees besides its generator.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub case: usize,
    pub mutation: Mutation,
}

pub type Check = fn(&mut Gen, &Ctx) -> Result<(), String>;

#[derive(Clone, Copy)]
pub struct Suite {
    pub name: &'static str,
    pub criterion: u8,
    pub cases: usize,
    pub check: Check,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub criterion: u8,
    pub cases: usize,
    pub failures: usize,
    pub seed: u64,
    pub witness: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub seed: u64,
    pub n: Option<usize>,
    pub mutation: Mutation,
    pub suites: Vec<SuiteReport>,
    pub failures: usize,
    pub passed: bool,
}

impl Summary {
    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.name == name)
    }

    /// Reports for one acceptance criterion.
    pub fn criterion(&self, c: u8) -> impl Iterator<Item = &SuiteReport> {
        self.suites.iter().filter(move |s| s.criterion == c)
    }

    pub fn elapsed(&self) -> Duration {
        self.suites.iter().map(|s| s.elapsed).sum()
    }
}

fn suite_seed(seed: u64, name: &str) -> u64 {
    name.bytes().fold(seed ^ 0x9e37_79b9_7f4a_7c15, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Runs every case of one suite and keeps the first failure as witness.
pub fn run_suite(suite: &Suite, cfg: &Config) -> SuiteReport {
    let seed = suite_seed(cfg.seed, suite.name);
    let cases = cfg.n.unwrap_or(suite.cases);
    let start = Instant::now();
    let mut failures = 0;
    let mut witness = None;
    for case in 0..cases {
        let ctx = Ctx {
            case,
            mutation: cfg.mutation,
        };
        let mut g = Gen::new(seed.wrapping_add(case as u64));
        let outcome = catch_unwind(AssertUnwindSafe(|| (suite.check)(&mut g, &ctx)))
            .unwrap_or_else(|p| Err(format!("panic: {}", panic_text(&p))));
        if let Err(msg) = outcome {
            failures += 1;
            witness.get_or_insert_with(|| format!("case {case}: {msg}"));
        }
    }
    SuiteReport {
        name: suite.name,
        criterion: suite.criterion,
        cases,
        failures,
        seed,
        witness,
        elapsed: start.elapsed(),
    }
}

fn panic_text(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "non-text panic".into())
}

/// Runs the given suites on separate threads and reports in input order.
pub fn run_suites(suites: &[Suite], cfg: &Config) -> Summary {
    let reports: Vec<SuiteReport> = std::thread::scope(|s| {
        let handles: Vec<_> = suites
            .iter()
            .map(|suite| {
                std::thread::Builder::new()
                    .stack_size(64 << 20)
                    .spawn_scoped(s, move || run_suite(suite, cfg))
                    .expect("spawn suite thread")
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("suite thread"))
            .collect()
    });
    let failures = reports.iter().map(|r| r.failures).sum();
    Summary {
        seed: cfg.seed,
        n: cfg.n,
        mutation: cfg.mutation,
        suites: reports,
        failures,
        passed: failures == 0,
    }
}

pub fn run(cfg: &Config) -> Summary {
    run_suites(&props::all(), cfg)
}

/// Runs every suite once per documented mutation; each entry lists the
/// suites that caught it.
pub fn mutation_check(seed: u64, n: Option<usize>) -> Vec<(Mutation, Vec<&'static str>)> {
    Mutation::ALL
        .into_iter()
        .map(|mutation| {
            let cfg = Config { seed, n, mutation };
            let summary = run(&cfg);
            let caught = summary
                .suites
                .iter()
                .filter(|s| !s.passed())
                .map(|s| s.name)
                .collect();
            (mutation, caught)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutation_names_roundtrip() {
        for m in [Mutation::None].into_iter().chain(Mutation::ALL) {
            assert_eq!(Mutation::parse(m.name()), Some(m));
        }
        assert_eq!(Mutation::parse("bogus"), None);
    }

    #[test]
    fn small_run_is_deterministic() {
        let cfg = Config {
            n: Some(5),
            ..Config::default()
        };
        let a = serde_json::to_string(&run(&cfg)).unwrap();
        let b = serde_json::to_string(&run(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn panics_become_failures() {
        let suite = Suite {
            name: "boom",
            criterion: 0,
            cases: 2,
            check: |_, _| panic!("nope"),
        };
        let r = run_suite(&suite, &Config::default());
        assert_eq!(r.failures, 2);
        assert!(r.witness.unwrap().contains("nope"));
    }
}
