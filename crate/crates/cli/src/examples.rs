use std::collections::BTreeMap;

use hfx::effects::algebraic::{fail, get, h_nd, h_state, or, put, Monoid};
use hfx::effects::bracket::{bracket_example, h_bracket, SimWorld};
use hfx::effects::latent::{empty_store, h_eager, h_lazy, prog_lazy};
use hfx::effects::parallel::{accum_for_example, h_accum};
use hfx::effects::scoped::{h_once, once_example};
use hfx::effects::writer::{
    censor_pass_example, censor_scoped_example, h_censor, h_write, reset_example,
};
use hfx::exc::{h_exc, prog_exc};
use hfx::{run, Comp, Result, Value};

pub type Files = BTreeMap<String, String>;

pub enum Runner {
    Pure(fn() -> Result<String>),
    /// Needs a simulated filesystem.
    Io(fn(Files) -> Result<String>),
}

pub struct Example {
    pub name: &'static str,
    pub section: &'static str,
    pub golden: &'static str,
    pub runner: Runner,
}

impl Example {
    pub fn needs_fixture(&self) -> bool {
        matches!(self.runner, Runner::Io(_))
    }
}

fn line(v: Value) -> String {
    format!("{}\n", v.show())
}

fn int(v: &Value) -> Result<i64> {
    v.as_int()
}

fn state_basic() -> Result<String> {
    let prog = get().try_bind(|s| Ok(put(int(&s)? + 1).then(Comp::pure(s))));
    Ok(line(run(&h_state(&prog, 0)?)?))
}

fn state_incr() -> Result<String> {
    let prog = get().try_bind(|x| Ok(put(int(&x)? + 1).then(Comp::pure(5))));
    Ok(line(run(&h_state(&prog, 0)?)?))
}

fn nd_flat() -> Result<String> {
    let prog = or(Comp::pure(1), or(or(Comp::pure(2), Comp::pure(3)), fail()));
    Ok(line(run(&h_nd(&prog)?)?))
}

fn once_on() -> Result<String> {
    Ok(line(run(&h_once(&once_example(true))?)?))
}

fn once_off() -> Result<String> {
    Ok(line(run(&h_once(&once_example(false))?)?))
}

fn accum_for() -> Result<String> {
    // The example prints only the accumulated total.
    let out = run(&h_accum(
        &accum_for_example(&[1, 2, 10, 4]),
        &Monoid::sum(),
    )?)?;
    Ok(line(out.as_pair()?.0.clone()))
}

fn writer(h: fn(&Comp, &Monoid) -> Result<Comp>, m: Comp) -> Result<String> {
    Ok(line(run(&h(&m, &Monoid::text())?)?))
}

fn bracket(files: Files) -> Result<String> {
    let (world, _) = h_bracket(&bracket_example(), SimWorld::new(files))?;
    Ok(world.render())
}

pub fn registry() -> Vec<Example> {
    vec![
        Example {
            name: "state-basic",
            section: "§2.1",
            golden: include_str!("../golden/state-basic.txt"),
            runner: Runner::Pure(state_basic),
        },
        Example {
            name: "exc-pos",
            section: "§3",
            golden: include_str!("../golden/exc-pos.txt"),
            runner: Runner::Pure(|| Ok(line(h_exc(&prog_exc(5))?))),
        },
        Example {
            name: "exc-neg",
            section: "§3",
            golden: include_str!("../golden/exc-neg.txt"),
            runner: Runner::Pure(|| Ok(line(h_exc(&prog_exc(-5))?))),
        },
        Example {
            name: "state-incr",
            section: "§4.1",
            golden: include_str!("../golden/state-incr.txt"),
            runner: Runner::Pure(state_incr),
        },
        Example {
            name: "nd-flat",
            section: "§4.1",
            golden: include_str!("../golden/nd-flat.txt"),
            runner: Runner::Pure(nd_flat),
        },
        Example {
            name: "once",
            section: "§4.2",
            golden: include_str!("../golden/once.txt"),
            runner: Runner::Pure(once_on),
        },
        Example {
            name: "no-once",
            section: "§4.2",
            golden: include_str!("../golden/no-once.txt"),
            runner: Runner::Pure(once_off),
        },
        Example {
            name: "accum-for",
            section: "§4.3",
            golden: include_str!("../golden/accum-for.txt"),
            runner: Runner::Pure(accum_for),
        },
        Example {
            name: "write-reset",
            section: "§4.4",
            golden: include_str!("../golden/write-reset.txt"),
            runner: Runner::Pure(|| writer(h_write, reset_example())),
        },
        Example {
            name: "lazy",
            section: "§4.5",
            golden: include_str!("../golden/lazy.txt"),
            runner: Runner::Pure(|| {
                Ok(format!(
                    "{}\n",
                    h_lazy(&prog_lazy(), 0, vec![], empty_store())?
                ))
            }),
        },
        Example {
            name: "eager",
            section: "§4.5",
            golden: include_str!("../golden/eager.txt"),
            runner: Runner::Pure(|| {
                Ok(format!(
                    "{}\n",
                    h_eager(&prog_lazy(), 0, vec![], empty_store())?
                ))
            }),
        },
        Example {
            name: "bracket-ok",
            section: "§4.6",
            golden: include_str!("../golden/bracket-ok.txt"),
            runner: Runner::Io(bracket),
        },
        Example {
            name: "bracket-eof",
            section: "§4.6",
            golden: include_str!("../golden/bracket-eof.txt"),
            runner: Runner::Io(bracket),
        },
        Example {
            name: "censor-pass",
            section: "App. B",
            golden: include_str!("../golden/censor-pass.txt"),
            runner: Runner::Pure(|| writer(h_write, censor_pass_example())),
        },
        Example {
            name: "censor",
            section: "App. B",
            golden: include_str!("../golden/censor.txt"),
            runner: Runner::Pure(|| writer(h_censor, censor_scoped_example())),
        },
    ]
}

pub fn find(name: &str) -> Option<Example> {
    registry().into_iter().find(|e| e.name == name)
}

/// Line diff of expected against actual, `-` for golden and `+` for output.
pub fn diff(expected: &str, actual: &str) -> String {
    let (e, a): (Vec<_>, Vec<_>) = (expected.lines().collect(), actual.lines().collect());
    let mut out = String::new();
    for i in 0..e.len().max(a.len()) {
        match (e.get(i), a.get(i)) {
            (Some(x), Some(y)) if x == y => out.push_str(&format!("  {x}\n")),
            (x, y) => {
                if let Some(x) = x {
                    out.push_str(&format!("- {x}\n"));
                }
                if let Some(y) = y {
                    out.push_str(&format!("+ {y}\n"));
                }
            }
        }
    }
    if out.is_empty() || expected.ends_with('\n') != actual.ends_with('\n') {
        out.push_str("(trailing newline differs)\n");
    }
    out
}
