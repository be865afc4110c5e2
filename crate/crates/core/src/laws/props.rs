//! The suites. Each check gets a fresh seeded generator and returns a
//! witness string on failure.

use std::sync::Arc;

use rand::Rng;

use super::gen::{Gen, MAX_DEPTH};
use super::iso::*;
use super::tab::{tab_comp, tab_value, Tab};
use super::{Ctx, Mutation, Suite};
use crate::effects::algebraic::{apply_carrier, nd_handler, state_handler, Choice, Monoid, State};
use crate::effects::algebraic::{h_nd, h_state};
use crate::effects::bracket::{brckt, h_bracket, h_get_c, open_f, prnt, IoMode, SimWorld};
use crate::effects::latent::{empty_store, force, h_eager, h_lazy, thunk};
use crate::effects::parallel::accum_handler;
use crate::effects::scoped::once_handler;
use crate::effects::writer::{flipped_writer_handler, tell_str, writer_handler};
use crate::error::Error;
use crate::exc::h_exc;
use crate::free::{
    case_split, run, Algebra, Comp, CoproductNode, Either, Handler, Instance, Kinds, Node, Side,
    Summand,
};
use crate::value::{Fun, Opaque, Value};

type Check = Result<(), String>;

pub fn all() -> Vec<Suite> {
    let s = |name, criterion, cases, check| Suite {
        name,
        criterion,
        cases,
        check,
    };
    vec![
        s("roundtrip-alg", 2, 1000, roundtrip_alg),
        s("roundtrip-sc", 2, 1000, roundtrip_sc),
        s("roundtrip-par", 2, 1000, roundtrip_par),
        s("roundtrip-write", 2, 1000, roundtrip_write),
        s("roundtrip-lat", 2, 1000, roundtrip_lat),
        s("roundtrip-res", 2, 1000, roundtrip_res),
        s("equiv-alg", 3, 500, equiv_alg),
        s("equiv-sc", 3, 500, equiv_sc),
        s("equiv-par", 3, 500, equiv_par),
        s("monad-laws", 4, 300, monad_laws),
        s("algebraicity", 4, 300, algebraicity),
        s("hfunctor", 4, 308, hfunctor),
        s("coproduct", 4, 300, coproduct),
        s("release-once", 5, 300, release_once),
        s("memoization", 5, 200, memoization),
        s("nd-oracle", 5, 300, nd_oracle),
        s("writer-homomorphism", 5, 300, writer_homomorphism),
    ]
}

fn ok<T>(r: crate::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn same(what: &str, a: &Tab, b: &Tab) -> Check {
    match a.first_mismatch(b) {
        None => Ok(()),
        Some(m) => Err(format!("{what}: {m}")),
    }
}

fn eq(what: &str, a: &str, b: &str) -> Check {
    if a == b {
        Ok(())
    } else {
        Err(format!("{what}: {a} vs {b}"))
    }
}

fn tab_of(x: impl Opaque) -> Tab {
    tab_value(&Value::opaque(x))
}

fn algebra(h: &Handler) -> Algebra {
    let h = h.clone();
    Arc::new(move |n| h.apply_algebra(n))
}

fn shown(r: crate::Result<Value>) -> String {
    match r {
        Ok(v) => v.show(),
        Err(e) => format!("error: {e}"),
    }
}

// ---------------------------------------------------------------- roundtrips

fn roundtrip_alg(g: &mut Gen, ctx: &Ctx) -> Check {
    fn check<S: LawSig>(t: FreeAlg<S>, c: Comp, m: Mutation) -> Check {
        let (tt, tc) = (tab_of(t.clone()), tab_comp(&c));
        same(
            "iso1 of the generated tree",
            &tab_comp(&iso1_alg(&t, m)),
            &tc,
        )?;
        same(
            "iso2 . iso1",
            &tab_of(ok(iso2_alg::<S>(&iso1_alg(&t, m)))?),
            &tt,
        )?;
        same(
            "iso1 . iso2",
            &tab_comp(&iso1_alg(&ok(iso2_alg::<S>(&c))?, m)),
            &tc,
        )
    }
    if ctx.case.is_multiple_of(2) {
        let (t, c) = g.alg_state(MAX_DEPTH);
        check::<State>(t, c, ctx.mutation)
    } else {
        let (t, c) = g.alg_choice(MAX_DEPTH);
        check::<Choice>(t, c, ctx.mutation)
    }
}

fn roundtrip_sc(g: &mut Gen, _: &Ctx) -> Check {
    let (t, c) = g.sc(MAX_DEPTH, true, &mut Gen::ints);
    let (tt, tc) = (tab_of(t.clone()), tab_comp(&c));
    same(
        "iso1 of the generated tree",
        &tab_comp(&ok(iso1_sc(&t))?),
        &tc,
    )?;
    same(
        "iso2 . iso1",
        &tab_of(ok(iso1_sc(&t).and_then(|c| iso2_sc(&c)))?),
        &tt,
    )?;
    same(
        "iso1 . iso2",
        &tab_comp(&ok(iso2_sc(&c).and_then(|t| iso1_sc(&t)))?),
        &tc,
    )
}

fn roundtrip_par(g: &mut Gen, ctx: &Ctx) -> Check {
    let m = ctx.mutation;
    let (t, c) = g.par(MAX_DEPTH, &mut Gen::ints);
    let (tt, tc) = (tab_of(t.clone()), tab_comp(&c));
    same("iso1 of the generated tree", &tab_comp(&iso1_par(&t)), &tc)?;
    same("iso2 . iso1", &tab_of(ok(iso2_par(&iso1_par(&t), m))?), &tt)?;
    same(
        "iso1 . iso2",
        &tab_comp(&iso1_par(&ok(iso2_par(&c, m))?)),
        &tc,
    )
}

fn roundtrip_write(g: &mut Gen, _: &Ctx) -> Check {
    let (t, c) = g.write(MAX_DEPTH, &mut Gen::ints);
    let (tt, tc) = (tab_of(t.clone()), tab_comp(&c));
    same(
        "iso1 of the generated tree",
        &tab_comp(&ok(iso1_write(&t))?),
        &tc,
    )?;
    same(
        "iso2 . iso1",
        &tab_of(ok(iso1_write(&t).and_then(|c| iso2_write(&c)))?),
        &tt,
    )?;
    same(
        "iso1 . iso2",
        &tab_comp(&ok(iso2_write(&c).and_then(|t| iso1_write(&t)))?),
        &tc,
    )
}

fn roundtrip_lat(g: &mut Gen, _: &Ctx) -> Check {
    let (t, c) = g.lat(MAX_DEPTH, &mut Gen::ints);
    let (tt, tc) = (tab_of(t.clone()), tab_comp(&c));
    same("iso1 of the generated tree", &tab_comp(&iso1_lat(&t)), &tc)?;
    same("iso2 . iso1", &tab_of(ok(iso2_lat(&iso1_lat(&t)))?), &tt)?;
    same("iso1 . iso2", &tab_comp(&iso1_lat(&ok(iso2_lat(&c))?)), &tc)
}

fn roundtrip_res(g: &mut Gen, _: &Ctx) -> Check {
    let (t, c) = g.res(MAX_DEPTH, &mut Gen::ints);
    let (tt, tc) = (tab_of(t.clone()), tab_comp(&c));
    same(
        "iso1 of the generated tree",
        &tab_comp(&ok(iso1_res(&t))?),
        &tc,
    )?;
    same(
        "iso2 . iso1",
        &tab_of(ok(iso1_res(&t).and_then(|c| iso2_res(&c)))?),
        &tt,
    )?;
    same(
        "iso1 . iso2",
        &tab_comp(&ok(iso2_res(&c).and_then(|t| iso1_res(&t)))?),
        &tc,
    )
}

// ---------------------------------------------------------------- equivalences

/// A state carrier observed at every state in the table domain.
fn observe_state(v: crate::Result<Value>) -> String {
    let Ok(f) = v else { return shown(v) };
    (0..4)
        .map(|s| shown(apply_carrier(f.clone(), Value::Int(s)).and_then(|c| run(c.as_comp()?))))
        .collect::<Vec<_>>()
        .join(";")
}

fn observe_comp(v: crate::Result<Value>) -> String {
    shown(v.and_then(|c| run(c.as_comp()?)))
}

fn equiv_alg(g: &mut Gen, ctx: &Ctx) -> Check {
    if ctx.case.is_multiple_of(2) {
        let (t, _) = g.alg_state(MAX_DEPTH);
        let h = state_handler();
        let lhs = observe_state(fold_alg_ref(h.generator(), &algebra(&h), &t));
        let rhs = observe_state(h.fold(&iso1_alg(&t, ctx.mutation)));
        eq("state: fold_Alg vs h_State . iso1", &lhs, &rhs)
    } else {
        let (t, _) = g.alg_choice(MAX_DEPTH);
        let h = nd_handler();
        let lhs = observe_comp(fold_alg_ref(h.generator(), &algebra(&h), &t));
        let rhs = observe_comp(h.fold(&iso1_alg(&t, ctx.mutation)));
        eq("choice: fold_Alg vs h_ND . iso1", &lhs, &rhs)
    }
}

/// A string carrier that records the scope structure.
fn fingerprint_sc() -> Handler {
    let unit = Fun::new(|x| Ok(Value::str(x.show())));
    Handler::pointed(unit, |n: &Node| {
        let g = Gamma::from_node(n).ok_or_else(|| Error::unhandled(n.kind()))?;
        Ok(Value::str(format!(
            "{}{{{}}}",
            n.view().label,
            g.body().as_str()?
        )))
    })
    .with_generator(Fun::new(|x| Ok(Value::str(format!("v{}", x.show())))))
}

fn equiv_sc(g: &mut Gen, ctx: &Ctx) -> Check {
    if ctx.case.is_multiple_of(2) {
        let (t, _) = g.sc(MAX_DEPTH, false, &mut Gen::ints);
        let h = once_handler();
        let lhs = observe_comp(fold_sc_ref(h.generator(), h.unit(), &algebra(&h), &t));
        let rhs = observe_comp(iso1_sc(&t).and_then(|c| h.fold(&c)));
        eq("once: fold_Sc vs h_Once . iso1", &lhs, &rhs)
    } else {
        let (t, _) = g.sc(MAX_DEPTH, true, &mut Gen::ints);
        let h = fingerprint_sc();
        let lhs = shown(fold_sc_ref(h.generator(), h.unit(), &algebra(&h), &t));
        let rhs = shown(iso1_sc(&t).and_then(|c| h.fold(&c)));
        eq("fingerprint: fold_Sc vs h_Sc . iso1", &lhs, &rhs)
    }
}

fn equiv_par(g: &mut Gen, _: &Ctx) -> Check {
    let (t, _) = g.par(MAX_DEPTH, &mut Gen::ints);
    let gen = Fun::new(|x| {
        Ok(Value::Comp(Comp::pure(Value::pair(
            Value::str(x.show()),
            x,
        ))))
    });
    let h = accum_handler(&Monoid::text()).with_generator(gen);
    let lhs = observe_comp(fold_par_ref(h.generator(), h.unit(), &algebra(&h), &t));
    let rhs = observe_comp(h.fold(&iso1_par(&t)));
    eq("accum: fold_Par vs h_Par . iso1", &lhs, &rhs)
}

// ---------------------------------------------------------------- kernel

fn monad_laws(g: &mut Gen, _: &Ctx) -> Check {
    type Observe = fn(&Comp) -> String;
    type Tree = fn(&mut Gen) -> Comp;
    let nd: Observe = |c| observe_comp(h_nd(c).map(Value::Comp));
    let state: Observe = |c| {
        (0..4)
            .map(|s| shown(h_state(c, s).and_then(|r| run(&r))))
            .collect::<Vec<_>>()
            .join(";")
    };
    let exc: Observe = |c| shown(h_exc(c));
    let gens: [(&str, Tree, Observe); 3] = [
        ("nd", |g| g.alg_choice(3).1, nd),
        ("state", |g| g.alg_state(3).1, state),
        ("exc", |g| g.exc(3), exc),
    ];
    for (name, tree, observe) in gens {
        let m = tree(g);
        let a = Value::Int(g.int());
        let f = g.kleisli(tree).f();
        let k = g.kleisli(tree).f();
        let f2 = f.clone();
        let k2 = k.clone();
        eq(
            &format!("{name}: left identity"),
            &observe(&Comp::pure(a.clone()).bind(f.clone())),
            &observe(&f(a)),
        )?;
        eq(
            &format!("{name}: right identity"),
            &observe(&m.bind(Comp::pure)),
            &observe(&m),
        )?;
        eq(
            &format!("{name}: associativity"),
            &observe(&m.bind(f).bind(k)),
            &observe(&m.bind(move |x| f2(x).bind(k2.clone()))),
        )?;
    }
    Ok(())
}

const ALGEBRAIC_KINDS: [&str; 6] = ["state", "choice", "accum", "tell", "reader", "teletype"];

fn algebraicity(g: &mut Gen, ctx: &Ctx) -> Check {
    let n = g.node_of(ALGEBRAIC_KINDS[ctx.case % ALGEBRAIC_KINDS.len()]);
    let k = g.kleisli(|g| g.alg_choice(2).1).f();
    let k2 = k.clone();
    let graft = Fun::new(move |c| Ok(Value::Comp(c.as_comp()?.bind(k2.clone()))));
    let lhs = Comp::from_node(n.clone()).bind(k);
    let rhs = Comp::from_node(n.map_continuation(&graft));
    same(
        &format!("{}: bind through the node", n.kind()),
        &tab_comp(&lhs),
        &tab_comp(&rhs),
    )
}

/// A natural transformation on computations: prefix a `tell`.
fn prefix(w: &'static str) -> Fun {
    Fun::new(move |c| Ok(Value::Comp(tell_str(w).then(c.as_comp()?.clone()))))
}

fn hfunctor(g: &mut Gen, ctx: &Ctx) -> Check {
    let kinds = crate::registry();
    let kind = kinds[ctx.case % kinds.len()].kind;
    let n = g.node_of(kind);
    let t = |n: &Node| tab_comp(&Comp::from_node(n.clone()));
    let inner = |r: crate::Result<Node>| r.map_err(|e| e.to_string());
    let (f, h) = (prefix("f"), prefix("g"));
    let id = Fun::identity();
    same(
        &format!("{kind}: map_continuation id"),
        &t(&n.map_continuation(&id)),
        &t(&n),
    )?;
    same(
        &format!("{kind}: map_continuation composition"),
        &t(&n.map_continuation(&h.then(&f))),
        &t(&n.map_continuation(&h).map_continuation(&f)),
    )?;
    same(
        &format!("{kind}: map_inner id"),
        &t(&inner(n.map_inner(&id))?),
        &t(&n),
    )?;
    same(
        &format!("{kind}: map_inner composition"),
        &t(&inner(n.map_inner(&h.then(&f)))?),
        &t(&inner(inner(n.map_inner(&h))?.map_inner(&f))?),
    )?;
    same(
        &format!("{kind}: map_inner commutes with map_continuation"),
        &t(&inner(n.map_continuation(&f).map_inner(&h))?),
        &t(&inner(n.map_inner(&h))?.map_continuation(&f)),
    )
}

fn coproduct(g: &mut Gen, _: &Ctx) -> Check {
    let registry = crate::registry();
    let info = registry[g.rng().gen_range(0..registry.len())];
    let n = g.node_of(info.kind);
    let mut pick = || -> Vec<&'static str> {
        registry
            .iter()
            .filter(|_| g.coin())
            .map(|i| i.kind)
            .collect()
    };
    let (left, other) = (pick(), pick());
    let expect = |b: bool| if b { Side::Left } else { Side::Right };

    let c = CoproductNode::classify(&Kinds(left.clone()), &n);
    if c.side != expect(left.contains(&info.kind)) {
        return Err(format!(
            "{}: classified {:?} against {left:?}",
            info.kind, c.side
        ));
    }
    if !Arc::ptr_eq(&c.inner, &n) {
        return Err("classify rebuilt the node".into());
    }
    let either = Either(Kinds(left.clone()), Kinds(other.clone()));
    if either.contains(&n) != (left.contains(&info.kind) || other.contains(&info.kind)) {
        return Err(format!(
            "{}: sum of summands disagrees with union",
            info.kind
        ));
    }
    if Instance::Scoped.contains(&n) != (info.instance == Instance::Scoped) {
        return Err(format!(
            "{}: instance summand disagrees with registry",
            info.kind
        ));
    }
    let split = case_split(
        |x: &Node| (Side::Left, x.clone()),
        |x: &Node| (Side::Right, x.clone()),
    );
    for side in [Side::Left, Side::Right] {
        let (got, inner) = split(&CoproductNode::inject(side, n.clone()));
        if got != side || !Arc::ptr_eq(&inner, &n) {
            return Err(format!(
                "{}: case split after inject {side:?} gave {got:?}",
                info.kind
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- semantics

enum Step {
    Print(String),
    Get,
    Bracket {
        id: usize,
        get_first: bool,
        body: Vec<Step>,
    },
}

fn steps(g: &mut Gen, d: usize, next: &mut usize) -> Vec<Step> {
    let len = g.rng().gen_range(1..=3);
    (0..len)
        .map(|_| match g.rng().gen_range(0..if d == 0 { 2 } else { 4 }) {
            0 => Step::Print(["p", "q"][g.rng().gen_range(0..2)].to_string()),
            1 => Step::Get,
            _ => {
                let id = *next;
                *next += 1;
                let get_first = g.rng().gen_bool(0.3);
                Step::Bracket {
                    id,
                    get_first,
                    body: steps(g, d - 1, next),
                }
            }
        })
        .collect()
}

fn build(steps: &[Step], h: Value) -> Comp {
    steps
        .iter()
        .rev()
        .fold(Comp::pure(()), |rest, step| match step {
            Step::Print(s) => prnt(s.as_str()).then(rest),
            Step::Get => h_get_c(h.clone()).then(rest),
            Step::Bracket {
                id,
                get_first,
                body,
            } => {
                let acquire = if *get_first {
                    h_get_c(h.clone()).then(Comp::pure(()))
                } else {
                    Comp::pure(())
                };
                let rel = prnt(format!("rel#{id}"));
                let use_ = build(body, h.clone());
                let res = acquire
                    .then(prnt(format!("acq#{id}")))
                    .then(Comp::pure(Value::pair(Value::Comp(rel), Value::Comp(use_))));
                brckt(&res).then(rest)
            }
        })
}

fn release_once(g: &mut Gen, _: &Ctx) -> Check {
    let mut next = 0;
    let program = Arc::new(steps(g, 3, &mut next));
    let len = g.rng().gen_range(0..5);
    let contents: String = (0..len)
        .map(|_| ['x', 'y'][g.rng().gen_range(0..2)])
        .collect();
    let p = program.clone();
    let m = open_f("f.txt", IoMode::ReadMode).bind(move |h| build(&p, h));
    let world = SimWorld::new([("f.txt".to_string(), contents.clone())]);
    let (w, _) = ok(h_bracket(&m, world))?;
    let mut open = Vec::new();
    let mut acquired = vec![0; next];
    let mut released = vec![0; next];
    for line in &w.transcript {
        if let Some(id) = line.strip_prefix("acq#") {
            let id: usize = id.parse().map_err(|_| format!("bad line {line}"))?;
            acquired[id] += 1;
            open.push(id);
        } else if let Some(id) = line.strip_prefix("rel#") {
            let id: usize = id.parse().map_err(|_| format!("bad line {line}"))?;
            released[id] += 1;
            if open.pop() != Some(id) {
                return Err(format!("release {id} out of order in {:?}", w.transcript));
            }
        }
    }
    for id in 0..next {
        if acquired[id] > 1 || released[id] != acquired[id] {
            return Err(format!(
                "bracket {id}: acquired {} released {} on {contents:?}: {:?}",
                acquired[id], released[id], w.transcript
            ));
        }
    }
    if !open.is_empty() {
        return Err(format!("never released {open:?}"));
    }
    Ok(())
}

fn memoization(g: &mut Gen, _: &Ctx) -> Check {
    let n = g.rng().gen_range(1..=3usize);
    let len = g.rng().gen_range(0..=6);
    let forces: Vec<usize> = (0..len).map(|_| g.rng().gen_range(0..n)).collect();

    // Thunk i adds 16^i to the state, so each hex digit counts one thunk's runs.
    fn body(i: usize) -> Comp {
        crate::effects::algebraic::get().bind(move |s| {
            let s = s.as_int().unwrap_or(0);
            crate::effects::algebraic::put(s + (1 << (4 * i))).then(Comp::pure(10 * i as i64 + 1))
        })
    }
    fn make(i: usize, n: usize, ptrs: Vec<usize>, forces: Arc<Vec<usize>>) -> Comp {
        if i == n {
            return forces
                .iter()
                .rev()
                .fold(Comp::pure(Value::list([])), |rest, &j| {
                    force(ptrs[j]).bind(move |v| {
                        rest.map(move |vs| {
                            let mut out = vec![v.clone()];
                            out.extend_from_slice(vs.as_list()?);
                            Ok(Value::list(out))
                        })
                    })
                });
        }
        thunk(&body(i)).bind(move |p| {
            let mut ptrs = ptrs.clone();
            ptrs.push(p.as_int().unwrap_or(-1) as usize);
            make(i + 1, n, ptrs, forces.clone())
        })
    }
    let m = make(0, n, Vec::new(), Arc::new(forces.clone()));
    let expected = format!(
        "[{}]",
        forces
            .iter()
            .map(|j| (10 * j + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    let digits = |s: &Value| -> Result<Vec<i64>, String> {
        let s = ok(s.as_int())?;
        Ok((0..n).map(|i| (s >> (4 * i)) & 15).collect())
    };

    let lazy = ok(h_lazy(&m, 0, vec![], empty_store()))?;
    eq("lazy results", &lazy.result.show(), &expected)?;
    for (i, count) in digits(&lazy.state)?.into_iter().enumerate() {
        let want = i64::from(forces.contains(&i));
        if count != want {
            return Err(format!(
                "lazy: thunk {i} ran {count} times, forced {forces:?}"
            ));
        }
    }
    let eager = ok(h_eager(&m, 0, vec![], empty_store()))?;
    eq("eager results", &eager.result.show(), &expected)?;
    if digits(&eager.state)?.iter().any(|&c| c != 1) {
        return Err(format!("eager: run counts {:?}", digits(&eager.state)?));
    }
    Ok(())
}

/// Depth-first leaves of a choice tree, straight from its structure.
fn dfs(t: &FreeAlg<Choice>, out: &mut Vec<String>) -> Check {
    match t {
        FreeAlg::Var(x) => out.push(x.show()),
        FreeAlg::Op(Choice::Fail) => {}
        FreeAlg::Op(Choice::Or(p, q)) => {
            for k in [p, q] {
                let next = ok(k.apply(Value::Unit))?;
                dfs(ok(next.downcast::<FreeAlg<Choice>>())?, out)?;
            }
        }
    }
    Ok(())
}

fn nd_oracle(g: &mut Gen, _: &Ctx) -> Check {
    let (t, c) = g.alg_choice(MAX_DEPTH);
    let mut leaves = Vec::new();
    dfs(&t, &mut leaves)?;
    let got = ok(h_nd(&c).and_then(|r| run(&r)))?;
    eq(
        "leaf count",
        &ok(got.as_list())?.len().to_string(),
        &leaves.len().to_string(),
    )?;
    eq(
        "leaf order",
        &got.show(),
        &format!("[{}]", leaves.join(",")),
    )
}

fn writer_homomorphism(g: &mut Gen, ctx: &Ctx) -> Check {
    let handler = if ctx.mutation == Mutation::FlipTell {
        flipped_writer_handler(&Monoid::text())
    } else {
        writer_handler(&Monoid::text())
    };
    let log = |m: &Comp| -> Result<String, String> {
        let out = ok(handler.fold(m).and_then(|c| run(c.as_comp()?)))?;
        ok(out
            .as_pair()
            .and_then(|(_, w)| w.as_str().map(str::to_string)))
    };
    let mut words = || -> Vec<&'static str> {
        let len = g.rng().gen_range(0..4);
        (0..len)
            .map(|_| ["a", "b", "c", "d"][g.rng().gen_range(0..4)])
            .collect()
    };
    let (w1, w2) = (words(), words());
    let prog = |ws: &[&str]| {
        ws.iter()
            .fold(Comp::pure(()), |acc, w| acc.then(tell_str(w)))
    };
    let (m1, m2) = (prog(&w1), prog(&w2));
    eq("log of a tell sequence", &log(&m1)?, &w1.concat())?;
    eq(
        "log (m1 >> m2) = log m1 <> log m2",
        &log(&m1.then(m2.clone()))?,
        &format!("{}{}", log(&m1)?, log(&m2)?),
    )
}
