//! Per-module invariants as property tests over seeded generated programs.

use hfx::effects::algebraic::{accum, get, h_nd, h_state, nd_handler, put, tell, Monoid};
use hfx::effects::bracket::{brckt, h_bracket, h_get_c, open_f, prnt, IoMode, SimWorld, Status};
use hfx::effects::latent::{empty_store, force, h_eager, h_lazy, thunk};
use hfx::effects::parallel::{for_, for_with, h_accum};
use hfx::effects::scoped::{censor_scoped, h_once, once};
use hfx::effects::writer::{
    censor_scoped_example, h_censor, h_write, pass, reset_example, tell_str,
};
use hfx::laws::iso::FreeAlg;
use hfx::laws::Gen;
use hfx::{run, Comp, Fun, Value};
use proptest::prelude::*;

fn shown(r: hfx::Result<Value>) -> String {
    match r {
        Ok(v) => v.show(),
        Err(e) => format!("error: {e}"),
    }
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 96,
        ..ProptestConfig::default()
    }
}

fn words() -> impl Strategy<Value = Vec<&'static str>> {
    proptest::collection::vec(prop_oneof![Just("a"), Just("b"), Just("c")], 0..4)
}

fn tells(ws: &[&str]) -> Comp {
    ws.iter()
        .fold(Comp::pure(()), |acc, w| acc.then(tell_str(w)))
}

fn log_of(m: &Comp) -> String {
    let out = run(&h_write(m, &Monoid::text()).unwrap()).unwrap();
    out.as_pair().unwrap().1.as_str().unwrap().to_string()
}

proptest! {
    #![proptest_config(config())]

    // ------------------------------------------------------------ core

    #[test]
    fn inner_fold_agrees_with_fold_when_generator_is_unit(seed in any::<u64>()) {
        let (_, m) = Gen::new(seed).alg_choice(4);
        let h = nd_handler();
        let outer = shown(h.fold(&m).and_then(|c| run(c.as_comp()?)));
        let inner = shown(h.fold_inner(&m).and_then(|c| run(c.as_comp()?)));
        prop_assert_eq!(outer, inner);
    }

    // ------------------------------------------------------------ algebraic

    #[test]
    fn last_write_wins(seed in any::<u64>(), a in 0i64..4, b in 0i64..4) {
        let (_, m) = Gen::new(seed).alg_state(3);
        for s0 in 0..4 {
            let twice = put(a).then(put(b)).then(m.clone());
            let once = put(b).then(m.clone());
            prop_assert_eq!(
                shown(h_state(&twice, s0).and_then(|c| run(&c))),
                shown(h_state(&once, s0).and_then(|c| run(&c)))
            );
        }
    }

    #[test]
    fn nd_lists_leaves_depth_first(seed in any::<u64>()) {
        fn leaves(t: &FreeAlg<hfx::effects::algebraic::Choice>, out: &mut Vec<String>) {
            use hfx::effects::algebraic::Choice;
            match t {
                FreeAlg::Var(x) => out.push(x.show()),
                FreeAlg::Op(Choice::Fail) => {}
                FreeAlg::Op(Choice::Or(p, q)) => {
                    for k in [p, q] {
                        let next = k.apply(Value::Unit).unwrap();
                        leaves(next.downcast().unwrap(), out);
                    }
                }
            }
        }
        let (t, m) = Gen::new(seed).alg_choice(4);
        let mut want = Vec::new();
        leaves(&t, &mut want);
        let got = run(&h_nd(&m).unwrap()).unwrap();
        prop_assert_eq!(got.as_list().unwrap().len(), want.len());
        prop_assert_eq!(got.show(), format!("[{}]", want.join(",")));
    }

    #[test]
    fn forwarding_keeps_the_order_of_foreign_operations(
        ops in proptest::collection::vec((0u8..3, 0i64..4), 0..8)
    ) {
        // Reads and writes announce themselves through the writer, which
        // the state handler forwards.
        let mut skeleton = String::new();
        let mut m = Comp::pure(());
        for (op, n) in ops.iter().rev() {
            let rest = m;
            m = match op {
                0 => tell("g").then(get()).then(rest),
                1 => tell(format!("p{n}")).then(put(*n)).then(rest),
                _ => tell(format!("t{n}")).then(rest),
            };
        }
        for (op, n) in &ops {
            skeleton.push_str(&match op {
                0 => "g".to_string(),
                1 => format!("p{n}"),
                _ => format!("t{n}"),
            });
        }
        let handled = h_state(&m, 0).unwrap();
        let out = run(&h_write(&handled, &Monoid::text()).unwrap()).unwrap();
        prop_assert_eq!(out.as_pair().unwrap().1.as_str().unwrap(), skeleton.as_str());
    }

    // ------------------------------------------------------------ scoped

    #[test]
    fn once_handler_is_nd_without_once(seed in any::<u64>()) {
        let (_, m) = Gen::new(seed).alg_choice(4);
        prop_assert_eq!(
            shown(h_once(&m).and_then(|c| run(&c))),
            shown(h_nd(&m).and_then(|c| run(&c)))
        );
    }

    #[test]
    fn once_is_idempotent(seed in any::<u64>()) {
        let (_, m) = Gen::new(seed).alg_choice(3);
        prop_assert_eq!(
            shown(h_once(&once(&once(&m))).and_then(|c| run(&c))),
            shown(h_once(&once(&m)).and_then(|c| run(&c)))
        );
    }

    /// The censor algebra the golden output relies on discards the body's
    /// log, so under nesting only the outer modifier is visible.
    #[test]
    fn nested_censor_behaves_as_the_outer_one(ws in words(), after in words()) {
        let upper = Fun::new(|w| Ok(Value::str(w.as_str()?.to_uppercase())));
        let bang = Fun::new(|w| Ok(Value::str(format!("{}!", w.as_str()?))));
        let body = tells(&ws);
        let nested = censor_scoped(upper.clone(), &censor_scoped(bang, &body)).then(tells(&after));
        let outer = censor_scoped(upper, &body).then(tells(&after));
        let run_c = |m: &Comp| shown(h_censor(m, &Monoid::text()).and_then(|c| run(&c)));
        prop_assert_eq!(run_c(&nested), run_c(&outer));
    }

    // ------------------------------------------------------------ parallel

    #[test]
    fn branches_accumulate_like_a_sequential_thread(
        branches in proptest::collection::vec(words(), 0..4)
    ) {
        let progs: Vec<Comp> = branches
            .iter()
            .map(|ws| ws.iter().fold(Comp::pure(()), |acc, w| acc.then(accum(Value::str(w)))))
            .collect();
        let par = run(&h_accum(&for_(progs.clone()), &Monoid::text()).unwrap()).unwrap();
        let seq = progs.iter().fold(Comp::pure(()), |acc, p| acc.then(p.clone()));
        let seq = run(&h_accum(&seq, &Monoid::text()).unwrap()).unwrap();
        prop_assert_eq!(par.as_pair().unwrap().0.show(), seq.as_pair().unwrap().0.show());
        // Each branch on its own, then combined in order.
        let separately: String = progs
            .iter()
            .map(|p| run(&h_accum(p, &Monoid::text()).unwrap()).unwrap().as_pair().unwrap().0.as_str().unwrap().to_string())
            .collect();
        prop_assert_eq!(par.as_pair().unwrap().0.as_str().unwrap(), separately.as_str());
    }

    #[test]
    fn singleton_for_is_bind(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let m = accum(g.int()).then(Comp::pure(g.int()));
        let k = |xs: Value| accum(7).then(Comp::pure(xs));
        let lhs = for_with(vec![m.clone()], k);
        let rhs = m.bind(move |x| k(Value::list([x])));
        prop_assert_eq!(
            run(&h_accum(&lhs, &Monoid::sum()).unwrap()).unwrap().show(),
            run(&h_accum(&rhs, &Monoid::sum()).unwrap()).unwrap().show()
        );
    }

    #[test]
    fn for_collects_in_order(xs in proptest::collection::vec(0i64..100, 0..5)) {
        let m = for_(xs.iter().map(|&x| Comp::pure(x)).collect());
        let out = run(&h_accum(&m, &Monoid::sum()).unwrap()).unwrap();
        let want = format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        prop_assert_eq!(out.as_pair().unwrap().1.show(), want);
    }

    // ------------------------------------------------------------ writer

    #[test]
    fn tell_log_is_a_homomorphism(w1 in words(), w2 in words()) {
        let (m1, m2) = (tells(&w1), tells(&w2));
        prop_assert_eq!(log_of(&m1.then(m2.clone())), format!("{}{}", log_of(&m1), log_of(&m2)));
        prop_assert_eq!(log_of(&m1), w1.concat());
    }

    #[test]
    fn pass_with_identity_is_return(v in 0i64..10, before in words(), after in words()) {
        let id = Value::Func(Fun::identity());
        let with_pass = tells(&before).then(pass(&Comp::pure(Value::pair(v, id)))).bind({
            let after = after.clone();
            move |x| tells(&after).then(Comp::pure(x))
        });
        let plain = tells(&before).then(Comp::pure(v)).bind(move |x| tells(&after).then(Comp::pure(x)));
        prop_assert_eq!(
            run(&h_write(&with_pass, &Monoid::text()).unwrap()).unwrap().show(),
            run(&h_write(&plain, &Monoid::text()).unwrap()).unwrap().show()
        );
    }

    // ------------------------------------------------------------ latent

    #[test]
    fn unforced_thunks_leave_the_state_alone(bodies in proptest::collection::vec(0i64..50, 0..4)) {
        let m = bodies.iter().rev().fold(Comp::pure(0), |rest, &n| thunk(&put(n).then(Comp::pure(n))).then(rest));
        let out = h_lazy(&m, 7, vec![], empty_store()).unwrap();
        prop_assert_eq!(out.state.show(), "7");
        prop_assert_eq!(out.store.len(), bodies.len());
    }

    #[test]
    fn pointers_are_dense(n in 0usize..5) {
        fn make(i: usize, n: usize, ptrs: Vec<Value>) -> Comp {
            if i == n {
                return Comp::pure(Value::list(ptrs));
            }
            thunk(&Comp::pure(i as i64)).bind(move |p| {
                let mut ptrs = ptrs.clone();
                ptrs.push(p);
                make(i + 1, n, ptrs)
            })
        }
        let out = h_lazy(&make(0, n, vec![]), 0, vec![], empty_store()).unwrap();
        let want = format!("[{}]", (0..n).map(|i| i.to_string()).collect::<Vec<_>>().join(","));
        prop_assert_eq!(out.result.show(), want);
    }

    #[test]
    fn strategies_agree_on_effect_free_thunks(
        vals in proptest::collection::vec(0i64..9, 1..4),
        picks in proptest::collection::vec(0usize..4, 0..5),
    ) {
        let n = vals.len();
        let picks: Vec<usize> = picks.into_iter().map(|p| p % n).collect();
        let forces = picks.iter().rev().fold(Comp::pure(Value::list([])), |rest, &p| {
            force(p).bind(move |v| rest.map(move |vs| {
                let mut out = vec![v.clone()];
                out.extend_from_slice(vs.as_list()?);
                Ok(Value::list(out))
            }))
        });
        let m = vals.iter().rev().fold(forces, |rest, &v| thunk(&Comp::pure(v)).then(rest));
        let lazy = h_lazy(&m, 0, vec![], empty_store()).unwrap();
        let eager = h_eager(&m, 0, vec![], empty_store()).unwrap();
        prop_assert_eq!(lazy.result.show(), eager.result.show());
    }

    // ------------------------------------------------------------ bracket

    #[test]
    fn exceptions_surface_and_reads_advance(len in 0usize..5, reads in 0usize..6) {
        let contents: String = "wxyz!".chars().take(len).collect();
        let m = brckt(&open_f("f", IoMode::ReadMode).bind(move |h| {
            let body = (0..reads).rev().fold(Comp::pure(()), |rest, _| {
                h_get_c(h.clone()).bind(move |c| prnt(c.as_char().unwrap().to_string()).then(rest.clone()))
            });
            Comp::pure(Value::pair(Value::Comp(prnt("released")), Value::Comp(body)))
        }));
        let (w, out) = h_bracket(&m, SimWorld::new([("f".to_string(), contents.clone())])).unwrap();
        let printed: String = w.transcript.iter().filter(|l| *l != "released").cloned().collect();
        let want: String = contents.chars().take(reads).collect();
        prop_assert_eq!(printed, want);
        prop_assert_eq!(w.transcript.iter().filter(|l| *l == "released").count(), 1);
        let raised = reads > len;
        prop_assert_eq!(out.is_err(), raised);
        prop_assert_eq!(matches!(w.status, Status::Raised(_)), raised);
        if raised {
            prop_assert_eq!(out.unwrap_err(), "f hGetChar end of file");
        }
    }
}

#[test]
fn reset_and_scoped_censor_agree_on_the_worked_program() {
    let via_pass = run(&h_write(&reset_example(), &Monoid::text()).unwrap()).unwrap();
    let scoped = run(&h_censor(&censor_scoped_example(), &Monoid::text()).unwrap()).unwrap();
    assert_eq!(via_pass.show(), scoped.show());
    assert_eq!(via_pass.show(), "((),\"post\")");
}
