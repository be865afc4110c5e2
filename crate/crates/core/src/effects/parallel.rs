//! Parallel effects: `For` runs an ordered collection of inner
//! computations and hands the collected results to its continuation.
//!
//! Parallelism here is semantic. Branches cannot observe each other, so
//! evaluating them in order is indistinguishable from running them apart.

use std::any::Any;
use std::sync::Arc;

use super::algebraic::{forward_algebraic, project_alg, Accum, Alg, Monoid};
use crate::error::{Error, Result};
use crate::free::{
    project, separate, slot, Comp, Domain, Effect, Handler, Instance, KindInfo, Node, NodeView,
    Only, SlotRole,
};
use crate::value::{Cont, Fun, Tag, Value};

pub const KIND: &str = "for";

pub const INFO: KindInfo = KindInfo {
    kind: KIND,
    instance: Instance::Parallel,
    slots: &[
        slot("for", "iters", SlotRole::Inner, "list of computations"),
        slot(
            "for",
            "k",
            SlotRole::Continuation,
            "list, same length as iters",
        ),
    ],
};

/// `For :: ρ (f b) -> (ρ b -> a) -> K^Par ρ f a`, with `ρ` fixed to
/// ordered collections.
#[derive(Clone)]
pub struct For {
    pub iters: Vec<Value>,
    pub k: Cont,
}

impl Effect for For {
    fn kind(&self) -> &'static str {
        KIND
    }

    fn instance(&self) -> Instance {
        Instance::Parallel
    }

    fn map_continuation(&self, f: &Fun) -> Node {
        Arc::new(For {
            iters: self.iters.clone(),
            k: self.k.then(f),
        })
    }

    fn map_inner(&self, t: &Fun) -> Result<Node> {
        let iters = self
            .iters
            .iter()
            .map(|c| t.call(c.clone()))
            .collect::<Result<_>>()?;
        Ok(Arc::new(For {
            iters,
            k: self.k.clone(),
        }))
    }

    fn view(&self) -> NodeView {
        let n = self.iters.len();
        let mut v = NodeView::new(KIND, format!("for/{n}"));
        for c in &self.iters {
            v = v.value("iter", c.clone());
        }
        v.cont(self.k.clone(), Domain::ListOf(n, Tag::Int))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `for iters`: the continuation returns the collected results.
pub fn for_(iters: Vec<Comp>) -> Comp {
    for_with(iters, Comp::pure)
}

/// `For iters k` with an explicit continuation.
pub fn for_with(iters: Vec<Comp>, k: impl Fn(Value) -> Comp + Send + Sync + 'static) -> Comp {
    let k = super::algebraic::cont(KIND, "for.k", Tag::List, k);
    Comp::node(For {
        iters: iters.into_iter().map(Value::Comp).collect(),
        k,
    })
}

/// `sequence` for computations: runs them left to right and collects.
pub(crate) fn sequence(cs: Vec<Comp>) -> Comp {
    cs.into_iter()
        .rev()
        .fold(Comp::pure(Value::list([])), |acc, c| {
            c.try_bind(move |x| {
                Ok(acc.map(move |xs| {
                    let mut out = vec![x.clone()];
                    out.extend_from_slice(xs.as_list()?);
                    Ok(Value::list(out))
                }))
            })
        })
}

/// Parallel accumulation. The carrier is a computation over the remaining
/// algebraic signature of `(accumulated, value)`.
pub fn accum_handler(monoid: &Monoid) -> Handler {
    let m0 = monoid.clone();
    let unit = Fun::new(move |x| Ok(Value::Comp(Comp::pure(Value::pair(m0.empty(), x)))));
    let m1 = monoid.clone();
    let alg_accum = move |n: &Node| -> Result<Value> {
        let Accum { m, k } = project_alg::<Accum>(n).expect("separated on Accum").clone();
        let monoid = m1.clone();
        Ok(Value::Comp(k.apply(Value::Unit)?.as_comp()?.map(
            move |r| {
                let (acc, x) = r.as_pair()?;
                Ok(Value::pair(monoid.combine(&m, acc)?, x.clone()))
            },
        )))
    };
    let m2 = monoid.clone();
    let alg_par = move |n: &Node| -> Result<Value> {
        let For { iters, k } = project::<For>(n).expect("separated on For").clone();
        let iters = iters
            .iter()
            .map(|c| Ok(c.as_comp()?.clone()))
            .collect::<Result<Vec<_>>>()?;
        let monoid = m2.clone();
        Ok(Value::Comp(sequence(iters).try_bind(move |rs| {
            let (ms, xs): (Vec<Value>, Vec<Value>) = rs
                .as_list()?
                .iter()
                .map(|r| r.as_pair().map(|(m, x)| (m.clone(), x.clone())))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            let monoid = monoid.clone();
            let rest = k.apply(Value::list(xs))?.as_comp()?.clone();
            Ok(rest.map(move |r| {
                let (m, x) = r.as_pair()?;
                Ok(Value::pair(monoid.foldr(&ms, m.clone())?, x.clone()))
            }))
        })))
    };
    let fwd = |n: &Node| -> Result<Value> {
        match n.instance() {
            Instance::Algebraic => forward_algebraic(n),
            _ => Err(Error::unhandled(n.kind())),
        }
    };
    let rest = separate(Only::<For>::new(), alg_par, fwd);
    Handler::pointed(unit, separate(Only::<Alg<Accum>>::new(), alg_accum, rest))
}

pub fn h_accum(m: &Comp, monoid: &Monoid) -> Result<Comp> {
    Ok(accum_handler(monoid).fold(m)?.as_comp()?.clone())
}

/// `for (fmap (accum . Sum) xs)`
pub fn accum_for_example(xs: &[i64]) -> Comp {
    for_(xs.iter().map(|&x| super::algebraic::accum(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::algebraic::{accum, get, h_state, put};
    use crate::free::run;

    fn sum(m: &Comp) -> String {
        run(&h_accum(m, &Monoid::sum()).unwrap()).unwrap().show()
    }

    #[test]
    fn sums_branches() {
        assert_eq!(
            sum(&accum_for_example(&[1, 2, 10, 4])),
            "(17,[(),(),(),()])"
        );
    }

    #[test]
    fn empty_for_applies_continuation_to_empty() {
        assert_eq!(sum(&for_(vec![])), "(0,[])");
    }

    #[test]
    fn collects_values_in_order() {
        assert_eq!(sum(&for_(vec![Comp::pure(1), Comp::pure(2)])), "(0,[1,2])");
    }

    #[test]
    fn sequential_accumulation() {
        assert_eq!(sum(&accum(3).then(accum(4))), "(7,())");
        assert_eq!(sum(&Comp::pure("v")), "(0,\"v\")");
    }

    #[test]
    fn branch_log_precedes_continuation_log() {
        let m = for_(vec![
            accum("a").then(Comp::pure(1)),
            accum("b").then(Comp::pure(2)),
        ])
        .bind(|xs| accum("c").then(Comp::pure(xs)));
        let out = run(&h_accum(&m, &Monoid::text()).unwrap()).unwrap();
        assert_eq!(out.show(), "(\"abc\",[1,2])");
    }

    #[test]
    fn for_continuation_sees_list() {
        let m = for_with(vec![Comp::pure(5), Comp::pure(6)], |xs| {
            Comp::pure(xs.as_list().unwrap().len() as i64)
        });
        assert_eq!(sum(&m), "(0,2)");
    }

    #[test]
    fn forwards_state_through_branches_in_order() {
        let bump = |tag: i64| get().bind(move |s| put(s.as_int().unwrap() * 10 + tag));
        let m = for_(vec![bump(1), bump(2)]);
        let out = h_accum(&m, &Monoid::sum())
            .and_then(|c| h_state(&c, 0))
            .unwrap();
        assert_eq!(run(&out).unwrap().show(), "((0,[(),()]),12)");
    }

    #[test]
    fn unhandled_scoped_kind() {
        let m = crate::effects::scoped::once(&Comp::pure(1));
        assert_eq!(
            h_accum(&m, &Monoid::sum()).unwrap_err(),
            Error::unhandled("once")
        );
    }
}
