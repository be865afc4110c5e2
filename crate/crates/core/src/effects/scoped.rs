//! Scoped signatures: a node holds a scope body whose result is the
//! continuation, `γ (f a)`.
//!
//! Smart constructors store `fmap return body`, so the continuation of a
//! fresh scope is trivial; `bind` grafts into the body's results.

use std::any::Any;
use std::sync::Arc;

use super::algebraic::{append_lists, apply_carrier, cont, project_alg, Alg, Choice, Signature};
use crate::error::{Error, Result};
use crate::free::{
    map_comp_value, project, separate, slot, Comp, Domain, Effect, Handler, Instance, KindInfo,
    Node, NodeView, Only, SlotRole,
};
use crate::value::{Fun, Tag, Value};

/// A scoped signature functor with a single body slot.
pub trait ScopeSig: Clone + Send + Sync + 'static {
    const KIND: &'static str;

    fn body(&self) -> &Value;

    fn with_body(&self, body: Value) -> Self;

    fn label(&self) -> String;

    /// `fmap` of the signature functor.
    fn fmap_payload(&self, f: &Fun) -> Result<Self> {
        Ok(self.with_body(f.call(self.body().clone())?))
    }
}

/// `Enter :: γ (f a) -> K^Sc γ f a`.
#[derive(Clone)]
pub struct Scoped<G>(pub G);

impl<G: ScopeSig> Effect for Scoped<G> {
    fn kind(&self) -> &'static str {
        G::KIND
    }

    fn instance(&self) -> Instance {
        Instance::Scoped
    }

    fn map_continuation(&self, f: &Fun) -> Node {
        let body = map_comp_value(self.0.body(), f);
        Arc::new(Scoped(self.0.with_body(body)))
    }

    fn map_inner(&self, t: &Fun) -> Result<Node> {
        Ok(Arc::new(Scoped(self.0.fmap_payload(t)?)))
    }

    fn view(&self) -> NodeView {
        NodeView::new(G::KIND, self.0.label()).value("body", self.0.body().clone())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub fn project_scoped<G: ScopeSig>(n: &Node) -> Option<&G> {
    project::<Scoped<G>>(n).map(|s| &s.0)
}

fn enter<G: ScopeSig>(make: impl FnOnce(Value) -> G, body: &Comp) -> Comp {
    Comp::node(Scoped(make(Value::Comp(
        body.map(|v| Ok(Value::Comp(Comp::pure(v)))),
    ))))
}

pub const ONCE: &str = "once";
pub const READER: &str = "reader";
pub const LOCAL: &str = "local";
pub const CENSOR: &str = "censor";

pub const ONCE_INFO: KindInfo = KindInfo {
    kind: ONCE,
    instance: Instance::Scoped,
    slots: &[slot("once", "body", SlotRole::Inner, "computation")],
};

pub const READER_INFO: KindInfo = KindInfo {
    kind: READER,
    instance: Instance::Algebraic,
    slots: &[slot(
        "ask",
        "k",
        SlotRole::Continuation,
        "list (the environment)",
    )],
};

pub const LOCAL_INFO: KindInfo = KindInfo {
    kind: LOCAL,
    instance: Instance::Scoped,
    slots: &[
        slot("local", "env", SlotRole::Param, "list"),
        slot("local", "body", SlotRole::Inner, "computation"),
    ],
};

pub const CENSOR_INFO: KindInfo = KindInfo {
    kind: CENSOR,
    instance: Instance::Scoped,
    slots: &[
        slot("censor", "f", SlotRole::Param, "function w -> w"),
        slot("censor", "body", SlotRole::Inner, "computation"),
    ],
};

/// `data Once a = Once a`
#[derive(Clone)]
pub struct Once(pub Value);

impl ScopeSig for Once {
    const KIND: &'static str = ONCE;

    fn body(&self) -> &Value {
        &self.0
    }

    fn with_body(&self, body: Value) -> Self {
        Once(body)
    }

    fn label(&self) -> String {
        "once".into()
    }
}

/// `local env body`: the environment is replaced, not extended.
#[derive(Clone)]
pub struct Local {
    pub env: Value,
    pub body: Value,
}

impl ScopeSig for Local {
    const KIND: &'static str = LOCAL;

    fn body(&self) -> &Value {
        &self.body
    }

    fn with_body(&self, body: Value) -> Self {
        Local {
            env: self.env.clone(),
            body,
        }
    }

    fn label(&self) -> String {
        format!("local {}", self.env.show())
    }
}

/// `data Censor w a = Censor (w -> w) a`
#[derive(Clone)]
pub struct Censor {
    pub f: Fun,
    pub body: Value,
}

impl ScopeSig for Censor {
    const KIND: &'static str = CENSOR;

    fn body(&self) -> &Value {
        &self.body
    }

    fn with_body(&self, body: Value) -> Self {
        Censor {
            f: self.f.clone(),
            body,
        }
    }

    fn label(&self) -> String {
        "censor".into()
    }
}

/// The algebraic half of the reader: `Ask (env -> a)`.
#[derive(Clone)]
pub struct Ask(pub crate::value::Cont);

impl Signature for Ask {
    const KIND: &'static str = READER;

    fn fmap(&self, f: &Fun) -> Self {
        Ask(self.0.then(f))
    }

    fn view(&self) -> NodeView {
        NodeView::new(READER, "ask").cont(self.0.clone(), Domain::Of(Tag::List))
    }
}

pub fn once(body: &Comp) -> Comp {
    enter(Once, body)
}

pub fn ask() -> Comp {
    Comp::node(Alg(Ask(cont(READER, "ask.k", Tag::List, Comp::pure))))
}

pub fn local(env: Vec<Value>, body: &Comp) -> Comp {
    let env = Value::list(env);
    enter(|body| Local { env, body }, body)
}

pub fn censor_scoped(f: Fun, body: &Comp) -> Comp {
    enter(|body| Censor { f, body }, body)
}

/// `lift_Once = foldr (\x xs -> (++) <$> x <*> xs) (return [])`.
fn lift_once(list: &Value) -> Result<Comp> {
    list.as_list()?
        .iter()
        .rev()
        .try_fold(Comp::pure(Value::list([])), |acc, x| {
            Ok(append_lists(x.as_comp()?.clone(), acc))
        })
}

/// Nondeterminism with `once`, into the list of results.
pub fn once_handler() -> Handler {
    let unit = Fun::new(|x| Ok(Value::Comp(Comp::pure(Value::list([x])))));
    let alg_choice = |n: &Node| -> Result<Value> {
        Ok(Value::Comp(match project_alg::<Choice>(n) {
            Some(Choice::Fail) => Comp::pure(Value::list([])),
            Some(Choice::Or(p, q)) => append_lists(
                p.apply(Value::Unit)?.as_comp()?.clone(),
                q.apply(Value::Unit)?.as_comp()?.clone(),
            ),
            None => unreachable!(),
        }))
    };
    let alg_once = |n: &Node| -> Result<Value> {
        let y = project_scoped::<Once>(n)
            .expect("separated on Once")
            .0
            .as_comp()?;
        Ok(Value::Comp(y.try_bind(|results| {
            let results = results.as_list()?;
            let head = results.first().ok_or(Error::OnceEmptyScope)?;
            Ok(head.as_comp()?.clone())
        })))
    };
    let fwd = |n: &Node| -> Result<Value> {
        match n.instance() {
            Instance::Algebraic => Ok(Value::Comp(Comp::from_node(n.clone()))),
            Instance::Scoped => {
                let lift = Fun::new(|y| {
                    Ok(Value::Comp(
                        y.as_comp()?.try_bind(|l| Ok(Comp::pure(lift_once(&l)?))),
                    ))
                });
                Ok(Value::Comp(Comp::from_node(n.map_inner(&lift)?)))
            }
            _ => Err(Error::unhandled(n.kind())),
        }
    };
    let rest = separate(Only::<Scoped<Once>>::new(), alg_once, fwd);
    Handler::pointed(unit, separate(Only::<Alg<Choice>>::new(), alg_choice, rest))
}

pub fn h_once(m: &Comp) -> Result<Comp> {
    Ok(once_handler().fold(m)?.as_comp()?.clone())
}

/// Reader handler: the carrier is `env -> Free_H rest a`.
pub fn reader_handler() -> Handler {
    let unit = Fun::new(|x| Ok(Value::Func(Fun::constant(Value::Comp(Comp::pure(x))))));
    let alg_ask = |n: &Node| -> Result<Value> {
        let k = project_alg::<Ask>(n).expect("separated on Ask").0.clone();
        Ok(Value::Func(Fun::new(move |e| {
            apply_carrier(k.apply(e.clone())?, e)
        })))
    };
    let alg_local = |n: &Node| -> Result<Value> {
        let Local { env, body } = project_scoped::<Local>(n)
            .expect("separated on Local")
            .clone();
        Ok(Value::Func(Fun::new(move |outer| {
            let inner = apply_carrier(body.clone(), env.clone())?;
            Ok(Value::Comp(inner.as_comp()?.try_bind(move |c| {
                Ok(apply_carrier(c, outer.clone())?.as_comp()?.clone())
            })))
        })))
    };
    let fwd = |n: &Node| -> Result<Value> {
        let n = n.clone();
        match n.instance() {
            Instance::Algebraic => Ok(Value::Func(Fun::new(move |e| {
                let at = Fun::new(move |g| apply_carrier(g, e.clone()));
                Ok(Value::Comp(Comp::from_node(n.map_continuation(&at))))
            }))),
            Instance::Scoped => Ok(Value::Func(Fun::new(move |e| {
                let at = Fun::new(move |y| {
                    let e2 = e.clone();
                    let run = apply_carrier(y, e.clone())?;
                    Ok(Value::Comp(run.as_comp()?.try_bind(move |c| {
                        Ok(Comp::pure(apply_carrier(c, e2.clone())?))
                    })))
                });
                Ok(Value::Comp(Comp::from_node(n.map_inner(&at)?)))
            }))),
            _ => Err(Error::unhandled(n.kind())),
        }
    };
    let rest = separate(Only::<Scoped<Local>>::new(), alg_local, fwd);
    Handler::pointed(unit, separate(Only::<Alg<Ask>>::new(), alg_ask, rest))
}

pub fn h_reader(m: &Comp, env: Vec<Value>) -> Result<Comp> {
    let carrier = reader_handler().fold(m)?;
    Ok(apply_carrier(carrier, Value::list(env))?.as_comp()?.clone())
}

pub use super::writer::h_censor;

/// `once (or (return 1) (return 5)) >>= \x -> or (return x) (return (x+1))`,
/// with or without the `once`.
pub fn once_example(with_once: bool) -> Comp {
    let choice = super::algebraic::or(Comp::pure(1), Comp::pure(5));
    let scope = if with_once { once(&choice) } else { choice };
    scope.try_bind(|x| {
        let x = x.as_int()?;
        Ok(super::algebraic::or(Comp::pure(x), Comp::pure(x + 1)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::algebraic::{fail, get, h_nd, h_state, or, put};
    use crate::free::run;

    fn show(m: Result<Comp>) -> String {
        run(&m.unwrap()).unwrap().show()
    }

    #[test]
    fn once_keeps_first_result() {
        assert_eq!(show(h_once(&once_example(true))), "[1,2]");
        assert_eq!(show(h_once(&once_example(false))), "[1,2,5,6]");
    }

    #[test]
    fn once_of_pure() {
        assert_eq!(show(h_once(&once(&Comp::pure(7)).bind(Comp::pure))), "[7]");
    }

    #[test]
    fn once_of_failure_is_an_error() {
        let err = h_once(&once(&fail())).and_then(|m| run(&m)).unwrap_err();
        assert_eq!(err, Error::OnceEmptyScope);
    }

    #[test]
    fn once_agrees_with_nd_without_scopes() {
        let m = or(or(Comp::pure(1), fail()), or(Comp::pure(2), Comp::pure(3)));
        assert_eq!(show(h_once(&m)), show(h_nd(&m)));
    }

    #[test]
    fn once_forwards_state() {
        let m = once(&or(put(3).then(Comp::pure("a")), Comp::pure("b"))).then(get());
        let out = h_once(&m).and_then(|c| h_state(&c, 0)).unwrap();
        assert_eq!(run(&out).unwrap().show(), "([3],3)");
    }

    #[test]
    fn reader_local_replaces_environment() {
        let m = local(vec![Value::Int(9)], &ask());
        assert_eq!(show(h_reader(&m, vec![Value::Int(1)])), "[9]");
        let m = local(vec![Value::Int(9)], &ask()).then(ask());
        assert_eq!(show(h_reader(&m, vec![Value::Int(1)])), "[1]");
    }

    #[test]
    fn reader_forwards_scoped_once() {
        // once lives beneath the reader and sees the reader's environment.
        let m = once(&or(ask(), Comp::pure(Value::list([])))).bind(Comp::pure);
        let out = h_reader(&m, vec![Value::Int(4)])
            .and_then(|c| h_once(&c))
            .unwrap();
        assert_eq!(run(&out).unwrap().show(), "[[4]]");
    }

    #[test]
    fn once_forwards_reader_scope() {
        let m = local(vec![Value::Int(2)], &or(ask(), Comp::pure(Value::list([]))));
        let out = h_once(&m).and_then(|c| h_reader(&c, vec![])).unwrap();
        assert_eq!(run(&out).unwrap().show(), "[[2],[]]");
    }

    #[test]
    fn scoped_map_inner_touches_only_the_body() {
        let m = once(&Comp::pure(1));
        let crate::free::Tree::Node(n) = m.tree() else {
            unreachable!()
        };
        let mapped = n.map_inner(&Fun::constant(Value::Int(0))).unwrap();
        let Some(Once(b)) = project_scoped::<Once>(&mapped) else {
            unreachable!()
        };
        assert_eq!(*b, Value::Int(0));
    }
}
