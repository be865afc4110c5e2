//! Algebraic signatures: nodes with continuation slots only.
//!
//! An algebraic signature is an ordinary functor; [`Alg`] lifts it to a
//! higher-order one that ignores the inner functor, so `map_inner` is the
//! identity.

use std::any::Any;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::free::{
    project, separate, slot, Comp, Domain, Effect, Handler, Instance, KindInfo, Node, NodeView,
    Only, SlotRole,
};
use crate::value::{Cont, Fun, Tag, Value};

/// A first-order signature functor.
pub trait Signature: Clone + Send + Sync + 'static {
    const KIND: &'static str;

    /// `fmap` over the continuation positions.
    fn fmap(&self, f: &Fun) -> Self;

    fn view(&self) -> NodeView;

    fn validate(&self) -> Result<()> {
        Ok(())
    }
}

/// `Op :: σ a -> K^Alg σ f a`.
#[derive(Clone)]
pub struct Alg<S>(pub S);

impl<S: Signature> Effect for Alg<S> {
    fn kind(&self) -> &'static str {
        S::KIND
    }

    fn instance(&self) -> Instance {
        Instance::Algebraic
    }

    fn map_continuation(&self, f: &Fun) -> Node {
        Arc::new(Alg(self.0.fmap(f)))
    }

    fn map_inner(&self, _t: &Fun) -> Result<Node> {
        Ok(Arc::new(self.clone()))
    }

    fn view(&self) -> NodeView {
        self.0.view()
    }

    fn validate(&self) -> Result<()> {
        self.0.validate()
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub fn project_alg<S: Signature>(n: &Node) -> Option<&S> {
    project::<Alg<S>>(n).map(|a| &a.0)
}

/// Builds a continuation slot from a computation-valued closure.
pub fn cont(
    kind: &'static str,
    slot: &'static str,
    input: Tag,
    k: impl Fn(Value) -> Comp + Send + Sync + 'static,
) -> Cont {
    Cont::new(kind, slot, input, Fun::new(move |v| Ok(Value::Comp(k(v)))))
}

pub(crate) fn pure_cont(kind: &'static str, slot: &'static str, input: Tag) -> Cont {
    cont(kind, slot, input, Comp::pure)
}

/// Applies a carrier that is a function value.
pub(crate) fn apply_carrier(carrier: Value, arg: Value) -> Result<Value> {
    carrier.as_func()?.call(arg)
}

pub const STATE: &str = "state";
pub const CHOICE: &str = "choice";
pub const ACCUM: &str = "accum";
pub const TELL: &str = "tell";

pub const STATE_INFO: KindInfo = KindInfo {
    kind: STATE,
    instance: Instance::Algebraic,
    slots: &[
        slot("get", "k", SlotRole::Continuation, "any (the state)"),
        slot("put", "s", SlotRole::Param, "any"),
        slot("put", "k", SlotRole::Continuation, "unit"),
    ],
};

pub const CHOICE_INFO: KindInfo = KindInfo {
    kind: CHOICE,
    instance: Instance::Algebraic,
    slots: &[
        slot("or", "p", SlotRole::Continuation, "unit"),
        slot("or", "q", SlotRole::Continuation, "unit"),
    ],
};

pub const ACCUM_INFO: KindInfo = KindInfo {
    kind: ACCUM,
    instance: Instance::Algebraic,
    slots: &[
        slot("accum", "m", SlotRole::Param, "monoid value"),
        slot("accum", "k", SlotRole::Continuation, "unit"),
    ],
};

pub const TELL_INFO: KindInfo = KindInfo {
    kind: TELL,
    instance: Instance::Algebraic,
    slots: &[
        slot("tell", "w", SlotRole::Param, "monoid value"),
        slot("tell", "k", SlotRole::Continuation, "unit"),
    ],
};

/// `data State s a = Get (s -> a) | Put s a`
#[derive(Clone)]
pub enum State {
    Get(Cont),
    Put(Value, Cont),
}

impl Signature for State {
    const KIND: &'static str = STATE;

    fn fmap(&self, f: &Fun) -> Self {
        match self {
            State::Get(k) => State::Get(k.then(f)),
            State::Put(s, k) => State::Put(s.clone(), k.then(f)),
        }
    }

    fn view(&self) -> NodeView {
        match self {
            State::Get(k) => NodeView::new(STATE, "get").cont(k.clone(), Domain::Of(Tag::Int)),
            State::Put(s, k) => NodeView::new(STATE, format!("put {}", s.show()))
                .cont(k.clone(), Domain::Of(Tag::Unit)),
        }
    }
}

/// `data Choice a = Fail | Or a a`
#[derive(Clone)]
pub enum Choice {
    Fail,
    Or(Cont, Cont),
}

impl Signature for Choice {
    const KIND: &'static str = CHOICE;

    fn fmap(&self, f: &Fun) -> Self {
        match self {
            Choice::Fail => Choice::Fail,
            Choice::Or(p, q) => Choice::Or(p.then(f), q.then(f)),
        }
    }

    fn view(&self) -> NodeView {
        match self {
            Choice::Fail => NodeView::new(CHOICE, "fail"),
            Choice::Or(p, q) => NodeView::new(CHOICE, "or")
                .cont(p.clone(), Domain::Of(Tag::Unit))
                .cont(q.clone(), Domain::Of(Tag::Unit)),
        }
    }
}

/// `data Accum m a = Accum m a`
#[derive(Clone)]
pub struct Accum {
    pub m: Value,
    pub k: Cont,
}

impl Signature for Accum {
    const KIND: &'static str = ACCUM;

    fn fmap(&self, f: &Fun) -> Self {
        Accum {
            m: self.m.clone(),
            k: self.k.then(f),
        }
    }

    fn view(&self) -> NodeView {
        NodeView::new(ACCUM, format!("accum {}", self.m.show()))
            .cont(self.k.clone(), Domain::Of(Tag::Unit))
    }
}

/// `data Tell w a = Tell w a`
#[derive(Clone)]
pub struct Tell {
    pub w: Value,
    pub k: Cont,
}

impl Signature for Tell {
    const KIND: &'static str = TELL;

    fn fmap(&self, f: &Fun) -> Self {
        Tell {
            w: self.w.clone(),
            k: self.k.then(f),
        }
    }

    fn view(&self) -> NodeView {
        NodeView::new(TELL, format!("tell {}", self.w.show()))
            .cont(self.k.clone(), Domain::Of(Tag::Unit))
    }
}

pub fn get() -> Comp {
    Comp::node(Alg(State::Get(pure_cont(STATE, "get.k", Tag::Any))))
}

pub fn put(s: impl Into<Value>) -> Comp {
    Comp::node(Alg(State::Put(
        s.into(),
        pure_cont(STATE, "put.k", Tag::Unit),
    )))
}

pub fn fail() -> Comp {
    Comp::node(Alg(Choice::Fail))
}

pub fn or(p: Comp, q: Comp) -> Comp {
    Comp::node(Alg(Choice::Or(
        cont(CHOICE, "or.p", Tag::Unit, move |_| p.clone()),
        cont(CHOICE, "or.q", Tag::Unit, move |_| q.clone()),
    )))
}

pub fn accum(m: impl Into<Value>) -> Comp {
    Comp::node(Alg(Accum {
        m: m.into(),
        k: pure_cont(ACCUM, "accum.k", Tag::Unit),
    }))
}

pub fn tell(w: impl Into<Value>) -> Comp {
    Comp::node(Alg(Tell {
        w: w.into(),
        k: pure_cont(TELL, "tell.k", Tag::Unit),
    }))
}

type Combine = dyn Fn(&Value, &Value) -> Result<Value> + Send + Sync;

/// `(carrier, ⋄, ε)`.
#[derive(Clone)]
pub struct Monoid {
    name: &'static str,
    empty: Value,
    op: Arc<Combine>,
}

impl Monoid {
    pub fn new(
        name: &'static str,
        empty: Value,
        op: impl Fn(&Value, &Value) -> Result<Value> + Send + Sync + 'static,
    ) -> Self {
        Monoid {
            name,
            empty,
            op: Arc::new(op),
        }
    }

    /// String concatenation with `ε = ""`.
    pub fn text() -> Self {
        Monoid::new("text", Value::str(""), |a, b| {
            let mut s = a.as_str()?.to_owned();
            s.push_str(b.as_str()?);
            Ok(Value::str(s))
        })
    }

    /// Integer addition with `ε = 0`.
    pub fn sum() -> Self {
        Monoid::new("sum", Value::Int(0), |a, b| {
            Ok(Value::Int(a.as_int()? + b.as_int()?))
        })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn empty(&self) -> Value {
        self.empty.clone()
    }

    pub fn combine(&self, a: &Value, b: &Value) -> Result<Value> {
        (self.op)(a, b)
    }

    /// `foldr (⋄) z xs`.
    pub fn foldr(&self, xs: &[Value], z: Value) -> Result<Value> {
        xs.iter().rev().try_fold(z, |acc, x| self.combine(x, &acc))
    }
}

impl fmt::Debug for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monoid({})", self.name)
    }
}

/// Forwarding for carriers that are computations over the remaining
/// algebraic signature: `fwd = Op_H . Op`.
pub(crate) fn forward_algebraic(n: &Node) -> Result<Value> {
    if n.instance() != Instance::Algebraic {
        return Err(Error::unhandled(n.kind()));
    }
    Ok(Value::Comp(Comp::from_node(n.clone())))
}

/// State-passing handler over `K^Alg (State + σ)`.
///
/// The carrier is `s -> Free_H (K^Alg σ) (a, s)`; unknown algebraic
/// operations are forwarded with the current state threaded through.
pub fn state_handler() -> Handler {
    let unit = Fun::new(|x| {
        Ok(Value::Func(Fun::new(move |s| {
            Ok(Value::Comp(Comp::pure(Value::pair(x.clone(), s))))
        })))
    });
    let alg_state = |n: &Node| -> Result<Value> {
        let Some(op) = project_alg::<State>(n) else {
            unreachable!("separated on State")
        };
        Ok(match op.clone() {
            State::Get(k) => Value::Func(Fun::new(move |s| apply_carrier(k.apply(s.clone())?, s))),
            State::Put(s2, k) => Value::Func(Fun::new(move |_| {
                apply_carrier(k.apply(Value::Unit)?, s2.clone())
            })),
        })
    };
    let fwd = |n: &Node| -> Result<Value> {
        if n.instance() != Instance::Algebraic {
            return Err(Error::unhandled(n.kind()));
        }
        let n = n.clone();
        Ok(Value::Func(Fun::new(move |s| {
            let at_s = Fun::new(move |g| apply_carrier(g, s.clone()));
            Ok(Value::Comp(Comp::from_node(n.map_continuation(&at_s))))
        })))
    };
    Handler::pointed(unit, separate(Only::<Alg<State>>::new(), alg_state, fwd))
}

/// `h_State m s0`: a computation over the remaining signature producing
/// `(value, final state)`.
pub fn h_state(m: &Comp, s0: impl Into<Value>) -> Result<Comp> {
    let carrier = state_handler().fold(m)?;
    Ok(apply_carrier(carrier, s0.into())?.as_comp()?.clone())
}

/// Concatenation of two list-producing computations.
pub(crate) fn append_lists(p: Comp, q: Comp) -> Comp {
    p.try_bind(move |xs| {
        let xs = xs.as_list()?.to_vec();
        Ok(q.map(move |ys| {
            let mut out = xs.clone();
            out.extend_from_slice(ys.as_list()?);
            Ok(Value::list(out))
        }))
    })
}

/// Nondeterminism into the list of all results, left to right.
pub fn nd_handler() -> Handler {
    let unit = Fun::new(|x| Ok(Value::Comp(Comp::pure(Value::list([x])))));
    let alg_choice = |n: &Node| -> Result<Value> {
        Ok(match project_alg::<Choice>(n) {
            Some(Choice::Fail) => Value::Comp(Comp::pure(Value::list([]))),
            Some(Choice::Or(p, q)) => {
                let p = p.apply(Value::Unit)?.as_comp()?.clone();
                let q = q.apply(Value::Unit)?.as_comp()?.clone();
                Value::Comp(append_lists(p, q))
            }
            None => unreachable!("separated on Choice"),
        })
    };
    Handler::pointed(
        unit,
        separate(Only::<Alg<Choice>>::new(), alg_choice, forward_algebraic),
    )
}

pub fn h_nd(m: &Comp) -> Result<Comp> {
    Ok(nd_handler().fold(m)?.as_comp()?.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::run;

    fn int(v: &Value) -> i64 {
        v.as_int().unwrap()
    }

    #[test]
    fn incr_and_return_five() {
        let prog = get().bind(|x| put(int(&x) + 1).then(Comp::pure(5)));
        let out = run(&h_state(&prog, 0).unwrap()).unwrap();
        assert_eq!(out.show(), "(5,1)");
    }

    #[test]
    fn get_put_return_original() {
        let prog = get().bind(|s| put(int(&s) + 1).then(Comp::pure(s)));
        assert_eq!(run(&h_state(&prog, 0).unwrap()).unwrap().show(), "(0,1)");
    }

    #[test]
    fn state_generator_pairs_with_initial_state() {
        assert_eq!(
            run(&h_state(&Comp::pure("v"), 7).unwrap()).unwrap().show(),
            "(\"v\",7)"
        );
    }

    #[test]
    fn nd_flattens_depth_first() {
        let prog = or(Comp::pure(1), or(or(Comp::pure(2), Comp::pure(3)), fail()));
        assert_eq!(run(&h_nd(&prog).unwrap()).unwrap().show(), "[1,2,3]");
        assert_eq!(run(&h_nd(&Comp::pure(4)).unwrap()).unwrap().show(), "[4]");
        assert_eq!(
            run(&h_nd(&or(Comp::pure(1), fail())).unwrap())
                .unwrap()
                .show(),
            "[1]"
        );
    }

    #[test]
    fn state_forwards_choice_in_order() {
        // State handled first, then nondeterminism.
        let prog = get().bind(|s| {
            or(
                put(int(&s) + 1).then(Comp::pure("l")),
                put(int(&s) + 2).then(Comp::pure("r")),
            )
        });
        let inner = h_state(&prog, 10).unwrap();
        let out = run(&h_nd(&inner).unwrap()).unwrap();
        assert_eq!(out.show(), "[(\"l\",11),(\"r\",12)]");
    }

    #[test]
    fn handler_order_changes_interpretation() {
        // put 1 >> (put 2 >> fail) `or` get: local versus global state.
        let prog = put(1).then(or(put(2).then(fail()), get()));
        // State handled first: each branch resumes from its own state.
        let local = h_state(&prog, 0).and_then(|m| h_nd(&m)).unwrap();
        assert_eq!(run(&local).unwrap().show(), "[(1,1)]");
        // Choice handled first: state is shared across branches.
        let global = h_nd(&prog).and_then(|m| h_state(&m, 0)).unwrap();
        assert_eq!(run(&global).unwrap().show(), "([2],2)");
    }

    #[test]
    fn unhandled_kind_is_reported() {
        let err = h_state(&fail(), 0).and_then(|m| run(&m)).unwrap_err();
        assert_eq!(err, Error::unhandled(CHOICE));
        let err = h_nd(&crate::exc::throw()).unwrap_err();
        assert_eq!(err, Error::unhandled(crate::exc::KIND));
    }

    #[test]
    fn monoids() {
        let t = Monoid::text();
        let ab = t.combine(&Value::str("a"), &Value::str("b")).unwrap();
        assert_eq!(ab, Value::str("ab"));
        let s = Monoid::sum();
        let xs = [Value::Int(1), Value::Int(2), Value::Int(10), Value::Int(4)];
        assert_eq!(s.foldr(&xs, s.empty()).unwrap(), Value::Int(17));
        assert_eq!(t.foldr(&[], t.empty()).unwrap(), Value::str(""));
    }
}
