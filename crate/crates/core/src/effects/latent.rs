//! Latent effects: nodes that carry an operation, the latent effect state,
//! an interpreter for deferred subcomputations and a continuation.
//!
//! The latent functor `ℓ` is the identity here, so `ℓ ()` is unit and
//! `ℓ x` is just `x`.

use std::any::Any;
use std::fmt;
use std::sync::Arc;

use super::algebraic::{cont, project_alg, State};
use super::scoped::{ask, local, project_scoped, Ask, Local};
use crate::error::{Error, Result};
use crate::free::{
    project, slot, Comp, Domain, Effect, Handler, Instance, KindInfo, Node, NodeView, SlotRole,
};
use crate::value::{Cont, Fun, Opaque, Tag, Value};

/// How many subcomputations an operation defers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    NoSub,
    OneSub,
}

/// A latent operation signature `ζ p c`.
pub trait LatentSig: Clone + Send + Sync + 'static {
    const KIND: &'static str;

    fn label(&self) -> String;

    fn arity(&self) -> Arity;

    /// Tag of the value handed to the continuation.
    fn result_tag(&self) -> Tag;
}

/// `Node :: ζ p c -> ℓ () -> (∀x. c x -> ℓ () -> f (ℓ x)) -> (ℓ p -> a) -> K^Lat ζ ℓ f a`
#[derive(Clone)]
pub struct Latent<Z> {
    pub op: Z,
    pub l: Value,
    /// The subcomputation interpreter at the only selector, if any.
    pub st: Option<Fun>,
    pub k: Cont,
}

impl<Z: LatentSig> Effect for Latent<Z> {
    fn kind(&self) -> &'static str {
        Z::KIND
    }

    fn instance(&self) -> Instance {
        Instance::Latent
    }

    fn map_continuation(&self, f: &Fun) -> Node {
        Arc::new(Latent {
            k: self.k.then(f),
            ..self.clone()
        })
    }

    fn map_inner(&self, t: &Fun) -> Result<Node> {
        Ok(Arc::new(Latent {
            st: self.st.as_ref().map(|st| st.then(t)),
            ..self.clone()
        }))
    }

    fn view(&self) -> NodeView {
        let mut v = NodeView::new(Z::KIND, self.op.label());
        if let Some(st) = &self.st {
            v = v.value("sub", st.call(self.l.clone()).unwrap_or_else(Value::bottom));
        }
        v.cont(self.k.clone(), Domain::Of(self.op.result_tag()))
    }

    fn validate(&self) -> Result<()> {
        match (self.op.arity(), &self.st) {
            (Arity::NoSub, None) | (Arity::OneSub, Some(_)) => Ok(()),
            (Arity::NoSub, Some(_)) => {
                Err(Error::mismatch(Z::KIND, "st", "no subcomputation", "one"))
            }
            (Arity::OneSub, None) => {
                Err(Error::mismatch(Z::KIND, "st", "one subcomputation", "none"))
            }
        }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub const THUNKING: &str = "thunking";

pub const INFO: KindInfo = KindInfo {
    kind: THUNKING,
    instance: Instance::Latent,
    slots: &[
        slot("thunk", "l", SlotRole::Param, "unit"),
        slot("thunk", "st", SlotRole::Inner, "computation"),
        slot("thunk", "k", SlotRole::Continuation, "int (pointer)"),
        slot("force", "p", SlotRole::Param, "int (pointer)"),
        slot("force", "k", SlotRole::Continuation, "any (the value)"),
    ],
};

/// `Thunk :: Thunking v Ptr (OneSub v)`, `Force :: Ptr -> Thunking v v NoSub`
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thunking {
    Thunk,
    Force(usize),
}

impl LatentSig for Thunking {
    const KIND: &'static str = THUNKING;

    fn label(&self) -> String {
        match self {
            Thunking::Thunk => "thunk".into(),
            Thunking::Force(p) => format!("force {p}"),
        }
    }

    fn arity(&self) -> Arity {
        match self {
            Thunking::Thunk => Arity::OneSub,
            Thunking::Force(_) => Arity::NoSub,
        }
    }

    fn result_tag(&self) -> Tag {
        match self {
            Thunking::Thunk => Tag::Int,
            Thunking::Force(_) => Tag::Any,
        }
    }
}

/// Defers `body`; the result is a pointer into the thunk store.
pub fn thunk(body: &Comp) -> Comp {
    let body = Value::Comp(body.clone());
    Comp::node(Latent {
        op: Thunking::Thunk,
        l: Value::Unit,
        st: Some(Fun::constant(body)),
        k: cont(THUNKING, "thunk.k", Tag::Int, Comp::pure),
    })
}

pub fn force(p: usize) -> Comp {
    Comp::node(Latent {
        op: Thunking::Force(p),
        l: Value::Unit,
        st: None,
        k: cont(THUNKING, "force.k", Tag::Any, Comp::pure),
    })
}

/// A store entry: suspended (`Left`) or memoized (`Right`).
#[derive(Clone)]
pub enum Entry {
    Left(Fun, Value),
    Right(Value),
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Left(..) => f.write_str("Left <thunk>"),
            Entry::Right(v) => write!(f, "Right {}", v.show_arg()),
        }
    }
}

pub type Store = Arc<Vec<Entry>>;

/// `State_L ((s, th), Id a)`
#[derive(Clone)]
pub struct StateL {
    pub state: Value,
    pub store: Store,
    pub result: Value,
}

impl fmt::Display for StateL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = self.store.iter().map(Entry::to_string).collect();
        write!(
            f,
            "({},[{}],{})",
            self.state.show(),
            entries.join(","),
            self.result.show()
        )
    }
}

impl fmt::Debug for StateL {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

type Run = dyn Fn(&Value, &Value, &Store) -> Result<StateL> + Send + Sync;

/// The carrier: `s -> nv -> th -> State_L (s, th) Id a`.
#[derive(Clone)]
pub struct Machine(Arc<Run>);

impl Machine {
    pub fn new(
        f: impl Fn(&Value, &Value, &Store) -> Result<StateL> + Send + Sync + 'static,
    ) -> Self {
        Machine(Arc::new(f))
    }

    pub fn run(&self, s: &Value, nv: &Value, th: &Store) -> Result<StateL> {
        (self.0)(s, nv, th)
    }

    fn into_value(self) -> Value {
        Value::opaque(self)
    }

    fn of(v: &Value) -> Result<&Machine> {
        v.downcast::<Machine>()
    }
}

impl Opaque for Machine {
    fn type_name(&self) -> &'static str {
        "machine"
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

fn machine(
    f: impl Fn(&Value, &Value, &Store) -> Result<StateL> + Send + Sync + 'static,
) -> Result<Value> {
    Ok(Machine::new(f).into_value())
}

fn run_carrier(c: &Value, s: &Value, nv: &Value, th: &Store) -> Result<StateL> {
    Machine::of(c)?.run(s, nv, th)
}

fn push(th: &Store, e: Entry) -> Store {
    let mut v = (**th).clone();
    v.push(e);
    Arc::new(v)
}

fn replace(th: &Store, p: usize, e: Entry) -> Store {
    let mut v = (**th).clone();
    v[p] = e;
    Arc::new(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Lazy,
    Eager,
}

/// The shared algebraic and scoped clauses; no forwarding.
fn alg_expr(n: &Node) -> Option<Result<Value>> {
    if let Some(op) = project_alg::<State>(n) {
        let op = op.clone();
        return Some(match op {
            State::Get(k) => machine(move |s, nv, th| run_carrier(&k.apply(s.clone())?, s, nv, th)),
            State::Put(s2, k) => {
                machine(move |_, nv, th| run_carrier(&k.apply(Value::Unit)?, &s2, nv, th))
            }
        });
    }
    if let Some(Ask(k)) = project_alg::<Ask>(n) {
        let k = k.clone();
        return Some(machine(move |s, nv, th| {
            run_carrier(&k.apply(nv.clone())?, s, nv, th)
        }));
    }
    if let Some(Local { env, body }) = project_scoped::<Local>(n) {
        let (env, body) = (env.clone(), body.clone());
        return Some(machine(move |s, nv, th| {
            let r = run_carrier(&body, s, &env, th)?;
            run_carrier(&r.result, &r.state, nv, &r.store)
        }));
    }
    None
}

fn alg_lazy(node: &Latent<Thunking>) -> Result<Value> {
    let Latent { op, l, st, k } = node.clone();
    match op {
        Thunking::Thunk => {
            let st = st.expect("validated: thunk has a subcomputation");
            machine(move |s, nv, th| {
                let ptr = Value::Int(th.len() as i64);
                run_carrier(
                    &k.apply(ptr)?,
                    s,
                    nv,
                    &push(th, Entry::Left(st.clone(), l.clone())),
                )
            })
        }
        Thunking::Force(p) => machine(move |s, nv, th| match th.get(p) {
            None => Err(Error::DanglingThunk(p)),
            Some(Entry::Left(t, l0)) => {
                let r = run_carrier(&t.call(l0.clone())?, s, nv, th)?;
                let th2 = replace(&r.store, p, Entry::Right(r.result.clone()));
                run_carrier(&k.apply(r.result)?, &r.state, nv, &th2)
            }
            Some(Entry::Right(v)) => run_carrier(&k.apply(v.clone())?, s, nv, th),
        }),
    }
}

fn alg_eager(node: &Latent<Thunking>) -> Result<Value> {
    let Latent { op, l, st, k } = node.clone();
    match op {
        Thunking::Thunk => {
            let st = st.expect("validated: thunk has a subcomputation");
            machine(move |s, nv, th| {
                let r = run_carrier(&st.call(l.clone())?, s, nv, th)?;
                let ptr = Value::Int(r.store.len() as i64);
                let th2 = push(&r.store, Entry::Right(r.result));
                run_carrier(&k.apply(ptr)?, &r.state, nv, &th2)
            })
        }
        Thunking::Force(p) => machine(move |s, nv, th| match th.get(p) {
            None => Err(Error::DanglingThunk(p)),
            Some(Entry::Left(..)) => Err(Error::UnevaluatedThunk(p)),
            Some(Entry::Right(v)) => run_carrier(&k.apply(v.clone())?, s, nv, th),
        }),
    }
}

pub fn latent_handler(strategy: Strategy) -> Handler {
    let unit = Fun::new(|x| {
        machine(move |s, _, th| {
            Ok(StateL {
                state: s.clone(),
                store: th.clone(),
                result: x.clone(),
            })
        })
    });
    Handler::pointed(unit, move |n: &Node| {
        if let Some(r) = alg_expr(n) {
            return r;
        }
        match project::<Latent<Thunking>>(n) {
            Some(node) if strategy == Strategy::Lazy => alg_lazy(node),
            Some(node) => alg_eager(node),
            None => Err(Error::unhandled(n.kind())),
        }
    })
}

fn h_latent(strategy: Strategy, m: &Comp, s: Value, nv: Vec<Value>, th: Store) -> Result<StateL> {
    let carrier = latent_handler(strategy).fold(m)?;
    run_carrier(&carrier, &s, &Value::list(nv), &th)
}

/// Call-by-need with memoization.
pub fn h_lazy(m: &Comp, s: impl Into<Value>, nv: Vec<Value>, th: Store) -> Result<StateL> {
    h_latent(Strategy::Lazy, m, s.into(), nv, th)
}

/// Call-by-value: thunks are evaluated when created.
pub fn h_eager(m: &Comp, s: impl Into<Value>, nv: Vec<Value>, th: Store) -> Result<StateL> {
    h_latent(Strategy::Eager, m, s.into(), nv, th)
}

/// `data V = Val Int | Abs (Expr V V)`
#[derive(Clone)]
pub enum Lam {
    Val(i64),
    Abs(Comp),
}

impl Opaque for Lam {
    fn type_name(&self) -> &'static str {
        "lambda value"
    }

    fn render(&self) -> String {
        match self {
            Lam::Val(n) => n.to_string(),
            Lam::Abs(_) => "Abs <body>".into(),
        }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub fn val(n: i64) -> Value {
    Value::opaque(Lam::Val(n))
}

fn index(nv: &Value, i: usize) -> Value {
    match nv.as_list() {
        Ok(xs) => xs
            .get(i)
            .cloned()
            .unwrap_or_else(|| Value::bottom(Error::UnboundVariable(i))),
        Err(e) => Value::bottom(e),
    }
}

fn pointer(v: &Value) -> Result<usize> {
    usize::try_from(v.as_int()?).map_err(|_| Error::Other(format!("negative pointer {}", v.show())))
}

/// `var x = do nv <- ask; local [nv !! x] (force 0)`
pub fn var(x: usize) -> Comp {
    ask().bind(move |nv| local(vec![index(&nv, x)], &force(0)))
}

/// `abs body = return (Abs body)`
pub fn abs(body: Comp) -> Comp {
    Comp::pure(Value::opaque(Lam::Abs(body)))
}

/// `app e1 e2 = do vf <- e1; nv <- ask; p <- thunk e2; case vf of Abs body -> local [nv !! p] body`
pub fn app(e1: &Comp, e2: &Comp) -> Comp {
    let e2 = e2.clone();
    e1.bind(move |vf| {
        let e2 = e2.clone();
        ask().bind(move |nv| {
            let vf = vf.clone();
            thunk(&e2).try_bind(move |p| match vf.downcast::<Lam>() {
                Ok(Lam::Abs(body)) => Ok(local(vec![index(&nv, pointer(&p)?)], body)),
                _ => Err(Error::ApplyNonFunction),
            })
        })
    })
}

/// `app (abs (return 3)) (do put 42; return 5)`
pub fn prog_lazy() -> Comp {
    app(
        &abs(Comp::pure(val(3))),
        &super::algebraic::put(val(42)).then(Comp::pure(val(5))),
    )
}

pub fn empty_store() -> Store {
    Arc::new(Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::algebraic::{get, put};

    fn lazy(m: &Comp) -> Result<StateL> {
        h_lazy(m, val(0), vec![], empty_store())
    }

    fn eager(m: &Comp) -> Result<StateL> {
        h_eager(m, val(0), vec![], empty_store())
    }

    #[test]
    fn prog_lazy_under_both_strategies() {
        assert_eq!(
            lazy(&prog_lazy()).unwrap().to_string(),
            "(0,[Left <thunk>],3)"
        );
        assert_eq!(eager(&prog_lazy()).unwrap().to_string(), "(42,[Right 5],3)");
    }

    #[test]
    fn pure_leaves_everything_alone() {
        assert_eq!(lazy(&Comp::pure(val(1))).unwrap().to_string(), "(0,[],1)");
        assert_eq!(eager(&Comp::pure(val(1))).unwrap().to_string(), "(0,[],1)");
    }

    #[test]
    fn thunk_then_force_memoizes() {
        let m = thunk(&put(val(1)).then(Comp::pure(val(9)))).try_bind(|p| Ok(force(pointer(&p)?)));
        assert_eq!(lazy(&m).unwrap().to_string(), "(1,[Right 9],9)");
        assert_eq!(eager(&m).unwrap().to_string(), "(1,[Right 9],9)");
    }

    #[test]
    fn eager_thunk_of_pure() {
        let m = thunk(&Comp::pure(val(9))).try_bind(|p| Ok(force(pointer(&p)?)));
        assert_eq!(eager(&m).unwrap().to_string(), "(0,[Right 9],9)");
    }

    #[test]
    fn forcing_twice_runs_once() {
        let bump = get().bind(|s| put(s.as_int().unwrap() + 1).then(Comp::pure(7)));
        let m = thunk(&bump).try_bind(|p| {
            let p = pointer(&p)?;
            Ok(force(p).then(force(p)))
        });
        let out = h_lazy(&m, 0, vec![], empty_store()).unwrap();
        assert_eq!(out.to_string(), "(1,[Right 7],7)");
    }

    #[test]
    fn pointers_are_dense() {
        let m = thunk(&Comp::pure(1))
            .bind(|a| thunk(&Comp::pure(2)).bind(move |b| Comp::pure(Value::pair(a.clone(), b))));
        assert_eq!(lazy(&m).unwrap().result.show(), "(0,1)");
        assert_eq!(eager(&m).unwrap().result.show(), "(0,1)");
    }

    #[test]
    fn identity_application() {
        let m = app(&abs(var(0)), &Comp::pure(val(9)));
        assert_eq!(lazy(&m).unwrap().result.show(), "9");
        assert_eq!(eager(&m).unwrap().result.show(), "9");
    }

    #[test]
    fn abs_is_immediate() {
        let out = lazy(&abs(Comp::pure(val(3)))).unwrap();
        assert_eq!(out.result.show(), "Abs <body>");
        assert!(out.store.is_empty());
    }

    #[test]
    fn defined_errors() {
        assert_eq!(lazy(&force(3)).unwrap_err(), Error::DanglingThunk(3));
        let stuck = Arc::new(vec![Entry::Left(Fun::constant(Value::Unit), Value::Unit)]);
        assert_eq!(
            h_eager(&force(0), 0, vec![], stuck).unwrap_err(),
            Error::UnevaluatedThunk(0)
        );
        let m = app(&Comp::pure(val(1)), &Comp::pure(val(2)));
        assert_eq!(lazy(&m).unwrap_err(), Error::ApplyNonFunction);
    }

    #[test]
    fn unhandled_kinds_are_not_forwarded() {
        assert_eq!(
            lazy(&crate::effects::algebraic::fail()).unwrap_err(),
            Error::unhandled("choice")
        );
    }

    #[test]
    fn thunk_without_subcomputation_is_rejected() {
        let bad: Node = Arc::new(Latent {
            op: Thunking::Thunk,
            l: Value::Unit,
            st: None,
            k: cont(THUNKING, "thunk.k", Tag::Int, Comp::pure),
        });
        assert!(Comp::op(bad).is_err());
    }
}
