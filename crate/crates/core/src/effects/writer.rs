//! Writer effects: a node is an inner computation whose result is a
//! decorated continuation seed, `f (φ a)`.
//!
//! The decoration is [`Decoration`]: `Listen` receives the log of the
//! inner computation, `Pass` rewrites the log of the rest, and anything
//! else is a forwarded `φ` payload.

use std::any::Any;
use std::fmt;
use std::sync::Arc;

use super::algebraic::{forward_algebraic, project_alg, Monoid, Tell};
use super::scoped::{project_scoped, Censor, Scoped};
use crate::error::{Error, Result};
use crate::free::{
    map_comp_value, project, separate, slot, Comp, Domain, Effect, Handler, Instance, KindInfo,
    Node, NodeView, Only, SlotRole,
};
use crate::value::{Cont, Fun, Opaque, Tag, Value};

pub const KIND: &str = "write";

pub const INFO: KindInfo = KindInfo {
    kind: KIND,
    instance: Instance::Writer,
    slots: &[
        slot("exec", "body", SlotRole::Inner, "computation of decoration"),
        slot("listen", "seed", SlotRole::Continuation, "w"),
        slot("pass", "f", SlotRole::Param, "function w -> w"),
        slot("pass", "seed", SlotRole::Continuation, "unit"),
    ],
};

/// A user-supplied decoration functor for forwarding.
pub trait Phi: Send + Sync {
    fn name(&self) -> &'static str;

    fn fmap(&self, f: &Fun) -> Arc<dyn Phi>;

    /// The continuation seed, if the decoration exposes one.
    fn seed(&self) -> Option<Value>;
}

#[derive(Clone)]
pub enum Decoration {
    /// `Listen w = (->) w`
    Listen(Fun),
    /// `Pass w = (,) (w -> w)`
    Pass(Fun, Value),
    Forward(Arc<dyn Phi>),
}

impl Decoration {
    /// `fmap` under the decoration. `Pass` applies `f` eagerly to its seed.
    pub fn fmap(&self, f: &Fun) -> Decoration {
        match self {
            Decoration::Listen(h) => Decoration::Listen(h.then(f)),
            Decoration::Pass(g, seed) => Decoration::Pass(
                g.clone(),
                f.call(seed.clone()).unwrap_or_else(Value::bottom),
            ),
            Decoration::Forward(p) => Decoration::Forward(p.fmap(f)),
        }
    }

    pub fn into_value(self) -> Value {
        Value::opaque(self)
    }
}

impl fmt::Debug for Decoration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl Opaque for Decoration {
    fn type_name(&self) -> &'static str {
        "decoration"
    }

    fn render(&self) -> String {
        match self {
            Decoration::Listen(_) => "Listen <function>".into(),
            Decoration::Pass(_, seed) => format!("Pass (<function>,{})", seed.show()),
            Decoration::Forward(p) => format!("{} <payload>", p.name()),
        }
    }

    fn view(&self) -> Option<NodeView> {
        Some(match self {
            Decoration::Listen(h) => NodeView::new("decoration", "Listen").cont(
                Cont::new(KIND, "listen", Tag::Str, h.clone()),
                Domain::Of(Tag::Str),
            ),
            Decoration::Pass(f, seed) => NodeView::new("decoration", "Pass")
                .cont(
                    Cont::new(KIND, "pass.f", Tag::Str, f.clone()),
                    Domain::Of(Tag::Str),
                )
                .value("seed", seed.clone()),
            Decoration::Forward(p) => {
                let v = NodeView::new("decoration", p.name());
                match p.seed() {
                    Some(seed) => v.value("seed", seed),
                    None => v,
                }
            }
        })
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `Exec :: f (φ a) -> K^Write φ f a`
#[derive(Clone)]
pub struct Exec(pub Value);

pub fn decoration(v: &Value) -> Result<&Decoration> {
    v.downcast::<Decoration>()
        .map_err(|_| Error::mismatch(KIND, "exec.body", "decoration", v.tag().to_string()))
}

impl Effect for Exec {
    fn kind(&self) -> &'static str {
        KIND
    }

    fn instance(&self) -> Instance {
        Instance::Writer
    }

    fn map_continuation(&self, f: &Fun) -> Node {
        let f = f.clone();
        let under = Fun::new(move |d| Ok(decoration(&d)?.fmap(&f).into_value()));
        Arc::new(Exec(map_comp_value(&self.0, &under)))
    }

    fn map_inner(&self, t: &Fun) -> Result<Node> {
        Ok(Arc::new(Exec(t.call(self.0.clone())?)))
    }

    fn view(&self) -> NodeView {
        NodeView::new(KIND, "exec").value("body", self.0.clone())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

fn exec(body: Comp) -> Comp {
    Comp::node(Exec(Value::Comp(body)))
}

/// `listen m`: returns `(x, w)` where `w` is what `m` told.
pub fn listen(body: &Comp) -> Comp {
    exec(body.map(|x| {
        Ok(Decoration::Listen(Fun::new(move |w| {
            Ok(Value::Comp(Comp::pure(Value::pair(x.clone(), w))))
        }))
        .into_value())
    }))
}

/// `pass m`: `m` returns `(x, f)` and `f` rewrites the log of the rest.
pub fn pass(body: &Comp) -> Comp {
    exec(body.try_bind(|r| {
        let (x, f) = r.as_pair()?;
        Ok(Comp::pure(
            Decoration::Pass(f.as_func()?.clone(), Value::Comp(Comp::pure(x.clone()))).into_value(),
        ))
    }))
}

/// `reset = pass (return ((), const ε))`.
pub fn reset(monoid: &Monoid) -> Comp {
    pass(&Comp::pure(Value::pair(
        Value::Unit,
        Value::Func(Fun::constant(monoid.empty())),
    )))
}

/// `censor f m = pass (fmap (\x -> (x, f)) m)`.
pub fn censor_pass(f: Fun, body: &Comp) -> Comp {
    pass(&body.map(move |x| Ok(Value::pair(x, Value::Func(f.clone())))))
}

/// Forwards a user decoration as `Exec (return op)`.
pub fn exec_forward(p: Arc<dyn Phi>) -> Comp {
    exec(Comp::pure(Decoration::Forward(p).into_value()))
}

fn pair_with(monoid: &Monoid, x: Value) -> Value {
    Value::Comp(Comp::pure(Value::pair(x, monoid.empty())))
}

fn alg_tell(monoid: &Monoid, flipped: bool, n: &Node) -> Result<Value> {
    let Tell { w, k } = project_alg::<Tell>(n).expect("separated on Tell").clone();
    let monoid = monoid.clone();
    let rest = k.apply(Value::Unit)?.as_comp()?.clone();
    Ok(Value::Comp(rest.map(move |r| {
        let (x, w2) = r.as_pair()?;
        let log = if flipped {
            monoid.combine(w2, &w)?
        } else {
            monoid.combine(&w, w2)?
        };
        Ok(Value::pair(x.clone(), log))
    })))
}

fn alg_exec(n: &Node) -> Result<Value> {
    let Exec(k) = project::<Exec>(n).expect("separated on Exec");
    Ok(Value::Comp(k.as_comp()?.try_bind(move |r| {
        let (d, w) = r.as_pair()?;
        match decoration(d)? {
            Decoration::Listen(f) => Ok(f.call(w.clone())?.as_comp()?.clone()),
            Decoration::Pass(f, mx) => {
                let f = f.clone();
                Ok(mx.as_comp()?.map(move |r| {
                    let (x, w2) = r.as_pair()?;
                    Ok(Value::pair(x.clone(), f.call(w2.clone())?))
                }))
            }
            op @ Decoration::Forward(_) => Ok(exec(Comp::pure(op.clone().into_value()))),
        }
    })))
}

fn write_algebra(
    monoid: Monoid,
    flipped: bool,
    censor: bool,
) -> impl Fn(&Node) -> Result<Value> + Send + Sync {
    move |n: &Node| {
        if project_alg::<Tell>(n).is_some() {
            return alg_tell(&monoid, flipped, n);
        }
        if project::<Exec>(n).is_some() {
            return alg_exec(n);
        }
        match n.instance() {
            Instance::Algebraic => forward_algebraic(n),
            Instance::Scoped if censor => fwd_censor(n),
            Instance::Writer => unreachable!("Exec is the only writer node"),
            _ => Err(Error::unhandled(n.kind())),
        }
    }
}

/// `do (mx, _) <- k; (x, w) <- mx; return (x, f w)`
fn alg_censor(n: &Node) -> Result<Value> {
    let Censor { f, body: k } = project_scoped::<Censor>(n)
        .expect("separated on Censor")
        .clone();
    Ok(Value::Comp(k.as_comp()?.try_bind(move |r| {
        let f = f.clone();
        Ok(r.as_pair()?.0.as_comp()?.map(move |r| {
            let (x, w) = r.as_pair()?;
            Ok(Value::pair(x.clone(), f.call(w.clone())?))
        }))
    })))
}

/// `Op_H . Enter . fmap (fmap fst)`
fn fwd_censor(n: &Node) -> Result<Value> {
    let fst = Fun::new(|k| {
        Ok(Value::Comp(
            k.as_comp()?.map(|r| Ok(r.as_pair()?.0.clone())),
        ))
    });
    Ok(Value::Comp(Comp::from_node(n.map_inner(&fst)?)))
}

fn writer_handler_with(monoid: &Monoid, flipped: bool, censor: bool) -> Handler {
    let m = monoid.clone();
    let unit = Fun::new(move |x| Ok(pair_with(&m, x)));
    let alg = write_algebra(monoid.clone(), flipped, censor);
    if censor {
        Handler::pointed(
            unit,
            separate(Only::<Scoped<Censor>>::new(), alg_censor, alg),
        )
    } else {
        Handler::pointed(unit, alg)
    }
}

pub fn writer_handler(monoid: &Monoid) -> Handler {
    writer_handler_with(monoid, false, false)
}

/// `h_Write` with `tell` appending after the rest of the log instead of
/// before it. Only useful as a deliberately wrong handler.
#[doc(hidden)]
pub fn flipped_writer_handler(monoid: &Monoid) -> Handler {
    writer_handler_with(monoid, true, false)
}

pub fn censor_handler(monoid: &Monoid) -> Handler {
    writer_handler_with(monoid, false, true)
}

pub fn h_write(m: &Comp, monoid: &Monoid) -> Result<Comp> {
    Ok(writer_handler(monoid).fold(m)?.as_comp()?.clone())
}

pub fn h_censor(m: &Comp, monoid: &Monoid) -> Result<Comp> {
    Ok(censor_handler(monoid).fold(m)?.as_comp()?.clone())
}

pub fn tell_str(s: &str) -> Comp {
    super::algebraic::tell(Value::str(s))
}

/// `tell "post" >> reset >> tell "pre"`
pub fn reset_example() -> Comp {
    tell_str("post")
        .then(reset(&Monoid::text()))
        .then(tell_str("pre"))
}

/// The same program with reset spelt as `censor (const ε)` through pass.
pub fn censor_pass_example() -> Comp {
    let clear = censor_pass(Fun::constant(Value::str("")), &Comp::pure(()));
    tell_str("post").then(clear).then(tell_str("pre"))
}

/// The same program with reset spelt as the scoped censor.
pub fn censor_scoped_example() -> Comp {
    let clear = super::scoped::censor_scoped(Fun::constant(Value::str("")), &Comp::pure(()));
    tell_str("post").then(clear).then(tell_str("pre"))
}
