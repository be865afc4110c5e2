//! Exceptions as a higher-order signature: `Throw` has no slots, `Catch`
//! has an inner computation and a continuation that learns whether it
//! threw.

use std::any::Any;
use std::sync::Arc;

use crate::error::Result;
use crate::free::{
    project, slot, Comp, Domain, Effect, Handler, Instance, KindInfo, Node, NodeView, SlotRole,
};
use crate::value::{Cont, Fun, Tag, Value};

pub const KIND: &str = "exc";

pub const INFO: KindInfo = KindInfo {
    kind: KIND,
    instance: Instance::Exception,
    slots: &[
        slot("catch", "inner", SlotRole::Inner, "any"),
        slot("catch", "k", SlotRole::Continuation, "maybe"),
    ],
};

#[derive(Clone)]
pub enum Exc {
    Throw,
    Catch { inner: Value, k: Cont },
}

impl Effect for Exc {
    fn kind(&self) -> &'static str {
        KIND
    }

    fn instance(&self) -> Instance {
        Instance::Exception
    }

    fn map_continuation(&self, f: &Fun) -> Node {
        match self {
            Exc::Throw => Arc::new(Exc::Throw),
            Exc::Catch { inner, k } => Arc::new(Exc::Catch {
                inner: inner.clone(),
                k: k.then(f),
            }),
        }
    }

    fn map_inner(&self, t: &Fun) -> Result<Node> {
        Ok(match self {
            Exc::Throw => Arc::new(Exc::Throw),
            Exc::Catch { inner, k } => Arc::new(Exc::Catch {
                inner: t.call(inner.clone())?,
                k: k.clone(),
            }),
        })
    }

    fn view(&self) -> NodeView {
        match self {
            Exc::Throw => NodeView::new(KIND, "throw"),
            Exc::Catch { inner, k } => NodeView::new(KIND, "catch")
                .value("inner", inner.clone())
                .cont(k.clone(), Domain::Of(Tag::Maybe)),
        }
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub fn throw() -> Comp {
    Comp::node(Exc::Throw)
}

/// Runs `inner`; `k` receives `Some(v)` on success and `None` if it threw.
pub fn catch(inner: Comp, k: impl Fn(Option<Value>) -> Comp + Send + Sync + 'static) -> Comp {
    let k = Cont::new(
        KIND,
        "catch.k",
        Tag::Maybe,
        Fun::new(move |m| Ok(Value::Comp(k(m.as_maybe()?.cloned())))),
    );
    Comp::node(Exc::Catch {
        inner: Value::Comp(inner),
        k,
    })
}

/// `h_Exc = fold Just alg`, into the optional carrier.
pub fn exc_handler() -> Handler {
    Handler::pointed(Fun::new(|v| Ok(Value::just(v))), |n: &Node| {
        match project::<Exc>(n) {
            Some(Exc::Throw) => Ok(Value::nothing()),
            Some(Exc::Catch { inner, k }) => k.apply(inner.clone()),
            None => Err(crate::Error::unhandled(n.kind())),
        }
    })
}

pub fn h_exc(m: &Comp) -> Result<Value> {
    exc_handler().fold(m)
}

/// Throws when `x` is negative and reports either the number or
/// `"Too small"`.
pub fn prog_exc(x: i64) -> Comp {
    let inner = if x >= 0 { Comp::pure(x) } else { throw() };
    catch(inner, |r| match r {
        None => Comp::pure("Too small"),
        Some(v) => Comp::pure(Value::str(v.show())),
    })
}
