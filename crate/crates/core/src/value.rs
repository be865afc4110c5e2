//! Dynamically tagged values.
//!
//! Positions that are universally quantified in the type of an effect
//! node (the intermediate result of an inner computation, the input of a
//! continuation) carry a [`Value`]. Every effect kind documents the tag it
//! expects at each slot and [`Cont::apply`] checks it.

use std::any::Any;
use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::free::{Comp, NodeView};

/// Default bound on nested continuation/carrier calls.
pub const DEFAULT_DEPTH_LIMIT: usize = 100_000;

thread_local! {
    static DEPTH: Cell<usize> = const { Cell::new(0) };
    static LIMIT: Cell<usize> = const { Cell::new(DEFAULT_DEPTH_LIMIT) };
}

/// Sets the nesting limit for the current thread and returns the old one.
pub fn set_depth_limit(limit: usize) -> usize {
    LIMIT.with(|l| l.replace(limit))
}

pub fn depth_limit() -> usize {
    LIMIT.with(|l| l.get())
}

struct DepthGuard(usize);

impl Drop for DepthGuard {
    fn drop(&mut self) {
        DEPTH.with(|d| d.set(self.0));
    }
}

/// Runs `f` one level deeper, growing the stack on demand. Exceeding the
/// configured limit is reported as [`Error::DepthExceeded`].
pub(crate) fn guarded<T>(f: impl FnOnce() -> Result<T>) -> Result<T> {
    let depth = DEPTH.with(|d| d.get());
    let limit = depth_limit();
    if depth >= limit {
        return Err(Error::DepthExceeded { limit });
    }
    DEPTH.with(|d| d.set(depth + 1));
    let _guard = DepthGuard(depth);
    stacker::maybe_grow(256 * 1024, 8 * 1024 * 1024, f)
}

/// Runtime tag of a [`Value`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Any,
    Unit,
    Bool,
    Int,
    Char,
    Str,
    Pair,
    List,
    Maybe,
    Comp,
    Func,
    Opaque(&'static str),
}

impl Tag {
    pub fn accepts(self, value: &Value) -> bool {
        self == Tag::Any || value.tag() == self
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tag::Any => f.write_str("any"),
            Tag::Unit => f.write_str("unit"),
            Tag::Bool => f.write_str("bool"),
            Tag::Int => f.write_str("int"),
            Tag::Char => f.write_str("char"),
            Tag::Str => f.write_str("string"),
            Tag::Pair => f.write_str("pair"),
            Tag::List => f.write_str("list"),
            Tag::Maybe => f.write_str("maybe"),
            Tag::Comp => f.write_str("computation"),
            Tag::Func => f.write_str("function"),
            Tag::Opaque(name) => f.write_str(name),
        }
    }
}

/// Host values that travel through erased positions without a dedicated
/// variant (carriers, handles, decorations, lambda values).
pub trait Opaque: Any + Send + Sync {
    fn type_name(&self) -> &'static str;

    fn render(&self) -> String {
        format!("<{}>", self.type_name())
    }

    /// Slot structure, for values that embed computations or functions.
    fn view(&self) -> Option<NodeView> {
        None
    }

    fn as_any(&self) -> &dyn Any;
}

#[derive(Clone)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Char(char),
    Str(Arc<str>),
    Pair(Arc<(Value, Value)>),
    List(Arc<Vec<Value>>),
    Maybe(Option<Arc<Value>>),
    Comp(Comp),
    Func(Fun),
    Opaque(Arc<dyn Opaque>),
    /// A value whose construction failed; inspecting it yields the error.
    Bottom(Arc<Error>),
}

impl Value {
    pub fn str(s: impl AsRef<str>) -> Self {
        Value::Str(Arc::from(s.as_ref()))
    }

    pub fn pair(a: impl Into<Value>, b: impl Into<Value>) -> Self {
        Value::Pair(Arc::new((a.into(), b.into())))
    }

    pub fn list(items: impl IntoIterator<Item = Value>) -> Self {
        Value::List(Arc::new(items.into_iter().collect()))
    }

    pub fn just(v: impl Into<Value>) -> Self {
        Value::Maybe(Some(Arc::new(v.into())))
    }

    pub fn nothing() -> Self {
        Value::Maybe(None)
    }

    pub fn opaque<T: Opaque>(x: T) -> Self {
        Value::Opaque(Arc::new(x))
    }

    pub fn bottom(err: Error) -> Self {
        Value::Bottom(Arc::new(err))
    }

    pub fn tag(&self) -> Tag {
        match self {
            Value::Unit => Tag::Unit,
            Value::Bool(_) => Tag::Bool,
            Value::Int(_) => Tag::Int,
            Value::Char(_) => Tag::Char,
            Value::Str(_) => Tag::Str,
            Value::Pair(_) => Tag::Pair,
            Value::List(_) => Tag::List,
            Value::Maybe(_) => Tag::Maybe,
            Value::Comp(_) => Tag::Comp,
            Value::Func(_) => Tag::Func,
            Value::Opaque(o) => Tag::Opaque(o.type_name()),
            Value::Bottom(_) => Tag::Any,
        }
    }

    fn mismatch(&self, expected: Tag) -> Error {
        if let Value::Bottom(e) = self {
            return (**e).clone();
        }
        Error::mismatch("value", "-", expected.to_string(), self.tag_name())
    }

    fn tag_name(&self) -> String {
        match self {
            Value::Bottom(_) => "bottom".to_owned(),
            v => v.tag().to_string(),
        }
    }

    pub fn as_int(&self) -> Result<i64> {
        match self {
            Value::Int(n) => Ok(*n),
            v => Err(v.mismatch(Tag::Int)),
        }
    }

    pub fn as_bool(&self) -> Result<bool> {
        match self {
            Value::Bool(b) => Ok(*b),
            v => Err(v.mismatch(Tag::Bool)),
        }
    }

    pub fn as_char(&self) -> Result<char> {
        match self {
            Value::Char(c) => Ok(*c),
            v => Err(v.mismatch(Tag::Char)),
        }
    }

    pub fn as_str(&self) -> Result<&str> {
        match self {
            Value::Str(s) => Ok(s),
            v => Err(v.mismatch(Tag::Str)),
        }
    }

    pub fn as_pair(&self) -> Result<(&Value, &Value)> {
        match self {
            Value::Pair(p) => Ok((&p.0, &p.1)),
            v => Err(v.mismatch(Tag::Pair)),
        }
    }

    pub fn as_list(&self) -> Result<&[Value]> {
        match self {
            Value::List(xs) => Ok(xs),
            v => Err(v.mismatch(Tag::List)),
        }
    }

    pub fn as_maybe(&self) -> Result<Option<&Value>> {
        match self {
            Value::Maybe(m) => Ok(m.as_deref()),
            v => Err(v.mismatch(Tag::Maybe)),
        }
    }

    pub fn as_comp(&self) -> Result<&Comp> {
        match self {
            Value::Comp(c) => Ok(c),
            v => Err(v.mismatch(Tag::Comp)),
        }
    }

    pub fn as_func(&self) -> Result<&Fun> {
        match self {
            Value::Func(f) => Ok(f),
            v => Err(v.mismatch(Tag::Func)),
        }
    }

    pub fn downcast<T: Opaque>(&self) -> Result<&T> {
        match self {
            Value::Opaque(o) => o.as_any().downcast_ref::<T>().ok_or_else(|| {
                Error::mismatch(
                    "value",
                    "-",
                    std::any::type_name::<T>(),
                    o.type_name().to_owned(),
                )
            }),
            v => Err(v.mismatch(Tag::Opaque(std::any::type_name::<T>()))),
        }
    }

    /// Haskell-style `showsPrec`: wraps compound renderings in parentheses
    /// when they appear as constructor arguments.
    fn show_prec(&self, prec: u8, out: &mut String) {
        match self {
            Value::Unit => out.push_str("()"),
            Value::Bool(b) => out.push_str(if *b { "True" } else { "False" }),
            Value::Int(n) => {
                if *n < 0 && prec > 6 {
                    out.push_str(&format!("({n})"));
                } else {
                    out.push_str(&n.to_string());
                }
            }
            Value::Char(c) => {
                out.push('\'');
                push_escaped(*c, '\'', out);
                out.push('\'');
            }
            Value::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    push_escaped(c, '"', out);
                }
                out.push('"');
            }
            Value::Pair(p) => {
                out.push('(');
                p.0.show_prec(0, out);
                out.push(',');
                p.1.show_prec(0, out);
                out.push(')');
            }
            Value::List(xs) => {
                out.push('[');
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    x.show_prec(0, out);
                }
                out.push(']');
            }
            Value::Maybe(None) => out.push_str("Nothing"),
            Value::Maybe(Some(v)) => {
                if prec > 10 {
                    out.push('(');
                }
                out.push_str("Just ");
                v.show_prec(11, out);
                if prec > 10 {
                    out.push(')');
                }
            }
            Value::Comp(_) => out.push_str("<computation>"),
            Value::Func(_) => out.push_str("<function>"),
            Value::Opaque(o) => out.push_str(&o.render()),
            Value::Bottom(e) => out.push_str(&format!("<bottom: {e}>")),
        }
    }

    /// Rendering used for every printed result: pairs as `(a,b)`, lists
    /// as `[x,y]`, optionals as `Just v`/`Nothing`, strings quoted.
    pub fn show(&self) -> String {
        let mut out = String::new();
        self.show_prec(0, &mut out);
        out
    }

    /// Rendering as a constructor argument, e.g. the `-3` in `Just (-3)`.
    pub fn show_arg(&self) -> String {
        let mut out = String::new();
        self.show_prec(11, &mut out);
        out
    }
}

fn push_escaped(c: char, quote: char, out: &mut String) {
    match c {
        '\\' => out.push_str("\\\\"),
        '\n' => out.push_str("\\n"),
        '\t' => out.push_str("\\t"),
        c if c == quote => {
            out.push('\\');
            out.push(c);
        }
        c => out.push(c),
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.show())
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.show())
    }
}

/// Ground values compare structurally; computations, functions and
/// opaque values compare by identity.
impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Unit, Value::Unit) => true,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Char(a), Value::Char(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Pair(a), Value::Pair(b)) => a.0 == b.0 && a.1 == b.1,
            (Value::List(a), Value::List(b)) => a == b,
            (Value::Maybe(a), Value::Maybe(b)) => a == b,
            (Value::Comp(a), Value::Comp(b)) => a.ptr_eq(b),
            (Value::Func(a), Value::Func(b)) => Arc::ptr_eq(&a.0, &b.0),
            (Value::Opaque(a), Value::Opaque(b)) => {
                std::ptr::addr_eq(Arc::as_ptr(a), Arc::as_ptr(b))
            }
            _ => false,
        }
    }
}

impl From<()> for Value {
    fn from(_: ()) -> Self {
        Value::Unit
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Int(n)
    }
}

impl From<char> for Value {
    fn from(c: char) -> Self {
        Value::Char(c)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::str(s)
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::str(s)
    }
}

impl From<Comp> for Value {
    fn from(c: Comp) -> Self {
        Value::Comp(c)
    }
}

impl From<Fun> for Value {
    fn from(f: Fun) -> Self {
        Value::Func(f)
    }
}

type FunImpl = dyn Fn(Value) -> Result<Value> + Send + Sync;

/// A shared, fallible function on values.
#[derive(Clone)]
pub struct Fun(Arc<FunImpl>);

impl Fun {
    pub fn new(f: impl Fn(Value) -> Result<Value> + Send + Sync + 'static) -> Self {
        Fun(Arc::new(f))
    }

    pub fn identity() -> Self {
        Fun::new(Ok)
    }

    pub fn constant(v: Value) -> Self {
        Fun::new(move |_| Ok(v.clone()))
    }

    pub fn call(&self, v: Value) -> Result<Value> {
        guarded(|| (self.0)(v))
    }

    /// `self` first, then `next`.
    pub fn then(&self, next: &Fun) -> Fun {
        let (a, b) = (self.clone(), next.clone());
        Fun::new(move |v| b.call(a.call(v)?))
    }
}

impl fmt::Debug for Fun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<function>")
    }
}

/// A continuation slot: a function whose input tag is documented by the
/// owning effect kind and checked on every application.
#[derive(Clone)]
pub struct Cont {
    kind: &'static str,
    slot: &'static str,
    input: Tag,
    f: Fun,
}

impl Cont {
    pub fn new(kind: &'static str, slot: &'static str, input: Tag, f: Fun) -> Self {
        Cont {
            kind,
            slot,
            input,
            f,
        }
    }

    pub fn input(&self) -> Tag {
        self.input
    }

    pub fn slot(&self) -> &'static str {
        self.slot
    }

    pub fn fun(&self) -> &Fun {
        &self.f
    }

    pub fn apply(&self, v: Value) -> Result<Value> {
        if !self.input.accepts(&v) {
            if let Value::Bottom(e) = &v {
                return Err((**e).clone());
            }
            return Err(Error::mismatch(
                self.kind,
                self.slot,
                self.input.to_string(),
                v.tag_name(),
            ));
        }
        self.f.call(v)
    }

    /// Post-composes `g` onto the continuation's result.
    pub fn then(&self, g: &Fun) -> Cont {
        Cont {
            f: self.f.then(g),
            ..self.clone()
        }
    }
}

impl fmt::Debug for Cont {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}.{}: {} -> _>", self.kind, self.slot, self.input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn show_matches_haskell_conventions() {
        assert_eq!(Value::pair(5, 1).show(), "(5,1)");
        assert_eq!(Value::just("5").show(), "Just \"5\"");
        assert_eq!(Value::just(Value::just(-3)).show(), "Just (Just (-3))");
        assert_eq!(Value::pair('H', 'E').show(), "('H','E')");
        assert_eq!(Value::pair((), "post").show(), "((),\"post\")");
        assert_eq!(
            Value::list([1.into(), 2.into(), 3.into()]).show(),
            "[1,2,3]"
        );
        assert_eq!(Value::nothing().show(), "Nothing");
    }

    #[test]
    fn cont_rejects_mismatched_tag() {
        let k = Cont::new("state", "get", Tag::Int, Fun::identity());
        let err = k.apply(Value::str("x")).unwrap_err();
        assert_eq!(
            err,
            Error::mismatch("state", "get", "int", "string"),
            "{err}"
        );
        assert_eq!(k.apply(Value::Int(4)).unwrap(), Value::Int(4));
    }

    #[test]
    fn bottom_surfaces_its_error_when_inspected() {
        let b = Value::bottom(Error::UnboundVariable(3));
        assert_eq!(b.as_int().unwrap_err(), Error::UnboundVariable(3));
        let any = Cont::new("k", "x", Tag::Any, Fun::identity());
        assert!(any.apply(b.clone()).is_ok());
        let int = Cont::new("k", "x", Tag::Int, Fun::identity());
        assert_eq!(int.apply(b).unwrap_err(), Error::UnboundVariable(3));
    }

    #[test]
    fn depth_guard_reports_defined_error() {
        let prev = set_depth_limit(50);
        fn nest(n: usize) -> Fun {
            if n == 0 {
                Fun::identity()
            } else {
                let inner = nest(n - 1);
                Fun::new(move |v| inner.call(v))
            }
        }
        let deep = nest(200);
        let err = deep.call(Value::Unit).unwrap_err();
        assert_eq!(err, Error::DepthExceeded { limit: 50 });
        assert!(nest(10).call(Value::Unit).is_ok());
        set_depth_limit(prev);
    }
}
