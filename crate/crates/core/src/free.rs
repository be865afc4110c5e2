//! The free monad over higher-order signatures and its fold.
//!
//! A [`Comp`] is either a pure leaf or an effect node. Each node is an
//! [`Effect`]: a higher-order functor applied to the free monad itself,
//! exposing two maps. [`Effect::map_continuation`] is the functor action
//! on the result position (`fmap`), [`Effect::map_inner`] is the action
//! on the inner-computation position (`hmap`).

use std::any::Any;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::value::{guarded, Cont, Fun, Tag, Value};

/// Which family of higher-order functor a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instance {
    Algebraic,
    Scoped,
    Parallel,
    Writer,
    Latent,
    Bracket,
    Exception,
    Internal,
}

/// A higher-order signature applied to an inner functor and a result
/// type. Before a fold the inner and continuation slots hold computations;
/// inside an algebra they hold carrier values.
pub trait Effect: Any + Send + Sync {
    fn kind(&self) -> &'static str;

    fn instance(&self) -> Instance;

    /// Applies `f` at every continuation slot's codomain.
    fn map_continuation(&self, f: &Fun) -> Node;

    /// Applies `t` to every inner-computation slot.
    fn map_inner(&self, t: &Fun) -> Result<Node>;

    fn view(&self) -> NodeView;

    /// Checks parameter tags against the kind's slot schema.
    fn validate(&self) -> Result<()> {
        Ok(())
    }

    fn as_any(&self) -> &dyn Any;
}

pub type Node = Arc<dyn Effect>;

/// `prj`: the node as a concrete signature, if it is one.
pub fn project<T: Effect>(node: &Node) -> Option<&T> {
    node.as_any().downcast_ref::<T>()
}

/// Finite domain of a continuation slot, used when tabulating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Domain {
    Of(Tag),
    /// Collections of exactly `n` elements of the given tag.
    ListOf(usize, Tag),
}

#[derive(Clone)]
pub enum Slot {
    Value(&'static str, Value),
    Cont(Cont, Domain),
}

/// Structural description of a node: the ground label and its slots in
/// a fixed order.
#[derive(Clone)]
pub struct NodeView {
    pub kind: &'static str,
    pub label: String,
    pub slots: Vec<Slot>,
}

impl NodeView {
    pub fn new(kind: &'static str, label: impl Into<String>) -> Self {
        NodeView {
            kind,
            label: label.into(),
            slots: Vec::new(),
        }
    }

    pub fn value(mut self, name: &'static str, v: Value) -> Self {
        self.slots.push(Slot::Value(name, v));
        self
    }

    pub fn cont(mut self, k: Cont, domain: Domain) -> Self {
        self.slots.push(Slot::Cont(k, domain));
        self
    }
}

pub enum Tree {
    Pure(Value),
    Node(Node),
}

/// A computation: a finite tree of pure leaves and effect nodes.
#[derive(Clone)]
pub struct Comp(Arc<Tree>);

type Kleisli = Arc<dyn Fn(Value) -> Result<Comp> + Send + Sync>;

impl Comp {
    pub fn pure(v: impl Into<Value>) -> Self {
        Comp(Arc::new(Tree::Pure(v.into())))
    }

    /// Wraps a node built by a typed smart constructor.
    pub fn node<E: Effect>(e: E) -> Self {
        Comp(Arc::new(Tree::Node(Arc::new(e))))
    }

    pub fn from_node(n: Node) -> Self {
        Comp(Arc::new(Tree::Node(n)))
    }

    /// Wraps an arbitrary node after checking it against its schema.
    pub fn op(n: Node) -> Result<Self> {
        n.validate()?;
        Ok(Comp::from_node(n))
    }

    /// A stuck computation; folding it yields `err`.
    pub fn abort(err: Error) -> Self {
        Comp::node(Abort(err))
    }

    pub fn tree(&self) -> &Tree {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Comp) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn is_pure(&self) -> bool {
        matches!(*self.0, Tree::Pure(_))
    }

    fn bind_k(&self, k: &Kleisli) -> Comp {
        match &*self.0 {
            Tree::Pure(v) => k(v.clone()).unwrap_or_else(Comp::abort),
            Tree::Node(n) => {
                if project::<Abort>(n).is_some() {
                    return self.clone();
                }
                let k = k.clone();
                let graft = Fun::new(move |c| Ok(Value::Comp(c.as_comp()?.bind_k(&k))));
                Comp::from_node(n.map_continuation(&graft))
            }
        }
    }

    /// Monadic bind: leaves become `k(v)`, nodes get `k` grafted into
    /// their continuation slots. Inner-computation slots are untouched.
    pub fn bind(&self, k: impl Fn(Value) -> Comp + Send + Sync + 'static) -> Comp {
        self.bind_k(&(Arc::new(move |v| Ok(k(v))) as Kleisli))
    }

    /// Like [`Comp::bind`]; an `Err` from `k` becomes an abort node.
    pub fn try_bind(&self, k: impl Fn(Value) -> Result<Comp> + Send + Sync + 'static) -> Comp {
        self.bind_k(&(Arc::new(k) as Kleisli))
    }

    pub fn then(&self, next: Comp) -> Comp {
        self.bind(move |_| next.clone())
    }

    /// `fmap`.
    pub fn map(&self, f: impl Fn(Value) -> Result<Value> + Send + Sync + 'static) -> Comp {
        self.try_bind(move |v| Ok(Comp::pure(f(v)?)))
    }

    pub fn map_fun(&self, f: &Fun) -> Comp {
        let f = f.clone();
        self.map(move |v| f.call(v))
    }

    /// `join` for a computation whose result is itself a computation.
    pub fn join(&self) -> Comp {
        self.try_bind(|v| Ok(v.as_comp()?.clone()))
    }
}

impl fmt::Debug for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Tree::Pure(v) => write!(f, "Pure({v:?})"),
            Tree::Node(n) => write!(f, "Node({})", n.view().label),
        }
    }
}

/// `fmap` over a value that must hold a computation. Mismatches become
/// bottom so that continuation mapping stays total.
pub(crate) fn map_comp_value(v: &Value, f: &Fun) -> Value {
    match v.as_comp() {
        Ok(c) => Value::Comp(c.map_fun(f)),
        Err(e) => Value::bottom(e),
    }
}

/// Result of a computation that performs no effects.
pub fn run(m: &Comp) -> Result<Value> {
    match m.tree() {
        Tree::Pure(v) => Ok(v.clone()),
        Tree::Node(n) => match project::<Abort>(n) {
            Some(Abort(e)) => Err(e.clone()),
            None => Err(Error::unhandled(n.kind())),
        },
    }
}

/// Stuck node carrying an error out of a continuation.
#[derive(Clone)]
pub struct Abort(pub Error);

impl Effect for Abort {
    fn kind(&self) -> &'static str {
        "abort"
    }

    fn instance(&self) -> Instance {
        Instance::Internal
    }

    fn map_continuation(&self, _f: &Fun) -> Node {
        Arc::new(self.clone())
    }

    fn map_inner(&self, _t: &Fun) -> Result<Node> {
        Ok(Arc::new(self.clone()))
    }

    fn view(&self) -> NodeView {
        NodeView::new("abort", format!("abort {}", self.0))
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

pub type Algebra = Arc<dyn Fn(&Node) -> Result<Value> + Send + Sync>;

/// A fold-style handler into a pointed carrier.
///
/// `unit` is the carrier's `η`; `generator` interprets the answer of the
/// outer computation; `algebra` interprets one node whose slots are
/// already carrier values and serves both the outer and inner folds.
#[derive(Clone)]
pub struct Handler {
    unit: Fun,
    generator: Fun,
    algebra: Algebra,
}

impl Handler {
    pub fn new(
        unit: Fun,
        generator: Fun,
        algebra: impl Fn(&Node) -> Result<Value> + Send + Sync + 'static,
    ) -> Self {
        Handler {
            unit,
            generator,
            algebra: Arc::new(algebra),
        }
    }

    /// A handler whose generator is the unit itself.
    pub fn pointed(
        unit: Fun,
        algebra: impl Fn(&Node) -> Result<Value> + Send + Sync + 'static,
    ) -> Self {
        Handler::new(unit.clone(), unit, algebra)
    }

    pub fn with_generator(&self, generator: Fun) -> Self {
        Handler {
            generator,
            ..self.clone()
        }
    }

    pub fn unit(&self) -> &Fun {
        &self.unit
    }

    pub fn generator(&self) -> &Fun {
        &self.generator
    }

    /// Applies the algebra to a node whose slots already hold carrier
    /// values.
    pub fn apply_algebra(&self, node: &Node) -> Result<Value> {
        (self.algebra)(node)
    }

    pub fn fold(&self, m: &Comp) -> Result<Value> {
        self.fold_with(&self.generator, m)
    }

    /// The inner fold: the same algebra with `η` as generator.
    pub fn fold_inner(&self, m: &Comp) -> Result<Value> {
        self.fold_with(&self.unit, m)
    }

    fn fold_with(&self, gen: &Fun, m: &Comp) -> Result<Value> {
        match m.tree() {
            Tree::Pure(v) => gen.call(v.clone()),
            Tree::Node(n) => guarded(|| {
                if let Some(Abort(e)) = project::<Abort>(n) {
                    return Err(e.clone());
                }
                let (h, g) = (self.clone(), gen.clone());
                let outer = Fun::new(move |c| h.fold_with(&g, c.as_comp()?));
                let h2 = self.clone();
                let inner = Fun::new(move |c| h2.fold_inner(c.as_comp()?));
                let node = n.map_continuation(&outer).map_inner(&inner)?;
                (self.algebra)(&node)
            }),
        }
    }
}

/// `fold gen alg`.
pub fn fold(h: &Handler, m: &Comp) -> Result<Value> {
    h.fold(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A node of `k1 ⊕ k2`: which summand it belongs to, and the node itself.
#[derive(Clone)]
pub struct CoproductNode {
    pub side: Side,
    pub inner: Node,
}

/// Membership test for the left summand of a binary coproduct.
pub trait Summand: Send + Sync {
    fn contains(&self, node: &Node) -> bool;
}

/// Exactly one concrete signature.
pub struct Only<T>(std::marker::PhantomData<fn() -> T>);

impl<T: Effect> Only<T> {
    pub fn new() -> Self {
        Only(std::marker::PhantomData)
    }
}

impl<T: Effect> Default for Only<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Effect> Summand for Only<T> {
    fn contains(&self, node: &Node) -> bool {
        node.as_any().is::<T>()
    }
}

impl Summand for Instance {
    fn contains(&self, node: &Node) -> bool {
        node.instance() == *self
    }
}

/// Nodes whose kind id is listed.
pub struct Kinds(pub Vec<&'static str>);

impl Summand for Kinds {
    fn contains(&self, node: &Node) -> bool {
        self.0.contains(&node.kind())
    }
}

/// `a + b` as a single summand.
pub struct Either<A, B>(pub A, pub B);

impl<A: Summand, B: Summand> Summand for Either<A, B> {
    fn contains(&self, node: &Node) -> bool {
        self.0.contains(node) || self.1.contains(node)
    }
}

impl CoproductNode {
    pub fn inject(side: Side, inner: Node) -> Self {
        CoproductNode { side, inner }
    }

    /// `In` when the left summand owns the node, `Out` otherwise.
    pub fn classify(left: &dyn Summand, node: &Node) -> Self {
        let side = if left.contains(node) {
            Side::Left
        } else {
            Side::Right
        };
        CoproductNode::inject(side, node.clone())
    }
}

/// The separator: `(lft ⍟ rht) (In op) = lft op`, `(lft ⍟ rht) (Out op) = rht op`.
pub fn case_split<T>(
    lft: impl Fn(&Node) -> T,
    rht: impl Fn(&Node) -> T,
) -> impl Fn(&CoproductNode) -> T {
    move |c| match c.side {
        Side::Left => lft(&c.inner),
        Side::Right => rht(&c.inner),
    }
}

/// Classifies against `left` and dispatches through [`case_split`].
pub fn separate<S: Summand, T>(
    left: S,
    lft: impl Fn(&Node) -> T,
    rht: impl Fn(&Node) -> T,
) -> impl Fn(&Node) -> T {
    let split = case_split(lft, rht);
    move |n| split(&CoproductNode::classify(&left, n))
}

/// Role of a slot in a kind's schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SlotRole {
    Param,
    Inner,
    Continuation,
}

/// One documented slot: which operation, which position, and the tag of
/// the value found (params) or expected (continuation inputs) there.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SlotSchema {
    pub op: &'static str,
    pub slot: &'static str,
    pub role: SlotRole,
    pub tag: &'static str,
}

/// Registry entry for an effect kind.
#[derive(Debug, Clone, Copy)]
pub struct KindInfo {
    pub kind: &'static str,
    pub instance: Instance,
    pub slots: &'static [SlotSchema],
}

pub(crate) const fn slot(
    op: &'static str,
    slot: &'static str,
    role: SlotRole,
    tag: &'static str,
) -> SlotSchema {
    SlotSchema {
        op,
        slot,
        role,
        tag,
    }
}

/// Checks a parameter against the tag its schema documents.
pub(crate) fn expect_tag(
    kind: &'static str,
    slot: &'static str,
    tag: Tag,
    v: &Value,
) -> Result<()> {
    if tag.accepts(v) {
        Ok(())
    } else {
        Err(Error::mismatch(
            kind,
            slot,
            tag.to_string(),
            v.tag().to_string(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone)]
    struct Probe(&'static str);

    impl Effect for Probe {
        fn kind(&self) -> &'static str {
            self.0
        }
        fn instance(&self) -> Instance {
            Instance::Algebraic
        }
        fn map_continuation(&self, _f: &Fun) -> Node {
            Arc::new(self.clone())
        }
        fn map_inner(&self, _t: &Fun) -> Result<Node> {
            Ok(Arc::new(self.clone()))
        }
        fn view(&self) -> NodeView {
            NodeView::new(self.0, self.0)
        }
        fn as_any(&self) -> &dyn Any {
            self
        }
    }

    #[test]
    fn bind_on_leaf_is_application() {
        let m = Comp::pure(3).bind(|x| Comp::pure(x.as_int().unwrap() + 1));
        assert_eq!(run(&m).unwrap(), Value::Int(4));
        let m = Comp::pure("x").bind(Comp::pure);
        assert_eq!(run(&m).unwrap(), Value::str("x"));
    }

    #[test]
    fn fold_on_leaf_uses_generator() {
        let h = Handler::new(
            Fun::new(|v| Ok(Value::just(v))),
            Fun::new(|v| Ok(Value::just(v))),
            |n| Err(Error::unhandled(n.kind())),
        );
        assert_eq!(h.fold(&Comp::pure(5)).unwrap(), Value::just(5));
    }

    #[test]
    fn unknown_kind_names_itself() {
        let h = Handler::pointed(Fun::identity(), |n| Err(Error::unhandled(n.kind())));
        let err = h.fold(&Comp::node(Probe("mystery"))).unwrap_err();
        assert_eq!(err.to_string(), "unhandled effect `mystery`");
        assert_eq!(
            run(&Comp::node(Probe("mystery"))).unwrap_err(),
            Error::unhandled("mystery")
        );
    }

    #[test]
    fn abort_survives_bind_and_surfaces_in_fold() {
        let m = Comp::abort(Error::OnceEmptyScope).bind(|_| Comp::pure(1));
        let h = Handler::pointed(Fun::identity(), |_| Ok(Value::Unit));
        assert_eq!(h.fold(&m).unwrap_err(), Error::OnceEmptyScope);
        let m = Comp::pure(1).try_bind(|_| Err(Error::ApplyNonFunction));
        assert_eq!(run(&m).unwrap_err(), Error::ApplyNonFunction);
    }

    #[test]
    fn case_split_dispatches_on_side() {
        let split = case_split(
            |n: &Node| format!("L:{}", n.kind()),
            |n: &Node| format!("R:{}", n.kind()),
        );
        let a: Node = Arc::new(Probe("a"));
        assert_eq!(split(&CoproductNode::inject(Side::Left, a.clone())), "L:a");
        assert_eq!(split(&CoproductNode::inject(Side::Right, a)), "R:a");
    }

    #[test]
    fn three_summands_right_nested() {
        // a ⊕ (b ⊕ c), every injection reaches its own algebra.
        let inner = separate(Kinds(vec!["b"]), |_: &Node| "b", |_: &Node| "c");
        let outer = separate(Kinds(vec!["a"]), |_: &Node| "a", inner);
        for k in ["a", "b", "c"] {
            let n: Node = Arc::new(Probe(k));
            assert_eq!(outer(&n), k);
        }
    }
}
