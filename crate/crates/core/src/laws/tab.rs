//! Tabulation: a computation with its continuations replaced by finite
//! lookup tables, so two trees can be compared structurally.

use std::cell::Cell;
use std::fmt;

use serde::Serialize;

use crate::free::{Comp, Domain, NodeView, Slot, Tree};
use crate::value::{Cont, Fun, Tag, Value};

/// Nodes visited per tabulation before the rest is cut off.
const FUEL: usize = 400_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Tab {
    Leaf(String),
    Node {
        label: String,
        children: Vec<(String, Tab)>,
    },
}

/// Where two tabulations first disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub path: String,
    pub left: String,
    pub right: String,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "at {}: {} vs {}",
            self.path,
            clip(&self.left),
            clip(&self.right)
        )
    }
}

fn clip(s: &str) -> String {
    const MAX: usize = 160;
    if s.chars().count() <= MAX {
        s.to_string()
    } else {
        let head: String = s.chars().take(MAX).collect();
        format!("{head}...")
    }
}

impl Tab {
    fn label(&self) -> &str {
        match self {
            Tab::Leaf(s) => s,
            Tab::Node { label, .. } => label,
        }
    }

    /// The first position, in pre-order, where `self` and `other` differ.
    pub fn first_mismatch(&self, other: &Tab) -> Option<Mismatch> {
        self.mismatch_at(other, "root".to_string())
    }

    fn mismatch_at(&self, other: &Tab, path: String) -> Option<Mismatch> {
        let shallow = |path: String| Mismatch {
            path,
            left: self.to_string(),
            right: other.to_string(),
        };
        match (self, other) {
            (Tab::Leaf(a), Tab::Leaf(b)) => (a != b).then(|| shallow(path)),
            (
                Tab::Node {
                    label: la,
                    children: ca,
                },
                Tab::Node {
                    label: lb,
                    children: cb,
                },
            ) => {
                if la != lb || ca.len() != cb.len() {
                    return Some(shallow(path));
                }
                ca.iter().zip(cb).find_map(|((na, ta), (nb, tb))| {
                    if na != nb {
                        Some(shallow(path.clone()))
                    } else {
                        ta.mismatch_at(tb, format!("{path}/{}.{na}", la))
                    }
                })
            }
            _ => Some(Mismatch {
                path,
                left: self.label().to_string(),
                right: other.label().to_string(),
            }),
        }
    }
}

impl fmt::Display for Tab {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tab::Leaf(s) => f.write_str(s),
            Tab::Node { label, children } => {
                write!(f, "({label}")?;
                for (name, c) in children {
                    write!(f, " {name}={c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Representative elements of a domain, at most four.
pub fn enumerate(d: &Domain) -> Vec<Value> {
    match d {
        Domain::Of(tag) => enumerate_tag(*tag),
        Domain::ListOf(n, tag) => {
            let base = enumerate_tag(*tag);
            let len = base.len();
            let mut out: Vec<Value> = Vec::new();
            let candidates = [
                (0..*n).map(|_| base[0].clone()).collect::<Vec<_>>(),
                (0..*n).map(|_| base[len - 1].clone()).collect(),
                (0..*n).map(|i| base[i % len].clone()).collect(),
                (0..*n)
                    .map(|i| base[(len - 1 - i % len) % len].clone())
                    .collect(),
            ];
            for c in candidates {
                let v = Value::list(c);
                if !out.iter().any(|o| o.show() == v.show()) {
                    out.push(v);
                }
            }
            out
        }
    }
}

fn enumerate_tag(tag: Tag) -> Vec<Value> {
    let ints = || (0..4).map(Value::Int).collect();
    match tag {
        Tag::Unit => vec![Value::Unit],
        Tag::Bool => vec![Value::Bool(false), Value::Bool(true)],
        Tag::Int | Tag::Any => ints(),
        Tag::Char => "abHE".chars().map(Value::Char).collect(),
        Tag::Str => ["", "a", "b", "ab"].into_iter().map(Value::str).collect(),
        Tag::Maybe => vec![
            Value::nothing(),
            Value::just(0),
            Value::just(1),
            Value::just(2),
        ],
        Tag::List => vec![
            Value::list([]),
            Value::list([Value::Int(0)]),
            Value::list([Value::Int(1)]),
            Value::list([Value::Int(0), Value::Int(1)]),
        ],
        Tag::Pair => vec![
            Value::pair(0, 0),
            Value::pair(0, 1),
            Value::pair(1, 0),
            Value::pair(1, 1),
        ],
        _ => vec![Value::Unit],
    }
}

/// A continuation backed by a table: `dom[i] ↦ outs[i]`. Inputs outside
/// the domain are reduced onto it by hashing their rendering.
pub fn table(
    kind: &'static str,
    slot: &'static str,
    input: Tag,
    dom: Vec<Value>,
    outs: Vec<Value>,
) -> Cont {
    assert_eq!(
        dom.len(),
        outs.len(),
        "table domain and range differ in length"
    );
    assert!(!dom.is_empty(), "empty table");
    let keys: Vec<String> = dom.iter().map(Value::show).collect();
    Cont::new(
        kind,
        slot,
        input,
        Fun::new(move |x| {
            let s = x.show();
            let i = keys
                .iter()
                .position(|k| *k == s)
                .unwrap_or_else(|| fnv(&s) % keys.len());
            Ok(outs[i].clone())
        }),
    )
}

fn fnv(s: &str) -> usize {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h as usize
}

pub fn tab_comp(c: &Comp) -> Tab {
    Tabulator::new().comp(c)
}

pub fn tab_value(v: &Value) -> Tab {
    Tabulator::new().value(v)
}

struct Tabulator {
    fuel: Cell<usize>,
}

impl Tabulator {
    fn new() -> Self {
        Tabulator {
            fuel: Cell::new(FUEL),
        }
    }

    fn burn(&self) -> bool {
        let f = self.fuel.get();
        if f == 0 {
            return false;
        }
        self.fuel.set(f - 1);
        true
    }

    fn comp(&self, c: &Comp) -> Tab {
        if !self.burn() {
            return Tab::Leaf("...".into());
        }
        match c.tree() {
            Tree::Pure(v) => Tab::Node {
                label: "pure".into(),
                children: vec![("x".into(), self.value(v))],
            },
            Tree::Node(n) => self.view(&n.view()),
        }
    }

    fn view(&self, v: &NodeView) -> Tab {
        let mut children = Vec::new();
        let mut conts = 0;
        for s in &v.slots {
            match s {
                Slot::Value(name, x) => children.push((name.to_string(), self.value(x))),
                Slot::Cont(k, d) => {
                    for x in enumerate(d) {
                        let name = format!("k{conts}[{}]", x.show());
                        children.push((name, self.result(k.apply(x))));
                    }
                    conts += 1;
                }
            }
        }
        Tab::Node {
            label: format!("{}:{}", v.kind, v.label),
            children,
        }
    }

    fn result(&self, r: crate::Result<Value>) -> Tab {
        match r {
            Ok(v) => self.value(&v),
            Err(e) => Tab::Leaf(format!("error: {e}")),
        }
    }

    fn value(&self, v: &Value) -> Tab {
        if !self.burn() {
            return Tab::Leaf("...".into());
        }
        let node = |label: &str, children: Vec<(String, Tab)>| Tab::Node {
            label: label.into(),
            children,
        };
        match v {
            Value::Comp(c) => self.comp(c),
            Value::Pair(p) => node(
                "pair",
                vec![
                    ("0".into(), self.value(&p.0)),
                    ("1".into(), self.value(&p.1)),
                ],
            ),
            Value::List(xs) => node(
                "list",
                xs.iter()
                    .enumerate()
                    .map(|(i, x)| (i.to_string(), self.value(x)))
                    .collect(),
            ),
            Value::Maybe(Some(x)) => node("just", vec![("0".into(), self.value(x))]),
            Value::Func(f) => node(
                "fn",
                enumerate_tag(Tag::Int)
                    .into_iter()
                    .map(|x| (x.show(), self.result(f.call(x))))
                    .collect(),
            ),
            Value::Opaque(o) => match o.view() {
                Some(view) => self.view(&view),
                None => Tab::Leaf(o.render()),
            },
            Value::Bottom(e) => Tab::Leaf(format!("bottom: {e}")),
            other => Tab::Leaf(other.show()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effects::algebraic::{get, or, put};

    #[test]
    fn equal_programs_tabulate_equally() {
        let a = get().bind(put);
        let b = get().bind(put);
        assert_eq!(tab_comp(&a), tab_comp(&b));
    }

    #[test]
    fn mismatch_points_into_the_tree() {
        let a = or(Comp::pure(1), Comp::pure(2));
        let b = or(Comp::pure(1), Comp::pure(3));
        let m = tab_comp(&a).first_mismatch(&tab_comp(&b)).unwrap();
        assert!(m.path.contains("k1"), "{m}");
        assert_eq!((m.left.as_str(), m.right.as_str()), ("2", "3"));
    }

    #[test]
    fn continuation_differences_are_visible() {
        let a = get().bind(Comp::pure);
        let b = get().bind(|_| Comp::pure(0));
        assert!(tab_comp(&a).first_mismatch(&tab_comp(&b)).is_some());
    }

    #[test]
    fn table_is_faithful_on_its_domain() {
        let dom = enumerate(&Domain::Of(Tag::Int));
        let outs: Vec<Value> = dom
            .iter()
            .map(|x| Value::Int(x.as_int().unwrap() * 7))
            .collect();
        let k = table("t", "k", Tag::Int, dom.clone(), outs.clone());
        for (x, y) in dom.into_iter().zip(outs) {
            assert_eq!(k.apply(x).unwrap().show(), y.show());
        }
        // Off-domain inputs still land somewhere in the range.
        assert!(k.apply(Value::Int(99)).is_ok());
    }

    #[test]
    fn list_domains_have_the_right_length() {
        for v in enumerate(&Domain::ListOf(3, Tag::Int)) {
            assert_eq!(v.as_list().unwrap().len(), 3);
        }
        assert_eq!(enumerate(&Domain::ListOf(0, Tag::Int)).len(), 1);
    }
}
