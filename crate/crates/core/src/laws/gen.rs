//! Seeded generators. Each instance generator builds the specialized tree
//! and the corresponding [`Comp`] side by side, sharing every random
//! choice, so neither is derived from the other through an isomorphism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::iso::{FreeAlg, FreeLat, FreePar, FreeRes, FreeSc, FreeWrite, Gamma};
use super::tab::{enumerate, table};
use crate::effects::algebraic::{self, accum, or, tell, Alg, Choice, State};
use crate::effects::bracket::{brckt, h_get_c, prnt, Bracket};
use crate::effects::latent::{force, thunk, Latent, Thunking, THUNKING};
use crate::effects::parallel::{for_, For};
use crate::effects::scoped::{ask, censor_scoped, local, once, Local, Once};
use crate::effects::writer::{listen, pass, Decoration, Exec};
use crate::exc::{self, catch, throw, Exc};
use crate::free::{Comp, Domain, Node, Tree};
use crate::value::{Cont, Fun, Tag, Value};

pub const MAX_DEPTH: usize = 4;
const STOP: f64 = 0.3;
/// Upper bound on effect nodes per generated tree.
const NODE_BUDGET: usize = 120;

/// A generated leaf: its specialized and its computation form.
pub type Pair = (Value, Value);

/// A tabulated `a -> Comp`.
#[derive(Clone)]
pub struct Kleisli(Cont);

impl Kleisli {
    pub fn f(&self) -> impl Fn(Value) -> Comp + Send + Sync + Clone {
        let k = self.0.clone();
        move |x| match k.apply(x).and_then(|c| Ok(c.as_comp()?.clone())) {
            Ok(c) => c,
            Err(e) => Comp::abort(e),
        }
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
    budget: usize,
    force_node: bool,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            budget: NODE_BUDGET,
            force_node: false,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn int(&mut self) -> i64 {
        self.rng.gen_range(0..4)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.gen_bool(0.5)
    }

    pub fn ints(&mut self) -> Pair {
        let x = Value::Int(self.int());
        (x.clone(), x)
    }

    /// The next generated tree has an effect node at its root.
    pub fn rooted(&mut self) -> &mut Self {
        self.force_node = true;
        self
    }

    fn stop(&mut self, d: usize) -> bool {
        if std::mem::take(&mut self.force_node) && d > 0 {
            return false;
        }
        if d == 0 || self.budget == 0 || self.rng.gen_bool(STOP) {
            return true;
        }
        self.budget -= 1;
        false
    }

    fn tables(
        &mut self,
        kind: &'static str,
        slot: &'static str,
        input: Tag,
        dom: Vec<Value>,
        mut child: impl FnMut(&mut Self) -> Pair,
    ) -> (Cont, Cont) {
        let mut ts = Vec::new();
        let mut cs = Vec::new();
        for _ in &dom {
            let (t, c) = child(self);
            ts.push(t);
            cs.push(c);
        }
        (
            table(kind, slot, input, dom.clone(), ts),
            table(kind, slot, input, dom, cs),
        )
    }

    // ------------------------------------------------------------ Alg

    pub fn alg_state(&mut self, d: usize) -> (FreeAlg<State>, Comp) {
        if self.stop(d) {
            let x = Value::Int(self.int());
            return (FreeAlg::Var(x.clone()), Comp::pure(x));
        }
        let child = |g: &mut Gen| {
            let (t, c) = g.alg_state(d - 1);
            (Value::opaque(t), Value::Comp(c))
        };
        if self.coin() {
            let dom = enumerate(&Domain::Of(Tag::Int));
            let (kt, kc) = self.tables(algebraic::STATE, "get.k", Tag::Int, dom, child);
            (FreeAlg::Op(State::Get(kt)), Comp::node(Alg(State::Get(kc))))
        } else {
            let s = Value::Int(self.int());
            let (kt, kc) = self.tables(
                algebraic::STATE,
                "put.k",
                Tag::Unit,
                vec![Value::Unit],
                child,
            );
            (
                FreeAlg::Op(State::Put(s.clone(), kt)),
                Comp::node(Alg(State::Put(s, kc))),
            )
        }
    }

    pub fn alg_choice(&mut self, d: usize) -> (FreeAlg<Choice>, Comp) {
        if self.stop(d) {
            let x = Value::Int(self.int());
            return (FreeAlg::Var(x.clone()), Comp::pure(x));
        }
        if self.rng.gen_bool(0.2) {
            return (FreeAlg::Op(Choice::Fail), Comp::node(Alg(Choice::Fail)));
        }
        let branch = |g: &mut Gen, slot| {
            g.tables(algebraic::CHOICE, slot, Tag::Unit, vec![Value::Unit], |g| {
                let (t, c) = g.alg_choice(d - 1);
                (Value::opaque(t), Value::Comp(c))
            })
        };
        let (pt, pc) = branch(self, "or.p");
        let (qt, qc) = branch(self, "or.q");
        (
            FreeAlg::Op(Choice::Or(pt, qt)),
            Comp::node(Alg(Choice::Or(pc, qc))),
        )
    }

    /// Programs over throw and catch.
    pub fn exc(&mut self, d: usize) -> Comp {
        if self.stop(d) {
            return Comp::pure(self.int());
        }
        if self.rng.gen_bool(0.25) {
            return Comp::node(Exc::Throw);
        }
        let inner = Value::Comp(self.exc(d - 1));
        let dom = enumerate(&Domain::Of(Tag::Maybe));
        let (_, k) = self.tables(exc::KIND, "catch.k", Tag::Maybe, dom, |g| {
            let c = Value::Comp(g.exc(d - 1));
            (Value::Unit, c)
        });
        Comp::node(Exc::Catch { inner, k })
    }

    /// A continuation `Int -> Comp` given by a table of generated trees.
    pub fn kleisli(&mut self, mut tree: impl FnMut(&mut Gen) -> Comp) -> Kleisli {
        let dom = enumerate(&Domain::Of(Tag::Int));
        let (_, k) = self.tables("kleisli", "k", Tag::Any, dom, |g| {
            (Value::Unit, Value::Comp(tree(g)))
        });
        Kleisli(k)
    }

    // ------------------------------------------------------------ Sc

    /// `with_local` also draws `local` scopes; otherwise only `once`.
    pub fn sc(
        &mut self,
        d: usize,
        with_local: bool,
        leaf: &mut dyn FnMut(&mut Gen) -> Pair,
    ) -> (FreeSc, Comp) {
        if self.stop(d) {
            let (a, b) = leaf(self);
            return (FreeSc::Var(a), Comp::pure(b));
        }
        let (bt, bc) = self.sc(d - 1, with_local, &mut |g: &mut Gen| {
            let (t, c) = g.sc(d - 1, with_local, leaf);
            (Value::opaque(t), Value::Comp(c))
        });
        let g = if with_local && self.coin() {
            let n = self.rng.gen_range(0..3);
            let env = (0..n).map(|_| Value::Int(self.int())).collect::<Vec<_>>();
            Gamma::Local(Local {
                env: Value::list(env),
                body: Value::Unit,
            })
        } else {
            Gamma::Once(Once(Value::Unit))
        };
        (
            FreeSc::Enter(g.with_body(Value::opaque(bt))),
            Comp::from_node(g.with_body(Value::Comp(bc)).node()),
        )
    }

    // ------------------------------------------------------------ Par

    pub fn par(&mut self, d: usize, leaf: &mut dyn FnMut(&mut Gen) -> Pair) -> (FreePar, Comp) {
        if self.stop(d) {
            let (a, b) = leaf(self);
            return (FreePar::Var(a), Comp::pure(b));
        }
        let n = self.rng.gen_range(0..=3);
        let (mut its_t, mut its_c) = (Vec::new(), Vec::new());
        for _ in 0..n {
            let (t, c) = self.par(d - 1, &mut Gen::ints);
            its_t.push(Value::opaque(t));
            its_c.push(Value::Comp(c));
        }
        let dom = enumerate(&Domain::ListOf(n, Tag::Int));
        let (kt, kc) = self.tables(
            crate::effects::parallel::KIND,
            "for.k",
            Tag::List,
            dom,
            |g| {
                let (t, c) = g.par(d - 1, leaf);
                (Value::opaque(t), Value::Comp(c))
            },
        );
        (
            FreePar::For {
                iters: its_t,
                k: kt,
            },
            Comp::node(For {
                iters: its_c,
                k: kc,
            }),
        )
    }

    // ------------------------------------------------------------ Write

    pub fn write(&mut self, d: usize, leaf: &mut dyn FnMut(&mut Gen) -> Pair) -> (FreeWrite, Comp) {
        if self.stop(d) {
            let (a, b) = leaf(self);
            return (FreeWrite::Var(a), Comp::pure(b));
        }
        let (bt, bc) = self.write(d - 1, &mut |g: &mut Gen| g.decoration(d - 1, leaf));
        (
            FreeWrite::Exec(Value::opaque(bt)),
            Comp::node(Exec(Value::Comp(bc))),
        )
    }

    fn decoration(&mut self, d: usize, leaf: &mut dyn FnMut(&mut Gen) -> Pair) -> Pair {
        let mut seed = |g: &mut Gen| {
            let (t, c) = g.write(d, leaf);
            (Value::opaque(t), Value::Comp(c))
        };
        if self.coin() {
            let dom = enumerate(&Domain::Of(Tag::Str));
            let (ht, hc) = self.tables(crate::effects::writer::KIND, "listen", Tag::Str, dom, seed);
            (
                Decoration::Listen(ht.fun().clone()).into_value(),
                Decoration::Listen(hc.fun().clone()).into_value(),
            )
        } else {
            let dom = enumerate(&Domain::Of(Tag::Str));
            let outs = dom
                .iter()
                .map(|_| Value::str(["", "x", "yy"][self.rng.gen_range(0..3)]))
                .collect();
            let f = table(crate::effects::writer::KIND, "pass.f", Tag::Str, dom, outs)
                .fun()
                .clone();
            let (st, sc) = seed(self);
            (
                Decoration::Pass(f.clone(), st).into_value(),
                Decoration::Pass(f, sc).into_value(),
            )
        }
    }

    // ------------------------------------------------------------ Lat

    pub fn lat(&mut self, d: usize, leaf: &mut dyn FnMut(&mut Gen) -> Pair) -> (FreeLat, Comp) {
        if self.stop(d) {
            let (a, b) = leaf(self);
            return (FreeLat::Leaf(a), Comp::pure(b));
        }
        let dom = enumerate(&Domain::Of(Tag::Int));
        let child = |g: &mut Gen| {
            let (t, c) = g.lat(d - 1, leaf);
            (Value::opaque(t), Value::Comp(c))
        };
        if self.coin() {
            let (st_t, st_c) = self.lat(d - 1, &mut Gen::ints);
            let (kt, kc) = self.tables(THUNKING, "thunk.k", Tag::Int, dom, child);
            (
                FreeLat::Node {
                    op: Thunking::Thunk,
                    l: Value::Unit,
                    st: Some(Fun::constant(Value::opaque(st_t))),
                    k: kt,
                },
                Comp::node(Latent {
                    op: Thunking::Thunk,
                    l: Value::Unit,
                    st: Some(Fun::constant(Value::Comp(st_c))),
                    k: kc,
                }),
            )
        } else {
            let op = Thunking::Force(self.rng.gen_range(0..3));
            let (kt, kc) = self.tables(THUNKING, "force.k", Tag::Any, dom, child);
            (
                FreeLat::Node {
                    op,
                    l: Value::Unit,
                    st: None,
                    k: kt,
                },
                Comp::node(Latent {
                    op,
                    l: Value::Unit,
                    st: None,
                    k: kc,
                }),
            )
        }
    }

    // ------------------------------------------------------------ Res

    /// Trees in canonical form: every `use` is `return u`.
    pub fn res(&mut self, d: usize, leaf: &mut dyn FnMut(&mut Gen) -> Pair) -> (FreeRes, Comp) {
        if self.stop(d) {
            let (a, b) = leaf(self);
            return (FreeRes::Var(a), Comp::pure(b));
        }
        let (rt, rc) = self.res(d - 1, &mut |g: &mut Gen| {
            let (rel_t, rel_c) = g.res(d - 1, &mut |_| (Value::Unit, Value::Unit));
            let (use_t, use_c) = g.res(d - 1, leaf);
            (
                Value::pair(Value::opaque(rel_t), Value::opaque(use_t)),
                Value::pair(
                    Value::Comp(rel_c),
                    Value::Comp(Comp::pure(Value::Comp(use_c))),
                ),
            )
        });
        (
            FreeRes::Bracket(Value::opaque(rt)),
            Comp::node(Bracket(Value::Comp(rc))),
        )
    }

    // ------------------------------------------------------------ nodes

    /// A node of the given kind built with the public constructors, with
    /// generated subcomputations.
    pub fn node_of(&mut self, kind: &str) -> Node {
        let sub = |g: &mut Gen| g.alg_state(2).1;
        let c = sub(self);
        let k = self.kleisli(sub).f();
        let comp = match kind {
            algebraic::STATE => self.rooted().alg_state(2).1,
            algebraic::CHOICE => {
                let d = sub(self);
                or(c, d)
            }
            algebraic::ACCUM => accum(self.int()).then(c),
            algebraic::TELL => tell("w").then(c),
            crate::effects::scoped::READER => {
                ask().bind(move |env| k(Value::Int(env.as_list().map_or(0, |l| l.len() as i64))))
            }
            crate::effects::bracket::TELETYPE => {
                if self.coin() {
                    prnt("p").then(c)
                } else {
                    h_get_c(0).bind(move |_| c.clone())
                }
            }
            crate::effects::scoped::ONCE => once(&c).bind(k),
            crate::effects::scoped::LOCAL => local(vec![Value::Int(self.int())], &c).bind(k),
            crate::effects::scoped::CENSOR => censor_scoped(Fun::identity(), &c).bind(k),
            crate::effects::parallel::KIND => {
                let d = sub(self);
                for_(vec![c, d])
                    .bind(move |xs| k(Value::Int(xs.as_list().map_or(0, |l| l.len() as i64))))
            }
            crate::effects::writer::KIND => {
                if self.coin() {
                    listen(&c).bind(move |_| k(Value::Int(0)))
                } else {
                    pass(&c.map(|x| Ok(Value::pair(x, Value::Func(Fun::identity()))))).bind(k)
                }
            }
            THUNKING => {
                if self.coin() {
                    thunk(&c).bind(k)
                } else {
                    force(self.rng.gen_range(0..3)).bind(k)
                }
            }
            crate::effects::bracket::KIND => {
                let rel = prnt("rel");
                brckt(&c.map(move |x| {
                    Ok(Value::pair(
                        Value::Comp(rel.clone()),
                        Value::Comp(Comp::pure(x)),
                    ))
                }))
            }
            exc::KIND => {
                if self.coin() {
                    throw()
                } else {
                    catch(c, move |m| k(m.unwrap_or(Value::Int(0))))
                }
            }
            other => panic!("no generator for kind {other}"),
        };
        match comp.tree() {
            Tree::Node(n) => n.clone(),
            Tree::Pure(_) => unreachable!("constructors always build a node"),
        }
    }
}
