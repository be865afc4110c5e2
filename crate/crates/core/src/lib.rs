//! Higher-order effects over a single free monad.
//!
//! Every effect family is a higher-order functor, and one generic fold
//! interprets them all. See [`free`] for the kernel and [`effects`] for the
//! concrete families.

pub mod effects;
pub mod error;
pub mod exc;
pub mod free;
pub mod laws;
pub mod value;

pub use error::{Error, Result};
pub use free::{fold, run, Comp, Effect, Handler, Instance, KindInfo, Node, NodeView, Tree};
pub use value::{depth_limit, set_depth_limit, Cont, Fun, Tag, Value};

/// Every effect kind the crate defines, in a stable order.
pub fn registry() -> Vec<KindInfo> {
    use effects::{algebraic, bracket, latent, parallel, scoped, writer};
    vec![
        algebraic::STATE_INFO,
        algebraic::CHOICE_INFO,
        algebraic::ACCUM_INFO,
        algebraic::TELL_INFO,
        scoped::READER_INFO,
        scoped::ONCE_INFO,
        scoped::LOCAL_INFO,
        scoped::CENSOR_INFO,
        parallel::INFO,
        writer::INFO,
        latent::INFO,
        bracket::INFO,
        bracket::TELETYPE_INFO,
        exc::INFO,
    ]
}
