//! Bracketing: acquire, use and always release, re-raising afterwards.
//!
//! I/O runs against [`SimWorld`], a deterministic stand-in for a file
//! system and a terminal, so transcripts are reproducible.

use std::any::Any;
use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::algebraic::{cont, project_alg, Alg, Signature};
use crate::error::{Error, Result};
use crate::free::{
    expect_tag, map_comp_value, project, slot, Comp, Domain, Effect, Handler, Instance, KindInfo,
    Node, NodeView, SlotRole,
};
use crate::value::{Cont, Fun, Opaque, Tag, Value};

pub const KIND: &str = "bracket";
pub const TELETYPE: &str = "teletype";

pub const INFO: KindInfo = KindInfo {
    kind: KIND,
    instance: Instance::Bracket,
    slots: &[
        slot(
            "bracket",
            "res",
            SlotRole::Inner,
            "computation of (release, use)",
        ),
        slot("bracket", "release", SlotRole::Inner, "computation of unit"),
        slot(
            "bracket",
            "use",
            SlotRole::Inner,
            "computation of the continuation",
        ),
    ],
};

pub const TELETYPE_INFO: KindInfo = KindInfo {
    kind: TELETYPE,
    instance: Instance::Algebraic,
    slots: &[
        slot("hGetChar", "h", SlotRole::Param, "int (handle)"),
        slot("hGetChar", "k", SlotRole::Continuation, "char"),
        slot("print", "s", SlotRole::Param, "string"),
        slot("print", "k", SlotRole::Continuation, "unit"),
        slot("readFile", "fp", SlotRole::Param, "string"),
        slot("readFile", "k", SlotRole::Continuation, "string"),
        slot("openFile", "fp", SlotRole::Param, "string"),
        slot("openFile", "mode", SlotRole::Param, "string"),
        slot("openFile", "k", SlotRole::Continuation, "int (handle)"),
    ],
};

/// `Bracket :: f (f (), f a) -> K^Res f a`
#[derive(Clone)]
pub struct Bracket(pub Value);

fn map_pair(
    res: &Value,
    f: impl Fn(&Value, &Value) -> Result<(Value, Value)> + Send + Sync + 'static,
) -> Value {
    let under = Fun::new(move |p| {
        let (rel, use_) = p.as_pair()?;
        let (rel, use_) = f(rel, use_)?;
        Ok(Value::pair(rel, use_))
    });
    map_comp_value(res, &under)
}

impl Effect for Bracket {
    fn kind(&self) -> &'static str {
        KIND
    }

    fn instance(&self) -> Instance {
        Instance::Bracket
    }

    fn map_continuation(&self, f: &Fun) -> Node {
        let f = f.clone();
        Arc::new(Bracket(map_pair(&self.0, move |rel, use_| {
            Ok((rel.clone(), map_comp_value(use_, &f)))
        })))
    }

    /// `Bracket (k (fmap (\(rel, use) -> (k rel, k use)) res))`
    fn map_inner(&self, t: &Fun) -> Result<Node> {
        let t2 = t.clone();
        let inner = map_pair(&self.0, move |rel, use_| {
            Ok((t2.call(rel.clone())?, t2.call(use_.clone())?))
        });
        Ok(Arc::new(Bracket(t.call(inner)?)))
    }

    fn view(&self) -> NodeView {
        NodeView::new(KIND, "bracket").value("res", self.0.clone())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

/// `brckt res`: `res` acquires and returns `(release, use)`. The use
/// side is stored as `return use`, the canonical form.
pub fn brckt(res: &Comp) -> Comp {
    let res = res.try_bind(|p| {
        let (rel, use_) = p.as_pair()?;
        let use_ = Comp::pure(Value::Comp(use_.as_comp()?.clone()));
        Ok(Comp::pure(Value::pair(rel.clone(), Value::Comp(use_))))
    });
    Comp::node(Bracket(Value::Comp(res)))
}

#[derive(Clone)]
pub enum Teletype {
    HGetChar(Value, Cont),
    Print(Value, Cont),
    ReadFile(Value, Cont),
    OpenFile(Value, Value, Cont),
}

impl Signature for Teletype {
    const KIND: &'static str = TELETYPE;

    fn fmap(&self, f: &Fun) -> Self {
        match self {
            Teletype::HGetChar(h, k) => Teletype::HGetChar(h.clone(), k.then(f)),
            Teletype::Print(s, k) => Teletype::Print(s.clone(), k.then(f)),
            Teletype::ReadFile(fp, k) => Teletype::ReadFile(fp.clone(), k.then(f)),
            Teletype::OpenFile(fp, m, k) => Teletype::OpenFile(fp.clone(), m.clone(), k.then(f)),
        }
    }

    fn view(&self) -> NodeView {
        match self {
            Teletype::HGetChar(h, k) => NodeView::new(TELETYPE, format!("hGetChar {}", h.show()))
                .cont(k.clone(), Domain::Of(Tag::Char)),
            Teletype::Print(s, k) => NodeView::new(TELETYPE, format!("print {}", s.show()))
                .cont(k.clone(), Domain::Of(Tag::Unit)),
            Teletype::ReadFile(fp, k) => NodeView::new(TELETYPE, format!("readFile {}", fp.show()))
                .cont(k.clone(), Domain::Of(Tag::Str)),
            Teletype::OpenFile(fp, m, k) => {
                NodeView::new(TELETYPE, format!("openFile {} {}", fp.show(), m.show()))
                    .cont(k.clone(), Domain::Of(Tag::Int))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Teletype::HGetChar(h, _) => expect_tag(TELETYPE, "hGetChar.h", Tag::Int, h),
            Teletype::Print(s, _) => expect_tag(TELETYPE, "print.s", Tag::Str, s),
            Teletype::ReadFile(fp, _) => expect_tag(TELETYPE, "readFile.fp", Tag::Str, fp),
            Teletype::OpenFile(fp, m, _) => {
                expect_tag(TELETYPE, "openFile.fp", Tag::Str, fp)?;
                expect_tag(TELETYPE, "openFile.mode", Tag::Str, m)
            }
        }
    }
}

fn tele(t: Teletype) -> Comp {
    Comp::op(Arc::new(Alg(t))).unwrap_or_else(Comp::abort)
}

pub fn h_get_c(h: impl Into<Value>) -> Comp {
    tele(Teletype::HGetChar(
        h.into(),
        cont(TELETYPE, "hGetChar.k", Tag::Char, Comp::pure),
    ))
}

pub fn prnt(s: impl Into<Value>) -> Comp {
    tele(Teletype::Print(
        s.into(),
        cont(TELETYPE, "print.k", Tag::Unit, Comp::pure),
    ))
}

pub fn read_f(fp: impl Into<Value>) -> Comp {
    tele(Teletype::ReadFile(
        fp.into(),
        cont(TELETYPE, "readFile.k", Tag::Str, Comp::pure),
    ))
}

pub fn open_f(fp: impl Into<Value>, mode: IoMode) -> Comp {
    tele(Teletype::OpenFile(
        fp.into(),
        Value::str(mode.name()),
        cont(TELETYPE, "openFile.k", Tag::Int, Comp::pure),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IoMode {
    ReadMode,
    WriteMode,
    AppendMode,
    ReadWriteMode,
}

impl IoMode {
    pub fn name(self) -> &'static str {
        match self {
            IoMode::ReadMode => "ReadMode",
            IoMode::WriteMode => "WriteMode",
            IoMode::AppendMode => "AppendMode",
            IoMode::ReadWriteMode => "ReadWriteMode",
        }
    }

    fn parse(s: &str) -> Option<IoMode> {
        [
            IoMode::ReadMode,
            IoMode::WriteMode,
            IoMode::AppendMode,
            IoMode::ReadWriteMode,
        ]
        .into_iter()
        .find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenHandle {
    pub path: String,
    pub mode: IoMode,
    pub cursor: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Running,
    Raised(String),
}

/// Files, open handles, the printed transcript and the final status.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimWorld {
    pub files: BTreeMap<String, String>,
    pub handles: BTreeMap<i64, OpenHandle>,
    pub next_handle: i64,
    pub transcript: Vec<String>,
    pub status: Status,
}

impl SimWorld {
    pub fn new(files: impl IntoIterator<Item = (String, String)>) -> Self {
        SimWorld {
            files: files.into_iter().collect(),
            handles: BTreeMap::new(),
            next_handle: 0,
            transcript: Vec::new(),
            status: Status::Running,
        }
    }

    /// A fixture is a JSON object from paths to contents.
    pub fn from_fixture(json: &str) -> Result<Self> {
        let files: BTreeMap<String, String> =
            serde_json::from_str(json).map_err(|e| Error::Other(format!("bad fixture: {e}")))?;
        Ok(SimWorld::new(files))
    }

    /// The transcript, with a final `***Exception:` line when raised.
    pub fn render(&self) -> String {
        let mut lines = self.transcript.clone();
        if let Status::Raised(e) = &self.status {
            lines.push(format!("***Exception: {e}"));
        }
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }
}

/// An exception raised inside the simulated world.
pub type Outcome = std::result::Result<Value, String>;

type Step = dyn Fn(SimWorld) -> Result<(SimWorld, Outcome)> + Send + Sync;

/// The carrier: `SimWorld -> (SimWorld, value or exception)`.
#[derive(Clone)]
pub struct IoAction(Arc<Step>);

impl IoAction {
    pub fn new(
        f: impl Fn(SimWorld) -> Result<(SimWorld, Outcome)> + Send + Sync + 'static,
    ) -> Self {
        IoAction(Arc::new(f))
    }

    pub fn run(&self, w: SimWorld) -> Result<(SimWorld, Outcome)> {
        (self.0)(w)
    }

    fn of(v: &Value) -> Result<&IoAction> {
        v.downcast::<IoAction>()
    }

    /// Runs `self`, then the action the continuation picks.
    fn and_then(self, k: impl Fn(Value) -> Result<Value> + Send + Sync + 'static) -> IoAction {
        IoAction::new(move |w| match self.run(w)? {
            (w, Ok(x)) => IoAction::of(&k(x)?)?.run(w),
            raised => Ok(raised),
        })
    }

    fn into_value(self) -> Value {
        Value::opaque(self)
    }
}

impl Opaque for IoAction {
    fn type_name(&self) -> &'static str {
        "io action"
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}

fn io(f: impl Fn(SimWorld) -> Result<(SimWorld, Outcome)> + Send + Sync + 'static) -> Value {
    IoAction::new(f).into_value()
}

fn primitive(k: Cont, f: impl Fn(&mut SimWorld) -> Outcome + Send + Sync + 'static) -> Value {
    IoAction::new(move |mut w| {
        let r = f(&mut w);
        Ok((w, r))
    })
    .and_then(move |x| k.apply(x))
    .into_value()
}

fn h_get_char(w: &mut SimWorld, h: i64) -> Outcome {
    let Some(handle) = w.handles.get_mut(&h) else {
        return Err(format!("hGetChar invalid handle {h}"));
    };
    let contents = w.files.get(&handle.path).map(String::as_str).unwrap_or("");
    match contents.chars().nth(handle.cursor) {
        Some(c) => {
            handle.cursor += 1;
            Ok(Value::Char(c))
        }
        None => Err(format!("{} hGetChar end of file", handle.path)),
    }
}

fn open_file(w: &mut SimWorld, fp: &str, mode: &str) -> Outcome {
    let mode = IoMode::parse(mode).ok_or_else(|| format!("{fp} openFile invalid mode {mode}"))?;
    match mode {
        IoMode::ReadMode if !w.files.contains_key(fp) => {
            return Err(format!("{fp} openFile file not found"))
        }
        IoMode::WriteMode => {
            w.files.insert(fp.to_owned(), String::new());
        }
        _ => {
            w.files.entry(fp.to_owned()).or_default();
        }
    }
    let h = w.next_handle;
    w.next_handle += 1;
    w.handles.insert(
        h,
        OpenHandle {
            path: fp.to_owned(),
            mode,
            cursor: 0,
        },
    );
    Ok(Value::Int(h))
}

fn alg_tele(t: &Teletype) -> Result<Value> {
    Ok(match t.clone() {
        Teletype::HGetChar(h, k) => {
            let h = h.as_int()?;
            primitive(k, move |w| h_get_char(w, h))
        }
        Teletype::Print(s, k) => {
            let s = s.as_str()?.to_owned();
            primitive(k, move |w| {
                w.transcript.push(s.clone());
                Ok(Value::Unit)
            })
        }
        Teletype::ReadFile(fp, k) => {
            let fp = fp.as_str()?.to_owned();
            primitive(k, move |w| match w.files.get(&fp) {
                Some(c) => Ok(Value::str(c)),
                None => Err(format!("{fp} readFile file not found")),
            })
        }
        Teletype::OpenFile(fp, mode, k) => {
            let (fp, mode) = (fp.as_str()?.to_owned(), mode.as_str()?.to_owned());
            primitive(k, move |w| open_file(w, &fp, &mode))
        }
    })
}

/// `do (rel, use) <- res; bracket (return ()) (const rel) (const (join use))`
fn alg_res(res: &Value) -> Result<Value> {
    let res = IoAction::of(res)?.clone();
    Ok(io(move |w| {
        let (w, r) = res.run(w)?;
        let pair = match r {
            Ok(p) => p,
            Err(e) => return Ok((w, Err(e))),
        };
        let (rel, use_) = pair.as_pair()?;
        let joined = IoAction::of(use_)?.clone().and_then(Ok);
        let (w, used) = joined.run(w)?;
        let (w, released) = IoAction::of(rel)?.run(w)?;
        Ok(match (used, released) {
            (_, Err(e)) => (w, Err(e)),
            (used, Ok(_)) => (w, used),
        })
    }))
}

pub fn bracket_handler() -> Handler {
    let unit = Fun::new(|x| Ok(io(move |w| Ok((w, Ok(x.clone()))))));
    Handler::pointed(unit, |n: &Node| {
        if let Some(t) = project_alg::<Teletype>(n) {
            return alg_tele(t);
        }
        match project::<Bracket>(n) {
            Some(Bracket(res)) => alg_res(res),
            None => Err(Error::unhandled(n.kind())),
        }
    })
}

/// Runs `m` in `world`. An escaping exception is recorded in the world's
/// status and returned as the outcome.
pub fn h_bracket(m: &Comp, world: SimWorld) -> Result<(SimWorld, Outcome)> {
    let action = bracket_handler().fold(m)?;
    let (mut w, out) = IoAction::of(&action)?.run(world)?;
    if let Err(e) = &out {
        w.status = Status::Raised(e.clone());
    }
    Ok((w, out))
}

/// Opens `foo.txt`, reads two characters and prints them as a pair,
/// printing `released` on the way out.
pub fn first_two() -> Comp {
    brckt(&open_f("foo.txt", IoMode::ReadMode).bind(|h| {
        let use_ = h_get_c(h.clone()).bind(move |x| {
            let h = h.clone();
            h_get_c(h).bind(move |y| prnt(Value::str(Value::pair(x.clone(), y).show())))
        });
        Comp::pure(Value::pair(prnt("released"), use_))
    }))
}

/// `readF "foo.txt" >>= prnt >> firstTwo`
pub fn bracket_example() -> Comp {
    read_f("foo.txt").bind(prnt).then(first_two())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world(contents: &str) -> SimWorld {
        SimWorld::new([("foo.txt".to_owned(), contents.to_owned())])
    }

    #[test]
    fn enough_characters() {
        let (w, out) = h_bracket(&bracket_example(), world("HELLO, WORLD!")).unwrap();
        assert_eq!(w.render(), "HELLO, WORLD!\n('H','E')\nreleased\n");
        assert_eq!(w.status, Status::Running);
        assert_eq!(out, Ok(Value::Unit));
    }

    #[test]
    fn end_of_file_releases_then_raises() {
        let (w, out) = h_bracket(&bracket_example(), world("H")).unwrap();
        assert_eq!(
            w.render(),
            "H\nreleased\n***Exception: foo.txt hGetChar end of file\n"
        );
        assert_eq!(out, Err("foo.txt hGetChar end of file".into()));
    }

    #[test]
    fn trivial_bracket() {
        let m = brckt(&Comp::pure(Value::pair(prnt("r"), Comp::pure(7))));
        let (w, out) = h_bracket(&m, world("")).unwrap();
        assert_eq!(out, Ok(Value::Int(7)));
        assert_eq!(w.transcript, vec!["r".to_string()]);
    }

    #[test]
    fn print_alone() {
        let (w, _) = h_bracket(&prnt("x"), world("")).unwrap();
        assert_eq!(w.transcript, vec!["x".to_string()]);
    }

    #[test]
    fn missing_file_and_bad_handle() {
        let (w, out) = h_bracket(&read_f("nope.txt"), world("")).unwrap();
        assert_eq!(out, Err("nope.txt readFile file not found".into()));
        assert_eq!(
            w.status,
            Status::Raised("nope.txt readFile file not found".into())
        );
        let (_, out) = h_bracket(&h_get_c(5), world("")).unwrap();
        assert_eq!(out, Err("hGetChar invalid handle 5".into()));
        let (_, out) = h_bracket(&open_f("nope.txt", IoMode::ReadMode), world("")).unwrap();
        assert_eq!(out, Err("nope.txt openFile file not found".into()));
    }

    #[test]
    fn exception_stops_the_rest() {
        let m = h_get_c(0).then(prnt("after"));
        let (w, out) = h_bracket(&open_f("foo.txt", IoMode::ReadMode).then(m), world("")).unwrap();
        assert!(out.is_err());
        assert!(w.transcript.is_empty());
    }

    #[test]
    fn continuation_runs_inside_the_bracket() {
        let m = brckt(&Comp::pure(Value::pair(prnt("rel"), prnt("use")))).then(prnt("after"));
        let (w, _) = h_bracket(&m, world("")).unwrap();
        assert_eq!(w.transcript, ["use", "after", "rel"]);
    }

    #[test]
    fn raising_acquisition_skips_release() {
        let m =
            brckt(&read_f("nope.txt").then(Comp::pure(Value::pair(prnt("rel"), Comp::pure(1)))));
        let (w, out) = h_bracket(&m, world("")).unwrap();
        assert!(out.is_err());
        assert!(w.transcript.is_empty());
    }

    #[test]
    fn cursors_advance() {
        let m = open_f("foo.txt", IoMode::ReadMode).bind(|h| h_get_c(h.clone()).then(h_get_c(h)));
        let (w, out) = h_bracket(&m, world("ab")).unwrap();
        assert_eq!(out, Ok(Value::Char('b')));
        assert_eq!(w.handles[&0].cursor, 2);
    }

    #[test]
    fn fixture_json() {
        let w = SimWorld::from_fixture(r#"{"foo.txt": "HELLO, WORLD!"}"#).unwrap();
        assert_eq!(w.files["foo.txt"], "HELLO, WORLD!");
        assert!(SimWorld::from_fixture("[1]").is_err());
    }

    #[test]
    fn ill_typed_print_is_rejected() {
        assert!(crate::free::run(&prnt(3))
            .unwrap_err()
            .to_string()
            .contains("print.s"));
    }
}
