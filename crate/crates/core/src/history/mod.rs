//! Histories: events, program order, reads-from and dependency relations.
//!
//! A [`History`] is always validated on construction. Writes are unique per
//! `(variable, value)`, every read has exactly one source, and `dp` lies
//! inside `po` and starts at reads. The only way to obtain one is through
//! [`HistoryBuilder::build`] or [`parse_history`].

mod parse;
mod relation;

use std::collections::HashMap;
use std::fmt;

pub use parse::{parse_event_ref, parse_history};
pub use relation::{EventId, Relation};

use crate::error::HistoryError;

/// Name of the virtual thread that owns initial writes.
pub const INIT_THREAD: &str = "init";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThreadId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    Write,
    Read,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    pub thread: ThreadId,
    /// 0-based position in the owning thread.
    pub pos: usize,
    pub kind: EventKind,
    pub var: VarId,
    pub val: u64,
    pub is_init: bool,
}

impl Event {
    pub fn is_write(&self) -> bool {
        self.kind == EventKind::Write
    }

    pub fn is_read(&self) -> bool {
        self.kind == EventKind::Read
    }
}

/// A `<thread>:<pos>` reference as it appears in trace files.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventRef {
    pub thread: String,
    pub pos: usize,
}

impl EventRef {
    pub fn new(thread: impl Into<String>, pos: usize) -> Self {
        Self {
            thread: thread.into(),
            pos,
        }
    }
}

impl fmt::Display for EventRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.thread, self.pos)
    }
}

/// An immutable, validated history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct History {
    events: Vec<Event>,
    threads: Vec<String>,
    thread_events: Vec<Vec<EventId>>,
    vars: Vec<String>,
    has_init: bool,
    po: Relation,
    rf: Relation,
    dp: Relation,
    writes: Vec<EventId>,
    write_slot: Vec<Option<usize>>,
    rf_source: Vec<Option<EventId>>,
    explicit_rf: bool,
}

impl History {
    pub fn empty() -> Self {
        HistoryBuilder::new()
            .build()
            .expect("empty history is always valid")
    }

    /// Number of events.
    pub fn n(&self) -> usize {
        self.events.len()
    }

    /// Number of write events, initial writes included.
    pub fn k(&self) -> usize {
        self.writes.len()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn event(&self, id: EventId) -> &Event {
        &self.events[id.index()]
    }

    pub fn po(&self) -> &Relation {
        &self.po
    }

    pub fn rf(&self) -> &Relation {
        &self.rf
    }

    pub fn dp(&self) -> &Relation {
        &self.dp
    }

    /// Write events in ascending id order. A write's position in this slice
    /// is its bit in a write-subset mask.
    pub fn writes(&self) -> &[EventId] {
        &self.writes
    }

    /// Position of `e` in [`History::writes`], if it is a write.
    pub fn write_slot(&self, e: EventId) -> Option<usize> {
        self.write_slot[e.index()]
    }

    pub fn reads(&self) -> impl Iterator<Item = &Event> + '_ {
        self.events.iter().filter(|e| e.is_read())
    }

    pub fn writes_on(&self, var: VarId) -> impl Iterator<Item = EventId> + '_ {
        self.writes
            .iter()
            .copied()
            .filter(move |&w| self.events[w.index()].var == var)
    }

    /// The write a read takes its value from.
    pub fn source_of(&self, read: EventId) -> Option<EventId> {
        self.rf_source[read.index()]
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.vars[var.0]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v == name).map(VarId)
    }

    /// Thread names; the init thread, when present, comes first.
    pub fn threads(&self) -> &[String] {
        &self.threads
    }

    pub fn thread_name(&self, t: ThreadId) -> &str {
        &self.threads[t.0]
    }

    pub fn thread_events(&self, t: ThreadId) -> &[EventId] {
        &self.thread_events[t.0]
    }

    pub fn has_init(&self) -> bool {
        self.has_init
    }

    /// Whether reads-from was given explicitly rather than inferred.
    pub fn explicit_rf(&self) -> bool {
        self.explicit_rf
    }

    pub fn event_ref(&self, id: EventId) -> EventRef {
        let e = self.event(id);
        EventRef::new(self.thread_name(e.thread), e.pos)
    }

    pub fn resolve(&self, r: &EventRef) -> Option<EventId> {
        let t = self.threads.iter().position(|name| *name == r.thread)?;
        self.thread_events[t].get(r.pos).copied()
    }

    /// Recomputes reads-from from values alone.
    pub fn infer_rf(&self) -> Result<Relation, HistoryError> {
        let sources = infer_sources(&self.events, &self.vars, &self.threads)?;
        Ok(Relation::from_pairs(
            self.n(),
            sources
                .iter()
                .enumerate()
                .filter_map(|(r, w)| w.map(|w| (w, EventId(r)))),
        ))
    }

    /// `po` restricted to same-variable pairs. With `llh`, read-read pairs
    /// are dropped as well.
    pub fn po_loc(&self, llh: bool) -> Relation {
        self.po.filter(|a, b| {
            let (ea, eb) = (self.event(a), self.event(b));
            ea.var == eb.var && !(llh && ea.is_read() && eb.is_read())
        })
    }

    /// Splits `rel` into one relation per variable, keeping only pairs whose
    /// endpoints both access that variable. Indexed by [`VarId`].
    pub fn restrict_var(&self, rel: &Relation) -> Vec<Relation> {
        (0..self.vars.len())
            .map(|x| rel.filter(|a, b| self.event(a).var.0 == x && self.event(b).var.0 == x))
            .collect()
    }

    /// Serializes to the line-oriented trace format.
    ///
    /// Reads-from lines are emitted only for histories whose rf was explicit,
    /// so parse followed by re-emit is byte-identical.
    pub fn to_trace(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let first = if self.has_init {
            let inits: Vec<String> = self.thread_events[0]
                .iter()
                .map(|&w| {
                    let e = self.event(w);
                    format!("{}={}", self.var_name(e.var), e.val)
                })
                .collect();
            let _ = writeln!(out, "init: {}", inits.join(" "));
            1
        } else {
            0
        };
        for t in first..self.threads.len() {
            let _ = writeln!(out, "thread {}", self.threads[t]);
            for &id in &self.thread_events[t] {
                let e = self.event(id);
                let op = match e.kind {
                    EventKind::Write => "wr",
                    EventKind::Read => "rd",
                };
                let _ = writeln!(out, "{op} {} {}", self.var_name(e.var), e.val);
            }
        }
        if self.explicit_rf {
            for (w, r) in self.rf.iter() {
                let _ = writeln!(out, "rf {} -> {}", self.event_ref(w), self.event_ref(r));
            }
        }
        for (a, b) in self.dp.iter() {
            let _ = writeln!(out, "dp {} -> {}", self.event_ref(a), self.event_ref(b));
        }
        out
    }

    /// Rebuilds the history so that `read` takes its value from `writer`.
    /// The read's value is adjusted and rf becomes explicit.
    pub fn with_rewired_read(
        &self,
        read: EventId,
        writer: EventId,
    ) -> Result<History, HistoryError> {
        let mut b = self.to_builder();
        let new_val = self.event(writer).val;
        let re = self.event(read);
        if let Some(slot) = b.threads[re.thread.0 - usize::from(self.has_init)]
            .1
            .get_mut(re.pos)
        {
            slot.2 = new_val;
        }
        b.rf = self
            .rf
            .iter()
            .map(|(w, r)| {
                let w = if r == read { writer } else { w };
                (self.event_ref(w), self.event_ref(r))
            })
            .collect();
        b.build()
    }

    fn to_builder(&self) -> HistoryBuilder {
        let mut b = HistoryBuilder::new();
        let first = usize::from(self.has_init);
        if self.has_init {
            for &w in &self.thread_events[0] {
                let e = self.event(w);
                b.init(self.var_name(e.var), e.val);
            }
        }
        for t in first..self.threads.len() {
            b.thread(&self.threads[t]);
            for &id in &self.thread_events[t] {
                let e = self.event(id);
                match e.kind {
                    EventKind::Write => b.write(self.var_name(e.var), e.val),
                    EventKind::Read => b.read(self.var_name(e.var), e.val),
                };
            }
        }
        if self.explicit_rf {
            b.rf = self
                .rf
                .iter()
                .map(|(w, r)| (self.event_ref(w), self.event_ref(r)))
                .collect();
        }
        b.dp = self
            .dp
            .iter()
            .map(|(a, c)| (self.event_ref(a), self.event_ref(c)))
            .collect();
        b
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_trace())
    }
}

/// Pending events of one thread: kind, variable name, value.
type ThreadDraft = (String, Vec<(EventKind, String, u64)>);

/// Incremental construction of a [`History`].
///
/// Event ids are assigned in document order: initial writes first, then
/// threads in declaration order, each in program order.
#[derive(Clone, Debug, Default)]
pub struct HistoryBuilder {
    init: Vec<(String, u64)>,
    threads: Vec<ThreadDraft>,
    rf: Vec<(EventRef, EventRef)>,
    dp: Vec<(EventRef, EventRef)>,
}

impl HistoryBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn init(&mut self, var: &str, val: u64) -> &mut Self {
        self.init.push((var.to_string(), val));
        self
    }

    /// Starts a new thread; subsequent `read`/`write` calls append to it.
    pub fn thread(&mut self, name: &str) -> &mut Self {
        self.threads.push((name.to_string(), Vec::new()));
        self
    }

    pub fn write(&mut self, var: &str, val: u64) -> &mut Self {
        self.push(EventKind::Write, var, val)
    }

    pub fn read(&mut self, var: &str, val: u64) -> &mut Self {
        self.push(EventKind::Read, var, val)
    }

    fn push(&mut self, kind: EventKind, var: &str, val: u64) -> &mut Self {
        let (_, events) = self
            .threads
            .last_mut()
            .expect("thread() must be called before adding events");
        events.push((kind, var.to_string(), val));
        self
    }

    /// Adds an explicit reads-from edge. If any is given, every read must be
    /// covered and inference is skipped.
    pub fn rf(&mut self, from: EventRef, to: EventRef) -> &mut Self {
        self.rf.push((from, to));
        self
    }

    pub fn dp(&mut self, from: EventRef, to: EventRef) -> &mut Self {
        self.dp.push((from, to));
        self
    }

    pub fn build(&self) -> Result<History, HistoryError> {
        let mut vars: Vec<String> = Vec::new();
        let mut var_ids: HashMap<String, VarId> = HashMap::new();
        let mut intern = |name: &str| -> VarId {
            if let Some(&id) = var_ids.get(name) {
                return id;
            }
            let id = VarId(vars.len());
            vars.push(name.to_string());
            var_ids.insert(name.to_string(), id);
            id
        };

        let has_init = !self.init.is_empty();
        let mut threads = Vec::new();
        let mut thread_events: Vec<Vec<EventId>> = Vec::new();
        let mut events = Vec::new();

        if has_init {
            threads.push(INIT_THREAD.to_string());
            let mut ids = Vec::new();
            for (pos, (var, val)) in self.init.iter().enumerate() {
                let v = intern(var);
                if events.iter().any(|e: &Event| e.var == v) {
                    return Err(HistoryError::syntax(
                        0,
                        format!("variable `{var}` initialized twice"),
                    ));
                }
                let id = EventId(events.len());
                events.push(Event {
                    id,
                    thread: ThreadId(0),
                    pos,
                    kind: EventKind::Write,
                    var: v,
                    val: *val,
                    is_init: true,
                });
                ids.push(id);
            }
            thread_events.push(ids);
        }
        for (name, body) in &self.threads {
            if name == INIT_THREAD {
                return Err(HistoryError::syntax(0, "thread name `init` is reserved"));
            }
            if threads.contains(name) {
                return Err(HistoryError::syntax(
                    0,
                    format!("thread `{name}` declared twice"),
                ));
            }
            let t = ThreadId(threads.len());
            threads.push(name.clone());
            let mut ids = Vec::new();
            for (pos, (kind, var, val)) in body.iter().enumerate() {
                let id = EventId(events.len());
                events.push(Event {
                    id,
                    thread: t,
                    pos,
                    kind: *kind,
                    var: intern(var),
                    val: *val,
                    is_init: false,
                });
                ids.push(id);
            }
            thread_events.push(ids);
        }
        let n = events.len();

        // Data-independence on writes.
        let mut written: HashMap<(VarId, u64), EventId> = HashMap::new();
        for e in events.iter().filter(|e| e.is_write()) {
            if written.insert((e.var, e.val), e.id).is_some() {
                return Err(HistoryError::DuplicateValue {
                    var: vars[e.var.0].clone(),
                    val: e.val,
                });
            }
        }

        let mut po_pairs = Vec::new();
        for ids in &thread_events {
            for (i, &a) in ids.iter().enumerate() {
                for &b in &ids[i + 1..] {
                    po_pairs.push((a, b));
                }
            }
        }
        if has_init {
            let inits = &thread_events[0];
            for &w in inits {
                for ids in &thread_events[1..] {
                    po_pairs.extend(ids.iter().map(|&o| (w, o)));
                }
            }
        }
        let po = Relation::from_pairs(n, po_pairs);

        let resolve = |r: &EventRef| -> Result<EventId, HistoryError> {
            threads
                .iter()
                .position(|t| *t == r.thread)
                .and_then(|t| thread_events[t].get(r.pos).copied())
                .ok_or_else(|| HistoryError::DanglingRef {
                    reference: r.to_string(),
                })
        };

        let (rf_source, explicit_rf) = if self.rf.is_empty() {
            (infer_sources(&events, &vars, &threads)?, false)
        } else {
            let mut sources: Vec<Option<EventId>> = vec![None; n];
            for (from, to) in &self.rf {
                let (w, r) = (resolve(from)?, resolve(to)?);
                let (ew, er) = (&events[w.index()], &events[r.index()]);
                let bad = |reason: &str| HistoryError::AmbiguousRf {
                    from: from.to_string(),
                    to: to.to_string(),
                    reason: reason.to_string(),
                };
                if !ew.is_write() || !er.is_read() {
                    return Err(bad("edge must run from a write to a read"));
                }
                if ew.var != er.var {
                    return Err(bad("endpoints access different variables"));
                }
                if ew.val != er.val {
                    return Err(bad("read value differs from written value"));
                }
                if sources[r.index()].replace(w).is_some() {
                    return Err(bad("read has more than one source"));
                }
            }
            if let Some(r) = events
                .iter()
                .find(|e| e.is_read() && sources[e.id.index()].is_none())
            {
                return Err(HistoryError::UnsourcedRead {
                    read: EventRef::new(threads[r.thread.0].clone(), r.pos).to_string(),
                    var: vars[r.var.0].clone(),
                    val: r.val,
                });
            }
            (sources, true)
        };
        let rf = Relation::from_pairs(
            n,
            rf_source
                .iter()
                .enumerate()
                .filter_map(|(r, w)| w.map(|w| (w, EventId(r)))),
        );

        let mut dp_pairs = Vec::new();
        for (from, to) in &self.dp {
            let (a, b) = (resolve(from)?, resolve(to)?);
            let bad = |reason: &str| HistoryError::InvalidDp {
                from: from.to_string(),
                to: to.to_string(),
                reason: reason.to_string(),
            };
            if !events[a.index()].is_read() {
                return Err(bad("source must be a read"));
            }
            if !po.contains(a, b) {
                return Err(bad("edge must lie in program order"));
            }
            dp_pairs.push((a, b));
        }
        let dp = Relation::from_pairs(n, dp_pairs);

        let writes: Vec<EventId> = events
            .iter()
            .filter(|e| e.is_write())
            .map(|e| e.id)
            .collect();
        let mut write_slot = vec![None; n];
        for (slot, w) in writes.iter().enumerate() {
            write_slot[w.index()] = Some(slot);
        }

        Ok(History {
            events,
            threads,
            thread_events,
            vars,
            has_init,
            po,
            rf,
            dp,
            writes,
            write_slot,
            rf_source,
            explicit_rf,
        })
    }
}

/// Matches every read to the unique write of its value to its variable.
fn infer_sources(
    events: &[Event],
    vars: &[String],
    threads: &[String],
) -> Result<Vec<Option<EventId>>, HistoryError> {
    let writers: HashMap<(VarId, u64), EventId> = events
        .iter()
        .filter(|e| e.is_write())
        .map(|e| ((e.var, e.val), e.id))
        .collect();
    events
        .iter()
        .map(|e| {
            if !e.is_read() {
                return Ok(None);
            }
            writers
                .get(&(e.var, e.val))
                .copied()
                .map(Some)
                .ok_or_else(|| HistoryError::UnsourcedRead {
                    read: EventRef::new(threads[e.thread.0].clone(), e.pos).to_string(),
                    var: vars[e.var.0].clone(),
                    val: e.val,
                })
        })
        .collect()
}
