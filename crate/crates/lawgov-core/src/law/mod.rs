//! The law-evaluation contract: a law is a pure, total, local function from
//! (event, controller state) to a ruling — an ordered operation list plus a
//! replacement state. This module defines the domain types, the `Law` trait,
//! and the registry that resolves laws by id and content hash.

mod builtin;

pub use builtin::{
    lock_acquire_payload, lock_release_payload, mo_birth_record, mo_copy_record, parse_amount,
    LockLaw, MoRecord, MoneyTransferLaw, MonitoringLaw, OpenLaw, PasswordLaw, LOCK_OBLIGATION,
};

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{sha256, Canonical, CodecError, Reader, Writer};

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

/// A controller-provider node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CpNodeId(pub u64);

/// A controller. Globally unique and stable across reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ControllerId(pub u64);

impl fmt::Display for CpNodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node{}", self.0)
    }
}

impl fmt::Display for ControllerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ctrl{}", self.0)
    }
}

/// A law, resolved through the registry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LawId(pub String);

impl LawId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for LawId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The address of an agent: the node hosting its controller plus the
/// controller id. Stable for the lifetime of the agent, including across
/// reconstruction of a failed controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentAddress {
    pub cpnode: CpNodeId,
    pub controller: ControllerId,
}

impl AgentAddress {
    pub fn new(cpnode: CpNodeId, controller: ControllerId) -> Self {
        Self { cpnode, controller }
    }
}

impl fmt::Display for AgentAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.cpnode, self.controller)
    }
}

impl Canonical for AgentAddress {
    fn write(&self, w: &mut Writer) {
        w.put_u64(self.cpnode.0);
        w.put_u64(self.controller.0);
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            cpnode: CpNodeId(r.get_u64()?),
            controller: ControllerId(r.get_u64()?),
        })
    }
}

// ---------------------------------------------------------------------------
// Controller state
// ---------------------------------------------------------------------------

/// A single state term value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermValue {
    Int(i64),
    Str(String),
    Bytes(Vec<u8>),
}

impl Canonical for TermValue {
    fn write(&self, w: &mut Writer) {
        match self {
            TermValue::Int(v) => {
                w.put_u8(1);
                w.put_i64(*v);
            }
            TermValue::Str(v) => {
                w.put_u8(2);
                w.put_str(v);
            }
            TermValue::Bytes(v) => {
                w.put_u8(3);
                w.put_bytes(v);
            }
        }
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        match r.get_u8()? {
            1 => Ok(TermValue::Int(r.get_i64()?)),
            2 => Ok(TermValue::Str(r.get_str()?)),
            3 => Ok(TermValue::Bytes(r.get_bytes()?)),
            tag => Err(CodecError::InvalidTag {
                context: "TermValue",
                tag,
            }),
        }
    }
}

/// The state of a controller: an unordered set of key/value terms. Newly
/// created controllers hold the empty state; equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ControllerState {
    pub terms: BTreeMap<String, TermValue>,
}

impl ControllerState {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: TermValue) {
        self.terms.insert(key.into(), value);
    }

    pub fn with(mut self, key: impl Into<String>, value: TermValue) -> Self {
        self.set(key, value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&TermValue> {
        self.terms.get(key)
    }

    pub fn get_int(&self, key: &str) -> Option<i64> {
        match self.terms.get(key) {
            Some(TermValue::Int(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn get_bytes(&self, key: &str) -> Option<&[u8]> {
        match self.terms.get(key) {
            Some(TermValue::Bytes(v)) => Some(v),
            _ => None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Canonical for ControllerState {
    fn write(&self, w: &mut Writer) {
        // BTreeMap iterates in key order, which is the canonical map order.
        w.put_u32(self.terms.len() as u32);
        for (k, v) in &self.terms {
            w.put_str(k);
            v.write(w);
        }
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let n = r.get_u32()?;
        let mut terms = BTreeMap::new();
        let mut prev: Option<String> = None;
        for _ in 0..n {
            let k = r.get_str()?;
            if let Some(p) = &prev {
                if *p >= k {
                    return Err(CodecError::UnsortedMap);
                }
            }
            let v = TermValue::read(r)?;
            prev = Some(k.clone());
            terms.insert(k, v);
        }
        Ok(Self { terms })
    }
}

// ---------------------------------------------------------------------------
// Events
// ---------------------------------------------------------------------------

/// The regulated occurrences a law can rule on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Adopted,
    Arrived,
    Sent,
    ObligationDue,
    Exception,
    Quit,
}

impl EventKind {
    fn tag(self) -> u8 {
        match self {
            EventKind::Adopted => 1,
            EventKind::Arrived => 2,
            EventKind::Sent => 3,
            EventKind::ObligationDue => 4,
            EventKind::Exception => 5,
            EventKind::Quit => 6,
        }
    }

    fn from_tag(tag: u8) -> Result<Self, CodecError> {
        Ok(match tag {
            1 => EventKind::Adopted,
            2 => EventKind::Arrived,
            3 => EventKind::Sent,
            4 => EventKind::ObligationDue,
            5 => EventKind::Exception,
            6 => EventKind::Quit,
            tag => {
                return Err(CodecError::InvalidTag {
                    context: "EventKind",
                    tag,
                })
            }
        })
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EventKind::Adopted => "adopted",
            EventKind::Arrived => "arrived",
            EventKind::Sent => "sent",
            EventKind::ObligationDue => "obligation_due",
            EventKind::Exception => "exception",
            EventKind::Quit => "quit",
        };
        f.write_str(s)
    }
}

/// A regulated occurrence at a controller.
///
/// The first event in a controller's lifetime is `Adopted` with `seq` 1, and
/// no event follows a `Quit`. `Sent` and `Arrived` carry both endpoints
/// (`source` is the sender, `target` the receiver); `Exception` carries the
/// address the failure concerns in `source`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub kind: EventKind,
    pub source: Option<AgentAddress>,
    pub target: Option<AgentAddress>,
    pub payload: Vec<u8>,
    pub controller: ControllerId,
    /// Per-controller event ordinal, starting at 1.
    pub seq: u64,
}

impl Event {
    pub fn amount(&self) -> Option<i64> {
        parse_amount(&self.payload)
    }
}

impl Canonical for Event {
    fn write(&self, w: &mut Writer) {
        w.put_u8(self.kind.tag());
        match &self.source {
            None => w.put_u8(0),
            Some(a) => {
                w.put_u8(1);
                a.write(w);
            }
        }
        match &self.target {
            None => w.put_u8(0),
            Some(a) => {
                w.put_u8(1);
                a.write(w);
            }
        }
        w.put_bytes(&self.payload);
        w.put_u64(self.controller.0);
        w.put_u64(self.seq);
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let kind = EventKind::from_tag(r.get_u8()?)?;
        let source = if r.get_presence()? {
            Some(AgentAddress::read(r)?)
        } else {
            None
        };
        let target = if r.get_presence()? {
            Some(AgentAddress::read(r)?)
        } else {
            None
        };
        Ok(Self {
            kind,
            source,
            target,
            payload: r.get_bytes()?,
            controller: ControllerId(r.get_u64()?),
            seq: r.get_u64()?,
        })
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// An argument value in an operation's argument map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ArgValue {
    Int(i64),
    Str(String),
    Bytes(Vec<u8>),
    Address(AgentAddress),
}

impl ArgValue {
    fn write(&self, w: &mut Writer) {
        match self {
            ArgValue::Int(v) => {
                w.put_u8(1);
                w.put_i64(*v);
            }
            ArgValue::Str(v) => {
                w.put_u8(2);
                w.put_str(v);
            }
            ArgValue::Bytes(v) => {
                w.put_u8(3);
                w.put_bytes(v);
            }
            ArgValue::Address(v) => {
                w.put_u8(4);
                v.write(w);
            }
        }
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        match r.get_u8()? {
            1 => Ok(ArgValue::Int(r.get_i64()?)),
            2 => Ok(ArgValue::Str(r.get_str()?)),
            3 => Ok(ArgValue::Bytes(r.get_bytes()?)),
            4 => Ok(ArgValue::Address(AgentAddress::read(r)?)),
            tag => Err(CodecError::InvalidTag {
                context: "ArgValue",
                tag,
            }),
        }
    }
}

impl From<TermValue> for ArgValue {
    fn from(v: TermValue) -> Self {
        match v {
            TermValue::Int(i) => ArgValue::Int(i),
            TermValue::Str(s) => ArgValue::Str(s),
            TermValue::Bytes(b) => ArgValue::Bytes(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    SetTerm,
    Forward,
    Deliver,
    SendMessage,
    ImposeObligation,
    QuitSelf,
    /// Interceptor sentinel appended after a ruling's operations; closes the
    /// per-controller ruling group in the ledger. Never produced by laws.
    RulingEnd,
}

impl OpKind {
    fn tag(self) -> u8 {
        match self {
            OpKind::SetTerm => 1,
            OpKind::Forward => 2,
            OpKind::Deliver => 3,
            OpKind::SendMessage => 4,
            OpKind::ImposeObligation => 5,
            OpKind::QuitSelf => 6,
            OpKind::RulingEnd => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpKind::SetTerm => "set_term",
            OpKind::Forward => "forward",
            OpKind::Deliver => "deliver",
            OpKind::SendMessage => "send_message",
            OpKind::ImposeObligation => "impose_obligation",
            OpKind::QuitSelf => "quit_self",
            OpKind::RulingEnd => "ruling_end",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One operation a controller is mandated to carry out as part of a ruling.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operation {
    SetTerm { key: String, value: TermValue },
    Forward { target: AgentAddress, payload: Vec<u8> },
    Deliver { payload: Vec<u8> },
    SendMessage { target: AgentAddress, payload: Vec<u8> },
    ImposeObligation { name: String, dt_ms: i64 },
    QuitSelf,
    RulingEnd,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperationArgError {
    #[error("operation {kind}: missing argument {arg}")]
    Missing { kind: &'static str, arg: &'static str },
    #[error("operation {kind}: argument {arg} has the wrong type")]
    WrongType { kind: &'static str, arg: &'static str },
    #[error("operation {kind}: unknown argument {arg}")]
    Unknown { kind: &'static str, arg: String },
}

impl Operation {
    pub fn kind(&self) -> OpKind {
        match self {
            Operation::SetTerm { .. } => OpKind::SetTerm,
            Operation::Forward { .. } => OpKind::Forward,
            Operation::Deliver { .. } => OpKind::Deliver,
            Operation::SendMessage { .. } => OpKind::SendMessage,
            Operation::ImposeObligation { .. } => OpKind::ImposeObligation,
            Operation::QuitSelf => OpKind::QuitSelf,
            Operation::RulingEnd => OpKind::RulingEnd,
        }
    }

    /// The operation's arguments as (name, value) pairs in canonical
    /// (sorted-by-name) order.
    pub fn args(&self) -> Vec<(&'static str, ArgValue)> {
        match self {
            Operation::SetTerm { key, value } => vec![
                ("key", ArgValue::Str(key.clone())),
                ("value", ArgValue::from(value.clone())),
            ],
            Operation::Forward { target, payload } => vec![
                ("payload", ArgValue::Bytes(payload.clone())),
                ("target", ArgValue::Address(*target)),
            ],
            Operation::Deliver { payload } => {
                vec![("payload", ArgValue::Bytes(payload.clone()))]
            }
            Operation::SendMessage { target, payload } => vec![
                ("payload", ArgValue::Bytes(payload.clone())),
                ("target", ArgValue::Address(*target)),
            ],
            Operation::ImposeObligation { name, dt_ms } => vec![
                ("dt_ms", ArgValue::Int(*dt_ms)),
                ("name", ArgValue::Str(name.clone())),
            ],
            Operation::QuitSelf | Operation::RulingEnd => vec![],
        }
    }

    /// Build an operation from a kind and an argument map given in any
    /// insertion order. Two argument lists that differ only in order produce
    /// the same operation, hence identical canonical bytes.
    pub fn from_args(
        kind: OpKind,
        args: Vec<(String, ArgValue)>,
    ) -> Result<Self, OperationArgError> {
        let kname = kind.name();
        let mut map: HashMap<String, ArgValue> = HashMap::new();
        for (k, v) in args {
            map.insert(k, v);
        }
        let mut take_str = |arg: &'static str| -> Result<String, OperationArgError> {
            match map.remove(arg) {
                Some(ArgValue::Str(s)) => Ok(s),
                Some(_) => Err(OperationArgError::WrongType { kind: kname, arg }),
                None => Err(OperationArgError::Missing { kind: kname, arg }),
            }
        };
        let op = match kind {
            OpKind::SetTerm => {
                let key = take_str("key")?;
                let value = match map.remove("value") {
                    Some(ArgValue::Int(v)) => TermValue::Int(v),
                    Some(ArgValue::Str(v)) => TermValue::Str(v),
                    Some(ArgValue::Bytes(v)) => TermValue::Bytes(v),
                    Some(ArgValue::Address(_)) => {
                        return Err(OperationArgError::WrongType {
                            kind: kname,
                            arg: "value",
                        })
                    }
                    None => {
                        return Err(OperationArgError::Missing {
                            kind: kname,
                            arg: "value",
                        })
                    }
                };
                Operation::SetTerm { key, value }
            }
            OpKind::Forward | OpKind::SendMessage => {
                let target = match map.remove("target") {
                    Some(ArgValue::Address(a)) => a,
                    Some(_) => {
                        return Err(OperationArgError::WrongType {
                            kind: kname,
                            arg: "target",
                        })
                    }
                    None => {
                        return Err(OperationArgError::Missing {
                            kind: kname,
                            arg: "target",
                        })
                    }
                };
                let payload = match map.remove("payload") {
                    Some(ArgValue::Bytes(b)) => b,
                    Some(_) => {
                        return Err(OperationArgError::WrongType {
                            kind: kname,
                            arg: "payload",
                        })
                    }
                    None => {
                        return Err(OperationArgError::Missing {
                            kind: kname,
                            arg: "payload",
                        })
                    }
                };
                if kind == OpKind::Forward {
                    Operation::Forward { target, payload }
                } else {
                    Operation::SendMessage { target, payload }
                }
            }
            OpKind::Deliver => {
                let payload = match map.remove("payload") {
                    Some(ArgValue::Bytes(b)) => b,
                    Some(_) => {
                        return Err(OperationArgError::WrongType {
                            kind: kname,
                            arg: "payload",
                        })
                    }
                    None => {
                        return Err(OperationArgError::Missing {
                            kind: kname,
                            arg: "payload",
                        })
                    }
                };
                Operation::Deliver { payload }
            }
            OpKind::ImposeObligation => {
                let name = take_str("name")?;
                let dt_ms = match map.remove("dt_ms") {
                    Some(ArgValue::Int(v)) => v,
                    Some(_) => {
                        return Err(OperationArgError::WrongType {
                            kind: kname,
                            arg: "dt_ms",
                        })
                    }
                    None => {
                        return Err(OperationArgError::Missing {
                            kind: kname,
                            arg: "dt_ms",
                        })
                    }
                };
                Operation::ImposeObligation { name, dt_ms }
            }
            OpKind::QuitSelf => Operation::QuitSelf,
            OpKind::RulingEnd => Operation::RulingEnd,
        };
        if let Some(arg) = map.into_keys().next() {
            return Err(OperationArgError::Unknown { kind: kname, arg });
        }
        Ok(op)
    }
}

impl Canonical for Operation {
    fn write(&self, w: &mut Writer) {
        w.put_u8(self.kind().tag());
        let args = self.args();
        w.put_u32(args.len() as u32);
        // `args()` already yields names in sorted order per variant.
        for (name, value) in args {
            w.put_str(name);
            value.write(w);
        }
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let tag = r.get_u8()?;
        let kind = match tag {
            1 => OpKind::SetTerm,
            2 => OpKind::Forward,
            3 => OpKind::Deliver,
            4 => OpKind::SendMessage,
            5 => OpKind::ImposeObligation,
            6 => OpKind::QuitSelf,
            7 => OpKind::RulingEnd,
            tag => {
                return Err(CodecError::InvalidTag {
                    context: "Operation",
                    tag,
                })
            }
        };
        let n = r.get_u32()?;
        let mut args = Vec::with_capacity(n as usize);
        let mut prev: Option<String> = None;
        for _ in 0..n {
            let name = r.get_str()?;
            if let Some(p) = &prev {
                if *p >= name {
                    return Err(CodecError::UnsortedMap);
                }
            }
            let value = ArgValue::read(r)?;
            prev = Some(name.clone());
            args.push((name, value));
        }
        Operation::from_args(kind, args).map_err(|_| CodecError::InvalidTag {
            context: "Operation arguments",
            tag,
        })
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operation::SetTerm { key, value } => write!(f, "set_term({key}, {value:?})"),
            Operation::Forward { target, payload } => {
                write!(f, "forward({target}, {} bytes)", payload.len())
            }
            Operation::Deliver { payload } => write!(f, "deliver({} bytes)", payload.len()),
            Operation::SendMessage { target, payload } => {
                write!(f, "send_message({target}, {} bytes)", payload.len())
            }
            Operation::ImposeObligation { name, dt_ms } => {
                write!(f, "impose_obligation({name}, {dt_ms}ms)")
            }
            Operation::QuitSelf => write!(f, "quit_self"),
            Operation::RulingEnd => write!(f, "ruling_end"),
        }
    }
}

// ---------------------------------------------------------------------------
// Rulings
// ---------------------------------------------------------------------------

/// What a controller must carry out for one event: an ordered operation list
/// plus the replacement state.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ruling {
    pub operations: Vec<Operation>,
    pub new_state: ControllerState,
}

impl Ruling {
    /// The empty ruling: no operations, state unchanged.
    pub fn unchanged(state: &ControllerState) -> Self {
        Self {
            operations: Vec::new(),
            new_state: state.clone(),
        }
    }

    pub fn contains_kind(&self, kind: OpKind) -> bool {
        self.operations.iter().any(|op| op.kind() == kind)
    }
}

impl Canonical for Ruling {
    fn write(&self, w: &mut Writer) {
        w.put_u32(self.operations.len() as u32);
        for op in &self.operations {
            w.put_bytes(&op.to_canonical_bytes());
        }
        self.new_state.write(w);
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, CodecError> {
        let n = r.get_u32()?;
        let mut operations = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let raw = r.get_bytes()?;
            operations.push(Operation::from_canonical_bytes(&raw)?);
        }
        let new_state = ControllerState::read(r)?;
        Ok(Self {
            operations,
            new_state,
        })
    }
}

/// Canonical bytes of a ruling; the representation the inspector compares
/// bit-exactly against observed behavior.
pub fn canonical_bytes(r: &Ruling) -> Vec<u8> {
    r.to_canonical_bytes()
}

/// Incremental ruling construction for law implementations. `set_term`
/// appends the operation and updates the replacement state in one step, so
/// the operation list and `new_state` cannot drift apart.
pub struct RulingBuilder {
    ops: Vec<Operation>,
    state: ControllerState,
}

impl RulingBuilder {
    pub fn from_state(state: &ControllerState) -> Self {
        Self {
            ops: Vec::new(),
            state: state.clone(),
        }
    }

    pub fn set_term(&mut self, key: impl Into<String>, value: TermValue) -> &mut Self {
        let key = key.into();
        self.ops.push(Operation::SetTerm {
            key: key.clone(),
            value: value.clone(),
        });
        self.state.set(key, value);
        self
    }

    pub fn forward(&mut self, target: AgentAddress, payload: impl Into<Vec<u8>>) -> &mut Self {
        self.ops.push(Operation::Forward {
            target,
            payload: payload.into(),
        });
        self
    }

    pub fn deliver(&mut self, payload: impl Into<Vec<u8>>) -> &mut Self {
        self.ops.push(Operation::Deliver {
            payload: payload.into(),
        });
        self
    }

    pub fn send_message(&mut self, target: AgentAddress, payload: impl Into<Vec<u8>>) -> &mut Self {
        self.ops.push(Operation::SendMessage {
            target,
            payload: payload.into(),
        });
        self
    }

    pub fn impose_obligation(&mut self, name: impl Into<String>, dt_ms: i64) -> &mut Self {
        self.ops.push(Operation::ImposeObligation {
            name: name.into(),
            dt_ms,
        });
        self
    }

    pub fn quit_self(&mut self) -> &mut Self {
        self.ops.push(Operation::QuitSelf);
        self
    }

    pub fn build(self) -> Ruling {
        Ruling {
            operations: self.ops,
            new_state: self.state,
        }
    }
}

// ---------------------------------------------------------------------------
// The Law trait and registry
// ---------------------------------------------------------------------------

/// A deterministic, local law. `evaluate` must be total over all
/// (event, state) pairs — an unmatched event yields the empty ruling — and
/// may consult nothing but its two arguments: the interface exposes no
/// clock, no randomness, and no other controller's state.
pub trait Law: Send + Sync {
    /// Canonical description of the law's rules and parameters; the
    /// registry hashes this to derive the version hash, so any rule or
    /// parameter change must change these bytes.
    fn definition_bytes(&self) -> Vec<u8>;

    fn evaluate(&self, event: &Event, state: &ControllerState) -> Ruling;
}

#[derive(Debug, Error)]
pub enum LawError {
    #[error("law {id} already registered with a different definition hash ({existing} != {new})")]
    DuplicateLawId {
        id: LawId,
        existing: String,
        new: String,
    },
    #[error("unknown law {0}")]
    UnknownLaw(LawId),
}

struct RegisteredLaw {
    law: Arc<dyn Law>,
    version_hash: [u8; 32],
}

/// Resolves laws by id. Registration is write-once per id: re-registering
/// the identical definition is a no-op, a different definition under the
/// same id is a version conflict.
#[derive(Default)]
pub struct LawRegistry {
    laws: RwLock<HashMap<String, RegisteredLaw>>,
}

impl LawRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&self, id: impl Into<String>, law: Arc<dyn Law>) -> Result<LawId, LawError> {
        let id = id.into();
        let hash = sha256(&law.definition_bytes());
        let mut laws = self.laws.write().unwrap();
        if let Some(existing) = laws.get(&id) {
            if existing.version_hash != hash {
                return Err(LawError::DuplicateLawId {
                    id: LawId::new(id),
                    existing: crate::codec::hex(&existing.version_hash),
                    new: crate::codec::hex(&hash),
                });
            }
            return Ok(LawId::new(id));
        }
        laws.insert(
            id.clone(),
            RegisteredLaw {
                law,
                version_hash: hash,
            },
        );
        Ok(LawId::new(id))
    }

    pub fn get(&self, id: &LawId) -> Result<Arc<dyn Law>, LawError> {
        self.laws
            .read()
            .unwrap()
            .get(id.as_str())
            .map(|r| Arc::clone(&r.law))
            .ok_or_else(|| LawError::UnknownLaw(id.clone()))
    }

    pub fn version_hash(&self, id: &LawId) -> Option<[u8; 32]> {
        self.laws
            .read()
            .unwrap()
            .get(id.as_str())
            .map(|r| r.version_hash)
    }

    pub fn contains(&self, id: &LawId) -> bool {
        self.laws.read().unwrap().contains_key(id.as_str())
    }

    pub fn law_ids(&self) -> Vec<LawId> {
        let mut ids: Vec<LawId> = self
            .laws
            .read()
            .unwrap()
            .keys()
            .map(|k| LawId::new(k.clone()))
            .collect();
        ids.sort();
        ids
    }

    /// Evaluate a registered law. The state is borrowed immutably; repeated
    /// calls with equal arguments produce byte-identical rulings.
    pub fn evaluate(
        &self,
        id: &LawId,
        event: &Event,
        state: &ControllerState,
    ) -> Result<Ruling, LawError> {
        Ok(self.get(id)?.evaluate(event, state))
    }
}

#[cfg(test)]
mod tests;
