//! Built-in laws.
//!
//! `MoneyTransferLaw` grants every adopting agent an initial budget and lets
//! it transfer any positive amount up to that budget. `MonitoringLaw` copies
//! every sent message, with sender and target addresses, to a designated
//! monitor. `PasswordLaw` and `LockLaw` are small laws used to exercise the
//! adoption-rejection and enforced-obligation paths, and `OpenLaw` forwards
//! and delivers everything.

use crate::codec::{Canonical, Reader, Writer};

use super::{AgentAddress, ControllerState, Event, EventKind, Law, Ruling, RulingBuilder, TermValue};

/// Parse a payload as a whole-currency decimal integer amount. Anything that
/// is not a plain (optionally negative) ASCII decimal is `None`.
pub fn parse_amount(payload: &[u8]) -> Option<i64> {
    let s = std::str::from_utf8(payload).ok()?;
    if s.is_empty() {
        return None;
    }
    s.parse::<i64>().ok()
}

/// Render an amount as its canonical payload bytes.
pub fn amount_payload(amount: i64) -> Vec<u8> {
    amount.to_string().into_bytes()
}

// ---------------------------------------------------------------------------
// Money transfer
// ---------------------------------------------------------------------------

/// Every adopting agent is granted `initial_budget`; it may send any
/// positive amount not greater than its current budget, which is then
/// deducted; a received positive amount is deposited. Payloads are decimal
/// integer amounts in whole currency units.
pub struct MoneyTransferLaw {
    pub initial_budget: i64,
}

impl MoneyTransferLaw {
    pub const BUDGET: &'static str = "budget";

    pub fn new(initial_budget: i64) -> Self {
        Self { initial_budget }
    }
}

impl Default for MoneyTransferLaw {
    fn default() -> Self {
        Self::new(1000)
    }
}

impl Law for MoneyTransferLaw {
    fn definition_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_str("money-transfer/v1");
        w.put_i64(self.initial_budget);
        w.into_bytes()
    }

    fn evaluate(&self, event: &Event, state: &ControllerState) -> Ruling {
        match event.kind {
            EventKind::Adopted => {
                let mut b = RulingBuilder::from_state(state);
                b.set_term(Self::BUDGET, TermValue::Int(self.initial_budget));
                b.build()
            }
            EventKind::Sent => {
                let budget = state.get_int(Self::BUDGET).unwrap_or(0);
                match (event.amount(), event.target) {
                    (Some(amount), Some(target)) if amount > 0 && amount <= budget => {
                        let mut b = RulingBuilder::from_state(state);
                        b.set_term(Self::BUDGET, TermValue::Int(budget - amount));
                        b.forward(target, event.payload.clone());
                        b.build()
                    }
                    _ => Ruling::unchanged(state),
                }
            }
            EventKind::Arrived => {
                let budget = state.get_int(Self::BUDGET).unwrap_or(0);
                match event.amount() {
                    Some(amount) if amount > 0 => {
                        let mut b = RulingBuilder::from_state(state);
                        b.set_term(Self::BUDGET, TermValue::Int(budget + amount));
                        b.deliver(event.payload.clone());
                        b.build()
                    }
                    _ => Ruling::unchanged(state),
                }
            }
            _ => Ruling::unchanged(state),
        }
    }
}

// ---------------------------------------------------------------------------
// Monitoring
// ---------------------------------------------------------------------------

/// A record delivered to the monitor of a monitored community.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoRecord {
    /// A newborn agent announcing itself.
    Birth { controller: u64 },
    /// A copy of a sent message together with both endpoint addresses.
    Copy {
        source: AgentAddress,
        target: AgentAddress,
        payload: Vec<u8>,
    },
}

impl Canonical for MoRecord {
    fn write(&self, w: &mut Writer) {
        match self {
            MoRecord::Birth { controller } => {
                w.put_u8(1);
                w.put_u64(*controller);
            }
            MoRecord::Copy {
                source,
                target,
                payload,
            } => {
                w.put_u8(2);
                source.write(w);
                target.write(w);
                w.put_bytes(payload);
            }
        }
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, crate::codec::CodecError> {
        match r.get_u8()? {
            1 => Ok(MoRecord::Birth {
                controller: r.get_u64()?,
            }),
            2 => Ok(MoRecord::Copy {
                source: AgentAddress::read(r)?,
                target: AgentAddress::read(r)?,
                payload: r.get_bytes()?,
            }),
            tag => Err(crate::codec::CodecError::InvalidTag {
                context: "MoRecord",
                tag,
            }),
        }
    }
}

pub fn mo_birth_record(controller: u64) -> Vec<u8> {
    MoRecord::Birth { controller }.to_canonical_bytes()
}

pub fn mo_copy_record(source: AgentAddress, target: AgentAddress, payload: &[u8]) -> Vec<u8> {
    MoRecord::Copy {
        source,
        target,
        payload: payload.to_vec(),
    }
    .to_canonical_bytes()
}

/// On adoption the newborn agent's controller reports its birth to the
/// designated monitor; every sent message is forwarded and a copy of it,
/// with the sender and target addresses, goes to the monitor as well.
/// Arrived messages are delivered unchanged — monitoring observes, it does
/// not block.
pub struct MonitoringLaw {
    pub monitor: AgentAddress,
}

impl MonitoringLaw {
    pub fn new(monitor: AgentAddress) -> Self {
        Self { monitor }
    }
}

impl Law for MonitoringLaw {
    fn definition_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_str("monitoring/v1");
        self.monitor.write(&mut w);
        w.into_bytes()
    }

    fn evaluate(&self, event: &Event, state: &ControllerState) -> Ruling {
        match event.kind {
            EventKind::Adopted => {
                let mut b = RulingBuilder::from_state(state);
                b.send_message(self.monitor, mo_birth_record(event.controller.0));
                b.build()
            }
            EventKind::Sent => match (event.source, event.target) {
                (Some(source), Some(target)) => {
                    let mut b = RulingBuilder::from_state(state);
                    b.forward(target, event.payload.clone());
                    b.send_message(self.monitor, mo_copy_record(source, target, &event.payload));
                    b.build()
                }
                _ => Ruling::unchanged(state),
            },
            EventKind::Arrived => {
                let mut b = RulingBuilder::from_state(state);
                b.deliver(event.payload.clone());
                b.build()
            }
            _ => Ruling::unchanged(state),
        }
    }
}

// ---------------------------------------------------------------------------
// Password-gated adoption
// ---------------------------------------------------------------------------

/// Adoption must present the community password; a wrong credential rules a
/// `quit_self`, rejecting the agent. Members forward and deliver freely.
pub struct PasswordLaw {
    pub password: Vec<u8>,
}

impl PasswordLaw {
    pub fn new(password: impl Into<Vec<u8>>) -> Self {
        Self {
            password: password.into(),
        }
    }
}

impl Law for PasswordLaw {
    fn definition_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_str("password/v1");
        w.put_bytes(&self.password);
        w.into_bytes()
    }

    fn evaluate(&self, event: &Event, state: &ControllerState) -> Ruling {
        match event.kind {
            EventKind::Adopted => {
                let mut b = RulingBuilder::from_state(state);
                if event.payload == self.password {
                    b.set_term("authed", TermValue::Int(1));
                } else {
                    b.quit_self();
                }
                b.build()
            }
            EventKind::Sent => match event.target {
                Some(target) => {
                    let mut b = RulingBuilder::from_state(state);
                    b.forward(target, event.payload.clone());
                    b.build()
                }
                None => Ruling::unchanged(state),
            },
            EventKind::Arrived => {
                let mut b = RulingBuilder::from_state(state);
                b.deliver(event.payload.clone());
                b.build()
            }
            _ => Ruling::unchanged(state),
        }
    }
}

// ---------------------------------------------------------------------------
// Lock holding with an enforced release obligation
// ---------------------------------------------------------------------------

pub const LOCK_OBLIGATION: &str = "release-lock";

pub fn lock_acquire_payload() -> Vec<u8> {
    b"acquire".to_vec()
}

pub fn lock_release_payload() -> Vec<u8> {
    b"release".to_vec()
}

/// Sending `acquire` takes the lock and imposes an obligation to release it
/// within `hold_ms`; sending `release` drops it. If the obligation comes due
/// while the lock is still held, the sanction releases it and notifies the
/// peer the lock was acquired from.
pub struct LockLaw {
    pub hold_ms: i64,
}

impl LockLaw {
    pub fn new(hold_ms: i64) -> Self {
        Self { hold_ms }
    }
}

impl Law for LockLaw {
    fn definition_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_str("lock/v1");
        w.put_i64(self.hold_ms);
        w.into_bytes()
    }

    fn evaluate(&self, event: &Event, state: &ControllerState) -> Ruling {
        match event.kind {
            EventKind::Sent => match event.target {
                Some(target) if event.payload == lock_acquire_payload() => {
                    let mut b = RulingBuilder::from_state(state);
                    b.set_term("holds", TermValue::Int(1));
                    b.set_term(
                        "lock_peer",
                        TermValue::Bytes(target.to_canonical_bytes()),
                    );
                    b.impose_obligation(LOCK_OBLIGATION, self.hold_ms);
                    b.forward(target, event.payload.clone());
                    b.build()
                }
                Some(target) if event.payload == lock_release_payload() => {
                    let mut b = RulingBuilder::from_state(state);
                    b.set_term("holds", TermValue::Int(0));
                    b.forward(target, event.payload.clone());
                    b.build()
                }
                Some(target) => {
                    let mut b = RulingBuilder::from_state(state);
                    b.forward(target, event.payload.clone());
                    b.build()
                }
                None => Ruling::unchanged(state),
            },
            EventKind::ObligationDue => {
                if event.payload == LOCK_OBLIGATION.as_bytes()
                    && state.get_int("holds") == Some(1)
                {
                    let peer = state
                        .get_bytes("lock_peer")
                        .and_then(|raw| AgentAddress::from_canonical_bytes(raw).ok());
                    let mut b = RulingBuilder::from_state(state);
                    b.set_term("holds", TermValue::Int(0));
                    if let Some(peer) = peer {
                        b.send_message(peer, lock_release_payload());
                    }
                    b.build()
                } else {
                    Ruling::unchanged(state)
                }
            }
            EventKind::Arrived => {
                let mut b = RulingBuilder::from_state(state);
                b.deliver(event.payload.clone());
                b.build()
            }
            _ => Ruling::unchanged(state),
        }
    }
}

// ---------------------------------------------------------------------------
// Open (permissive) law
// ---------------------------------------------------------------------------

/// Forwards every send and delivers every arrival. Useful for sink agents
/// such as a community monitor, which must receive cross-law traffic without
/// imposing rules of its own.
pub struct OpenLaw;

impl Law for OpenLaw {
    fn definition_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.put_str("open/v1");
        w.into_bytes()
    }

    fn evaluate(&self, event: &Event, state: &ControllerState) -> Ruling {
        match event.kind {
            EventKind::Sent => match event.target {
                Some(target) => {
                    let mut b = RulingBuilder::from_state(state);
                    b.forward(target, event.payload.clone());
                    b.build()
                }
                None => Ruling::unchanged(state),
            },
            EventKind::Arrived => {
                let mut b = RulingBuilder::from_state(state);
                b.deliver(event.payload.clone());
                b.build()
            }
            _ => Ruling::unchanged(state),
        }
    }
}

