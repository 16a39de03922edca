use std::sync::Arc;

use proptest::prelude::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::codec::Canonical;

pub(crate) fn addr(node: u64, ctrl: u64) -> AgentAddress {
    AgentAddress::new(CpNodeId(node), ControllerId(ctrl))
}

fn adopted(controller: u64) -> Event {
    Event {
        kind: EventKind::Adopted,
        source: None,
        target: None,
        payload: Vec::new(),
        controller: ControllerId(controller),
        seq: 1,
    }
}

fn sent(controller: u64, seq: u64, target: AgentAddress, amount: i64) -> Event {
    Event {
        kind: EventKind::Sent,
        source: Some(addr(0, controller)),
        target: Some(target),
        payload: amount_payload(amount),
        controller: ControllerId(controller),
        seq,
    }
}

fn arrived(controller: u64, seq: u64, source: AgentAddress, amount: i64) -> Event {
    Event {
        kind: EventKind::Arrived,
        source: Some(source),
        target: Some(addr(0, controller)),
        payload: amount_payload(amount),
        controller: ControllerId(controller),
        seq,
    }
}

fn budget_state(budget: i64) -> ControllerState {
    ControllerState::empty().with(MoneyTransferLaw::BUDGET, TermValue::Int(budget))
}

fn mt_registry() -> LawRegistry {
    let reg = LawRegistry::new();
    reg.register("MT", Arc::new(MoneyTransferLaw::default()))
        .unwrap();
    reg
}

// -- registration ------------------------------------------------------------

#[test]
fn law_hash_is_stable_across_registries() {
    let a = LawRegistry::new();
    let b = LawRegistry::new();
    a.register("MT", Arc::new(MoneyTransferLaw::default())).unwrap();
    b.register("MT", Arc::new(MoneyTransferLaw::default())).unwrap();
    assert_eq!(
        a.version_hash(&LawId::new("MT")).unwrap(),
        b.version_hash(&LawId::new("MT")).unwrap()
    );
}

#[test]
fn reregistering_identical_definition_is_idempotent() {
    let reg = mt_registry();
    reg.register("MT", Arc::new(MoneyTransferLaw::default())).unwrap();
    assert!(reg.contains(&LawId::new("MT")));
}

#[test]
fn registering_changed_definition_is_a_version_conflict() {
    let reg = mt_registry();
    // Same id, one rule constant changed: a different law entirely.
    let err = reg
        .register("MT", Arc::new(MoneyTransferLaw::new(999)))
        .unwrap_err();
    assert!(matches!(err, LawError::DuplicateLawId { .. }));
}

#[test]
fn evaluate_unknown_law_errors() {
    let reg = LawRegistry::new();
    let err = reg
        .evaluate(&LawId::new("nope"), &adopted(1), &ControllerState::empty())
        .unwrap_err();
    assert!(matches!(err, LawError::UnknownLaw(_)));
}

// -- money transfer rulings ---------------------------------------------------

#[test]
fn mt_adoption_grants_initial_budget() {
    let reg = mt_registry();
    let ruling = reg
        .evaluate(&LawId::new("MT"), &adopted(1), &ControllerState::empty())
        .unwrap();
    assert_eq!(
        ruling.operations,
        vec![Operation::SetTerm {
            key: "budget".into(),
            value: TermValue::Int(1000),
        }]
    );
    assert_eq!(ruling.new_state, budget_state(1000));
}

#[test]
fn mt_blocks_transfer_exceeding_budget() {
    let reg = mt_registry();
    let state = budget_state(1000);
    let ruling = reg
        .evaluate(&LawId::new("MT"), &sent(1, 2, addr(0, 2), 1500), &state)
        .unwrap();
    assert!(ruling.operations.is_empty());
    assert_eq!(ruling.new_state, state);
}

#[test]
fn mt_legal_transfer_deducts_and_forwards() {
    let reg = mt_registry();
    let target = addr(0, 2);
    let ruling = reg
        .evaluate(&LawId::new("MT"), &sent(1, 2, target, 200), &budget_state(1000))
        .unwrap();
    assert_eq!(
        ruling.operations,
        vec![
            Operation::SetTerm {
                key: "budget".into(),
                value: TermValue::Int(800),
            },
            Operation::Forward {
                target,
                payload: b"200".to_vec(),
            },
        ]
    );
    assert_eq!(ruling.new_state, budget_state(800));
}

#[test]
fn mt_arrival_deposits_and_delivers() {
    let reg = mt_registry();
    let ruling = reg
        .evaluate(
            &LawId::new("MT"),
            &arrived(1, 2, addr(0, 2), 200),
            &budget_state(500),
        )
        .unwrap();
    assert_eq!(
        ruling.operations,
        vec![
            Operation::SetTerm {
                key: "budget".into(),
                value: TermValue::Int(700),
            },
            Operation::Deliver {
                payload: b"200".to_vec(),
            },
        ]
    );
    assert_eq!(ruling.new_state, budget_state(700));
}

#[test]
fn mt_negative_arrival_is_blocked() {
    let reg = mt_registry();
    let state = budget_state(500);
    let ruling = reg
        .evaluate(&LawId::new("MT"), &arrived(1, 2, addr(0, 2), -5), &state)
        .unwrap();
    assert!(ruling.operations.is_empty());
    assert_eq!(ruling.new_state, state);
}

#[test]
fn mt_unmatched_events_yield_empty_ruling() {
    let reg = mt_registry();
    let state = budget_state(77);
    for kind in [EventKind::ObligationDue, EventKind::Exception, EventKind::Quit] {
        let event = Event {
            kind,
            source: None,
            target: None,
            payload: b"whatever".to_vec(),
            controller: ControllerId(1),
            seq: 5,
        };
        let ruling = reg.evaluate(&LawId::new("MT"), &event, &state).unwrap();
        assert!(ruling.operations.is_empty());
        assert_eq!(ruling.new_state, state);
    }
}

#[test]
fn mt_garbage_payload_is_blocked_not_a_panic() {
    let reg = mt_registry();
    let state = budget_state(500);
    let mut event = sent(1, 2, addr(0, 9), 1);
    event.payload = b"not-a-number".to_vec();
    let ruling = reg.evaluate(&LawId::new("MT"), &event, &state).unwrap();
    assert!(ruling.operations.is_empty());
    assert_eq!(ruling.new_state, state);
}

// -- monitoring rulings --------------------------------------------------------

#[test]
fn mo_adoption_sends_birth_record_to_monitor() {
    let monitor = addr(0, 77);
    let reg = LawRegistry::new();
    reg.register("MO", Arc::new(MonitoringLaw::new(monitor))).unwrap();
    let ruling = reg
        .evaluate(&LawId::new("MO"), &adopted(5), &ControllerState::empty())
        .unwrap();
    assert_eq!(
        ruling.operations,
        vec![Operation::SendMessage {
            target: monitor,
            payload: mo_birth_record(5),
        }]
    );
}

#[test]
fn mo_sent_forwards_and_copies_with_both_addresses() {
    let monitor = addr(0, 77);
    let reg = LawRegistry::new();
    reg.register("MO", Arc::new(MonitoringLaw::new(monitor))).unwrap();
    let source = addr(0, 5);
    let target = addr(1, 6);
    let event = Event {
        kind: EventKind::Sent,
        source: Some(source),
        target: Some(target),
        payload: b"hi".to_vec(),
        controller: ControllerId(5),
        seq: 2,
    };
    let ruling = reg
        .evaluate(&LawId::new("MO"), &event, &ControllerState::empty())
        .unwrap();
    assert_eq!(
        ruling.operations,
        vec![
            Operation::Forward {
                target,
                payload: b"hi".to_vec(),
            },
            Operation::SendMessage {
                target: monitor,
                payload: mo_copy_record(source, target, b"hi"),
            },
        ]
    );
    let record = MoRecord::from_canonical_bytes(&mo_copy_record(source, target, b"hi")).unwrap();
    assert_eq!(
        record,
        MoRecord::Copy {
            source,
            target,
            payload: b"hi".to_vec()
        }
    );
}

#[test]
fn password_law_rules_quit_on_bad_credential() {
    let reg = LawRegistry::new();
    reg.register("PW", Arc::new(PasswordLaw::new("sesame"))).unwrap();
    let mut event = adopted(3);
    event.payload = b"wrong".to_vec();
    let ruling = reg
        .evaluate(&LawId::new("PW"), &event, &ControllerState::empty())
        .unwrap();
    assert_eq!(ruling.operations, vec![Operation::QuitSelf]);

    event.payload = b"sesame".to_vec();
    let ruling = reg
        .evaluate(&LawId::new("PW"), &event, &ControllerState::empty())
        .unwrap();
    assert!(!ruling.contains_kind(OpKind::QuitSelf));
}

// -- canonical bytes -----------------------------------------------------------

#[test]
fn canonical_bytes_are_deterministic() {
    let empty = Ruling::unchanged(&ControllerState::empty());
    assert_eq!(canonical_bytes(&empty), canonical_bytes(&empty.clone()));
}

#[test]
fn operation_order_changes_canonical_bytes() {
    let set = Operation::SetTerm {
        key: "budget".into(),
        value: TermValue::Int(800),
    };
    let fwd = Operation::Forward {
        target: addr(0, 2),
        payload: b"200".to_vec(),
    };
    let state = budget_state(800);
    let a = Ruling {
        operations: vec![set.clone(), fwd.clone()],
        new_state: state.clone(),
    };
    let b = Ruling {
        operations: vec![fwd, set],
        new_state: state,
    };
    assert_ne!(canonical_bytes(&a), canonical_bytes(&b));
}

#[test]
fn argument_insertion_order_does_not_change_canonical_bytes() {
    let key_first = Operation::from_args(
        OpKind::SetTerm,
        vec![
            ("key".into(), ArgValue::Str("budget".into())),
            ("value".into(), ArgValue::Int(1000)),
        ],
    )
    .unwrap();
    let value_first = Operation::from_args(
        OpKind::SetTerm,
        vec![
            ("value".into(), ArgValue::Int(1000)),
            ("key".into(), ArgValue::Str("budget".into())),
        ],
    )
    .unwrap();
    assert_eq!(
        key_first.to_canonical_bytes(),
        value_first.to_canonical_bytes()
    );
}

#[test]
fn from_args_rejects_missing_and_unknown_arguments() {
    let err = Operation::from_args(OpKind::Deliver, vec![]).unwrap_err();
    assert!(matches!(err, OperationArgError::Missing { .. }));
    let err = Operation::from_args(
        OpKind::QuitSelf,
        vec![("extra".into(), ArgValue::Int(1))],
    )
    .unwrap_err();
    assert!(matches!(err, OperationArgError::Unknown { .. }));
}

// -- randomized properties -----------------------------------------------------

pub(crate) fn random_state(rng: &mut ChaCha8Rng) -> ControllerState {
    let mut state = ControllerState::empty();
    for _ in 0..rng.random_range(0..5) {
        let key = format!("k{}", rng.random_range(0..8));
        let value = match rng.random_range(0..3) {
            0 => TermValue::Int(rng.random_range(-1000..100_000)),
            1 => TermValue::Str(format!("v{}", rng.random_range(0..100))),
            _ => TermValue::Bytes((0..rng.random_range(0..6)).map(|_| rng.random()).collect()),
        };
        state.set(key, value);
    }
    state
}

pub(crate) fn random_event(rng: &mut ChaCha8Rng) -> Event {
    let kind = *[
        EventKind::Adopted,
        EventKind::Arrived,
        EventKind::Sent,
        EventKind::ObligationDue,
        EventKind::Exception,
        EventKind::Quit,
    ]
    .choose(rng)
    .unwrap();
    let controller = ControllerId(rng.random_range(1..50));
    let other = addr(rng.random_range(0..4), rng.random_range(1..50));
    let own = addr(0, controller.0);
    let (source, target) = match kind {
        EventKind::Sent => (Some(own), Some(other)),
        EventKind::Arrived => (Some(other), Some(own)),
        EventKind::Exception => (Some(other), None),
        _ => (None, None),
    };
    let payload = if rng.random_bool(0.7) {
        amount_payload(rng.random_range(-100..2_000))
    } else {
        (0..rng.random_range(0..10)).map(|_| rng.random()).collect()
    };
    Event {
        kind,
        source,
        target,
        payload,
        controller,
        seq: rng.random_range(1..200),
    }
}

#[test]
fn purity_thousand_random_pairs_evaluate_identically_twice() {
    let monitor = addr(0, 77);
    let reg = LawRegistry::new();
    reg.register("MT", Arc::new(MoneyTransferLaw::default())).unwrap();
    reg.register("MO", Arc::new(MonitoringLaw::new(monitor))).unwrap();
    reg.register("LOCK", Arc::new(LockLaw::new(100))).unwrap();
    reg.register("PW", Arc::new(PasswordLaw::new("pw"))).unwrap();
    reg.register("OPEN", Arc::new(OpenLaw)).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(0x1a3);
    let ids = reg.law_ids();
    for i in 0..1000 {
        let event = random_event(&mut rng);
        let state = random_state(&mut rng);
        let id = &ids[i % ids.len()];
        let once = reg.evaluate(id, &event, &state).unwrap();
        let twice = reg.evaluate(id, &event, &state).unwrap();
        assert_eq!(
            canonical_bytes(&once),
            canonical_bytes(&twice),
            "law {id} not pure on {event:?}"
        );
    }
}

#[test]
fn locality_rulings_do_not_depend_on_registry_population() {
    let lean = LawRegistry::new();
    lean.register("MT", Arc::new(MoneyTransferLaw::default())).unwrap();
    let crowded = LawRegistry::new();
    crowded.register("MT", Arc::new(MoneyTransferLaw::default())).unwrap();
    crowded.register("OPEN", Arc::new(OpenLaw)).unwrap();
    crowded
        .register("PW", Arc::new(PasswordLaw::new("x")))
        .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let event = random_event(&mut rng);
        let state = random_state(&mut rng);
        let a = lean.evaluate(&LawId::new("MT"), &event, &state).unwrap();
        let b = crowded.evaluate(&LawId::new("MT"), &event, &state).unwrap();
        assert_eq!(canonical_bytes(&a), canonical_bytes(&b));
    }
}

#[test]
fn mt_rulings_conserve_value_per_evaluation() {
    let reg = mt_registry();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..500 {
        let budget = rng.random_range(0..2_000);
        let amount = rng.random_range(-100..2_000);
        let state = budget_state(budget);
        let event = if rng.random_bool(0.5) {
            sent(1, 2, addr(0, 2), amount)
        } else {
            arrived(1, 2, addr(0, 2), amount)
        };
        let ruling = reg.evaluate(&LawId::new("MT"), &event, &state).unwrap();
        let new_budget = ruling.new_state.get_int("budget").unwrap_or(0);
        if ruling.contains_kind(OpKind::Forward) {
            assert_eq!(new_budget, budget - amount);
            assert!(new_budget >= 0, "overdraft ruled legal");
        } else if ruling.contains_kind(OpKind::Deliver) {
            assert_eq!(new_budget, budget + amount);
        } else {
            assert_eq!(new_budget, budget);
        }
    }
}

// -- codec round trips ----------------------------------------------------------

fn arb_term_value() -> impl Strategy<Value = TermValue> {
    prop_oneof![
        any::<i64>().prop_map(TermValue::Int),
        "[a-z]{0,8}".prop_map(TermValue::Str),
        proptest::collection::vec(any::<u8>(), 0..16).prop_map(TermValue::Bytes),
    ]
}

fn arb_state() -> impl Strategy<Value = ControllerState> {
    proptest::collection::btree_map("[a-z]{1,6}", arb_term_value(), 0..6)
        .prop_map(|terms| ControllerState { terms })
}

fn arb_address() -> impl Strategy<Value = AgentAddress> {
    (any::<u64>(), any::<u64>()).prop_map(|(n, c)| addr(n, c))
}

fn arb_operation() -> impl Strategy<Value = Operation> {
    prop_oneof![
        ("[a-z]{1,6}", arb_term_value())
            .prop_map(|(key, value)| Operation::SetTerm { key, value }),
        (arb_address(), proptest::collection::vec(any::<u8>(), 0..12))
            .prop_map(|(target, payload)| Operation::Forward { target, payload }),
        proptest::collection::vec(any::<u8>(), 0..12)
            .prop_map(|payload| Operation::Deliver { payload }),
        (arb_address(), proptest::collection::vec(any::<u8>(), 0..12))
            .prop_map(|(target, payload)| Operation::SendMessage { target, payload }),
        ("[a-z]{1,6}", 0i64..1_000_000)
            .prop_map(|(name, dt_ms)| Operation::ImposeObligation { name, dt_ms }),
        Just(Operation::QuitSelf),
        Just(Operation::RulingEnd),
    ]
}

fn arb_event() -> impl Strategy<Value = Event> {
    (
        prop_oneof![
            Just(EventKind::Adopted),
            Just(EventKind::Arrived),
            Just(EventKind::Sent),
            Just(EventKind::ObligationDue),
            Just(EventKind::Exception),
            Just(EventKind::Quit),
        ],
        proptest::option::of(arb_address()),
        proptest::option::of(arb_address()),
        proptest::collection::vec(any::<u8>(), 0..16),
        any::<u64>(),
        1u64..10_000,
    )
        .prop_map(|(kind, source, target, payload, ctrl, seq)| Event {
            kind,
            source,
            target,
            payload,
            controller: ControllerId(ctrl),
            seq,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn state_roundtrips(state in arb_state()) {
        let bytes = state.to_canonical_bytes();
        prop_assert_eq!(ControllerState::from_canonical_bytes(&bytes).unwrap(), state);
    }

    #[test]
    fn operation_roundtrips(op in arb_operation()) {
        let bytes = op.to_canonical_bytes();
        prop_assert_eq!(Operation::from_canonical_bytes(&bytes).unwrap(), op);
    }

    #[test]
    fn event_roundtrips(event in arb_event()) {
        let bytes = event.to_canonical_bytes();
        prop_assert_eq!(Event::from_canonical_bytes(&bytes).unwrap(), event);
    }

    #[test]
    fn ruling_roundtrips(
        ops in proptest::collection::vec(arb_operation(), 0..6),
        state in arb_state(),
    ) {
        let ruling = Ruling { operations: ops, new_state: state };
        let bytes = canonical_bytes(&ruling);
        prop_assert_eq!(Ruling::from_canonical_bytes(&bytes).unwrap(), ruling);
    }

    #[test]
    fn distinct_rulings_encode_distinctly(
        a_ops in proptest::collection::vec(arb_operation(), 0..4),
        b_ops in proptest::collection::vec(arb_operation(), 0..4),
        state in arb_state(),
    ) {
        let a = Ruling { operations: a_ops, new_state: state.clone() };
        let b = Ruling { operations: b_ops, new_state: state };
        if a != b {
            prop_assert_ne!(canonical_bytes(&a), canonical_bytes(&b));
        } else {
            prop_assert_eq!(canonical_bytes(&a), canonical_bytes(&b));
        }
    }
}
