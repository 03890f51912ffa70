//! Property check bodies shared by the property suites and the acceptance
//! gate. Each check takes generated inputs and reports the first violation.

use proptest::prelude::*;

use imnet::error::EvalError;
use imnet::exec::{exec_add_rules, exec_assign, exec_register, exec_send, exec_stmt};
use imnet::fabric::{Fabric, FabricConfig, Topology};
use imnet::model::{
    event_typecheck, Action, Binding, Event, MachineState, Packet, Pattern, Rule, RuleList,
    SwitchId, Value, ValueSet, VarState,
};
use imnet::syntax::ast::{ArithOp, CmpOp, EventTransformer, Expr, Lambda, Program, Stmt};
use imnet::syntax::parser::parse_program;
use imnet::syntax::printer::print_program;
use imnet::transform::{eval_filter, eval_lift, eval_merge, eval_mix_fst, eval_mix_snd};

use super::generators::{arb_nat_event, arb_packet, arb_rule_list};

pub fn test_fabric() -> Fabric {
    let topology = Topology::builder()
        .switch("id1", [1, 2])
        .switch("id2", [1, 2])
        .link("id1", 2, "id2", 2)
        .build()
        .unwrap();
    Fabric::new(topology, FabricConfig::default())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn ensure_eq<T: PartialEq + std::fmt::Debug>(a: &T, b: &T, what: &str) -> Result<(), String> {
    ensure(a == b, format!("{what}: {a:?} != {b:?}"))
}

fn nat_expr(n: u64) -> Expr {
    Expr::Const(Value::Nat(n))
}

fn var_t() -> Expr {
    Expr::Var("t".into())
}

/// First-order bodies over one nat-typed variable `t`; composed by
/// substitution for the functor laws.
#[derive(Debug, Clone)]
pub enum Body {
    Identity,
    AddConst(u64),
    PairWithConst(u64),
    EqConst(u64),
}

impl Body {
    pub fn expr(&self) -> Expr {
        match self {
            Body::Identity => var_t(),
            Body::AddConst(k) => {
                Expr::Arith(ArithOp::Add, Box::new(var_t()), Box::new(nat_expr(*k)))
            }
            Body::PairWithConst(k) => Expr::Tuple(vec![var_t(), nat_expr(*k)]),
            Body::EqConst(k) => Expr::Cmp(CmpOp::Eq, Box::new(var_t()), Box::new(nat_expr(*k))),
        }
    }
}

pub fn arb_body() -> impl Strategy<Value = Body> {
    prop_oneof![
        Just(Body::Identity),
        (0u64..100).prop_map(Body::AddConst),
        (0u64..100).prop_map(Body::PairWithConst),
        (0u64..100).prop_map(Body::EqConst),
    ]
}

/// Substitutes `replacement` for `Var(param)` in `body`.
pub fn subst(body: &Expr, param: &str, replacement: &Expr) -> Expr {
    match body {
        Expr::Var(name) if name == param => replacement.clone(),
        Expr::Var(_) | Expr::Const(_) => body.clone(),
        Expr::Tuple(items) => {
            Expr::Tuple(items.iter().map(|e| subst(e, param, replacement)).collect())
        }
        Expr::Proj(index, base) => Expr::Proj(*index, Box::new(subst(base, param, replacement))),
        Expr::Builtin(b, args) => {
            Expr::Builtin(*b, args.iter().map(|e| subst(e, param, replacement)).collect())
        }
        Expr::Cmp(op, l, r) => Expr::Cmp(
            *op,
            Box::new(subst(l, param, replacement)),
            Box::new(subst(r, param, replacement)),
        ),
        Expr::Arith(op, l, r) => Expr::Arith(
            *op,
            Box::new(subst(l, param, replacement)),
            Box::new(subst(r, param, replacement)),
        ),
    }
}

fn lift_body(body: Expr, event: &Event, fabric: &Fabric) -> Result<Event, EvalError> {
    let mut gamma = VarState::empty();
    gamma.bind("x", Binding::Event(event.clone()));
    eval_lift("x", &Lambda::new("t", body), &gamma, &fabric.view())
}

pub fn check_lift_identity(event: Event) -> Result<(), String> {
    let fabric = test_fabric();
    let out = lift_body(Body::Identity.expr(), &event, &fabric).map_err(|e| e.to_string())?;
    ensure_eq(&out, &event, "Lift(id) != id")
}

pub fn check_lift_composition(f: Body, g: Body, event: Event) -> Result<(), String> {
    let fabric = test_fabric();
    let composed = lift_body(subst(&f.expr(), "t", &g.expr()), &event, &fabric);
    let two_pass =
        lift_body(g.expr(), &event, &fabric).and_then(|mid| lift_body(f.expr(), &mid, &fabric));
    match (composed, two_pass) {
        (Ok(a), Ok(b)) => ensure_eq(&a, &b, "Lift(f.g) != Lift(f).Lift(g)"),
        (a, b) => ensure(
            a.is_err() == b.is_err(),
            format!("definedness differs: {a:?} vs {b:?}"),
        ),
    }
}

pub fn check_merge_length(pairs: Vec<(u64, u64)>) -> Result<(), String> {
    let left = Event::new(pairs.iter().map(|(a, _)| Value::Nat(*a)).collect());
    let right = Event::new(pairs.iter().map(|(_, b)| Value::Nat(*b)).collect());
    let mut gamma = VarState::empty();
    gamma.bind("a", Binding::Event(left.clone()));
    gamma.bind("b", Binding::Event(right.clone()));
    let out = eval_merge("a", "b", &gamma).map_err(|e| e.to_string())?;
    ensure_eq(&out.len(), &left.len(), "merge length")?;
    for (i, item) in out.iter().enumerate() {
        ensure_eq(
            item,
            &Value::tuple(vec![left.0[i].clone(), right.0[i].clone()]),
            "merge component",
        )?;
    }
    Ok(())
}

pub fn check_merge_mismatch(event: Event, extra: usize) -> Result<(), String> {
    let mut longer = event.clone();
    for i in 0..extra.max(1) {
        longer.0.push(Value::Nat(i as u64));
    }
    let mut gamma = VarState::empty();
    gamma.bind("a", Binding::Event(event.clone()));
    gamma.bind("b", Binding::Event(longer.clone()));
    let out = eval_merge("a", "b", &gamma);
    ensure_eq(
        &out,
        &Err(EvalError::LengthMismatch { left: event.len(), right: longer.len() }),
        "merge mismatch",
    )
}

pub fn check_filter(event: Event, threshold: u64) -> Result<(), String> {
    let fabric = test_fabric();
    let predicate =
        Lambda::new("t", Expr::Cmp(CmpOp::Lt, Box::new(var_t()), Box::new(nat_expr(threshold))));
    let mut gamma = VarState::empty();
    gamma.bind("x", Binding::Event(event.clone()));
    let once = eval_filter("x", &predicate, &gamma, &fabric.view()).map_err(|e| e.to_string())?;
    let expected: Vec<Value> = event
        .iter()
        .filter(|v| matches!(v, Value::Nat(n) if *n < threshold))
        .cloned()
        .collect();
    ensure_eq(&once.0, &expected, "filter subsequence")?;
    let mut gamma2 = VarState::empty();
    gamma2.bind("x", Binding::Event(once.clone()));
    let twice = eval_filter("x", &predicate, &gamma2, &fabric.view()).map_err(|e| e.to_string())?;
    ensure_eq(&twice, &once, "filter idempotence")
}

pub fn check_mix_monotonicity(seed: Vec<u64>, firsts: Vec<u64>) -> Result<(), String> {
    let a = ValueSet::from_values(seed.into_iter().map(Value::Nat)).unwrap();
    let first = Event::new(firsts.iter().map(|n| Value::Nat(*n)).collect());
    let second = Event::new(firsts.iter().map(|n| Value::Nat(n + 1000)).collect());
    let mut gamma = VarState::empty();
    gamma.bind("x1", Binding::Event(first));
    gamma.bind("x2", Binding::Event(second));
    let out = eval_mix_fst(&a, "x1", "x2", &gamma).map_err(|e| e.to_string())?;
    let mut previous = a;
    for item in out.iter() {
        let Value::Tuple(items) = item else { return Err("mix must yield pairs".into()) };
        let Value::Set(current) = &items[0] else {
            return Err("first component must be a set".into());
        };
        ensure(previous.subset_of(current), "prefix unions must grow")?;
        previous = current.clone();
    }
    Ok(())
}

pub fn check_mix_mirror(seed: Vec<u64>, pairs: Vec<(u64, u64)>) -> Result<(), String> {
    let a = ValueSet::from_values(seed.into_iter().map(Value::Nat)).unwrap();
    let first = Event::new(pairs.iter().map(|(x, _)| Value::Nat(*x)).collect());
    let second = Event::new(pairs.iter().map(|(_, y)| Value::Nat(*y)).collect());
    let mut gamma = VarState::empty();
    gamma.bind("x1", Binding::Event(first.clone()));
    gamma.bind("x2", Binding::Event(second.clone()));
    let snd = eval_mix_snd(&a, "x1", "x2", &gamma).map_err(|e| e.to_string())?;

    let mut swapped_gamma = VarState::empty();
    swapped_gamma.bind("x1", Binding::Event(second));
    swapped_gamma.bind("x2", Binding::Event(first));
    let fst = eval_mix_fst(&a, "x1", "x2", &swapped_gamma).map_err(|e| e.to_string())?;
    let swapped = Event::new(
        fst.iter()
            .map(|item| {
                let Value::Tuple(items) = item else { unreachable!("mix yields pairs") };
                Value::tuple(vec![items[1].clone(), items[0].clone()])
            })
            .collect(),
    );
    ensure_eq(&snd, &swapped, "mix mirror law")
}

pub fn check_assign_frame(event: Event, rules: RuleList) -> Result<(), String> {
    let fabric = test_fabric();
    let mut state = MachineState::empty();
    state.gamma.bind("x", Binding::Event(event));
    state.sigma.append(SwitchId::new("id1"), &rules);
    state.ir.insert(SwitchId::new("id2"), rules);
    let et = EventTransformer::Lift("x".into(), Lambda::identity());
    let next = exec_assign("y", &et, &state, &fabric).map_err(|e| e.to_string())?;
    ensure_eq(&next.sigma, &state.sigma, "assign must not touch sigma")?;
    ensure_eq(&next.ir, &state.ir, "assign must not touch ir")?;
    ensure_eq(&next.gamma.get("x"), &state.gamma.get("x"), "assign must keep other bindings")
}

pub fn check_add_rules_frame(bindings: Vec<(String, RuleList)>) -> Result<(), String> {
    let mut state = MachineState::empty();
    let event = Event::new(
        bindings
            .iter()
            .map(|(id, rl)| Value::tuple(vec![Value::switch(id.clone()), Value::Rules(rl.clone())]))
            .collect(),
    );
    state.gamma.bind("z", Binding::Event(event));
    let next = exec_add_rules("z", &state).map_err(|e| e.to_string())?;
    ensure_eq(&next.sigma, &state.sigma, "AddRules must not touch sigma")?;
    ensure_eq(&next.gamma, &state.gamma, "AddRules must not touch gamma")?;
    for (id, rl) in next.ir.iter() {
        ensure(
            bindings.iter().any(|(bid, brl)| bid == id.as_str() && brl == rl),
            "staged binding not from source",
        )?;
    }
    Ok(())
}

pub fn check_register_postcondition(
    seed_tables: Vec<(String, RuleList)>,
    staged: Vec<(String, RuleList)>,
) -> Result<(), String> {
    let mut fabric = test_fabric();
    let mut state = MachineState::empty();
    state.gamma.bind("marker", Binding::Event(Event::empty()));
    for (id, rules) in &seed_tables {
        state.sigma.append(SwitchId::new(id.clone()), rules);
    }
    for (id, rules) in &staged {
        state.ir.insert(SwitchId::new(id.clone()), rules.clone());
    }
    let installed: Vec<(SwitchId, RuleList)> = state.ir.iter().cloned().collect();
    let next = exec_register(&state, &mut fabric).map_err(|e| e.to_string())?;
    ensure(next.ir.is_empty(), "ir must be empty after Register")?;
    ensure_eq(&next.gamma, &state.gamma, "Register must not touch gamma")?;
    for id in ["id1", "id2"] {
        let id = SwitchId::new(id);
        let before = state.sigma.table(&id).map(|rl| rl.len()).unwrap_or(0);
        let added: usize =
            installed.iter().filter(|(bid, _)| bid == &id).map(|(_, rl)| rl.len()).sum();
        let after = next.sigma.table(&id).map(|rl| rl.len()).unwrap_or(0);
        ensure_eq(&after, &(before + added), "table length accounting")?;
    }
    for (id, rules) in installed {
        let table = next.sigma.table(&id).ok_or("installed switch has no table")?;
        for rule in rules.iter() {
            ensure(table.iter().any(|r| r == rule), "staged rule missing from table")?;
        }
    }
    Ok(())
}

pub fn check_send_frame(count: usize, packets: Vec<Packet>) -> Result<(), String> {
    let mut fabric = test_fabric();
    let mut state = MachineState::empty();
    let triples: Vec<Value> = (0..count.min(packets.len()))
        .map(|i| {
            Value::tuple(vec![
                Value::switch(if i % 2 == 0 { "id1" } else { "id2" }),
                Value::Packet(packets[i].clone()),
                Value::Action(Action::SendController),
            ])
        })
        .collect();
    state.gamma.bind("x", Binding::Event(Event::new(triples)));
    let before = fabric.history(&SwitchId::new("id1")).to_vec();
    let next = exec_send("x", &state, &mut fabric).map_err(|e| e.to_string())?;
    ensure_eq(&next, &state, "Send must leave the state triple unchanged")?;
    let after = fabric.history(&SwitchId::new("id1")).to_vec();
    ensure(after.len() >= before.len(), "history must only grow")?;
    ensure_eq(&&after[..before.len()], &&before[..], "history prefix must be stable")
}

pub fn check_seq_associativity(picks: Vec<usize>) -> Result<(), String> {
    let pool: Vec<Stmt> = vec![
        Stmt::Assign(
            "y".into(),
            EventTransformer::Lift(
                "x".into(),
                Lambda::new(
                    "t",
                    Expr::Arith(ArithOp::Add, Box::new(var_t()), Box::new(nat_expr(1))),
                ),
            ),
        ),
        Stmt::Assign("w".into(), EventTransformer::Merge("x".into(), "x".into())),
        Stmt::AddRules("z".into()),
        Stmt::Register,
        Stmt::Assign("o".into(), EventTransformer::Once("s".into(), 4)),
    ];
    let (a, b, c) = (
        pool[picks[0] % pool.len()].clone(),
        pool[picks[1] % pool.len()].clone(),
        pool[picks[2] % pool.len()].clone(),
    );
    let rules = RuleList::new(vec![Rule::new(Pattern::any(), vec![Action::SendAll]).unwrap()]);
    let mut state = MachineState::empty();
    state.gamma.bind("x", Binding::Event(Event::new(vec![Value::Nat(1), Value::Nat(2)])));
    state.gamma.bind("s", Binding::Event(Event::new(vec![Value::Nat(9)])));
    state.gamma.bind(
        "z",
        Binding::Event(Event::new(vec![Value::tuple(vec![
            Value::switch("id1"),
            Value::Rules(rules),
        ])])),
    );

    let left_shape = Stmt::seq(Stmt::seq(a.clone(), b.clone()), c.clone());
    let right_shape = Stmt::seq(a, Stmt::seq(b, c));
    let mut fabric_left = test_fabric();
    let mut fabric_right = test_fabric();
    let left = exec_stmt(&left_shape, &state, &mut fabric_left);
    let right = exec_stmt(&right_shape, &state, &mut fabric_right);
    ensure_eq(&left, &right, "seq associativity")
}

pub fn check_homogeneity_closure(steps: Vec<(usize, u64)>, len: usize) -> Result<(), String> {
    let fabric = test_fabric();
    let mut gamma = VarState::empty();
    gamma.bind("x", Binding::Event(Event::new((0..len as u64).map(Value::Nat).collect())));
    gamma.bind(
        "y",
        Binding::Event(Event::new((0..len as u64).map(|n| Value::Nat(n + 100)).collect())),
    );
    let targets = ["x", "y", "m"];
    for (index, (choice, k)) in steps.iter().enumerate() {
        let source = if index % 2 == 0 { "x" } else { "y" };
        let et = match choice % 5 {
            0 => EventTransformer::Lift(
                source.into(),
                Lambda::new(
                    "t",
                    Expr::Arith(ArithOp::Add, Box::new(var_t()), Box::new(nat_expr(*k))),
                ),
            ),
            1 => EventTransformer::Lift(
                source.into(),
                Lambda::new("t", Expr::Tuple(vec![var_t(), nat_expr(*k)])),
            ),
            2 => EventTransformer::Filter(
                source.into(),
                Lambda::new(
                    "t",
                    Expr::Cmp(CmpOp::Le, Box::new(var_t()), Box::new(nat_expr(*k))),
                ),
            ),
            3 => EventTransformer::Merge("x".into(), "y".into()),
            _ => EventTransformer::MixFst(ValueSet::empty(), "x".into(), "y".into()),
        };
        let target = targets[index % targets.len()];
        match imnet::transform::eval_transformer(&et, &gamma, &fabric.view()) {
            Ok(result) => gamma.bind(target, result.into_binding()),
            Err(_) => continue,
        }
        for (name, binding) in gamma.iter() {
            if let Binding::Event(event) = binding {
                ensure(
                    event_typecheck(event).is_ok(),
                    format!("binding `{name}` fails the homogeneity check"),
                )?;
            }
        }
    }
    Ok(())
}

pub fn check_parser_roundtrip(program: Program) -> Result<(), String> {
    let printed = print_program(&program);
    let reparsed =
        parse_program(&printed).map_err(|e| format!("printed program failed to reparse: {e}"))?;
    ensure_eq(&reparsed, &program, "parse(print(p)) != p")?;
    let again = print_program(&reparsed);
    ensure_eq(&again, &printed, "canonical text is not a fixed point")
}

/// Strategy bundles used by both the property suite and the acceptance gate.
pub mod inputs {
    use super::*;

    pub fn lift_composition() -> impl Strategy<Value = (Body, Body, Event)> {
        (arb_body(), arb_body(), arb_nat_event(0..8))
    }

    pub fn merge_pairs() -> impl Strategy<Value = Vec<(u64, u64)>> {
        prop::collection::vec((0u64..100, 0u64..100), 0..8)
    }

    pub fn merge_mismatch() -> impl Strategy<Value = (Event, usize)> {
        (arb_nat_event(0..6), 1usize..4)
    }

    pub fn filter_input() -> impl Strategy<Value = (Event, u64)> {
        (arb_nat_event(0..10), 0u64..1000)
    }

    pub fn mix_input() -> impl Strategy<Value = (Vec<u64>, Vec<u64>)> {
        (prop::collection::vec(0u64..20, 0..3), prop::collection::vec(0u64..20, 0..8))
    }

    pub fn mix_mirror_input() -> impl Strategy<Value = (Vec<u64>, Vec<(u64, u64)>)> {
        (
            prop::collection::vec(0u64..20, 0..3),
            prop::collection::vec((0u64..20, 0u64..20), 0..8),
        )
    }

    pub fn assign_frame_input() -> impl Strategy<Value = (Event, RuleList)> {
        (arb_nat_event(1..6), arb_rule_list())
    }

    pub fn switch_bindings() -> impl Strategy<Value = Vec<(String, RuleList)>> {
        prop::collection::vec(
            (prop::sample::select(vec!["id1".to_string(), "id2".to_string()]), arb_rule_list()),
            0..4,
        )
    }

    pub fn send_frame_input() -> impl Strategy<Value = (usize, Vec<Packet>)> {
        (0usize..4, prop::collection::vec(arb_packet(), 4))
    }

    pub fn seq_picks() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(0usize..5, 3)
    }

    pub fn homogeneity_input() -> impl Strategy<Value = (Vec<(usize, u64)>, usize)> {
        (prop::collection::vec((0usize..5, 0u64..5), 1..6), 0usize..5)
    }
}
