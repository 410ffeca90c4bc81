use agentmesh_core::workflow::{ExecutionTrace, NodeError, WorkflowError, WorkflowGraph, ERROR_LABEL};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::{ensure, Outcome};

const GRAPHS: usize = 500;
const MAX_NODES: usize = 8;
const MAX_BUDGET: usize = 60;
const CYCLE_BUDGETS: std::ops::RangeInclusive<usize> = 1..=200;
const SEED: u64 = 0xA2A_0007;

fn name(i: usize) -> String {
    format!("n{i}")
}

/// Random graph over a counter state: plain, conditional and terminal nodes,
/// some of which fail on particular counter values.
fn random_graph(rng: &mut StdRng) -> WorkflowGraph<u64> {
    let n = rng.gen_range(2..=MAX_NODES);
    let mut g = WorkflowGraph::new();
    for i in 0..n {
        let inc = rng.gen_range(1u64..10);
        let fail = rng.gen_bool(0.5).then(|| rng.gen_range(2u64..6));
        g.add_node(&name(i), move |s: &mut u64| {
            *s += inc;
            match fail {
                Some(m) if s.is_multiple_of(m) => Err(NodeError::new("divisible")),
                _ => Ok(()),
            }
        })
        .unwrap();
    }
    for i in 0..n {
        match rng.gen_range(0..7) {
            0 => g.add_terminal(&name(i)).unwrap(),
            1..=3 => g.add_edge(&name(i), &name(rng.gen_range(0..n))).unwrap(),
            _ => {
                let m = rng.gen_range(1u64..4);
                let mut mapping: Vec<(String, String)> =
                    (0..m).map(|k| (format!("l{k}"), name(rng.gen_range(0..n)))).collect();
                if rng.gen_bool(0.5) {
                    mapping.push((ERROR_LABEL.to_string(), name(rng.gen_range(0..n))));
                }
                g.add_conditional_edges(&name(i), move |s: &u64| format!("l{}", s % m), mapping)
                    .unwrap();
            }
        }
    }
    g.set_entry(&name(0)).unwrap();
    g
}

fn outcome_trace(result: &Result<(u64, ExecutionTrace), WorkflowError>) -> &ExecutionTrace {
    match result {
        Ok((_, t)) => t,
        Err(e) => e.trace().expect("entry is set"),
    }
}

pub fn ac7_workflow_engine() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut exhausted = 0;
    let mut completed = 0;
    for case in 0..GRAPHS {
        let g = random_graph(&mut rng);
        let budget = rng.gen_range(1..=MAX_BUDGET);
        let first = g.run(0, budget);
        let trace = outcome_trace(&first);
        ensure(!trace.steps.is_empty() && trace.steps.len() <= budget, || {
            format!("graph {case}: {} steps for budget {budget}", trace.steps.len())
        })?;
        ensure(trace.steps[0].node == "n0", || format!("graph {case}: does not start at entry"))?;
        for pair in trace.steps.windows(2) {
            let label = pair[0].label.as_deref().ok_or_else(|| format!("graph {case}: unlabeled step"))?;
            ensure(g.has_edge(&pair[0].node, label, &pair[1].node), || {
                format!("graph {case}: {} -{label}-> {} is not an edge", pair[0].node, pair[1].node)
            })?;
        }
        match &first {
            Ok((_, t)) => {
                completed += 1;
                let last = &t.steps.last().unwrap().node;
                ensure(g.is_terminal(last), || format!("graph {case}: finished on non-terminal {last}"))?;
            }
            Err(WorkflowError::BudgetExceeded { trace, .. }) => {
                exhausted += 1;
                ensure(trace.steps.len() == budget, || format!("graph {case}: budget stop at {}", trace.steps.len()))?;
            }
            Err(_) => {}
        }
        let replay = g.run(0, budget);
        let same = match (&first, &replay) {
            (Ok((a, _)), Ok((b, _))) => a == b,
            (Err(_), Err(_)) => true,
            _ => false,
        };
        ensure(same && outcome_trace(&replay).route() == trace.route(), || {
            format!("graph {case}: replay differs")
        })?;
    }

    let mut cycle = WorkflowGraph::new();
    cycle.add_node("a", |s: &mut u64| { *s += 1; Ok(()) }).unwrap();
    cycle.add_node("b", |s: &mut u64| { *s += 1; Ok(()) }).unwrap();
    cycle.add_edge("a", "b").unwrap();
    cycle.add_edge("b", "a").unwrap();
    cycle.set_entry("a").unwrap();
    for budget in CYCLE_BUDGETS {
        match cycle.run(0, budget) {
            Err(WorkflowError::BudgetExceeded { budget: b, trace }) => {
                ensure(b == budget && trace.steps.len() == budget, || {
                    format!("cycle budget {budget}: halted after {}", trace.steps.len())
                })?;
            }
            other => return Err(format!("cycle budget {budget}: {:?}", other.map(|(s, _)| s))),
        }
    }
    Ok(format!(
        "{GRAPHS} random graphs valid and replayable ({completed} completed, {exhausted} hit the budget); cycle halts at B for B in {}..={}",
        CYCLE_BUDGETS.start(),
        CYCLE_BUDGETS.end()
    ))
}
