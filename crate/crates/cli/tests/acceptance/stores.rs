use agentmesh_core::card::{AgentCard, Capability};
use agentmesh_core::registry::Registry;
use agentmesh_core::task::{RetryPolicy, TaskError, TaskState, TaskStore};
use agentmesh_core::ErrorCode;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::Map;

use crate::{ensure, Outcome};

const REGISTRIES: usize = 50;
const MAX_CARDS: usize = 1000;
const DEREGISTER_PROBABILITY: f64 = 0.1;
const SEED: u64 = 0xA2A_0004;

const CAPS: [&str; 8] = [
    "get_stock_price",
    "get_news",
    "get_company_info",
    "get_financials",
    "analyze_company",
    "translate",
    "summarize",
    "Get_News",
];

fn random_card(rng: &mut StdRng, id: Option<usize>) -> AgentCard {
    let mut names: Vec<&str> = CAPS.iter().copied().filter(|_| rng.gen_bool(0.3)).collect();
    if names.is_empty() {
        names.push(CAPS[rng.gen_range(0..CAPS.len())]);
    }
    AgentCard {
        agent_id: format!("agent-{:05}", id.unwrap_or_else(|| rng.gen_range(0..1200))),
        name: "random".into(),
        description: String::new(),
        version: "1.0.0".into(),
        capabilities: names
            .into_iter()
            .map(|n| Capability {
                name: n.into(),
                description: String::new(),
                parameters: Default::default(),
                returns: Default::default(),
                metadata: Default::default(),
            })
            .collect(),
        auth: Default::default(),
        metadata: Default::default(),
    }
}

fn oracle_discover(ops: &[(bool, AgentCard)], capability: &str) -> Vec<String> {
    let mut live: Vec<&AgentCard> = Vec::new();
    for (register, card) in ops {
        live.retain(|c| c.agent_id != card.agent_id);
        if *register {
            live.push(card);
        }
    }
    let mut ids: Vec<String> = live
        .iter()
        .filter(|c| c.capabilities.iter().any(|cap| cap.name == capability))
        .map(|c| c.agent_id.clone())
        .collect();
    ids.sort();
    ids
}

pub fn ac4_discovery_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut largest = 0;
    let mut queries = 0;
    for round in 0..REGISTRIES {
        // the last registry is filled to exactly MAX_CARDS distinct agents
        let full = round == REGISTRIES - 1;
        let n = if full { MAX_CARDS } else { rng.gen_range(0..=MAX_CARDS) };
        let registry = Registry::new();
        let mut ops = Vec::with_capacity(n);
        for i in 0..n {
            let card = random_card(&mut rng, full.then_some(i));
            if !full && rng.gen_bool(DEREGISTER_PROBABILITY) {
                registry.deregister(&card.agent_id);
                ops.push((false, card));
            } else {
                registry.register(card.clone()).map_err(|e| e.to_string())?;
                ops.push((true, card));
            }
        }
        largest = largest.max(registry.len());
        ensure(!full || registry.len() == MAX_CARDS, || format!("full registry holds {}", registry.len()))?;
        for cap in CAPS.iter().chain(&["unknown", ""]) {
            queries += 1;
            let got: Vec<String> = registry.discover(cap).into_iter().map(|c| c.agent_id).collect();
            let want = oracle_discover(&ops, cap);
            ensure(got == want, || {
                format!("registry {round}, capability {cap:?}: {} vs oracle {}", got.len(), want.len())
            })?;
        }
    }
    Ok(format!(
        "{REGISTRIES} registries, {queries} queries equal the linear scan; largest held {largest} cards"
    ))
}

const DECLARED_LEGAL: [(TaskState, TaskState); 4] = [
    (TaskState::Created, TaskState::InProgress),
    (TaskState::InProgress, TaskState::Completed),
    (TaskState::InProgress, TaskState::Failed),
    (TaskState::Failed, TaskState::InProgress),
];

fn task_in(store: &TaskStore, state: TaskState) -> String {
    let id = store.create_task("t", Map::new()).unwrap().task_id;
    let path: &[TaskState] = match state {
        TaskState::Created => &[],
        TaskState::InProgress => &[TaskState::InProgress],
        TaskState::Completed => &[TaskState::InProgress, TaskState::Completed],
        TaskState::Failed => &[TaskState::InProgress, TaskState::Failed],
    };
    for s in path {
        store.transition_task(&id, *s).unwrap();
    }
    id
}

pub fn ac5_task_state_machine() -> Outcome {
    let store = TaskStore::new();
    let (mut accepted, mut rejected) = (0, 0);
    for from in TaskState::ALL {
        for to in TaskState::ALL {
            let id = task_in(&store, from);
            let result = store.transition_task(&id, to);
            if DECLARED_LEGAL.contains(&(from, to)) {
                let t = result.map_err(|e| format!("{from} -> {to} rejected: {e}"))?;
                ensure(t.state == to, || format!("{from} -> {to} landed in {}", t.state))?;
                accepted += 1;
            } else {
                let err = result.err().ok_or_else(|| format!("{from} -> {to} accepted"))?;
                ensure(err.code() == ErrorCode::IllegalTransition, || {
                    format!("{from} -> {to}: {:?}", err.code())
                })?;
                ensure(store.get(&id).unwrap().state == from, || {
                    format!("{from} -> {to}: rejected move changed state")
                })?;
                rejected += 1;
            }
        }
    }
    ensure(accepted == 4 && rejected == 12, || format!("{accepted} accepted, {rejected} rejected"))?;

    let mut policies = 0;
    for max_attempts in 1..=6u32 {
        for base in [1u64, 7, 100, 250] {
            policies += 1;
            let policy = RetryPolicy::new(max_attempts, base).map_err(|e| e.to_string())?;
            let id = task_in(&store, TaskState::InProgress);
            let err = TaskError::new(ErrorCode::ExecFailed, "transient").retryable(true);
            for attempt in 1..=max_attempts {
                let t = store.fail_task(&id, err.clone(), &policy).map_err(|e| e.to_string())?;
                let delay = base * 2u64.pow(attempt - 1);
                ensure(
                    t.state == TaskState::InProgress && t.attempts == attempt && t.retry_delay_ms == Some(delay),
                    || format!("max {max_attempts} base {base} attempt {attempt}: {:?} {:?}", t.state, t.retry_delay_ms),
                )?;
            }
            let t = store.fail_task(&id, err, &policy).map_err(|e| e.to_string())?;
            ensure(t.state == TaskState::Failed && t.attempts == max_attempts, || {
                format!("max {max_attempts}: retried past the limit")
            })?;
        }
    }
    Ok(format!("4 legal / 12 illegal transitions; {policies} retry policies exact"))
}
