//! Cost-labelled transition systems of client/server models.
//!
//! A system runs several clients, each following a [`Scenario`] (a small
//! looping automaton with a cost on every transition). The state space of the
//! composed system is a graph whose maximal cycle mean is the worst
//! sustainable cost per step.
//!
//! Without a server, clients move independently and their steps interleave.
//! With a server, `Acquire` transitions need the server to be free and take
//! it, and `Release` transitions need the acting client to hold it and free
//! it, so at most one client works with the server at a time. Every edge of
//! the state space moves exactly one client.

use std::collections::HashMap;
use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Graph, Objective, Vertex};
use crate::scalar::Scalar;

/// Default upper bound on generated states.
pub const DEFAULT_STATE_CAP: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    Local,
    Acquire,
    Release,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub cost: i64,
    pub kind: TransitionKind,
}

impl Transition {
    pub const fn local(from: usize, to: usize, cost: i64) -> Self {
        Transition {
            from,
            to,
            cost,
            kind: TransitionKind::Local,
        }
    }

    pub const fn acquire(from: usize, to: usize, cost: i64) -> Self {
        Transition {
            from,
            to,
            cost,
            kind: TransitionKind::Acquire,
        }
    }

    pub const fn release(from: usize, to: usize, cost: i64) -> Self {
        Transition {
            from,
            to,
            cost,
            kind: TransitionKind::Release,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    /// Local states are `0..states`; every client starts in state 0.
    pub states: usize,
    pub transitions: Vec<Transition>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.states == 0 || self.states > u16::MAX as usize {
            return Err(Error::InvalidInput(format!(
                "scenario {} has {} states",
                self.name, self.states
            )));
        }
        let mut has_out = vec![false; self.states];
        for t in &self.transitions {
            if t.from >= self.states || t.to >= self.states {
                return Err(Error::InvalidInput(format!(
                    "scenario {}: transition out of range",
                    self.name
                )));
            }
            if t.cost < 0 {
                return Err(Error::InvalidInput(format!(
                    "scenario {}: negative cost {}",
                    self.name, t.cost
                )));
            }
            has_out[t.from] = true;
        }
        match has_out.iter().position(|h| !h) {
            Some(s) => Err(Error::InvalidInput(format!(
                "scenario {}: state {s} has no transition",
                self.name
            ))),
            None => Ok(()),
        }
    }

    /// Document editing: idle, edit, save, print. Saving takes the server,
    /// returning to idle releases it.
    pub fn editor() -> Self {
        Scenario {
            name: "editor".into(),
            states: 4,
            transitions: vec![
                Transition::local(0, 0, 0),
                Transition::local(0, 1, 2),
                Transition::local(1, 1, 5),
                Transition::local(1, 0, 1),
                Transition::acquire(1, 2, 8),
                Transition::release(2, 0, 1),
                Transition::local(2, 3, 6),
                Transition::release(3, 0, 3),
            ],
        }
    }

    /// Document viewing: idle, fetch, render. Fetching holds the server.
    pub fn viewer() -> Self {
        Scenario {
            name: "viewer".into(),
            states: 3,
            transitions: vec![
                Transition::local(0, 0, 0),
                Transition::acquire(0, 1, 2),
                Transition::local(1, 1, 4),
                Transition::release(1, 2, 3),
                Transition::local(2, 2, 6),
                Transition::local(2, 0, 1),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateKind {
    ServerFree,
    WithServer,
}

impl TemplateKind {
    pub fn name(self) -> &'static str {
        match self {
            TemplateKind::ServerFree => "server-free",
            TemplateKind::WithServer => "server",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemTemplate {
    pub kind: TemplateKind,
    pub scenarios: Vec<Scenario>,
    /// Number of clients running each scenario.
    pub client_counts: Vec<usize>,
}

impl SystemTemplate {
    pub fn new(
        kind: TemplateKind,
        scenarios: Vec<Scenario>,
        client_counts: Vec<usize>,
    ) -> Result<Self> {
        if scenarios.len() != client_counts.len() {
            return Err(Error::InvalidInput(format!(
                "{} client counts given for {} scenarios",
                client_counts.len(),
                scenarios.len()
            )));
        }
        for s in &scenarios {
            s.validate()?;
        }
        Ok(SystemTemplate {
            kind,
            scenarios,
            client_counts,
        })
    }

    /// The built-in template of `kind` (editor and viewer clients). Missing
    /// trailing counts are zero.
    pub fn builtin(kind: TemplateKind, counts: &[usize]) -> Result<Self> {
        let scenarios = vec![Scenario::editor(), Scenario::viewer()];
        if counts.len() > scenarios.len() {
            return Err(Error::InvalidInput(format!(
                "built-in templates have {} scenarios, {} counts given",
                scenarios.len(),
                counts.len()
            )));
        }
        let mut client_counts = counts.to_vec();
        client_counts.resize(scenarios.len(), 0);
        Self::new(kind, scenarios, client_counts)
    }

    /// Scenario index of every client, in client order.
    fn clients(&self) -> Vec<usize> {
        self.client_counts
            .iter()
            .enumerate()
            .flat_map(|(s, &c)| std::iter::repeat_n(s, c))
            .collect()
    }

    /// Comment line recorded in generated files.
    pub fn describe(&self) -> String {
        let counts: Vec<String> = self.client_counts.iter().map(usize::to_string).collect();
        let names: Vec<&str> = self.scenarios.iter().map(|s| s.name.as_str()).collect();
        format!(
            "template {} scenarios {} clients {}",
            self.kind.name(),
            names.join(","),
            counts.join(",")
        )
    }
}

/// Both built-in templates with one editor client each.
pub fn builtin_templates() -> Vec<SystemTemplate> {
    [TemplateKind::ServerFree, TemplateKind::WithServer]
        .into_iter()
        .map(|k| SystemTemplate::builtin(k, &[1]).expect("built-in scenarios are valid"))
        .collect()
}

/// Generated state space with integer costs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    pub vertex_count: usize,
    pub edges: Vec<(Vertex, Vertex, i64)>,
    /// Local state of every client per vertex, followed by the server holder
    /// (`0` when free, `i + 1` when held by client `i`).
    pub states: Vec<Vec<u16>>,
    /// Objective the model is meant for.
    pub objective: Objective,
}

impl StateSpace {
    pub fn to_graph<W: Scalar>(&self) -> Result<Graph<W>> {
        let edges: Vec<(Vertex, Vertex, W)> = self
            .edges
            .iter()
            .map(|&(u, v, c)| (u, v, W::from_int(c)))
            .collect();
        Graph::from_edges(self.vertex_count, &edges)
    }
}

type StateKey = Vec<u16>;

/// Breadth-first exploration from the all-idle state. Vertices are numbered
/// in discovery order; out-edges of a state are listed by client, then by
/// the order of the scenario's transitions.
pub fn generate_state_space(t: &SystemTemplate, cap: usize) -> Result<StateSpace> {
    let clients = t.clients();
    if clients.is_empty() {
        return Err(Error::InvalidInput("template has no clients".into()));
    }
    if clients.len() >= u16::MAX as usize {
        return Err(Error::InvalidInput(format!(
            "too many clients: {}",
            clients.len()
        )));
    }
    let server = t.kind == TemplateKind::WithServer;
    let by_state: Vec<Vec<Vec<Transition>>> = t
        .scenarios
        .iter()
        .map(|s| {
            let mut out = vec![Vec::new(); s.states];
            for tr in &s.transitions {
                out[tr.from].push(*tr);
            }
            out
        })
        .collect();

    let initial: StateKey = vec![0; clients.len() + 1];
    let mut index: HashMap<StateKey, Vertex> = HashMap::new();
    let mut queue: VecDeque<StateKey> = VecDeque::new();
    index.insert(initial.clone(), 0);
    queue.push_back(initial);
    let mut edges = Vec::new();
    let mut states = Vec::new();
    while let Some(state) = queue.pop_front() {
        let u = states.len();
        let holder = state[clients.len()] as usize;
        for (i, &scenario) in clients.iter().enumerate() {
            for tr in &by_state[scenario][state[i] as usize] {
                let mut next = state.clone();
                next[i] = tr.to as u16;
                if server {
                    match tr.kind {
                        TransitionKind::Local => {}
                        TransitionKind::Acquire if holder == 0 => {
                            next[clients.len()] = (i + 1) as u16
                        }
                        TransitionKind::Release if holder == i + 1 => next[clients.len()] = 0,
                        _ => continue,
                    }
                }
                let count = index.len();
                let v = *index.entry(next).or_insert_with_key(|key| {
                    queue.push_back(key.clone());
                    count
                });
                if index.len() > cap {
                    return Err(Error::CapExceeded {
                        count: index.len(),
                        cap,
                    });
                }
                edges.push((u, v, tr.cost));
            }
        }
        states.push(state);
    }
    Ok(StateSpace {
        vertex_count: index.len(),
        edges,
        states,
        objective: Objective::Maximize,
    })
}

/// Smallest number of editor clients (with `viewers` viewer clients) whose
/// state space reaches both size bounds.
pub fn scale_to(
    kind: TemplateKind,
    viewers: usize,
    min_vertices: usize,
    min_edges: usize,
    cap: usize,
) -> Result<(SystemTemplate, StateSpace)> {
    for editors in 1.. {
        let t = SystemTemplate::builtin(kind, &[editors, viewers])?;
        let space = generate_state_space(&t, cap)?;
        if space.vertex_count >= min_vertices && space.edges.len() >= min_edges {
            return Ok((t, space));
        }
    }
    unreachable!("the loop only ends by returning")
}
