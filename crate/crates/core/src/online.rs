//! Online machinery: the summarizer/builder/trigger decomposition of
//! deterministic online adaptive BSTs, the budget-based online algorithm,
//! and the optimal restructure-schedule DP used as its baseline.
//!
//! The budget rule spends routing cost against a per-epoch budget of
//! `C(n)`; a request that cannot finish within the remaining budget (or
//! arrives with the budget exhausted) triggers a rebuild through the
//! policy's builder, paying `C(n)` and serving the request in the fresh
//! tree.

use std::collections::VecDeque;
use std::fmt;

use serde::Serialize;

use crate::builders::{mehlhorn_build, optimal_static, BuildError, FrequencyTable};
use crate::cost::{
    block_entropy, serve_cost, CostError, CostParams, CostReport, Request, RequestSequence, Schedule, Stage,
    StageReport,
};
use crate::tree::{Key, Tree, TreeCode, TreeError};

#[derive(Debug, Clone, PartialEq)]
pub enum OnlineError {
    Tree(TreeError),
    Cost(CostError),
    Build(BuildError),
    /// Initial tree does not span `1..=n`.
    InitialTreeSize { expected: u32, got: u32 },
}

impl fmt::Display for OnlineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tree(e) => e.fmt(f),
            Self::Cost(e) => e.fmt(f),
            Self::Build(e) => e.fmt(f),
            Self::InitialTreeSize { expected, got } => {
                write!(f, "initial tree has {got} keys, sequence needs {expected}")
            }
        }
    }
}

impl std::error::Error for OnlineError {}

impl From<TreeError> for OnlineError {
    fn from(e: TreeError) -> Self {
        OnlineError::Tree(e)
    }
}

impl From<CostError> for OnlineError {
    fn from(e: CostError) -> Self {
        OnlineError::Cost(e)
    }
}

impl From<BuildError> for OnlineError {
    fn from(e: BuildError) -> Self {
        OnlineError::Build(e)
    }
}

/// Outcome of budget-limited routing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RouteOutcome {
    /// Target reached; `remaining = budget - consumed`.
    Reached { remaining: f64, consumed: u64 },
    /// The search path is longer than the budget.
    OutOfBudget,
}

/// Walk the search path from the root toward `target`, spending one unit
/// of budget per edge. The root itself is free, so a zero budget still
/// reaches the root.
pub fn routing(budget: f64, tree: &Tree, target: Key) -> Result<RouteOutcome, OnlineError> {
    let d = tree.depth(target)? as u64;
    Ok(route_distance(budget, d))
}

/// All-to-all variant: walk the tree path from `src` to `dst`.
pub fn routing_pair(budget: f64, tree: &Tree, src: Key, dst: Key) -> Result<RouteOutcome, OnlineError> {
    let d = tree.distance(src, dst)? as u64;
    Ok(route_distance(budget, d))
}

fn route_distance(budget: f64, d: u64) -> RouteOutcome {
    if d as f64 <= budget {
        RouteOutcome::Reached { remaining: budget - d as f64, consumed: d }
    } else {
        RouteOutcome::OutOfBudget
    }
}

/// History summary the builder consumes: endpoint counts of the consumed
/// prefix (optionally only its last `window` requests).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    counts: Vec<u64>, // slot 0 unused
    total: u64,
}

impl Summary {
    pub fn empty(n: u32) -> Self {
        Summary { counts: vec![0; n as usize + 1], total: 0 }
    }

    pub fn count(&self, k: Key) -> u64 {
        self.counts[k as usize]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn n(&self) -> u32 {
        (self.counts.len() - 1) as u32
    }

    fn bump(&mut self, k: Key) {
        self.counts[k as usize] += 1;
        self.total += 1;
    }

    fn drop_one(&mut self, k: Key) {
        self.counts[k as usize] -= 1;
        self.total -= 1;
    }

    pub fn to_table(&self) -> FrequencyTable {
        FrequencyTable::from_counts(self.counts[1..].to_vec())
    }
}

/// Exact cumulative endpoint tallies of a request prefix; `window`
/// restricts the tally to the last `window` requests.
pub fn frequency_summarizer(n: u32, prefix: &[Request], window: Option<usize>) -> Summary {
    let slice = match window {
        Some(w) if w < prefix.len() => &prefix[prefix.len() - w..],
        _ => prefix,
    };
    let mut s = Summary::empty(n);
    for r in slice {
        for k in r.endpoints() {
            s.bump(k);
        }
    }
    s
}

/// The summarizer component `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummarizerKind {
    Frequency { window: Option<usize> },
}

impl Default for SummarizerKind {
    fn default() -> Self {
        SummarizerKind::Frequency { window: None }
    }
}

impl SummarizerKind {
    pub fn summarize(&self, n: u32, prefix: &[Request]) -> Summary {
        match self {
            SummarizerKind::Frequency { window } => frequency_summarizer(n, prefix, *window),
        }
    }
}

/// The builder component `g`: deterministic map from summaries to trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BuilderKind {
    /// Weight-balanced tree over the summary counts.
    #[default]
    Mehlhorn,
    /// Exact optimal static tree over the summary counts.
    OptimalDp,
    /// Most-requested key (ties toward the smallest) as root, balanced
    /// segments on both sides. Cheap baseline.
    FrequentRoot,
}

impl BuilderKind {
    pub fn build(&self, summary: &Summary) -> Result<Tree, OnlineError> {
        let table = summary.to_table();
        match self {
            BuilderKind::Mehlhorn => Ok(mehlhorn_build(&table)?),
            BuilderKind::OptimalDp => Ok(optimal_static(&table)?.0),
            BuilderKind::FrequentRoot => {
                let n = summary.n();
                let root = (1..=n).max_by_key(|&k| (summary.count(k), std::cmp::Reverse(k))).unwrap();
                let mut order = Vec::with_capacity(n as usize);
                order.push(root);
                push_balanced_order(&mut order, 1, root - 1);
                push_balanced_order(&mut order, root + 1, n);
                Ok(Tree::from_insertion_order(&order)?)
            }
        }
    }
}

fn push_balanced_order(order: &mut Vec<Key>, lo: Key, hi: Key) {
    if lo == 0 || lo > hi {
        return;
    }
    let mid = (lo + hi) / 2;
    order.push(mid);
    push_balanced_order(order, lo, mid - 1);
    push_balanced_order(order, mid + 1, hi);
}

/// How `currentCost` absorbs the routing result. `Consumed` accumulates
/// spent cost toward the budget; `Leftover` takes the returned leftover
/// literally, which makes the budget track the previous request's slack
/// instead of total spend. `Consumed` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetSemantics {
    #[default]
    Consumed,
    Leftover,
}

/// A deterministic online policy: summarizer `q`, builder `g`, and the
/// budget trigger with its accounting semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OnlinePolicy {
    pub summarizer: SummarizerKind,
    pub builder: BuilderKind,
    pub semantics: BudgetSemantics,
}

/// One line of the run's event log.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Serve { t: usize, cost: u64 },
    Restructure { t: usize, tree: TreeCode },
}

#[derive(Serialize)]
struct ServeLine {
    t: usize,
    event: &'static str,
    cost: u64,
}

#[derive(Serialize)]
struct RestructureLine {
    t: usize,
    event: &'static str,
    tree: String,
}

impl Event {
    /// JSONL form: `{"t":..,"event":"serve","cost":..}` or
    /// `{"t":..,"event":"restructure","tree":".."}`.
    pub fn to_json(&self) -> String {
        match self {
            Event::Serve { t, cost } => {
                serde_json::to_string(&ServeLine { t: *t, event: "serve", cost: *cost }).unwrap()
            }
            Event::Restructure { t, tree } => serde_json::to_string(&RestructureLine {
                t: *t,
                event: "restructure",
                tree: tree.to_string(),
            })
            .unwrap(),
        }
    }
}

/// What one served request did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ServeRecord {
    /// Cost actually paid in the tree that served the request.
    pub cost: u64,
    pub restructured: bool,
}

/// Anything adversaries can drive: expose the current tree, serve one
/// request.
pub trait OnlineAlgorithm {
    fn tree(&self) -> &Tree;
    fn serve(&mut self, req: &Request) -> Result<ServeRecord, OnlineError>;
}

/// Routing spend bookkeeping for one epoch (the span between consecutive
/// restructures).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochStats {
    /// Cost of serving the request that triggered the rebuild, in the
    /// fresh tree. The first epoch has none.
    pub rebuild_serve: u64,
    /// Routing admitted by the budget check strictly inside the epoch.
    pub admitted: u64,
    /// Requests served during the epoch.
    pub len: usize,
}

/// Mutable state of one budget-algorithm run.
///
/// A rebuild triggered by request `t` builds from the summary of
/// `sigma_1..sigma_{t-1}` and serves `sigma_t` in the fresh tree; this is
/// the `T_{t+1} = g(q_t)` typing of the framework, and it keeps every
/// realized schedule inside the family the restructure DP optimizes over.
/// A first request that overruns the budget before any history exists is
/// served at full cost without a rebuild.
pub struct BudgetRunner {
    params: CostParams,
    policy: OnlinePolicy,
    tree: Tree,
    current_cost: f64,
    routing_total: u64,
    adjustments: f64,
    t: usize,
    events: Vec<Event>,
    restructure_times: Vec<usize>,
    epochs: Vec<EpochStats>,
    summary: Summary,
    window_buf: Option<VecDeque<Request>>,
    history_len: usize,
}

impl BudgetRunner {
    pub fn new(params: CostParams, policy: OnlinePolicy, initial: Tree) -> Result<Self, OnlineError> {
        if initial.n() != params.n {
            return Err(OnlineError::InitialTreeSize { expected: params.n, got: initial.n() });
        }
        let window_buf = match policy.summarizer {
            SummarizerKind::Frequency { window: Some(w) } => Some(VecDeque::with_capacity(w + 1)),
            _ => None,
        };
        Ok(BudgetRunner {
            params,
            policy,
            tree: initial,
            current_cost: 0.0,
            routing_total: 0,
            adjustments: 0.0,
            t: 0,
            events: Vec::new(),
            restructure_times: Vec::new(),
            epochs: vec![EpochStats { rebuild_serve: 0, admitted: 0, len: 0 }],
            summary: Summary::empty(params.n),
            window_buf,
            history_len: 0,
        })
    }

    pub fn balanced_start(params: CostParams, policy: OnlinePolicy) -> Result<Self, OnlineError> {
        let initial = Tree::balanced(params.n)?;
        Self::new(params, policy, initial)
    }

    fn absorb(&mut self, req: &Request) {
        self.history_len += 1;
        for k in req.endpoints() {
            self.summary.bump(k);
        }
        if let Some(buf) = &mut self.window_buf {
            let SummarizerKind::Frequency { window: Some(w) } = self.policy.summarizer else {
                unreachable!()
            };
            buf.push_back(*req);
            if buf.len() > w {
                let old = buf.pop_front().unwrap();
                for k in old.endpoints() {
                    self.summary.drop_one(k);
                }
            }
        }
    }

    fn request_distance(&self, req: &Request) -> Result<u64, OnlineError> {
        Ok(serve_cost(&self.tree, req)?)
    }

    fn rebuild_and_serve(&mut self, req: &Request) -> Result<ServeRecord, OnlineError> {
        if self.history_len == 0 {
            // Nothing to summarize yet: the mandatory first serve opens
            // the initial epoch unbudgeted instead of rebuilding.
            let d = self.request_distance(req)?;
            self.routing_total += d;
            self.current_cost = match self.policy.semantics {
                BudgetSemantics::Consumed => d as f64,
                BudgetSemantics::Leftover => (self.params.c - d as f64).max(0.0),
            };
            self.events.push(Event::Serve { t: self.t, cost: d });
            let epoch = self.epochs.last_mut().unwrap();
            epoch.rebuild_serve += d;
            epoch.len += 1;
            return Ok(ServeRecord { cost: d, restructured: false });
        }
        self.tree = self.policy.builder.build(&self.summary)?;
        self.adjustments += self.params.c;
        self.restructure_times.push(self.t);
        self.events.push(Event::Restructure { t: self.t, tree: self.tree.to_code() });
        let d = self.request_distance(req)?;
        self.routing_total += d;
        self.current_cost = match self.policy.semantics {
            BudgetSemantics::Consumed => d as f64,
            BudgetSemantics::Leftover => (self.params.c - d as f64).max(0.0),
        };
        self.events.push(Event::Serve { t: self.t, cost: d });
        self.epochs.push(EpochStats { rebuild_serve: d, admitted: 0, len: 1 });
        Ok(ServeRecord { cost: d, restructured: true })
    }

    /// Serve one request under the budget rule. The request joins the
    /// summarized history only after any rebuild it triggers.
    pub fn step(&mut self, req: &Request) -> Result<ServeRecord, OnlineError> {
        self.t += 1;
        let record = if self.current_cost < self.params.c {
            let budget = self.params.c - self.current_cost;
            let d = self.request_distance(req)?;
            match route_distance(budget, d) {
                RouteOutcome::Reached { remaining, consumed } => {
                    self.current_cost = match self.policy.semantics {
                        BudgetSemantics::Consumed => self.current_cost + consumed as f64,
                        BudgetSemantics::Leftover => self.current_cost + remaining,
                    };
                    self.routing_total += consumed;
                    self.events.push(Event::Serve { t: self.t, cost: consumed });
                    let epoch = self.epochs.last_mut().unwrap();
                    epoch.admitted += consumed;
                    epoch.len += 1;
                    Ok(ServeRecord { cost: consumed, restructured: false })
                }
                RouteOutcome::OutOfBudget => self.rebuild_and_serve(req),
            }
        } else {
            self.rebuild_and_serve(req)
        };
        self.absorb(req);
        record
    }

    pub fn params(&self) -> &CostParams {
        &self.params
    }

    pub fn routing_total(&self) -> u64 {
        self.routing_total
    }

    pub fn adjustments(&self) -> f64 {
        self.adjustments
    }

    pub fn total(&self) -> f64 {
        self.routing_total as f64 + self.adjustments
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn restructure_times(&self) -> &[usize] {
        &self.restructure_times
    }

    pub fn epochs(&self) -> &[EpochStats] {
        &self.epochs
    }
}

impl OnlineAlgorithm for BudgetRunner {
    fn tree(&self) -> &Tree {
        &self.tree
    }

    fn serve(&mut self, req: &Request) -> Result<ServeRecord, OnlineError> {
        self.step(req)
    }
}

/// A tree that never restructures; baseline opponent for adversaries.
pub struct StaticRunner {
    tree: Tree,
    routing_total: u64,
}

impl StaticRunner {
    pub fn new(tree: Tree) -> Self {
        StaticRunner { tree, routing_total: 0 }
    }

    pub fn routing_total(&self) -> u64 {
        self.routing_total
    }
}

impl OnlineAlgorithm for StaticRunner {
    fn tree(&self) -> &Tree {
        &self.tree
    }

    fn serve(&mut self, req: &Request) -> Result<ServeRecord, OnlineError> {
        let d = serve_cost(&self.tree, req)?;
        self.routing_total += d;
        Ok(ServeRecord { cost: d, restructured: false })
    }
}

/// Everything a finished online run exposes.
pub struct OnlineOutcome {
    pub events: Vec<Event>,
    pub report: CostReport,
    /// The stage decomposition the run induced (initial tree plus one
    /// stage per rebuild).
    pub schedule: Schedule,
    pub epochs: Vec<EpochStats>,
    pub restructure_times: Vec<usize>,
}

/// Fold the budget algorithm over a whole sequence. Deterministic:
/// identical inputs produce identical event logs.
pub fn run_online(
    seq: &RequestSequence,
    policy: OnlinePolicy,
    params: &CostParams,
    initial: Tree,
) -> Result<OnlineOutcome, OnlineError> {
    let mut runner = BudgetRunner::new(*params, policy, initial.clone())?;
    let mut stage_trees = vec![initial];
    for req in &seq.items {
        let rec = runner.step(req)?;
        if rec.restructured {
            stage_trees.push(runner.tree.clone());
        }
    }
    finish_outcome(seq, runner, stage_trees)
}

fn finish_outcome(
    seq: &RequestSequence,
    runner: BudgetRunner,
    stage_trees: Vec<Tree>,
) -> Result<OnlineOutcome, OnlineError> {
    let mut stages = Vec::with_capacity(stage_trees.len());
    let mut stage_reports = Vec::with_capacity(stage_trees.len());
    let mut pos = 0usize;
    debug_assert_eq!(stage_trees.len(), runner.epochs.len());
    for (tree, epoch) in stage_trees.into_iter().zip(&runner.epochs) {
        let block = &seq.items[pos..pos + epoch.len];
        pos += epoch.len;
        let h = if block.is_empty() { 0.0 } else { block_entropy(seq.n, block)? };
        stage_reports.push(StageReport { x: epoch.len, c: epoch.rebuild_serve + epoch.admitted, h });
        stages.push(Stage { tree, len: epoch.len });
    }
    let report = CostReport {
        routing: runner.routing_total,
        adjustments: runner.adjustments,
        total: runner.routing_total as f64 + runner.adjustments,
        stages: stage_reports,
    };
    Ok(OnlineOutcome {
        events: runner.events,
        report,
        schedule: Schedule { stages },
        epochs: runner.epochs,
        restructure_times: runner.restructure_times,
    })
}

/// Cost of running the fixed builder pipeline `f = g . q` with an
/// explicit set of restructure positions: after request `s` in
/// `positions`, the tree becomes `f(prefix of length s)`; position 0 (the
/// initial tree) is implicit and free.
pub fn cost_of_restructure_set(
    seq: &RequestSequence,
    policy: &OnlinePolicy,
    params: &CostParams,
    initial: &Tree,
    positions: &[usize],
) -> Result<f64, OnlineError> {
    let m = seq.len();
    let mut total = 0.0f64;
    let mut tree = initial.clone();
    let mut cuts: Vec<usize> = positions.iter().copied().filter(|&s| s > 0 && s < m).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut next = cuts.into_iter().peekable();
    for (idx, req) in seq.items.iter().enumerate() {
        let t = idx + 1;
        total += serve_cost(&tree, req)? as f64;
        if next.peek() == Some(&t) {
            next.next();
            let summary = policy.summarizer.summarize(seq.n, &seq.items[..t]);
            tree = policy.builder.build(&summary)?;
            total += params.c;
        }
    }
    Ok(total)
}

/// Exact minimum-cost restructure schedule for the fixed pipeline
/// `f = g . q`: dynamic program over prefix positions, O(m^2) stage
/// evaluations. Returns the optimal schedule and its cost report.
pub fn opt_restructure_schedule(
    seq: &RequestSequence,
    policy: &OnlinePolicy,
    params: &CostParams,
    initial: Tree,
) -> Result<(Schedule, CostReport), OnlineError> {
    let m = seq.len();
    if m == 0 {
        let schedule = Schedule { stages: vec![Stage { tree: initial, len: 0 }] };
        let report = crate::cost::schedule_cost(seq, &schedule, params)?;
        return Ok((schedule, report));
    }
    if initial.n() != seq.n {
        return Err(OnlineError::InitialTreeSize { expected: seq.n, got: initial.n() });
    }

    // f(prefix of length s) for every restructure point we may use.
    let mut trees = Vec::with_capacity(m);
    trees.push(initial);
    for s in 1..m {
        let summary = policy.summarizer.summarize(seq.n, &seq.items[..s]);
        trees.push(policy.builder.build(&summary)?);
    }

    let mut best = vec![f64::INFINITY; m + 1];
    let mut choice = vec![0usize; m + 1];
    best[0] = 0.0;
    for s in 0..m {
        if !best[s].is_finite() {
            continue;
        }
        let base = best[s] + if s > 0 { params.c } else { 0.0 };
        let mut running = 0u64;
        for t in s + 1..=m {
            running += serve_cost(&trees[s], &seq.items[t - 1])?;
            let cand = base + running as f64;
            if cand < best[t] {
                best[t] = cand;
                choice[t] = s;
            }
        }
    }

    let mut cuts = Vec::new();
    let mut t = m;
    while t > 0 {
        let s = choice[t];
        cuts.push((s, t));
        t = s;
    }
    cuts.reverse();
    let stages = cuts
        .iter()
        .map(|&(s, t)| Stage { tree: trees[s].clone(), len: t - s })
        .collect::<Vec<_>>();
    let schedule = Schedule { stages };
    let report = crate::cost::schedule_cost(seq, &schedule, params)?;
    debug_assert!((report.total - best[m]).abs() < 1e-9);
    Ok((schedule, report))
}
