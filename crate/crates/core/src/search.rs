//! Variable neighbourhood descent inside a seeded shake/shuffle loop.
//!
//! `solve` builds the initial solution, descends, and then repeats
//! shake -> descend -> compare. An improving candidate replaces the best and
//! resets the stall counter `k`; otherwise the neighbourhood order is
//! reshuffled and `k` grows. The loop stops once `k` reaches
//! `max_iterations` or the time budget runs out.

use alloc::vec::Vec;
use core::fmt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::construction::construct;
use crate::cost::CostModel;
use crate::encoding::{decode, repair, DecodedPlan, Encoding};
use crate::instance::{Instance, NodeId, DEPOT};
use crate::objective::{EvalReport, Evaluator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum MoveId {
    SwapNode = 1,
    SwapWhole = 2,
    InsertNode = 3,
    InsertWhole = 4,
    ReverseNode = 5,
    ReverseWhole = 6,
    RemoveSortie = 7,
    AddSortie = 8,
}

impl MoveId {
    pub const ALL: [MoveId; 8] = [
        MoveId::SwapNode,
        MoveId::SwapWhole,
        MoveId::InsertNode,
        MoveId::InsertWhole,
        MoveId::ReverseNode,
        MoveId::ReverseWhole,
        MoveId::RemoveSortie,
        MoveId::AddSortie,
    ];

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn number(self) -> u8 {
        self as u8
    }

    fn whole(self) -> bool {
        matches!(self, MoveId::SwapWhole | MoveId::InsertWhole | MoveId::ReverseWhole)
    }
}

impl fmt::Display for MoveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MoveId::SwapNode => "swap-node",
            MoveId::SwapWhole => "swap-whole",
            MoveId::InsertNode => "insert-node",
            MoveId::InsertWhole => "insert-whole",
            MoveId::ReverseNode => "reverse-node",
            MoveId::ReverseWhole => "reverse-whole",
            MoveId::RemoveSortie => "remove-sortie",
            MoveId::AddSortie => "add-sortie",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Stall threshold `max` on the outer loop.
    pub max_iterations: usize,
    pub seed: u64,
    pub neighborhood_order: [MoveId; 8],
    pub moves_per_shake: usize,
    pub time_budget_ms: Option<u64>,
    /// Candidates sampled per neighbourhood pass; `None` means one per customer.
    pub sampling_width: Option<usize>,
    /// Enumerate every neighbour instead of sampling.
    pub exhaustive: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            seed: 0,
            neighborhood_order: MoveId::ALL,
            moves_per_shake: 3,
            time_budget_ms: None,
            sampling_width: None,
            exhaustive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("max_iterations must be at least 1")]
    ZeroIterations,
    #[error("neighborhood order must be a permutation of moves 1..8")]
    NotAPermutation,
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_iterations == 0 {
            return Err(ConfigError::ZeroIterations);
        }
        let mut seen = [false; 8];
        for m in self.neighborhood_order {
            seen[usize::from(m.number()) - 1] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(ConfigError::NotAPermutation);
        }
        Ok(())
    }
}

/// Source of elapsed wall time; the core has no clock of its own.
pub trait Clock {
    fn elapsed_ms(&self) -> u64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_ms(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    /// First shake move of the iteration, 0 when the iteration applied none.
    pub move_id: u8,
    pub candidate_pz: f64,
    pub best_pz: f64,
    pub accepted: bool,
    pub evals: u64,
    pub predictor_calls: u64,
    pub elapsed_ms: u64,
    /// Shake moves that found no legal target.
    pub noop_moves: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchTrace {
    pub records: Vec<TraceRecord>,
    pub evaluations: u64,
    pub predictor_calls: u64,
    pub wall_ms: u64,
}

impl SearchTrace {
    pub fn best_is_monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[1].best_pz <= w[0].best_pz)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MoveResult {
    pub encoding: Encoding,
    /// False when the move had no legal target and returned its input.
    pub applied: bool,
}

fn interior(enc: &Encoding) -> core::ops::RangeInclusive<usize> {
    1..=enc.len().saturating_sub(2)
}

fn pick<R: Rng>(rng: &mut R, items: &[usize]) -> Option<usize> {
    items.choose(rng).copied()
}

fn finish(enc: Encoding, inst: &Instance) -> Encoding {
    repair(&enc, inst).expect("moves preserve the customer multiset")
}

fn swap(enc: &Encoding, a: usize, b: usize, whole: bool) -> Encoding {
    let mut out = enc.clone();
    out.upper.swap(a, b);
    if whole {
        out.lower.swap(a, b);
    }
    out
}

fn insert(enc: &Encoding, from: usize, to: usize, whole: bool) -> Encoding {
    let mut out = enc.clone();
    let node = out.upper.remove(from);
    out.upper.insert(to, node);
    if whole {
        let flag = out.lower.remove(from);
        out.lower.insert(to, flag);
    }
    out
}

fn reverse(enc: &Encoding, a: usize, b: usize, whole: bool) -> Encoding {
    let mut out = enc.clone();
    out.upper[a..=b].reverse();
    if whole {
        out.lower[a..=b].reverse();
    }
    out
}

fn set_flag(enc: &Encoding, at: usize, flag: bool) -> Encoding {
    let mut out = enc.clone();
    out.lower[at] = flag;
    out
}

fn sortie_positions(enc: &Encoding) -> Vec<usize> {
    (0..enc.len()).filter(|&i| enc.lower[i]).collect()
}

fn addable_positions(enc: &Encoding, inst: &Instance) -> Vec<usize> {
    (0..enc.len())
        .filter(|&i| !enc.lower[i] && enc.upper[i] != DEPOT && inst.drone_eligible(enc.upper[i]))
        .collect()
}

/// Applies one random move of kind `id`, then repairs.
pub fn apply_move<R: Rng>(enc: &Encoding, id: MoveId, rng: &mut R, inst: &Instance) -> MoveResult {
    let customers: Vec<usize> = enc.customer_positions().collect();
    let whole = id.whole();
    let noop = || MoveResult { encoding: enc.clone(), applied: false };
    let moved = match id {
        MoveId::SwapNode | MoveId::SwapWhole => {
            if customers.len() < 2 {
                return noop();
            }
            let a = rng.gen_range(0..customers.len());
            let mut b = rng.gen_range(0..customers.len() - 1);
            if b >= a {
                b += 1;
            }
            swap(enc, customers[a], customers[b], whole)
        }
        MoveId::InsertNode | MoveId::InsertWhole => {
            // After removal the vector is one shorter; targets stay inside the depots.
            let slots = enc.len().saturating_sub(3);
            if customers.is_empty() || slots < 2 {
                return noop();
            }
            let from = customers[rng.gen_range(0..customers.len())];
            let mut to = 1 + rng.gen_range(0..slots - 1);
            if to >= from {
                to += 1;
            }
            insert(enc, from, to, whole)
        }
        MoveId::ReverseNode | MoveId::ReverseWhole => {
            let span: Vec<usize> = interior(enc).collect();
            if customers.is_empty() || span.len() < 2 {
                return noop();
            }
            let a = customers[rng.gen_range(0..customers.len())];
            let others: Vec<usize> = span.into_iter().filter(|&p| p != a).collect();
            let b = others[rng.gen_range(0..others.len())];
            reverse(enc, a.min(b), a.max(b), whole)
        }
        MoveId::RemoveSortie => match pick(rng, &sortie_positions(enc)) {
            Some(at) => set_flag(enc, at, false),
            None => return noop(),
        },
        MoveId::AddSortie => match pick(rng, &addable_positions(enc, inst)) {
            Some(at) => set_flag(enc, at, true),
            None => return noop(),
        },
    };
    MoveResult { encoding: finish(moved, inst), applied: true }
}

/// Every neighbour of kind `id`, in a fixed order.
pub fn enumerate_moves(enc: &Encoding, id: MoveId, inst: &Instance) -> Vec<Encoding> {
    let customers: Vec<usize> = enc.customer_positions().collect();
    let whole = id.whole();
    let mut out = Vec::new();
    match id {
        MoveId::SwapNode | MoveId::SwapWhole => {
            for (k, &a) in customers.iter().enumerate() {
                for &b in &customers[k + 1..] {
                    out.push(swap(enc, a, b, whole));
                }
            }
        }
        MoveId::InsertNode | MoveId::InsertWhole => {
            let slots = enc.len().saturating_sub(3);
            for &from in &customers {
                for to in 1..=slots {
                    if to != from {
                        out.push(insert(enc, from, to, whole));
                    }
                }
            }
        }
        MoveId::ReverseNode | MoveId::ReverseWhole => {
            let span: Vec<usize> = interior(enc).collect();
            for (k, &a) in span.iter().enumerate() {
                for &b in &span[k + 1..] {
                    if enc.upper[a] != enc.upper[b] {
                        out.push(reverse(enc, a, b, whole));
                    }
                }
            }
        }
        MoveId::RemoveSortie => out.extend(sortie_positions(enc).into_iter().map(|at| set_flag(enc, at, false))),
        MoveId::AddSortie => {
            out.extend(addable_positions(enc, inst).into_iter().map(|at| set_flag(enc, at, true)))
        }
    }
    out.into_iter().map(|e| finish(e, inst)).collect()
}

/// Applies `moves_per_shake` moves drawn uniformly from the neighbourhood order.
pub fn shake<R: Rng>(
    enc: &Encoding,
    config: &SearchConfig,
    order: &[MoveId],
    rng: &mut R,
    inst: &Instance,
) -> (Encoding, Vec<(MoveId, bool)>) {
    let mut cur = enc.clone();
    let mut applied = Vec::with_capacity(config.moves_per_shake);
    for _ in 0..config.moves_per_shake {
        let id = order[rng.gen_range(0..order.len())];
        let r = apply_move(&cur, id, rng, inst);
        applied.push((id, r.applied));
        cur = r.encoding;
    }
    (cur, applied)
}

/// Classical VND: scan neighbourhoods in `order`; on a strict improvement take
/// the best candidate of that pass and restart from the first neighbourhood,
/// otherwise move to the next one. Returns when a full sweep finds nothing.
pub fn vnd_descent<C: CostModel, R: Rng>(
    enc: &Encoding,
    order: &[MoveId],
    eval: &Evaluator<C>,
    config: &SearchConfig,
    rng: &mut R,
) -> Encoding {
    let inst = eval.cost().instance();
    let width = config.sampling_width.unwrap_or(inst.n()).max(1);
    let mut cur = enc.clone();
    let mut cur_pz = eval.p_z(&cur);
    let mut l = 0;
    while l < order.len() {
        let mut best: Option<(Encoding, f64)> = None;
        let consider = |cand: Encoding, best: &mut Option<(Encoding, f64)>| {
            let pz = eval.p_z(&cand);
            if pz < best.as_ref().map_or(cur_pz, |b| b.1) {
                *best = Some((cand, pz));
            }
        };
        if config.exhaustive {
            for cand in enumerate_moves(&cur, order[l], inst) {
                consider(cand, &mut best);
            }
        } else {
            for _ in 0..width {
                let r = apply_move(&cur, order[l], rng, inst);
                if !r.applied {
                    break;
                }
                consider(r.encoding, &mut best);
            }
        }
        match best {
            Some((cand, pz)) => {
                cur = cand;
                cur_pz = pz;
                l = 0;
            }
            None => l += 1,
        }
    }
    cur
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub best: Encoding,
    pub plan: DecodedPlan,
    pub report: EvalReport,
    pub trace: SearchTrace,
    /// Customers the construction could not place within capacity and horizon.
    pub unassigned: Vec<NodeId>,
}

/// Runs construction and the shake/descend loop. Deterministic for a fixed
/// `config.seed` when the clock is [`NoClock`].
pub fn solve<C: CostModel, K: Clock>(eval: &Evaluator<C>, config: &SearchConfig, clock: &K) -> SolveOutcome {
    let inst = eval.cost().instance();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<MoveId> = config.neighborhood_order.to_vec();

    let built = construct(eval);
    let mut best = vnd_descent(&built.encoding, &order, eval, config, &mut rng);
    let mut best_pz = eval.p_z(&best);
    let mut trace = SearchTrace::default();
    trace.records.push(TraceRecord {
        k: 0,
        move_id: 0,
        candidate_pz: best_pz,
        best_pz,
        accepted: true,
        evals: eval.evaluations(),
        predictor_calls: eval.cost().predictor_calls(),
        elapsed_ms: clock.elapsed_ms(),
        noop_moves: 0,
    });

    let mut stall = 0;
    let mut iteration = 0;
    while stall < config.max_iterations {
        if config.time_budget_ms.is_some_and(|b| clock.elapsed_ms() >= b) {
            break;
        }
        iteration += 1;
        let (shaken, moves) = shake(&best, config, &order, &mut rng, inst);
        let cand = vnd_descent(&shaken, &order, eval, config, &mut rng);
        let cand_pz = eval.p_z(&cand);
        let accepted = cand_pz < best_pz;
        if accepted {
            best = cand;
            best_pz = cand_pz;
            stall = 0;
        } else {
            order.shuffle(&mut rng);
            stall += 1;
        }
        trace.records.push(TraceRecord {
            k: iteration,
            move_id: moves.first().map_or(0, |m| m.0.number()),
            candidate_pz: cand_pz,
            best_pz,
            accepted,
            evals: eval.evaluations(),
            predictor_calls: eval.cost().predictor_calls(),
            elapsed_ms: clock.elapsed_ms(),
            noop_moves: moves.iter().filter(|m| !m.1).count() as u32,
        });
    }

    let plan = decode(&best, inst).expect("search keeps encodings valid");
    let report = eval.evaluate(&plan);
    trace.evaluations = eval.evaluations();
    trace.predictor_calls = eval.cost().predictor_calls();
    trace.wall_ms = clock.elapsed_ms();
    SolveOutcome { best, plan, report, trace, unassigned: built.unassigned }
}
