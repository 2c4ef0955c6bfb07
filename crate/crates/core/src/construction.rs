//! Initial solution: cost-aware nearest neighbour over trucks only, intra-route
//! 2-opt, then a single greedy pass converting truck visits into sorties.

use alloc::vec::Vec;

use crate::cost::CostModel;
use crate::encoding::Encoding;
use crate::instance::{NodeId, DEPOT};
use crate::objective::Evaluator;

#[derive(Debug, Clone, PartialEq)]
pub struct NnOutcome {
    pub encoding: Encoding,
    /// Customers no truck could take; they were appended to the last route.
    pub unassigned: Vec<NodeId>,
}

impl NnOutcome {
    pub fn is_feasible(&self) -> bool {
        self.unassigned.is_empty()
    }
}

/// Each truck in turn repeatedly drives to the cheapest unvisited customer
/// (arc cost at the current departure time) that fits the remaining capacity
/// and still allows a return before the horizon. Ties go to the smaller id.
pub fn nearest_neighbor_init<C: CostModel>(cost: &C, trucks: usize) -> NnOutcome {
    let inst = cost.instance();
    let n = inst.n();
    let mut visited = alloc::vec![false; n + 1];
    let mut routes: Vec<Vec<NodeId>> = Vec::with_capacity(trucks.max(1));
    for _ in 0..trucks.max(1) {
        let mut route = Vec::new();
        let (mut cur, mut time, mut load) = (DEPOT, 0, 0u32);
        loop {
            let mut best: Option<(f64, NodeId, i64)> = None;
            for j in 1..=n {
                if visited[j] || load + inst.demand(j) > inst.truck_capacity {
                    continue;
                }
                let leg = cost.truck_leg(cur, j, time);
                let arrival = time + leg.seconds;
                let start = inst.window(j).map_or(arrival, |w| arrival.max(w.open));
                let depart = start + inst.service(j);
                let back = cost.truck_leg(j, DEPOT, depart);
                if depart + back.seconds > inst.horizon {
                    continue;
                }
                if best.map_or(true, |(c, _, _)| leg.cost < c) {
                    best = Some((leg.cost, j, depart));
                }
            }
            let Some((_, j, depart)) = best else { break };
            visited[j] = true;
            route.push(j);
            load += inst.demand(j);
            cur = j;
            time = depart;
        }
        routes.push(route);
    }
    let unassigned: Vec<NodeId> = (1..=n).filter(|&j| !visited[j]).collect();
    if let Some(last) = routes.last_mut() {
        last.extend_from_slice(&unassigned);
    }
    NnOutcome { encoding: Encoding::from_routes(&routes), unassigned }
}

/// Intra-route segment reversal, first improvement, until no reversal lowers
/// `p_z`.
pub fn two_opt<C: CostModel>(enc: &Encoding, eval: &Evaluator<C>) -> Encoding {
    let mut best = enc.clone();
    let mut best_pz = eval.p_z(&best);
    let mut improved = true;
    while improved {
        improved = false;
        for range in best.route_ranges() {
            if range.len() < 2 {
                continue;
            }
            for i in range.start..range.end - 1 {
                for j in (i + 1)..range.end {
                    let mut cand = best.clone();
                    cand.upper[i..=j].reverse();
                    cand.lower[i..=j].reverse();
                    let pz = eval.p_z(&cand);
                    if pz < best_pz {
                        best = cand;
                        best_pz = pz;
                        improved = true;
                    }
                }
            }
        }
    }
    best
}

/// One pass in route order: a truck-served, drone-eligible customer between
/// two truck nodes becomes a sortie from its predecessor to its successor when
/// the flight fits the endurance and `p_z` strictly drops.
pub fn findsortie<C: CostModel>(enc: &Encoding, eval: &Evaluator<C>) -> Encoding {
    let inst = eval.cost().instance();
    let mut best = enc.clone();
    let mut best_pz = eval.p_z(&best);
    for p in 1..best.len().saturating_sub(1) {
        let node = best.upper[p];
        if node == DEPOT || best.lower[p] || best.lower[p - 1] || best.lower[p + 1] || !inst.drone_eligible(node) {
            continue;
        }
        let (launch, rendezvous) = (best.upper[p - 1], best.upper[p + 1]);
        let flight = eval.cost().drone_seconds(launch, node) + eval.cost().drone_seconds(node, rendezvous);
        if flight > inst.endurance {
            continue;
        }
        let mut cand = best.clone();
        cand.lower[p] = true;
        let pz = eval.p_z(&cand);
        if pz < best_pz {
            best = cand;
            best_pz = pz;
        }
    }
    best
}

/// Full construction pipeline.
pub fn construct<C: CostModel>(eval: &Evaluator<C>) -> NnOutcome {
    let nn = nearest_neighbor_init(eval.cost(), eval.cost().instance().trucks);
    let refined = two_opt(&nn.encoding, eval);
    let encoding = findsortie(&refined, eval);
    NnOutcome { encoding, unassigned: nn.unassigned }
}
