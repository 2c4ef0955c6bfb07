//! Upper/lower vector solution representation.
//!
//! The upper vector lists node ids route by route, with `0` opening and
//! closing every route (consecutive routes share their delimiter). The lower
//! vector carries one flag per position:
//!
//! - a `0` customer is served by the truck;
//! - a `1` preceded by a `0` is a drone customer, launched from the node just
//!   before it;
//! - a `1` preceded by a `1` is visited by the truck while the drone is away;
//! - the first `0` after a block of `1`s is where the drone rejoins the truck,
//!   which is the depot when the route ends first.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;
use thiserror::Error;

use crate::instance::{Instance, NodeId, DEPOT};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Encoding {
    pub upper: Vec<NodeId>,
    pub lower: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sortie {
    /// Truck node the drone leaves from; `0` is the depot at route start.
    pub launch: NodeId,
    pub customer: NodeId,
    /// Truck node the drone lands on; `0` is the depot at route end.
    pub rendezvous: NodeId,
    pub drone_id: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Route {
    pub truck_id: usize,
    /// Customers visited by the truck, depot excluded.
    pub visits: Vec<NodeId>,
    /// Sorties in launch order.
    pub sorties: Vec<Sortie>,
}

impl Route {
    pub fn is_empty(&self) -> bool {
        self.visits.is_empty() && self.sorties.is_empty()
    }

    /// All customers served on this route, truck and drone.
    pub fn customers(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.visits.iter().copied().chain(self.sorties.iter().map(|s| s.customer))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct DecodedPlan {
    pub routes: Vec<Route>,
}

impl DecodedPlan {
    pub fn customer_count(&self) -> usize {
        self.routes.iter().map(|r| r.visits.len() + r.sorties.len()).sum()
    }

    pub fn sortie_count(&self) -> usize {
        self.routes.iter().map(|r| r.sorties.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("upper has {upper} elements but lower has {lower}")]
    LengthMismatch { upper: usize, lower: usize },
    #[error("encoding must contain at least a start and an end depot")]
    TooShort,
    #[error("position {position}: expected depot 0")]
    MissingDepot { position: usize },
    #[error("position {position}: depot carries a drone flag")]
    FlagOnDepot { position: usize },
    #[error("position {position}: unknown customer id {id}")]
    UnknownCustomer { position: usize, id: NodeId },
    #[error("position {position}: customer {id} appears twice")]
    Duplicate { position: usize, id: NodeId },
    #[error("customer {id} is not in the encoding")]
    Missing { id: NodeId },
    #[error("{routes} routes exceed the fleet of {trucks} trucks")]
    TooManyRoutes { routes: usize, trucks: usize },
    #[error("position {position}: drone flag set but the fleet carries no drones")]
    NoDrones { position: usize },
    #[error("position {position}: customer {id} exceeds drone capacity but is drone-served")]
    Ineligible { position: usize, id: NodeId },
    #[error("route {route}: {reason}")]
    Inconsistent { route: usize, reason: &'static str },
}

impl Encoding {
    pub fn new(upper: Vec<NodeId>, lower: Vec<bool>) -> Self {
        Self { upper, lower }
    }

    /// Builds an encoding from 0/1 integers.
    pub fn from_flags(upper: Vec<NodeId>, flags: &[u8]) -> Self {
        Self { upper, lower: flags.iter().map(|&f| f != 0).collect() }
    }

    /// Truck-only encoding from explicit routes; empty routes are kept.
    pub fn from_routes<R: AsRef<[NodeId]>>(routes: &[R]) -> Self {
        let mut upper = vec![DEPOT];
        for r in routes {
            upper.extend_from_slice(r.as_ref());
            upper.push(DEPOT);
        }
        if routes.is_empty() {
            upper.push(DEPOT);
        }
        let lower = vec![false; upper.len()];
        Self { upper, lower }
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }

    pub fn flags(&self) -> Vec<u8> {
        self.lower.iter().map(|&f| f as u8).collect()
    }

    /// Position ranges of each route's customers (delimiters excluded).
    pub fn route_ranges(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, &node) in self.upper.iter().enumerate() {
            if node == DEPOT {
                if let Some(s) = start {
                    out.push(s..i);
                }
                start = Some(i + 1);
            }
        }
        out
    }

    pub fn route_count(&self) -> usize {
        self.upper.iter().filter(|&&n| n == DEPOT).count().saturating_sub(1)
    }

    /// Positions holding customers.
    pub fn customer_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.upper.iter().enumerate().filter(|(_, &n)| n != DEPOT).map(|(i, _)| i)
    }

    /// Structural checks shared by [`decode`] and [`Encoding::validate`].
    /// Customer coverage is not required here.
    pub fn check_structure(&self, inst: &Instance) -> Result<(), EncodingError> {
        if self.upper.len() != self.lower.len() {
            return Err(EncodingError::LengthMismatch { upper: self.upper.len(), lower: self.lower.len() });
        }
        if self.upper.len() < 2 {
            return Err(EncodingError::TooShort);
        }
        let last = self.upper.len() - 1;
        for position in [0, last] {
            if self.upper[position] != DEPOT {
                return Err(EncodingError::MissingDepot { position });
            }
        }
        let n = inst.n();
        let mut seen = vec![false; n + 1];
        for (position, (&id, &flag)) in self.upper.iter().zip(&self.lower).enumerate() {
            if id == DEPOT {
                if flag {
                    return Err(EncodingError::FlagOnDepot { position });
                }
                continue;
            }
            if id > n {
                return Err(EncodingError::UnknownCustomer { position, id });
            }
            if seen[id] {
                return Err(EncodingError::Duplicate { position, id });
            }
            seen[id] = true;
            if flag && inst.drones_per_truck == 0 {
                return Err(EncodingError::NoDrones { position });
            }
        }
        let routes = self.route_count();
        if routes > inst.trucks {
            return Err(EncodingError::TooManyRoutes { routes, trucks: inst.trucks });
        }
        Ok(())
    }

    /// Full validity: structure, every customer exactly once, and every
    /// drone customer within drone capacity.
    pub fn validate(&self, inst: &Instance) -> Result<(), EncodingError> {
        self.check_structure(inst)?;
        let mut seen = vec![false; inst.n() + 1];
        for &id in &self.upper {
            seen[id] = true;
        }
        if let Some(id) = (1..=inst.n()).find(|&id| !seen[id]) {
            return Err(EncodingError::Missing { id });
        }
        for position in 1..self.upper.len() {
            if self.lower[position] && !self.lower[position - 1] {
                let id = self.upper[position];
                if !inst.drone_eligible(id) {
                    return Err(EncodingError::Ineligible { position, id });
                }
            }
        }
        Ok(())
    }

    /// Positions of drone customers (starts of 1-blocks).
    pub fn drone_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.lower.len()).filter(move |&i| self.lower[i] && !self.lower[i - 1])
    }
}

/// Maps an encoding onto explicit truck routes and drone sorties.
pub fn decode(enc: &Encoding, inst: &Instance) -> Result<DecodedPlan, EncodingError> {
    let mut plan = DecodedPlan::default();
    decode_into(enc, inst, &mut plan)?;
    Ok(plan)
}

/// [`decode`] into an existing plan, reusing its allocations.
pub fn decode_into(enc: &Encoding, inst: &Instance, plan: &mut DecodedPlan) -> Result<(), EncodingError> {
    enc.check_structure(inst)?;
    let drones = inst.drones_per_truck.max(1);
    let mut count = 0;
    let mut start = None;
    for (i, &node) in enc.upper.iter().enumerate() {
        if node != DEPOT {
            continue;
        }
        if let Some(s) = start {
            if count == plan.routes.len() {
                plan.routes.push(Route::default());
            }
            decode_route(enc, s..i, count, drones, &mut plan.routes[count]);
            count += 1;
        }
        start = Some(i + 1);
    }
    plan.routes.truncate(count);
    Ok(())
}

fn decode_route(enc: &Encoding, range: Range<usize>, truck_id: usize, drones: usize, route: &mut Route) {
    route.truck_id = truck_id;
    route.visits.clear();
    route.sorties.clear();
    let mut prev_node = DEPOT;
    let mut prev_flag = false;
    let mut open: Option<Sortie> = None;
    for i in range {
        let (node, flag) = (enc.upper[i], enc.lower[i]);
        match (prev_flag, flag) {
            (false, true) => {
                open = Some(Sortie { launch: prev_node, customer: node, rendezvous: DEPOT, drone_id: route.sorties.len() % drones });
            }
            (true, true) => route.visits.push(node),
            (_, false) => {
                route.visits.push(node);
                if let Some(mut s) = open.take() {
                    s.rendezvous = node;
                    route.sorties.push(s);
                }
            }
        }
        prev_node = node;
        prev_flag = flag;
    }
    if let Some(s) = open.take() {
        route.sorties.push(s);
    }
}

/// Inverse of [`decode`].
pub fn encode(plan: &DecodedPlan) -> Result<Encoding, EncodingError> {
    let mut upper = vec![DEPOT];
    let mut lower = vec![false];
    for (ri, route) in plan.routes.iter().enumerate() {
        let mut used = vec![false; route.sorties.len()];
        let mut open: Option<usize> = None;
        let mut launch_from = |node: NodeId,
                               open: &mut Option<usize>,
                               upper: &mut Vec<NodeId>,
                               lower: &mut Vec<bool>|
         -> Result<(), EncodingError> {
            let mut launched = route.sorties.iter().enumerate().filter(|(k, s)| !used[*k] && s.launch == node);
            if let Some((k, s)) = launched.next() {
                if open.is_some() {
                    return Err(EncodingError::Inconsistent {
                        route: ri,
                        reason: "sortie launched while another sortie is open",
                    });
                }
                if launched.next().is_some() {
                    return Err(EncodingError::Inconsistent { route: ri, reason: "two sorties share a launch node" });
                }
                used[k] = true;
                *open = Some(k);
                upper.push(s.customer);
                lower.push(true);
            }
            Ok(())
        };
        launch_from(DEPOT, &mut open, &mut upper, &mut lower)?;
        for &v in &route.visits {
            let flag = match open {
                Some(k) if route.sorties[k].rendezvous == v => {
                    open = None;
                    false
                }
                Some(_) => true,
                None => false,
            };
            upper.push(v);
            lower.push(flag);
            if !flag {
                launch_from(v, &mut open, &mut upper, &mut lower)?;
            }
        }
        if let Some(k) = open {
            if route.sorties[k].rendezvous != DEPOT {
                return Err(EncodingError::Inconsistent { route: ri, reason: "rendezvous node not on the route after launch" });
            }
        }
        if route.sorties.iter().enumerate().any(|(k, _)| !used[k]) {
            return Err(EncodingError::Inconsistent { route: ri, reason: "sortie launch node not on the route" });
        }
        upper.push(DEPOT);
        lower.push(false);
    }
    if plan.routes.is_empty() {
        upper.push(DEPOT);
        lower.push(false);
    }
    Ok(Encoding { upper, lower })
}

/// Restores validity after a move: fixes delimiters, clears flags that cannot
/// stand, and merges routes beyond the fleet size. Customer order is never
/// changed.
pub fn repair(enc: &Encoding, inst: &Instance) -> Result<Encoding, EncodingError> {
    let mut upper = enc.upper.clone();
    let mut lower = enc.lower.clone();
    lower.resize(upper.len(), false);
    if upper.first() != Some(&DEPOT) {
        upper.insert(0, DEPOT);
        lower.insert(0, false);
    }
    if upper.len() < 2 || upper.last() != Some(&DEPOT) {
        upper.push(DEPOT);
        lower.push(false);
    }

    let n = inst.n();
    let mut seen = vec![false; n + 1];
    for (position, &id) in upper.iter().enumerate() {
        if id == DEPOT {
            continue;
        }
        if id > n {
            return Err(EncodingError::UnknownCustomer { position, id });
        }
        if seen[id] {
            return Err(EncodingError::Duplicate { position, id });
        }
        seen[id] = true;
    }
    if let Some(id) = (1..=n).find(|&id| !seen[id]) {
        return Err(EncodingError::Missing { id });
    }

    // Merge trailing routes until the fleet suffices.
    let mut routes = upper.iter().filter(|&&v| v == DEPOT).count() - 1;
    let mut i = upper.len() - 2;
    while routes > inst.trucks && i > 0 {
        if upper[i] == DEPOT {
            upper.remove(i);
            lower.remove(i);
            routes -= 1;
        }
        i -= 1;
    }

    let drones = inst.drones_per_truck > 0;
    for i in 0..upper.len() {
        if upper[i] == DEPOT || !drones {
            lower[i] = false;
            continue;
        }
        let block_start = lower[i] && !lower[i - 1];
        if block_start && !inst.drone_eligible(upper[i]) {
            lower[i] = false;
        }
    }
    Ok(Encoding { upper, lower })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoPoint;
    use crate::instance::Customer;

    fn inst(n: usize) -> Instance {
        let customers = (1..=n)
            .map(|id| Customer::new(id, GeoPoint::new(40.7 + id as f64 * 0.001, -73.9), 1))
            .collect();
        let mut inst = Instance::with_defaults(GeoPoint::new(40.7, -73.9), customers);
        inst.trucks = 2;
        inst
    }

    fn fig3() -> Encoding {
        Encoding::from_flags(vec![0, 3, 6, 14, 7, 12, 19, 9, 0], &[0, 0, 0, 1, 0, 0, 0, 1, 0])
    }

    #[test]
    fn figure_three_decodes() {
        let plan = decode(&fig3(), &inst(19)).unwrap();
        assert_eq!(plan.routes.len(), 1);
        let r = &plan.routes[0];
        assert_eq!(r.visits, vec![3, 6, 7, 12, 19]);
        let triples: Vec<_> = r.sorties.iter().map(|s| (s.launch, s.customer, s.rendezvous)).collect();
        assert_eq!(triples, vec![(6, 14, 7), (19, 9, 0)]);
        assert_eq!(encode(&plan).unwrap(), fig3());
    }

    #[test]
    fn no_flags_means_truck_only() {
        let plan = decode(&Encoding::from_flags(vec![0, 1, 0], &[0, 0, 0]), &inst(1)).unwrap();
        assert_eq!(plan.routes[0].visits, vec![1]);
        assert!(plan.routes[0].sorties.is_empty());
    }

    // Flags 0,1,1 after the depot: 5 truck, 2 drone launched at 5, 4 truck
    // during the sortie, and the block never closes before the route ends.
    #[test]
    fn open_block_rendezvous_at_depot() {
        let plan = decode(&Encoding::from_flags(vec![0, 5, 2, 4, 0], &[0, 0, 1, 1, 0]), &inst(5)).unwrap();
        let r = &plan.routes[0];
        assert_eq!(r.visits, vec![5, 4]);
        assert_eq!(r.sorties.len(), 1);
        assert_eq!((r.sorties[0].launch, r.sorties[0].customer, r.sorties[0].rendezvous), (5, 2, 0));
    }

    #[test]
    fn launch_from_depot_and_shared_delimiters() {
        let enc = Encoding::from_flags(vec![0, 2, 1, 0, 3, 0], &[0, 1, 0, 0, 0, 0]);
        let plan = decode(&enc, &inst(3)).unwrap();
        assert_eq!(plan.routes.len(), 2);
        assert_eq!(plan.routes[0].sorties[0].launch, 0);
        assert_eq!(plan.routes[0].sorties[0].rendezvous, 1);
        assert_eq!(plan.routes[1].visits, vec![3]);
        assert_eq!(encode(&plan).unwrap(), enc);
    }

    #[test]
    fn empty_routes_round_trip() {
        let enc = Encoding::from_routes(&[vec![1, 2], vec![]]);
        assert_eq!(enc.upper, vec![0, 1, 2, 0, 0]);
        let plan = decode(&enc, &inst(2)).unwrap();
        assert!(plan.routes[1].is_empty());
        assert_eq!(encode(&plan).unwrap(), enc);
    }

    #[test]
    fn malformed_encodings_name_position() {
        let i = inst(3);
        let e = Encoding::from_flags(vec![0, 1, 1, 0], &[0, 0, 0, 0]);
        assert_eq!(decode(&e, &i), Err(EncodingError::Duplicate { position: 2, id: 1 }));
        let e = Encoding::from_flags(vec![0, 1, 0], &[0, 0, 1]);
        assert_eq!(decode(&e, &i), Err(EncodingError::FlagOnDepot { position: 2 }));
        let e = Encoding::from_flags(vec![1, 0], &[0, 0]);
        assert_eq!(decode(&e, &i), Err(EncodingError::MissingDepot { position: 0 }));
        let e = Encoding::from_flags(vec![0, 9, 0], &[0, 0, 0]);
        assert_eq!(decode(&e, &i), Err(EncodingError::UnknownCustomer { position: 1, id: 9 }));
        let e = Encoding::new(vec![0, 1, 0], vec![false, false]);
        assert!(matches!(decode(&e, &i), Err(EncodingError::LengthMismatch { .. })));
        let e = Encoding::from_routes(&[vec![1], vec![2], vec![3]]);
        assert_eq!(decode(&e, &i), Err(EncodingError::TooManyRoutes { routes: 3, trucks: 2 }));
    }

    #[test]
    fn encode_rejects_foreign_sortie() {
        let plan = DecodedPlan {
            routes: vec![Route {
                truck_id: 0,
                visits: vec![1],
                sorties: vec![Sortie { launch: 7, customer: 2, rendezvous: 0, drone_id: 0 }],
            }],
        };
        assert!(matches!(encode(&plan), Err(EncodingError::Inconsistent { .. })));
        let plan = DecodedPlan {
            routes: vec![Route {
                truck_id: 0,
                visits: vec![1, 3],
                sorties: vec![Sortie { launch: 3, customer: 2, rendezvous: 1, drone_id: 0 }],
            }],
        };
        assert!(matches!(encode(&plan), Err(EncodingError::Inconsistent { .. })));
    }

    #[test]
    fn repair_clears_ineligible_and_depot_flags() {
        let mut i = inst(3);
        i.customers[1].demand = i.drone_capacity + 1;
        let e = Encoding::from_flags(vec![0, 1, 2, 3, 0], &[0, 0, 1, 1, 1]);
        let r = repair(&e, &i).unwrap();
        // 2 is too heavy, so 3 becomes the drone customer launched from 2.
        assert_eq!(r.flags(), vec![0, 0, 0, 1, 0]);
        r.validate(&i).unwrap();
        assert_eq!(repair(&r, &i).unwrap(), r);
    }

    #[test]
    fn repair_rejects_missing_customer() {
        let e = Encoding::from_flags(vec![0, 1, 0], &[0, 0, 0]);
        assert_eq!(repair(&e, &inst(2)), Err(EncodingError::Missing { id: 2 }));
        let e = Encoding::from_flags(vec![0, 1, 1, 0], &[0, 0, 0, 0]);
        assert!(matches!(repair(&e, &inst(1)), Err(EncodingError::Duplicate { .. })));
    }

    #[test]
    fn repair_merges_surplus_routes() {
        let e = Encoding::from_routes(&[vec![1], vec![2], vec![3]]);
        let r = repair(&e, &inst(3)).unwrap();
        assert_eq!(r.route_count(), 2);
        assert_eq!(r.upper, vec![0, 1, 0, 2, 3, 0]);
    }

    #[test]
    fn repair_without_drones_clears_everything() {
        let mut i = inst(2);
        i.drones_per_truck = 0;
        let e = Encoding::from_flags(vec![0, 1, 2, 0], &[0, 1, 0, 0]);
        assert_eq!(repair(&e, &i).unwrap().flags(), vec![0, 0, 0, 0]);
    }
}
