#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vrpdt_core::{BoundingBox, Customer, Evaluator, GeoPoint, HorizonStart, Instance, StaticCost, TravelModel};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` customers spread over a few kilometres, a mix of light and heavy
/// parcels and some windows.
pub fn instance(n: usize, trucks: usize, seed: u64) -> Instance {
    let mut r = rng(seed);
    let area = BoundingBox::new(GeoPoint::new(40.70, -74.00), GeoPoint::new(40.78, -73.90)).unwrap();
    let customers = (1..=n)
        .map(|id| {
            let p = area.lerp(r.gen(), r.gen());
            let demand = if r.gen_bool(0.7) { r.gen_range(1..=2) } else { r.gen_range(3..=6) };
            let mut c = Customer::new(id, p, demand);
            if r.gen_bool(0.3) {
                let open = r.gen_range(0..7200);
                c = c.with_window(open, open + r.gen_range(1800..=7200));
            }
            c.residential(r.gen_bool(0.5))
        })
        .collect();
    let mut inst = Instance::with_defaults(area.centroid(), customers);
    inst.trucks = trucks;
    inst.drone_capacity = 2;
    inst
}

pub fn flat_model() -> TravelModel {
    TravelModel::static_haversine(10.0, 1.3)
}

pub fn start() -> HorizonStart {
    HorizonStart::default()
}

pub fn static_eval(inst: &Instance) -> Evaluator<StaticCost<'_>> {
    Evaluator::new(StaticCost::new(inst))
}

/// Smallest p_z over every valid single-route encoding: all customer orders
/// times all flag subsets.
pub fn brute_force_optimum<C: vrpdt_core::CostModel>(eval: &Evaluator<C>) -> f64 {
    let inst = eval.cost().instance();
    let n = inst.n();
    let mut order: Vec<usize> = (1..=n).collect();
    let mut best = f64::INFINITY;
    permute(&mut order, 0, &mut |perm| {
        let mut upper = vec![0];
        upper.extend_from_slice(perm);
        upper.push(0);
        for mask in 0u32..(1 << n) {
            let mut lower = vec![false; n + 2];
            for (k, flag) in lower[1..=n].iter_mut().enumerate() {
                *flag = mask >> k & 1 == 1;
            }
            let enc = vrpdt_core::Encoding::new(upper.clone(), lower);
            if enc.validate(inst).is_ok() {
                best = best.min(eval.p_z(&enc));
            }
        }
    });
    best
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}
