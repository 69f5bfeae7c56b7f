//! Synthetic event log generators for tests, benchmarks, and demos.
//!
//! All generators are deterministic in their seed and always produce logs
//! that pass [`EventLog::validate`].

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::event_log::{AttributeValue, Event, EventLog};

const BASE_SECONDS_APART: i64 = 60;

fn base_time() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 3, 1, 8, 0, 0).unwrap()
}

/// Item counts per order: a seeded subset of orders gets 2..=max_items
/// items (cycling), everyone else gets one.
fn item_counts(orders: usize, max_items: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut counts = vec![1usize; orders];
    if max_items >= 2 && orders > 0 {
        let quota = (orders / 10).max(1);
        let mut indices: Vec<usize> = (0..orders).collect();
        indices.shuffle(rng);
        let mut multi: Vec<usize> = indices.into_iter().take(quota).collect();
        multi.sort_unstable();
        for (j, &order_idx) in multi.iter().enumerate() {
            counts[order_idx] = 2 + (j % (max_items - 1));
        }
    }
    counts
}

fn omap_entry(object_type: &str, ids: &[String]) -> (String, BTreeSet<String>) {
    (
        object_type.to_string(),
        ids.iter().cloned().collect(),
    )
}

/// Generates an order fulfillment log over object types `order`, `item`,
/// and `package`.
///
/// Each order produces one `Place order` event carrying the order and all
/// of its items, then per item a `Pick item` and a `Pack item` event
/// carrying the item, the order, and the order's package, and finally one
/// `Send package` event carrying only the package. Timestamps strictly
/// increase across the whole log, so events of different orders interleave
/// never and the per-object traces are exactly the per-order sequences.
///
/// Most orders have a single item; roughly one in ten (at least one, when
/// `max_items >= 2`) gets between 2 and `max_items` items, chosen by seed.
pub fn generate_order_log(orders: usize, max_items: usize, seed: u64) -> Result<EventLog> {
    if max_items == 0 {
        return Err(Error::InvalidFixtureArgs(
            "max_items must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = item_counts(orders, max_items, &mut rng);

    let mut events = Vec::new();
    let mut objects = BTreeMap::new();
    let mut seq = 0usize;
    let next_ts = |seq: &mut usize| {
        let t = base_time() + Duration::seconds(BASE_SECONDS_APART * *seq as i64);
        *seq += 1;
        t
    };

    for (idx, &item_count) in counts.iter().enumerate() {
        let order_no = idx + 1;
        let order_id = format!("o{order_no}");
        let package_id = format!("pk{order_no}");
        let item_ids: Vec<String> = (1..=item_count)
            .map(|j| format!("i{order_no}_{j}"))
            .collect();

        objects.insert(order_id.clone(), "order".to_string());
        objects.insert(package_id.clone(), "package".to_string());
        for item_id in &item_ids {
            objects.insert(item_id.clone(), "item".to_string());
        }

        events.push(Event::new(
            format!("e{}", seq + 1),
            "Place order",
            next_ts(&mut seq),
            BTreeMap::from([
                omap_entry("order", std::slice::from_ref(&order_id)),
                omap_entry("item", &item_ids),
            ]),
        ));
        for item_id in &item_ids {
            for activity in ["Pick item", "Pack item"] {
                events.push(Event::new(
                    format!("e{}", seq + 1),
                    activity,
                    next_ts(&mut seq),
                    BTreeMap::from([
                        omap_entry("item", std::slice::from_ref(item_id)),
                        omap_entry("order", std::slice::from_ref(&order_id)),
                        omap_entry("package", std::slice::from_ref(&package_id)),
                    ]),
                ));
            }
        }
        events.push(Event::new(
            format!("e{}", seq + 1),
            "Send package",
            next_ts(&mut seq),
            BTreeMap::from([omap_entry("package", std::slice::from_ref(&package_id))]),
        ));
    }

    let declared = ["order", "item", "package"]
        .into_iter()
        .map(String::from)
        .collect();
    Ok(EventLog::from_parts(events, objects, declared, Vec::new()))
}

/// Generates a larger retail log over five object types: the order
/// fulfillment structure of [`generate_order_log`] plus a `customer` on
/// each `Place order` (orders assigned round-robin) and a per-item
/// `product` carried only on that item's `Pick item`.
pub fn generate_retail_log(
    orders: usize,
    max_items: usize,
    customers: usize,
    seed: u64,
) -> Result<EventLog> {
    if max_items == 0 {
        return Err(Error::InvalidFixtureArgs(
            "max_items must be at least 1".into(),
        ));
    }
    if customers == 0 && orders > 0 {
        return Err(Error::InvalidFixtureArgs(
            "customers must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = item_counts(orders, max_items, &mut rng);

    let mut events = Vec::new();
    let mut objects = BTreeMap::new();
    let mut seq = 0usize;
    let next_ts = |seq: &mut usize| {
        let t = base_time() + Duration::seconds(BASE_SECONDS_APART * *seq as i64);
        *seq += 1;
        t
    };

    for (idx, &item_count) in counts.iter().enumerate() {
        let order_no = idx + 1;
        let order_id = format!("o{order_no}");
        let package_id = format!("pk{order_no}");
        let customer_id = format!("c{}", idx % customers + 1);
        let item_ids: Vec<String> = (1..=item_count)
            .map(|j| format!("i{order_no}_{j}"))
            .collect();

        objects.insert(order_id.clone(), "order".to_string());
        objects.insert(package_id.clone(), "package".to_string());
        objects.insert(customer_id.clone(), "customer".to_string());
        for item_id in &item_ids {
            objects.insert(item_id.clone(), "item".to_string());
        }

        events.push(Event::new(
            format!("e{}", seq + 1),
            "Place order",
            next_ts(&mut seq),
            BTreeMap::from([
                omap_entry("order", std::slice::from_ref(&order_id)),
                omap_entry("item", &item_ids),
                omap_entry("customer", std::slice::from_ref(&customer_id)),
            ]),
        ));
        for (j, item_id) in item_ids.iter().enumerate() {
            let product_id = format!("pr{order_no}_{}", j + 1);
            objects.insert(product_id.clone(), "product".to_string());
            events.push(Event::new(
                format!("e{}", seq + 1),
                "Pick item",
                next_ts(&mut seq),
                BTreeMap::from([
                    omap_entry("item", std::slice::from_ref(item_id)),
                    omap_entry("order", std::slice::from_ref(&order_id)),
                    omap_entry("package", std::slice::from_ref(&package_id)),
                    omap_entry("product", std::slice::from_ref(&product_id)),
                ]),
            ));
            events.push(Event::new(
                format!("e{}", seq + 1),
                "Pack item",
                next_ts(&mut seq),
                BTreeMap::from([
                    omap_entry("item", std::slice::from_ref(item_id)),
                    omap_entry("order", std::slice::from_ref(&order_id)),
                    omap_entry("package", std::slice::from_ref(&package_id)),
                ]),
            ));
        }
        events.push(Event::new(
            format!("e{}", seq + 1),
            "Send package",
            next_ts(&mut seq),
            BTreeMap::from([omap_entry("package", std::slice::from_ref(&package_id))]),
        ));
    }

    let declared = ["order", "item", "package", "customer", "product"]
        .into_iter()
        .map(String::from)
        .collect();
    Ok(EventLog::from_parts(events, objects, declared, Vec::new()))
}

/// Generates a structurally random but always valid log: random activities,
/// random object maps over per-type object pools, random timestamps (ties
/// allowed), and occasional scalar attributes.
pub fn generate_random_log(num_events: usize, num_types: usize, seed: u64) -> Result<EventLog> {
    if num_types == 0 && num_events > 0 {
        return Err(Error::InvalidFixtureArgs(
            "num_types must be at least 1 when events are requested".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let activities = ["a", "b", "c", "d", "e", "f", "g", "h"];
    let notes = ["ok", "rush", "manual", "retry"];

    let per_type_pool = (num_events / 2).max(2);
    let mut objects = BTreeMap::new();
    let mut pools: Vec<Vec<String>> = Vec::with_capacity(num_types);
    for t in 0..num_types {
        let type_name = format!("t{t}");
        let pool: Vec<String> = (0..per_type_pool)
            .map(|k| format!("{type_name}_obj{k}"))
            .collect();
        for id in &pool {
            objects.insert(id.clone(), type_name.clone());
        }
        pools.push(pool);
    }

    let mut events = Vec::with_capacity(num_events);
    for n in 0..num_events {
        let mut omap = BTreeMap::new();
        let type_count = rng.gen_range(1..=3.min(num_types));
        let mut type_indices: Vec<usize> = (0..num_types).collect();
        type_indices.shuffle(&mut rng);
        for &t in type_indices.iter().take(type_count) {
            let picks = rng.gen_range(1..=2.min(pools[t].len()));
            let chosen: BTreeSet<String> = pools[t]
                .choose_multiple(&mut rng, picks)
                .cloned()
                .collect();
            omap.insert(format!("t{t}"), chosen);
        }
        let ts = base_time() + Duration::seconds(rng.gen_range(0..86_400));
        let mut event = Event::new(
            format!("e{n}"),
            *activities.choose(&mut rng).unwrap(),
            ts,
            omap,
        );
        if rng.gen_bool(0.5) {
            event.vmap.insert(
                "amount".into(),
                AttributeValue::Float((rng.gen_range(0.0..100.0f64) * 100.0).round() / 100.0),
            );
        }
        if rng.gen_bool(0.3) {
            event.vmap.insert(
                "count".into(),
                AttributeValue::Integer(rng.gen_range(-1000..1000)),
            );
        }
        if rng.gen_bool(0.3) {
            event.vmap.insert(
                "note".into(),
                AttributeValue::String(notes.choose(&mut rng).unwrap().to_string()),
            );
        }
        if rng.gen_bool(0.2) {
            event
                .vmap
                .insert("priority".into(), AttributeValue::Boolean(rng.gen_bool(0.5)));
        }
        events.push(event);
    }

    let declared = (0..num_types).map(|t| format!("t{t}")).collect();
    Ok(EventLog::from_parts(events, objects, declared, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_order_single_item_is_four_events() {
        let log = generate_order_log(1, 1, 2).unwrap();
        assert_eq!(log.events().len(), 4);
        assert_eq!(log.objects().len(), 3, "order, item, package");
        let activities: Vec<&str> = log.events().iter().map(|e| e.activity.as_str()).collect();
        assert_eq!(
            activities,
            ["Place order", "Pick item", "Pack item", "Send package"]
        );
        assert!(log.validate().is_empty());
    }

    #[test]
    fn place_order_carries_all_items_of_the_order() {
        let log = generate_order_log(1, 2, 7).unwrap();
        assert_eq!(log.events().len(), 6, "one order with two items");
        let place = &log.events()[0];
        assert_eq!(place.activity, "Place order");
        assert_eq!(
            place.objects_of_type("item").count(),
            2,
            "both items are attached at placement"
        );
    }

    #[test]
    fn send_package_carries_only_the_package() {
        let log = generate_order_log(1, 1, 2).unwrap();
        let send = log.events().last().unwrap();
        assert_eq!(send.activity, "Send package");
        let types: Vec<&String> = send.omap.keys().collect();
        assert_eq!(types, ["package"]);
    }

    #[test]
    fn two_orders_two_items_event_count() {
        let log = generate_order_log(2, 2, 4).unwrap();
        assert_eq!(
            log.events().len(),
            10,
            "one single-item order (4 events) plus one two-item order (6 events)"
        );
        assert!(log.validate().is_empty());
    }

    #[test]
    fn twenty_orders_max_three_items() {
        let log = generate_order_log(20, 3, 1).unwrap();
        assert_eq!(log.events().len(), 86);
        assert!((80..=160).contains(&log.events().len()));
        assert!(log.validate().is_empty());

        let mut size_histogram = BTreeMap::new();
        for event in log.events() {
            if event.activity == "Place order" {
                *size_histogram
                    .entry(event.objects_of_type("item").count())
                    .or_insert(0usize) += 1;
            }
        }
        assert_eq!(
            size_histogram,
            BTreeMap::from([(1, 18), (2, 1), (3, 1)]),
            "two in twenty orders get extra items, cycling 2 then 3"
        );
    }

    #[test]
    fn timestamps_strictly_increase() {
        let log = generate_order_log(5, 3, 9).unwrap();
        for pair in log.events().windows(2) {
            assert!(
                pair[0].timestamp < pair[1].timestamp,
                "events {} and {} are not strictly ordered",
                pair[0].id,
                pair[1].id
            );
        }
    }

    #[test]
    fn same_seed_same_log() {
        let a = generate_order_log(12, 3, 42).unwrap();
        let b = generate_order_log(12, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_random_log(30, 3, 7).unwrap();
        let d = generate_random_log(30, 3, 7).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn zero_max_items_is_rejected() {
        assert!(matches!(
            generate_order_log(1, 0, 0),
            Err(Error::InvalidFixtureArgs(_))
        ));
    }

    #[test]
    fn retail_log_is_valid_and_uses_five_types() {
        let log = generate_retail_log(10, 2, 3, 5).unwrap();
        assert!(log.validate().is_empty());
        assert_eq!(log.object_types().len(), 5);

        let mut customers_seen = Vec::new();
        for event in log.events() {
            match event.activity.as_str() {
                "Place order" => {
                    let c: Vec<&str> = event.objects_of_type("customer").collect();
                    assert_eq!(c.len(), 1, "exactly one customer per placement");
                    customers_seen.push(c[0].to_string());
                }
                "Pick item" => {
                    assert_eq!(
                        event.objects_of_type("product").count(),
                        1,
                        "exactly one product per pick"
                    );
                }
                other => {
                    assert_eq!(
                        event.objects_of_type("customer").count() + event.objects_of_type("product").count(),
                        0,
                        "{other} events carry neither customers nor products"
                    );
                }
            }
        }
        assert_eq!(
            customers_seen,
            ["c1", "c2", "c3", "c1", "c2", "c3", "c1", "c2", "c3", "c1"],
            "orders rotate through the customer pool"
        );
    }

    #[test]
    fn retail_log_reaches_scale() {
        let log = generate_retail_log(5000, 3, 250, 11).unwrap();
        assert!(
            log.events().len() >= 20_000,
            "expected at least 20k events, got {}",
            log.events().len()
        );
    }

    #[test]
    fn random_logs_are_always_valid() {
        for seed in 0..10 {
            let log = generate_random_log(40, 3, seed).unwrap();
            assert_eq!(log.events().len(), 40);
            let violations = log.validate();
            assert!(
                violations.is_empty(),
                "seed {seed} produced violations: {violations:?}"
            );
        }
    }
}
