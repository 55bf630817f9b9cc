use std::collections::BTreeMap;

use qmlids_core::sim::Counts;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

const SHOTS_KEY: &str = "_shots";

/// Key-sorted object of bitstring counts plus `"_shots"`.
pub fn counts_to_json(c: &Counts) -> String {
    let mut m = Map::new();
    for (k, &v) in c.iter() {
        m.insert(k.clone(), Value::from(v));
    }
    m.insert(SHOTS_KEY.into(), Value::from(c.shots()));
    let sorted: BTreeMap<String, Value> = m.into_iter().collect();
    serde_json::to_string(&sorted).expect("map of numbers serializes")
}

pub fn counts_from_json(text: &str) -> Result<Counts> {
    let raw: BTreeMap<String, u64> = serde_json::from_str(text)?;
    let shots = raw.get(SHOTS_KEY).copied();
    let counts: BTreeMap<String, u64> = raw.into_iter().filter(|(k, _)| k != SHOTS_KEY).collect();
    let bits = counts.keys().next().map_or(0, String::len);
    let c = Counts::from_map(bits, counts)?;
    if let Some(s) = shots {
        if s != c.shots() {
            return Err(Error::Data(format!("`_shots` is {s} but counts sum to {}", c.shots())));
        }
    }
    Ok(c)
}
