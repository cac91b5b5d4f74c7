//! Fixtures shared by the benchmarks.

use std::collections::BTreeMap;

use familiar_core::guidance::{ActionSpec, Behavior, CompareOp, InteractionProtocol, Precondition};
use familiar_core::{GuidanceEngine, SensorSnapshot, SensorValue};

/// `protocols` chains of `behaviors` steps, each gated on its protocol's
/// sensor, with priorities spread over four levels.
pub fn synthetic_engine(protocols: usize, behaviors: usize) -> (GuidanceEngine, SensorSnapshot) {
    let ips = (0..protocols)
        .map(|i| {
            let chain = (0..behaviors)
                .map(|j| {
                    let mut b = Behavior::new(format!("p{i}b{j}"), ActionSpec::new("say"));
                    b.is_entry = j == 0;
                    b.is_exit = j + 1 == behaviors;
                    if j > 0 {
                        b.predecessors = vec![format!("p{i}b{}", j - 1)];
                    }
                    b.preconditions = vec![Precondition::new(format!("s{i}"), CompareOp::Eq, true)];
                    b
                })
                .collect();
            InteractionProtocol::new(format!("p{i}"), (i % 4) as u32, chain)
        })
        .collect();
    let values: BTreeMap<String, SensorValue> =
        (0..protocols).map(|i| (format!("s{i}"), SensorValue::from(i % 3 != 0))).collect();
    (GuidanceEngine::new(ips), SensorSnapshot { values, tick: 1 })
}
