use serde::{Deserialize, Serialize};

use crate::dcfp::DetailedState;
use crate::distributions::ModelSpec;
use crate::rng::Stream;

/// Rule for picking the next waiting customer when a server frees up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discipline {
    Fifo,
    Lifo,
    /// Random selection: uniform over the waiting customers.
    Rs,
}

impl std::str::FromStr for Discipline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fifo" => Ok(Discipline::Fifo),
            "lifo" => Ok(Discipline::Lifo),
            "rs" | "random" => Ok(Discipline::Rs),
            _ => Err(format!("unknown discipline {s}")),
        }
    }
}

/// Delay of a customer arriving at time 0 into `state`, simulating forward
/// under `discipline`. Services are drawn when they start, arrivals are fresh.
pub fn delay_under_discipline(state: &DetailedState, discipline: Discipline, model: &ModelSpec, rng: &mut Stream) -> f64 {
    let c = model.servers;
    if state.q0 < c {
        return 0.0;
    }
    debug_assert_eq!(state.residuals.len(), c);
    let mut free = state.residuals.clone();
    // labels in arrival order; the tagged customer is the last one present at 0
    let tagged = state.waiting;
    let mut queue: Vec<usize> = (0..=tagged).collect();
    let mut next_label = tagged + 1;
    let mut next_arrival = model.arrival.sample(rng);
    loop {
        let (k, &f) = free.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        if next_arrival < f {
            queue.push(next_label);
            next_label += 1;
            next_arrival += model.arrival.sample(rng);
            continue;
        }
        let pick = match discipline {
            Discipline::Fifo => 0,
            Discipline::Lifo => queue.len() - 1,
            Discipline::Rs => rng.index(queue.len()),
        };
        if queue.remove(pick) == tagged {
            return f;
        }
        free[k] = f + model.service.sample(rng);
    }
}
