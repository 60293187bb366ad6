//! Independent reference implementations used to cross-check votekit.
//!
//! Nothing here shares logic with the production code: the voter oracles
//! enumerate every ballot subset instead of scanning sorted windows, and
//! the health oracle is a direct transcription of the state-machine rules.
//! Tests compare production output against these on large random inputs.

use votekit_core::model::{HealthParams, HealthState, SensorId};
use votekit_core::voters::Ballot;

/// Verdict of an oracle vote, mirroring the production result shape.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub valid: bool,
    pub value: Option<f64>,
    pub cluster: Vec<SensorId>,
}

impl OracleOutcome {
    fn invalid() -> Self {
        OracleOutcome {
            valid: false,
            value: None,
            cluster: Vec::new(),
        }
    }
}

/// Median by explicit sort; even counts average the two middles.
pub fn oracle_median(ballots: &[Ballot]) -> OracleOutcome {
    if ballots.is_empty() {
        return OracleOutcome::invalid();
    }
    let mut values: Vec<f64> = ballots.iter().map(|b| b.value).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    let value = if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    };
    let mut cluster: Vec<SensorId> = ballots.iter().map(|b| b.sensor_id).collect();
    cluster.sort_unstable();
    OracleOutcome {
        valid: true,
        value: Some(value),
        cluster,
    }
}

/// Every non-empty subset of ballots whose value span is at most epsilon.
fn epsilon_subsets(ballots: &[Ballot], epsilon: f64) -> Vec<Vec<Ballot>> {
    assert!(ballots.len() <= 20, "subset enumeration is exponential");
    let mut subsets = Vec::new();
    for mask in 1u32..(1 << ballots.len()) {
        let members: Vec<Ballot> = ballots
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, b)| b.clone())
            .collect();
        let min = members.iter().map(|b| b.value).fold(f64::INFINITY, f64::min);
        let max = members
            .iter()
            .map(|b| b.value)
            .fold(f64::NEG_INFINITY, f64::max);
        if max - min <= epsilon {
            subsets.push(members);
        }
    }
    subsets
}

fn sorted_ids(members: &[Ballot]) -> Vec<SensorId> {
    let mut ids: Vec<SensorId> = members.iter().map(|b| b.sensor_id).collect();
    ids.sort_unstable();
    ids
}

fn subset_median(members: &[Ballot]) -> f64 {
    oracle_median(members).value.unwrap()
}

fn subset_weighted_median(members: &[Ballot]) -> f64 {
    let mut sorted = members.to_vec();
    sorted.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap()
            .then(a.sensor_id.cmp(&b.sensor_id))
    });
    let total: f64 = sorted.iter().map(|b| b.weight).sum();
    if total <= 0.0 {
        return subset_median(members);
    }
    let mut cumulative = 0.0;
    for ballot in &sorted {
        cumulative += ballot.weight;
        if cumulative >= total / 2.0 {
            return ballot.value;
        }
    }
    sorted.last().unwrap().value
}

/// Brute-force bounded median: enumerate all epsilon-subsets, pick the best
/// by (largest size, smallest median, lexicographically smallest id list),
/// then require at least m members.
pub fn oracle_moon(ballots: &[Ballot], m: u32, epsilon: f64) -> OracleOutcome {
    if ballots.is_empty() {
        return OracleOutcome::invalid();
    }
    let best = epsilon_subsets(ballots, epsilon)
        .into_iter()
        .min_by(|a, b| {
            let ka = (-(a.len() as i64), subset_median(a), sorted_ids(a));
            let kb = (-(b.len() as i64), subset_median(b), sorted_ids(b));
            ka.partial_cmp(&kb).unwrap()
        })
        .unwrap();
    if best.len() < m as usize {
        return OracleOutcome::invalid();
    }
    OracleOutcome {
        valid: true,
        value: Some(subset_median(&best)),
        cluster: sorted_ids(&best),
    }
}

/// Brute-force weighted cluster vote: enumerate all epsilon-subsets, pick
/// the best by (largest weight, smallest weighted median, lowest contained
/// id, largest size, lexicographically smallest id list), then require a
/// strict weight majority.
pub fn oracle_weighted(ballots: &[Ballot], epsilon: f64) -> OracleOutcome {
    if ballots.is_empty() {
        return OracleOutcome::invalid();
    }
    let total: f64 = ballots.iter().map(|b| b.weight).sum();
    if total <= 0.0 {
        return OracleOutcome::invalid();
    }
    let weight_of = |members: &[Ballot]| members.iter().map(|b| b.weight).sum::<f64>();
    let best = epsilon_subsets(ballots, epsilon)
        .into_iter()
        .min_by(|a, b| {
            let ka = (
                -weight_of(a),
                subset_weighted_median(a),
                sorted_ids(a)[0],
                -(a.len() as i64),
                sorted_ids(a),
            );
            let kb = (
                -weight_of(b),
                subset_weighted_median(b),
                sorted_ids(b)[0],
                -(b.len() as i64),
                sorted_ids(b),
            );
            ka.partial_cmp(&kb).unwrap()
        })
        .unwrap();
    if weight_of(&best) <= total / 2.0 {
        return OracleOutcome::invalid();
    }
    OracleOutcome {
        valid: true,
        value: Some(subset_weighted_median(&best)),
        cluster: sorted_ids(&best),
    }
}

/// Brute-force exact majority: count every distinct value.
pub fn oracle_exact_majority(ballots: &[Ballot]) -> OracleOutcome {
    if ballots.is_empty() {
        return OracleOutcome::invalid();
    }
    for ballot in ballots {
        let members: Vec<&Ballot> = ballots
            .iter()
            .filter(|b| b.value == ballot.value)
            .collect();
        if members.len() * 2 > ballots.len() {
            let mut cluster: Vec<SensorId> = members.iter().map(|b| b.sensor_id).collect();
            cluster.sort_unstable();
            return OracleOutcome {
                valid: true,
                value: Some(ballot.value),
                cluster,
            };
        }
    }
    OracleOutcome::invalid()
}

/// Reference health interpreter state after a verdict sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceHealth {
    pub state: HealthState,
    pub consecutive_good: u32,
    pub consecutive_bad: u32,
    pub bad_episodes: u32,
    /// Index of the verdict that caused the last transition, if any.
    pub last_transition_at: Option<usize>,
}

/// Replays a good/bad verdict sequence through a literal transcription of
/// the health rules. `responded` models a sensor that has been heard from
/// before the sequence starts. Verdicts after entering UNUSABLE are
/// ignored, mirroring a frozen record.
pub fn oracle_health(verdicts: &[bool], params: &HealthParams, responded: bool) -> ReferenceHealth {
    let mut state = HealthState::Good;
    let mut good_run = 0u32;
    let mut bad_run = 0u32;
    let mut episodes = 0u32;
    let mut last_transition = None;

    for (i, &good) in verdicts.iter().enumerate() {
        if state == HealthState::Unusable {
            break;
        }
        if good {
            good_run += 1;
            bad_run = 0;
            if state == HealthState::Bad && good_run >= params.rehab_threshold {
                state = HealthState::Good;
                good_run = 0;
                last_transition = Some(i);
            }
        } else {
            bad_run += 1;
            good_run = 0;
            if state == HealthState::Good && bad_run >= params.bad_threshold {
                if responded {
                    episodes += 1;
                    state = if episodes >= params.unusable_threshold {
                        HealthState::Unusable
                    } else {
                        HealthState::Bad
                    };
                } else {
                    state = HealthState::Bad;
                }
                bad_run = 0;
                last_transition = Some(i);
            }
        }
    }

    ReferenceHealth {
        state,
        consecutive_good: good_run,
        consecutive_bad: bad_run,
        bad_episodes: episodes,
        last_transition_at: last_transition,
    }
}

/// Splits a u64 into test inputs; mirrors the production generator so test
/// data can be regenerated from a single seed.
pub fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic ballot-set generator for equivalence sweeps: up to
/// `max_ballots` ballots with values on an integer grid and small integer
/// weights (at least one positive).
pub fn generate_ballots(seed: u64, max_ballots: usize) -> Vec<Ballot> {
    let count = 1 + (mix(seed) % max_ballots as u64) as usize;
    let mut ballots = Vec::with_capacity(count);
    for k in 0..count {
        let draw = mix(seed ^ (0xB0A710AD ^ k as u64).wrapping_mul(0x5851_F42D_4C95_7F2D));
        let value = (draw % 21) as f64 - 10.0;
        let weight = ((draw >> 8) % 4) as f64;
        ballots.push(Ballot::new(SensorId(k as u16 + 1), value, weight));
    }
    if ballots.iter().all(|b| b.weight == 0.0) {
        ballots[0].weight = 1.0;
    }
    ballots
}
