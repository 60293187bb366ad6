//! Voting algorithms applied to the good samples of one cycle.
//!
//! All cluster-based voters share the same search: ballots are sorted by
//! value, and every maximal window whose span (max - min) is at most epsilon
//! is a candidate cluster. A maximal window cannot be extended on either side
//! without exceeding epsilon, and every optimal epsilon-cluster is such a
//! window, so the window scan is equivalent to enumerating all subsets (the
//! test suite cross-checks this against a brute-force subset oracle).
//!
//! Candidate ordering is a total order so results are deterministic:
//! MOON_BOUNDED_MEDIAN prefers larger size, then smaller median, then the
//! lexicographically smallest ascending sensor-id sequence (whose first
//! element is the lowest contained id). WEIGHTED_CLUSTER prefers larger
//! weight, then smaller weighted median, then lowest contained sensor id,
//! then larger size, then the same lexicographic id order.

use thiserror::Error;

use crate::model::SensorId;

/// One sensor's contribution to a vote.
#[derive(Debug, Clone, PartialEq)]
pub struct Ballot {
    pub sensor_id: SensorId,
    pub value: f64,
    pub weight: f64,
}

impl Ballot {
    pub fn new(sensor_id: SensorId, value: f64, weight: f64) -> Self {
        Ballot {
            sensor_id,
            value,
            weight,
        }
    }
}

/// Reason string carried by invalid voter results.
pub const NO_CLUSTER: &str = "NO_CLUSTER";

/// Verdict of one voter invocation.
///
/// Invariant: when `valid`, `value` is present and `cluster` is the
/// non-empty, ascending list of agreeing sensors; when invalid, both are
/// empty and `reason` explains why.
#[derive(Debug, Clone, PartialEq)]
pub struct VoterResult {
    pub valid: bool,
    pub value: Option<f64>,
    pub cluster: Vec<SensorId>,
    pub reason: Option<String>,
}

impl VoterResult {
    fn agreed(value: f64, mut cluster: Vec<SensorId>) -> Self {
        cluster.sort_unstable();
        VoterResult {
            valid: true,
            value: Some(value),
            cluster,
            reason: None,
        }
    }

    fn no_cluster() -> Self {
        VoterResult {
            valid: false,
            value: None,
            cluster: Vec::new(),
            reason: Some(NO_CLUSTER.to_string()),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VoterError {
    #[error("no ballots supplied")]
    EmptyInput,
    #[error("bad voter parameters: {0}")]
    BadParams(String),
    #[error("total ballot weight is zero")]
    ZeroWeight,
}

/// Plain median of all ballot values; an even count yields the mean of the
/// two middle values. Always valid; every ballot contributes.
pub fn median_vote(ballots: &[Ballot]) -> Result<VoterResult, VoterError> {
    let sorted = sorted_ballots(ballots)?;
    let value = median_of(&sorted);
    let cluster = sorted.iter().map(|b| b.sensor_id).collect();
    Ok(VoterResult::agreed(value, cluster))
}

/// Median bounded by m-out-of-n agreement: the largest epsilon-cluster must
/// contain at least `m` ballots, and its median is the output.
pub fn moon_bounded_median(
    ballots: &[Ballot],
    m: u32,
    n: u32,
    epsilon: f64,
) -> Result<VoterResult, VoterError> {
    if m == 0 || m > n {
        return Err(VoterError::BadParams(format!("m={m} n={n}")));
    }
    if !(epsilon >= 0.0) {
        return Err(VoterError::BadParams(format!("epsilon={epsilon}")));
    }
    let sorted = sorted_ballots(ballots)?;
    let best = candidate_windows(&sorted, epsilon)
        .into_iter()
        .map(|w| moon_candidate(&sorted, w))
        .min_by(|a, b| a.rank().partial_cmp(&b.rank()).expect("finite ranks"))
        .expect("at least one window exists")
        .0;
    if best.size < m as usize {
        return Ok(VoterResult::no_cluster());
    }
    Ok(VoterResult::agreed(best.value, best.ids))
}

/// Weighted cluster vote: the winning epsilon-cluster must hold a strict
/// majority of the total weight; its weighted median is the output.
pub fn weighted_cluster_vote(ballots: &[Ballot], epsilon: f64) -> Result<VoterResult, VoterError> {
    if !(epsilon >= 0.0) {
        return Err(VoterError::BadParams(format!("epsilon={epsilon}")));
    }
    let sorted = sorted_ballots(ballots)?;
    if sorted.iter().any(|b| !(b.weight >= 0.0)) {
        return Err(VoterError::BadParams("negative ballot weight".to_string()));
    }
    let total: f64 = sorted.iter().map(|b| b.weight).sum();
    if total <= 0.0 {
        return Err(VoterError::ZeroWeight);
    }
    let best = candidate_windows(&sorted, epsilon)
        .into_iter()
        .map(|w| weighted_candidate(&sorted, w))
        .min_by(|a, b| a.rank().partial_cmp(&b.rank()).expect("finite ranks"))
        .expect("at least one window exists")
        .0;
    if best.weight <= total / 2.0 {
        return Ok(VoterResult::no_cluster());
    }
    Ok(VoterResult::agreed(best.value, best.ids))
}

/// Strict count majority on exact values: some value must be reported by
/// more than half of the ballots.
pub fn exact_majority(ballots: &[Ballot]) -> Result<VoterResult, VoterError> {
    let sorted = sorted_ballots(ballots)?;
    let half = sorted.len() / 2;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start;
        while end < sorted.len() && sorted[end].value == sorted[start].value {
            end += 1;
        }
        if end - start > half {
            let cluster = sorted[start..end].iter().map(|b| b.sensor_id).collect();
            return Ok(VoterResult::agreed(sorted[start].value, cluster));
        }
        start = end;
    }
    Ok(VoterResult::no_cluster())
}

/// Ballots sorted by (value, sensor id). Duplicate sensor ids are a caller
/// bug; each sensor contributes at most one ballot per cycle.
fn sorted_ballots(ballots: &[Ballot]) -> Result<Vec<Ballot>, VoterError> {
    if ballots.is_empty() {
        return Err(VoterError::EmptyInput);
    }
    debug_assert!(
        {
            let mut ids: Vec<_> = ballots.iter().map(|b| b.sensor_id).collect();
            ids.sort_unstable();
            ids.windows(2).all(|w| w[0] != w[1])
        },
        "duplicate sensor id in ballots"
    );
    let mut sorted = ballots.to_vec();
    sorted.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .expect("ballot values are comparable")
            .then(a.sensor_id.cmp(&b.sensor_id))
    });
    Ok(sorted)
}

/// Maximal windows `(i, j)` (inclusive) of the sorted ballots with
/// `value[j] - value[i] <= epsilon`. Non-maximal windows never beat their
/// extension under either candidate ordering, so only these are searched.
fn candidate_windows(sorted: &[Ballot], epsilon: f64) -> Vec<(usize, usize)> {
    let mut windows = Vec::new();
    let mut j = 0;
    for i in 0..sorted.len() {
        if j < i {
            j = i;
        }
        while j + 1 < sorted.len() && sorted[j + 1].value - sorted[i].value <= epsilon {
            j += 1;
        }
        // Windows with the same right edge are nested; keep the widest only.
        if let Some(&(_, last_j)) = windows.last() {
            if last_j == j {
                continue;
            }
        }
        windows.push((i, j));
    }
    windows
}

struct Candidate {
    size: usize,
    weight: f64,
    value: f64,
    ids: Vec<SensorId>,
}

impl Candidate {
    fn min_id(&self) -> SensorId {
        *self.ids.iter().min().expect("non-empty cluster")
    }
}

/// Ranks compare ascending; the best candidate has the minimum rank.
trait Ranked {
    type Key: PartialOrd;
    fn rank(&self) -> Self::Key;
}

struct MoonCandidate(Candidate);
struct WeightedCandidate(Candidate);

impl std::ops::Deref for MoonCandidate {
    type Target = Candidate;
    fn deref(&self) -> &Candidate {
        &self.0
    }
}

impl std::ops::Deref for WeightedCandidate {
    type Target = Candidate;
    fn deref(&self) -> &Candidate {
        &self.0
    }
}

impl Ranked for MoonCandidate {
    type Key = (i64, f64, Vec<SensorId>);
    fn rank(&self) -> Self::Key {
        (-(self.size as i64), self.value, self.ids.clone())
    }
}

impl Ranked for WeightedCandidate {
    type Key = (f64, f64, SensorId, i64, Vec<SensorId>);
    fn rank(&self) -> Self::Key {
        (
            -self.weight,
            self.value,
            self.min_id(),
            -(self.size as i64),
            self.ids.clone(),
        )
    }
}

fn moon_candidate(sorted: &[Ballot], (i, j): (usize, usize)) -> MoonCandidate {
    let members = &sorted[i..=j];
    let mut ids: Vec<SensorId> = members.iter().map(|b| b.sensor_id).collect();
    ids.sort_unstable();
    MoonCandidate(Candidate {
        size: members.len(),
        weight: 0.0,
        value: median_of(members),
        ids,
    })
}

fn weighted_candidate(sorted: &[Ballot], (i, j): (usize, usize)) -> WeightedCandidate {
    let members = &sorted[i..=j];
    let mut ids: Vec<SensorId> = members.iter().map(|b| b.sensor_id).collect();
    ids.sort_unstable();
    WeightedCandidate(Candidate {
        size: members.len(),
        weight: members.iter().map(|b| b.weight).sum(),
        value: weighted_median_of(members),
        ids,
    })
}

/// Median of value-sorted ballots; even counts average the two middles.
fn median_of(sorted: &[Ballot]) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n % 2 == 1 {
        sorted[n / 2].value
    } else {
        (sorted[n / 2 - 1].value + sorted[n / 2].value) / 2.0
    }
}

/// Smallest member value whose cumulative weight reaches half the cluster
/// weight. Falls back to the plain median when the cluster weight is zero.
fn weighted_median_of(sorted: &[Ballot]) -> f64 {
    let total: f64 = sorted.iter().map(|b| b.weight).sum();
    if total <= 0.0 {
        return median_of(sorted);
    }
    let mut cumulative = 0.0;
    for ballot in sorted {
        cumulative += ballot.weight;
        if cumulative >= total / 2.0 {
            return ballot.value;
        }
    }
    sorted[sorted.len() - 1].value
}
