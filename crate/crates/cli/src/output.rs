//! JSON shapes for CLI outputs. Field order is fixed by struct
//! declaration order, so runs with identical flags and seed are
//! byte-for-byte reproducible.

use serde::Serialize;

use abl_core::adversary::AdversaryTranscript;
use abl_core::Schedule;

#[derive(Serialize)]
pub struct ScheduleJson {
    pub stages: Vec<StageJson>,
}

#[derive(Serialize)]
pub struct StageJson {
    pub tree: String,
    pub x: usize,
}

impl From<&Schedule> for ScheduleJson {
    fn from(s: &Schedule) -> Self {
        ScheduleJson {
            stages: s
                .stages
                .iter()
                .map(|stage| StageJson { tree: stage.tree.to_code().to_string(), x: stage.len })
                .collect(),
        }
    }
}

#[derive(Serialize)]
pub struct OracleJson {
    pub cost: f64,
    pub schedule: ScheduleJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparisons: Option<OracleComparisons>,
}

#[derive(Serialize)]
pub struct OracleComparisons {
    pub block_partition: f64,
    pub static_mehlhorn: f64,
    pub static_opt: f64,
    pub online_budget: f64,
}

#[derive(Serialize)]
pub struct EpochJson {
    pub pairs: Vec<(u32, u32)>,
    pub len: usize,
    pub saturated: bool,
}

#[derive(Serialize)]
pub struct TranscriptJson {
    pub kind: String,
    pub n: u32,
    pub m: usize,
    pub c: f64,
    pub restructures: usize,
    pub online_routing: u64,
    pub online_total: f64,
    pub min_emitted_cost: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offline_total: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub epochs: Vec<EpochJson>,
}

impl TranscriptJson {
    pub fn new(kind: &str, n: u32, m: usize, c: f64, transcript: &AdversaryTranscript) -> Self {
        TranscriptJson {
            kind: kind.to_string(),
            n,
            m,
            c,
            restructures: transcript.restructures,
            online_routing: transcript.online_routing,
            online_total: transcript.online_total,
            min_emitted_cost: transcript.emitted_costs.iter().copied().min().unwrap_or(0),
            offline_total: transcript.offline_total(),
            epochs: transcript
                .epochs
                .iter()
                .map(|e| EpochJson { pairs: e.pairs.clone(), len: e.len, saturated: e.saturated })
                .collect(),
        }
    }
}

/// CSV series for an adversary run. The matching adversary has an
/// offline comparator (unit cost per request, one reconfiguration per
/// epoch after the first), so its rows carry a running ratio; the
/// deepest-node run reports a running average instead.
pub fn adversary_csv(transcript: &AdversaryTranscript, c: f64) -> String {
    let has_offline = transcript.offline.is_some();
    let mut out = String::new();
    if has_offline {
        out.push_str("t,emitted_cost,realized_cost,cum_online,cum_offline,ratio\n");
    } else {
        out.push_str("t,emitted_cost,realized_cost,cum_online,cum_avg_emitted\n");
    }

    // Offline reconfigurations happen at epoch boundaries.
    let mut epoch_start_of = Vec::new();
    for (idx, epoch) in transcript.epochs.iter().enumerate() {
        epoch_start_of.extend(std::iter::repeat_n(idx, epoch.len));
    }

    let mut cum_online = 0.0f64;
    let mut cum_emitted = 0u64;
    for idx in 0..transcript.realized_costs.len() {
        let t = idx + 1;
        let emitted = transcript.emitted_costs[idx];
        let realized = transcript.realized_costs[idx];
        cum_emitted += emitted;
        cum_online += realized as f64;
        if transcript.restructured[idx] {
            cum_online += c;
        }
        if has_offline {
            let epoch = epoch_start_of.get(idx).copied().unwrap_or(0);
            let cum_offline = t as f64 + epoch as f64 * c;
            let ratio = cum_online / cum_offline;
            out.push_str(&format!("{t},{emitted},{realized},{cum_online},{cum_offline},{ratio:.6}\n"));
        } else {
            let avg = cum_emitted as f64 / t as f64;
            out.push_str(&format!("{t},{emitted},{realized},{cum_online},{avg:.6}\n"));
        }
    }
    out
}
