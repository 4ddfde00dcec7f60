use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    pub invocations: u64,
    pub bytes: u64,
    pub messages: u64,
    pub rounds: u64,
}

/// Communication charged per subprotocol. Keys are `phase/subprotocol`
/// when a phase is active, otherwise the bare subprotocol name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommLedger {
    entries: BTreeMap<String, LedgerEntry>,
}

impl CommLedger {
    pub fn charge(&mut self, key: &str, bytes: u64, messages: u64, rounds: u64) {
        let e = self.entries.entry(key.to_string()).or_default();
        e.invocations += 1;
        e.bytes += bytes;
        e.messages += messages;
        e.rounds += rounds;
    }

    pub fn get(&self, key: &str) -> LedgerEntry {
        self.entries.get(key).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &LedgerEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn total_bytes(&self) -> u64 {
        self.entries.values().map(|e| e.bytes).sum()
    }

    /// Bytes of every entry whose key starts with `prefix`.
    pub fn bytes_with_prefix(&self, prefix: &str) -> u64 {
        self.entries
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(_, e)| e.bytes)
            .sum()
    }

    pub fn merge(&mut self, other: &CommLedger) {
        for (k, v) in &other.entries {
            let e = self.entries.entry(k.clone()).or_default();
            e.invocations += v.invocations;
            e.bytes += v.bytes;
            e.messages += v.messages;
            e.rounds += v.rounds;
        }
    }

    /// CSV with columns `subprotocol,invocations,bytes,rounds`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["subprotocol", "invocations", "bytes", "rounds"])?;
        for (k, e) in &self.entries {
            w.write_record([
                k.clone(),
                e.invocations.to_string(),
                e.bytes.to_string(),
                e.rounds.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
