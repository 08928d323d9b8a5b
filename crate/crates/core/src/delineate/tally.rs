//! Streaming tally of which registry accounts each follower follows.
//!
//! Each user's follows are kept as a bitset over registry positions, so
//! duplicate listings collapse and record order is irrelevant. When the
//! number of distinct users held in memory exceeds the budget, the current
//! table is written out as a run sorted by user id; `finish` merges the runs.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Lines, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use super::{CategoryCounts, OutletRegistry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TallySummary {
    pub records: u64,
    pub malformed: u64,
    pub unknown_account: u64,
    pub spilled_runs: u64,
}

impl TallySummary {
    fn absorb(&mut self, other: &TallySummary) {
        self.records += other.records;
        self.malformed += other.malformed;
        self.unknown_account += other.unknown_account;
        self.spilled_runs += other.spilled_runs;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TallyOutcome {
    pub counts: BTreeMap<String, CategoryCounts>,
    pub summary: TallySummary,
}

pub struct FollowTally<'r> {
    registry: &'r OutletRegistry,
    words: usize,
    users: HashMap<String, Box<[u64]>>,
    budget: usize,
    spill_dir: Option<PathBuf>,
    runs: Vec<NamedTempFile>,
    summary: TallySummary,
}

impl<'r> FollowTally<'r> {
    /// `budget` is the maximum number of distinct users held in memory
    /// before a sorted run is spilled to disk.
    pub fn new(registry: &'r OutletRegistry, budget: usize) -> Self {
        FollowTally {
            registry,
            words: registry.len().div_ceil(64),
            users: HashMap::new(),
            budget: budget.max(1),
            spill_dir: None,
            runs: Vec::new(),
            summary: TallySummary::default(),
        }
    }

    pub fn in_memory(registry: &'r OutletRegistry) -> Self {
        Self::new(registry, usize::MAX)
    }

    pub fn spill_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.spill_dir = Some(dir.into());
        self
    }

    pub fn summary(&self) -> &TallySummary {
        &self.summary
    }

    pub fn push(&mut self, account_id: &str, user_id: &str) -> Result<()> {
        self.summary.records += 1;
        let Some(pos) = self.registry.position(account_id) else {
            self.summary.unknown_account += 1;
            return Ok(());
        };
        let words = self.words;
        let mask = match self.users.get_mut(user_id) {
            Some(m) => m,
            None => {
                if self.users.len() >= self.budget {
                    self.spill()?;
                }
                self.users
                    .entry(user_id.to_string())
                    .or_insert_with(|| vec![0u64; words].into_boxed_slice())
            }
        };
        mask[pos / 64] |= 1u64 << (pos % 64);
        Ok(())
    }

    /// Parses one `account_id<TAB>follower_user_id` line. Blank lines are
    /// ignored; anything else without exactly two non-empty fields is
    /// counted as malformed and skipped.
    pub fn push_line(&mut self, line: &str) -> Result<()> {
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            return Ok(());
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(acc), Some(user), None) if !acc.trim().is_empty() && !user.trim().is_empty() => {
                self.push(acc.trim(), user.trim())
            }
            _ => {
                self.summary.records += 1;
                self.summary.malformed += 1;
                Ok(())
            }
        }
    }

    pub fn push_reader<R: BufRead>(&mut self, reader: R) -> Result<()> {
        for line in reader.lines() {
            self.push_line(&line?)?;
        }
        Ok(())
    }

    /// Union with another in-memory tally over the same registry.
    pub fn merge(&mut self, other: FollowTally<'r>) -> Result<()> {
        if !other.runs.is_empty() {
            return Err(Error::InvalidArgument("cannot merge a tally that spilled to disk".into()));
        }
        self.summary.absorb(&other.summary);
        for (user, mask) in other.users {
            match self.users.get_mut(&user) {
                Some(mine) => or_into(mine, &mask),
                None => {
                    if self.users.len() >= self.budget {
                        self.spill()?;
                    }
                    self.users.insert(user, mask);
                }
            }
        }
        Ok(())
    }

    fn spill(&mut self) -> Result<()> {
        if self.users.is_empty() {
            return Ok(());
        }
        let tmp = match &self.spill_dir {
            Some(dir) => NamedTempFile::new_in(dir)?,
            None => NamedTempFile::new()?,
        };
        {
            let mut w = BufWriter::new(tmp.as_file());
            let mut entries: Vec<_> = self.users.drain().collect();
            entries.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            for (user, mask) in entries {
                write!(w, "{user}\t")?;
                for (i, word) in mask.iter().enumerate() {
                    if i > 0 {
                        w.write_all(b",")?;
                    }
                    write!(w, "{word:x}")?;
                }
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        self.runs.push(tmp);
        self.summary.spilled_runs += 1;
        Ok(())
    }

    fn counts_of(&self, mask: &[u64]) -> CategoryCounts {
        let mut counts = CategoryCounts::default();
        for (w, &word) in mask.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                counts.add(self.registry.category_at(w * 64 + b));
                bits &= bits - 1;
            }
        }
        counts
    }

    /// Emits every user in ascending user-id order.
    pub fn finish_with<F>(mut self, mut emit: F) -> Result<TallySummary>
    where
        F: FnMut(&str, CategoryCounts) -> Result<()>,
    {
        if self.runs.is_empty() {
            let mut entries: Vec<_> = self.users.iter().collect();
            entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
            for (user, mask) in entries {
                emit(user, self.counts_of(mask))?;
            }
            return Ok(self.summary);
        }
        self.spill()?;
        let mut readers: Vec<RunReader> = self
            .runs
            .iter()
            .map(|r| RunReader::open(r.path(), self.words))
            .collect::<Result<_>>()?;
        let mut heap = BinaryHeap::new();
        for (i, r) in readers.iter_mut().enumerate() {
            if let Some((user, mask)) = r.next_entry()? {
                heap.push(Reverse((user, i, mask)));
            }
        }
        let mut current: Option<(String, Vec<u64>)> = None;
        while let Some(Reverse((user, i, mask))) = heap.pop() {
            if let Some((u, _)) = &current {
                if *u != user {
                    let (u, m) = current.take().unwrap();
                    emit(&u, self.counts_of(&m))?;
                }
            }
            match &mut current {
                Some((_, m)) => or_into(m, &mask),
                None => current = Some((user, mask)),
            }
            if let Some((next_user, next_mask)) = readers[i].next_entry()? {
                heap.push(Reverse((next_user, i, next_mask)));
            }
        }
        if let Some((u, m)) = current {
            emit(&u, self.counts_of(&m))?;
        }
        Ok(self.summary)
    }

    pub fn finish(self) -> Result<TallyOutcome> {
        let mut counts = BTreeMap::new();
        let summary = self.finish_with(|u, c| {
            counts.insert(u.to_string(), c);
            Ok(())
        })?;
        Ok(TallyOutcome { counts, summary })
    }
}

fn or_into(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= *s;
    }
}

struct RunReader {
    lines: Lines<BufReader<File>>,
    words: usize,
}

impl RunReader {
    fn open(path: &Path, words: usize) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io_at(path, e))?;
        Ok(RunReader {
            lines: BufReader::new(file).lines(),
            words,
        })
    }

    fn next_entry(&mut self) -> Result<Option<(String, Vec<u64>)>> {
        let Some(line) = self.lines.next() else {
            return Ok(None);
        };
        let line = line?;
        let bad = || Error::Parse {
            line: 0,
            reason: format!("corrupt spill run entry `{line}`"),
        };
        let (user, hex) = line.split_once('\t').ok_or_else(bad)?;
        let mask: Vec<u64> = hex
            .split(',')
            .map(|h| u64::from_str_radix(h, 16))
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        if mask.len() != self.words {
            return Err(bad());
        }
        Ok(Some((user.to_string(), mask)))
    }
}

/// Tallies follower listings from any number of readers, spilling sorted
/// runs whenever more than `memory_budget_users` distinct users are held.
pub fn stream_tally<R: BufRead>(
    readers: impl IntoIterator<Item = R>,
    registry: &OutletRegistry,
    memory_budget_users: usize,
) -> Result<TallyOutcome> {
    let mut tally = FollowTally::new(registry, memory_budget_users);
    for r in readers {
        tally.push_reader(r)?;
    }
    tally.finish()
}

/// One worker per file, partial tallies unioned. In-memory only.
pub fn stream_tally_parallel(paths: &[PathBuf], registry: &OutletRegistry) -> Result<TallyOutcome> {
    let partials: Vec<FollowTally> = paths
        .par_iter()
        .map(|p| {
            let file = File::open(p).map_err(|e| Error::io_at(p, e))?;
            let mut t = FollowTally::in_memory(registry);
            t.push_reader(BufReader::new(file))?;
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let mut acc = FollowTally::in_memory(registry);
    for t in partials {
        acc.merge(t)?;
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::super::{BiasCategory, Group};
    use super::*;

    fn registry() -> OutletRegistry {
        use BiasCategory::*;
        OutletRegistry::from_pairs([("cnn", Left), ("msnbc", Left), ("ap", Center), ("fox", LeanRight)]).unwrap()
    }

    #[test]
    fn duplicates_collapse() {
        let input = "cnn\tu1\nmsnbc\tu1\ncnn\tu1\n";
        let out = stream_tally([input.as_bytes()], &registry(), 1000).unwrap();
        assert_eq!(out.counts.len(), 1);
        assert_eq!(out.counts["u1"].left(), 2);
        assert_eq!(out.counts["u1"].assign(), Group::Left);
        assert_eq!(out.summary.records, 3);
    }

    #[test]
    fn empty_input_gives_empty_map() {
        let out = stream_tally([&b""[..]], &registry(), 10).unwrap();
        assert!(out.counts.is_empty());
    }

    #[test]
    fn malformed_and_unknown_are_counted() {
        let input = "cnn\tu1\ngarbage\nnyt\tu2\na\tb\tc\n\tu3\n\n";
        let out = stream_tally([input.as_bytes()], &registry(), 10).unwrap();
        assert_eq!(out.summary.malformed, 3);
        assert_eq!(out.summary.unknown_account, 1);
        assert_eq!(out.counts.len(), 1);
    }

    #[test]
    fn spilling_matches_in_memory() {
        let mut input = String::new();
        for i in 0..500 {
            let acc = ["cnn", "msnbc", "ap", "fox"][i % 4];
            input.push_str(&format!("{acc}\tuser{}\n", (i * 7) % 97));
        }
        let mem = stream_tally([input.as_bytes()], &registry(), usize::MAX).unwrap();
        let ext = stream_tally([input.as_bytes()], &registry(), 5).unwrap();
        assert!(ext.summary.spilled_runs > 1);
        assert_eq!(mem.counts, ext.counts);
    }

    #[test]
    fn merge_is_order_independent() {
        let reg = registry();
        let a = "cnn\tu1\nfox\tu2\n";
        let b = "msnbc\tu1\nfox\tu3\n";
        let mut t1 = FollowTally::in_memory(&reg);
        t1.push_reader(a.as_bytes()).unwrap();
        let mut t2 = FollowTally::in_memory(&reg);
        t2.push_reader(b.as_bytes()).unwrap();
        t1.merge(t2).unwrap();
        let ab = t1.finish().unwrap();

        let mut t1 = FollowTally::in_memory(&reg);
        t1.push_reader(b.as_bytes()).unwrap();
        let mut t2 = FollowTally::in_memory(&reg);
        t2.push_reader(a.as_bytes()).unwrap();
        t1.merge(t2).unwrap();
        assert_eq!(ab, t1.finish().unwrap());
    }
}
