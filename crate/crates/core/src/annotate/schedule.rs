use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::passage::Passage;
use crate::corpus::Side;
use crate::error::{Error, Result};
use crate::fsio::atomic_write;

pub const PASSAGES_PER_SIDE: usize = 20;
pub const LR_PAIRS: usize = 20;
pub const SAME_SIDE_PAIRS: usize = 10;
/// Every passage appears in exactly this many pairs.
pub const USES_PER_PASSAGE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PairKind {
    LR,
    LL,
    RR,
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairKind::LR => "LR",
            PairKind::LL => "LL",
            PairKind::RR => "RR",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub pair_id: String,
    pub target: String,
    pub passage_a: Passage,
    pub passage_b: Passage,
    pub kind: PairKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetPassages {
    pub target: String,
    pub left: Vec<Passage>,
    pub right: Vec<Passage>,
}

/// Pairs in presentation order. Pair ids are positional and carry no kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub seed: u64,
    pub targets: Vec<String>,
    pub pairs: Vec<Pair>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    pub lr: usize,
    pub ll: usize,
    pub rr: usize,
}

impl Schedule {
    pub fn composition(&self) -> BTreeMap<String, Composition> {
        let mut out: BTreeMap<String, Composition> = BTreeMap::new();
        for p in &self.pairs {
            let c = out.entry(p.target.clone()).or_default();
            match p.kind {
                PairKind::LR => c.lr += 1,
                PairKind::LL => c.ll += 1,
                PairKind::RR => c.rr += 1,
            }
        }
        out
    }

    pub fn total_composition(&self) -> Composition {
        self.composition().values().fold(Composition::default(), |a, c| Composition {
            lr: a.lr + c.lr,
            ll: a.ll + c.ll,
            rr: a.rr + c.rr,
        })
    }

    pub fn pair(&self, pair_id: &str) -> Option<&Pair> {
        self.pairs.iter().find(|p| p.pair_id == pair_id)
    }

    /// Composition, kind/side consistency, unique ids and the passage usage
    /// allotment.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Annotation(m));
        let comp = self.composition();
        for t in &self.targets {
            let c = comp.get(t).copied().unwrap_or_default();
            if c != (Composition { lr: LR_PAIRS, ll: SAME_SIDE_PAIRS, rr: SAME_SIDE_PAIRS }) {
                return bad(format!(
                    "target `{t}` has {} LR / {} LL / {} RR pairs, expected {LR_PAIRS}/{SAME_SIDE_PAIRS}/{SAME_SIDE_PAIRS}",
                    c.lr, c.ll, c.rr
                ));
            }
        }
        if comp.len() != self.targets.len() {
            return bad("schedule contains pairs for an undeclared target".into());
        }
        let mut ids = HashMap::new();
        let mut uses: HashMap<(&str, &str), usize> = HashMap::new();
        for p in &self.pairs {
            if ids.insert(p.pair_id.as_str(), ()).is_some() {
                return bad(format!("duplicate pair id `{}`", p.pair_id));
            }
            let sides = (p.passage_a.side, p.passage_b.side);
            let ok = match p.kind {
                PairKind::LR => sides.0 != sides.1,
                PairKind::LL => sides == (Side::Left, Side::Left),
                PairKind::RR => sides == (Side::Right, Side::Right),
            };
            if !ok || p.passage_a.tweet_id == p.passage_b.tweet_id {
                return bad(format!("pair `{}` is inconsistent with kind {}", p.pair_id, p.kind));
            }
            for q in [&p.passage_a, &p.passage_b] {
                if q.target != p.target {
                    return bad(format!("pair `{}` mixes targets", p.pair_id));
                }
                *uses.entry((p.target.as_str(), q.tweet_id.as_str())).or_default() += 1;
            }
        }
        if let Some(((t, id), n)) = uses.iter().find(|(_, &n)| n != USES_PER_PASSAGE) {
            return bad(format!("passage {id} of `{t}` used {n} times, expected {USES_PER_PASSAGE}"));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        atomic_write(path, &bytes)
    }

    pub fn load(path: &Path) -> Result<Schedule> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        let s: Schedule = serde_json::from_str(&text)?;
        s.validate()?;
        Ok(s)
    }
}

fn check_pool(tp: &TargetPassages) -> Result<()> {
    for (side, pool) in [(Side::Left, &tp.left), (Side::Right, &tp.right)] {
        if pool.len() < PASSAGES_PER_SIDE {
            return Err(Error::Insufficient(format!(
                "target `{}` has {} {side} passages, {PASSAGES_PER_SIDE} needed (short by {})",
                tp.target,
                pool.len(),
                PASSAGES_PER_SIDE - pool.len()
            )));
        }
        if pool.len() > PASSAGES_PER_SIDE {
            return Err(Error::InvalidArgument(format!(
                "target `{}` has {} {side} passages, exactly {PASSAGES_PER_SIDE} expected",
                tp.target,
                pool.len()
            )));
        }
        let mut seen = HashMap::new();
        for p in pool.iter() {
            if p.side != side || p.target != tp.target {
                return Err(Error::InvalidArgument(format!(
                    "passage {} is filed under the wrong target or side",
                    p.tweet_id
                )));
            }
            if seen.insert(p.tweet_id.as_str(), ()).is_some() {
                return Err(Error::InvalidArgument(format!("passage {} listed twice", p.tweet_id)));
            }
        }
    }
    Ok(())
}

/// Each passage enters one cross-side and one same-side pair. LR pairs get
/// a random A/B orientation so position never reveals side.
pub fn build_session(inputs: &[TargetPassages], seed: u64) -> Result<Schedule> {
    if inputs.is_empty() {
        return Err(Error::Empty("targets"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(String, Passage, Passage, PairKind)> = Vec::new();
    let mut targets = Vec::new();
    for tp in inputs {
        check_pool(tp)?;
        if targets.contains(&tp.target) {
            return Err(Error::InvalidArgument(format!("target `{}` listed twice", tp.target)));
        }
        targets.push(tp.target.clone());
        let mut l: Vec<&Passage> = tp.left.iter().collect();
        let mut r: Vec<&Passage> = tp.right.iter().collect();
        l.shuffle(&mut rng);
        r.shuffle(&mut rng);
        for (a, b) in l.iter().zip(&r) {
            let (a, b) = if rng.random_bool(0.5) { (*a, *b) } else { (*b, *a) };
            pairs.push((tp.target.clone(), a.clone(), b.clone(), PairKind::LR));
        }
        for (pool, kind) in [(&mut l, PairKind::LL), (&mut r, PairKind::RR)] {
            pool.shuffle(&mut rng);
            for c in pool.chunks_exact(2) {
                pairs.push((tp.target.clone(), c[0].clone(), c[1].clone(), kind));
            }
        }
    }
    pairs.shuffle(&mut rng);
    let width = pairs.len().to_string().len().max(3);
    let pairs = pairs
        .into_iter()
        .enumerate()
        .map(|(i, (target, passage_a, passage_b, kind))| Pair {
            pair_id: format!("p{:0width$}", i + 1),
            target,
            passage_a,
            passage_b,
            kind,
        })
        .collect();
    let s = Schedule { seed, targets, pairs };
    s.validate()?;
    Ok(s)
}
