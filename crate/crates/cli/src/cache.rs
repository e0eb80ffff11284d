//! Persistent factorization cache: one JSON object per line, keyed by the
//! SHA-256 of the decimal value.

use definability::arith::{factor, FactorBudget, FactorSource, Factorization};
use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

pub const CACHE_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Values with more decimal digits are stored by hash only.
pub const INLINE_DIGITS: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub factors: Vec<(String, u32)>,
    pub cofactor: String,
    pub complete: bool,
    pub smooth_bound: u64,
    pub version: String,
    pub budget: FactorBudget,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheLine {
    entry: CacheEntry,
    checksum: String,
}

pub fn hash_key(n: &BigUint) -> String {
    hex::encode(Sha256::digest(n.to_str_radix(10).as_bytes()))
}

fn checksum(entry: &CacheEntry) -> String {
    let text = serde_json::to_string(entry).expect("cache entries serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl CacheEntry {
    pub fn new(f: &Factorization, budget: &FactorBudget) -> Self {
        let digits = f.value.to_str_radix(10);
        CacheEntry {
            key: hash_key(&f.value),
            value: (digits.len() <= INLINE_DIGITS).then_some(digits),
            factors: f.factors.iter().map(|(p, e)| (p.to_str_radix(10), *e)).collect(),
            cofactor: f.cofactor.to_str_radix(10),
            complete: f.complete,
            smooth_bound: f.smooth_bound,
            version: CACHE_VERSION.to_string(),
            budget: budget.clone(),
        }
    }

    /// Rebuilds the factorization, checking that the product hashes to the
    /// key and matches the stored value.
    pub fn restore(&self) -> Result<Factorization, String> {
        let num = |s: &str| s.parse::<BigUint>().map_err(|_| format!("bad integer {s:?}"));
        let mut factors = vec![];
        let mut product = num(&self.cofactor)?;
        for (p, e) in &self.factors {
            let p = num(p)?;
            product *= p.pow(*e);
            factors.push((p, *e));
        }
        if hash_key(&product) != self.key {
            return Err("product does not match the key".into());
        }
        if let Some(v) = &self.value {
            if num(v)? != product {
                return Err("product does not match the stored value".into());
            }
        }
        let f = Factorization {
            value: product,
            factors,
            cofactor: num(&self.cofactor)?,
            complete: self.complete,
            smooth_bound: self.smooth_bound,
        };
        f.check_invariants()?;
        Ok(f)
    }

    pub fn to_line(&self) -> String {
        let line = CacheLine { entry: self.clone(), checksum: checksum(self) };
        serde_json::to_string(&line).expect("cache lines serialize")
    }
}

/// Parses and verifies one line.
pub fn parse_line(line: &str) -> Result<(CacheEntry, Factorization), String> {
    let parsed: CacheLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if checksum(&parsed.entry) != parsed.checksum {
        return Err("checksum mismatch".into());
    }
    let f = parsed.entry.restore()?;
    Ok((parsed.entry, f))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub path: String,
    pub lines: u64,
    pub keys: u64,
    pub complete: u64,
    pub incomplete: u64,
    /// Values stored by hash only.
    pub hashed_only: u64,
    pub corrupt: u64,
    /// Incomplete entries computed under a different budget.
    pub stale: u64,
    /// Later lines for a key that already has a complete entry.
    pub superseded: u64,
    pub bytes: u64,
}

struct Scan {
    best: BTreeMap<String, (CacheEntry, Factorization)>,
    stats: CacheStats,
}

fn read_locked(path: &Path) -> io::Result<String> {
    let mut file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(String::new()),
        Err(e) => return Err(e),
    };
    file.lock_shared()?;
    let mut text = String::new();
    let res = file.read_to_string(&mut text);
    file.unlock()?;
    res.map(|_| text)
}

/// Keeps the first complete entry per key; otherwise the last incomplete
/// one computed under `budget`.
fn scan(path: &Path, text: &str, budget: &FactorBudget) -> Scan {
    let mut stats = CacheStats { path: path.display().to_string(), bytes: text.len() as u64, ..Default::default() };
    let mut best: BTreeMap<String, (CacheEntry, Factorization)> = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        stats.lines += 1;
        let Ok((entry, f)) = parse_line(line) else {
            stats.corrupt += 1;
            continue;
        };
        if entry.value.is_none() {
            stats.hashed_only += 1;
        }
        if let Some((old, _)) = best.get(&entry.key) {
            if old.complete {
                stats.superseded += 1;
                continue;
            }
        }
        if !entry.complete && &entry.budget != budget {
            stats.stale += 1;
            continue;
        }
        best.insert(entry.key.clone(), (entry, f));
    }
    stats.keys = best.len() as u64;
    stats.complete = best.values().filter(|(e, _)| e.complete).count() as u64;
    stats.incomplete = stats.keys - stats.complete;
    Scan { best, stats }
}

pub fn stats(path: &Path, budget: &FactorBudget) -> io::Result<CacheStats> {
    Ok(scan(path, &read_locked(path)?, budget).stats)
}

/// Rewrites the file with one verified entry per key, dropping corrupt,
/// stale and superseded lines. Returns the statistics before and after.
pub fn gc(path: &Path, budget: &FactorBudget) -> io::Result<(CacheStats, CacheStats)> {
    let mut file = match OpenOptions::new().read(true).write(true).open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            let empty = scan(path, "", budget).stats;
            return Ok((empty.clone(), empty));
        }
        Err(e) => return Err(e),
    };
    file.lock()?;
    let mut text = String::new();
    file.read_to_string(&mut text)?;
    let before = scan(path, &text, budget);
    let mut out = String::new();
    for (entry, _) in before.best.values() {
        out.push_str(&entry.to_line());
        out.push('\n');
    }
    let tmp = path.with_extension("jsonl.tmp");
    std::fs::write(&tmp, &out)?;
    std::fs::rename(&tmp, path)?;
    file.unlock()?;
    let after = scan(path, &out, budget).stats;
    Ok((before.stats, after))
}

/// A [`FactorSource`] backed by the cache file. Misses are factored with the
/// configured budget and appended under an exclusive advisory lock.
pub struct DiskCache {
    path: PathBuf,
    budget: FactorBudget,
    memo: Mutex<HashMap<String, Factorization>>,
    complete_on_disk: Mutex<HashMap<String, bool>>,
    corrupt: u64,
    write_failed: Mutex<bool>,
}

impl DiskCache {
    pub fn open(path: &Path, budget: FactorBudget) -> io::Result<Self> {
        let s = scan(path, &read_locked(path)?, &budget);
        let complete_on_disk = s.best.iter().map(|(k, (e, _))| (k.clone(), e.complete)).collect();
        let memo = s.best.into_iter().map(|(k, (_, f))| (k, f)).collect();
        Ok(DiskCache {
            path: path.to_path_buf(),
            budget,
            memo: Mutex::new(memo),
            complete_on_disk: Mutex::new(complete_on_disk),
            corrupt: s.stats.corrupt,
            write_failed: Mutex::new(false),
        })
    }

    /// Lines that failed verification when the cache was opened.
    pub fn corrupt_lines(&self) -> u64 {
        self.corrupt
    }

    fn append(&self, entry: &CacheEntry) -> io::Result<()> {
        let mut file = OpenOptions::new().create(true).append(true).open(&self.path)?;
        file.lock()?;
        let mut line = entry.to_line();
        line.push('\n');
        let res = file.write_all(line.as_bytes()).and_then(|_| file.flush());
        file.unlock()?;
        res
    }
}

impl FactorSource for DiskCache {
    fn factor(&self, n: &BigUint) -> Factorization {
        if n.is_one() {
            return factor(n, &self.budget);
        }
        let key = hash_key(n);
        if let Some(f) = self.memo.lock().unwrap().get(&key) {
            return f.clone();
        }
        let f = factor(n, &self.budget);
        let on_disk = self.complete_on_disk.lock().unwrap().get(&key).copied();
        if on_disk != Some(true) {
            if let Err(e) = self.append(&CacheEntry::new(&f, &self.budget)) {
                let mut failed = self.write_failed.lock().unwrap();
                if !*failed {
                    eprintln!("warning: cannot write cache {}: {e}", self.path.display());
                    *failed = true;
                }
            }
            self.complete_on_disk.lock().unwrap().insert(key.clone(), f.complete);
        }
        self.memo.lock().unwrap().insert(key, f.clone());
        f
    }

    fn budget(&self) -> &FactorBudget {
        &self.budget
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_path(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("deflab-cache-{}-{name}", std::process::id()));
        let _ = std::fs::remove_file(&dir);
        dir
    }

    #[test]
    fn entries_round_trip_and_detect_tampering() {
        let b = FactorBudget::default();
        let f = factor(&BigUint::from(2u32 * 2 * 3 * 1_000_003), &b);
        let e = CacheEntry::new(&f, &b);
        let line = e.to_line();
        assert_eq!(parse_line(&line).unwrap().1, f);
        let tampered = line.replace("1000003", "1000033");
        assert!(parse_line(&tampered).is_err());
        let mut forged = e.clone();
        forged.cofactor = "5".into();
        let forged_line = serde_json::to_string(&CacheLine { checksum: checksum(&forged), entry: forged }).unwrap();
        assert_eq!(parse_line(&forged_line).unwrap_err(), "product does not match the key");
    }

    #[test]
    fn large_values_are_stored_by_hash() {
        let b = FactorBudget::default();
        let n = BigUint::from(10u32).pow(300) + BigUint::one();
        let f = factor(&n, &b);
        let e = CacheEntry::new(&f, &b);
        assert!(e.value.is_none());
        assert_eq!(parse_line(&e.to_line()).unwrap().1.value, n);
    }

    #[test]
    fn misses_are_appended_once_and_gc_deduplicates() {
        let path = temp_path("append");
        let b = FactorBudget::default();
        let n = BigUint::from(600_851_475_143u64);
        let c = DiskCache::open(&path, b.clone()).unwrap();
        let f = c.factor(&n);
        c.factor(&n);
        assert_eq!(stats(&path, &b).unwrap().lines, 1);
        let warm = DiskCache::open(&path, b.clone()).unwrap();
        assert_eq!(warm.factor(&n), f);
        assert_eq!(stats(&path, &b).unwrap().lines, 1);
        let line = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, format!("{line}{line}not json\n")).unwrap();
        let s = stats(&path, &b).unwrap();
        assert_eq!((s.lines, s.keys, s.corrupt, s.superseded), (3, 1, 1, 1));
        let (_, after) = gc(&path, &b).unwrap();
        assert_eq!((after.lines, after.keys, after.corrupt), (1, 1, 0));
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn incomplete_entries_from_another_budget_are_ignored() {
        let path = temp_path("stale");
        let weak = FactorBudget { trial_bound: 100, rho_iterations: 1, rho_attempts: 1, seed: 1 };
        let n = BigUint::from(1_000_003u64) * BigUint::from(1_000_033u64);
        let f = DiskCache::open(&path, weak.clone()).unwrap().factor(&n);
        assert!(!f.complete);
        let strong = FactorBudget::default();
        assert_eq!(stats(&path, &strong).unwrap().stale, 1);
        assert!(DiskCache::open(&path, strong).unwrap().factor(&n).complete);
        std::fs::remove_file(&path).unwrap();
    }
}
