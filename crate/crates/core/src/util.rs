//! Small internal utilities.

use std::collections::HashMap;
use std::hash::Hash;

/// Minimal size-bounded LRU map. Eviction is O(n) over the entry table,
/// which is fine at the cache sizes this engine uses.
#[derive(Debug)]
pub(crate) struct LruCache<K, V> {
    budget: usize,
    tick: u64,
    entries: HashMap<K, (u64, V)>,
}

impl<K: Eq + Hash + Clone, V> LruCache<K, V> {
    pub fn new(budget: usize) -> Self {
        Self { budget, tick: 0, entries: HashMap::new() }
    }

    pub fn get(&mut self, key: &K) -> Option<&V> {
        self.tick += 1;
        let tick = self.tick;
        self.entries.get_mut(key).map(|(t, v)| {
            *t = tick;
            &*v
        })
    }

    pub fn insert(&mut self, key: K, value: V) {
        self.tick += 1;
        self.entries.insert(key, (self.tick, value));
        while self.entries.len() > self.budget {
            let oldest = self
                .entries
                .iter()
                .min_by_key(|(_, (t, _))| *t)
                .map(|(k, _)| k.clone())
                .expect("non-empty map has a minimum");
            self.entries.remove(&oldest);
        }
    }

    pub fn remove(&mut self, key: &K) -> Option<V> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Stable 64-bit mix for deriving per-item RNG seeds from labeled parts.
pub(crate) fn mix_seed(parts: &[&[u8]]) -> u64 {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 yields at least 8 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lru_evicts_least_recent() {
        let mut lru = LruCache::new(2);
        lru.insert(1, "a");
        lru.insert(2, "b");
        assert!(lru.get(&1).is_some()); // 1 is now most recent
        lru.insert(3, "c"); // evicts 2
        assert!(lru.get(&2).is_none());
        assert!(lru.get(&1).is_some());
        assert!(lru.get(&3).is_some());
        assert_eq!(lru.len(), 2);
    }

    #[test]
    fn mix_seed_is_stable_and_label_sensitive() {
        let a = mix_seed(&[b"alpha", b"beta"]);
        let b = mix_seed(&[b"alpha", b"beta"]);
        assert_eq!(a, b);
        assert_ne!(a, mix_seed(&[b"alphab", b"eta"]));
    }
}
