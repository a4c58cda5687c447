//! Small crate-internal helpers.

/// 64-bit finalizer with full avalanche; the building block for the
/// counter-based decision source and for small hash tables.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Open-addressing map from `u64` keys to small copyable values, sized
/// for batch-local directories that stay cache-resident. Lookups are
/// read-only and the layout depends only on the (sorted) input order, so
/// concurrent queries are deterministic.
pub(crate) struct SmallKeyTable<V> {
    mask: usize,
    keys: Vec<u64>,
    values: Vec<V>,
    /// Value for the key equal to the vacant-slot sentinel, held aside.
    max_key_value: Option<V>,
}

const VACANT: u64 = u64::MAX;

impl<V: Copy> SmallKeyTable<V> {
    pub(crate) fn build(pairs: &[(u64, V)]) -> SmallKeyTable<V> {
        let cap = (pairs.len().max(2) * 2).next_power_of_two();
        let mask = cap - 1;
        let dummy = pairs.first().map(|p| p.1);
        let mut table = SmallKeyTable {
            mask,
            keys: vec![VACANT; cap],
            values: match dummy {
                Some(d) => vec![d; cap],
                None => Vec::new(),
            },
            max_key_value: None,
        };
        for &(key, value) in pairs {
            if key == VACANT {
                table.max_key_value = Some(value);
                continue;
            }
            let mut slot = (mix64(key) as usize) & mask;
            while table.keys[slot] != VACANT {
                debug_assert_ne!(table.keys[slot], key, "duplicate key");
                slot = (slot + 1) & mask;
            }
            table.keys[slot] = key;
            table.values[slot] = value;
        }
        table
    }

    #[inline]
    pub(crate) fn get(&self, key: u64) -> Option<V> {
        if key == VACANT {
            return self.max_key_value;
        }
        let mut slot = (mix64(key) as usize) & self.mask;
        loop {
            let k = self.keys[slot];
            if k == key {
                return Some(self.values[slot]);
            }
            if k == VACANT {
                return None;
            }
            slot = (slot + 1) & self.mask;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trips_including_sentinel_key() {
        let pairs: Vec<(u64, u32)> =
            (0..500u64).map(|i| (i * 7 + 1, i as u32)).chain([(u64::MAX, 999)]).collect();
        let table = SmallKeyTable::build(&pairs);
        for &(k, v) in &pairs {
            assert_eq!(table.get(k), Some(v));
        }
        assert_eq!(table.get(2), None);
        assert_eq!(table.get(u64::MAX - 1), None);
        let empty = SmallKeyTable::<u32>::build(&[]);
        assert_eq!(empty.get(5), None);
        assert_eq!(empty.get(u64::MAX), None);
    }
}
