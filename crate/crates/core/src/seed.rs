// Copyright 2026 The stablepath Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Deterministic seeded mixing used for "arbitrary but fixed" choices.

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seeded hash.
pub fn hash_words<I: IntoIterator<Item = u64>>(seed: u64, words: I) -> u64 {
    let mut h = mix64(seed);
    for w in words {
        h = mix64(h ^ w);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_sensitive() {
        assert_ne!(hash_words(1, [1, 2]), hash_words(1, [2, 1]));
        assert_ne!(hash_words(1, [1, 2]), hash_words(2, [1, 2]));
        assert_eq!(hash_words(7, [3, 4]), hash_words(7, [3, 4]));
    }
}
