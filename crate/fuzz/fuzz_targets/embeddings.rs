#![no_main]

use libfuzzer_sys::fuzz_target;
use polyclust::featurizer::EmbeddingTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = EmbeddingTable::parse(data) {
        for word in ["the", "Haus", ""] {
            if let Some(v) = table.get(word) {
                assert_eq!(v.0.len(), table.dim());
            }
        }
    }
});
