#![no_main]

use libfuzzer_sys::fuzz_target;
use polyclust::io::models::{parse_merge, parse_ranker, to_json, MERGE_KIND, RANKER_KIND};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = parse_ranker(text) {
        let again = parse_ranker(&to_json(RANKER_KIND, &r.payload, r.fingerprint.as_deref()));
        assert_eq!(again.expect("written ranker parses").payload, r.payload);
    }
    if let Ok(m) = parse_merge(text) {
        let again = parse_merge(&to_json(MERGE_KIND, &m.payload, m.fingerprint.as_deref()));
        assert!(again.is_ok());
    }
});
