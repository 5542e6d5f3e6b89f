#![no_main]

use libfuzzer_sys::fuzz_target;
use polyclust::learning::{parse_ranking_dump, write_ranking_dump};

fuzz_target!(|data: &[u8]| {
    if let Ok(examples) = parse_ranking_dump(data) {
        let mut buf = Vec::new();
        write_ranking_dump(&examples, &mut buf).unwrap();
        let _ = parse_ranking_dump(&buf[..]).expect("written dump parses");
    }
});
