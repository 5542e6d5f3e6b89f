#![no_main]

use libfuzzer_sys::fuzz_target;
use polyclust::io::{parse_document, serialize_document};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = polyclust::io::stream::parse_timestamp(text);
    if let Ok(doc) = parse_document(text, 1) {
        let again = parse_document(&serialize_document(&doc), 1).expect("serialized record parses");
        assert_eq!(doc, again);
    }
    // whole-stream reader: line splitting, slack and duplicate checks
    let _ = polyclust::io::read_stream(data, Some(72.0));
});
