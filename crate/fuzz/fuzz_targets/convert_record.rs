#![no_main]

use libfuzzer_sys::fuzz_target;
use polyclust::io::convert::{convert_record, FieldMap};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(doc) = convert_record(text, 1, &FieldMap::default()) {
        doc.validate().expect("converted documents are valid");
    }
});
