#![no_main]

use libfuzzer_sys::fuzz_target;
use polyclust::featurizer::IdfTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = IdfTable::parse(data) {
        let text = table.to_text();
        assert_eq!(IdfTable::parse(text.as_bytes()).expect("written table parses"), table);
    }
});
