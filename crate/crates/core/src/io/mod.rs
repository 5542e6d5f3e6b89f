//! File formats: the document stream, model files, output records and the
//! dataset converter.

pub mod convert;
pub mod models;
pub mod snapshot;
pub mod stream;

pub use stream::{parse_document, read_stream, serialize_document, write_stream, StreamReader, DEFAULT_SLACK_HOURS};
