//! Dataset ingestion: QuickDraw records, canonical sketches, splits.

mod ingest;
mod quickdraw;
mod split;
pub mod synth;

pub use ingest::{ingest, ClassMap, IngestError};
pub use quickdraw::{parse_drawing_file, parse_drawing_line, LineError, ParsedFile, RawDrawing};
pub use split::{parse_manifest, split_dataset, DatasetSplit, SplitError};
