//! Layout-anchored two-stage document parsing.
//!
//! Stage 1 asks a vision-language model to classify a page as digital or
//! photographed and, for digital pages, to emit reading-ordered layout
//! anchors ([`layout`]). Stage 2 either parses the whole page in one call
//! or crops every anchor and parses the crops in parallel with a prompt
//! chosen by element type ([`pipeline`]). Results are assembled into
//! Markdown ([`assemble`]) and scored with [`metrics`]. [`datagen`] builds
//! synthetic pages with matching mock-backend fixtures.

pub mod assemble;
pub mod backend;
pub mod datagen;
pub mod layout;
pub mod metrics;
pub mod pipeline;

pub use assemble::{assemble, AssembleOptions};
pub use backend::{FixtureTable, MockBackend, ModelBackend, RemoteBackend, RemoteConfig};
pub use layout::{BBox, DocumentType, LayoutElement, SemanticLabel, StageOneResult};
pub use pipeline::{parse_document, DocumentOutput, PageImage, PipelineConfig, PromptTable};
