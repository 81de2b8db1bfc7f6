//! Loaders for all external data, plus annotation quality statistics.

pub mod embeddings;
pub mod quality;
pub mod records;

pub use embeddings::{load_embeddings_binary, load_embeddings_text, EmbeddingMeta, EmbeddingTable, Tokenization};
pub use quality::{annotator_agreement, sentiment_correlation, AgreementReport};
pub use records::{
    load_annotations, load_dictionary, load_face_detections, load_image_tags, load_lexicon, load_lexicons,
    AnnotationSet, Dictionary, FaceBox, FaceDetectionRecord, ImageTagRecord, IngestOptions, IngestReport, Loaded,
    RowRejection,
};
