//! Class-conditional synthetic captures: per-frame geometry files with the
//! default split sizes, and label-mask corpora for the localiser.

mod generate;
mod masks;
mod profile;

pub use generate::{
    generate_dataset, generate_sequence, generate_split, sequence_rng, sequence_slots, ClassCounts,
    GeneratedFiles, GeneratorConfig, Geometry, SequenceSlot, SplitCounts,
};
pub use masks::{generate_mask_corpus, render_frame, MaskCorpus};
pub use profile::{default_profiles, resolve_profiles, ClassProfile, Preset};
