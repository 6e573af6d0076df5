//! PARENT and BLEU.

mod bleu;
mod lcs;
mod parent;

pub use bleu::{corpus_bleu, SMOOTHING_EPSILON};
pub use lcs::lcs_length;
pub use parent::{
    combine_recall, corpus_parent, entailed_precision, entailed_precision_with,
    entailed_recall_reference, entailed_recall_reference_with, f_measure, parent, parent_f,
    table_coverage, table_lexicon, CorpusReport, Lexicon, ParentScore, DEFAULT_MAX_ORDER,
};
pub(crate) use parent::mean_score;
