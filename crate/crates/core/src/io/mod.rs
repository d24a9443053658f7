//! Data ingestion and synthetic instances.

mod fimi;
mod generate;

pub use fimi::{
    build_lift_matrix, lift_pair, lift_similarity, parse_fimi, read_fimi_file, stream_lift_summary, write_fimi,
    TransactionDB, LIFT_DENSE_CEILING,
};
pub use generate::{
    gen_heavy_product, gen_sparse_product, gen_uniform_nonneg, gen_zipf_product, zipf_weights, PlantedInstance,
    WeightKind,
};
