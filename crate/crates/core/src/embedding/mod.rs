//! Skip-gram embeddings with a hierarchical-softmax output layer, trained
//! either from random vectors or from the model of the preceding time bin.

mod format;
pub mod hs;
mod huffman;
mod model;
mod params;
mod train;

pub use format::{load_model, read_model, save_model, save_text, write_model, FORMAT_VERSION, MAGIC};
pub use hs::kernel_name;
pub use huffman::{build_huffman, HuffmanTree};
pub use model::{cosine_distance, init_from, init_random, EmbeddingModel};
pub use params::TrainParams;
pub use train::{train, train_with_stats, TrainStats};
