//! Workbench for spatially constrained single-head self-attention.
//!
//! Embedding units live on a square 2D grid. Attention can pool queries over
//! local receptive fields (spatial querying) and/or restrict the output
//! reweighting matrix to local connectivity (spatial reweighting). The crate
//! trains a 1-layer encoder classifier with these motifs and runs a
//! topographic probing pipeline over captured sublayer activations:
//! selectivity maps, PCA, distance-decay statistics with permutation nulls,
//! PC-space decoding, PLS-SVD alignment, and ridge encoding.

pub mod analysis;
pub mod attention;
pub mod autodiff;
pub mod cli;
pub mod grid;
pub mod io;
pub mod trainer;
pub mod viz;
