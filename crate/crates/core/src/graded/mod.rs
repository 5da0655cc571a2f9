//! Graded polynomial rings, quotients, and finitely presented modules.

pub mod module;
pub mod poly;
pub mod ring;

pub use module::{
    column_coords, graded_piece, graded_piece_sparse, hilbert_function, kernel_gens_up_to, vector_to_column,
    FreePiece, GradedMatrix, ModulePiece, ModulePresentation, PresentedModule,
};
pub use poly::{Monomial, Poly, PolyRing, MAX_VARS};
pub use ring::{Ring, RingPiece};
