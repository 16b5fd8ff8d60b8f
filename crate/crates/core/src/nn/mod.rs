//! Dense networks in double precision: forward/backward, Adam, target-network
//! blending and a text checkpoint format.

mod adam;
pub mod io;
mod mlp;

pub use adam::{adam_step, AdamState};
pub use mlp::{
    layer_chain, sigmoid, soft_update, Activation, Dense, ForwardCache, Gradients, InitScheme, LayerSpec, MlpParams,
};
