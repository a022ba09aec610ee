//! The guide's chapters, compiled as module docs so that `cargo test`
//! runs every Rust snippet in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/orbifolds.md")]
pub mod orbifolds {}
#[doc = include_str!("../../../book/src/pieces.md")]
pub mod pieces {}
#[doc = include_str!("../../../book/src/structures.md")]
pub mod structures {}
#[doc = include_str!("../../../book/src/reduction.md")]
pub mod reduction {}
#[doc = include_str!("../../../book/src/signatures.md")]
pub mod signatures {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
