// mdbook can't run listings that depend on a local crate, so every chapter is
// pulled into this crate as module docs and `cargo test --doc` runs them.
// One module per chapter keeps failures traceable to their file.

#[doc = include_str!("src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("src/grids.md")]
pub mod grids {}
#[doc = include_str!("src/kernels.md")]
pub mod kernels {}
#[doc = include_str!("src/nystrom.md")]
pub mod nystrom {}
#[doc = include_str!("src/expansions.md")]
pub mod expansions {}
#[doc = include_str!("src/equicontinuity.md")]
pub mod equicontinuity {}
#[doc = include_str!("src/counterexamples.md")]
pub mod counterexamples {}
#[doc = include_str!("src/sampling.md")]
pub mod sampling {}
#[doc = include_str!("src/cli.md")]
pub mod cli {}
#[doc = include_str!("src/formats.md")]
pub mod formats {}
