//! Cooperative coverage path planning for multi-UAV structure inspection.

pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod mission;
pub mod model_io;
pub mod offset;
pub mod pipeline;
pub mod slicer;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
    #[doc = include_str!("../../../book/src/configuration.md")]
    struct Configuration;
    #[doc = include_str!("../../../book/src/slicing.md")]
    struct Slicing;
    #[doc = include_str!("../../../book/src/loops.md")]
    struct Loops;
    #[doc = include_str!("../../../book/src/offset.md")]
    struct Offset;
    #[doc = include_str!("../../../book/src/mission.md")]
    struct Mission;
    #[doc = include_str!("../../../book/src/trajectories.md")]
    struct Trajectories;
    #[doc = include_str!("../../../book/src/verification.md")]
    struct Verification;
    #[doc = include_str!("../../../book/src/fixtures.md")]
    struct Fixtures;
    #[doc = include_str!("../../../book/src/acceptance.md")]
    struct Acceptance;
}
