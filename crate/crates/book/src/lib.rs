//! Guide chapters compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/geometry.md")]
pub mod geometry {}

#[doc = include_str!("../../../book/src/depth.md")]
pub mod depth {}

#[doc = include_str!("../../../book/src/seams.md")]
pub mod seams {}

#[doc = include_str!("../../../book/src/blending.md")]
pub mod blending {}

#[doc = include_str!("../../../book/src/pipeline.md")]
pub mod pipeline {}

#[doc = include_str!("../../../book/src/measuring.md")]
pub mod measuring {}

#[doc = include_str!("../../../book/src/formats.md")]
pub mod formats {}

#[doc = include_str!("../../../book/src/synthetic.md")]
pub mod synthetic {}
