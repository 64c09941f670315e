//! The guide's chapters, compiled here so every listing runs as a doctest.

#[doc = include_str!("../../../book/src/getting_started.md")]
pub mod getting_started {}

#[doc = include_str!("../../../book/src/model.md")]
pub mod model {}

#[doc = include_str!("../../../book/src/expected_return.md")]
pub mod expected_return {}

#[doc = include_str!("../../../book/src/information_ratio.md")]
pub mod information_ratio {}

#[doc = include_str!("../../../book/src/monte_carlo.md")]
pub mod monte_carlo {}

#[doc = include_str!("../../../book/src/estimation.md")]
pub mod estimation {}

#[doc = include_str!("../../../book/src/command_line.md")]
pub mod command_line {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
