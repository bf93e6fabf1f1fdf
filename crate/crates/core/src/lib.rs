//! Induction of cognitive programs from paired grid scenes.
//!
//! The crate models a visuomotor agent as a small instruction-set machine
//! ([`emulator`]) operating on symbolic object scenes ([`world`]). Given a
//! concept — a handful of input/output scene pairs demonstrating one
//! transformation — the [`search`] module recovers a program that maps every
//! input to its output, ordering candidates by description length under a
//! learned instruction-transition model ([`model`]) and recursing on
//! sub-goals as objects fall into place. The [`corpus`] module generates
//! seeded concept instances from parameterized templates.

pub mod corpus;
pub mod emulator;
pub mod search;
pub mod model;
pub mod world;
