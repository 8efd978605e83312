//! File formats, DOT export and the command-line front end for
//! [`ils_core`].

pub mod cli;
pub mod dot;
pub mod format;

pub use format::{
    parse_constraints, parse_thread_blocks, parse_thread_file, serialize_threads, FormatError,
    ThreadBlock, ValidationError,
};
