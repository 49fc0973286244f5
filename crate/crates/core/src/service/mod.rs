//! Command line and HTTP front ends.

pub mod cli;
pub mod http;

use crate::model::{deserialize, ModelError, ProcessModel};

/// Reads a model from either a JSON document or the compact notation.
pub fn parse_model(text: &str) -> Result<ProcessModel, ModelError> {
    if text.trim_start().starts_with('{') {
        deserialize(text)
    } else {
        text.trim().parse()
    }
}
