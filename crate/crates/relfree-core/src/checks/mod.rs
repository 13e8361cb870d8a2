//! Registry of named verification checks.
