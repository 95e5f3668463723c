//! Error categories shared by the CLI (exit codes) and the HTTP API
//! (status codes).

use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Category {
    /// Missing or invalid configuration.
    Config,
    /// Input data that fails to parse or validate.
    Data,
    /// Filesystem or network failure.
    Io,
    /// Artifacts missing or inconsistent; run the build commands first.
    Index,
    /// Malformed query parameters.
    BadRequest,
    /// Unknown term.
    NotFound,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Config => "CONFIG",
            Category::Data => "DATA",
            Category::Io => "IO",
            Category::Index => "INDEX",
            Category::BadRequest => "BAD_REQUEST",
            Category::NotFound => "NOT_FOUND",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Category::Config => 2,
            Category::Data => 3,
            Category::Io => 4,
            Category::Index => 5,
            Category::BadRequest => 6,
            Category::NotFound => 7,
        }
    }

    pub fn http_status(self) -> u16 {
        match self {
            Category::BadRequest => 400,
            Category::NotFound => 404,
            _ => 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        CliError { category, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Category::Config, message)
    }

    pub fn data(message: impl fmt::Display) -> Self {
        Self::new(Category::Data, message.to_string())
    }

    pub fn io(message: impl fmt::Display) -> Self {
        Self::new(Category::Io, message.to_string())
    }

    pub fn index(message: impl fmt::Display) -> Self {
        Self::new(Category::Index, message.to_string())
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(Category::BadRequest, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(Category::NotFound, message)
    }

    /// Body returned by the HTTP API.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "category": self.category, "message": self.message } }).to_string()
    }
}

/// One line, `CATEGORY: message`, for the CLI's standard error.
impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let message = self.message.replace('\n', " ");
        write!(f, "{}: {message}", self.category.as_str())
    }
}

impl std::error::Error for CliError {}
