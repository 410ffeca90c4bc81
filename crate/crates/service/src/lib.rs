//! HTTP/JSON service exposing an agentmesh runtime, and a blocking client for it.

mod client;
mod config;
mod openapi;
mod server;

pub use client::HttpClient;
pub use config::{ConfigError, ServiceConfig};
pub use openapi::openapi_document;
pub use server::{error_response, router, serve, spawn, AppState, ServeError, ServerHandle, TRACE_HEADER};
