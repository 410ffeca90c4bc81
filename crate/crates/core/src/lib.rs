//! Agent-to-agent messaging with agent cards, a task lifecycle, schema-described
//! tools and a graph workflow engine, plus a stock-information orchestrator
//! built on top of them.

pub mod agent;
pub mod canonical;
pub mod card;
pub mod error_code;
pub mod mcp;
pub mod message;
pub mod orchestrator;
pub mod registry;
pub mod runtime;
pub mod task;
pub mod transport;
pub mod workflow;

pub use card::{parse_agent_card, AgentCard, Capability};
pub use error_code::ErrorCode;
pub use message::{make_message, message_from_wire, message_to_wire, validate_message, A2AMessage, MessageStatus};
pub use registry::Registry;
pub use runtime::{Runtime, RuntimeConfig, RuntimeError};
pub use task::{RetryPolicy, Task, TaskError, TaskState, TaskStore};
pub use transport::{Agent, AgentDirectory, InProcessTransport, Transport, TransportError};
