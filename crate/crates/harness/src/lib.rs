//! Match harness for chat-completion models playing normal-form games.
//!
//! * [`prompt`]: templates, rendering, reply parsing
//! * [`endpoint`]: HTTP client, rate limiting, scripted mocks
//! * [`play`]: one match under a reasoning mechanism
//! * [`campaign`]: many matches with bounded parallelism

pub mod campaign;
pub mod endpoint;
pub mod error;
pub mod play;
pub mod prompt;

pub use campaign::{run_campaign, CampaignManifest, CampaignReport, CampaignResult, HarnessConfig, MatchSpec, MatchStatus};
pub use endpoint::{ChatEndpoint, EndpointConfig, EndpointRegistry, HttpEndpoint, MockEndpoint, MockFixture};
pub use error::{HarnessError, Result};
pub use play::{run_match, MechanismConfig};
pub use prompt::{parse_action, render_prompt, PromptBundle, PromptContext};
