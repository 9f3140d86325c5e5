//! Deterministic simulation, level format, replay and study analytics for a
//! five-level platformer about cognitive distortions.

pub mod analytics;
pub mod geom;
pub mod level;
pub mod mechanics;
pub mod replay;
pub mod runtime;
pub mod shipped;
pub mod sim;

pub use geom::{Aabb, Vec2};
pub use level::{parse_level, LevelDef};
pub use runtime::{LevelRuntime, Snapshot};
pub use sim::{EventKind, InputFrame, PhysicsParams, TickEvent};
