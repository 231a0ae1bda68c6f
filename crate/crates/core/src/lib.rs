pub mod diagnostics;
pub mod interp;
pub mod model;
pub mod syntax;
pub mod layout;
pub mod render;
pub mod uml;
pub mod pipeline;
pub mod edit;
pub mod samples;
