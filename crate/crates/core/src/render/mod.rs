//! Output stages: standalone SVG and the JSON render model.

mod model;
mod svg;

pub use model::{
    expected_fields, to_render_model, RenderEnds, RenderLabel, RenderModel, RenderNode, RenderRoute, RenderText,
    SCHEMA_VERSION,
};
pub use svg::{escape, marker_name, marker_path, render_svg, scale_path, segment_path, MarkerFill};
