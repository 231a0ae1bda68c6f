pub mod edit_oracle;
pub mod layout_props;
