pub mod cli;
pub mod galaxy;
pub mod hyper;
pub mod metric;
pub mod ordinal;
pub mod sections;
pub mod unroll;
pub mod wgraph;
