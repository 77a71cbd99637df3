pub mod bench;
pub mod cli;
pub mod codes;
pub mod config;
pub mod generator;
pub mod grid;
pub mod integration;
pub mod mask_io;
pub mod metrics;
pub mod oracle;
pub mod post_training;
pub mod rect_cover;
pub mod report;
pub mod screening;
pub mod stats;
pub mod svg;
pub mod syntax_graph;
