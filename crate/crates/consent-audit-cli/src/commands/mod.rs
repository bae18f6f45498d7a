pub mod domains;
pub mod exif;
pub mod gen;
pub mod metrics;
pub mod pipeline;
pub mod robots;
pub mod scan;
pub mod tos;
