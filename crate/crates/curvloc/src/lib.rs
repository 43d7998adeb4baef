pub mod classify;
pub mod germ;
pub mod isometry;
pub mod linalg;
pub mod locus;
pub mod nets;
pub mod poly;
