pub mod field;
pub mod format;
pub mod linalg;
pub mod tensor;
pub mod cluster;
pub mod code;
pub mod pm_oracle;
pub mod search;
pub mod transforms;
