pub mod action;
pub mod algebra;
pub mod bundle;
pub mod catalog;
pub mod duality;
pub mod error;
pub mod extension;
pub mod groupoid;
pub mod haar;
pub mod iso;
pub mod linalg;
pub mod par;
pub mod phase;
pub mod snf;
pub mod spec_file;
pub mod twist;
