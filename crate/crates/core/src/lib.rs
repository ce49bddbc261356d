pub mod attack;
pub mod cli;
pub mod codes;
pub mod distinguisher;
pub mod formats;
pub mod gf;
pub mod grs;
pub mod linalg;
pub mod rlce;
pub mod seed;
