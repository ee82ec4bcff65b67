//! LDPC codes: representation, construction, alist I/O, encoding and
//! belief-propagation decoding.

pub mod alist;
mod code;
pub mod construct;
pub mod decode;
mod gf2;
mod spec;

pub use alist::{load_alist, save_alist};
pub use code::LdpcCode;
pub use spec::CodeSpec;
pub use construct::{
    build_protograph, extended_ira, high_rate, ira, irregular, ExtendedIraParams, LiftedCode,
};
pub use decode::{
    decode_bp, decode_bp_traced, decode_syndrome, decode_syndrome_bsc, q_metric, BpConfig,
    CheckUpdate, DecodeResult, SyndromeDecodeResult,
};
