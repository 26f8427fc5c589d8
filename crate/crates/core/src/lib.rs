#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod coding;
pub mod constructions;
pub mod galois;
pub mod matrix;
pub mod network;
