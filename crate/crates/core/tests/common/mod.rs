#![allow(dead_code)]

pub mod bigfixed;
pub mod oracles;
