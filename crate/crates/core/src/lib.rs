pub mod acceptance;
pub mod catalog;
pub mod error;
pub mod lab;
pub mod oracle;
pub mod propagator;
pub mod pulse;
pub mod quadrature;
pub mod qutrit;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/frames.md")]
    mod frames {}
    #[doc = include_str!("../../../book/src/pulses.md")]
    mod pulses {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
