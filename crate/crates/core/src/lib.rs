//! Exact tail and point probabilities of weighted Rademacher sums
//! `S_n = Σ a_i ε_i`, the sharp bounds for them in terms of the simple
//! random walk, and a harness that checks the bounds exhaustively.
//!
//! ```
//! use symwalk::bounds::tail_bound;
//! use symwalk::exactnum::ratio;
//! use symwalk::wsum::{tail_prob, WeightVector};
//!
//! let w = WeightVector::new(vec![ratio(1, 1), ratio(1, 1), ratio(0, 1)])?;
//! let x = ratio(2, 1);
//! assert_eq!(tail_prob(&w, &x)?, tail_bound(3, &x)?.bound);
//! # Ok::<(), symwalk::error::Error>(())
//! ```

pub mod bounds;
pub mod error;
pub mod exactnum;
pub mod families;
pub mod lipschitz;
pub mod verify;
pub mod walk;
pub mod wsum;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/walk.md")]
    mod walk {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/weighted-sums.md")]
    mod weighted_sums {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/lipschitz.md")]
    mod lipschitz {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
