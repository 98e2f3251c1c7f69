//! Exhaustive verification of base sizes and Saxl graphs for almost simple
//! groups with socle PSL(2,q) acting on cosets of their maximal subgroups.

#![allow(clippy::manual_is_multiple_of)]

pub mod action;
pub mod formulas;
pub mod gf;
pub mod projgroup;
pub mod saxl;

pub use action::{CosetAction, PermutationAction, SuborbitDecomposition};
pub use gf::{make_field, FieldCtx, FieldElement};
pub use projgroup::{Family, Group, LevelTag, SemilinearElement, SemilinearGroup, SubgroupSpec};
pub use saxl::{BaseSize, SaxlGraph, SaxlReport};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Data-parallel helpers. With the `parallel` feature off every helper runs
/// sequentially, and results are identical either way.
pub mod exec {
    #[cfg(feature = "parallel")]
    use rayon::prelude::*;

    pub fn is_parallel() -> bool {
        cfg!(feature = "parallel")
    }

    pub fn map<T, F>(n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            (0..n).map(f).collect()
        }
    }

    pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
    where
        S: Sync,
        T: Send,
        F: Fn(&S) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            items.par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            items.iter().map(f).collect()
        }
    }

    /// Order-preserving filter.
    pub fn filter<T, F>(items: &[T], f: F) -> Vec<T>
    where
        T: Clone + Send + Sync,
        F: Fn(&T) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            items.par_iter().filter(|x| f(x)).cloned().collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            items.iter().filter(|x| f(x)).cloned().collect()
        }
    }

    pub fn any<T, F>(items: &[T], f: F) -> bool
    where
        T: Sync,
        F: Fn(&T) -> bool + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            items.par_iter().any(f)
        }
        #[cfg(not(feature = "parallel"))]
        {
            items.iter().any(f)
        }
    }
}
