//! Secret sharing on hypergraph quantum access structures, end to end:
//! exact prime-field linear algebra, classification of 3-hyperedge
//! hypercycles into their twelve isomorphism classes, the optimal-rate
//! classical schemes built from threshold, additive and Simmons geometric
//! components, and a single-qudit simulation of the MUB-based quantum
//! protocol that distributes those shares, reconstructs sub-keys by
//! circulating shift unitaries, and detects intercept-resend eavesdropping
//! with decoy particles.
//!
//! The narrative guide lives in `book/`; its code blocks compile as
//! doctests of this crate (see the `guide` module below).
//!
//! Quick taste:
//!
//! ```
//! use hyperqss::access::AccessStructure;
//!
//! let gamma = AccessStructure::parse("{1234,1267,456}").unwrap();
//! assert!(gamma.is_quantum());
//! let class = gamma.classify().unwrap();
//! assert_eq!(class.id.index(), 9);
//! ```

pub mod access;
pub mod cli;
pub mod css;
pub mod ffield;
pub mod metrics;
pub mod protocol;
pub mod qudit;

/// Book chapters compiled as doctests so the guide cannot drift from the API.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/access-structures.md")]
    mod access_structures {}
    #[doc = include_str!("../../../book/src/finite-fields.md")]
    mod finite_fields {}
    #[doc = include_str!("../../../book/src/classical-schemes.md")]
    mod classical_schemes {}
    #[doc = include_str!("../../../book/src/qudits-and-mubs.md")]
    mod qudits_and_mubs {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/rates-and-efficiency.md")]
    mod rates_and_efficiency {}
}
