//! Spectral-stability certificates and eigenvalue enclosures for perturbed
//! Dirac and Klein-Gordon operators, with grid-based cross-checks.
//!
//! The crate has two halves. The analytic half ([`enclosure`],
//! [`weights_norms`], [`potential`], [`clifford`]) evaluates explicit
//! constants and weighted/dyadic norms of a potential and turns them into
//! [`enclosure::Certificate`]s. The numerical half ([`grid`],
//! [`birman_schwinger`], [`estimate_bench`]) discretizes the free operators as
//! Fourier multipliers on a periodic box, assembles the perturbed operator,
//! scans the Birman-Schwinger norm over the complex plane and measures the
//! weighted resolvent estimates the certificates rely on.
//!
//! [`cli_report`] glues everything to the `bsenclose` command-line tool.

pub mod birman_schwinger;
pub mod cli_report;
pub mod clifford;
pub mod enclosure;
pub mod estimate_bench;
pub mod grid;
pub mod linalg;
pub mod par;
pub mod potential;
pub mod weights_norms;

pub use num_complex::Complex64;

pub use birman_schwinger::{bs_norm, bs_scan, BsError, BsScan, ScanRect};
pub use clifford::{build_clifford, CliffordRep};
pub use enclosure::{certify, enclosure_disks, eval_constants, Certificate, DiskPair, TheoremId};
pub use grid::{FieldOnGrid, GridSpec, OperatorKind};
pub use potential::{polar_factorize, PotentialSpec};
pub use weights_norms::{dyadic_norm, NormResult, WeightSpec};
