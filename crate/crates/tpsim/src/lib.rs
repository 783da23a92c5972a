//! A deterministic simulator of the microarchitectural state behind timing
//! channels, plus a miniature protection kernel that closes them.
//!
//! The model is split the way the defences are:
//!
//! * [`march`] — caches, TLB and branch predictor, delineated into state
//!   that is *flushed* on a domain switch (core-local, time-shared) and
//!   state that is *partitioned* between domains (the shared last-level
//!   cache, carved up by page colour).
//! * [`timemodel`] — a virtual cycle clock and a configurable latency
//!   function of microarchitectural outcomes. Time advances only through
//!   this function, so equal state sequences give equal time sequences.
//! * [`kernel`] — coloured frame allocation, kernel cloning, round-robin
//!   scheduling with flush-and-pad domain switches, and partitioned
//!   interrupt delivery. Every defence sits behind an independent flag.
//! * [`workloads`] — a tiny program representation plus generators for the
//!   classic attacks: prime-and-probe, the flush-latency channel, the
//!   syscall (shared kernel image) channel, and a padded downgrader.
//! * [`harness`] — runs scenarios, projects the observer-visible trace,
//!   checks timing noninterference by exact paired-run equality, and
//!   quantifies leakage with channel matrices and mutual information.
//! * [`scenario`] — TOML scenario files, validation, and reports.

pub mod error;
pub mod harness;
pub mod kernel;
pub mod march;
pub mod scenario;
pub mod timemodel;
pub mod trace;
pub mod workloads;

pub use error::SimError;
