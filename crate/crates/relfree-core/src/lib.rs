//! Exact symbolic computation in relatively free algebras of Lie nilpotent
//! associative algebras: free-algebra arithmetic over the rationals, Grassmann
//! (exterior) algebra evaluation, T-ideal membership via spanning-set
//! echelonization, and a registry of named verification checks.

pub mod checks;
pub mod freealg;
pub mod grassmann;
pub mod tideal;
