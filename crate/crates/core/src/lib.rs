//! Dynamics of integer polynomial maps on residue rings and the profinite
//! limits of their iterated towers `y_0 = b`, `y_(n+1) = f^(y_n)(a)`.
//!
//! ```
//! use tower_limits::{digit_stream, parse_poly, Config};
//!
//! let f = parse_poly("x^2+x+3").unwrap();
//! let s = digit_stream(&f, 0, 10, 3, &Config::default()).unwrap();
//! assert_eq!(s.window(), "243");
//! ```

pub mod arith;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod limits;
pub mod periods;
pub mod polyparse;
mod serde_big;
pub mod stability;

pub use arith::{alpha, factorize, is_prime, Factorization};
pub use config::Config;
pub use dynamics::{analyze_map, iterate_reduced, orbit, orbit_shape, GraphSummary, Orbit, OrbitShape};
pub use error::{Error, ParseError, ParseErrorKind, Result};
pub use limits::{
    detect_preperiodic, digit_stream, fixed_point_check, literal_tower, literal_tower_mod, profinite_limit_mod,
    tower_sequence_mod, verify_selfref, DigitStream, LimitEngine, Mode, PreperiodicWitness, TowerTrace,
};
pub use periods::{
    closed_form_linear_iterate, lambda_chain, lambda_exact, lambda_multiple, lift_prime_power, multiplier,
    PeriodCertificate, Provenance,
};
pub use polyparse::{parse_poly, ModPoly, Polynomial};
pub use stability::{
    ctow_partial, is_f_valid_base, is_p_cycle, is_valid_base, tower_stability_report, StabilityReport, Verdict,
};
