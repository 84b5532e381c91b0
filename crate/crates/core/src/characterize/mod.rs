//! Registry of regression identities on record values, each evaluated as
//! two sides in cross-multiplied form, plus grid scans, the family
//! classifier and the printed-constant report.
//!
//! Points are `(u, v)`, `(u, s, v)` or `(u, s, t, v)`. Conditional
//! expectations `E[g(R) | i, j]` condition on a record `i` steps below at
//! `u` and one `j` steps above at `v`.

mod classify;
mod errata;
mod grid;
mod identity;
mod residual;
mod scan;

pub use classify::{classify, classify_report, Classification, ClassifyCheck, ClassifyReport};
pub use errata::{errata_report, ErrataCell, ErrataClaim, ErrataReport, ErrataSample, ErrataStatus, ERRATA_TOL};
pub use grid::{GridSpec, QuadOrder, DEFAULT_COUNT, DEFAULT_MAX_TUPLES};
pub use identity::{Arity, IdentityCase, IdentityId, ParamUse, Params, Point};
pub use residual::{rel_residual, residual, Evaluation, Method, Residual, REL_FLOOR};
pub use scan::{default_tol, scan, PointRecord, ScanOptions, ScanReport, Verdict, SCHEMA_VERSION};
