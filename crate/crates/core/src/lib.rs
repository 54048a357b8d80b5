//! Exact combinatorial minimal model program for surfaces with Wahl
//! singularities, with curve-degeneration ledgers.

pub mod cfrac;
pub mod degeneration;
pub mod error;
pub mod linalg;
pub mod mmp;
mod qfmt;
pub mod surface;

pub use cfrac::{Chain, Fraction, MarkovTriple, TForm, WahlPair};
pub use degeneration::{Ledger, PlaneCurveReport, PlaneRun};
pub use error::{CfracError, LedgerError, MmpError, SurfaceError, UnsupportedFlip};
pub use linalg::Q;
pub use mmp::{ExtremalClass, FlipConfig, MmpTrace, StepKind, StepRecord, Terminal};
pub use surface::{
    CurveId, CurveNode, DivisorClass, GlobalInvariants, SingularityMark, SurfaceModel,
};
