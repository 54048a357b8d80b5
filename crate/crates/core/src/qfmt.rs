//! Rationals serialize as "p/q" strings.

use serde::Serializer;

use crate::linalg::Q;

pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}
