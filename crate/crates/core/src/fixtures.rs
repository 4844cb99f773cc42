//! Reference tensors used by the verification battery, the CLI and the tests.

use crate::curvature::{complete_by_symmetry, validate, CurvTensor};
use crate::error::Result;

/// Canonical components of the conformally Osserman normal form with
/// eigenvalue triple `(a, b, c)` (0-based indices):
///
/// ```text
/// W1221 = W3443 = −W1234 = a
/// W1331 = W2442 = −W1342 = b
/// W1441 = W2332 = −W1423 = c
/// ```
pub fn normal_form_components([a, b, c]: [f64; 3]) -> Vec<([usize; 4], f64)> {
    vec![
        ([0, 1, 1, 0], a),
        ([2, 3, 3, 2], a),
        ([0, 1, 2, 3], -a),
        ([0, 2, 2, 0], b),
        ([1, 3, 3, 1], b),
        ([0, 2, 3, 1], -b),
        ([0, 3, 3, 0], c),
        ([1, 2, 2, 1], c),
        ([0, 3, 1, 2], -c),
    ]
}

/// The normal-form tensor; fails the Bianchi check unless `a + b + c = 0`.
pub fn normal_form(abc: [f64; 3]) -> Result<CurvTensor> {
    validate(&complete_by_symmetry(&normal_form_components(abc))?)
}
