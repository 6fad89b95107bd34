use crate::airlink::qpsk_slice;
use crate::numerics::CVector;

use super::{filter_outputs, FullWeights};

/// Hard QPSK decisions for both block symbols, as
/// `[re(b(2k-1)), im(b(2k-1)), re(b(2k)), im(b(2k))]` bits.
pub fn detect(w: &FullWeights, r: &CVector) -> [bool; 4] {
    let (y1, y2) = filter_outputs(w, r);
    let [a, b] = qpsk_slice(y1);
    let [c, d] = qpsk_slice(y2);
    [a, b, c, d]
}
