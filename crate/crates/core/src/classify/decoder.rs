use crate::basis::CoefficientVector;
use crate::synth::ClassModel;

/// Label (1-based) of the class nearest to `fhat` in L2. Ties go to the
/// lowest label.
pub fn min_distance_decode(fhat: &CoefficientVector, classes: &ClassModel) -> usize {
    let mut best = (1, f64::INFINITY);
    for label in 1..=classes.classes() {
        let d = classes.distance_to_class(fhat.coeffs(), label);
        if d < best.1 {
            best = (label, d);
        }
    }
    best.0
}
