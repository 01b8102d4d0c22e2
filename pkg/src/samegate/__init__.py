"""Classification and spectral analysis of same-gate Floquet circuits on periodic chains."""

from .circuit_algebra import (
    CanonicalClass,
    EquivalenceMove,
    GateSequence,
    allowed_qr,
    apply_move,
    c_of_class,
    c_of_class_closed_form,
    canonical_fp,
    canonical_fqr,
    classify,
    compress,
    equivalence_classes_bruteforce,
    invariant_c,
    parse_sequence,
    reduce_to_fp,
    validate,
)

__version__ = "0.1.0"
