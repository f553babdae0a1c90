"""Generalized probabilistic theories: convex state spaces, postulate checks, qubit reconstruction."""

from .composites import (BipartiteState, CompositeSpace, marginals, product_effect_consistency,
                         separable_hull_membership, span_check, tensor_state)
from .convex import (BallSpace, DimensionMismatchError, EmptyFaceError, ExtremeSet, Measurement,
                     PolytopeSpace, QuantumSpace, StateSpace, UnsupportedGeometryError, decompose,
                     extreme_points, face_of_effect, is_valid_effect, max_distinguishable, membership,
                     mix, simplex)
from .groups import (BlochFormError, NotAnEncodingError, NotCompactError, Transformation,
                     TransformationGroup, apply, bloch_form, check_reversible_pair, expm,
                     invariant_metric, orbit_transitive)
from .postulates import (CheckReport, InteractionScanResult, check_all_effects,
                         check_continuous_reversibility, check_interaction, check_nse_geometric,
                         check_nse_operational, check_tomographic_locality, interaction_scan,
                         reconstruct_pipeline, replay, run_checks, verify_quantum_generators)
from .theories import (FrameMap, Theory, bloch_to_density, builtin, canonical_encoding,
                       theory_from_document)

__version__ = "0.1.0"
