"""Numerical laboratory for Hilbert and Blaschke geometry on convex
domains of the real projective plane."""

from .blaschke import BlaschkeField, blaschke_from_embedding, unimodularity_check
from .chords import (ChordProfile, alpha_profile, blaschke_distance_upper,
                     chord_identity_check, comparison_audit,
                     estimate_comparison_constant, ode_barrier,
                     slope_bound_check)
from .entropy import (VolumeForm, ball_inclusion_check, ball_volume,
                      entropy_estimate, make_volume_form, uniformity_constant)
from .hilbert import (HilbertBall, ball_membership, geodesic_sample,
                      hilbert_distance, hilbert_norm)
from .monge_ampere import MongeAmpereSolution, embedding, solve_monge_ampere
from .projective import Chord, ConvexDomain, ProjectivePoint, cross_ratio
from .spectrum import (GroupElement, SpectrumEntry, collar_audit, iota3,
                       limit_set_domain, translation_length_dyn,
                       translation_length_eig)

__version__ = "0.1.0"
