"""Exact computation with automorphisms of free products of free-abelian
groups and free groups: normal forms, standard topological representatives,
growth and atoroidality searches, twinned-subgroup detection, empirical
flare certificates, and the abelianization conjugacy pipeline."""

__version__ = "0.1.0"

from .words import (CyclicWord, FactorSyllable, FreeSyllable, Presentation,
                    Syllable, Word, conjugate_test, cyclic_normal_form,
                    cyclic_syllable_length, double_coset_rep, invert,
                    is_hyperbolic, multiply, reduce_syllables, syllable_length)
from .parsing import parse_word, render_word
from .automorphisms import (Automorphism, ad, apply, apply_power,
                            check_central_condition, compose,
                            identity_automorphism, inverse, is_toral, power,
                            validate)
from .matrices import (IntegerMatrix, char_poly, determinant,
                       invariant_factors, is_irreducible_matrix,
                       pf_growth_rate, smith_normal_form)
from .graph_maps import (EdgePath, GateStructure, GraphMap, StandardGraph,
                         angle, bounded_cancellation_constant,
                         build_standard_map, check_train_track,
                         constants_report, count_illegal_turns,
                         gate_structure, is_legal_path, is_theta_straight,
                         legality_ratio, nielsen_search, transition_matrix)
from .dynamics import (GrowthVerdict, OrbitData, SearchReport,
                       atoroidal_search, classify_growth, classify_orbit,
                       enumerate_cyclic_words, flare_certify,
                       no_twin_implication_check, orbit_lengths, twin_search)
from .mapping_torus import (AbelianizationReport, BlockOrbitInstance,
                            ConjugacyVerdict, OrbitConstraint,
                            abelianized_action, block_orbit_solve,
                            conjugacy_pipeline, mapping_torus_abelianization)
