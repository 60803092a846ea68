"""soficlab: finite permutation models of group actions and their statistics.

Core layers:

- :mod:`soficlab.perms`: exact permutation / partial-injection / dyadic
  labeling arithmetic.
- :mod:`soficlab.linking`: rounding of near-permutations and deterministic
  conjugation of subsets, partitions, labelings and matrix-unit systems.
- :mod:`soficlab.approx`: sofic approximations of finitely generated groups
  with defect and trace metrics, amplification and diagonal products.
- :mod:`soficlab.bernoulli`, :mod:`soficlab.wreath`,
  :mod:`soficlab.constructions`: derived approximations (symbol-space
  extensions, lamplighters, amalgamated gluings, integer actions, treeings).
- :mod:`soficlab.localstats`: neighborhood-class statistics, analytic shift
  oracles and the verification suite.
- :mod:`soficlab.cli`: batch command line with reports and figures.
"""

from .approx import (ActionApproximation, DefectReport, SoficApproximation,
                     amplify, amplify_action, defect_report, evaluate_word,
                     make_base, tensor_pair)
from .bernoulli import (BernoulliApproximation, CylinderSpec, CylinderTrace,
                        bernoulli_extend, cylinder_trace, equivariance_defect,
                        generalized_bernoulli)
from .constructions import (AmalgamResult, CellAutomorphism, TreeingFamily,
                            amalgam_glue, cell_conjugator, cell_swap,
                            integer_action_approx, odometer, product_action,
                            treeing_restrict, z_amalgam_23_preset)
from .groups import GroupSpec, Word, builtin_table_spec, reduced_words
from .linking import (MatrixUnitSystem, RowFunction, align_labelings,
                      align_labelings_approx, conjugate_partitions,
                      conjugate_subsets, link_matrix_units,
                      round_to_permutation, sum_of_pieces)
from .localstats import (LocalStats, NeighborhoodClass, WordBall,
                         bernoulli_oracle, el_verify, enumerate_words,
                         local_stats, neighborhood, stats_distance)
from .perms import (DyadicLabeling, PartialInjection, Permutation, compose,
                    fixed_fraction, inverse, normalized_hamming, pinj_compose,
                    two_norm_sq)
from .wreath import wreath_general, wreath_z2, z2_lamp_approximation

__version__ = "0.1.0"
