"""Maximal blocks in morphic words, the limsup of their ratios, and the
Diophantine exponents of the associated b-ary numbers."""

from .blocks import BlockOccurrence, XBlockPattern, naive_delta_blocks, naive_x_blocks, ratio_stats, scan_delta_blocks, scan_x_blocks
from .constructions import perron_spec, rational_word, remark2_spec, thue_morse_spec
from .diophantine import continued_fraction, exponent_report, mu_estimate, truncate_value, v_b_estimate, xi_from_indices
from .errors import MorphicError
from .linalg import Interval, dominant_eigen_interval, incidence_matrix, left_eigenvector
from .sequences import Budget, LimsupReport, limsup_delta, limsup_x
from .words import Alphabet, Coding, MorphicSpec, Morphism, load_spec, make_spec, word_stream

__version__ = "0.1.0"
