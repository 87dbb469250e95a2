"""Networks of pitch-class sets and rhythmic cells in arbitrary temperaments."""

__version__ = "0.1.0"

from .errors import DomainError, MusnetError, OperatorParseError, SchemaError, ScoreParseError
from .operators import Distance, OperatorName, neo_riemannian, ops_distance
from .pcs import PitchClassSet, apply_operator
from .rhythm import RhythmCell, duration_vector, r_interval_vector
from .metrics import (interval_vector_distance, minimal_distance, minimal_nobij_distance, ops_name,
                      parsimony, rhythm_vector_distance, voice_leading)
from .dictionaries import (Dictionary, DictionaryEntry, count_classes, count_subsets, extract_by_string, pcs_dictionary,
                           rhythm_dictionary, rhythm_p_dictionary)
from .network import Edge, MusicNetwork, Node
from .netbuild import (generate_progression, grow_preferential_network, pcs_ego_network, pcs_network,
                       rhythm_network, rlead_network, vlead_network, vlead_network_by_name)
from .graphstats import (CommunityAssignment, average_degree, connected_components, louvain, modularity,
                         network_stats)
from .score import (ChordSequence, OperatorHistogram, corpus_analyze, operator_distribution, read_score,
                    score_dictionary, score_network)
from .export import read_csv, read_dictionary_csv, read_gexf, write_csv, write_dictionary_csv, write_gexf
