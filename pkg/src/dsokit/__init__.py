"""Distance sensitivity oracles: d(x, y, e) after removing one edge, in O(1) lookups."""
from .apsp import CenterTables, DistanceMatrix, apsp, apsp_augmented, minplus_apsp, per_source_center_scan
from .graph import (INF, Graph, GraphFormatError, ShortestPathTree, dijkstra, dump_graph, excluded_sssp,
                    hop_limited_sssp, load_graph, replacement_distance_bruteforce, replacement_table)
from .hop import ExtendedDso, SampledFamilyDso, TwoHopDso, reduce_query_time
from .oracle import (CenterAssignment, OracleTables, assign_priorities, build_interval_directory,
                     compute_dbv_auxiliary, compute_dbv_reference, query)
from .paths import ansc, mwc, rpaths, two_apsisp_direct, two_apsisp_via_dso, two_sisp
from .pipelines import (OracleFormatError, PipelineConfig, build, build_dso_a, build_dso_b, build_dso_c,
                        load_oracle, save_oracle)
from .runtime import WorkSpanMeter, get_threads, parallel_for, set_threads
from .toolkit import VerifyReport, bench, gen_graph, verify

__version__ = "0.1.0"
