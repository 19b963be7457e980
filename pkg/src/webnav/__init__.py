"""Web navigation models, session reconstruction, and traffic analysis.

Three random-surfer models (pagerank, bookrank, abc) browse a shared
scale-free graph; their clicks are folded into logical session trees and
six traffic descriptors (page, link, and empty-referrer traffic, per-user
entropy, session size and depth). The same descriptor pipeline also runs
over sessions reconstructed from HTTP request logs.
"""

__version__ = "0.1.0"

from .agents import (Back, BookmarkList, Forward, ModelParams, StepOutcome,
                     Teleport, ZipfRankTable, abc_step, agent_rng,
                     bookmark_sample, bookmark_touch, bookrank_step,
                     make_agent, pagerank_step)
from .errors import (ConfigurationError, DataError, EmptyDataError,
                     ParseError, ProtocolError, StatisticsError, WebnavError)
from .graph import (GraphMeta, WebGraph, generate_scale_free, load_edge_list,
                    write_edge_list)
from .ingest import (LogRecord, ParseStats, Sessionizer, descriptors_from_logs,
                     parse_log, sessionize)
from .metrics import (LogBinnedHistogram, PowerLawFit, ccdf,
                      fit_geometric_ratio, fit_power_law, histogram,
                      ks_statistic, zipf_samples)
from .run import (RunManifest, RunResult, SimConfig, compare_runs,
                  format_comparison, partition_agents, run_ingest,
                  run_simulation, simulate)
from .session import (SessionDescriptor, SessionRecorder, SessionTree,
                      TrafficTally, close_session, entropy_bits, record_step,
                      user_entropy)

__all__ = [name for name in dir() if not name.startswith("_")]
