"""Uniform sampling of connected k-node induced subgraphs."""

from .bounds import (Bound, BoundInputs, all_bounds, bound_degree_prop, bound_mcmc,
                     bound_psrw, bound_rss_plus)
from .datasets import SignedGraph, generate_ba, karate, load_signed_snap
from .graph import (Graph, GraphError, degree, diameter, is_connected, is_connected_induced,
                    load_edge_list, max_degree)
from .samplers import (SampleBatch, Sampler, SamplerConfig, degree_prop_sampling,
                       degree_prop_sampling_plus, mcmc_sampling, psrw_sampling,
                       uniform_sampling)
from .states import (StateGraph, StateTables, SubgraphState, enumerate_states,
                     removable_count, state_degree, state_neighbors)

__version__ = "0.1.0"
