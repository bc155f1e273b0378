"""Reductions from weaker trusted-party calls to full security."""

from .committed_or import committed_or_protocol, run_committed_or
from .election import err_bound, feige_elect, feige_protocol, simulate_election
from .elimination import coin_flip_uplift_protocol, player_elimination_protocol, run_player_elimination
from .partition import parallel_partition_protocol, partition_abort_to_full, sequential_partition_protocol
from .subcommittees import (
    ReductionConfig,
    enumerate_subcommittees,
    parallel_subcommittee_protocol,
    run_parallel_subcommittees,
    subcommittee_count_bound,
)
