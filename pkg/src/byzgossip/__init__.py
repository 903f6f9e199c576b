"""Byzantine-robust decentralized averaging by clipped dual gradient descent."""

from byzgossip.adversary import AttackModel
from byzgossip.engine import HonestState, clip, edge_diffs, step_directed, step_undirected
from byzgossip.kernels import BACKEND
from byzgossip.metrics import RunRecord, bias_variance, descent_certificate, eta_max
from byzgossip.simulation import Trajectory, run
from byzgossip.thresholds import make_policy
from byzgossip.topology import (
    Topology,
    build_complete,
    build_two_worlds,
    directed_incidence,
    incidence,
    spectral_summary,
)

__version__ = "0.1.0"

__all__ = [
    "AttackModel",
    "BACKEND",
    "HonestState",
    "RunRecord",
    "Topology",
    "Trajectory",
    "bias_variance",
    "build_complete",
    "build_two_worlds",
    "clip",
    "descent_certificate",
    "directed_incidence",
    "edge_diffs",
    "eta_max",
    "incidence",
    "make_policy",
    "run",
    "spectral_summary",
    "step_directed",
    "step_undirected",
]
