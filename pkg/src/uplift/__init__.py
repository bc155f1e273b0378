"""Committee-based uplifting of fairness in secure computation.

Field arithmetic and error-correcting secret sharing, a round-based hybrid
model engine with trusted-party calls of several security types, the
reductions that uplift weaker calls to full security, and the fail-stop
attacks behind the matching coin-flipping lower bound.
"""

from .core import ABSENT, BROADCAST, Bot, Committee, is_bot
from .engine import (
    AdversaryStrategy,
    Call,
    CommunicationRound,
    ExecutionResult,
    FunctionBehavior,
    FunctionalityRound,
    ProtocolSpec,
    estimate,
    run,
)
from .errors import (
    CapExceeded,
    DecodingFailure,
    ProtocolViolation,
    ReconstructionFailure,
    ScaleError,
    SearchExhausted,
    SpecError,
    UpliftError,
)
from .functionalities import Abort, FunctionalitySpec, TrustedPartyType, f_cf, f_or
from .sharing import Scheme, ecss_recon, recon, share

__version__ = "0.1.0"
