"""Trusted parties for every ideal model the reductions use, plus the concrete
functionalities they invoke.

``tp_execute`` runs one invocation of a functionality under a trusted-party
type.  The adversary participates through a ``CallHooks`` object; the engine
adapts an ``AdversaryStrategy`` to that interface, and tests can pass hooks
directly.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .core import ABSENT, Bot, Committee
from .errors import InsufficientShares, ProtocolViolation, ReconstructionFailure, SpecError
from .randomness import Namespace, SeededSource
from . import sharing
from .sharing import Scheme, Share, ShareSet


class Kind(enum.Enum):
    FULL = "full"
    FAIR = "fair"
    ID_FAIR = "id-fair"
    ABORT = "abort"
    ID_ABORT = "id-abort"
    RESTRICTED_ID_ABORT = "restricted-id-abort"
    RESTRICTED_ID_FAIR = "restricted-id-fair"
    RESTRICTED_FAIR_ABORT = "restricted-fair-abort"


_RESTRICTED = {Kind.RESTRICTED_ID_ABORT, Kind.RESTRICTED_ID_FAIR, Kind.RESTRICTED_FAIR_ABORT}
_LATE = {Kind.ABORT, Kind.ID_ABORT, Kind.RESTRICTED_ID_ABORT}
_IDENTIFYING = {Kind.ID_FAIR, Kind.ID_ABORT, Kind.RESTRICTED_ID_ABORT, Kind.RESTRICTED_ID_FAIR}


@dataclass(frozen=True)
class TrustedPartyType:
    kind: Kind
    committees: Tuple[Committee, ...] = ()

    def __post_init__(self):
        if self.kind in _RESTRICTED and not self.committees:
            raise SpecError(f"{self.kind.value} needs at least one committee")
        if self.kind not in _RESTRICTED and self.committees:
            raise SpecError(f"{self.kind.value} takes no committees")

    @classmethod
    def full(cls):
        return cls(Kind.FULL)

    @classmethod
    def fair(cls):
        return cls(Kind.FAIR)

    @classmethod
    def id_fair(cls):
        return cls(Kind.ID_FAIR)

    @classmethod
    def abort(cls):
        return cls(Kind.ABORT)

    @classmethod
    def id_abort(cls):
        return cls(Kind.ID_ABORT)

    @classmethod
    def restricted_id_abort(cls, committees: Sequence[Committee]):
        return cls(Kind.RESTRICTED_ID_ABORT, tuple(committees))

    @classmethod
    def restricted_id_fair(cls, committees: Sequence[Committee]):
        return cls(Kind.RESTRICTED_ID_FAIR, tuple(committees))

    @classmethod
    def restricted_fair_abort(cls, committees: Sequence[Committee]):
        return cls(Kind.RESTRICTED_FAIR_ABORT, tuple(committees))

    @property
    def restricted(self) -> bool:
        return self.kind in _RESTRICTED

    @property
    def allows_late_abort(self) -> bool:
        return self.kind in _LATE

    @property
    def identifies(self) -> bool:
        return self.kind in _IDENTIFYING

    def label(self) -> str:
        if not self.committees:
            return self.kind.value
        return f"{self.kind.value}[{len(self.committees)}]"


@dataclass(frozen=True)
class FunctionalitySpec:
    """A (possibly reactive) functionality.

    ``evaluate(inputs, coins, state)`` receives the final inputs of every input
    party, a randomness namespace private to this invocation and a dict that
    persists across invocations sharing a state key within one execution.  It
    returns one public value, or a per-party dict when ``public_output`` is
    false.
    """

    name: str
    evaluate: Callable[[Mapping[int, Any], Namespace, dict], Any]
    arity: Optional[int] = None
    default_input: Any = None
    public_output: bool = True
    validate_input: Optional[Callable[[Any], bool]] = None
    corruption_aware: bool = False


@dataclass(frozen=True)
class Abort:
    """An abort request.  Identity-revealing models need one identity per
    required slot (one slot for id-abort/id-fair, one per committee for the
    restricted models)."""

    identities: Tuple[int, ...] = ()


@dataclass(frozen=True)
class CallInfo:
    functionality: FunctionalitySpec
    tp: TrustedPartyType
    corrupted: FrozenSet[int]
    parties: Tuple[int, ...]
    abort_allowed: bool
    legal_identities: Tuple[FrozenSet[int], ...]
    adversary_dictates: bool
    visible: Tuple[Tuple[int, Any], ...] = ()
    round_index: int = -1
    call_index: int = -1

    def lowest_identities(self) -> Tuple[int, ...]:
        return tuple(min(s) for s in self.legal_identities)

    def abort_with(self, choose: Callable[[FrozenSet[int]], int] = min) -> Abort:
        if not self.abort_allowed:
            raise ProtocolViolation(f"{self.tp.label()} does not admit an abort here")
        return Abort(tuple(choose(s) for s in self.legal_identities))


class CallHooks:
    """Adversary interface for a single trusted-party invocation.

    The defaults describe a passive adversary.
    """

    def substitute(self, info: CallInfo, inputs: Dict[int, Any]) -> Dict[int, Any]:
        return inputs

    def early_abort(self, info: CallInfo) -> Optional[Abort]:
        return None

    def late_abort(self, info: CallInfo, corrupted_outputs: Mapping[int, Any]) -> Optional[Abort]:
        return None

    def dictate(self, info: CallInfo, inputs: Mapping[int, Any], outputs: Mapping[int, Any]):
        """Called only when some designated committee is entirely corrupted.

        Return None to release ``outputs``, an ``Abort`` or a replacement
        output dict.
        """
        return None

    def respond(self, info: CallInfo, query: Any) -> Any:
        """Answer a corruption-aware functionality's question; None means default."""
        return None


@dataclass(frozen=True)
class TPOutcome:
    outputs: Dict[int, Any]
    aborted: bool = False
    identified: FrozenSet[int] = frozenset()
    phase: Optional[str] = None
    dictated: bool = False
    sampled: bool = False
    inputs: Dict[int, Any] = field(default_factory=dict)


class _TrackedCoins:
    def __init__(self, space: Namespace):
        self.space = space
        self.used = False

    def draw(self, key, radix):
        self.used = True
        return self.space.draw(key, radix)

    def randbelow(self, radix, *label):
        return self.draw(label, radix)

    def child(self, *label):
        self.used = True
        return self.space.child(*label)


def _validate_abort(abort: Abort, info: CallInfo) -> FrozenSet[int]:
    if not info.abort_allowed:
        raise ProtocolViolation(f"{info.tp.label()} does not admit an abort here")
    if not info.tp.identifies:
        return frozenset()
    ids = tuple(abort.identities)
    if len(ids) != len(info.legal_identities):
        raise ProtocolViolation(
            f"{info.tp.label()} abort needs {len(info.legal_identities)} identities, got {len(ids)}"
        )
    for pid, legal in zip(ids, info.legal_identities):
        if pid not in legal:
            raise ProtocolViolation(f"identity {pid} is not a corrupted member of the required committee")
    return frozenset(ids)


def tp_execute(
    f: FunctionalitySpec,
    tp: TrustedPartyType,
    inputs: Mapping[int, Any],
    corrupted: Iterable[int] = (),
    hooks: Optional[CallHooks] = None,
    coins: Optional[Namespace] = None,
    recipients: Optional[Sequence[int]] = None,
    members: Optional[Sequence[int]] = None,
    state: Optional[dict] = None,
    visible: Sequence[Tuple[int, Any]] = (),
    round_index: int = -1,
    call_index: int = -1,
) -> TPOutcome:
    """Run one invocation of ``f`` under trusted-party type ``tp``.

    ``inputs`` holds the honest-behaviour input of every input party;
    corrupted entries may be replaced through ``hooks.substitute``.
    ``members`` are the parties allowed to abort (defaults to the input
    parties) and ``recipients`` receive outputs (defaults to the input parties).
    """
    hooks = hooks or CallHooks()
    corrupted = frozenset(corrupted)
    parties = tuple(sorted(inputs))
    recipients = tuple(recipients) if recipients is not None else parties
    members = frozenset(members) if members is not None else frozenset(parties)
    tracked = _TrackedCoins(coins if coins is not None else Namespace(SeededSource(0), "tp"))
    state = state if state is not None else {}

    if tp.restricted:
        committees = [c.as_set() for c in tp.committees]
        legal = tuple(frozenset(c & corrupted) for c in committees)
        dictates = any(c <= corrupted for c in committees)
        allowed = all(legal)
    else:
        legal = (frozenset(members & corrupted),) if tp.identifies else ()
        dictates = False
        allowed = tp.kind is not Kind.FULL and bool(members & corrupted)
        if tp.identifies and not legal[0]:
            allowed = False
    info = CallInfo(f, tp, corrupted, parties, allowed, legal, dictates, tuple(visible), round_index, call_index)

    final = dict(inputs)
    corrupt_inputs = {p: final[p] for p in parties if p in corrupted}
    if corrupt_inputs:
        replaced = hooks.substitute(info, dict(corrupt_inputs))
        for p in corrupt_inputs:
            final[p] = replaced.get(p, f.default_input)
    for p in parties:
        x = final[p]
        if x is ABSENT or (f.validate_input is not None and not f.validate_input(x)):
            final[p] = f.default_input

    def evaluate() -> Dict[int, Any]:
        if f.corruption_aware:
            value = f.evaluate(dict(final), tracked, state, corrupted=corrupted,
                               ask=lambda query: hooks.respond(info, query))
        else:
            value = f.evaluate(dict(final), tracked, state)
        if f.public_output:
            return {p: value for p in recipients}
        return {p: value.get(p) for p in recipients}

    def aborted(ids: FrozenSet[int], phase: str) -> TPOutcome:
        return TPOutcome({p: Bot(ids) for p in recipients}, True, ids, phase, False, tracked.used, final)

    if dictates:
        outputs = evaluate()
        decision = hooks.dictate(info, dict(final), dict(outputs))
        if decision is None:
            return TPOutcome(outputs, False, frozenset(), None, False, True, final)
        if isinstance(decision, Abort):
            ids = _validate_abort(decision, info)
            return TPOutcome({p: Bot(ids) for p in recipients}, True, ids, "early", True, True, final)
        merged = {p: decision.get(p, outputs[p]) for p in recipients}
        return TPOutcome(merged, False, frozenset(), None, True, True, final)

    request = hooks.early_abort(info)
    if request is not None:
        ids = _validate_abort(request, info)
        return aborted(ids, "early")

    outputs = evaluate()
    if tp.allows_late_abort and allowed:
        seen = {p: outputs[p] for p in recipients if p in corrupted}
        request = hooks.late_abort(info, seen)
        if request is not None:
            ids = _validate_abort(request, info)
            return aborted(ids, "late")
    return TPOutcome(outputs, False, frozenset(), None, False, tracked.used, final)


# ------------------------------------------------------------ commitments

@dataclass(frozen=True)
class Commitment:
    handle: str

    def __repr__(self) -> str:
        return f"Com({self.handle[:8]})"


def commit(value: Any, opening: int) -> Commitment:
    """Ideal commitment: the handle is a hash of (value, opening).

    Inside the simulation this behaves as perfectly binding; hiding holds as
    long as openings are drawn from a large domain.
    """
    data = repr((value, opening)).encode()
    return Commitment(hashlib.blake2b(data, digest_size=16).hexdigest())


def open_ok(com: Any, value: Any, opening: Any) -> bool:
    return isinstance(com, Commitment) and isinstance(opening, int) and commit(value, opening) == com


OPENING_BITS = 64


# ------------------------------------------------------------ functionalities

def f_cf(n: int) -> FunctionalitySpec:
    """Coin flipping: one uniform public bit, no inputs."""
    if n < 1:
        raise SpecError("need at least one party")

    def evaluate(inputs, coins, state):
        return coins.draw(("bit",), 2)

    return FunctionalitySpec("f_cf", evaluate, arity=n)


def f_or(n: int) -> FunctionalitySpec:
    def evaluate(inputs, coins, state):
        return int(any(inputs.get(p, 0) for p in inputs))

    return FunctionalitySpec("f_or", evaluate, arity=n, default_input=0, validate_input=lambda x: x in (0, 1))


def f_from(name: str, fn: Callable[[Mapping[int, Any]], Any], n: int, default_input: Any = 0,
           validate_input: Optional[Callable[[Any], bool]] = None) -> FunctionalitySpec:
    """Deterministic public-output functionality from a plain function of the inputs."""
    return FunctionalitySpec(name, lambda inputs, coins, state: fn(inputs), arity=n,
                             default_input=default_input, validate_input=validate_input)


def shuffled(items: Sequence[int], coins, label: str = "perm") -> List[int]:
    """Fisher-Yates shuffle driven by keyed draws."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = coins.draw((label, i), i + 1)
        out[i], out[j] = out[j], out[i]
    return out


ElectChooser = Callable[[Sequence[Tuple[int, ...]], FrozenSet[int]], Tuple[int, Sequence[int]]]


def choose_first_bucket(buckets, corrupted):
    return 0, ()


def pad_with_corrupted(n_prime: int) -> ElectChooser:
    """Adversary choice: first bucket padded to size n_prime with corrupted parties."""

    def choose(buckets, corrupted):
        room = n_prime - len(buckets[0])
        return 0, tuple(sorted(corrupted))[: max(room, 0)]

    return choose


def elect_bucket_size(n_prime: int, beta_prime: float) -> int:
    """Honest members per bucket, ceil((1 - beta') n'), robust to float noise."""
    return math.ceil(round((1 - beta_prime) * n_prime, 9))


def f_elect(n: int, n_prime: int, beta_prime: float, corrupted: Iterable[int], coins,
            choose: ElectChooser = choose_first_bucket) -> Committee:
    """Corruption-aware committee election.

    The trusted party spreads k * ceil((1 - beta') n') random honest parties
    evenly over k = max(1, n // n') buckets, lets the adversary pick a bucket
    and pad it with corrupted parties up to n' members, and returns the result.
    """
    if not 0 < n_prime <= n:
        raise SpecError("need 0 < n' <= n")
    corrupted = frozenset(corrupted)
    honest = [p for p in range(1, n + 1) if p not in corrupted]
    k = max(1, n // n_prime)
    per_bucket = elect_bucket_size(n_prime, beta_prime)
    if k * per_bucket > len(honest):
        raise SpecError(f"{len(honest)} honest parties cannot fill {k} buckets of {per_bucket}")
    picked = shuffled(honest, coins)[: k * per_bucket]
    buckets = [tuple(sorted(picked[b * per_bucket:(b + 1) * per_bucket])) for b in range(k)]
    index, padding = choose(buckets, corrupted)
    if not 0 <= index < k:
        raise ProtocolViolation("bucket index out of range")
    padding = frozenset(padding)
    if not padding <= corrupted:
        raise ProtocolViolation("padding must consist of corrupted parties")
    if len(buckets[index]) + len(padding) > n_prime:
        raise ProtocolViolation("padding exceeds the committee size")
    return Committee.of(set(buckets[index]) | padding)


def f_elect_functionality(n: int, n_prime: int, beta_prime: float) -> FunctionalitySpec:
    """``f_elect`` as a trusted-party call.  The adversary's bucket choice is
    requested through the ``respond`` hook with query ("elect", buckets);
    it must answer (index, padding) or None for the default."""

    def evaluate(inputs, coins, state, corrupted, ask):
        def choose(buckets, corrupt):
            answer = ask(("elect", tuple(buckets)))
            return answer if answer is not None else choose_first_bucket(buckets, corrupt)

        return f_elect(n, n_prime, beta_prime, corrupted, coins, choose)

    return FunctionalitySpec("f_elect", evaluate, arity=n, corruption_aware=True)


def encode_int(x: int) -> bytes:
    return int(x).to_bytes(8, "little", signed=True)


def decode_int(data: bytes) -> int:
    return int.from_bytes(data, "little", signed=True)


def share_vector(values: Sequence[int], scheme: Scheme, size: int, threshold: int, rng) -> List[Tuple[Any, ...]]:
    """Share each value among ``size`` holders; returns one tuple per holder."""
    sets = [sharing.share(encode_int(v), scheme, size, threshold, rng) for v in values]
    return [tuple(s.shares[h] for s in sets) for h in range(size)]


def make_f_ssout(fn: Callable[[Sequence[int]], int], n: int, members: Sequence[int], t_prime: int,
                 scheme: Scheme = Scheme.ECSS_MAC, defaults: Optional[Sequence[int]] = None,
                 secret_len: Optional[int] = None) -> FunctionalitySpec:
    """Reconstruct-compute-share.

    Input of committee member number h (1-based position in ``members``) is a
    tuple of n share payloads, the h-th share of every party's input.  The
    output is a fresh sharing of fn(x_1..x_n), one share per member.
    """
    members = tuple(sorted(members))
    size = len(members)
    defaults = tuple(defaults) if defaults is not None else (0,) * n
    if secret_len is None:
        secret_len = len(sharing.encode_secret(encode_int(0)))
    sharing.check_threshold(scheme, size, t_prime)

    def parse(vec: Any, position: int) -> Tuple[Any, ...]:
        if isinstance(vec, tuple) and len(vec) == n:
            return vec
        return tuple(Share(position, (0,) * secret_len) for _ in range(n))

    def evaluate(inputs, coins, state):
        vectors = [parse(inputs.get(m), h + 1) for h, m in enumerate(members)]
        reps = sharing.mac_repetitions(sharing.DEFAULT_MAC_LAMBDA, secret_len) if scheme is Scheme.ECSS_MAC else 0
        xs = []
        for i in range(n):
            shares = ShareSet(scheme, size, t_prime, tuple(v[i] for v in vectors), secret_len, reps)
            try:
                xs.append(decode_int(sharing.ecss_recon(shares)))
            except (InsufficientShares, ReconstructionFailure, ValueError):
                xs.append(defaults[i])
        y = fn(xs)
        fresh = sharing.share(encode_int(y), scheme, size, t_prime, coins.child("reshare"))
        return {m: fresh.shares[h] for h, m in enumerate(members)}

    return FunctionalitySpec("f_ssout", evaluate, arity=size, public_output=False)


def make_f_in(fn: Callable[[Sequence[int]], int], n: int, members: Sequence[int],
              commitments: Mapping[Tuple[int, int], Commitment],
              hardwired: Optional[Mapping[int, int]] = None) -> FunctionalitySpec:
    """Verify-reconstruct-compute.

    ``commitments[(i, h)]`` commits to the h-th member's XOR share of party
    i's input.  Member h inputs a tuple of n pairs (share, opening).  The first
    member (by position) holding an invalid opening is identified.  Parties in
    ``hardwired`` have a fixed input; their entries are not checked.
    """
    members = tuple(sorted(members))
    hardwired = dict(hardwired or {})

    def valid(h: int, vec: Any) -> bool:
        if not isinstance(vec, tuple) or len(vec) != n:
            return False
        for i, pair in enumerate(vec, start=1):
            if i in hardwired:
                continue
            if not isinstance(pair, tuple) or len(pair) != 2:
                return False
            if not open_ok(commitments.get((i, h)), pair[0], pair[1]):
                return False
        return True

    def evaluate(inputs, coins, state):
        for h, m in enumerate(members, start=1):
            if not valid(h, inputs.get(m)):
                return Bot(frozenset({m}))
        xs = []
        for i in range(n):
            if i + 1 in hardwired:
                xs.append(hardwired[i + 1])
                continue
            acc = 0
            for m in members:
                acc ^= inputs[m][i][0]
            xs.append(acc)
        return fn(xs)

    return FunctionalitySpec("f_in", evaluate, arity=len(members))


def f_augct(committee: Committee, bits: int = 32, n: Optional[int] = None) -> FunctionalitySpec:
    """Delegated augmented coin tossing.

    Member i receives ((r_i, rho_i), commitments); every other party of 1..n
    (default: the committee) receives (None, commitments).
    """
    everyone = tuple(range(1, n + 1)) if n is not None else committee.members

    def evaluate(inputs, coins, state):
        private = {}
        coms = {}
        for m in committee:
            r = coins.draw(("r", m), 1 << bits)
            rho = coins.draw(("rho", m), 1 << OPENING_BITS)
            private[m] = (r, rho)
            coms[m] = commit(r, rho)
        public = tuple(sorted(coms.items()))
        return {p: (private.get(p), public) for p in everyone}

    return FunctionalitySpec("f_augct", evaluate, public_output=False)


def augct_by_xor(committee: Committee, contributions: Mapping[int, Mapping[int, Tuple[int, int]]],
                 openings: Mapping[int, Mapping[int, Tuple[int, int]]], bits: int = 32):
    """Commit-then-open realisation of f_augct.

    ``contributions[j][i]`` is the commitment pair sent by member j for member
    i's string and ``openings[j][i]`` the opening pair.  Member i's string is
    the XOR of all contributions.  A member whose opening fails is reported as
    the identified party (smallest index first).
    """
    for j in committee:
        for i in committee:
            com = contributions.get(j, {}).get(i)
            opened = openings.get(j, {}).get(i)
            if com is None or opened is None or not open_ok(com, opened[0], opened[1]):
                return Bot(frozenset({j}))
    strings = {}
    for i in committee:
        acc = 0
        for j in committee:
            acc ^= openings[j][i][0]
        strings[i] = acc % (1 << bits)
    return strings


# ------------------------------------------------------------ one-to-many proofs

def relation_enc(statement: Mapping[str, Any], witness: Mapping[str, Any]) -> bool:
    """Consistency of an input sharing across committees.

    statement: ``input_commitment`` and ``share_commitments[l][h]``.
    witness: ``value``, ``opening``, ``shares[l][h]`` and ``share_openings[l][h]``.
    Accepts iff every commitment opens and every committee's shares XOR to the
    committed value.
    """
    try:
        if not open_ok(statement["input_commitment"], witness["value"], witness["opening"]):
            return False
        coms = statement["share_commitments"]
        shares = witness["shares"]
        openings = witness["share_openings"]
        if len(coms) != len(shares) or len(coms) != len(openings):
            return False
        for l in range(len(coms)):
            if len(coms[l]) != len(shares[l]) or len(shares[l]) != len(openings[l]):
                return False
            acc = 0
            for com, s, rho in zip(coms[l], shares[l], openings[l]):
                if not open_ok(com, s, rho):
                    return False
                acc ^= s
            if acc != witness["value"]:
                return False
        return True
    except (KeyError, TypeError):
        return False


def relation_exec(statement: Mapping[str, Any], witness: Mapping[str, Any]) -> bool:
    """Correct-execution claim of one committee member.

    statement: ``claim`` (the announced output), ``randomness_commitment``,
    ``recompute`` (output function of the sub-protocol) and ``transcript``.
    witness: ``randomness`` and ``opening``.
    """
    try:
        if not open_ok(statement["randomness_commitment"], witness["randomness"], witness["opening"]):
            return False
        recomputed = statement["recompute"](statement["member"], witness["randomness"], statement["transcript"])
        return recomputed == statement["claim"]
    except (KeyError, TypeError):
        return False


RELATIONS: Dict[str, Callable[[Mapping[str, Any], Mapping[str, Any]], bool]] = {
    "enc": relation_enc,
    "exec": relation_exec,
}


def zk_1m_verify(prover: int, statement: Any, witness: Any, relation: str) -> Tuple[Any, int]:
    """One-to-many zero knowledge: every party learns (statement, accept bit)."""
    if relation not in RELATIONS:
        raise SpecError(f"unknown relation {relation!r}")
    return statement, int(bool(RELATIONS[relation](statement, witness)))


def make_f_comor(commitments: Mapping[int, Commitment],
                 state_key: str = "comor") -> Tuple[FunctionalitySpec, FunctionalitySpec]:
    """Two-phase committed OR.

    Phase 1 takes each party's opening (x_i, rho_i), replaces inputs that do
    not open their commitment by 0, returns the set M of such parties and
    stores y = OR of the inputs.  Phase 2 takes no inputs and returns y.
    """

    def phase_one(inputs, coins, state):
        bad = set()
        acc = 0
        for p, opening in inputs.items():
            ok = (isinstance(opening, tuple) and len(opening) == 2 and opening[0] in (0, 1)
                  and open_ok(commitments.get(p), opening[0], opening[1]))
            if not ok:
                bad.add(p)
            elif opening[0]:
                acc = 1
        state[state_key] = acc
        return frozenset(bad)

    def phase_two(inputs, coins, state):
        if state_key not in state:
            raise SpecError("committed OR queried before its first phase")
        return state.pop(state_key)

    return (FunctionalitySpec("f_comor/1", phase_one),
            FunctionalitySpec("f_comor/2", phase_two))
