"""Compilers that turn a weaker inner protocol into one with restricted
identifiable fairness for a vector of committees.

Inner protocols are ideal calls (hybrid model), except for the no-input
compiler which runs a small message-level broadcast protocol so that output
claims can be checked against a transcript.
"""

from __future__ import annotations

from collections import Counter as _Counter
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .. import sharing
from ..core import ABSENT, BROADCAST, Bot, Committee, is_bot
from ..engine import (
    Call,
    CallResult,
    CommunicationRound,
    FunctionBehavior,
    FunctionalityRound,
    Message,
    ProtocolSpec,
    View,
)
from ..errors import ReconstructionFailure, SpecError
from ..functionalities import (
    OPENING_BITS,
    Commitment,
    FunctionalitySpec,
    TrustedPartyType,
    commit,
    decode_int,
    encode_int,
    f_augct,
    make_f_in,
    make_f_ssout,
    open_ok,
    relation_enc,
    relation_exec,
)
from ..randomness import Counter
from ..sharing import Scheme, ShareSet

SHARE_BITS = 32


def _broadcasts(events: Sequence[Any], r: int) -> Dict[int, Any]:
    return {e.sender: e.payload for e in events
            if isinstance(e, Message) and e.round == r and e.receiver == BROADCAST}


def _result(events: Sequence[Any], r: int, idx: int = 0) -> Any:
    for e in events:
        if isinstance(e, CallResult) and e.round == r and e.index == idx:
            return e.value
    return ABSENT


def _results(events: Sequence[Any], r: int) -> Dict[int, Any]:
    return {e.index: e.value for e in events if isinstance(e, CallResult) and e.round == r}


def _plurality(values: Sequence[int]) -> int:
    counts = _Counter(values)
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def default_threshold(size: int) -> int:
    return (size - 1) // 2


# ------------------------------------------------------------ abort -> restricted id-fair, honest majority

def compile_abort_to_ridfair_hm(fn: Callable[[Sequence[int]], int], n: int, committees: Sequence[Committee],
                                thresholds: Optional[Sequence[int]] = None, scheme: Scheme = Scheme.ECSS_MAC,
                                identify: bool = True, defaults: Optional[Sequence[int]] = None) -> ProtocolSpec:
    """Every committee computes shares of fn(x) with (identifiable) abort.

    Round 0: each party ECSS-shares its input towards every committee.
    Round 1: one reconstruct-compute-share call per committee, in parallel.
    Round 2: members broadcast abort notices.
    Round 3: the lowest committee with at most t'_l notices opens its shares.
    If every committee has more than t'_l notices the parties output an abort
    carrying, per committee, the most reported identity (lowest on ties).
    With ``identify`` false the inner calls and the output are plain aborts.
    """
    committees = tuple(committees)
    if not committees:
        raise SpecError("need at least one committee")
    for c in committees:
        c.check_within(n)
    thresholds = tuple(thresholds) if thresholds is not None else tuple(default_threshold(len(c)) for c in committees)
    if len(thresholds) != len(committees):
        raise SpecError("one threshold per committee")
    secret_len = len(sharing.encode_secret(encode_int(0)))
    inner = [make_f_ssout(fn, n, c.members, t, scheme, defaults, secret_len)
             for c, t in zip(committees, thresholds)]
    tp = TrustedPartyType.id_abort() if identify else TrustedPartyType.abort()

    def my_shares(view: View, l: int):
        c = committees[l]
        rng = Counter(view.coins.child("share", l))
        return sharing.share(encode_int(view.input or 0), scheme, len(c), thresholds[l], rng)

    def send(view, r):
        if r == 0:
            out: Dict[int, Dict[int, Any]] = {}
            for l, c in enumerate(committees):
                shares = my_shares(view, l)
                for h, member in enumerate(c.members):
                    out.setdefault(member, {})[l] = shares.shares[h]
            return out
        if r == 2:
            notices = {}
            for l, c in enumerate(committees):
                if view.pid in c:
                    got = _result(view.events, 1, l)
                    if is_bot(got):
                        notices[l] = ("abort", min(got.identified) if got.identified else 0)
                    else:
                        notices[l] = ("ok",)
            return {BROADCAST: notices} if notices else {}
        if r == 3:
            chosen = _chosen(view.events)
            if chosen is not None and view.pid in committees[chosen]:
                return {BROADCAST: _result(view.events, 1, chosen)}
        return {}

    def call_input(view, r, call):
        l = int(call.label.rsplit("-", 1)[1])
        h = committees[l].members.index(view.pid)
        vec = []
        for i in range(1, n + 1):
            if i == view.pid:
                vec.append(my_shares(view, l).shares[h])
            else:
                got = view.received(0, i)
                vec.append(got.get(l) if isinstance(got, dict) and l in got else None)
        return tuple(vec)

    def notice_counts(events) -> List[List[int]]:
        reported: List[List[int]] = [[] for _ in committees]
        for sender, notices in _broadcasts(events, 2).items():
            if not isinstance(notices, dict):
                continue
            for l, note in notices.items():
                if 0 <= l < len(committees) and sender in committees[l] and note and note[0] == "abort":
                    reported[l].append(note[1])
        return reported

    def _chosen(events) -> Optional[int]:
        reported = notice_counts(events)
        for l in range(len(committees)):
            if len(reported[l]) <= thresholds[l]:
                return l
        return None

    def output(view):
        chosen = _chosen(view.events)
        if chosen is None:
            if not identify:
                return Bot()
            return Bot(frozenset(_plurality(ids) for ids in notice_counts(view.events)))
        c = committees[chosen]
        opened = _broadcasts(view.events, 3)
        payloads = tuple(opened.get(m) if opened.get(m) is not ABSENT else None for m in c.members)
        reps = sharing.mac_repetitions(sharing.DEFAULT_MAC_LAMBDA, secret_len) if scheme is Scheme.ECSS_MAC else 0
        try:
            shares = ShareSet(scheme, len(c), thresholds[chosen], payloads, secret_len, reps)
            return decode_int(sharing.ecss_recon(shares))
        except ReconstructionFailure:
            return Bot()

    rounds = (
        CommunicationRound("share-inputs"),
        FunctionalityRound(tuple(
            Call(c, f, tp, input_parties=c.members, recipients=c.members, label=f"inner-{l}")
            for l, (c, f) in enumerate(zip(committees, inner))
        ), "inner"),
        CommunicationRound("notices"),
        CommunicationRound("open-output"),
    )
    name = "abort-to-ridfair" if identify else "abort-to-rfair"
    return ProtocolSpec(n, rounds, FunctionBehavior(send=send, call_input=call_input, output=output), name)


def abort_to_rfair(fn: Callable[[Sequence[int]], int], n: int, committees: Sequence[Committee],
                   **kw) -> ProtocolSpec:
    """Security with abort to fairness with committee abort (no identities)."""
    return compile_abort_to_ridfair_hm(fn, n, committees, identify=False, **kw)


# ------------------------------------------------------------ fair -> restricted id-fair, no input

@dataclass(frozen=True)
class BroadcastSubprotocol:
    """A committee protocol in which every message is broadcast.

    ``message(member, randomness, transcript, k)`` is member's k-th message
    and ``output(member, randomness, transcript)`` its output, where
    ``transcript`` is a tuple with one sorted (member, payload) tuple per
    completed round.
    """

    rounds: int
    message: Callable[[int, int, Tuple[Any, ...], int], Any]
    output: Callable[[int, int, Tuple[Any, ...]], Any]
    name: str = "inner"


def xor_coin_subprotocol() -> BroadcastSubprotocol:
    """Two rounds: members announce one random bit, then echo the parity seen."""

    def message(member, randomness, transcript, k):
        if k == 0:
            return randomness & 1
        parity = 0
        for _, bit in transcript[0]:
            parity ^= bit
        return ("parity", parity)

    def output(member, randomness, transcript):
        parity = 0
        for _, bit in transcript[0]:
            parity ^= bit
        return parity

    return BroadcastSubprotocol(2, message, output, "xor-coin")


def compile_fair_to_ridfair_noinput(committee: Committee, n: int,
                                    inner: Optional[BroadcastSubprotocol] = None) -> ProtocolSpec:
    """Committed randomness, broadcast-only execution, proved output claims.

    Round 0: f_augct gives each member committed randomness (abort names a
    member).  Rounds 1..R: the inner protocol with broadcast messages; a
    missing message ends the run with an abort naming the lowest silent
    member.  Round R+1: each member proves its output claim in zero knowledge;
    the parties output the claim of the lowest member whose proof verifies.
    """
    committee.check_within(n)
    inner = inner or xor_coin_subprotocol()
    members = committee.members
    first = 1
    proof_round = first + inner.rounds
    augct = f_augct(committee, n=n)

    def transcript_of(events, upto: int) -> Tuple[Any, ...]:
        out = []
        for k in range(upto):
            sent = _broadcasts(events, first + k)
            out.append(tuple(sorted((m, sent[m]) for m in members if m in sent)))
        return tuple(out)

    def silent(events) -> Optional[int]:
        for k in range(inner.rounds):
            sent = _broadcasts(events, first + k)
            missing = [m for m in members if sent.get(m, ABSENT) is ABSENT]
            if missing:
                return missing[0]
        return None

    def setup(events):
        return _result(events, 0)

    def recompute(member, randomness, transcript):
        return inner.output(member, randomness, transcript)

    def make_zk(member: int, transcript) -> FunctionalitySpec:
        def evaluate(inputs, coins, state):
            given = inputs.get(member)
            if not isinstance(given, tuple) or len(given) != 3:
                return (member, ABSENT, None, 0)
            claim, commitment, witness = given
            statement = {"claim": claim, "randomness_commitment": commitment, "recompute": recompute,
                         "member": member, "transcript": transcript}
            return (member, claim, commitment, int(relation_exec(statement, witness)))

        return FunctionalitySpec(f"zk_exec_{member}", evaluate, default_input=None)

    def proof_calls(public, r):
        if is_bot(setup(public)) or silent(public) is not None:
            return ()
        transcript = transcript_of(public, inner.rounds)
        return tuple(Call(Committee((m,)), make_zk(m, transcript), TrustedPartyType.full(), label=f"prove-{m}")
                     for m in members)

    def received_setup(view):
        got = setup(view.events)
        return got if isinstance(got, tuple) and len(got) == 2 else None

    def send(view, r):
        if view.pid not in committee or not first <= r < proof_round:
            return {}
        got = received_setup(view)
        if got is None:
            return {}
        k = r - first
        if silent_before(view.events, k):
            return {}
        return {BROADCAST: inner.message(view.pid, got[0][0], transcript_of(view.events, k), k)}

    def silent_before(events, k):
        for j in range(k):
            sent = _broadcasts(events, first + j)
            if any(sent.get(m, ABSENT) is ABSENT for m in members):
                return True
        return False

    def call_input(view, r, call):
        if r == 0:
            return None
        (randomness, opening), public = received_setup(view)
        claim = inner.output(view.pid, randomness, transcript_of(view.events, inner.rounds))
        return (claim, dict(public)[view.pid], {"randomness": randomness, "opening": opening})

    def output(view):
        got = setup(view.events)
        if is_bot(got):
            return got
        lost = silent(view.events)
        if lost is not None:
            return Bot(frozenset({lost}))
        commitments = dict(got[1])
        for idx, value in sorted(_results(view.events, proof_round).items()):
            member, claim, commitment, ok = value
            # the statement must name the commitment this party received
            if ok and commitments.get(member) == commitment:
                return claim
        return Bot(frozenset({members[0]}))

    rounds = (
        (FunctionalityRound((Call(committee, augct, TrustedPartyType.restricted_id_abort((committee,)),
                                  input_parties=members, label="augct"),), "augct"),)
        + tuple(CommunicationRound(f"{inner.name}-{k}") for k in range(inner.rounds))
        + (FunctionalityRound(proof_calls, "prove"),)
    )
    return ProtocolSpec(n, rounds, FunctionBehavior(send=send, call_input=call_input, output=output),
                        f"fair-to-ridfair[{inner.name}]")


# ------------------------------------------------------------ fair -> restricted id-fair, with input

def compile_fair_to_ridfair_withinput(fn: Callable[[Sequence[int]], int], n: int,
                                      committees: Sequence[Committee],
                                      defaults: Optional[Sequence[int]] = None) -> ProtocolSpec:
    """Input commitments, consistent XOR sharings, then one fair call per
    committee in turn.

    Round 0: party i broadcasts a commitment to x_i and to every XOR share it
    deals (one sharing per committee) and sends each member its share with
    the opening.  Round 1: every party proves the sharing consistent (relation
    enc); a party without a valid proof is excluded and its input hard-wired
    to the default.  Rounds 2..: committee l calls f_in with identifiable
    fairness unless it contains an identified party; an abort or a bad
    opening adds the named member to J.  If no committee delivers, the
    parties output an abort naming J.
    """
    committees = tuple(committees)
    if not committees:
        raise SpecError("need at least one committee")
    for c in committees:
        c.check_within(n)
    defaults = tuple(defaults) if defaults is not None else (0,) * n
    first_call = 2
    block = range(first_call, first_call + len(committees))

    def dealing(view: View):
        coins = view.coins.child("deal")
        value = int(view.input or 0)
        rho = coins.draw(("rho",), 1 << OPENING_BITS)
        shares: Dict[Tuple[int, int], Tuple[int, int]] = {}
        for l, c in enumerate(committees):
            parts = sharing.xor_split(value, len(c), SHARE_BITS, Counter(coins.child("split", l)))
            for h, s in enumerate(parts, start=1):
                shares[(l, h)] = (s, coins.draw(("share-rho", l, h), 1 << OPENING_BITS))
        public = (commit(value, rho), tuple(sorted((k, commit(s, o)) for k, (s, o) in shares.items())))
        return value, rho, shares, public

    def announced(events) -> Dict[int, Any]:
        return _broadcasts(events, 0)

    def make_zk(prover: int, public) -> FunctionalitySpec:
        def evaluate(inputs, coins, state):
            witness = inputs.get(prover)
            if not isinstance(public, tuple) or len(public) != 2:
                return (prover, 0)
            input_com, share_coms = public
            coms = dict(share_coms)
            try:
                statement = {"input_commitment": input_com,
                             "share_commitments": [[coms[(l, h)] for h in range(1, len(c) + 1)]
                                                   for l, c in enumerate(committees)]}
            except (KeyError, TypeError):
                return (prover, 0)
            return (prover, int(relation_enc(statement, witness)) if isinstance(witness, dict) else 0)

        return FunctionalitySpec(f"zk_enc_{prover}", evaluate, default_input=None)

    def proof_calls(public_log, r):
        coms = announced(public_log)
        return tuple(Call(Committee((i,)), make_zk(i, coms[i]), TrustedPartyType.full(), label=f"prove-enc-{i}")
                     for i in range(1, n + 1) if coms.get(i, ABSENT) is not ABSENT)

    def excluded(events) -> Dict[int, int]:
        ok = {v[0] for v in _results(events, 1).values() if isinstance(v, tuple) and v[1] == 1}
        return {i: defaults[i - 1] for i in range(1, n + 1) if i not in ok}

    def state(events):
        identified: List[int] = []
        for r in block:
            got = _result(events, r)
            if got is ABSENT:
                continue
            if is_bot(got):
                identified.extend(sorted(got.identified))
            else:
                return got, identified
        return ABSENT, identified

    def committee_call(l: int):
        c = committees[l]

        def calls(public_log, r):
            value, identified = state(public_log)
            if value is not ABSENT or set(identified) & c.as_set():
                return ()
            coms = announced(public_log)
            hard = excluded(public_log)
            table = {}
            for i in range(1, n + 1):
                if i in hard:
                    continue
                share_coms = dict(coms[i][1])
                for h in range(1, len(c) + 1):
                    table[(i, h)] = share_coms[(l, h)]
            f = make_f_in(fn, n, c.members, table, hard)
            return (Call(c, f, TrustedPartyType.id_fair(), input_parties=c.members, label=f"f_in-{l}"),)

        return FunctionalityRound(calls, f"committee-{l}")

    def send(view, r):
        if r != 0:
            return {}
        value, rho, shares, public = dealing(view)
        out: Dict[int, Any] = {BROADCAST: public}
        for l, c in enumerate(committees):
            for h, member in enumerate(c.members, start=1):
                if member != view.pid:
                    out.setdefault(member, {})[l] = shares[(l, h)]
        return out

    def call_input(view, r, call):
        if r == 1:
            value, rho, shares, public = dealing(view)
            return {"value": value, "opening": rho,
                    "shares": [[shares[(l, h)][0] for h in range(1, len(c) + 1)] for l, c in enumerate(committees)],
                    "share_openings": [[shares[(l, h)][1] for h in range(1, len(c) + 1)]
                                       for l, c in enumerate(committees)]}
        l = r - first_call
        h = committees[l].members.index(view.pid) + 1
        vec = []
        for i in range(1, n + 1):
            if i == view.pid:
                vec.append(dealing(view)[2][(l, h)])
            else:
                got = view.received(0, i)
                vec.append(got.get(l) if isinstance(got, dict) else None)
        return tuple(vec)

    def output(view):
        value, identified = state(view.events)
        if value is not ABSENT:
            return value
        return Bot(frozenset(identified))

    rounds = (
        (CommunicationRound("commit-and-deal"), FunctionalityRound(proof_calls, "prove-sharing"))
        + tuple(committee_call(l) for l in range(len(committees)))
    )
    return ProtocolSpec(n, rounds, FunctionBehavior(send=send, call_input=call_input, output=output),
                        "fair-to-ridfair-with-input")
