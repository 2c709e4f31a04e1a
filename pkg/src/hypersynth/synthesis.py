"""Controller family synthesis by abstraction refinement.

The engine answers: does the family hold a tuple of controllers satisfying
an instantiated hyperproperty, and in complete or optimal modes, which
members or which maximally different pair.

A family node (box) is analysed atom by atom: each comparison side gets a
value interval from optimistic and pessimistic controllers of the node's
restricted MDP.  Atoms decided on the whole box simplify the formula; a box
whose residual collapses is classified wholesale.  Open boxes produce
candidate members from the extremal witnesses, which are verified exactly
before being reported.  Undecided boxes are split on the parameter class
the witnesses disagree on most, weighted by expected-visits impact, and the
pieces go back on a LIFO stack.  Every verdict that leaves the engine rests
on exact member checks or on interval bounds with a guard band, never on
iteration noise.

The hybrid method additionally checks one concrete member per open box and,
when that member violates a mandatory reachability comparison, prunes away
the whole sub-box sharing the violation's local structure (see
counterexamples).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product

from .analysis import (
    DEFAULT_TOL,
    INF,
    check_mc,
    expected_reward,
    expected_visits,
    extremal_reach,
    extremal_reward,
    guard_band,
    reach_probs,
    _mc_forward_reach,
)
from .counterexamples import CeSide, complement_boxes, conflict_classes, grow_conflict
from .errors import LimitExceeded, SpecError
from .family import (
    EMPTY_ASSIGNMENT,
    FamilyNode,
    ParameterSpace,
    PartialAssignment,
    build_parameter_space,
    consistency_conflicts,
    controller_box,
    immediate_impact,
    induce,
    node_restrict,
    root_node,
    split_node,
)
from .formulas import (
    FALSE,
    TRUE,
    Atom,
    InstantiatedFormula,
    Query,
    f_and,
    f_atom,
    f_or,
    mandatory_atoms,
    substitute,
)
from .model import Controller, Mdp, impose
from .specs import DEFAULT_EQ_EPS, HyperSpec, check_against_model, validate_spec
from .textio import format_atom

MODES = ("feasibility", "complete", "optimal")
METHODS = ("ar", "hybrid", "oracle")

# Candidate combinations tried per open box before splitting.
COMPOSE_CAP = 8


# ---------------------------------------------------------------------------
# Quantifier instantiation


def instantiate(spec: HyperSpec, m: Mdp, eps_eq: float = DEFAULT_EQ_EPS) -> InstantiatedFormula:
    """Expand state quantifiers into a quantifier-free formula.

    forall becomes conjunction and exists disjunction over the domain, the
    first quantifier outermost.  Negation is eliminated by flipping
    comparisons, and (in)equality is expanded into two one-sided atoms with
    the tolerance folded into the offset.  Atoms are deduplicated; the
    table keeps first-occurrence order.
    """

    validate_spec(spec)
    check_against_model(spec, m)

    atoms: list[Atom] = []
    index: dict[Atom, int] = {}

    def emit(atom: Atom):
        i = index.get(atom)
        if i is None:
            i = len(atoms)
            atoms.append(atom)
            index[atom] = i
        return f_atom(i)

    def side_of(x, env):
        if isinstance(x, (int, float)):
            return float(x)
        slot, state = env[x.var]
        return Query(x.kind, slot, state, x.target)

    def atom_node(sa, env, neg):
        a = side_of(sa.left, env)
        b = side_of(sa.right, env)
        rel = sa.rel
        if rel == ">":
            a, b, rel = b, a, "<"
        elif rel == ">=":
            a, b, rel = b, a, "<="
        if rel == "=":
            eps = sa.eps if sa.eps is not None else eps_eq
            if neg:
                return f_or([
                    emit(Atom(b, a, strict=True, offset=-eps)),
                    emit(Atom(a, b, strict=True, offset=-eps)),
                ])
            return f_and([
                emit(Atom(a, b, strict=False, offset=eps)),
                emit(Atom(b, a, strict=False, offset=eps)),
            ])
        if neg:
            # not (a <= b) is b < a; not (a < b) is b <= a
            return emit(Atom(b, a, strict=(rel == "<=")))
        return emit(Atom(a, b, strict=(rel == "<")))

    def tr(node, env, neg):
        tag = node[0]
        if tag == "not":
            return tr(node[1], env, not neg)
        if tag == "atom":
            return atom_node(node[1], env, neg)
        kids = [tr(c, env, neg) for c in node[1]]
        if (tag == "and") != neg:
            return f_and(kids)
        return f_or(kids)

    def expand(qi, env):
        if qi == len(spec.quantifiers):
            return tr(spec.formula, env, False)
        q = spec.quantifiers[qi]
        kids = []
        for s in q.domain:
            env2 = dict(env)
            env2[q.var] = (q.controller, s)
            kids.append(expand(qi + 1, env2))
        return f_and(kids) if q.kind == "forall" else f_or(kids)

    root = expand(0, {})
    return InstantiatedFormula(tuple(atoms), root)


# ---------------------------------------------------------------------------
# Interval analysis of one box


@dataclass(frozen=True)
class SideBounds:
    """Extremal value vectors of one (slot, kind, target) side over a box,
    with witness controllers in the original model's ordinals."""

    min_values: object
    max_values: object
    min_controller: Controller
    max_controller: Controller


@dataclass
class _SideRecord:
    query: Query
    witness: Controller
    relevant: frozenset
    conflicts: dict


@dataclass
class AtomVerdict:
    index: int
    case: str  # "allsat" | "allunsat" | "open"
    tag: str   # table row that fired: "1".."5", or "0" for none
    left: tuple[float, float]
    right: tuple[float, float]
    candidates: tuple[PartialAssignment, ...] = ()
    disagreements: tuple[tuple[int, int, int], ...] = ()
    conflict_actions: dict = field(default_factory=dict)
    records: tuple[_SideRecord, ...] = ()


class NodeAnalyzer:
    """Per-box interval bounds and atom classification, with caching."""

    def __init__(self, m: Mdp, space: ParameterSpace, formula: InstantiatedFormula, tol: float):
        self.m = m
        self.space = space
        self.formula = formula
        self.tol = tol
        self.guard = guard_band(tol)
        self._bounds: dict = {}

    def side_bounds(self, node: FamilyNode, q: Query) -> SideBounds:
        key = (node.domains, q.slot, q.kind, q.target)
        got = self._bounds.get(key)
        if got is not None:
            return got
        sub = node_restrict(self.m, node, q.slot)
        tgt = sub.target(q.target)
        solve = extremal_reach if q.kind == "reach" else extremal_reward
        lo = solve(sub, tgt, "min", self.tol)
        hi = solve(sub, tgt, "max", self.tol)
        n = sub.num_states
        got = SideBounds(
            lo.values,
            hi.values,
            Controller(tuple(sub.original_ordinal(s, lo.witness[s]) for s in range(n))),
            Controller(tuple(sub.original_ordinal(s, hi.witness[s]) for s in range(n))),
        )
        self._bounds[key] = got
        return got

    def _side_record(self, node: FamilyNode, q: Query, witness: Controller) -> _SideRecord:
        mc = impose(self.m, witness)
        relevant = frozenset(_mc_forward_reach(mc, q.state))
        conflicts = consistency_conflicts(self.space, q.slot, witness, relevant)
        return _SideRecord(q, witness, relevant, conflicts)

    def atom_verdict(self, node: FamilyNode, i: int) -> AtomVerdict:
        atom = self.formula.atoms[i]
        off = atom.offset
        g = self.guard

        def interval(side):
            if isinstance(side, Query):
                sb = self.side_bounds(node, side)
                return (float(sb.min_values[side.state]), float(sb.max_values[side.state])), sb
            return (float(side), float(side)), None

        (lo_l, hi_l), sb_l = interval(atom.left)
        (lo_r, hi_r), sb_r = interval(atom.right)

        if atom.strict:
            if hi_l < lo_r + off - g:
                return AtomVerdict(i, "allsat", "1", (lo_l, hi_l), (lo_r, hi_r))
            if lo_l >= hi_r + off + g:
                return AtomVerdict(i, "allunsat", "2", (lo_l, hi_l), (lo_r, hi_r))
        else:
            if hi_l <= lo_r + off - g:
                return AtomVerdict(i, "allsat", "1", (lo_l, hi_l), (lo_r, hi_r))
            if lo_l > hi_r + off + g:
                return AtomVerdict(i, "allunsat", "2", (lo_l, hi_l), (lo_r, hi_r))

        # open: mine the satisfaction-directed witnesses for candidates
        records = []
        boxes = {}
        conflict_actions: dict = {}
        for side_name, q, sb, wit_attr in (
            ("left", atom.left, sb_l, "min_controller"),
            ("right", atom.right, sb_r, "max_controller"),
        ):
            if not isinstance(q, Query):
                boxes[side_name] = EMPTY_ASSIGNMENT
                continue
            rec = self._side_record(node, q, getattr(sb, wit_attr))
            records.append(rec)
            if rec.conflicts:
                boxes[side_name] = None
                for k, acts in rec.conflicts.items():
                    merged = set(conflict_actions.get(k, ())) | set(acts)
                    conflict_actions[k] = tuple(sorted(merged))
            else:
                boxes[side_name] = controller_box(self.space, q.slot, rec.witness, rec.relevant)

        # margin requirements: a strict atom's candidate must be able to
        # satisfy strictly, not just touch the bound
        def sat_possible(a, b):
            return a < b if atom.strict else a <= b

        tag = "0"
        candidates: tuple[PartialAssignment, ...] = ()
        disagreements: tuple[tuple[int, int, int], ...] = ()
        box_l, box_r = boxes.get("left"), boxes.get("right")
        cond5 = lo_r + off <= lo_l <= hi_r + off <= hi_l and sat_possible(lo_l, hi_r + off)
        cond3 = sat_possible(lo_l, lo_r + off)
        cond4 = sat_possible(hi_l, hi_r + off)
        if cond5 and box_l is not None and box_r is not None:
            merged = box_l.merge(box_r)
            if merged is not None:
                tag, candidates = "5", (merged,)
            else:
                tag = "5"
                left_fix, right_fix = box_l.as_dict(), box_r.as_dict()
                for k in sorted(left_fix):
                    if k in right_fix and right_fix[k] != left_fix[k]:
                        disagreements = ((k, left_fix[k], right_fix[k]),)
                        break
                picks = [b for c, b in ((cond3, box_l), (cond4, box_r)) if c and b is not None]
                candidates = tuple(dict.fromkeys(picks))
        elif cond3 and box_l is not None:
            tag, candidates = "3", (box_l,)
        elif cond4 and box_r is not None:
            tag, candidates = "4", (box_r,)

        return AtomVerdict(
            i, "open", tag, (lo_l, hi_l), (lo_r, hi_r),
            candidates, disagreements, conflict_actions, tuple(records),
        )

    # -- split scoring -------------------------------------------------

    def score_conflicts(self, node: FamilyNode, verdict: AtomVerdict) -> dict:
        """Impact spread per conflicting class, from the witness that
        exhibited the conflict; the larger, the more the choice matters."""

        scores: dict = {}
        for rec in verdict.records:
            if not rec.conflicts:
                continue
            q = rec.query
            mc = impose(self.m, rec.witness)
            visits = expected_visits(mc, q.state)
            tgt = mc.target(q.target)
            values = reach_probs(mc, tgt) if q.kind == "reach" else expected_reward(mc, tgt)
            gamma = immediate_impact(self.m, visits, values, q.kind)
            for k in rec.conflicts:
                states = [s for slot, s in self.space.members[k] if slot == q.slot]
                spreads = [
                    _spread([gamma[(s, a)] for a in node.domain(k)]) for s in states
                ]
                score = sum(spreads) / len(spreads) if spreads else 0.0
                if k not in scores or score > scores[k]:
                    scores[k] = score
        return scores


def _spread(vals) -> float:
    hi, lo = max(vals), min(vals)
    if hi == lo:
        return 0.0
    if hi == INF:
        return INF
    return hi - lo


def _compose(residual, verdicts, cap: int = COMPOSE_CAP):
    """Candidate sub-boxes whose members plausibly satisfy the residual:
    conjunctions merge compatible candidates, disjunctions concatenate."""

    tag = residual[0]
    if residual == TRUE:
        return [EMPTY_ASSIGNMENT]
    if tag == "atom":
        return list(verdicts[residual[1]].candidates)
    if tag == "and":
        acc = [EMPTY_ASSIGNMENT]
        for child in residual[1]:
            step = []
            for pa in acc:
                for cb in _compose(child, verdicts, cap):
                    merged = pa.merge(cb)
                    if merged is not None and merged not in step:
                        step.append(merged)
                    if len(step) >= cap:
                        break
                if len(step) >= cap:
                    break
            if not step:
                return []
            acc = step
        return acc[:cap]
    if tag == "or":
        out = []
        for child in residual[1]:
            for cb in _compose(child, verdicts, cap):
                if cb not in out:
                    out.append(cb)
            if len(out) >= cap:
                break
        return out[:cap]
    return []


# ---------------------------------------------------------------------------
# Distance objective (optimal mode)


def distance_pairs(space: ParameterSpace):
    """Mirror the two controllers' parameter classes by member state sets.

    The distance between two realisations is the number of mirrored pairs
    assigned different actions.  Requires exactly two controllers whose
    unshared classes mirror each other; shared (same-merged) classes can
    never differ and are skipped.
    """

    if space.n_controllers != 2:
        raise SpecError("the distance objective needs exactly two controllers")
    sides: tuple[dict, dict] = ({}, {})
    for k, members in enumerate(space.members):
        slots = {i for i, _ in members}
        if len(slots) == 1:
            (slot,) = slots
            sides[slot][frozenset(s for _, s in members)] = k
    if set(sides[0]) != set(sides[1]):
        raise SpecError("controller structures do not mirror; distance undefined")
    keys = sorted(sides[0], key=min)
    return tuple((sides[0][key], sides[1][key]) for key in keys)


def realisation_distance(realisation, pairs) -> int:
    return sum(1 for k0, k1 in pairs if realisation[k0] != realisation[k1])


def node_distance_bound(node: FamilyNode, pairs) -> int:
    bound = 0
    for k0, k1 in pairs:
        d0, d1 = node.domains[k0], node.domains[k1]
        if len(d0) > 1 or len(d1) > 1 or d0[0] != d1[0]:
            bound += 1
    return bound


def max_distance_completion(node: FamilyNode, pairs):
    """A member of the node attaining the node's distance bound."""

    real = list(node.first_realisation())
    for k0, k1 in pairs:
        if real[k0] != real[k1]:
            continue
        alt = next((a for a in node.domains[k1] if a != real[k0]), None)
        if alt is not None:
            real[k1] = alt
            continue
        alt = next((a for a in node.domains[k0] if a != real[k1]), None)
        if alt is not None:
            real[k0] = alt
    return tuple(real)


# ---------------------------------------------------------------------------
# Outcome


@dataclass
class SynthesisOutcome:
    verdict: str  # "feasible" | "unfeasible"
    realisation: tuple | None
    witness: tuple | None  # Controllers, one per slot
    satisfying: tuple = ()  # complete mode: disjoint boxes of members
    optimal_value: int | None = None
    stats: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.verdict == "feasible"


# ---------------------------------------------------------------------------
# The synthesis loop


class _Synthesizer:
    def __init__(self, m, spec, mode, method, tol, eps_eq, max_iters, time_limit):
        self.m = m
        self.spec = spec
        self.mode = mode
        self.method = method
        self.tol = tol
        self.guard = guard_band(tol)
        self.space = build_parameter_space(m, spec.n_controllers, spec.constraints)
        self.formula = instantiate(spec, m, eps_eq)
        self.pairs = distance_pairs(self.space) if mode == "optimal" else None
        self.max_iters = max_iters
        self.time_limit = time_limit
        self.analyzer = NodeAnalyzer(m, self.space, self.formula, tol)
        self.act_counts = [m.num_actions(s) for s in range(m.num_states)]

        self.t0 = time.perf_counter()
        self.iterations = 0
        self.explored = 0
        self.decided = 0
        self.splits = 0
        self.ce_prunes = 0
        self.atom_report = []
        self.sat_boxes: list[FamilyNode] = []
        self.incumbent: int | None = None
        self.incumbent_real = None

    # -- bookkeeping ----------------------------------------------------

    def _elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def _check_limits(self):
        if self.max_iters is not None and self.iterations >= self.max_iters:
            exc = LimitExceeded(f"iteration limit {self.max_iters} reached")
            exc.stats = self._stats("unknown")
            raise exc
        if self.time_limit is not None and self._elapsed() > self.time_limit:
            exc = LimitExceeded(f"time limit {self.time_limit}s exceeded")
            exc.stats = self._stats("unknown")
            raise exc

    def _stats(self, verdict, realisation=None, witness=None, optimal_value=None):
        size = self.space.family_size()
        out = {
            "verdict": verdict,
            "mode": self.mode,
            "method": self.method,
            "family_size": size,
            "iterations": self.iterations,
            "explored": self.explored,
            "explored_fraction": self.explored / size,
            "decided_families": self.decided,
            "avg_decided_family_size": (self.explored / self.decided) if self.decided else 0.0,
            "splits": self.splits,
            "ce_prunes": self.ce_prunes,
            "wall_time_s": self._elapsed(),
            "limit": None,
            "witness": None,
            "optimal_value": optimal_value,
            "atoms": list(self.atom_report),
        }
        if witness is not None:
            out["witness"] = {
                "realisation": list(realisation),
                "controllers": [list(c.choices) for c in witness],
            }
        if self.mode == "complete":
            out["satisfying_count"] = sum(b.size() for b in self.sat_boxes)
        return out

    def _outcome(self, verdict, realisation=None, witness=None, optimal_value=None):
        return SynthesisOutcome(
            verdict,
            realisation,
            witness,
            tuple(self.sat_boxes),
            optimal_value,
            self._stats(verdict, realisation, witness, optimal_value),
        )

    # -- member checks ----------------------------------------------------

    def _check(self, realisation):
        ctrls = tuple(
            induce(self.space, realisation, i) for i in range(self.space.n_controllers)
        )
        mcs = tuple(impose(self.m, c) for c in ctrls)
        return check_mc(mcs, self.formula), ctrls, mcs

    def _note_sat(self, realisation):
        """Optimal mode: fold a verified member into the incumbent."""

        d = realisation_distance(realisation, self.pairs)
        if self.incumbent is None or d > self.incumbent:
            self.incumbent = d
            self.incumbent_real = tuple(realisation)

    # -- the loop ----------------------------------------------------------

    def run(self) -> SynthesisOutcome:
        stack = [root_node(self.space)]
        while stack:
            self._check_limits()
            node = stack.pop()
            self.iterations += 1

            if self.mode == "optimal" and self.incumbent is not None:
                if node_distance_bound(node, self.pairs) <= self.incumbent:
                    self.explored += node.size()
                    self.decided += 1
                    continue

            if node.size() == 1:
                done = self._handle_singleton(node)
                if done is not None:
                    return done
                continue

            verdicts = {
                i: self.analyzer.atom_verdict(node, i)
                for i in range(len(self.formula.atoms))
            }
            if self.iterations == 1:
                self.atom_report = [
                    {
                        "atom": format_atom(self.formula.atoms[i]),
                        "case": v.case,
                        "tag": v.tag,
                        "lb_left": v.left[0],
                        "ub_left": v.left[1],
                        "lb_right": v.right[0],
                        "ub_right": v.right[1],
                    }
                    for i, v in sorted(verdicts.items())
                ]

            forced = {}
            for i, v in verdicts.items():
                if v.case == "allsat":
                    forced[i] = True
                elif v.case == "allunsat":
                    forced[i] = False
            residual = substitute(self.formula.root, forced)

            if residual == FALSE:
                self.explored += node.size()
                self.decided += 1
                continue

            if residual == TRUE:
                done = self._handle_allsat(node, stack)
                if done is not None:
                    return done
                continue

            done = self._handle_open(node, residual, verdicts, stack)
            if done is not None:
                return done

        return self._finish()

    def _finish(self) -> SynthesisOutcome:
        if self.mode == "complete":
            if self.sat_boxes:
                real = self.sat_boxes[0].first_realisation()
                _, ctrls, _ = self._check(real)
                return self._outcome("feasible", real, ctrls)
            return self._outcome("unfeasible")
        if self.mode == "optimal":
            if self.incumbent is not None:
                _, ctrls, _ = self._check(self.incumbent_real)
                return self._outcome(
                    "feasible", self.incumbent_real, ctrls, self.incumbent
                )
            return self._outcome("unfeasible")
        return self._outcome("unfeasible")

    def _handle_singleton(self, node):
        real = node.first_realisation()
        res, ctrls, _ = self._check(real)
        self.explored += 1
        self.decided += 1
        if not res.holds:
            return None
        if self.mode == "feasibility":
            return self._outcome("feasible", real, ctrls)
        if self.mode == "complete":
            self.sat_boxes.append(node)
            return None
        self._note_sat(real)
        return None

    def _handle_allsat(self, node, stack):
        """Interval analysis certified every member; recheck one and act."""

        if self.mode == "complete":
            res, _, _ = self._check(node.first_realisation())
            if res.holds:
                self.sat_boxes.append(node)
                self.explored += node.size()
                self.decided += 1
                return None
            self._push_fallback_split(node, stack)
            return None
        if self.mode == "optimal":
            real = max_distance_completion(node, self.pairs)
            res, _, _ = self._check(real)
            if res.holds:
                self._note_sat(real)
                self.explored += node.size()
                self.decided += 1
                return None
            self._push_fallback_split(node, stack)
            return None
        real = node.first_realisation()
        res, ctrls, _ = self._check(real)
        if res.holds:
            return self._outcome("feasible", real, ctrls)
        self._push_fallback_split(node, stack)
        return None

    def _handle_open(self, node, residual, verdicts, stack):
        if self.mode != "complete":
            for pa in _compose(residual, verdicts):
                real = pa.complete(node)
                res, ctrls, _ = self._check(real)
                if not res.holds:
                    continue
                if self.mode == "feasibility":
                    return self._outcome("feasible", real, ctrls)
                self._note_sat(real)
            if self.mode == "optimal" and self.incumbent is not None:
                if node_distance_bound(node, self.pairs) <= self.incumbent:
                    self.explored += node.size()
                    self.decided += 1
                    return None

        if self.method == "hybrid":
            real = node.first_realisation()
            res, ctrls, mcs = self._check(real)
            if res.holds:
                if self.mode == "feasibility":
                    return self._outcome("feasible", real, ctrls)
                if self.mode == "optimal":
                    self._note_sat(real)
            else:
                rest = self._try_conflict_prune(node, residual, real, res, mcs)
                if rest is not None:
                    stack.extend(rest)
                    return None

        k, actions = self._choose_split(node, residual, verdicts)
        self.splits += 1
        stack.extend(split_node(node, k, actions))
        return None

    def _push_fallback_split(self, node, stack):
        for k, dom in enumerate(node.domains):
            if len(dom) > 1:
                self.splits += 1
                stack.extend(split_node(node, k, dom))
                return
        raise AssertionError("fallback split on a singleton box")

    # -- refinement choice ---------------------------------------------

    def _choose_split(self, node, residual, verdicts):
        open_atoms = [
            i for i in self.formula.atom_order()
            if verdicts[i].case == "open"
        ]
        for i in open_atoms:
            v = verdicts[i]
            if v.conflict_actions:
                scores = self.analyzer.score_conflicts(node, v)
                k = max(sorted(v.conflict_actions), key=lambda kk: scores.get(kk, 0.0))
                return k, v.conflict_actions[k]
        for i in open_atoms:
            v = verdicts[i]
            if v.disagreements:
                k, a_left, a_right = v.disagreements[0]
                return k, (a_left, a_right)
        for k, dom in enumerate(node.domains):
            if len(dom) > 1:
                return k, dom
        raise AssertionError("split requested on a singleton box")

    # -- hybrid counterexamples ------------------------------------------

    def _try_conflict_prune(self, node, residual, real, res, mcs):
        """Certify the checked member's violation for a sub-box and carve
        it out.  Returns the complement boxes, or None when no mandatory
        reachability comparison yields a certificate."""

        best = None
        for i in sorted(mandatory_atoms(residual)):
            if res.atom_values[i][2]:
                continue  # this atom holds; not the reason for failure
            atom = self.formula.atoms[i]
            if any(
                isinstance(side, Query) and side.kind == "reward"
                for side in (atom.left, atom.right)
            ):
                continue
            sides = []
            slots = []
            for side, attr in ((atom.left, "min_values"), (atom.right, "max_values")):
                if not isinstance(side, Query):
                    sides.append(float(side))
                    slots.append(None)
                    continue
                sb = self.analyzer.side_bounds(node, side)
                sides.append(
                    CeSide(
                        mcs[side.slot],
                        side.state,
                        frozenset(self.m.label_states(side.target)),
                        getattr(sb, attr),
                    )
                )
                slots.append(side.slot)
            grown = grow_conflict(sides[0], sides[1], atom.offset, self.guard, self.act_counts)
            if grown is None:
                continue
            classes = conflict_classes(
                self.space, node, slots[0], grown[0], slots[1], grown[1]
            )
            key = (len(classes), i)
            if best is None or key < best[0]:
                best = (key, classes)
        if best is None:
            return None
        agree, rest = complement_boxes(node, real, best[1])
        self.explored += agree.size()
        self.decided += 1
        self.ce_prunes += 1
        return rest

    # -- exhaustive enumeration ------------------------------------------

    def run_oracle(self) -> SynthesisOutcome:
        first = None
        for real in product(*self.space.domains):
            self._check_limits()
            self.iterations += 1
            res, ctrls, _ = self._check(real)
            self.explored += 1
            self.decided += 1
            if not res.holds:
                continue
            if self.mode == "feasibility":
                return self._outcome("feasible", real, ctrls)
            if self.mode == "complete":
                self.sat_boxes.append(
                    FamilyNode(self.space, tuple((a,) for a in real))
                )
                if first is None:
                    first = (real, ctrls)
            else:
                self._note_sat(real)
        if self.mode == "complete" and first is not None:
            return self._outcome("feasible", first[0], first[1])
        if self.mode == "optimal" and self.incumbent is not None:
            _, ctrls, _ = self._check(self.incumbent_real)
            return self._outcome("feasible", self.incumbent_real, ctrls, self.incumbent)
        return self._outcome("unfeasible")


def synthesize(
    m: Mdp,
    spec: HyperSpec,
    *,
    mode: str = "feasibility",
    method: str = "ar",
    tol: float = DEFAULT_TOL,
    eps_eq: float = DEFAULT_EQ_EPS,
    max_iters: int | None = None,
    time_limit: float | None = None,
) -> SynthesisOutcome:
    """Decide the specification over the controller family of the model.

    mode picks the question: feasibility (one witness), complete (all
    satisfying members, as disjoint boxes), optimal (a satisfying pair of
    controllers differing in as many decisions as possible).  method picks
    the engine: "ar" pure interval refinement, "hybrid" adds member checks
    with counterexample pruning, "oracle" checks every member directly.
    """

    if mode not in MODES:
        raise SpecError(f"unknown mode {mode!r}")
    if method not in METHODS:
        raise SpecError(f"unknown method {method!r}")
    engine = _Synthesizer(m, spec, mode, method, tol, eps_eq, max_iters, time_limit)
    if method == "oracle":
        return engine.run_oracle()
    return engine.run()


def enumerate_satisfying(m: Mdp, spec: HyperSpec, eps_eq: float = DEFAULT_EQ_EPS):
    """All satisfying realisations, lexicographically.  Test oracle."""

    space = build_parameter_space(m, spec.n_controllers, spec.constraints)
    formula = instantiate(spec, m, eps_eq)
    out = []
    for real in product(*space.domains):
        ctrls = tuple(induce(space, real, i) for i in range(space.n_controllers))
        mcs = tuple(impose(m, c) for c in ctrls)
        if check_mc(mcs, formula).holds:
            out.append(real)
    return out
