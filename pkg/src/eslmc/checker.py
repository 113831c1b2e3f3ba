"""The model-checking problem, witness extraction and reports."""

from __future__ import annotations

import json
import multiprocessing
import time
from dataclasses import dataclass, field

from . import formula as f
from .evaluator import EvalConfig, Evaluator, universal_closure
from .model import Ecgm
from .strategy import Strategy

EXISTENTIAL = "existential"
UNIVERSAL = "universal"
NONE = "none"


def existential_closure(phi: f.Formula, agents) -> f.Formula:
    """Prefix one existential quantifier per free agent, in roster order."""
    fr = f.free_agents(phi, agents)
    names = [a for a in agents if a in fr]
    out = phi
    for k, a in reversed(list(enumerate(names, 1))):
        out = f.Exists(f"y{k}", a, out)
    return out


def leading_block(phi: f.Formula, kind) -> list:
    """The maximal chain of ``kind`` quantifiers at the root of ``phi``."""
    chain = []
    node = phi
    while isinstance(node, kind):
        chain.append(node)
        node = node.sub
    return chain


@dataclass
class Stats:
    states: int = 0
    windows: int = 0
    evaluations: int = 0
    branches: int = 0
    cache_hits: int = 0
    wall_time: float = 0.0


@dataclass
class Verdict:
    result: bool
    closure: str
    # variable -> strategy; witnesses when true under existential closure,
    # counterexample when false under universal closure
    witnesses: dict = field(default_factory=dict)
    counterexample: dict = field(default_factory=dict)
    stats: Stats = field(default_factory=Stats)


# -- parallel search --------------------------------------------------------------

def _search_worker(ev: Evaluator, node, s, chi, pending, counter, out):
    """Pull piece indexes from ``counter`` and report each verdict on ``out``."""
    try:
        while True:
            with counter.get_lock():
                k = counter.value
                counter.value += 1
            if k >= len(pending):
                break
            out.put(("ok", ev.search(node, s, chi, pending[k])))
    except BaseException as exc:  # reported to the parent, which re-raises
        out.put(("error", exc))
    out.put(("done", None))


def _parallel_verdict(ev: Evaluator, node, s, chi, jobs) -> bool:
    """Split the top quantifier block and search the pieces on ``jobs`` workers.

    Workers are killed as soon as one piece decides the block, so the
    result never depends on which worker finishes first.
    """
    universal = isinstance(node, f.Forall)
    decided, pending = ev.frontier(node, s, chi, want=4 * jobs)
    if any(v != universal for v in decided):
        return not universal
    if not pending:
        return universal
    ctx = multiprocessing.get_context("fork")
    counter = ctx.Value("l", 0)
    out = ctx.SimpleQueue()
    workers = [
        ctx.Process(target=_search_worker, args=(ev, node, s, chi, pending, counter, out), daemon=True)
        for _ in range(min(jobs, len(pending)))
    ]
    for p in workers:
        p.start()
    try:
        running = len(workers)
        while running:
            kind, value = out.get()
            if kind == "done":
                running -= 1
            elif kind == "error":
                raise value
            elif value != universal:
                return not universal
        return universal
    finally:
        for p in workers:
            p.kill()
        for p in workers:
            p.join()


# -- witnesses ----------------------------------------------------------------------

def _pin(ev: Evaluator, head, s, chi) -> dict:
    """Lexicographically least deciding tables for the block headed by ``head``.

    Slots are fixed variable by variable in canonical order. A known
    deciding branch is carried along: entries it leaves open or already
    sets to the least option are taken as is, and only its non-least
    entries are challenged by a fresh search with the smaller choice.
    """
    space = ev.space
    chain = leading_block(head, type(head))
    _, agents, binders = ev.block(head)
    tabs = list(ev.start(head))
    known = ev.decide(head, s, chi, tuple(tabs))
    if known is None:  # pragma: no cover - callers pass a decided block
        raise AssertionError("block is not decided")
    known = list(known)
    order = sorted(range(len(agents)), key=lambda k: chain.index(binders[k]))
    for k in order:
        i = agents[k]
        for slot, members in enumerate(space.slots[i]):
            w = members[0]
            opts = space.slot_options(i, slot)
            have = known[k][w]
            pick = opts[0] if have is None else have
            for a in opts:
                if a == pick:
                    break
                trial = list(tabs)
                trial[k] = space.set_choice(tabs[k], i, w, a)
                found = ev.decide(head, s, chi, tuple(trial))
                if found is not None:
                    pick, known = a, list(found)
                    break
            tabs[k] = space.set_choice(tabs[k], i, w, pick)
            known[k] = space.set_choice(known[k], i, w, pick)
    out = {}
    for node in chain:
        i = ev.model.agent_index(node.agent)
        k = agents.index(i)
        table = tabs[k] if binders[k] is node else space.least_table(i)
        out[node.var] = space.decode(i, table)
    return out


def model_check(
    model: Ecgm,
    phi: f.Formula,
    cfg: EvalConfig | None = None,
    closure: str = EXISTENTIAL,
    witness: bool = True,
    jobs: int = 1,
) -> Verdict:
    """Decide whether some assignment satisfies ``phi`` at the initial state.

    With ``closure="universal"`` decide instead whether every assignment
    does. Sentences need no closure and report ``closure="none"``.
    """
    cfg = cfg or EvalConfig()
    started = time.perf_counter()
    agents = model.names
    sentence = f.is_sentence(phi, agents)
    if closure == EXISTENTIAL:
        closed = existential_closure(phi, agents)
    elif closure == UNIVERSAL:
        closed = universal_closure(phi, agents)
    else:
        raise ValueError(f"unknown closure {closure!r}")

    ev = Evaluator(model, cfg)
    ev.prepare(closed)
    s0 = ev.state_index(model.initial)
    chi0 = ev.default_tables()
    if jobs > 1 and isinstance(closed, f.Quantifier):
        result = _parallel_verdict(ev, closed, s0, chi0, jobs)
    else:
        result = ev.sat(closed, s0, chi0)

    verdict = Verdict(result, NONE if sentence else closure)
    if witness:
        if result and isinstance(closed, f.Exists):
            verdict.witnesses = _pin(ev, closed, s0, chi0)
        elif not result and isinstance(closed, f.Forall):
            verdict.counterexample = _pin(ev, closed, s0, chi0)

    st = verdict.stats
    st.states = len(ev.space.states)
    st.windows = len(ev.space.windows)
    st.evaluations = ev.stats.evaluations
    st.branches = ev.stats.branches
    st.cache_hits = ev.stats.cache_hits
    st.wall_time = time.perf_counter() - started
    return verdict


# -- reports ----------------------------------------------------------------------

def _strategy_doc(s: Strategy) -> dict:
    return {"agent": s.agent, "recall": s.recall, "table": s.lines()}


def build_report(model: Ecgm, phi: f.Formula, cfg: EvalConfig, closure: str,
                 verdict: Verdict, timing: bool = False) -> dict:
    """Report as an insertion-ordered dict.

    Only schedule-independent quantities are included unless ``timing`` is
    set, so that identical inputs give byte-identical output for any
    worker count.
    """
    agents = model.names
    fr = f.free_agents(phi, agents)
    doc = {
        "model": {
            "agents": len(model.agents),
            "reachable_states": len(model.reachable),
            "edges": len(model.edges),
        },
        "formula": f.pretty(phi),
        "free": [a for a in agents if a in fr],
        "bound": [a for a in agents if a not in fr],
        "alternation": f.alternation_depth(phi),
        "sentence": not fr,
        "config": {
            "recall": cfg.recall,
            "mode": cfg.mode,
            "closure": closure,
            "cap": cfg.cap,
        },
        "verdict": {
            "result": verdict.result,
            "closure": verdict.closure,
            "witnesses": {v: _strategy_doc(s) for v, s in verdict.witnesses.items()},
            "counterexample": {v: _strategy_doc(s) for v, s in verdict.counterexample.items()},
        },
        "stats": {"states": verdict.stats.states, "windows": verdict.stats.windows},
    }
    if timing:
        doc["stats"].update(
            evaluations=verdict.stats.evaluations,
            branches=verdict.stats.branches,
            cache_hits=verdict.stats.cache_hits,
            wall_time=round(verdict.stats.wall_time, 6),
        )
    return doc


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def render_text(doc: dict) -> str:
    m, cfg, v = doc["model"], doc["config"], doc["verdict"]
    lines = [
        f"model: {m['agents']} agents, {m['reachable_states']} reachable states, {m['edges']} edges",
        f"formula: {doc['formula']}",
        f"free: {{{', '.join(doc['free'])}}}  bound: {{{', '.join(doc['bound'])}}}  "
        f"alt: {doc['alternation']}",
        f"config: recall={cfg['recall']} mode={cfg['mode']} closure={cfg['closure']} cap={cfg['cap']}",
    ]
    if doc["sentence"]:
        lines.append("note: formula is a sentence; existential and universal closure coincide")
    lines.append(f"result: {'true' if v['result'] else 'false'}")
    for title, block in (("witness", v["witnesses"]), ("counterexample", v["counterexample"])):
        for var, s in block.items():
            lines.append(f"{title} {var}:{s['agent']} (recall {s['recall']}):")
            lines.extend(f"  {row}" for row in s["table"])
    for key, value in doc["stats"].items():
        lines.append(f"stats.{key}: {value}")
    return "\n".join(lines) + "\n"
