"""Scenario files: a line-oriented description of a world, microcosms and commands.

::

    world {
      event e1
      hb e1 e2
    }
    microcosm M of world {
      internal e1 < e2
      external e1 par e3
    }
    query M e1 e3
    expect query M: e1 par e3

Blocks hold one statement per line; ``world { event e1 }`` on a single line
is also accepted.  ``#`` starts a comment.  Relations are spelled ``<``,
``par`` and ``cr``.  Running a scenario produces records that render both as
text lines and as JSON objects with the same fields.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from cdeduce import bisim, offline
from cdeduce.core import Correspondence, Rel, Verdict, World, generate_world
from cdeduce.errors import CausalityError, DomainError, UntrustedStep
from cdeduce.microcosm import EXTERNAL, INTERNAL, Microcosm, add, remove, update
from cdeduce.online import decide
from cdeduce.sampling import random_add_script, removal_script


class ScenarioSyntaxError(ValueError):
    def __init__(self, lineno: int, message: str) -> None:
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


REL_TOKENS = {"<": Rel.LT, "par": Rel.PAR, "cr": Rel.CR}
VERDICT_TOKENS = {v.value: v for v in Verdict}
VERDICT_TOKENS[">"] = Verdict.HB_INV


@dataclass(frozen=True)
class WorldDecl:
    events: Tuple[str, ...] = ()
    edges: Tuple[Tuple[str, str], ...] = ()
    generate: Optional[Tuple[int, float, int]] = None

    def build(self) -> World:
        if self.generate is not None:
            n, density, seed = self.generate
            g = generate_world(n, density, seed)
            events = list(g.events) + list(self.events)
            edges = [(a, b) for a in g.events for b in g.events if g.before(a, b)]
            return World.from_edges(events, edges + list(self.edges))
        return World.from_edges(self.events, self.edges)

    def lines(self) -> List[str]:
        out = ["world {"]
        if self.generate is not None:
            n, d, s = self.generate
            out.append(f"  generate n={n} density={d!r} seed={s}")
        out += [f"  event {e}" for e in self.events]
        out += [f"  hb {a} {b}" for a, b in self.edges]
        return out + ["}"]


@dataclass(frozen=True)
class MicrocosmDecl:
    name: str
    of_world: bool
    internal: Tuple[str, ...] = ()
    external: Tuple[Tuple[str, str, str], ...] = ()
    lineno: int = field(default=0, compare=False)

    def facts(self) -> List[Correspondence]:
        return [Correspondence(a, b, REL_TOKENS[r]) for a, r, b in self.external]

    def lines(self) -> List[str]:
        out = [f"microcosm {self.name} of {'world' if self.of_world else 'none'} {{"]
        if self.internal:
            out.append("  internal " + " < ".join(self.internal))
        out += [f"  external {a} {r} {b}" for a, r, b in self.external]
        return out + ["}"]


@dataclass(frozen=True)
class Command:
    kind: str
    args: Tuple[str, ...]
    lineno: int = field(default=0, compare=False)

    def text(self) -> str:
        return " ".join((self.kind,) + self.args)


@dataclass(frozen=True)
class Scenario:
    world: Optional[WorldDecl]
    microcosms: Tuple[MicrocosmDecl, ...]
    commands: Tuple[Command, ...]

    def serialize(self) -> str:
        out: List[str] = []
        if self.world is not None:
            out += self.world.lines()
        for d in self.microcosms:
            out += d.lines()
        out += [c.text() for c in self.commands]
        return "\n".join(out) + "\n"


# -- parsing -----------------------------------------------------------------

def _logical_lines(text: str) -> List[Tuple[int, List[str]]]:
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        line = line.replace("{", " { \n").replace("}", "\n } \n")
        for piece in line.split("\n"):
            toks = piece.split()
            if toks:
                out.append((no, toks))
    return out


def _kv(no: int, tok: str, key: str, conv):
    if not tok.startswith(key + "="):
        raise ScenarioSyntaxError(no, f"expected {key}=<value>, got {tok!r}")
    try:
        return conv(tok[len(key) + 1:])
    except ValueError:
        raise ScenarioSyntaxError(no, f"bad value in {tok!r}") from None


def _rel(no: int, tok: str) -> str:
    if tok not in REL_TOKENS:
        raise ScenarioSyntaxError(no, f"unknown relation {tok!r} (use <, par or cr)")
    return tok


class _Parser:
    def __init__(self, text: str) -> None:
        self.lines = _logical_lines(text)
        self.pos = 0
        self.world: Optional[WorldDecl] = None
        self.world_events: Optional[set] = None
        self.decls: Dict[str, MicrocosmDecl] = {}
        self.commands: List[Command] = []

    def block(self, no: int, header: List[str]) -> List[Tuple[int, List[str]]]:
        if header[-1] != "{":
            raise ScenarioSyntaxError(no, "expected '{' at end of block header")
        body = []
        while self.pos < len(self.lines):
            n, toks = self.lines[self.pos]
            self.pos += 1
            if toks == ["}"]:
                return body
            if "{" in toks or "}" in toks:
                raise ScenarioSyntaxError(n, "nested or misplaced brace")
            body.append((n, toks))
        raise ScenarioSyntaxError(no, "block is never closed")

    def event(self, no: int, e: str) -> str:
        if self.world_events is not None and e not in self.world_events:
            raise ScenarioSyntaxError(no, f"undeclared event {e!r}")
        return e

    def name(self, no: int, m: str) -> str:
        m = m.rstrip(":")
        if m not in self.decls:
            raise ScenarioSyntaxError(no, f"undeclared microcosm {m!r}")
        return m

    def parse(self) -> Scenario:
        while self.pos < len(self.lines):
            no, toks = self.lines[self.pos]
            self.pos += 1
            head = toks[0]
            if head == "world":
                self.parse_world(no, toks)
            elif head == "microcosm":
                self.parse_microcosm(no, toks)
            elif head in _COMMANDS:
                self.commands.append(Command(head, tuple(toks[1:]), no))
                _COMMANDS[head](self, no, toks[1:])
            else:
                raise ScenarioSyntaxError(no, f"unknown statement {head!r}")
        return Scenario(self.world, tuple(self.decls.values()), tuple(self.commands))

    def parse_world(self, no: int, toks: List[str]) -> None:
        if self.world is not None:
            raise ScenarioSyntaxError(no, "duplicate world block")
        if self.decls or self.commands:
            raise ScenarioSyntaxError(no, "the world block must come first")
        if toks != ["world", "{"]:
            raise ScenarioSyntaxError(no, "expected 'world {'")
        events: List[str] = []
        edges: List[Tuple[str, str]] = []
        gen = None
        for n, t in self.block(no, toks):
            if t[0] == "event" and len(t) == 2:
                if t[1] in events:
                    raise ScenarioSyntaxError(n, f"duplicate event {t[1]!r}")
                events.append(t[1])
            elif t[0] == "hb" and len(t) == 3:
                edges.append((t[1], t[2]))
            elif t[0] == "generate" and len(t) == 4:
                if gen is not None:
                    raise ScenarioSyntaxError(n, "duplicate generate statement")
                gen = (_kv(n, t[1], "n", int), _kv(n, t[2], "density", float),
                       _kv(n, t[3], "seed", int))
            else:
                raise ScenarioSyntaxError(n, f"malformed world statement {' '.join(t)!r}")
        decl = WorldDecl(tuple(events), tuple(edges), gen)
        try:
            w = decl.build()
        except DomainError as exc:
            raise ScenarioSyntaxError(no, str(exc)) from None
        self.world = decl
        self.world_events = set(w.events)

    def parse_microcosm(self, no: int, toks: List[str]) -> None:
        if len(toks) != 5 or toks[2] != "of" or toks[3] not in ("world", "none"):
            raise ScenarioSyntaxError(no, "expected 'microcosm <name> of <world|none> {'")
        name = toks[1]
        if name in self.decls:
            raise ScenarioSyntaxError(no, f"duplicate microcosm {name!r}")
        of_world = toks[3] == "world"
        if of_world and self.world is None:
            raise ScenarioSyntaxError(no, "microcosm refers to a world that is not declared")
        internal: Tuple[str, ...] = ()
        external = []
        check = self.event if of_world else (lambda n, e: e)
        for n, t in self.block(no, toks):
            if t[0] == "internal":
                if internal:
                    raise ScenarioSyntaxError(n, "duplicate internal chain")
                chain = t[1:]
                if len(chain) < 3 or len(chain) % 2 == 0 or any(x != "<" for x in chain[1::2]):
                    raise ScenarioSyntaxError(n, "expected 'internal a < b [< c ...]'")
                internal = tuple(check(n, e) for e in chain[0::2])
            elif t[0] == "external" and len(t) == 4:
                external.append((check(n, t[1]), _rel(n, t[2]), check(n, t[3])))
            else:
                raise ScenarioSyntaxError(n, f"malformed microcosm statement {' '.join(t)!r}")
        self.decls[name] = MicrocosmDecl(name, of_world, internal, tuple(external), no)

    # -- command argument checks ------------------------------------------

    def c_query(self, no, a):
        if len(a) != 3:
            raise ScenarioSyntaxError(no, "expected 'query <m> <a> <b>'")
        self.name(no, a[0])
        self.event(no, a[1]), self.event(no, a[2])

    def c_corr(self, no, a, what):
        if len(a) != 3:
            raise ScenarioSyntaxError(no, f"expected '{what} <a> <rel> <b>'")
        self.event(no, a[0]), _rel(no, a[1]), self.event(no, a[2])

    def c_add(self, no, a):
        if len(a) != 5 or a[1] not in ("int", "ext"):
            raise ScenarioSyntaxError(no, "expected 'add <m> (int|ext) <a> <rel> <b>'")
        self.name(no, a[0])
        self.c_corr(no, a[2:], "add <m> (int|ext)")

    def c_update(self, no, a):
        if len(a) != 4 or a[2] != "<":
            raise ScenarioSyntaxError(no, "expected 'update <m> <a> < <b>'")
        self.name(no, a[0])
        self.event(no, a[1]), self.event(no, a[3])

    def c_remove(self, no, a):
        if len(a) != 4:
            raise ScenarioSyntaxError(no, "expected 'remove <m> <a> <rel> <b>'")
        self.name(no, a[0])
        self.c_corr(no, a[1:], "remove <m>")

    def c_refute(self, no, a):
        if len(a) != 4:
            raise ScenarioSyntaxError(no, "expected 'refute <m> <a> <rel> <b>'")
        self.name(no, a[0])
        self.c_corr(no, a[1:], "refute <m>")

    def c_saturate(self, no, a):
        if not a or len(a) > 2:
            raise ScenarioSyntaxError(no, "expected 'saturate-offline <m> [depth=<int>]'")
        self.name(no, a[0])
        if len(a) == 2:
            _kv(no, a[1], "depth", int)

    def c_show(self, no, a):
        if len(a) != 1:
            raise ScenarioSyntaxError(no, "expected 'show <m>'")
        self.name(no, a[0])

    def c_pair(self, no, a, what):
        if len(a) != 2:
            raise ScenarioSyntaxError(no, f"expected '{what} <m1> <m2>'")
        self.name(no, a[0]), self.name(no, a[1])

    def c_bisim(self, no, a):
        if len(a) < 3 or a[0] not in ("forward", "backward"):
            raise ScenarioSyntaxError(no, "expected 'bisim (forward|backward) <m1> <m2> ...'")
        self.c_pair(no, a[1:3], "bisim <kind>")
        _options(no, a[3:], {"depth": int, "budget": int})

    def c_experiment(self, no, a):
        if len(a) < 3 or a[0] not in ("forward", "backward"):
            raise ScenarioSyntaxError(
                no, "expected 'experiment (forward|backward) <m1> <m2> steps=<k> trials=<t> [seed=<s>]'")
        self.c_pair(no, a[1:3], "experiment <kind>")
        opts = _options(no, a[3:], {"steps": int, "trials": int, "seed": int})
        if "steps" not in opts or "trials" not in opts:
            raise ScenarioSyntaxError(no, "experiment needs steps= and trials=")

    def c_expect(self, no, a):
        if not a:
            raise ScenarioSyntaxError(no, "empty expectation")
        k, rest = a[0], a[1:]
        if k == "ok" and not rest:
            return
        if k == "error" and rest:
            if len(rest) > 1 and rest[1] != "witness":
                raise ScenarioSyntaxError(no, "expected 'expect error <Tag> [witness ...]'")
            return
        if k == "query" and len(rest) == 4:
            self.name(no, rest[0])
            if rest[2] not in VERDICT_TOKENS:
                raise ScenarioSyntaxError(no, f"unknown verdict {rest[2]!r}")
            self.event(no, rest[1]), self.event(no, rest[3])
            return
        if k == "offline" and len(rest) == 4:
            self.name(no, rest[0])
            r = rest[2][4:] if rest[2].startswith("not-") else rest[2]
            if r not in ("<", "par", "cr", "?"):
                raise ScenarioSyntaxError(no, f"unknown offline relation {rest[2]!r}")
            self.event(no, rest[1]), self.event(no, rest[3])
            return
        if k in ("analogous", "not-analogous") and len(rest) == 2:
            self.c_pair(no, rest, f"expect {k}")
            return
        if k in ("bisim", "not-bisim") and len(rest) >= 3 and rest[0] in ("forward", "backward"):
            self.c_pair(no, rest[1:3], f"expect {k} <kind>")
            if len(rest) > 3:
                if rest[3] != "after":
                    raise ScenarioSyntaxError(no, "expected 'after <a> <rel> <b> [, ...]'")
                _path(no, rest[4:])
            return
        if k == "experiment" and rest in (["pass"], ["fail"]):
            return
        raise ScenarioSyntaxError(no, f"malformed expectation {' '.join(a)!r}")


def _options(no: int, toks: Sequence[str], schema: Dict[str, Any]) -> Dict[str, Any]:
    out = {}
    for t in toks:
        key = t.split("=", 1)[0]
        if key not in schema or "=" not in t:
            raise ScenarioSyntaxError(no, f"unknown option {t!r}")
        if key in out:
            raise ScenarioSyntaxError(no, f"duplicate option {key!r}")
        out[key] = _kv(no, t, key, schema[key])
    return out


def _path(no: int, toks: Sequence[str]) -> Tuple[Correspondence, ...]:
    groups, cur = [], []
    for t in list(toks) + [","]:
        if t == ",":
            if len(cur) != 3:
                raise ScenarioSyntaxError(no, "path steps are '<a> <rel> <b>' separated by ','")
            groups.append(Correspondence(cur[0], cur[2], REL_TOKENS[_rel(no, cur[1])]))
            cur = []
        else:
            cur.append(t)
    return tuple(groups)


_COMMANDS = {
    "query": _Parser.c_query,
    "add": _Parser.c_add,
    "update": _Parser.c_update,
    "remove": _Parser.c_remove,
    "refute": _Parser.c_refute,
    "saturate-offline": _Parser.c_saturate,
    "show": _Parser.c_show,
    "analogy": lambda p, no, a: p.c_pair(no, a, "analogy"),
    "bisim": _Parser.c_bisim,
    "experiment": _Parser.c_experiment,
    "expect": _Parser.c_expect,
}


def parse_scenario(text: str) -> Scenario:
    """Parse scenario text; raises :class:`ScenarioSyntaxError` on the first problem."""
    return _Parser(text).parse()


# -- running -----------------------------------------------------------------

@dataclass(frozen=True)
class Record:
    kind: str
    fields: Tuple[Tuple[str, Any], ...]

    def get(self, key: str, default=None):
        return dict(self.fields).get(key, default)

    def text(self) -> str:
        return " ".join(str(v) for _, v in self.fields if v not in (None, ""))

    def as_json(self) -> str:
        return json.dumps({"kind": self.kind, **dict(self.fields)})


def _rec(kind: str, /, **fields) -> Record:
    return Record(kind, tuple(fields.items()))


@dataclass
class RunResult:
    records: List[Record]
    failures: int
    microcosms: Dict[str, Microcosm]

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def text(self) -> str:
        return "".join(r.text() + "\n" for r in self.records)

    def json(self) -> str:
        return "".join(r.as_json() + "\n" for r in self.records)


def build_microcosms(s: Scenario) -> Tuple[Optional[World], Dict[str, Microcosm], List[Record]]:
    """Construct the declared microcosms, reporting invalid declarations as records."""
    world = s.world.build() if s.world is not None else None
    out: Dict[str, Microcosm] = {}
    recs: List[Record] = []
    for d in s.microcosms:
        w = world if d.of_world else None
        try:
            out[d.name] = Microcosm.build(d.internal, d.facts(), w)
            recs.append(_rec("declare", cmd="declare", m=d.name, status="ok"))
        except CausalityError as exc:
            out[d.name] = Microcosm((), frozenset(), w)
            recs.append(_error_record("declare", d.name, exc))
    return world, out, recs


def _error_record(cmd: str, target: str, exc: CausalityError) -> Record:
    wit = " ".join(str(x) for x in exc.witness)
    return _rec("error", cmd=cmd, m=target, status="error", tag=exc.tag,
                witness=("witness " + wit) if wit else "", message=f"({exc})")


class _Runner:
    def __init__(self, s: Scenario, trace: bool, seed: Optional[int], trust: bool) -> None:
        self.s = s
        self.trace = trace
        self.seed = 0 if seed is None else seed
        self.trust = trust
        self.world, self.ms, self.records = build_microcosms(s)
        self.failures = 0
        self.last: Optional[Record] = self.records[-1] if self.records else None
        self.last_experiment = None

    def emit(self, r: Record) -> None:
        self.records.append(r)

    def emit_tree(self, tree) -> None:
        if self.trace and tree is not None:
            for line in tree.format().splitlines():
                self.emit(_rec("trace", line="  " + line))

    def run(self) -> RunResult:
        for c in self.s.commands:
            if c.kind == "expect":
                self.expect(c)
                continue
            try:
                rec = getattr(self, "do_" + c.kind.replace("-", "_"))(c.args)
            except CausalityError as exc:
                rec = _error_record(c.kind, c.args[1] if c.kind == "bisim" else c.args[0], exc)
                self.emit(rec)
            self.last = rec
        return RunResult(self.records, self.failures, dict(self.ms))

    # -- commands ---------------------------------------------------------

    def corr(self, a, r, b) -> Correspondence:
        return Correspondence(a, b, REL_TOKENS[r])

    def guard(self, m: Microcosm, what: str) -> None:
        if m.world is None and not self.trust:
            raise UntrustedStep(f"{what} on a world-free microcosm needs --trust")

    def do_query(self, a) -> Record:
        d = decide(self.ms[a[0]], a[1], a[2])
        r = _rec("query", cmd="query", m=a[0], a=a[1], b=a[2], arrow="->",
                 verdict=d.verdict.value)
        self.emit(r)
        self.emit_tree(d.tree)
        return r

    def do_add(self, a) -> Record:
        m = self.ms[a[0]]
        self.guard(m, "add")
        c = self.corr(*a[2:])
        self.ms[a[0]] = add(m, c, INTERNAL if a[1] == "int" else EXTERNAL)
        return self._ok("add", a)

    def do_update(self, a) -> Record:
        m = self.ms[a[0]]
        self.guard(m, "update")
        self.ms[a[0]] = update(m, self.corr(a[1], "<", a[3]))
        return self._ok("update", a)

    def do_remove(self, a) -> Record:
        self.ms[a[0]] = remove(self.ms[a[0]], self.corr(*a[1:]))
        return self._ok("remove", a)

    def _ok(self, cmd, a) -> Record:
        r = _rec(cmd, cmd=cmd, args=" ".join(a), arrow="->", status="ok")
        self.emit(r)
        return r

    def do_show(self, a) -> Record:
        r = _rec("show", cmd="show", m=a[0], value=str(self.ms[a[0]]))
        self.emit(r)
        return r

    def do_refute(self, a) -> Record:
        m = self.ms[a[0]]
        c = self.corr(*a[1:])
        if c.rel is Rel.LT and Correspondence(c.left, c.right, Rel.CR) in m.external:
            ref = offline.refute_by_update(m, c)
        else:
            ref = offline.refute_by_addition(m, c)
        r = _rec("refute", cmd="refute", args=" ".join(a), arrow="->",
                 status="refuted" if ref else "not-refuted")
        self.emit(r)
        self.emit_tree(ref.tree)
        return r

    def do_saturate_offline(self, a) -> Record:
        depth = int(a[1].split("=", 1)[1]) if len(a) > 1 else None
        res = offline.offline_saturate(self.ms[a[0]], depth=depth, mode="rules")
        for f in res.sorted_facts():
            self.emit(_rec("offline", cmd="offline", m=a[0], fact=str(f)))
            self.emit_tree(f.provenance)
        r = _rec("saturate", cmd="saturate-offline", m=a[0], facts=f"facts={len(res.facts)}",
                 complete="incomplete" if res.incomplete else "complete")
        self.emit(r)
        return r

    def do_analogy(self, a) -> Record:
        an = bisim.analogous(self.ms[a[0]], self.ms[a[1]])
        r = _rec("analogy", cmd="analogy", m1=a[0], m2=a[1], arrow="->", result=str(an))
        self.emit(r)
        return r

    def _game(self, kind, m1, m2, depth=2, budget=2000):
        a, b = self.ms[m1], self.ms[m2]
        if kind == "forward":
            w = a.world or b.world
            if w is None:
                raise DomainError("a forward bisimulation game needs a world")
            return bisim.check_forward_bisimulation(a, b, w, budget, depth)
        return bisim.check_backward_bisimulation(a, b, budget, depth)

    def do_bisim(self, a) -> Record:
        opts = _options(0, a[3:], {"depth": int, "budget": int})
        g = self._game(a[0], a[1], a[2], **opts)
        r = _rec("bisim", cmd="bisim", kind=a[0], m1=a[1], m2=a[2], arrow="->", result=str(g))
        self.emit(r)
        return r

    def do_experiment(self, a) -> Record:
        kind, n1, n2 = a[0], a[1], a[2]
        opts = _options(0, a[3:], {"steps": int, "trials": int, "seed": int})
        seed = opts.get("seed", self.seed)
        m1, m2 = self.ms[n1], self.ms[n2]
        rng = random.Random(seed)
        if kind == "forward":
            if m1.world is None:
                raise DomainError("a forward experiment needs a world to draw steps from")
            steps = random_add_script(m1.world, m1, opts["steps"], rng)
        else:
            steps = removal_script(m1, opts["steps"], rng)
        rep = bisim.run_permutation_experiment(m1, m2, steps, kind, opts["trials"], seed)
        self.emit(_rec("script", cmd="script", steps="; ".join(str(s) for s in steps)))
        for line in rep.lines()[:-1]:
            t = line.split()
            self.emit(_rec("trial", cmd="trial", index=t[1], result=t[2],
                           detail=" ".join(t[3:])))
        r = _rec("experiment", cmd="experiment", kind=kind,
                 result="pass" if rep.passed else "fail",
                 legal=f"legal={len(rep.trials)}/{rep.requested}", illegal=f"illegal={rep.illegal}")
        self.emit(r)
        self.last_experiment = rep
        return r

    # -- expectations -----------------------------------------------------

    def expect(self, c: Command) -> None:
        try:
            ok, detail = self.check(c.args)
        except CausalityError as exc:
            ok, detail = False, f"{exc.tag}: {exc}"
        if not ok:
            self.failures += 1
        self.emit(_rec("expect", cmd="expect", what=" ".join(c.args), arrow="->",
                       result="pass" if ok else "fail", detail=detail))

    def check(self, a) -> Tuple[bool, str]:
        k, rest = a[0], a[1:]
        last = self.last
        if k == "ok":
            ok = last is not None and last.kind != "error"
            return ok, "" if ok else _describe(last)
        if k == "error":
            if last is None or last.kind != "error":
                return False, "previous step did not fail"
            if last.get("tag") != rest[0]:
                return False, f"got {last.get('tag')}"
            if len(rest) > 1:
                want = "witness " + " ".join(rest[2:])
                if last.get("witness") != want:
                    return False, f"got {last.get('witness') or 'no witness'}"
            return True, ""
        if k == "query":
            m = self.ms[rest[0].rstrip(":")]
            got = decide(m, rest[1], rest[3]).verdict
            want = VERDICT_TOKENS[rest[2]]
            return got is want, "" if got is want else f"got {got.value}"
        if k == "offline":
            m = self.ms[rest[0].rstrip(":")]
            neg = rest[2].startswith("not-")
            rel = Rel.parse(rest[2][4:] if neg else rest[2])
            res = offline.offline_saturate(m, mode="rules")
            ok = res.holds(rest[1], rel, rest[3], refuted=neg)
            return ok, "" if ok else "not derived"
        if k in ("analogous", "not-analogous"):
            an = bisim.analogous(self.ms[rest[0]], self.ms[rest[1]])
            ok = an.holds == (k == "analogous")
            return ok, "" if ok else str(an)
        if k in ("bisim", "not-bisim"):
            g = self._game(rest[0], rest[1], rest[2])
            ok = g.holds == (k == "bisim")
            if ok and len(rest) > 3:
                want = _path(0, rest[4:])
                ok = g.path == want
            return ok, "" if ok else str(g)
        if k == "experiment":
            rep = self.last_experiment
            if rep is None:
                return False, "no experiment has run"
            ok = rep.passed == (rest[0] == "pass")
            return ok, "" if ok else "; ".join(t.line() for t in rep.failures[:3])
        raise DomainError(f"unknown expectation {k!r}")


def _describe(r: Optional[Record]) -> str:
    if r is None:
        return "no previous step"
    return f"{r.get('tag')} {r.get('witness') or ''}".strip()


def run_scenario(s: Scenario, trace: bool = False, seed: Optional[int] = None,
                 trust: bool = False) -> RunResult:
    """Execute the commands in order; ``failures`` counts failed expectations."""
    return _Runner(s, trace, seed, trust).run()

