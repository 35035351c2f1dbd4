"""Reliability, privacy and rate checks for schemes.

Privacy is checked on per-server query distributions: since queries are
generated without looking at the files, a server learns nothing about theta
exactly when its query has the same distribution for every theta.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import ConsistencyError, GraphPIRError, TooLargeError
from .graphcore import FileAssignment, basis_assignments
from .schemes.base import Scheme, measured_rate

EXHAUSTIVE_LIMIT = 250_000
DEFAULT_EPS = 0.05
DEFAULT_TRIALS = 10_000
MAX_REPORTED_FAILURES = 20


@dataclass
class ReliabilityReport:
    scheme: str
    graph: str
    mode: str
    cases: int = 0
    failure_count: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "pass" if self.failure_count == 0 and self.cases > 0 else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def record_failure(self, **info) -> None:
        self.failure_count += 1
        if len(self.failures) < MAX_REPORTED_FAILURES:
            self.failures.append(info)

    def to_json(self) -> dict:
        return {
            "scheme": self.scheme,
            "graph": self.graph,
            "mode": self.mode,
            "check": "reliability",
            "cases": self.cases,
            "failure_count": self.failure_count,
            "failures": self.failures,
            "verdict": self.verdict,
        }


@dataclass
class PrivacyReport:
    scheme: str
    graph: str
    mode: str
    server: int
    tv_max: Fraction | float
    verdict: str
    samples_per_theta: int = 0
    eps: float | None = None
    per_theta_distributions: dict | None = None

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_json(self) -> dict:
        out = {
            "scheme": self.scheme,
            "graph": self.graph,
            "mode": self.mode,
            "check": "privacy",
            "server": self.server,
            "tv_max": _num(self.tv_max),
            "verdict": self.verdict,
        }
        if self.mode == "sampled":
            out["samples_per_theta"] = self.samples_per_theta
            out["eps"] = self.eps
        if self.per_theta_distributions is not None:
            out["per_theta_distributions"] = self.per_theta_distributions
        return out


def _num(x):
    return str(x) if isinstance(x, Fraction) else x


def _classify(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _check_space(count: int, limit: int) -> None:
    if count > limit:
        raise TooLargeError(f"randomness space of {count} transcripts exceeds the exhaustive limit {limit}")


def verify_reliability(
    scheme: Scheme,
    mode: str = "exhaustive",
    trials: int = 1000,
    rng: random.Random | None = None,
    random_assignments: int = 2,
    transcripts: Iterable | None = None,
    limit: int = EXHAUSTIVE_LIMIT,
) -> ReliabilityReport:
    """Check that reconstruction returns the requested file exactly.

    Exhaustive mode runs every theta against every transcript with the zero
    assignment, every single-bit assignment (enough, as answers are linear
    in the files) and ``random_assignments`` random ones. ``transcripts``
    replaces the scheme's full enumeration when given. Sampled mode draws
    ``trials`` random (theta, transcript, files) triples.
    """
    rng = rng or random.Random(0)
    report = ReliabilityReport(scheme.kind, scheme.graph.describe(), mode)
    if mode == "exhaustive":
        if transcripts is None:
            _check_space(scheme.transcript_count(), limit)
            space = list(scheme.transcripts())
        else:
            space = list(transcripts)
        basis = list(basis_assignments(scheme.n_files, scheme.file_length))
        for theta in scheme.requestable():
            for transcript in space:
                qs = scheme.queries(theta, transcript)
                extra = [("random", scheme.random_files(rng)) for _ in range(random_assignments)]
                for label, files in itertools.chain(basis, extra):
                    _run_case(scheme, report, theta, qs, label, files)
    elif mode == "sampled":
        thetas = list(scheme.requestable())
        for _ in range(trials):
            theta = rng.choice(thetas)
            qs = scheme.queries(theta, scheme.random_transcript(rng))
            _run_case(scheme, report, theta, qs, "random", scheme.random_files(rng))
    else:
        raise GraphPIRError(f"unknown reliability mode {mode!r}")
    return report


def _run_case(scheme: Scheme, report: ReliabilityReport, theta, qs, label: str, files: FileAssignment) -> None:
    report.cases += 1
    try:
        got = scheme.reconstruct(theta, qs, scheme.answer_all(qs, files))
    except GraphPIRError as exc:
        report.record_failure(theta=theta, transcript=repr(qs.transcript), files=label, error=_classify(exc))
        return
    want = files[theta]
    if got != want:
        wrong = [i + 1 for i, (a, b) in enumerate(zip(got, want)) if a != b]
        report.record_failure(theta=theta, transcript=repr(qs.transcript), files=label, wrong_positions=wrong)


def total_variation(p: dict, q: dict):
    support = set(p) | set(q)
    return sum(abs(p.get(x, 0) - q.get(x, 0)) for x in support) / 2


def _max_pairwise_tv(dists: list[dict]):
    worst = Fraction(0)
    for a, b in itertools.combinations(dists, 2):
        worst = max(worst, total_variation(a, b))
    return worst


def _flatten(query, prefix=()) -> Iterable[tuple]:
    if isinstance(query, tuple) and query and not isinstance(query[0], str):
        for k, item in enumerate(query):
            yield from _flatten(item, prefix + (k,))
    else:
        yield prefix, query


def verify_privacy_all(
    scheme: Scheme,
    mode: str = "exact",
    trials: int = DEFAULT_TRIALS,
    eps: float = DEFAULT_EPS,
    rng: random.Random | None = None,
    servers: Iterable[int] | None = None,
    limit: int = EXHAUSTIVE_LIMIT,
) -> list[PrivacyReport]:
    """Privacy reports for several servers from one sweep over the randomness.

    Exact mode compares the full query distributions (a decision procedure:
    pass iff the total-variation distance is exactly 0). Sampled mode draws
    ``trials`` transcripts per theta and compares each query coordinate's
    empirical marginal, since the joint query space can dwarf the sample.
    """
    servers = list(servers) if servers is not None else list(scheme.graph.vertices())
    thetas = list(scheme.requestable())
    name, graph = scheme.kind, scheme.graph.describe()
    reports = []
    if mode == "exact":
        _check_space(scheme.transcript_count(), limit)
        counts = {s: {t: Counter() for t in thetas} for s in servers}
        total = 0
        for transcript in scheme.transcripts():
            total += 1
            for t in thetas:
                qs = scheme.queries(t, transcript)
                for s in servers:
                    counts[s][t][qs[s]] += 1
        for s in servers:
            dists = [{q: Fraction(c, total) for q, c in counts[s][t].items()} for t in thetas]
            tv = _max_pairwise_tv(dists)
            shown = None
            if all(len(d) <= 64 for d in dists):
                shown = {str(t): {repr(q): str(p) for q, p in sorted(d.items(), key=repr)} for t, d in zip(thetas, dists)}
            reports.append(PrivacyReport(name, graph, mode, s, tv, "exact-pass" if tv == 0 else "fail",
                                         per_theta_distributions=shown))
    elif mode == "sampled":
        rng = rng or random.Random(0)
        marg = {s: {t: defaultdict(Counter) for t in thetas} for s in servers}
        for t in thetas:
            for _ in range(trials):
                qs = scheme.sample_queries(t, rng)
                for s in servers:
                    for path, value in _flatten(qs[s]):
                        marg[s][t][path][value] += 1
        for s in servers:
            paths = set().union(*(marg[s][t].keys() for t in thetas))
            tv = 0.0
            for path in paths:
                dists = [{v: c / trials for v, c in marg[s][t][path].items()} for t in thetas]
                tv = max(tv, float(_max_pairwise_tv(dists)))
            verdict = f"sampled-pass({eps})" if tv <= eps else "fail"
            reports.append(PrivacyReport(name, graph, mode, s, tv, verdict, samples_per_theta=trials, eps=eps))
    else:
        raise GraphPIRError(f"unknown privacy mode {mode!r}")
    return reports


def verify_privacy(
    scheme: Scheme,
    server: int,
    mode: str = "exact",
    trials: int = DEFAULT_TRIALS,
    eps: float = DEFAULT_EPS,
    rng: random.Random | None = None,
    limit: int = EXHAUSTIVE_LIMIT,
) -> PrivacyReport:
    return verify_privacy_all(scheme, mode, trials, eps, rng, servers=[server], limit=limit)[0]


def measure_rate(scheme: Scheme) -> Fraction:
    """Measured rate L / sum of answer lengths; must equal the declared formula."""
    rate = measured_rate(scheme)
    if rate != scheme.declared_rate():
        raise ConsistencyError(f"{scheme.kind}: measured rate {rate} != declared {scheme.declared_rate()}")
    return rate
