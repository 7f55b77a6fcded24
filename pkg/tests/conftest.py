from __future__ import annotations

from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from advgts.cli.dsl import ModelFile, load_model
from advgts.corpus import MODEL_DIR
from advgts.correctness import CorrectnessQuery

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@lru_cache(maxsize=None)
def bundled(name: str) -> ModelFile:
    return load_model(MODEL_DIR / name)


def tns_query(kind: str, k: int = 0, method: str = "direct", model: str = "tns_capped.gts",
              **extra) -> CorrectnessQuery:
    m = bundled(model)
    return CorrectnessQuery(
        model=m.joint_model(), pre=m.constraint("NoBlocked"), post=m.constraint("NoBlocked"),
        kind=kind, k=k, inits=(m.graph("G0"),), method=method,
        pre_name="NoBlocked", post_name="NoBlocked", **extra)


def corpus_query(model: ModelFile, kind: str, k: int = 0, method: str = "direct",
                 **extra) -> CorrectnessQuery:
    declared = model.queries["main"]
    return CorrectnessQuery(
        model=model.joint_model(), pre=model.constraint(declared.pre),
        post=model.constraint(declared.post), kind=kind, k=k,
        inits=tuple(model.graph(n) for n in declared.inits), method=method, **extra)


@pytest.fixture(scope="session")
def tns() -> ModelFile:
    return bundled("tns.gts")


@pytest.fixture(scope="session")
def capped() -> ModelFile:
    return bundled("tns_capped.gts")


@pytest.fixture(scope="session")
def tns_b() -> ModelFile:
    return bundled("tns_b.gts")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
