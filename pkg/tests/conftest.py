import numpy as np
import pytest

import cofe


def random_model(rng, max_parfactors=3, max_args=3, max_domain=2, max_ground=12):
    """A small random parfactor model with TOP constraints.

    All logvars share one constant pool so randvar signatures always agree;
    potentials are continuous draws, so tables are distinct-valued almost
    surely.  Regenerates until the ground randvar count is within bounds.
    """
    while True:
        domain = tuple(f"c{k}" for k in range(int(rng.integers(1, max_domain + 1))))
        n_logvars = int(rng.integers(0, 3))
        logvars = tuple(cofe.Logvar(name, domain) for name in ("X", "Y")[:n_logvars])
        n_names = int(rng.integers(1, 5))
        arities = {
            f"r{i}": int(rng.integers(0, len(logvars) + 1)) for i in range(n_names)
        }
        parfactors = []
        for p in range(int(rng.integers(1, max_parfactors + 1))):
            args = []
            for _ in range(int(rng.integers(1, max_args + 1))):
                for _attempt in range(20):
                    name = f"r{int(rng.integers(0, n_names))}"
                    params = tuple(
                        logvars[int(rng.integers(0, len(logvars)))]
                        for _ in range(arities[name])
                    )
                    prv = cofe.PRV(name, params)
                    if prv not in args:
                        args.append(prv)
                        break
            potentials = tuple(
                float(x) for x in rng.uniform(0.1, 10.0, size=1 << len(args))
            )
            parfactors.append(cofe.Parfactor(f"g{p}", tuple(args), potentials))
        model = cofe.ParfactorModel(logvars, tuple(parfactors))
        n_ground = len({a for f in cofe.ground(model) for a in f.atoms})
        if 1 <= n_ground <= max_ground:
            return model


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def eight_value_parfactor():
    """Three propositional randvars, eight distinct potentials with one
    outlier and seven values accumulating near five."""
    prvs = tuple(cofe.PRV(name) for name in ("a", "b", "c"))
    return cofe.Parfactor("t", prvs, (1.0, 4.7, 4.8, 4.9, 5.0, 5.1, 5.2, 5.3))
